use crate::registry::Registry;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Action `z = P r` of a right preconditioner.
pub trait Preconditioner<T: Scalar>: Send + Sync {
    fn apply(&self, r: &[T], z: &mut [T]);
}

/// Builds a preconditioner for a given matrix.
pub trait PreconditionerFactory<T: Scalar>: Send + Sync {
    fn build(&self, a: &CsrMatrix<T>) -> Box<dyn Preconditioner<T>>;
}

pub struct Identity;

impl<T: Scalar> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling.
pub struct Diagonal<T> {
    pub scale: Vec<T>,
}

impl<T: Scalar> Preconditioner<T> for Diagonal<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, ri), si) in z.iter_mut().zip(r).zip(&self.scale) {
            *zi = *ri * *si;
        }
    }
}

/// Jacobi scaling: `1/a_ii`, or 1 where the diagonal vanishes.
pub fn jacobi_precondition<T: Scalar>(a: &CsrMatrix<T>) -> Vec<T> {
    a.diagonal()
        .into_iter()
        .map(|d| {
            if d.abs2() == 0.0 {
                T::one()
            } else {
                T::one() / d
            }
        })
        .collect()
}

struct NoneFactory;
struct JacobiFactory;

impl<T: Scalar> PreconditionerFactory<T> for NoneFactory {
    fn build(&self, _a: &CsrMatrix<T>) -> Box<dyn Preconditioner<T>> {
        Box::new(Identity)
    }
}

impl<T: Scalar> PreconditionerFactory<T> for JacobiFactory {
    fn build(&self, a: &CsrMatrix<T>) -> Box<dyn Preconditioner<T>> {
        Box::new(Diagonal {
            scale: jacobi_precondition(a),
        })
    }
}

/// Built-in preconditioners: `none` and `jacobi`.
pub fn preconditioners<T: Scalar>() -> Registry<dyn PreconditionerFactory<T>> {
    let mut r: Registry<dyn PreconditionerFactory<T>> = Registry::new("preconditioner");
    r.register("none", Box::new(NoneFactory));
    r.register("jacobi", Box::new(JacobiFactory));
    r
}
