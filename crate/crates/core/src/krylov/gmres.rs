use super::precond::{preconditioners, Preconditioner};
use crate::error::{Error, Result};
use crate::fem::SaddleSystem;
use crate::scalar::{axpy, dot, norm2, Scalar};
use crate::sparse::CsrMatrix;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Relative residual target.
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
    /// Registered preconditioner name.
    pub preconditioner: String,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            restart: 200,
            max_iters: 200_000,
            preconditioner: "jacobi".into(),
        }
    }
}

impl SolverSettings {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!(
                "tolerance {} not in (0, 1)",
                self.tol
            )));
        }
        if self.restart == 0 || self.max_iters == 0 {
            return Err(Error::Config(
                "restart and max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual `‖R - A X‖ / ‖R‖` of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Relative least-squares residual after every inner iteration.
    pub history: Vec<f64>,
}

/// Solves a saddle system with the preconditioner named in `settings`.
pub fn gmres_solve<T: Scalar>(
    system: &SaddleSystem<T>,
    settings: &SolverSettings,
    x0: Option<&[T]>,
) -> Result<(Vec<T>, SolveReport)> {
    settings.validate()?;
    let pc = preconditioners::<T>()
        .get(&settings.preconditioner)?
        .build(&system.matrix);
    Ok(gmres(
        &system.matrix,
        &system.rhs,
        x0,
        settings,
        pc.as_ref(),
    ))
}

/// Restarted right-preconditioned GMRES with modified Gram-Schmidt and
/// Givens rotations. Returns the best iterate; `converged` is decided on the
/// true residual.
pub fn gmres<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    settings: &SolverSettings,
    pc: &dyn Preconditioner<T>,
) -> (Vec<T>, SolveReport) {
    let start = Instant::now();
    let n = b.len();
    let m = settings.restart.max(1);
    let mut report = SolveReport::default();
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = T::zero());
        report.converged = true;
        report.wall_time = start.elapsed().as_secs_f64();
        return (x, report);
    }
    let mut r = residual(a, b, &x);
    let mut beta = norm2(&r);
    report.residual = beta / bnorm;

    let mut v: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![T::zero(); m]; m + 1];
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![T::zero(); m];
    let mut g = vec![T::zero(); m + 1];
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];

    while report.residual > settings.tol && report.iterations < settings.max_iters {
        v.clear();
        v.push(r.iter().map(|&ri| ri.scale(1.0 / beta)).collect());
        g.iter_mut().for_each(|gi| *gi = T::zero());
        g[0] = T::from_real(beta);
        let mut k = 0;
        while k < m && report.iterations < settings.max_iters {
            pc.apply(&v[k], &mut z);
            a.mul_vec_into(&z, &mut w);
            for i in 0..=k {
                let hik = dot(&v[i], &w);
                h[i][k] = hik;
                axpy(-hik, &v[i], &mut w);
            }
            let hnext = norm2(&w);
            for i in 0..k {
                let (t0, t1) = (h[i][k], h[i + 1][k]);
                h[i][k] = t0.scale(cs[i]) + sn[i] * t1;
                h[i + 1][k] = -(sn[i].conj() * t0) + t1.scale(cs[i]);
            }
            let (c, s, rr) = givens(h[k][k], hnext);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = rr;
            g[k + 1] = -(s.conj() * g[k]);
            g[k] = g[k].scale(c);
            k += 1;
            report.iterations += 1;
            let est = g[k].abs() / bnorm;
            report.history.push(est);
            let breakdown = hnext <= 1e-14 * rr.abs().max(f64::MIN_POSITIVE);
            if breakdown || est <= settings.tol {
                break;
            }
            v.push(w.iter().map(|&wi| wi.scale(1.0 / hnext)).collect());
        }
        // back substitution for the k-column least-squares problem
        let mut y = g[..k].to_vec();
        for i in (0..k).rev() {
            for j in i + 1..k {
                let t = h[i][j] * y[j];
                y[i] -= t;
            }
            y[i] = y[i] / h[i][i];
        }
        let mut u = vec![T::zero(); n];
        for (j, &yj) in y.iter().enumerate() {
            axpy(yj, &v[j], &mut u);
        }
        pc.apply(&u, &mut z);
        let mut trial = x.clone();
        axpy(T::one(), &z, &mut trial);
        let r_trial = residual(a, b, &trial);
        let beta_trial = norm2(&r_trial);
        if !(beta_trial < beta) {
            // no progress over a full cycle: stagnation
            if beta_trial.is_nan() {
                log::warn!("GMRES produced a non-finite iterate");
            }
            break;
        }
        x = trial;
        r = r_trial;
        beta = beta_trial;
        report.residual = beta / bnorm;
    }
    report.converged = report.residual <= settings.tol;
    report.wall_time = start.elapsed().as_secs_f64();
    (x, report)
}

fn residual<T: Scalar>(a: &CsrMatrix<T>, b: &[T], x: &[T]) -> Vec<T> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(&bi, axi)| bi - axi).collect()
}

/// Rotation `[c, s; -conj(s), c]` mapping `(a, b)` to `(r, 0)`, `b` real.
fn givens<T: Scalar>(a: T, b: f64) -> (f64, T, T) {
    let aa = a.abs();
    if aa == 0.0 {
        return (0.0, T::one(), T::from_real(b));
    }
    let r = aa.hypot(b);
    let phase = a.scale(1.0 / aa);
    (aa / r, phase.scale(b / r), phase.scale(r))
}
