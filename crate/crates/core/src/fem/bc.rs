use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// Boundary data on one patch: a spatially uniform vector, or values per
/// velocity node of the patch.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchValue<T> {
    Uniform([T; 3]),
    Nodal(BTreeMap<usize, [T; 3]>),
}

impl<T: Scalar> PatchValue<T> {
    pub fn zero() -> Self {
        PatchValue::Uniform([T::zero(); 3])
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PatchValue::Uniform(v) => v.iter().all(|x| x.abs2() == 0.0),
            PatchValue::Nodal(m) => m.values().flatten().all(|x| x.abs2() == 0.0),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        match self {
            PatchValue::Uniform(v) => PatchValue::Uniform(v.map(|x| x * s)),
            PatchValue::Nodal(m) => {
                PatchValue::Nodal(m.iter().map(|(&k, v)| (k, v.map(|x| x * s))).collect())
            }
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> PatchValue<U> {
        match self {
            PatchValue::Uniform(v) => PatchValue::Uniform(v.map(&f)),
            PatchValue::Nodal(m) => {
                PatchValue::Nodal(m.iter().map(|(&k, v)| (k, v.map(&f))).collect())
            }
        }
    }
}

/// Dirichlet velocities and Neumann tractions keyed by patch name. Wall
/// patches are always zero and take no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData<T> {
    pub dirichlet: BTreeMap<String, PatchValue<T>>,
    pub neumann: BTreeMap<String, PatchValue<T>>,
}

impl<T> Default for BoundaryData<T> {
    fn default() -> Self {
        Self {
            dirichlet: BTreeMap::new(),
            neumann: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> BoundaryData<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dirichlet(mut self, patch: &str, v: PatchValue<T>) -> Self {
        self.dirichlet.insert(patch.to_string(), v);
        self
    }

    pub fn with_neumann(mut self, patch: &str, v: PatchValue<T>) -> Self {
        self.neumann.insert(patch.to_string(), v);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.dirichlet
            .values()
            .chain(self.neumann.values())
            .all(PatchValue::is_zero)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            dirichlet: self
                .dirichlet
                .iter()
                .map(|(k, v)| (k.clone(), v.scaled(s)))
                .collect(),
            neumann: self
                .neumann
                .iter()
                .map(|(k, v)| (k.clone(), v.scaled(s)))
                .collect(),
        }
    }
}
