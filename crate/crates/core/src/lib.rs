//! Frequency-domain mixed finite elements for time-periodic Stokes flow.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod case;
pub mod error;
pub mod fem;
pub mod krylov;
pub mod mesh;
pub mod mss;
pub mod oracles;
pub mod registry;
pub mod scalar;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
