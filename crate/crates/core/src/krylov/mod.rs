//! Restarted GMRES with diagonal preconditioning.

mod gmres;
mod precond;

pub use gmres::{gmres, gmres_solve, SolveReport, SolverSettings};
pub use precond::{
    jacobi_precondition, preconditioners, Diagonal, Identity, Preconditioner, PreconditionerFactory,
};
