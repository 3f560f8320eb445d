//! Simplex shape functions, quadrature and assembly of the mixed
//! velocity-pressure system.

mod bc;
mod operators;
mod quadrature;
mod shapes;
mod system;

pub use bc::{BoundaryData, PatchValue};
pub use operators::{Csr3, DofMap, FluidProps, Operators, ViscousForm};
pub use quadrature::{gauss_legendre, simplex_rule, QuadratureRule};
pub use shapes::{linear_basis, quadratic_basis, reference_shapes, ElementGeometry, ShapeSet};
pub use system::{
    assemble_mode_system, boundary_traction_load, dirichlet_values, neumann_load,
    ComplexSaddleSystem, SaddleSystem,
};
