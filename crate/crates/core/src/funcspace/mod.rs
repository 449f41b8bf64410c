//! Analytic functions on the unit disk, their boundary traces and Hardy norms.

mod exponent;
mod expr;
mod function;
mod selfmap;
mod trace;

pub use exponent::Exponent;
pub use expr::{parse_expression, SyntaxError};
pub use function::{DiscFunction, DOMAIN_TOL, SINGULAR_TOL};
pub use selfmap::{radial_dilation, SelfMap, NONCONSTANT_TOL};
pub use trace::{
    boundary_trace, coefficients_from_grid, grid_point, hardy_norm, hardy_norm_detailed, hardy_norm_on_grid,
    taylor_coefficients, taylor_coefficients_on, BoundaryGrid, HardyNorm, QuadratureConfig, TaylorCoefficients,
    ALIASING_TOL,
};

pub(crate) use trace::check_grid_size;
