//! Numerical kernels shared by the spectral, stable and conditioning code.

mod fit;
mod gamma;
mod quadrature;
mod roots;

pub use fit::power_tail_fit;
pub use gamma::{gamma, log_gamma, reciprocal_reflection};
pub use quadrature::{adaptive_gk, gauss_jacobi, integrate_singular, QuadratureSpec};
pub use roots::find_root;
