//! Small self-contained numeric kernel: special functions and quantiles,
//! dense linear algebra for the small matrices used by the estimators, and
//! closed-form polynomial roots.

mod linalg;
mod roots;
mod special;

pub use linalg::{dense_inverse, dense_solve, symmetric_pseudo_inverse, Matrix};
pub use roots::{real_roots_cubic, real_roots_quadratic, Cubic};
pub use special::{
    chi2_cdf, chi2_quantile, chi2_sf, ln_gamma, normal_cdf, normal_quantile, regularized_gamma_p,
    regularized_gamma_q,
};
