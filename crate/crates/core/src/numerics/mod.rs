//! Numerical kernel shared by the statistical modules: normal and chi-square
//! distribution functions, quantile inversion, Gauss-Legendre quadrature and
//! small dense linear algebra.

mod linalg;
mod quadrature;
mod special;

pub use linalg::{invert_matrix, quadratic_form, SmallMatrix, MAX_DIM};
pub use quadrature::{
    gauss_legendre_integrate, invert_monotone_cdf, mixture_cdf, GaussLegendre, GaussianMixture2,
};
pub use special::{
    chi_square_cdf, chi_square_pdf, chi_square_quantile, ln_gamma, regularized_lower_gamma,
    std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf,
};
