//! Bergman kernels, orthogonal bases and the `L^p` theory of the Bergman
//! projection on generalized Hartogs triangles
//!
//! ```text
//! Ω_k = { (z, w) ∈ ℂ × ℂⁿ : |z| < 1, |w_j| < |z|^k for every j }
//! H_k = { (z, w) ∈ ℂ × ℂⁿ : |z| < 1, |w| < |z|^k }
//! ```
//!
//! together with the model domains they are built from (disc, punctured
//! disc, polydisc, ball).

pub mod basis;
pub mod domains;
pub mod error;
pub mod integrate;
pub mod kernels;
pub mod lp_analysis;
pub mod projection;

pub use num_complex::Complex64;
pub use num_rational::Ratio;

pub use basis::{enumerate, is_admissible, norm_sq, MultiIndex};
pub use domains::{
    cpowi, derive_seed, phi, phi_inv, phi_jacobian_det, sample, CPoint, DomainKind, DomainSpec,
    SampleStream,
};
pub use error::{Error, Result};
pub use integrate::{
    gauss_legendre_unit, integrate_mc, integrate_mc_graded, integrate_mc_graded_vec,
    integrate_mc_vec, integrate_quad, integrate_quad_vec, volume_by_rejection, FiberedPoint,
    Grading, IntegralEstimate, QuadratureRule,
};
pub use kernels::{
    ball_kernel, disc_kernel, kernel_closed, kernel_series, kernel_series_with,
    kernel_via_transform, polydisc_kernel, KernelQuery, SeriesOptions, SeriesSum,
};
pub use lp_analysis::{
    conjugate_exponent, critical_interval, divergence_diagnostic, exponent_to_f64, is_bounded,
    lp_norm_closed, mc_lp_norm, parse_exponent, radial_lp_integral, schur_query_grid, schur_ratio,
    schur_ratio_unchecked, schur_ratio_with, schur_sweep, schur_weight, schur_weight_with,
    DivergenceCheck, Exponent, ExponentInterval, RadialIntegral, SchurEstimate, SchurPairing,
    SchurSweep, SchurWeightSpec,
};
pub use projection::{
    conj_base_power, project_conj_monomial, project_kernel, project_kernel_many, project_series,
    SeriesFunction, SeriesTerm,
};
