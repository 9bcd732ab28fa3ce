//! Special functions used by the closed-form capacity expressions.
//!
//! All evaluators are pure functions of their arguments.

mod bessel;
mod expint;
mod gamma;
mod hyp1f1;
mod meijer;

pub use bessel::{bessel_j, bessel_k, bessel_k_scaled};
pub use expint::{expint_e1, expint_e1_scaled, expint_ei, laplace_rational_moment};
pub use gamma::{ln_gamma, ln_gamma_complex};
pub use hyp1f1::{hyp1f1, hyp1f1_scaled};
pub use meijer::{
    ln_meijer_g_2002, meijer_g_0221_contour, meijer_g_1441, meijer_g_1441_contour, meijer_g_2002,
    mellin_barnes, phi_node, Contour, MeijerParams1441, MeijerParams2002,
};
