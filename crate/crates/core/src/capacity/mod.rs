//! User-link and end-to-end ergodic capacity.
//!
//! With the steering-structured channel h_k = ρ_k·a_k the SINR of user k is
//! γ = |ρ_k|²φ_sig / (|ρ_k|²φ_Y + 1), so ln(1+γ) = ln(1+|ρ_k|²φ_X) −
//! ln(1+|ρ_k|²φ_Y) with φ_X = φ_Y + φ_sig. Each term is a truncated log moment
//! of a scaled shadowed-Rician power, evaluated in closed form.

use crate::beamforming::{instantaneous_sinr, BeamformerSet, BfProblem};
use crate::channels::{scaled_sr_ccdf, ShadowedRicianParams, SrDraw};
use crate::error::{domain, parameter, Result};
use crate::rng::{chunks, Estimate, MeanAcc, RngStream};
use crate::specfun::{expint_e1_scaled, laplace_rational_moment, ln_gamma};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

/// How the thresholded expectation is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// E[ln(1+Z)·1{Z ≥ Λ}].
    #[default]
    Truncated,
    /// E[ln(1+Z) | Z ≥ Λ]; zero when the event has probability zero.
    Conditional,
}

/// H_n(z) = ∫₀^∞ e^{−zv}vⁿ/(1+v) dv.
fn rational_moment(n: u32, z: f64) -> Result<f64> {
    if n == 0 {
        return expint_e1_scaled(z);
    }
    if z >= 1.0 {
        return laplace_rational_moment(n, z);
    }
    // finite Ei/factorial form, e^{z}E₁(z) = −e^{z}Ei(−z)
    let mut s = if n.is_multiple_of(2) { 1.0 } else { -1.0 } * expint_e1_scaled(z)?;
    let mut fact = 1.0;
    for i in 1..=n {
        if i > 1 {
            fact *= (i - 1) as f64;
        }
        let sign = if (n - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        s += sign * fact / z.powi(i as i32);
    }
    Ok(s)
}

/// e^{−x}x^k/k!, safe for large x.
fn poisson_weight(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * x.ln() - x - ln_gamma(k as f64 + 1.0)).exp()
}

/// ∫_Λ^∞ ln(1+z) f_Z(z) dz for Z = φ|ρ|², ρ shadowed-Rician (nats).
///
/// The power density is a₁e^{−a₃x}Σ_p (1−m)_p(−a₂)^p x^p/(p!)², so with
/// c = a₃/φ and A = 1+Λ, integration by parts gives per p the incomplete
/// gamma term ln(A)Γ(p+1, cΛ) plus p!Σ_q c^q/q!∫_Λ^∞ z^q e^{−cz}/(1+z) dz.
/// The inner integral is expanded around Λ into rational moments H_n(cA),
/// which keeps every term positive.
pub fn truncated_log_moment(p: &ShadowedRicianParams, phi: f64, lambda: f64) -> Result<f64> {
    p.validate()?;
    let a3 = p.a3();
    if !(a3 > 0.0) {
        return Err(parameter("shadowed-rician: a3 must be positive"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(domain("truncated_log_moment", format!("threshold must be ≥ 0, got {lambda}")));
    }
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(domain("truncated_log_moment", format!("scale must be ≥ 0, got {phi}")));
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    let d = p.cdf_coefficients()?;
    let c = a3 / phi;
    let x = c * lambda;
    let z = c * (1.0 + lambda);
    let ln_a = lambda.ln_1p();
    let pmax = d.len() as u32;
    // zⁿH_n(z) for n < m
    let zh = (0..pmax)
        .map(|n| {
            let h = rational_moment(n, z)?;
            Ok(if n == 0 { h } else { (n as f64 * z.ln() + h.ln()).exp() })
        })
        .collect::<Result<Vec<f64>>>()?;
    let pw: Vec<f64> = (0..pmax).map(|k| poisson_weight(k, x)).collect();
    // inner[q] = e^{−cΛ}/q!·Σ_n C(q,n)(cΛ)^{q−n}(cA)ⁿH_n(cA)
    let inner: Vec<f64> = (0..pmax)
        .map(|q| {
            (0..=q)
                .map(|n| pw[(q - n) as usize] / (ln_gamma(n as f64 + 1.0)).exp() * zh[n as usize])
                .sum()
        })
        .collect();
    let mut total = 0.0;
    let (mut head, mut tail) = (0.0, 0.0);
    for (pi, dp) in d.iter().enumerate() {
        head += pw[pi];
        tail += inner[pi];
        total += dp * (ln_a * head + tail);
    }
    Ok(total.max(0.0))
}

/// Thresholded log moment under the chosen normalization (nats).
pub fn log_moment(p: &ShadowedRicianParams, phi: f64, lambda: f64, cond: Conditioning) -> Result<f64> {
    let t = truncated_log_moment(p, phi, lambda)?;
    match cond {
        Conditioning::Truncated => Ok(t),
        Conditioning::Conditional => {
            if phi == 0.0 || lambda == 0.0 {
                return Ok(t);
            }
            let prob = scaled_sr_ccdf(lambda, p, phi)?;
            Ok(if prob > 0.0 { t / prob } else { 0.0 })
        }
    }
}

/// Closed-form inputs for one selected user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCapacityInputs {
    /// Σ_j P_j|a_kᴴw_j|²/σ².
    pub phi_x: f64,
    /// Σ_{j≠k} P_j|a_kᴴw_j|²/σ².
    pub phi_y: f64,
    pub fading: ShadowedRicianParams,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

impl UserCapacityInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_y >= 0.0) || !(self.phi_x > self.phi_y) || !self.phi_x.is_finite() {
            return Err(parameter(format!(
                "user capacity: need φ_X > φ_Y ≥ 0, got φ_X = {}, φ_Y = {}",
                self.phi_x, self.phi_y
            )));
        }
        if !(self.lambda_x >= 0.0) || !(self.lambda_y >= 0.0) {
            return Err(parameter("user capacity: thresholds must be ≥ 0"));
        }
        self.fading.validate()
    }

    /// Inputs of user k for a transmitted design, mapping the SINR threshold
    /// to the fading threshold r* = Λ/(φ_sig − Λφ_Y) so that
    /// {γ ≥ Λ} = {|ρ|² ≥ r*}. Returns `None` when no fading value clears it.
    pub fn from_design(
        prob: &BfProblem,
        w: &nalgebra::DMatrix<Complex64>,
        k: usize,
        fading: &ShadowedRicianParams,
        lambda_th: f64,
    ) -> Result<Option<Self>> {
        if !(lambda_th >= 0.0) || !lambda_th.is_finite() {
            return Err(parameter(format!("user capacity: threshold must be ≥ 0, got {lambda_th}")));
        }
        let phi_sig = prob.signal(w, k) / prob.sigma2;
        let phi_y = (prob.interference(w, k) - prob.sigma2).max(0.0) / prob.sigma2;
        let margin = phi_sig - lambda_th * phi_y;
        if !(phi_sig > 0.0) || !(margin > 0.0) {
            return Ok(None);
        }
        let r = lambda_th / margin;
        let phi_x = phi_y + phi_sig;
        let out = Self {
            phi_x,
            phi_y,
            fading: *fading,
            lambda_x: phi_x * r,
            lambda_y: phi_y * r,
        };
        out.validate()?;
        Ok(Some(out))
    }

    /// Contribution of this user in nats.
    pub fn capacity_nats(&self, cond: Conditioning) -> Result<f64> {
        self.validate()?;
        let x = log_moment(&self.fading, self.phi_x, self.lambda_x, cond)?;
        let y = log_moment(&self.fading, self.phi_y, self.lambda_y, cond)?;
        Ok((x - y).max(0.0))
    }
}

/// C₂ with its per-user split (bits/s/Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct UserLinkCapacity {
    pub bits: f64,
    pub per_user: Vec<f64>,
}

/// C₂ = Σ_k [T(φ_X, Λ_X) − T(φ_Y, Λ_Y)]/ln 2.
pub fn user_link_capacity(inputs: &[UserCapacityInputs], cond: Conditioning) -> Result<UserLinkCapacity> {
    let per_user = inputs
        .iter()
        .map(|u| Ok(u.capacity_nats(cond)? / LN_2))
        .collect::<Result<Vec<f64>>>()?;
    Ok(UserLinkCapacity {
        bits: per_user.iter().sum(),
        per_user,
    })
}

/// C₂ of a transmitted design. `per_user` has one entry per user of the
/// full problem; unselected and infeasible users contribute 0.
pub fn design_capacity(
    prob: &BfProblem,
    bf: &BeamformerSet,
    fading: &ShadowedRicianParams,
    lambda_th: f64,
    cond: Conditioning,
) -> Result<UserLinkCapacity> {
    let mut per_user = vec![0.0; prob.k()];
    for &k in &bf.selected {
        if let Some(u) = UserCapacityInputs::from_design(prob, &bf.w, k, fading, lambda_th)? {
            per_user[k] = u.capacity_nats(cond)? / LN_2;
        }
    }
    Ok(UserLinkCapacity {
        bits: per_user.iter().sum(),
        per_user,
    })
}

/// Evaluation path of a capacity figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

/// End-to-end result under buffer-aided decode-and-forward.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub c1: f64,
    pub c2: f64,
    pub c2_per_user: Vec<f64>,
    /// min(C₁, C₂).
    pub c: f64,
    pub method: Method,
    pub diagnostics: BTreeMap<String, f64>,
}

/// C = min(C₁, C₂).
pub fn end_to_end_capacity(c1: f64, c2: f64) -> Result<CapacityResult> {
    if !(c1 >= 0.0) || !(c2 >= 0.0) {
        return Err(domain("end_to_end_capacity", format!("capacities must be ≥ 0, got {c1}, {c2}")));
    }
    Ok(CapacityResult {
        c1,
        c2,
        c2_per_user: Vec::new(),
        c: c1.min(c2),
        method: Method::ClosedForm,
        diagnostics: BTreeMap::new(),
    })
}

/// Monte Carlo C₂ with h_k = ρ_k·a_k.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLinkEstimate {
    pub total: Estimate,
    pub per_user: Vec<f64>,
}

/// Σ_{k∈U} E[log₂(1+γ_k)·1{γ_k ≥ Λ}] by simulation.
///
/// Every sample draws ρ_k for all K users in index order, so two designs
/// evaluated with the same stream see the same fading (common random numbers).
pub fn user_link_capacity_mc(
    stream: RngStream,
    prob: &BfProblem,
    bf: &BeamformerSet,
    fading: &ShadowedRicianParams,
    lambda_th: f64,
    n: usize,
) -> Result<UserLinkEstimate> {
    if n < 10_000 {
        return Err(parameter(format!("user link mc: need at least 10⁴ samples, got {n}")));
    }
    if !(lambda_th >= 0.0) {
        return Err(parameter("user link mc: threshold must be ≥ 0"));
    }
    let draw = SrDraw::new(fading)?;
    let kk = prob.k();
    let cols: Vec<DVector<Complex64>> = (0..kk).map(|k| prob.col(k)).collect();
    let parts: Vec<(MeanAcc, Vec<f64>)> = chunks(n)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut rng = stream.child(idx).rng();
            let mut acc = MeanAcc::default();
            let mut users = vec![0.0; kk];
            let mut h = cols.clone();
            for _ in 0..len {
                for (hk, ak) in h.iter_mut().zip(&cols) {
                    let rho = draw.draw(&mut rng);
                    hk.zip_apply(ak, |x, a| *x = a * rho);
                }
                let mut s = 0.0;
                for &k in &bf.selected {
                    let g = instantaneous_sinr(&h, &bf.w, &prob.p, prob.sigma2, k);
                    if g >= lambda_th {
                        let v = g.ln_1p() / LN_2;
                        users[k] += v;
                        s += v;
                    }
                }
                acc.push(s);
            }
            (acc, users)
        })
        .collect();
    let mut total = MeanAcc::default();
    let mut per_user = vec![0.0; kk];
    for (acc, users) in &parts {
        total.merge(acc);
        per_user.iter_mut().zip(users).for_each(|(a, b)| *a += b);
    }
    per_user.iter_mut().for_each(|v| *v /= n as f64);
    Ok(UserLinkEstimate {
        total: total.into(),
        per_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_moment_branches_meet() {
        for n in 1..8 {
            let a = rational_moment(n, 1.0 - 1e-12).unwrap();
            let b = laplace_rational_moment(n, 1.0).unwrap();
            assert!((a / b - 1.0).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn min_is_exact() {
        assert_eq!(end_to_end_capacity(3.0, 5.0).unwrap().c, 3.0);
        assert_eq!(end_to_end_capacity(5.0, 3.0).unwrap().c, 3.0);
        assert_eq!(end_to_end_capacity(2.5, 2.5).unwrap().c, 2.5);
        assert!(end_to_end_capacity(-1.0, 2.0).is_err());
    }
}
