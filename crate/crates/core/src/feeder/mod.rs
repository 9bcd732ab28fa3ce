//! Optical feeder link with two-gateway Alamouti STBC.
//!
//! The combined SNR is γ₁ = Σᵢ γ̄₁,ᵢ·(Iᵢᵃ)², so its MGF factors into
//! per-gateway Málaga MGFs. Capacity follows from
//! C₁·ln2 = ∫₀^∞ φ(s)·M′(s) ds with φ(s) = Ei(−s), evaluated by
//! Gauss–Chebyshev quadrature after the map s = λ·tan(π(x+1)/4).

use crate::channels::{FsoPathLoss, Malaga, MalagaParams};
use crate::error::{parameter, Result};
use crate::rng::{chunks, Estimate, MeanAcc, RngStream};
use crate::specfun::{meijer_g_1441, phi_node, MeijerParams1441};
use rayon::prelude::*;
use std::f64::consts::{LN_2, PI};

/// One optical gateway: deterministic path loss plus turbulence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gateway {
    pub path: FsoPathLoss,
    pub turbulence: MalagaParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeederConfig {
    /// Transmit power P₁ (W).
    pub p1_w: f64,
    /// Optical-to-electrical conversion coefficient η.
    pub eta: f64,
    /// Noise power N₀ (W).
    pub n0_w: f64,
    pub gateways: Vec<Gateway>,
}

impl FeederConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p1_w > 0.0 && self.eta > 0.0 && self.n0_w > 0.0) {
            return Err(parameter("feeder: P1, eta and N0 must be positive"));
        }
        if !(1..=2).contains(&self.gateways.len()) {
            return Err(parameter("feeder: one or two gateways are supported"));
        }
        for g in &self.gateways {
            g.path.validate()?;
            g.turbulence.validate()?;
        }
        Ok(())
    }

    /// γ̄₁,ᵢ = P₁(η·Iᵢˡ)²/N₀.
    pub fn gamma_bar(&self, i: usize) -> f64 {
        let il = self.gateways[i].path.factor();
        self.p1_w * (self.eta * il).powi(2) / self.n0_w
    }

    pub fn with_power(&self, p1_w: f64) -> Self {
        Self {
            p1_w,
            ..self.clone()
        }
    }
}

/// γ₁ = P₁η²(I₁² + I₂²)/N₀ for total irradiances I₁, I₂.
pub fn stbc_snr(i1: f64, i2: f64, cfg: &FeederConfig) -> f64 {
    cfg.p1_w * cfg.eta * cfg.eta * (i1 * i1 + i2 * i2) / cfg.n0_w
}

/// Closed-form MGF of γ = γ̄·(Iᵃ)² for Málaga Iᵃ.
#[derive(Debug, Clone)]
pub struct MalagaMgf {
    model: Malaga,
    gamma_bar: f64,
    /// ln of the per-term prefactor (A/4)·c_j·2^{α+j}/(2π)
    ln_pref: Vec<f64>,
    /// argument scale 16γ̄/κ²
    x_scale: f64,
}

impl MalagaMgf {
    pub fn new(p: &MalagaParams, gamma_bar: f64) -> Result<Self> {
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(parameter(format!("mgf: average SNR must be positive, got {gamma_bar}")));
        }
        let model = Malaga::new(*p)?;
        let alpha = p.alpha;
        let ln_pref = model
            .consts
            .ln_c
            .iter()
            .enumerate()
            .map(|(j, &lc)| {
                let jf = (j + 1) as f64;
                model.consts.ln_a - 2.0 * LN_2 + lc + (alpha + jf) * LN_2 - (2.0 * PI).ln()
            })
            .collect();
        let kappa = p.kappa();
        Ok(Self {
            x_scale: 16.0 * gamma_bar / (kappa * kappa),
            model,
            gamma_bar,
            ln_pref,
        })
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    /// E[γ] = γ̄·E[(Iᵃ)²].
    pub fn mean(&self) -> f64 {
        self.gamma_bar * self.model.moment(2.0)
    }

    fn sum(&self, s: f64, lower: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(crate::error::domain("mgf", format!("s must be positive, got {s}")));
        }
        let x = self.x_scale * s;
        let mut acc = 0.0;
        for (j, &lp) in self.ln_pref.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let g = meijer_g_1441(x, MeijerParams1441::malaga(self.model.params.alpha, j as u32 + 1, lower))?;
            acc += lp.exp() * g;
        }
        Ok(acc)
    }

    /// M(s) = E[e^{−sγ}].
    pub fn value(&self, s: f64) -> Result<f64> {
        self.sum(s, 0.0)
    }

    /// M′(s).
    pub fn deriv(&self, s: f64) -> Result<f64> {
        Ok(-self.sum(s, 1.0)? / s)
    }
}

/// MGF of γ̄·(Iᵃ)² at `s`.
pub fn mgf_gamma1(s: f64, gamma_bar: f64, p: &MalagaParams) -> Result<f64> {
    MalagaMgf::new(p, gamma_bar)?.value(s)
}

/// Derivative of the MGF of γ̄·(Iᵃ)² at `s`.
pub fn mgf_gamma1_deriv(s: f64, gamma_bar: f64, p: &MalagaParams) -> Result<f64> {
    MalagaMgf::new(p, gamma_bar)?.deriv(s)
}

/// Placement of the capacity quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeScale {
    /// s_t = tan(π(x_t+1)/4), as the trigonometric rule is usually written.
    Literal,
    /// s_t = tan(π(x_t+1)/4) / E[γ₁], which centers the nodes on the
    /// region where the integrand carries its mass.
    MeanSnr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub t: usize,
    pub scale: NodeScale,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            t: 30,
            scale: NodeScale::MeanSnr,
        }
    }
}

impl QuadratureSpec {
    /// Unit-scale nodes S_t and weights V_t.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let t_n = self.t as f64;
        (1..=self.t)
            .map(|t| {
                let th = (2.0 * t as f64 - 1.0) / (2.0 * t_n) * PI;
                let arg = PI / 4.0 * th.cos() + PI / 4.0;
                let v = PI * PI * th.sin() / (4.0 * t_n * arg.cos().powi(2));
                (arg.tan(), v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeederMode {
    /// Two gateways combined with Alamouti STBC.
    Stbc,
    /// First gateway alone.
    Single,
}

/// Closed-form capacity with convergence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeederCapacity {
    pub bits: f64,
    pub t: usize,
    /// The same rule evaluated with ⌈T/2⌉ nodes.
    pub bits_half_t: f64,
    /// Set when |C(T) − C(T/2)| exceeds 1e-2 relative.
    pub accuracy_warning: bool,
    pub scale: NodeScale,
}

fn quadrature_sum(mgfs: &[MalagaMgf], spec: QuadratureSpec) -> Result<f64> {
    let lambda = match spec.scale {
        NodeScale::Literal => 1.0,
        NodeScale::MeanSnr => 1.0 / mgfs.iter().map(|m| m.mean()).sum::<f64>(),
    };
    let terms: Vec<Result<f64>> = spec
        .nodes()
        .into_par_iter()
        .map(|(s_unit, v)| {
            let s = lambda * s_unit;
            // product rule for M′ of the combined SNR
            let vals: Vec<f64> = mgfs.iter().map(|m| m.value(s)).collect::<Result<_>>()?;
            let ders: Vec<f64> = mgfs.iter().map(|m| m.deriv(s)).collect::<Result<_>>()?;
            let mut dm = 0.0;
            for (i, &der) in ders.iter().enumerate() {
                let mut t = der;
                for (l, &val) in vals.iter().enumerate() {
                    if l != i {
                        t *= val;
                    }
                }
                dm += t;
            }
            Ok(lambda * v * phi_node(s)? * dm)
        })
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    Ok(sum / LN_2)
}

fn mgfs_for(cfg: &FeederConfig, mode: FeederMode) -> Result<Vec<MalagaMgf>> {
    cfg.validate()?;
    let used = match mode {
        FeederMode::Stbc => {
            if cfg.gateways.len() != 2 {
                return Err(parameter("feeder: STBC needs exactly two gateways"));
            }
            2
        }
        FeederMode::Single => 1,
    };
    (0..used)
        .map(|i| MalagaMgf::new(&cfg.gateways[i].turbulence, cfg.gamma_bar(i)))
        .collect()
}

/// Closed-form ergodic capacity C₁ (bits/s/Hz).
pub fn feeder_capacity(cfg: &FeederConfig, q: QuadratureSpec, mode: FeederMode) -> Result<FeederCapacity> {
    if q.t < 1 {
        return Err(parameter("quadrature: T must be ≥ 1"));
    }
    let mgfs = mgfs_for(cfg, mode)?;
    let bits = quadrature_sum(&mgfs, q)?;
    let half = QuadratureSpec {
        t: q.t.div_ceil(2),
        ..q
    };
    let bits_half_t = quadrature_sum(&mgfs, half)?;
    Ok(FeederCapacity {
        bits,
        t: q.t,
        bits_half_t,
        accuracy_warning: (bits - bits_half_t).abs() > 1e-2 * bits.abs(),
        scale: q.scale,
    })
}

/// Monte Carlo estimate of E[log₂(1 + γ₁)].
pub fn feeder_capacity_mc(stream: RngStream, cfg: &FeederConfig, n: usize, mode: FeederMode) -> Result<Estimate> {
    if n < 2 {
        return Err(parameter("feeder mc: need at least two samples"));
    }
    let mgfs = mgfs_for(cfg, mode)?;
    let samplers = mgfs
        .iter()
        .map(|m| m.model.sampler())
        .collect::<Result<Vec<_>>>()?;
    let gbar: Vec<f64> = mgfs.iter().map(|m| m.gamma_bar).collect();
    let parts: Vec<MeanAcc> = chunks(n)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut rng = stream.child(idx).rng();
            let mut acc = MeanAcc::default();
            for _ in 0..len {
                let g: f64 = samplers
                    .iter()
                    .zip(&gbar)
                    .map(|(s, gb)| {
                        let i = s.draw(&mut rng);
                        gb * i * i
                    })
                    .sum();
                acc.push((1.0 + g).log2());
            }
            acc
        })
        .collect();
    let mut total = MeanAcc::default();
    parts.iter().for_each(|p| total.merge(p));
    Ok(total.into())
}
