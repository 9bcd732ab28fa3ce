//! Shadowed-Rician land-mobile-satellite fading.

use crate::error::{domain, parameter, Result};
use crate::rng::RngStream;
use crate::specfun::hyp1f1_scaled;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::Deserialize;

/// Fading parameters (m, b, Ω).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowedRicianParams {
    pub m: u32,
    pub b: f64,
    pub omega: f64,
}

impl ShadowedRicianParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(parameter("shadowed-rician: m must be an integer ≥ 1"));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(parameter(format!("shadowed-rician: b must be > 0, got {}", self.b)));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(parameter(format!("shadowed-rician: Omega must be ≥ 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// a₁ = (2bm/(2bm+Ω))^m / (2b).
    pub fn a1(&self) -> f64 {
        let tbm = 2.0 * self.b * self.m as f64;
        (tbm / (tbm + self.omega)).powi(self.m as i32) / (2.0 * self.b)
    }

    /// a₂ = Ω / (2b(2bm+Ω)).
    pub fn a2(&self) -> f64 {
        self.omega / (2.0 * self.b * (2.0 * self.b * self.m as f64 + self.omega))
    }

    /// a₃ = 1/(2b) − a₂, evaluated in the cancellation-free form
    /// m / (2bm + Ω).
    pub fn a3(&self) -> f64 {
        let m = self.m as f64;
        m / (2.0 * self.b * m + self.omega)
    }

    /// E[|ρ|²] = 2b + Ω.
    pub fn mean_power(&self) -> f64 {
        2.0 * self.b + self.omega
    }

    /// Coefficients d_p = a₁(1−m)_p(−a₂)^p / (a₃^{p+1} p!) of the CDF
    /// expansion. They sum to one.
    pub fn cdf_coefficients(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let a3 = self.a3();
        if !(a3 > 0.0) {
            return Err(parameter("shadowed-rician: a3 must be positive for the CDF expansion"));
        }
        let (a1, a2) = (self.a1(), self.a2());
        let m = self.m as f64;
        let mut out = Vec::with_capacity(self.m as usize);
        let mut t = a1 / a3;
        for p in 0..self.m {
            out.push(t);
            let pf = p as f64;
            t *= (1.0 - m + pf) * (-a2) / (a3 * (pf + 1.0));
        }
        Ok(out)
    }
}

/// Density of |ρ|.
pub fn sr_pdf(x: f64, p: &ShadowedRicianParams) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("sr_pdf", format!("x must be positive, got {x}")));
    }
    let m = p.m as f64;
    let tbm = 2.0 * p.b * m;
    let z = p.a2() * x * x;
    // e^{−x²/2b}·₁F₁(m;1;z) = e^{−a₃x²}·[e^{−z}₁F₁(m;1;z)]
    let scaled = hyp1f1_scaled(m, 1.0, z)?;
    Ok((tbm / (tbm + p.omega)).powi(p.m as i32) * x / p.b * (-p.a3() * x * x).exp() * scaled)
}

/// CDF of φ·|ρ|² from the finite double-sum expansion.
pub fn scaled_sr_cdf(x: f64, p: &ShadowedRicianParams, phi: f64) -> Result<f64> {
    Ok(1.0 - scaled_sr_ccdf(x, p, phi)?)
}

/// Complementary CDF of φ·|ρ|², accurate in the far tail.
pub fn scaled_sr_ccdf(x: f64, p: &ShadowedRicianParams, phi: f64) -> Result<f64> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(domain("scaled_sr_cdf", format!("scale must be positive, got {phi}")));
    }
    if !(x >= 0.0) {
        return Err(domain("scaled_sr_cdf", format!("x must be ≥ 0, got {x}")));
    }
    let d = p.cdf_coefficients()?;
    let y = p.a3() * x / phi;
    let mut sum = 0.0;
    let mut inner = 0.0;
    let mut term = 1.0;
    for (pp, &dp) in d.iter().enumerate() {
        if pp > 0 {
            term *= y / pp as f64;
        }
        inner += term;
        sum += dp * inner;
    }
    Ok((sum * (-y).exp()).clamp(0.0, 1.0))
}

/// Prepared generative sampler for ρ = A·e^{jθ} + Z.
#[derive(Debug, Clone)]
pub struct SrDraw {
    // None when Ω = 0
    los_power: Option<Gamma<f64>>,
    diffuse: Normal<f64>,
}

impl SrDraw {
    pub fn new(p: &ShadowedRicianParams) -> Result<Self> {
        p.validate()?;
        let los_power = if p.omega > 0.0 {
            Some(
                Gamma::new(p.m as f64, p.omega / p.m as f64)
                    .map_err(|e| parameter(format!("shadowed-rician: {e}")))?,
            )
        } else {
            None
        };
        let diffuse =
            Normal::new(0.0, p.b.sqrt()).map_err(|e| parameter(format!("shadowed-rician: {e}")))?;
        Ok(Self { los_power, diffuse })
    }

    /// One complex fading coefficient.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let los = match &self.los_power {
            Some(g) => {
                let amp = g.sample(rng).sqrt();
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(amp, theta)
            }
            None => Complex64::new(0.0, 0.0),
        };
        los + Complex64::new(self.diffuse.sample(rng), self.diffuse.sample(rng))
    }
}

/// `n` i.i.d. draws of |ρ|.
pub fn sr_sample(stream: RngStream, p: &ShadowedRicianParams, n: usize) -> Result<Vec<f64>> {
    let s = SrDraw::new(p)?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| s.draw(&mut rng).norm()).collect())
}
