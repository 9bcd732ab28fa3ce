//! Málaga-distributed optical irradiance.

use super::shadowed_rician::{ShadowedRicianParams, SrDraw};
use crate::error::{domain, parameter, Result};
use crate::quadrature::{integrate, integrate_to_inf, Tol};
use crate::rng::RngStream;
use crate::specfun::{ln_gamma, ln_meijer_g_2002, MeijerParams2002};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Deserialize;

/// Turbulence parameters of the Málaga model.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MalagaParams {
    pub alpha: f64,
    pub beta: u32,
    pub b0: f64,
    pub rho0: f64,
    pub omega0: f64,
    #[serde(default, rename = "phi_a_rad")]
    pub phi_a: f64,
    #[serde(default, rename = "phi_b_rad")]
    pub phi_b: f64,
}

impl MalagaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(parameter(format!("malaga: alpha must be > 0, got {}", self.alpha)));
        }
        if self.beta < 1 {
            return Err(parameter("malaga: beta must be an integer ≥ 1"));
        }
        if !(self.b0 > 0.0) || !self.b0.is_finite() {
            return Err(parameter(format!("malaga: b0 must be > 0, got {}", self.b0)));
        }
        if !(0.0..=1.0).contains(&self.rho0) {
            return Err(parameter(format!("malaga: rho0 must lie in [0, 1], got {}", self.rho0)));
        }
        if !(self.omega0 >= 0.0) || !self.omega0.is_finite() {
            return Err(parameter(format!("malaga: Omega0 must be ≥ 0, got {}", self.omega0)));
        }
        if self.omega_prime() < 0.0 {
            return Err(parameter("malaga: derived Omega' is negative"));
        }
        Ok(())
    }

    /// g₀ = 2b₀(1 − ρ₀).
    pub fn g0(&self) -> f64 {
        2.0 * self.b0 * (1.0 - self.rho0)
    }

    /// Ω′ = Ω₀ + 2b₀ρ₀ + 2√(2b₀Ω₀ρ₀)·cos(φ_A − φ_B).
    pub fn omega_prime(&self) -> f64 {
        self.omega0
            + 2.0 * self.b0 * self.rho0
            + 2.0 * (2.0 * self.b0 * self.omega0 * self.rho0).sqrt() * (self.phi_a - self.phi_b).cos()
    }

    /// Argument scale κ = αβ/(g₀β + Ω′) of the Meijer G terms.
    pub fn kappa(&self) -> f64 {
        let b = self.beta as f64;
        self.alpha * b / (self.g0() * b + self.omega_prime())
    }

    /// E[I] = g₀ + Ω′.
    pub fn mean(&self) -> f64 {
        self.g0() + self.omega_prime()
    }
}

/// Mixture constants A and c₁..c_β, stored with their logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct MalagaConstants {
    pub a: f64,
    pub c: Vec<f64>,
    pub ln_a: f64,
    /// ln c_j; `-inf` where c_j = 0 (Ω′ = 0, j > 1).
    pub ln_c: Vec<f64>,
}

fn exact_int(n: u64, k: u64, binomial: bool) -> f64 {
    // n choose k, or n! when `binomial` is false
    let mut acc: Option<u128> = Some(1);
    if binomial {
        let k = k.min(n - k);
        for i in 0..k {
            acc = acc
                .and_then(|a| a.checked_mul((n - i) as u128))
                .map(|a| a / (i + 1) as u128);
        }
    } else {
        for i in 2..=n {
            acc = acc.and_then(|a| a.checked_mul(i as u128));
        }
    }
    match acc {
        Some(v) => v as f64,
        None if binomial => {
            (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).exp()
        }
        None => ln_gamma(n as f64 + 1.0).exp(),
    }
}

/// Mixture constants A and c_j of the Málaga density.
pub fn malaga_constants(p: &MalagaParams) -> Result<MalagaConstants> {
    p.validate()?;
    let g0 = p.g0();
    if g0 <= 0.0 {
        return Err(parameter("malaga: g0 = 0 (rho0 = 1) is the degenerate pure-LoS limit"));
    }
    let alpha = p.alpha;
    let beta = p.beta as f64;
    let op = p.omega_prime();
    let denom = g0 * beta + op;
    let kappa = p.kappa();

    let ln_a = std::f64::consts::LN_2 + 0.5 * alpha * alpha.ln()
        - (1.0 + 0.5 * alpha) * g0.ln()
        - ln_gamma(alpha)
        + (0.5 * alpha + beta) * (g0 * beta / denom).ln();

    let mut ln_c = Vec::with_capacity(p.beta as usize);
    for j in 1..=p.beta {
        let jf = j as f64;
        let binom = exact_int((p.beta - 1) as u64, (j - 1) as u64, true);
        let fact = exact_int((j - 1) as u64, 0, false);
        let ratio_term = if j == 1 {
            0.0
        } else if op > 0.0 {
            (jf - 1.0) * (op / g0).ln()
        } else {
            f64::NEG_INFINITY
        };
        ln_c.push(
            binom.ln() + (1.0 - 0.5 * jf) * denom.ln() - fact.ln()
                + ratio_term
                + 0.5 * jf * (alpha / beta).ln()
                - 0.5 * (alpha + jf) * kappa.ln(),
        );
    }
    Ok(MalagaConstants {
        a: ln_a.exp(),
        c: ln_c.iter().map(|v| v.exp()).collect(),
        ln_a,
        ln_c,
    })
}

/// Precomputed Málaga density evaluator.
#[derive(Debug, Clone)]
pub struct Malaga {
    pub params: MalagaParams,
    pub consts: MalagaConstants,
    kappa: f64,
}

impl Malaga {
    pub fn new(params: MalagaParams) -> Result<Self> {
        let consts = malaga_constants(&params)?;
        Ok(Self {
            kappa: params.kappa(),
            params,
            consts,
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(domain("malaga_pdf", format!("x must be positive, got {x}")));
        }
        let mut sum = 0.0;
        for (j, &lc) in self.consts.ln_c.iter().enumerate() {
            if lc == f64::NEG_INFINITY {
                continue;
            }
            let g = ln_meijer_g_2002(
                self.kappa * x,
                MeijerParams2002 {
                    a: self.params.alpha,
                    b: (j + 1) as f64,
                },
            )?;
            sum += (self.consts.ln_a - std::f64::consts::LN_2 + lc - x.ln() + g).exp();
        }
        Ok(sum)
    }

    /// E[Iⁿ] = (A/2)·Σ c_j κ⁻ⁿ Γ(α+n) Γ(j+n), for real n > −min(α, 1).
    pub fn moment(&self, n: f64) -> f64 {
        let mut sum = 0.0;
        for (j, &lc) in self.consts.ln_c.iter().enumerate() {
            if lc == f64::NEG_INFINITY {
                continue;
            }
            let jf = (j + 1) as f64;
            sum += (self.consts.ln_a - std::f64::consts::LN_2 + lc - n * self.kappa.ln()
                + ln_gamma(self.params.alpha + n)
                + ln_gamma(jf + n))
            .exp();
        }
        sum
    }

    /// CDF by adaptive quadrature of the density.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let mut err = None;
        let mut f = |t: f64| match self.pdf(t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        let mean = self.params.mean();
        let v = if x <= mean {
            integrate(&mut f, 0.0, x, Tol::rel(1e-11).with_abs(1e-14)).value
        } else {
            1.0 - integrate_to_inf(&mut f, x, mean, Tol::rel(1e-11).with_abs(1e-14)).value
        };
        match err {
            Some(e) => Err(e),
            None => Ok(v.clamp(0.0, 1.0)),
        }
    }

    /// One draw of I = X·Y with X ~ Gamma(α, mean 1) and Y a squared
    /// shadowed-Rician power with (m = β, b = g₀/2, Ω = Ω′).
    pub fn sampler(&self) -> Result<MalagaDraw> {
        let p = &self.params;
        let x = Gamma::new(p.alpha, 1.0 / p.alpha)
            .map_err(|e| parameter(format!("malaga: gamma law: {e}")))?;
        let y = SrDraw::new(&ShadowedRicianParams {
            m: p.beta,
            b: p.g0() / 2.0,
            omega: p.omega_prime(),
        })?;
        Ok(MalagaDraw { x, y })
    }
}

/// Prepared generative sampler for Málaga irradiance.
#[derive(Debug, Clone)]
pub struct MalagaDraw {
    x: Gamma<f64>,
    y: SrDraw,
}

impl MalagaDraw {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.x.sample(rng) * self.y.draw(rng).norm_sqr()
    }
}

/// Málaga density at `x`.
pub fn malaga_pdf(x: f64, p: &MalagaParams) -> Result<f64> {
    Malaga::new(*p)?.pdf(x)
}

/// `n` i.i.d. Málaga draws from the given stream.
pub fn malaga_sample(stream: RngStream, p: &MalagaParams, n: usize) -> Result<Vec<f64>> {
    let s = Malaga::new(*p)?.sampler()?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| s.draw(&mut rng)).collect())
}

/// Deterministic optical path loss Iˡ = G_t·G_r·η_p·ℓ_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsoPathLoss {
    pub gt: f64,
    pub gr: f64,
    pub eta_p: f64,
    pub ell_s: f64,
}

impl FsoPathLoss {
    pub fn from_db(gt_db: f64, gr_db: f64, pointing_db: f64, free_space_db: f64) -> Self {
        let lin = |db: f64| 10f64.powf(db / 10.0);
        Self {
            gt: lin(gt_db),
            gr: lin(gr_db),
            eta_p: lin(pointing_db),
            ell_s: lin(free_space_db),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gt > 0.0 && self.gr > 0.0) {
            return Err(parameter("fso: gains must be positive"));
        }
        if !(self.eta_p > 0.0 && self.eta_p <= 1.0) || !(self.ell_s > 0.0 && self.ell_s <= 1.0) {
            return Err(parameter("fso: loss factors must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn factor(&self) -> f64 {
        self.gt * self.gr * self.eta_p * self.ell_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strong() -> MalagaParams {
        MalagaParams {
            alpha: 2.296,
            beta: 2,
            b0: 0.1079,
            rho0: 0.596,
            omega0: 0.5,
            phi_a: std::f64::consts::FRAC_PI_2,
            phi_b: 0.0,
        }
    }

    #[test]
    fn beta_one_has_single_term() {
        let p = MalagaParams { beta: 1, ..strong() };
        let c = malaga_constants(&p).unwrap();
        assert_eq!(c.c.len(), 1);
    }

    #[test]
    fn degenerate_g0_rejected() {
        let p = MalagaParams { rho0: 1.0, ..strong() };
        assert!(matches!(malaga_constants(&p), Err(crate::Error::Parameter(_))));
    }

    #[test]
    fn moments_normalized_and_mean_consistent() {
        let m = Malaga::new(strong()).unwrap();
        assert!((m.moment(0.0) - 1.0).abs() < 1e-12);
        assert!((m.moment(1.0) / strong().mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_integer_helpers() {
        assert_eq!(exact_int(10, 3, true), 120.0);
        assert_eq!(exact_int(5, 0, false), 120.0);
        assert_eq!(exact_int(0, 0, false), 1.0);
    }

    #[test]
    fn pdf_rejects_nonpositive() {
        assert!(malaga_pdf(0.0, &strong()).is_err());
    }

    #[test]
    fn path_loss_product() {
        let l = FsoPathLoss::from_db(0.0, 0.0, -1.0, -3.0);
        assert!((l.factor() - 10f64.powf(-0.4)).abs() < 1e-15);
    }
}
