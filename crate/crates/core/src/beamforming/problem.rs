//! Problem data, SINR evaluation and the per-user solves.

use crate::error::{parameter, Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Which power multiplies the weighted interference terms of the virtual SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfererPower {
    /// P_k on every term of user k's denominator.
    #[default]
    Common,
    /// P_j on the term for interferer j.
    PerInterferer,
}

/// Location-based beamforming problem: steering columns, powers, noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BfProblem {
    /// N×K steering matrix, column k is a(φ_k).
    pub a: DMatrix<Complex64>,
    /// Per-user transmit powers P_{2,k} (W).
    pub p: DVector<f64>,
    pub sigma2: f64,
    pub interferer_power: InterfererPower,
}

impl BfProblem {
    pub fn new(a: DMatrix<Complex64>, p: DVector<f64>, sigma2: f64) -> Result<Self> {
        let prob = Self {
            a,
            p,
            sigma2,
            interferer_power: InterfererPower::Common,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Problem from real steering columns.
    pub fn from_real(a: &DMatrix<f64>, p: DVector<f64>, sigma2: f64) -> Result<Self> {
        Self::new(a.map(|v| Complex64::new(v, 0.0)), p, sigma2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.ncols() == 0 || self.a.nrows() == 0 {
            return Err(parameter("beamforming: empty steering matrix"));
        }
        if self.p.len() != self.a.ncols() {
            return Err(parameter("beamforming: one power per user is required"));
        }
        if self.p.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(parameter("beamforming: powers must be positive"));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(parameter("beamforming: noise variance must be positive"));
        }
        if (0..self.k()).any(|k| self.a.column(k).norm() == 0.0) {
            return Err(parameter("beamforming: steering columns must be non-zero"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn k(&self) -> usize {
        self.a.ncols()
    }

    pub fn col(&self, k: usize) -> DVector<Complex64> {
        self.a.column(k).into_owned()
    }

    /// Design problem on the average channel gain: every steering column
    /// scaled by √E[|ρ|²], so D_j and I_j become fading-averaged powers.
    pub fn averaged(&self, fading_power: f64) -> Result<Self> {
        if !(fading_power > 0.0) || !fading_power.is_finite() {
            return Err(parameter("beamforming: fading power must be positive"));
        }
        let mut out = self.clone();
        out.a *= Complex64::new(fading_power.sqrt(), 0.0);
        Ok(out)
    }

    /// Sub-problem on the listed users, in the given order.
    pub fn restrict(&self, users: &[usize]) -> Self {
        Self {
            a: self.a.select_columns(users),
            p: DVector::from_iterator(users.len(), users.iter().map(|&k| self.p[k])),
            sigma2: self.sigma2,
            interferer_power: self.interferer_power,
        }
    }

    /// |a_jᴴ w|².
    pub fn gain(&self, j: usize, w: &DVector<Complex64>) -> f64 {
        self.a.column(j).dotc(w).norm_sqr()
    }

    /// D_j = P_j|a_jᴴw_j|².
    pub fn signal(&self, w: &DMatrix<Complex64>, j: usize) -> f64 {
        self.p[j] * self.a.column(j).dotc(&w.column(j)).norm_sqr()
    }

    /// I_j = σ² + Σ_{l≠j} P_l|a_jᴴw_l|².
    pub fn interference(&self, w: &DMatrix<Complex64>, j: usize) -> f64 {
        let aj = self.a.column(j);
        self.sigma2
            + (0..self.k())
                .filter(|&l| l != j)
                .map(|l| self.p[l] * aj.dotc(&w.column(l)).norm_sqr())
                .sum::<f64>()
    }

    /// Multiplier on μ_{k,j}·|a_jᴴw_k|² in user k's virtual-SINR denominator.
    pub fn interferer_scale(&self, k: usize, j: usize) -> f64 {
        match self.interferer_power {
            InterfererPower::Common => self.p[k],
            InterfererPower::PerInterferer => self.p[j],
        }
    }

    /// Average virtual SINR P_k|a_kᴴw|² / (σ² + Σ_j s_{kj} μ_{k,j}|a_jᴴw|²).
    pub fn virtual_sinr(&self, w: &DVector<Complex64>, mu: &DMatrix<f64>, k: usize) -> f64 {
        let num = self.p[k] * self.gain(k, w);
        let den = self.sigma2
            + (0..self.k())
                .filter(|&j| j != k)
                .map(|j| self.interferer_scale(k, j) * mu[(k, j)] * self.gain(j, w))
                .sum::<f64>();
        num / den
    }

    /// Σ_j ln(1 + D_j/I_j), the deterministic surrogate of the sum rate (nats).
    pub fn upper_bound_nats(&self, w: &DMatrix<Complex64>) -> f64 {
        (0..self.k())
            .map(|j| (self.signal(w, j) / self.interference(w, j)).ln_1p())
            .sum()
    }
}

/// γ_{2,k} = P_k|h_kᴴw_k|² / (Σ_{j≠k} P_j|h_kᴴw_j|² + σ²).
pub fn instantaneous_sinr(
    h: &[DVector<Complex64>],
    w: &DMatrix<Complex64>,
    p: &DVector<f64>,
    sigma2: f64,
    k: usize,
) -> f64 {
    let hk = &h[k];
    let sig = p[k] * hk.dotc(&w.column(k)).norm_sqr();
    let intf: f64 = (0..w.ncols())
        .filter(|&j| j != k)
        .map(|j| p[j] * hk.dotc(&w.column(j)).norm_sqr())
        .sum();
    sig / (intf + sigma2)
}

fn normalize(v: DVector<Complex64>) -> Result<DVector<Complex64>> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Singular {
            func: "virtual_sinr_weights",
            msg: format!("solution norm {n}"),
        });
    }
    Ok(v.unscale(n))
}

/// w_k = normalized (σ²I + Σ_{j≠k} s_{kj}μ_{k,j}a_j a_jᴴ)⁻¹ a_k.
pub fn virtual_sinr_weights(prob: &BfProblem, mu: &DMatrix<f64>, k: usize) -> Result<DVector<Complex64>> {
    let n = prob.n();
    let mut m = DMatrix::<Complex64>::identity(n, n) * Complex64::new(prob.sigma2, 0.0);
    for j in (0..prob.k()).filter(|&j| j != k) {
        let c = prob.interferer_scale(k, j) * mu[(k, j)];
        if c != 0.0 {
            let aj = prob.a.column(j);
            m += (aj * aj.adjoint()) * Complex64::new(c, 0.0);
        }
    }
    // scale out σ² so the pivot test is dimensionless
    m.unscale_mut(prob.sigma2);
    let rhs = prob.col(k).unscale(prob.sigma2);
    let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        func: "virtual_sinr_weights",
        msg: format!("LU solve failed for user {k}"),
    })?;
    normalize(sol)
}

/// Outcome of one weight-coefficient update for user k.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightUpdate {
    /// μ_{k,j} for j ≠ k, in increasing j.
    pub mu: DVector<f64>,
    /// Largest relative residual of the fixed-point equations.
    pub residual: f64,
    /// Entries that came out non-positive and were clamped.
    pub clamped: usize,
}

/// Floor applied to non-positive weight solutions.
pub const MU_FLOOR: f64 = 1e-12;

/// Treatment of weight solutions that come out non-positive.
///
/// The solution of the fixed-point system is ν_j = t_j·σ²/(1 − ρ) with
/// t_j > 0 and ρ = P_kΣ_j t_j|a_jᴴw_k|², so the weights are either all
/// positive (ρ < 1) or all non-positive (ρ ≥ 1). In the latter case the
/// upper-bound gradient asks for a larger leakage penalty than any finite
/// weight delivers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NegativeWeights {
    /// Replace every non-positive entry by [`MU_FLOOR`].
    #[default]
    Floor,
    /// Keep the proportions t_j and cap the common factor at σ²/δ.
    Saturate { delta: f64 },
}

/// Solve σ²·1 = Q_k·μ̃_k for the interference weights of user k.
///
/// The weights make the upper-bound gradient and the virtual-SINR gradient
/// at w_k parallel. With D_j, I_j the signal and interference-plus-noise
/// of user j, c_j = |a_jᴴw_k|² and r_j = D_j(I_k + D_k)/(I_j(I_j + D_j)),
/// Q_k = diag(D_k/r_j) − P_k·1·cᵀ.
pub fn update_weights(prob: &BfProblem, w: &DMatrix<Complex64>, k: usize) -> Result<WeightUpdate> {
    update_weights_with(prob, w, k, NegativeWeights::Floor)
}

/// [`update_weights`] with an explicit policy for non-positive solutions.
pub fn update_weights_with(
    prob: &BfProblem,
    w: &DMatrix<Complex64>,
    k: usize,
    policy: NegativeWeights,
) -> Result<WeightUpdate> {
    let kk = prob.k();
    let others: Vec<usize> = (0..kk).filter(|&j| j != k).collect();
    if others.is_empty() {
        return Ok(WeightUpdate {
            mu: DVector::zeros(0),
            residual: 0.0,
            clamped: 0,
        });
    }
    let d: Vec<f64> = (0..kk).map(|j| prob.signal(w, j)).collect();
    let i: Vec<f64> = (0..kk).map(|j| prob.interference(w, j)).collect();
    if let Some(j) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Singular {
            func: "update_weights",
            msg: format!("user {j} has zero signal power under the current beamformers"),
        });
    }
    let wk = w.column(k).into_owned();
    let r: Vec<f64> = others
        .iter()
        .map(|&j| d[j] * (i[k] + d[k]) / (i[j] * (i[j] + d[j])))
        .collect();
    let c: Vec<f64> = others.iter().map(|&j| prob.gain(j, &wk)).collect();
    let m = others.len();
    // unknowns are ν_j = s_{kj}μ_{k,j}/P_k so both power conventions share Q_k
    let scale = prob.sigma2;
    let q = DMatrix::from_fn(m, m, |a, b| {
        let diag = if a == b { d[k] / r[a] } else { 0.0 };
        (diag - prob.p[k] * c[b]) / scale
    });
    let rhs = DVector::from_element(m, 1.0);
    let nu = q.clone().lu().solve(&rhs).ok_or_else(|| Error::Singular {
        func: "update_weights",
        msg: format!("Q_k singular for user {k}; D={d:?} I={i:?}"),
    })?;
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            func: "update_weights",
            msg: format!("non-finite weights for user {k}"),
        });
    }
    // residual of μ_j·D_k = r_j·(σ² + P_kΣν_l c_l)
    let dn = prob.sigma2 + prob.p[k] * nu.iter().zip(&c).map(|(n, c)| n * c).sum::<f64>();
    let residual = (0..m)
        .map(|a| {
            let lhs = nu[a] * d[k];
            let rhs = r[a] * dn;
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let mut clamped = 0;
    let saturated = match policy {
        NegativeWeights::Saturate { delta } if nu.iter().any(|&v| !(v > 0.0)) => {
            clamped = m;
            Some(DVector::from_iterator(m, r.iter().map(|&rj| rj / d[k] * prob.sigma2 / delta)))
        }
        _ => None,
    };
    let nu = saturated.unwrap_or(nu);
    let mu = DVector::from_iterator(
        m,
        others.iter().zip(nu.iter()).map(|(&j, &v)| {
            let mu = v * prob.p[k] / prob.interferer_scale(k, j);
            if mu > 0.0 {
                mu
            } else {
                clamped += 1;
                MU_FLOOR
            }
        }),
    );
    Ok(WeightUpdate { mu, residual, clamped })
}

/// Write a user's solved weights into row k of the full weight matrix.
pub fn scatter_weights(mu: &mut DMatrix<f64>, k: usize, upd: &WeightUpdate) {
    let mut it = upd.mu.iter();
    for j in 0..mu.ncols() {
        if j != k {
            mu[(k, j)] = *it.next().expect("K−1 weights");
        }
    }
}

/// Upper-bound gradient 2/(I_k+D_k)·a_k a_kᴴw_k − 2Σ_{j≠k} D_j/(I_j(I_j+D_j))·a_j a_jᴴw_k.
///
/// Equals ∇_{w_k}Σ_j ln(1 + D_j/I_j) divided by P_k, with ∇ = ∂/∂Re + i∂/∂Im.
pub fn gradient_upper_bound(prob: &BfProblem, w: &DMatrix<Complex64>, k: usize) -> DVector<Complex64> {
    let wk = w.column(k).into_owned();
    let dk = prob.signal(w, k);
    let ik = prob.interference(w, k);
    let ak = prob.a.column(k);
    let mut g = ak * ak.dotc(&wk) * Complex64::new(2.0 / (ik + dk), 0.0);
    for j in (0..prob.k()).filter(|&j| j != k) {
        let dj = prob.signal(w, j);
        let ij = prob.interference(w, j);
        let aj = prob.a.column(j);
        g -= aj * aj.dotc(&wk) * Complex64::new(2.0 * dj / (ij * (ij + dj)), 0.0);
    }
    g
}

/// Virtual-SINR gradient 2/D_k·a_k a_kᴴw_k − 2Σ_{j≠k} ν_j/(σ² + P_kΣ_l ν_l|a_lᴴw_k|²)·a_j a_jᴴw_k,
/// with ν_j = s_{kj}μ_{k,j}/P_k.
///
/// Equals ∇_{w_k} ln(virtual SINR) divided by P_k.
pub fn gradient_avg_virtual_sinr(
    prob: &BfProblem,
    w: &DMatrix<Complex64>,
    mu: &DMatrix<f64>,
    k: usize,
) -> DVector<Complex64> {
    let wk = w.column(k).into_owned();
    let dk = prob.signal(w, k);
    let ak = prob.a.column(k);
    let nu = |j: usize| prob.interferer_scale(k, j) * mu[(k, j)] / prob.p[k];
    let others: Vec<usize> = (0..prob.k()).filter(|&j| j != k).collect();
    let dn = prob.sigma2 + prob.p[k] * others.iter().map(|&j| nu(j) * prob.gain(j, &wk)).sum::<f64>();
    let mut g = ak * ak.dotc(&wk) * Complex64::new(2.0 / dk, 0.0);
    for &j in &others {
        let aj = prob.a.column(j);
        g -= aj * aj.dotc(&wk) * Complex64::new(2.0 * nu(j) / dn, 0.0);
    }
    g
}

/// Component of `g` tangent to the unit sphere at `w` (‖w‖ = 1).
pub fn project_tangent(g: &DVector<Complex64>, w: &DVector<Complex64>) -> DVector<Complex64> {
    g - w * w.dotc(g)
}

/// Angle between two complex vectors viewed as real 2N-vectors, in [0, π].
pub fn real_angle(x: &DVector<Complex64>, y: &DVector<Complex64>) -> f64 {
    // chord form stays accurate for tiny angles
    let chord = (x.unscale(x.norm()) - y.unscale(y.norm())).norm();
    2.0 * (0.5 * chord).min(1.0).asin()
}
