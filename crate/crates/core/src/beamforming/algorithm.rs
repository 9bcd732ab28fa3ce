//! Alternating weight/beamformer iteration with one-bit-feedback user
//! selection, and the ZF and SLNR reference designs.

use super::problem::{
    instantaneous_sinr, scatter_weights, update_weights_with, virtual_sinr_weights, BfProblem,
    NegativeWeights,
};
use crate::channels::SrDraw;
use crate::error::{parameter, Error, Result};
use crate::rng::RngStream;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Starting beamformers for the inner iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    /// w_k = a_k/‖a_k‖.
    MatchedFilter,
    /// Seeded random unit vectors.
    Random { seed: u64 },
    /// Skip the first weight update and start from μ ≡ 1, so the first
    /// iterate is the SLNR design.
    UnitWeights,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfig {
    pub epsilon: f64,
    /// SINR threshold Λ_th (linear).
    pub lambda_th: f64,
    pub max_iters: usize,
    pub init: Initializer,
    pub negative_weights: NegativeWeights,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            lambda_th: 0.0,
            max_iters: 200,
            init: Initializer::UnitWeights,
            negative_weights: NegativeWeights::Saturate { delta: 1e-2 },
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(parameter("algorithm: epsilon must be > 0"));
        }
        if let NegativeWeights::Saturate { delta } = self.negative_weights {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(parameter("algorithm: saturation delta must lie in (0, 1)"));
            }
        }
        if !(self.lambda_th >= 0.0) {
            return Err(parameter("algorithm: threshold must be ≥ 0"));
        }
        if self.max_iters < 1 {
            return Err(parameter("algorithm: max_iters must be ≥ 1"));
        }
        Ok(())
    }
}

/// Diagnostics of one inner iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    /// Σ_k log₂(1 + D_k/I_k) after the beamformer step.
    pub upper_bound_bits: f64,
    /// Σ_k virtual SINR with the weights of this iteration, evaluated
    /// before and after the beamformer step.
    pub virtual_before: f64,
    pub virtual_after: f64,
    pub max_step: f64,
    /// Largest fixed-point residual of this iteration's weight solves.
    pub weight_residual: f64,
    pub clamped: usize,
}

/// Result of a beamformer design.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// N×K beamformers; columns of users outside `selected` are zero.
    pub w: DMatrix<Complex64>,
    /// K×K interference weights μ_{k,j} (diagonal and unselected rows unused).
    pub mu: DMatrix<f64>,
    pub selected: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub outer_rounds: usize,
    /// Total clamped weight entries over all iterations.
    pub clamped: usize,
    /// Inner-iteration history of the final outer round.
    pub history: Vec<IterRecord>,
}

/// Source of the per-user SINR behind the one-bit feedback.
pub trait Feedback {
    /// SINR of every user in `active` (indices into the full problem) when
    /// the columns of `w` are transmitted.
    fn measure(&mut self, prob: &BfProblem, w: &DMatrix<Complex64>, active: &[usize], round: usize) -> Vec<f64>;
}

/// Each round draws a fresh fading realization h_k = ρ_k·a_k.
#[derive(Debug, Clone)]
pub struct ChannelDrawFeedback {
    pub fading: Vec<SrDraw>,
    pub stream: RngStream,
}

impl Feedback for ChannelDrawFeedback {
    fn measure(&mut self, prob: &BfProblem, w: &DMatrix<Complex64>, active: &[usize], round: usize) -> Vec<f64> {
        let mut rng = self.stream.child(round as u64).rng();
        let h: Vec<DVector<Complex64>> = (0..prob.k())
            .map(|k| {
                let rho = self.fading[k.min(self.fading.len() - 1)].draw(&mut rng);
                prob.col(k) * rho
            })
            .collect();
        active
            .iter()
            .map(|&k| instantaneous_sinr(&h, w, &prob.p, prob.sigma2, k))
            .collect()
    }
}

/// Deterministic feedback E[|ρ|²]φ_sig / (E[|ρ|²]φ_Y + 1).
#[derive(Debug, Clone)]
pub struct ExpectedFeedback {
    pub fading_power: Vec<f64>,
}

impl Feedback for ExpectedFeedback {
    fn measure(&mut self, prob: &BfProblem, w: &DMatrix<Complex64>, active: &[usize], _round: usize) -> Vec<f64> {
        active
            .iter()
            .map(|&k| {
                let e = self.fading_power[k.min(self.fading_power.len() - 1)];
                let d = prob.signal(w, k) / prob.sigma2;
                let y = (prob.interference(w, k) - prob.sigma2) / prob.sigma2;
                e * d / (e * y + 1.0)
            })
            .collect()
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let nv = v.norm();
    v.unscale(nv)
}

fn initial_w(prob: &BfProblem, init: Initializer) -> DMatrix<Complex64> {
    let mut w = DMatrix::zeros(prob.n(), prob.k());
    match init {
        Initializer::MatchedFilter | Initializer::UnitWeights => {
            for k in 0..prob.k() {
                let a = prob.col(k);
                w.set_column(k, &a.unscale(a.norm()));
            }
        }
        Initializer::Random { seed } => {
            let mut rng = RngStream::new(seed, 0).rng();
            for k in 0..prob.k() {
                w.set_column(k, &random_unit(&mut rng, prob.n()));
            }
        }
    }
    w
}

fn sum_virtual(prob: &BfProblem, w: &DMatrix<Complex64>, mu: &DMatrix<f64>) -> f64 {
    (0..prob.k())
        .map(|k| prob.virtual_sinr(&w.column(k).into_owned(), mu, k))
        .sum()
}

struct Inner {
    w: DMatrix<Complex64>,
    mu: DMatrix<f64>,
    iterations: usize,
    converged: bool,
    clamped: usize,
    history: Vec<IterRecord>,
}

/// Alternate weight updates and beamformer solves on a (sub-)problem.
fn inner_iteration(prob: &BfProblem, cfg: &AlgorithmConfig) -> Result<Inner> {
    let k = prob.k();
    let mut w = initial_w(prob, cfg.init);
    let mut mu = DMatrix::from_element(k, k, 1.0);
    let mut history = Vec::new();
    let mut clamped = 0;
    let mut best: Option<(f64, DMatrix<Complex64>, DMatrix<f64>)> = None;

    for it in 0..cfg.max_iters {
        let mut residual = 0.0f64;
        let mut clamped_now = 0;
        let skip_mu = it == 0 && cfg.init == Initializer::UnitWeights;
        if !skip_mu {
            // Jacobi order: every μ row from the same W
            let updates = (0..k).map(|u| update_weights_with(prob, &w, u, cfg.negative_weights)).collect::<Result<Vec<_>>>()?;
            for (u, upd) in updates.iter().enumerate() {
                scatter_weights(&mut mu, u, upd);
                residual = residual.max(upd.residual);
                clamped_now += upd.clamped;
            }
        }
        clamped += clamped_now;
        let virtual_before = sum_virtual(prob, &w, &mu);
        let mut next = DMatrix::zeros(prob.n(), k);
        for u in 0..k {
            next.set_column(u, &virtual_sinr_weights(prob, &mu, u)?);
        }
        let max_step = (0..k)
            .map(|u| (next.column(u) - w.column(u)).norm())
            .fold(0.0, f64::max);
        w = next;
        let ub = prob.upper_bound_nats(&w) / std::f64::consts::LN_2;
        history.push(IterRecord {
            upper_bound_bits: ub,
            virtual_before,
            virtual_after: sum_virtual(prob, &w, &mu),
            max_step,
            weight_residual: residual,
            clamped: clamped_now,
        });
        if best.as_ref().is_none_or(|b| ub > b.0) {
            best = Some((ub, w.clone(), mu.clone()));
        }
        if max_step <= cfg.epsilon {
            let (_, w, mu) = best.expect("at least one iteration");
            return Ok(Inner {
                w,
                mu,
                iterations: it + 1,
                converged: true,
                clamped,
                history,
            });
        }
    }
    let (_, w, mu) = best.expect("at least one iteration");
    Ok(Inner {
        w,
        mu,
        iterations: cfg.max_iters,
        converged: false,
        clamped,
        history,
    })
}

/// Alternating average-virtual-SINR design with one-bit-feedback user selection.
///
/// Each outer round designs beamformers for the current user set, collects
/// one bit per user (SINR ≥ Λ_th), drops the failing users and repeats until
/// the set is stable or empty.
pub fn run_algorithm1<F: Feedback + ?Sized>(
    prob: &BfProblem,
    cfg: &AlgorithmConfig,
    feedback: &mut F,
) -> Result<BeamformerSet> {
    prob.validate()?;
    cfg.validate()?;
    let kk = prob.k();
    let mut active: Vec<usize> = (0..kk).collect();
    let mut round = 0;
    let mut clamped = 0;
    loop {
        round += 1;
        let mut w_full = DMatrix::zeros(prob.n(), kk);
        let mut mu_full = DMatrix::from_element(kk, kk, 1.0);
        if active.is_empty() {
            return Ok(BeamformerSet {
                w: w_full,
                mu: mu_full,
                selected: active,
                iterations: 0,
                converged: true,
                outer_rounds: round,
                clamped,
                history: Vec::new(),
            });
        }
        let sub = prob.restrict(&active);
        let inner = inner_iteration(&sub, cfg)?;
        clamped += inner.clamped;
        for (a, &ka) in active.iter().enumerate() {
            w_full.set_column(ka, &inner.w.column(a));
            for (b, &kb) in active.iter().enumerate() {
                mu_full[(ka, kb)] = inner.mu[(a, b)];
            }
        }
        let sinr = feedback.measure(prob, &w_full, &active, round);
        let keep: Vec<usize> = active
            .iter()
            .zip(&sinr)
            .filter(|(_, &g)| g >= cfg.lambda_th)
            .map(|(&k, _)| k)
            .collect();
        if keep.len() == active.len() {
            return Ok(BeamformerSet {
                w: w_full,
                mu: mu_full,
                selected: active,
                iterations: inner.iterations,
                converged: inner.converged,
                outer_rounds: round,
                clamped,
                history: inner.history,
            });
        }
        active = keep;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    ZeroForcing,
    Slnr,
}

/// Reference designs serving every user.
pub fn baseline_bf(prob: &BfProblem, kind: Baseline) -> Result<BeamformerSet> {
    prob.validate()?;
    let kk = prob.k();
    let mu = DMatrix::from_element(kk, kk, 1.0);
    let w = match kind {
        Baseline::Slnr => {
            let mut w = DMatrix::zeros(prob.n(), kk);
            for k in 0..kk {
                w.set_column(k, &virtual_sinr_weights(prob, &mu, k)?);
            }
            w
        }
        Baseline::ZeroForcing => {
            if prob.n() < kk {
                return Err(parameter(format!(
                    "zero forcing needs N ≥ K (N = {}, K = {kk})",
                    prob.n()
                )));
            }
            let svd = prob.a.clone().svd(false, false);
            let sv = &svd.singular_values;
            let (lo, hi) = (sv.min(), sv.max());
            if !(lo > 1e-10 * hi) {
                return Err(Error::Singular {
                    func: "baseline_bf",
                    msg: format!("steering matrix is rank deficient (σ_min/σ_max = {:e})", lo / hi),
                });
            }
            let gram = prob.a.adjoint() * &prob.a;
            let inv = gram.lu().try_inverse().ok_or_else(|| Error::Singular {
                func: "baseline_bf",
                msg: "Gram matrix not invertible".into(),
            })?;
            let mut w = &prob.a * inv;
            for k in 0..kk {
                let n = w.column(k).norm();
                w.column_mut(k).unscale_mut(n);
            }
            w
        }
    };
    Ok(BeamformerSet {
        w,
        mu,
        selected: (0..kk).collect(),
        iterations: 0,
        converged: true,
        outer_rounds: 1,
        clamped: 0,
        history: Vec::new(),
    })
}
