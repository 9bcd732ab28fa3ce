//! Model validation suite: every closed form against an independent
//! quadrature or simulation, plus the structural identities and orderings.
//!
//! Every check runs even when an earlier one fails or errors.

use super::config::{ScenarioConfig, SweepVariable};
use super::sweep::{Scheme, Sweep};
use crate::beamforming::{
    gradient_avg_virtual_sinr, gradient_upper_bound, project_tangent, real_angle, run_algorithm1, AlgorithmConfig,
    BeamformerSet, BfProblem, ExpectedFeedback,
};
use crate::capacity::{design_capacity, user_link_capacity_mc, Conditioning};
use crate::channels::{
    beam_gain, malaga_sample, random_geometry, scaled_sr_cdf, sr_pdf, sr_sample, steering_vector, LayoutSpec,
    Malaga, Presets, ShadowedRicianParams,
};
use crate::error::Result;
use crate::feeder::{
    feeder_capacity, feeder_capacity_mc, FeederConfig, FeederMode, Gateway, MalagaMgf, QuadratureSpec,
};
use crate::quadrature::{integrate_to_inf, Tol};
use crate::rng::{MeanAcc, RngStream};
use crate::stats::chi_square_gof;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

/// Direction of the pass condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    /// value ≤ tolerance
    AtMost,
    /// value ≥ tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub cmp: Cmp,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, cmp: Cmp, tolerance: f64) -> Self {
        let passed = match cmp {
            Cmp::AtMost => value <= tolerance,
            Cmp::AtLeast => value >= tolerance,
        };
        Self {
            name: name.into(),
            value,
            tolerance,
            cmp,
            passed,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn errored(name: &str, msg: String) -> Self {
        Self {
            name: name.to_string(),
            value: f64::NAN,
            tolerance: f64::NAN,
            cmp: Cmp::AtMost,
            passed: false,
            detail: format!("error: {msg}"),
        }
    }

    /// One `key=value` record.
    pub fn record(&self) -> String {
        let cmp = match self.cmp {
            Cmp::AtMost => "le",
            Cmp::AtLeast => "ge",
        };
        format!(
            "check={} status={} value={:e} cmp={cmp} tol={:e} detail=\"{}\"",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.value,
            self.tolerance,
            self.detail.replace('"', "'")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub elapsed_s: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.checks {
            writeln!(w, "{}", c.record())?;
        }
        writeln!(
            w,
            "summary checks={} failed={} elapsed_s={:.1} status={}",
            self.checks.len(),
            self.failures(),
            self.elapsed_s,
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

/// Sample sizes and instance counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    /// Draws for MGF, C₁ and C₂ simulations.
    pub mc_draws: usize,
    pub gof_samples: usize,
    /// Random user-link scenarios per shadowing preset.
    pub c2_scenarios: usize,
    pub bf_instances: usize,
    pub fd_instances: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            mc_draws: 1_000_000,
            gof_samples: 100_000,
            c2_scenarios: 20,
            bf_instances: 100,
            fd_instances: 50,
        }
    }
}

type Group = fn(&Ctx) -> Result<Vec<Check>>;

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    presets: Presets,
    sizes: SuiteSizes,
}

/// Run every check group; errors and panics become failed checks.
pub fn validate_models(cfg: &ScenarioConfig, sizes: SuiteSizes) -> ValidationReport {
    let start = Instant::now();
    let ctx = Ctx {
        cfg,
        presets: cfg.presets(),
        sizes,
    };
    let groups: [(&str, Group); 14] = [
        ("presets", presets_valid),
        ("pdf_norm", pdf_normalization),
        ("gof", sampler_gof),
        ("mgf_quad", mgf_vs_quadrature),
        ("mgf_mc", mgf_vs_mc),
        ("c1_mc", c1_vs_mc),
        ("c2_mc", c2_vs_mc),
        ("fixed_point", fixed_point_and_alignment),
        ("gradient_fd", gradient_fd),
        ("beam_center_gain", beam_center_gain),
        ("sr_cdf_constants", sr_cdf_constants),
        ("log_identity", log_identity),
        ("ordering_feeder", ordering_feeder),
        ("ordering_userlink", ordering_userlink),
    ];
    let mut checks = Vec::new();
    for (name, g) in groups {
        match catch_unwind(AssertUnwindSafe(|| g(&ctx))) {
            Ok(Ok(cs)) => checks.extend(cs),
            Ok(Err(e)) => checks.push(Check::errored(name, e.to_string())),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                checks.push(Check::errored(name, format!("panic: {msg}")));
            }
        }
    }
    ValidationReport {
        checks,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn presets_valid(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, p) in &ctx.presets.malaga {
        out.push(match p.validate() {
            Ok(()) => Check::new(format!("preset.malaga.{name}"), 0.0, Cmp::AtMost, 0.0),
            Err(e) => Check::errored(&format!("preset.malaga.{name}"), e.to_string()),
        });
    }
    for (name, p) in &ctx.presets.shadowed_rician {
        let r = p.validate().and_then(|_| p.cdf_coefficients().map(|_| ()));
        out.push(match r {
            Ok(()) => Check::new(format!("preset.shadowed_rician.{name}"), 0.0, Cmp::AtMost, 0.0),
            Err(e) => Check::errored(&format!("preset.shadowed_rician.{name}"), e.to_string()),
        });
    }
    Ok(out)
}

fn each_malaga<F: FnMut(&str, &Malaga) -> Result<Check>>(ctx: &Ctx, mut f: F, prefix: &str) -> Vec<Check> {
    ctx.presets
        .malaga
        .iter()
        .map(|(name, p)| {
            let label = format!("{prefix}.{name}");
            Malaga::new(*p)
                .and_then(|m| f(&label, &m))
                .unwrap_or_else(|e| Check::errored(&label, e.to_string()))
        })
        .collect()
}

fn each_sr<F: FnMut(&str, &ShadowedRicianParams) -> Result<Check>>(ctx: &Ctx, mut f: F, prefix: &str) -> Vec<Check> {
    ctx.presets
        .shadowed_rician
        .iter()
        .map(|(name, p)| {
            let label = format!("{prefix}.{name}");
            p.validate()
                .and_then(|_| f(&label, p))
                .unwrap_or_else(|e| Check::errored(&label, e.to_string()))
        })
        .collect()
}

fn pdf_normalization(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = each_malaga(
        ctx,
        |label, m| {
            let mut err = None;
            let q = integrate_to_inf(
                |x| m.pdf(x).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    f64::NAN
                }),
                0.0,
                m.params.mean(),
                Tol::rel(1e-10),
            );
            if let Some(e) = err {
                return Err(e);
            }
            Ok(Check::new(label, (q.value - 1.0).abs(), Cmp::AtMost, 1e-6))
        },
        "pdf_norm.malaga",
    );
    out.extend(each_sr(
        ctx,
        |label, p| {
            let q = integrate_to_inf(|x| sr_pdf(x, p).unwrap_or(f64::NAN), 0.0, p.mean_power().sqrt(), Tol::rel(1e-10));
            Ok(Check::new(label, (q.value - 1.0).abs(), Cmp::AtMost, 1e-6))
        },
        "pdf_norm.shadowed_rician",
    ));
    Ok(out)
}

fn sampler_gof(ctx: &Ctx) -> Result<Vec<Check>> {
    let n = ctx.sizes.gof_samples;
    let mut i = 0u64;
    let mut out = each_malaga(
        ctx,
        |label, m| {
            i += 1;
            let xs = malaga_sample(RngStream::new(0x60f, i), &m.params, n)?;
            let r = chi_square_gof(&xs, |x| m.cdf(x).unwrap_or(f64::NAN), 50);
            Ok(Check::new(label, r.p_value, Cmp::AtLeast, 0.01).with_detail(format!("chi2={:.2} dof={} n={n}", r.statistic, r.dof)))
        },
        "gof.malaga",
    );
    out.extend(each_sr(
        ctx,
        |label, p| {
            i += 1;
            let xs = sr_sample(RngStream::new(0x60f, i), p, n)?;
            let r = chi_square_gof(&xs, |x| scaled_sr_cdf(x * x, p, 1.0).unwrap_or(f64::NAN), 50);
            Ok(Check::new(label, r.p_value, Cmp::AtLeast, 0.01).with_detail(format!("chi2={:.2} dof={} n={n}", r.statistic, r.dof)))
        },
        "gof.shadowed_rician",
    ));
    Ok(out)
}

/// γ̄ used by the MGF checks.
const MGF_GAMMA_BAR: f64 = 100.0;

/// 20 log-spaced s with s·γ̄ from 1e-3 to 1e3.
fn mgf_grid() -> Vec<f64> {
    (0..20)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 19.0) / MGF_GAMMA_BAR)
        .collect()
}

fn mgf_vs_quadrature(ctx: &Ctx) -> Result<Vec<Check>> {
    Ok(each_malaga(
        ctx,
        |label, m| {
            let mgf = MalagaMgf::new(&m.params, MGF_GAMMA_BAR)?;
            let mut worst = 0.0f64;
            for s in mgf_grid() {
                let v = mgf.value(s)?;
                let q = integrate_to_inf(
                    |x| (-s * MGF_GAMMA_BAR * x * x).exp() * m.pdf(x).unwrap_or(f64::NAN),
                    0.0,
                    m.params.mean(),
                    Tol::rel(1e-12).with_abs(1e-15),
                )
                .value;
                worst = worst.max(rel(v, q));
            }
            Ok(Check::new(label, worst, Cmp::AtMost, 1e-6).with_detail("20 log-spaced s"))
        },
        "mgf_quad",
    ))
}

fn mgf_vs_mc(ctx: &Ctx) -> Result<Vec<Check>> {
    let n = ctx.sizes.mc_draws;
    let mut i = 0u64;
    Ok(each_malaga(
        ctx,
        |label, m| {
            i += 1;
            let mgf = MalagaMgf::new(&m.params, MGF_GAMMA_BAR)?;
            let xs = malaga_sample(RngStream::new(0x3cf, i), &m.params, n)?;
            let mut worst = 0.0f64;
            for sg in [0.1, 1.0, 10.0] {
                let s = sg / MGF_GAMMA_BAR;
                let mut acc = MeanAcc::default();
                xs.iter().for_each(|&x| acc.push((-s * MGF_GAMMA_BAR * x * x).exp()));
                worst = worst.max(rel(acc.mean(), mgf.value(s)?));
            }
            Ok(Check::new(label, worst, Cmp::AtMost, 0.01).with_detail(format!("n={n}")))
        },
        "mgf_mc",
    ))
}

/// Two identical gateways with per-gateway γ̄ = `gbar`.
pub fn feeder_at_gamma_bar(turbulence: crate::channels::MalagaParams, gbar: f64) -> FeederConfig {
    let g = Gateway {
        path: crate::channels::FsoPathLoss::from_db(0.0, 0.0, 0.0, 0.0),
        turbulence,
    };
    FeederConfig {
        p1_w: gbar,
        eta: 1.0,
        n0_w: 1.0,
        gateways: vec![g, g],
    }
}

fn c1_vs_mc(ctx: &Ctx) -> Result<Vec<Check>> {
    let n = ctx.sizes.mc_draws;
    let q = QuadratureSpec {
        t: ctx.cfg.feeder.quadrature_nodes,
        ..Default::default()
    };
    let mut out = Vec::new();
    for (pi, (name, p)) in ctx.presets.malaga.iter().enumerate() {
        for (di, db) in [10.0, 20.0, 30.0].into_iter().enumerate() {
            let label = format!("c1_mc.{name}.{db:.0}db");
            let cfg = feeder_at_gamma_bar(*p, 10f64.powf(db / 10.0));
            let r = feeder_capacity(&cfg, q, FeederMode::Stbc).and_then(|cf| {
                let mc = feeder_capacity_mc(RngStream::new(0xc1, (pi * 3 + di) as u64), &cfg, n, FeederMode::Stbc)?;
                Ok(Check::new(&label, rel(cf.bits, mc.mean), Cmp::AtMost, 0.01)
                    .with_detail(format!("cf={:.6} mc={:.6} se={:.1e} T={}", cf.bits, mc.mean, mc.std_err, q.t)))
            });
            out.push(r.unwrap_or_else(|e| Check::errored(&label, e.to_string())));
        }
    }
    Ok(out)
}

fn c2_vs_mc(ctx: &Ctx) -> Result<Vec<Check>> {
    let n = ctx.sizes.mc_draws;
    Ok(each_sr(
        ctx,
        |label, p| {
            let mut worst = 0.0f64;
            let mut worst_at = String::new();
            for i in 0..ctx.sizes.c2_scenarios {
                let (prob, bf, lambda) = c2_scenario(ctx, p, i)?;
                let cf = design_capacity(&prob, &bf, p, lambda, Conditioning::Truncated)?;
                let mc = user_link_capacity_mc(RngStream::new(0xc2, i as u64), &prob, &bf, p, lambda, n)?;
                let e = rel(cf.bits, mc.total.mean);
                if e > worst {
                    worst = e;
                    worst_at = format!("scenario {i}: K={} cf={:.5} mc={:.5}", prob.k(), cf.bits, mc.total.mean);
                }
            }
            Ok(Check::new(label, worst, Cmp::AtMost, 0.02)
                .with_detail(format!("{} scenarios n={n}; worst {worst_at}", ctx.sizes.c2_scenarios)))
        },
        "c2_mc",
    ))
}

/// Scenario i: N beams from the config, K = 3..7, powers −5..10 dBW, and a
/// threshold at 0.2× the weakest mean-fading SINR on odd i.
fn c2_scenario(
    ctx: &Ctx,
    fading: &ShadowedRicianParams,
    i: usize,
) -> Result<(BfProblem, BeamformerSet, f64)> {
    let users = 3 + i % 5;
    let prob = geo_problem(ctx, 5000 + i as u64, users, 10f64.powf((-5.0 + 5.0 * (i % 4) as f64) / 10.0))?;
    let design_prob = prob.averaged(fading.mean_power())?;
    let e = fading.mean_power();
    // the design problem already carries E|ρ|²
    let mut fb = ExpectedFeedback { fading_power: vec![1.0; users] };
    let base = AlgorithmConfig::default();
    let bf = run_algorithm1(&design_prob, &base, &mut fb)?;
    if i.is_multiple_of(2) {
        return Ok((prob, bf, 0.0));
    }
    let weakest = (0..users)
        .map(|k| {
            let d = prob.signal(&bf.w, k) / prob.sigma2;
            let y = (prob.interference(&bf.w, k) - prob.sigma2) / prob.sigma2;
            e * d / (e * y + 1.0)
        })
        .fold(f64::INFINITY, f64::min);
    let lambda = 0.2 * weakest;
    let cfg = AlgorithmConfig { lambda_th: lambda, ..base };
    let bf = run_algorithm1(&design_prob, &cfg, &mut ExpectedFeedback { fading_power: vec![1.0; users] })?;
    Ok((prob, bf, lambda))
}

fn layout(ctx: &Ctx, users: usize) -> LayoutSpec {
    let u = &ctx.cfg.userlink;
    LayoutSpec {
        beams: u.beams,
        users,
        phi3db: u.beamwidth_3db_deg.to_radians(),
        gmax: 10f64.powf(u.max_gain_dbi / 10.0),
        fc: u.freq_ghz * 1e9,
        gr: 10f64.powf(u.rx_gain_dbi / 10.0),
        spacing: u.beam_spacing_beamwidths,
        user_radius: u.user_radius_beamwidths,
    }
}

fn geo_problem(ctx: &Ctx, seed: u64, users: usize, p_w: f64) -> Result<BfProblem> {
    let u = &ctx.cfg.userlink;
    let g = random_geometry(&mut RngStream::new(seed, 0).rng(), &layout(ctx, users))?;
    let a = DMatrix::from_columns(&(0..users).map(|k| steering_vector(&g, k)).collect::<Vec<_>>());
    let sigma2 = super::config::BOLTZMANN * u.noise_temp_k * u.bandwidth_mhz * 1e6;
    BfProblem::from_real(&a, DVector::from_element(users, p_w), sigma2)
}

fn fixed_point_and_alignment(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut residual = 0.0f64;
    let mut angle = 0.0f64;
    let mut full_angle = 0.0f64;
    let (mut aligned, mut vanished, mut skipped) = (0, 0, 0);
    let users = ctx.cfg.userlink.users.min(ctx.cfg.userlink.beams).max(2);
    for seed in 0..ctx.sizes.bf_instances as u64 {
        let prob = geo_problem(ctx, 7000 + seed, users, 0.1)?;
        let cfg = AlgorithmConfig {
            epsilon: 1e-10,
            max_iters: 2000,
            ..Default::default()
        };
        let out = run_algorithm1(&prob, &cfg, &mut ExpectedFeedback { fading_power: vec![1.0] })?;
        for h in &out.history {
            residual = residual.max(h.weight_residual);
        }
        if !out.converged || out.clamped > 0 {
            skipped += 1;
            continue;
        }
        for k in 0..prob.k() {
            let wk = out.w.column(k).into_owned();
            let g16 = gradient_upper_bound(&prob, &out.w, k);
            let g17 = gradient_avg_virtual_sinr(&prob, &out.w, &out.mu, k);
            full_angle = full_angle.max(real_angle(&g16, &g17));
            let t16 = project_tangent(&g16, &wk);
            let t17 = project_tangent(&g17, &wk);
            if t16.norm() < 1e-6 * g16.norm() && t17.norm() < 1e-6 * g17.norm() {
                vanished += 1;
            } else {
                aligned += 1;
                angle = angle.max(real_angle(&t16, &t17));
            }
        }
    }
    Ok(vec![
        Check::new("fixed_point_residual", residual, Cmp::AtMost, 1e-8)
            .with_detail(format!("{} instances", ctx.sizes.bf_instances)),
        Check::new("projected_gradient_angle", angle, Cmp::AtMost, 1e-6).with_detail(format!(
            "{aligned} users compared, {vanished} with both tangents below 1e-6 relative, {skipped} runs clamped or unconverged"
        )),
        Check::new("gradient_angle_at_convergence", full_angle, Cmp::AtMost, 1e-6)
            .with_detail(format!("{} users", aligned + vanished)),
    ])
}

fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn fd_gradient(w: &DMatrix<Complex64>, k: usize, f: impl Fn(&DMatrix<Complex64>) -> f64) -> DVector<Complex64> {
    let h = 1e-6;
    DVector::from_fn(w.nrows(), |i, _| {
        let mut part = [0.0; 2];
        for (c, dir) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)].iter().enumerate() {
            let mut wp = w.clone();
            wp[(i, k)] += dir;
            let mut wm = w.clone();
            wm[(i, k)] -= dir;
            part[c] = (f(&wp) - f(&wm)) / (2.0 * h);
        }
        Complex64::new(part[0], part[1])
    })
}

fn gradient_fd(ctx: &Ctx) -> Result<Vec<Check>> {
    let (mut e16, mut e17) = (0.0f64, 0.0f64);
    let (n, kk) = (4, 3);
    for seed in 0..ctx.sizes.fd_instances as u64 {
        let mut rng = RngStream::new(0xfd, seed).rng();
        let a = DMatrix::from_fn(n, kk, |_, _| cn(&mut rng));
        let p = DVector::from_fn(kk, |_, _| 0.5 + 4.5 * rng.random::<f64>());
        let prob = BfProblem::new(a, p, 0.7)?;
        let mut w = DMatrix::from_fn(n, kk, |_, _| cn(&mut rng));
        for j in 0..kk {
            let nj = w.column(j).norm();
            w.column_mut(j).unscale_mut(nj);
        }
        let mu = DMatrix::from_fn(kk, kk, |_, _| 0.1 + 2.0 * rng.random::<f64>());
        for k in 0..kk {
            let pk = prob.p[k];
            let fd = fd_gradient(&w, k, |x| prob.upper_bound_nats(x)) / Complex64::new(pk, 0.0);
            let g = gradient_upper_bound(&prob, &w, k);
            e16 = e16.max((&g - &fd).norm() / fd.norm());
            let fd = fd_gradient(&w, k, |x| prob.virtual_sinr(&x.column(k).into_owned(), &mu, k).ln())
                / Complex64::new(pk, 0.0);
            let g = gradient_avg_virtual_sinr(&prob, &w, &mu, k);
            e17 = e17.max((&g - &fd).norm() / fd.norm());
        }
    }
    let d = format!("{} instances", ctx.sizes.fd_instances);
    Ok(vec![
        Check::new("gradient_fd.upper_bound", e16, Cmp::AtMost, 1e-5).with_detail(d.clone()),
        Check::new("gradient_fd.virtual_sinr", e17, Cmp::AtMost, 1e-5).with_detail(d),
    ])
}

fn beam_center_gain(ctx: &Ctx) -> Result<Vec<Check>> {
    let u = &ctx.cfg.userlink;
    let gmax = 10f64.powf(u.max_gain_dbi / 10.0);
    let phi3 = u.beamwidth_3db_deg.to_radians();
    let worst = [0.0, 1e-12, 1e-9]
        .iter()
        .map(|&phi| rel(beam_gain(phi, phi3, gmax), gmax))
        .fold(0.0, f64::max);
    Ok(vec![Check::new("beam_center_gain", worst, Cmp::AtMost, 1e-9)])
}

fn sr_cdf_constants(_ctx: &Ctx) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(0x23, 0).rng();
    let mut worst = 0.0f64;
    for m in 1..=10u32 {
        for _ in 0..10 {
            let p = ShadowedRicianParams {
                m,
                b: 0.01 + 0.5 * rng.random::<f64>(),
                omega: 0.01 + 2.0 * rng.random::<f64>(),
            };
            let s: f64 = p.cdf_coefficients()?.iter().sum();
            worst = worst.max((s - 1.0).abs()).max(scaled_sr_cdf(0.0, &p, 1.0)?.abs());
        }
    }
    Ok(vec![Check::new("sr_cdf_constants", worst, Cmp::AtMost, 1e-12).with_detail("m = 1..10, 10 random (b, Ω) each")])
}

fn log_identity(_ctx: &Ctx) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(0x10, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let phi_sig = 10f64.powf(rng.random_range(-3.0..4.0));
        let phi_y = 10f64.powf(rng.random_range(-3.0..3.0));
        let r2 = 10f64.powf(rng.random_range(-4.0..2.0));
        let gamma = phi_sig * r2 / (phi_y * r2 + 1.0);
        let lhs = gamma.ln_1p();
        let rhs = ((phi_sig + phi_y) * r2).ln_1p() - (phi_y * r2).ln_1p();
        worst = worst.max((lhs - rhs).abs() / lhs.max(1.0));
    }
    Ok(vec![Check::new("log_identity", worst, Cmp::AtMost, 1e-12).with_detail("100000 draws")])
}

fn ordering_feeder(ctx: &Ctx) -> Result<Vec<Check>> {
    let scn = ctx.cfg.resolve()?;
    let grid: Vec<f64> = match ctx.cfg.sweep.variable {
        SweepVariable::FeederPowerDbm => ctx.cfg.sweep.grid.clone(),
        SweepVariable::UserPowerDbw => (0..7).map(|i| ctx.cfg.feeder.power_dbm - 15.0 + 5.0 * i as f64).collect(),
    };
    let mut margin = f64::INFINITY;
    for dbm in grid {
        let s = scn.with_feeder_power_dbm(dbm);
        let stbc = feeder_capacity(&s.feeder, s.quadrature, FeederMode::Stbc)?.bits;
        let single = feeder_capacity(&s.feeder, s.quadrature, FeederMode::Single)?.bits;
        margin = margin.min(stbc - single);
    }
    Ok(vec![Check::new("ordering.stbc_vs_single", margin, Cmp::AtLeast, 0.0).with_detail("min C1 difference (bits)")])
}

/// Proposed ≥ SLNR at every point and ≥ ZF at the lowest power of the
/// user-power sweep, on closed forms and on paired simulations.
fn ordering_userlink(ctx: &Ctx) -> Result<Vec<Check>> {
    let base = ctx.cfg.resolve()?;
    let grid = match ctx.cfg.sweep.variable {
        SweepVariable::UserPowerDbw => ctx.cfg.sweep.grid.clone(),
        SweepVariable::FeederPowerDbm => super::config::ScenarioConfig::default().sweep.grid,
    };
    let sweep = Sweep {
        base,
        variable: SweepVariable::UserPowerDbw,
        grid,
        feeder_power_dbm: ctx.cfg.feeder.power_dbm,
        user_power_dbw: ctx.cfg.userlink.power_dbw,
    };
    let rows = sweep.run()?;
    let mut cf_slnr = f64::INFINITY;
    let mut mc_slnr = f64::INFINITY;
    for r in &rows {
        let p = r.scheme(Scheme::Proposed);
        let s = r.scheme(Scheme::Slnr);
        cf_slnr = cf_slnr.min(p.c2_cf - s.c2_cf);
        mc_slnr = mc_slnr.min(p.c2_mc - s.c2_mc);
    }
    let low = rows
        .iter()
        .min_by(|a, b| a.user_power_dbw.total_cmp(&b.user_power_dbw))
        .expect("non-empty grid");
    let zf = low.scheme(Scheme::Zf);
    let p = low.scheme(Scheme::Proposed);
    Ok(vec![
        Check::new("ordering.proposed_vs_slnr.cf", cf_slnr, Cmp::AtLeast, 0.0).with_detail("min C2 difference (bits)"),
        Check::new("ordering.proposed_vs_slnr.mc", mc_slnr, Cmp::AtLeast, 0.0)
            .with_detail(format!("min paired C2 difference (bits), n={}", sweep.base.samples)),
        Check::new("ordering.proposed_vs_zf_low_snr.cf", p.c2_cf - zf.c2_cf, Cmp::AtLeast, 0.0)
            .with_detail(format!("at {} dBW", low.user_power_dbw)),
        Check::new("ordering.proposed_vs_zf_low_snr.mc", p.c2_mc - zf.c2_mc, Cmp::AtLeast, 0.0)
            .with_detail(format!("at {} dBW", low.user_power_dbw)),
    ])
}
