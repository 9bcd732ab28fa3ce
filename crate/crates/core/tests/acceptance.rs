//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use hts_capacity::beamforming::*;
use hts_capacity::capacity::{design_capacity, user_link_capacity_mc, Conditioning};
use hts_capacity::channels::*;
use hts_capacity::cli::{validate_models, Scheme, ScenarioConfig, SuiteSizes, Sweep};
use hts_capacity::feeder::*;
use hts_capacity::quadrature::{integrate_to_inf, Tol};
use hts_capacity::rng::{MeanAcc, RngStream};
use hts_capacity::stats::chi_square_gof;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn presets() -> Presets {
    Presets::embedded()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const KTB: f64 = 1.380649e-23 * 207.0 * 500e6;

fn geo_problem(seed: u64, users: usize, p_w: f64) -> BfProblem {
    let spec = LayoutSpec {
        beams: 7,
        users,
        phi3db: 0.2f64.to_radians(),
        gmax: 10f64.powf(5.2),
        fc: 20e9,
        gr: 10f64.powf(4.17),
        spacing: 3f64.sqrt(),
        user_radius: 1.0,
    };
    let g = random_geometry(&mut RngStream::new(seed, 0).rng(), &spec).unwrap();
    let a = DMatrix::from_columns(&(0..users).map(|k| steering_vector(&g, k)).collect::<Vec<_>>());
    BfProblem::from_real(&a, DVector::from_element(users, p_w), KTB).unwrap()
}

fn two_gateways(p: MalagaParams, gbar: f64) -> FeederConfig {
    let g = Gateway {
        path: FsoPathLoss::from_db(0.0, 0.0, 0.0, 0.0),
        turbulence: p,
    };
    FeederConfig {
        p1_w: gbar,
        eta: 1.0,
        n0_w: 1.0,
        gateways: vec![g, g],
    }
}

#[test]
fn criterion_01_mgf_closed_form_vs_quadrature() {
    let start = Instant::now();
    let gbar = 100.0;
    let mut worst = 0.0f64;
    for p in presets().malaga.values() {
        let m = Malaga::new(*p).unwrap();
        let mgf = MalagaMgf::new(p, gbar).unwrap();
        for i in 0..20 {
            let s = 10f64.powf(-5.0 + 6.0 * i as f64 / 19.0);
            let q = integrate_to_inf(
                |x| (-s * gbar * x * x).exp() * m.pdf(x).unwrap(),
                0.0,
                p.mean(),
                Tol::rel(1e-12).with_abs(1e-15),
            )
            .value;
            worst = worst.max(rel(mgf.value(s).unwrap(), q));
        }
    }
    let t = start.elapsed().as_secs_f64();
    report(1, worst <= 1e-6 && t < 10.0, format!("max rel err {worst:.2e} (tol 1e-6), {t:.2} s (limit 10 s)"));
}

#[test]
fn criterion_02_mgf_vs_monte_carlo() {
    let start = Instant::now();
    let gbar = 100.0;
    let mut worst = 0.0f64;
    for (i, p) in presets().malaga.values().enumerate() {
        let mgf = MalagaMgf::new(p, gbar).unwrap();
        let xs = malaga_sample(RngStream::new(202, i as u64), p, 1_000_000).unwrap();
        for sg in [0.03, 0.3, 3.0, 30.0] {
            let s = sg / gbar;
            let mut acc = MeanAcc::default();
            xs.iter().for_each(|&x| acc.push((-s * gbar * x * x).exp()));
            worst = worst.max(rel(acc.mean(), mgf.value(s).unwrap()));
        }
    }
    let t = start.elapsed().as_secs_f64();
    report(2, worst <= 0.01 && t < 30.0, format!("max rel err {worst:.2e} (tol 1e-2), 10^6 draws, {t:.2} s (limit 30 s)"));
}

#[test]
fn criterion_03_c1_closed_form_vs_monte_carlo() {
    let mut worst = 0.0f64;
    let mut literal_worst = 0.0f64;
    for (i, (name, p)) in presets().malaga.iter().enumerate() {
        for (j, db) in [10.0, 20.0, 30.0].into_iter().enumerate() {
            let cfg = two_gateways(*p, 10f64.powf(db / 10.0));
            let cf = feeder_capacity(&cfg, QuadratureSpec { t: 30, scale: NodeScale::MeanSnr }, FeederMode::Stbc).unwrap();
            let lit = feeder_capacity(&cfg, QuadratureSpec { t: 30, scale: NodeScale::Literal }, FeederMode::Stbc).unwrap();
            let mc = feeder_capacity_mc(RngStream::new(303, (3 * i + j) as u64), &cfg, 1_000_000, FeederMode::Stbc).unwrap();
            let e = rel(cf.bits, mc.mean);
            let el = rel(lit.bits, mc.mean);
            println!("  {name} {db} dB: cf {:.5} mc {:.5}±{:.1e} rel {e:.2e}; literal nodes {:.5} rel {el:.2e}", cf.bits, mc.mean, mc.std_err, lit.bits);
            worst = worst.max(e);
            literal_worst = literal_worst.max(el);
        }
    }
    report(
        3,
        worst <= 0.01,
        format!("max rel err {worst:.2e} (tol 1e-2), T=30, mean-SNR node scaling; literal node mapping for information: {literal_worst:.2e}"),
    );
}

#[test]
fn criterion_04_c2_closed_form_vs_monte_carlo() {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (name, fading) in &presets().shadowed_rician {
        let e = fading.mean_power();
        for i in 0..20u64 {
            let users = 3 + (i % 5) as usize;
            let p_w = 10f64.powf((-5.0 + 5.0 * (i % 4) as f64) / 10.0);
            let prob = geo_problem(404 + i, users, p_w);
            let design = prob.averaged(e).unwrap();
            let fb = || ExpectedFeedback { fading_power: vec![1.0; users] };
            let mut bf = run_algorithm1(&design, &AlgorithmConfig::default(), &mut fb()).unwrap();
            let mut lambda = 0.0;
            if i % 2 == 1 {
                // threshold at a fifth of the weakest mean-fading SINR
                lambda = 0.2
                    * (0..users)
                        .map(|k| {
                            let d = prob.signal(&bf.w, k) / prob.sigma2;
                            let y = (prob.interference(&bf.w, k) - prob.sigma2) / prob.sigma2;
                            e * d / (e * y + 1.0)
                        })
                        .fold(f64::INFINITY, f64::min);
                let cfg = AlgorithmConfig { lambda_th: lambda, ..Default::default() };
                bf = run_algorithm1(&design, &cfg, &mut fb()).unwrap();
            }
            let cf = design_capacity(&prob, &bf, fading, lambda, Conditioning::Truncated).unwrap();
            let mc = user_link_capacity_mc(RngStream::new(404, i), &prob, &bf, fading, lambda, 1_000_000).unwrap();
            let err = rel(cf.bits, mc.total.mean);
            if err > 0.01 {
                println!("  {name} scenario {i}: K={users} cf {:.5} mc {:.5} rel {err:.2e}", cf.bits, mc.total.mean);
            }
            worst = worst.max(err);
            cases += 1;
        }
    }
    report(4, worst <= 0.02 && cases >= 60, format!("max rel err {worst:.2e} (tol 2e-2) over {cases} scenario×preset cases, 10^6 draws"));
}

#[test]
fn criterion_05_sampler_goodness_of_fit() {
    let mut min_p = 1.0f64;
    for (i, p) in presets().malaga.values().enumerate() {
        let m = Malaga::new(*p).unwrap();
        let xs = malaga_sample(RngStream::new(505, i as u64), p, 100_000).unwrap();
        min_p = min_p.min(chi_square_gof(&xs, |x| m.cdf(x).unwrap(), 50).p_value);
    }
    for (i, p) in presets().shadowed_rician.values().enumerate() {
        let xs = sr_sample(RngStream::new(506, i as u64), p, 100_000).unwrap();
        min_p = min_p.min(chi_square_gof(&xs, |x| scaled_sr_cdf(x * x, p, 1.0).unwrap(), 50).p_value);
    }
    report(5, min_p > 0.01, format!("min chi-square p-value {min_p:.3} (need > 0.01), 10^5 samples, 6 presets"));
}

#[test]
fn criterion_06_fixed_point_residual_and_alignment() {
    let mut residual = 0.0f64;
    let mut tangent_angle = 0.0f64;
    let mut full_angle = 0.0f64;
    let (mut updates, mut eligible, mut skipped) = (0, 0, 0);
    for seed in 0..100u64 {
        let users = 3 + (seed % 5) as usize;
        let prob = geo_problem(606 + seed, users, 0.1);
        let cfg = AlgorithmConfig { epsilon: 1e-10, max_iters: 2000, ..Default::default() };
        let out = run_algorithm1(&prob, &cfg, &mut ExpectedFeedback { fading_power: vec![1.0] }).unwrap();
        for h in &out.history {
            residual = residual.max(h.weight_residual);
            updates += 1;
        }
        if !out.converged || out.clamped > 0 {
            skipped += 1;
            continue;
        }
        eligible += 1;
        for k in 0..users {
            let wk = out.w.column(k).into_owned();
            let g16 = gradient_upper_bound(&prob, &out.w, k);
            let g17 = gradient_avg_virtual_sinr(&prob, &out.w, &out.mu, k);
            full_angle = full_angle.max(real_angle(&g16, &g17));
            let t16 = project_tangent(&g16, &wk);
            let t17 = project_tangent(&g17, &wk);
            // a vanishing pair is parallel in the limit
            if t16.norm() >= 1e-6 * g16.norm() || t17.norm() >= 1e-6 * g17.norm() {
                tangent_angle = tangent_angle.max(real_angle(&t16, &t17));
            }
        }
    }
    let pass = residual <= 1e-8 && tangent_angle <= 1e-6 && full_angle <= 1e-6 && eligible >= 90;
    report(
        6,
        pass,
        format!(
            "max residual {residual:.2e} over {updates} updates (tol 1e-8); projected angle {tangent_angle:.2e}, full angle {full_angle:.2e} (tol 1e-6) on {eligible}/100 converged unclamped runs, {skipped} skipped"
        ),
    );
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

#[test]
fn criterion_07_gradients_match_finite_differences() {
    let (mut e_ub, mut e_vs) = (0.0f64, 0.0f64);
    for seed in 0..50u64 {
        let mut rng = RngStream::new(707, seed).rng();
        let n = 3 + (seed % 4) as usize;
        let kk = 2 + (seed % 3) as usize;
        let a = DMatrix::from_fn(n, kk, |_, _| cn(&mut rng));
        let p = DVector::from_fn(kk, |_, _| 0.5 + 4.5 * rng.random::<f64>());
        let prob = BfProblem::new(a, p, 0.2 + rng.random::<f64>()).unwrap();
        let mut w = DMatrix::from_fn(n, kk, |_, _| cn(&mut rng));
        for j in 0..kk {
            let nj = w.column(j).norm();
            w.column_mut(j).unscale_mut(nj);
        }
        let mu = DMatrix::from_fn(kk, kk, |_, _| 0.1 + 2.0 * rng.random::<f64>());
        for k in 0..kk {
            let pk = Complex64::new(prob.p[k], 0.0);
            let fd = fd_gradient(&w, k, |x| prob.upper_bound_nats(x)) / pk;
            e_ub = e_ub.max((gradient_upper_bound(&prob, &w, k) - &fd).norm() / fd.norm());
            let fd = fd_gradient(&w, k, |x| prob.virtual_sinr(&x.column(k).into_owned(), &mu, k).ln()) / pk;
            e_vs = e_vs.max((gradient_avg_virtual_sinr(&prob, &w, &mu, k) - &fd).norm() / fd.norm());
        }
    }
    report(
        7,
        e_ub <= 1e-5 && e_vs <= 1e-5,
        format!("max rel err: upper bound {e_ub:.2e}, virtual SINR {e_vs:.2e} (tol 1e-5), 50 instances"),
    );
}

#[test]
fn criterion_08_orderings_on_default_sweep() {
    let cfg = ScenarioConfig::default_config();
    let sweep = Sweep {
        base: cfg.resolve().unwrap(),
        variable: cfg.sweep.variable,
        grid: cfg.sweep.grid.clone(),
        feeder_power_dbm: cfg.feeder.power_dbm,
        user_power_dbw: cfg.userlink.power_dbw,
    };
    let rows = sweep.run().unwrap();
    let mut stbc = f64::INFINITY;
    for dbm in (0..7).map(|i| -10.0 + 5.0 * i as f64) {
        for turb in ["strong", "moderate", "weak"] {
            let mut c = cfg.clone();
            c.apply_preset(turb).unwrap();
            let s = c.resolve().unwrap().with_feeder_power_dbm(dbm);
            let a = feeder_capacity(&s.feeder, s.quadrature, FeederMode::Stbc).unwrap().bits;
            let b = feeder_capacity(&s.feeder, s.quadrature, FeederMode::Single).unwrap().bits;
            stbc = stbc.min(a - b);
        }
    }
    let mut slnr_mc = f64::INFINITY;
    let mut slnr_cf = f64::INFINITY;
    for r in &rows {
        let p = r.scheme(Scheme::Proposed);
        let s = r.scheme(Scheme::Slnr);
        println!(
            "  {:>5} dBW: proposed {:.4} slnr {:.4} zf {:.4} (paired mc)",
            r.user_power_dbw,
            p.c2_mc,
            s.c2_mc,
            r.scheme(Scheme::Zf).c2_mc
        );
        slnr_mc = slnr_mc.min(p.c2_mc - s.c2_mc);
        slnr_cf = slnr_cf.min(p.c2_cf - s.c2_cf);
    }
    let low = &rows[0];
    let zf_low = low.scheme(Scheme::Proposed).c2_mc - low.scheme(Scheme::Zf).c2_mc;
    report(
        8,
        stbc >= 0.0 && slnr_mc >= 0.0 && slnr_cf >= 0.0 && zf_low >= 0.0,
        format!(
            "min STBC−single C1 {stbc:.3}; min proposed−SLNR C2 {slnr_mc:.2e} (mc) {slnr_cf:.2e} (cf); proposed−ZF at {} dBW {zf_low:.3}",
            low.user_power_dbw
        ),
    );
}

#[test]
fn criterion_09_structural_identities() {
    let gmax = 10f64.powf(5.2);
    let gain_err = rel(beam_gain(0.0, 0.2f64.to_radians(), gmax), gmax);

    let mut rng = RngStream::new(909, 0).rng();
    let mut f0 = 0.0f64;
    for m in 1..=10u32 {
        for _ in 0..20 {
            let p = ShadowedRicianParams {
                m,
                b: 0.01 + rng.random::<f64>(),
                omega: 0.01 + 3.0 * rng.random::<f64>(),
            };
            let s: f64 = p.cdf_coefficients().unwrap().iter().sum();
            f0 = f0.max((1.0 - s).abs()).max(scaled_sr_cdf(0.0, &p, 1.0).unwrap());
        }
    }

    let mut log_err = 0.0f64;
    let fading = presets().shadowed_rician("average").unwrap();
    let draw = SrDraw::new(&fading).unwrap();
    for _ in 0..100_000 {
        let phi_sig = 10f64.powf(rng.random_range(-2.0..4.0));
        let phi_y = 10f64.powf(rng.random_range(-2.0..3.0));
        let r2 = draw.draw(&mut rng).norm_sqr();
        let gamma = phi_sig * r2 / (phi_y * r2 + 1.0);
        let x = (phi_sig + phi_y) * r2;
        let y = phi_y * r2;
        let lhs = gamma.ln_1p();
        log_err = log_err.max((lhs - (x.ln_1p() - y.ln_1p())).abs() / lhs.max(1.0));
    }
    report(
        9,
        gain_err <= 1e-9 && f0 <= 1e-12 && log_err <= 1e-12,
        format!("beam-center gain {gain_err:.1e} (tol 1e-9); F(0) constants {f0:.1e} (tol 1e-12, m = 1..10); log identity {log_err:.1e} (tol 1e-12)"),
    );
}

#[test]
fn criterion_10_validation_suite_runtime() {
    let start = Instant::now();
    let r = validate_models(&ScenarioConfig::default_config(), SuiteSizes::default());
    let t = start.elapsed().as_secs_f64();
    for c in r.checks.iter().filter(|c| !c.passed) {
        println!("  {}", c.record());
    }
    report(
        10,
        r.passed() && t < 600.0,
        format!("{} checks, {} failed, {t:.1} s (limit 600 s)", r.checks.len(), r.failures()),
    );
}
