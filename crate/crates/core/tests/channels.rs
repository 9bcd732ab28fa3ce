use hts_capacity::channels::*;
use hts_capacity::quadrature::{integrate_to_inf, Tol};
use hts_capacity::rng::{MeanAcc, RngStream};
use hts_capacity::stats::{chi_square_gof, dkw_epsilon, ecdf_max_deviation, quantile};
use nalgebra::DMatrix;
use statrs::distribution::{Continuous, Gamma as GammaLaw};

fn presets() -> Presets {
    Presets::embedded()
}

fn malaga_norm(m: &Malaga) -> f64 {
    let scale = m.params.mean();
    integrate_to_inf(|x| m.pdf(x).unwrap(), 0.0, scale, Tol::rel(1e-10)).value
}

#[test]
fn malaga_pdf_integrates_to_one_for_every_preset() {
    for (name, p) in &presets().malaga {
        let m = Malaga::new(*p).unwrap();
        let n = malaga_norm(&m);
        assert!((n - 1.0).abs() < 1e-6, "{name}: {n}");
    }
}

#[test]
fn malaga_pdf_nonnegative_on_log_grid() {
    for p in presets().malaga.values() {
        let m = Malaga::new(*p).unwrap();
        for i in 0..1000 {
            let x = 10f64.powf(-6.0 + 8.0 * i as f64 / 999.0);
            let v = m.pdf(x).unwrap();
            assert!(v >= 0.0 && v.is_finite(), "x={x} v={v}");
        }
    }
}

#[test]
fn malaga_quadrature_mean_matches_closed_moment() {
    let m = Malaga::new(presets().malaga("strong").unwrap()).unwrap();
    let q = integrate_to_inf(|x| x * m.pdf(x).unwrap(), 0.0, 1.0, Tol::rel(1e-10)).value;
    assert!((q / m.moment(1.0) - 1.0).abs() < 1e-8);
}

#[test]
fn malaga_beta_one_matches_generative_double_integral() {
    // ρ₀ = 0 and β = 1: I = X·Y, X ~ Gamma(α, 1/α), Y ~ Exp(mean g₀ + Ω₀).
    let p = MalagaParams {
        alpha: 3.1,
        beta: 1,
        b0: 0.2,
        rho0: 0.0,
        omega0: 0.4,
        phi_a: 0.0,
        phi_b: 0.0,
    };
    let m = Malaga::new(p).unwrap();
    let gx = GammaLaw::new(p.alpha, p.alpha).unwrap();
    let mu = p.g0() + p.omega0;
    for &x in &[0.05, 0.3, 0.6, 1.2, 3.0] {
        let oracle = integrate_to_inf(
            |y| gx.pdf(x / y) / y * (-y / mu).exp() / mu,
            0.0,
            mu,
            Tol::rel(1e-11),
        )
        .value;
        let v = m.pdf(x).unwrap();
        assert!((v / oracle - 1.0).abs() < 1e-7, "x={x}: {v} vs {oracle}");
    }
}

#[test]
fn malaga_sampler_mean_within_three_se() {
    for (i, p) in presets().malaga.values().enumerate() {
        let m = Malaga::new(*p).unwrap();
        let xs = malaga_sample(RngStream::new(11, i as u64), p, 1_000_000).unwrap();
        let mut acc = MeanAcc::default();
        xs.iter().for_each(|&x| acc.push(x));
        let z = (acc.mean() - m.moment(1.0)) / acc.std_err();
        assert!(z.abs() < 3.0, "z = {z}");
    }
}

#[test]
fn malaga_sampler_passes_chi_square() {
    for (i, (name, p)) in presets().malaga.iter().enumerate() {
        let m = Malaga::new(*p).unwrap();
        let xs = malaga_sample(RngStream::new(2024, i as u64), p, 100_000).unwrap();
        let r = chi_square_gof(&xs, |x| m.cdf(x).unwrap(), 50);
        assert!(r.p_value > 0.01, "{name}: {r:?}");
    }
}

#[test]
fn malaga_sampler_deterministic() {
    let p = presets().malaga("moderate").unwrap();
    let a = malaga_sample(RngStream::new(5, 9), &p, 64).unwrap();
    let b = malaga_sample(RngStream::new(5, 9), &p, 64).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sr_pdf_integrates_to_one_for_every_preset() {
    for (name, p) in &presets().shadowed_rician {
        let scale = p.mean_power().sqrt();
        let n = integrate_to_inf(|x| sr_pdf(x, p).unwrap(), 0.0, scale, Tol::rel(1e-10)).value;
        assert!((n - 1.0).abs() < 1e-6, "{name}: {n}");
    }
}

#[test]
fn sr_pdf_is_derivative_of_cdf() {
    // d/dx P(|ρ| ≤ x) = 2x · F'(x²) with φ = 1
    let p = presets().shadowed_rician("average").unwrap();
    for &x in &[0.2, 0.5, 0.9, 1.4] {
        let h = 1e-5;
        let fd = (scaled_sr_cdf((x + h) * (x + h), &p, 1.0).unwrap()
            - scaled_sr_cdf((x - h) * (x - h), &p, 1.0).unwrap())
            / (2.0 * h);
        let v = sr_pdf(x, &p).unwrap();
        assert!((fd - v).abs() < 1e-5, "x={x}: {fd} vs {v}");
    }
}

#[test]
fn sr_sampler_passes_chi_square_and_second_moment() {
    for (i, (name, p)) in presets().shadowed_rician.iter().enumerate() {
        let xs = sr_sample(RngStream::new(77, i as u64), p, 100_000).unwrap();
        let r = chi_square_gof(&xs, |x| scaled_sr_cdf(x * x, p, 1.0).unwrap(), 50);
        assert!(r.p_value > 0.01, "{name}: {r:?}");

        let q = integrate_to_inf(
            |x| x * x * sr_pdf(x, p).unwrap(),
            0.0,
            p.mean_power().sqrt(),
            Tol::rel(1e-10),
        )
        .value;
        let mut acc = MeanAcc::default();
        xs.iter().for_each(|&x| acc.push(x * x));
        assert!(((acc.mean() - q) / acc.std_err()).abs() < 3.0, "{name}");
        assert!((q / p.mean_power() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn sr_sampler_deterministic() {
    let p = presets().shadowed_rician("light").unwrap();
    assert_eq!(
        sr_sample(RngStream::new(1, 2), &p, 32).unwrap(),
        sr_sample(RngStream::new(1, 2), &p, 32).unwrap()
    );
}

#[test]
fn scaled_cdf_tail_and_monotonicity() {
    for p in presets().shadowed_rician.values() {
        let phi = 3.7;
        let mean = phi * p.mean_power();
        assert!((1.0 - scaled_sr_cdf(200.0 * mean, p, phi).unwrap()).abs() < 1e-8);
        let mut last = 0.0;
        for i in 0..2000 {
            let x = mean * 20.0 * i as f64 / 1999.0;
            let f = scaled_sr_cdf(x, p, phi).unwrap();
            assert!(f >= last - 1e-15, "non-monotone at {x}");
            last = f;
        }
    }
}

#[test]
fn scaled_cdf_within_dkw_band_of_empirical() {
    let n = 100_000;
    let eps = dkw_epsilon(n, 0.01);
    for (i, p) in presets().shadowed_rician.values().enumerate() {
        let phi = 2.5;
        let mut xs: Vec<f64> = sr_sample(RngStream::new(404, i as u64), p, n)
            .unwrap()
            .into_iter()
            .map(|r| phi * r * r)
            .collect();
        xs.sort_by(f64::total_cmp);
        let probes: Vec<f64> = (1..=20).map(|q| quantile(&xs, q as f64 / 21.0)).collect();
        let dev = ecdf_max_deviation(&xs, |x| scaled_sr_cdf(x, p, phi).unwrap(), &probes);
        assert!(dev < eps, "dev={dev} eps={eps}");
    }
}

#[test]
fn beam_gain_half_power_and_monotone_main_lobe() {
    let phi3 = 0.2f64.to_radians();
    let g = beam_gain(phi3, phi3, 1.0);
    assert!((g - 0.5).abs() < 2e-3, "g(φ3dB) = {g}");
    let mut last = f64::INFINITY;
    for i in 0..=4000 {
        let phi = phi3 * i as f64 / 4000.0;
        let v = beam_gain(phi, phi3, 1.0);
        assert!(v <= last + 1e-15);
        last = v;
    }
    assert!((beam_gain(0.0, phi3, 12.5) - 12.5).abs() < 1e-9);
}

fn two_beam_geometry(d: f64) -> BeamGeometry {
    BeamGeometry {
        phi: DMatrix::from_row_slice(1, 2, &[0.0005, 0.003]),
        phi3db: 0.2f64.to_radians(),
        gmax: 1.6e5,
        d: vec![d],
        fc: 20e9,
        gr: 1.5e4,
    }
}

#[test]
fn steering_vector_formulae() {
    let g = BeamGeometry {
        phi: DMatrix::from_row_slice(1, 1, &[0.001]),
        ..two_beam_geometry(3.6e7)
    };
    let a = steering_vector(&g, 0);
    let want = g.gr.sqrt() * g.path_amplitude(0) * beam_gain(0.001, g.phi3db, g.gmax).sqrt();
    assert!((a[0] / want - 1.0).abs() < 1e-15);

    let near = steering_vector(&two_beam_geometry(3.6e7), 0);
    let far = steering_vector(&two_beam_geometry(7.2e7), 0);
    for n in 0..2 {
        assert!((far[n] / near[n] - 0.5).abs() < 1e-15);
    }
}

#[test]
fn channel_draws_align_with_steering_vector() {
    // E[h] vanishes under a uniform LoS phase; each draw is a complex
    // multiple of a(φ_k), so the per-draw cosine similarity is one.
    let g = two_beam_geometry(3.6e7);
    let p = presets().shadowed_rician("average").unwrap();
    let fading = SrDraw::new(&p).unwrap();
    let a = steering_vector(&g, 0);
    let mut rng = RngStream::new(3, 0).rng();
    for _ in 0..100 {
        let h = build_channel(&mut rng, &g, &fading, 0);
        let dot: f64 = h.iter().zip(a.iter()).map(|(h, a)| h.conj() * *a).sum::<num_complex::Complex64>().norm();
        let cos = dot / (h.norm() * a.norm());
        assert!((cos - 1.0).abs() < 1e-10);
    }
}

#[test]
fn channel_power_matches_ensemble() {
    let g = two_beam_geometry(3.6e7);
    let p = presets().shadowed_rician("heavy").unwrap();
    let fading = SrDraw::new(&p).unwrap();
    let mut rng = RngStream::new(8, 1).rng();
    let mut acc = [MeanAcc::default(), MeanAcc::default()];
    for _ in 0..100_000 {
        let h = build_channel(&mut rng, &g, &fading, 0);
        for n in 0..2 {
            acc[n].push(h[n].norm_sqr());
        }
    }
    for n in 0..2 {
        let gain = beam_gain(g.phi[(0, n)], g.phi3db, g.gmax);
        let want = g.gr * gain * g.path_amplitude(0).powi(2) * p.mean_power();
        assert!(((acc[n].mean() - want) / acc[n].std_err()).abs() < 3.0);
    }
}

#[test]
fn channel_deterministic_amplitude_in_zero_scatter_limit() {
    // b → 0 removes the diffuse part; m → ∞ pins the LoS amplitude at √Ω.
    let g = two_beam_geometry(3.6e7);
    let p = ShadowedRicianParams { m: 1_000_000, b: 1e-30, omega: 0.7 };
    let fading = SrDraw::new(&p).unwrap();
    let mut rng = RngStream::new(4, 4).rng();
    for _ in 0..20 {
        let h = build_channel(&mut rng, &g, &fading, 0);
        for n in 0..2 {
            let gain = beam_gain(g.phi[(0, n)], g.phi3db, g.gmax);
            let want = g.gr.sqrt() * p.omega.sqrt() * gain.sqrt() * g.path_amplitude(0);
            assert!((h[n].norm() / want - 1.0).abs() < 1e-2);
        }
    }
}
