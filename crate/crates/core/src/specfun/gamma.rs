//! Gamma-function helpers shared by the Bessel and contour evaluators.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-ish complex log-gamma (Lanczos, g = 7).
///
/// The imaginary part is only defined modulo 2π, which is all the
/// exponentiated contour integrands need.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Taylor coefficients of 1/Γ(z) about zero: 1/Γ(z) = Σ_{k≥1} C[k−1] z^k.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary gamma quantities for |mu| ≤ 1/2:
/// `(gam1, gam2, 1/Γ(1+mu), 1/Γ(1−mu))` with
/// gam1 = (1/Γ(1−mu) − 1/Γ(1+mu)) / (2mu) and
/// gam2 = (1/Γ(1−mu) + 1/Γ(1+mu)) / 2.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+z) = Σ_k RGAMMA[k] z^k
    let mu2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in (0..RGAMMA.len()).rev() {
        if k % 2 == 0 {
            even = even * mu2 + RGAMMA[k];
        } else {
            odd = odd * mu2 + RGAMMA[k];
        }
    }
    // even(mu) = Σ RGAMMA[2i] mu^{2i}; odd(mu) = Σ RGAMMA[2i+1] mu^{2i}
    let gam1 = -odd;
    let gam2 = even;
    let gampl = gam2 + mu * odd;
    let gammi = gam2 - mu * odd;
    (gam1, gam2, gampl, gammi)
}

/// Natural log of the real gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
