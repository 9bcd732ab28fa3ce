//! The three Meijer G-functions the capacity expressions need.
//!
//! * G²⁰₀₂ reduces exactly to a K-Bessel function.
//! * G¹⁴₄₁ and G⁰²₂₁ are evaluated by numerical Mellin–Barnes integration
//!   along a vertical line `Re s = c`.
//!
//! Contour placement for G¹⁴₄₁: the integrand Γ(b − s)·Π Γ(1 − aᵢ + s)·xˢ
//! has right poles at s = b, b+1, … and left poles at s = aᵢ − 1 − k. The
//! line sits inside the strip (maxᵢ aᵢ − 1, b). For large x it is pulled
//! toward the left edge to limit cancellation against xᶜ; for tiny x it is
//! moved right across the first K right poles and their residues are added
//! back explicitly. Coincident left poles (integer α) need no special
//! treatment because the contour never crosses them.

use super::bessel::bessel_k_scaled;
use super::gamma::{ln_gamma, ln_gamma_complex};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_breaks, Tol};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Lower-row parameters of G²⁰₀₂[x | −; a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerParams2002 {
    pub a: f64,
    pub b: f64,
}

/// Parameters of G¹⁴₄₁[x | a₁..a₄; b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerParams1441 {
    pub upper: [f64; 4],
    pub lower: f64,
}

impl MeijerParams1441 {
    /// Row layout used by the Málaga MGF: ((2−α)/2, (1−α)/2, (2−j)/2, (1−j)/2; b).
    pub fn malaga(alpha: f64, j: u32, lower: f64) -> Self {
        let j = j as f64;
        Self {
            upper: [
                (2.0 - alpha) / 2.0,
                (1.0 - alpha) / 2.0,
                (2.0 - j) / 2.0,
                (1.0 - j) / 2.0,
            ],
            lower,
        }
    }
}

/// G²⁰₀₂[x | −; a, b] = 2·x^{(a+b)/2}·K_{a−b}(2√x).
pub fn meijer_g_2002(x: f64, p: MeijerParams2002) -> Result<f64> {
    Ok(ln_meijer_g_2002(x, p)?.exp())
}

/// Natural log of G²⁰₀₂, usable where the value itself would underflow.
pub fn ln_meijer_g_2002(x: f64, p: MeijerParams2002) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("meijer_g_2002", format!("argument must be positive, got {x}")));
    }
    let z = 2.0 * x.sqrt();
    let ks = bessel_k_scaled(p.a - p.b, z)?;
    Ok(std::f64::consts::LN_2 + 0.5 * (p.a + p.b) * x.ln() + ks.ln() - z)
}

/// Result of a contour integration, with the diagnostics needed to judge it.
#[derive(Debug, Clone, Copy)]
pub struct Contour {
    pub value: f64,
    pub error: f64,
    /// Abscissa of the integration line.
    pub c: f64,
    /// Peak modulus of the integrand on the line.
    pub peak: f64,
}

/// (1/2πi)∫ exp(kernel(s)) ds over the line Re s = c, for kernels with
/// conjugate symmetry (real parameters and real argument).
///
/// `freq` is the oscillation rate in t of the integrand (typically |ln x|),
/// used to seed the subdivision.
pub fn mellin_barnes<K: Fn(Complex64) -> Complex64>(kernel: K, c: f64, freq: f64) -> Result<Contour> {
    let lk = |t: f64| kernel(Complex64::new(c, t));
    let mut peak_ln = lk(0.0).re;
    let mut t_max = 0.0;
    let step = 0.25;
    let mut t = 0.0;
    loop {
        t += step;
        let v = lk(t).re;
        if v > peak_ln {
            peak_ln = v;
        }
        if v < peak_ln - 46.0 && t > 1.0 {
            t_max = t;
            break;
        }
        if t > 4000.0 {
            break;
        }
    }
    if t_max == 0.0 {
        return Err(Error::Convergence {
            func: "mellin_barnes",
            msg: format!("integrand does not decay along Re s = {c}"),
        });
    }
    let peak = peak_ln.exp();
    let mut f = |t: f64| (lk(t).exp()).re / PI;
    let panel = if freq > 1e-3 { (2.0 * PI / freq).max(0.05) } else { t_max };
    let n_panels = ((t_max / panel).ceil() as usize).clamp(4, 2000);
    let breaks: Vec<f64> = (0..=n_panels).map(|i| t_max * i as f64 / n_panels as f64).collect();
    let tol = Tol {
        abs: 1e-16 * peak * t_max,
        rel: 1e-13,
        max_intervals: 20_000,
    };
    let q = integrate_breaks(&mut f, &breaks, tol);
    Ok(Contour {
        value: q.value,
        error: q.error,
        c,
        peak,
    })
}

/// Contour-integral G¹⁴₄₁ evaluation with diagnostics.
pub fn meijer_g_1441_contour(x: f64, p: MeijerParams1441) -> Result<Contour> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("meijer_g_1441", format!("argument must be positive, got {x}")));
    }
    let left = p.upper.iter().fold(f64::NEG_INFINITY, |m, &a| m.max(a - 1.0));
    let right = p.lower;
    if !(left < right) {
        return Err(domain(
            "meijer_g_1441",
            format!("no separating strip: left poles reach {left}, right poles start at {right}"),
        ));
    }
    let lnx = x.ln();
    let kernel = |s: Complex64| {
        let mut acc = ln_gamma_complex(p.lower - s) + s * lnx;
        for &a in &p.upper {
            acc += ln_gamma_complex(1.0 - a + s);
        }
        acc
    };

    // number of right poles moved to the left of the line
    let shift = if x < 1e-2 {
        ((-x.log10()) / 2.0).ceil().clamp(1.0, 6.0) as u32
    } else {
        0
    };
    let c = if shift > 0 {
        right + shift as f64 - 0.5
    } else {
        let w = if x <= 100.0 {
            0.5
        } else {
            (0.5 - 0.05 * (x / 100.0).log10()).max(0.15)
        };
        left + w * (right - left)
    };

    let mut residues = 0.0;
    for k in 0..shift {
        let k = k as f64;
        let s = right + k;
        let mut ln_term = s * lnx - ln_gamma(k + 1.0);
        for &a in &p.upper {
            ln_term += ln_gamma(1.0 - a + s);
        }
        let sign = if (k as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
        residues += sign * ln_term.exp();
    }

    let mut out = mellin_barnes(kernel, c, lnx.abs())?;
    out.value += residues;
    let budget = 1e-9 * out.value.abs() + 1e-15 * out.peak;
    if !out.value.is_finite() || out.error > budget.max(1e-300) {
        return Err(Error::Convergence {
            func: "meijer_g_1441",
            msg: format!(
                "x={x:e} c={:.4} value={:e} error={:e} peak={:e} params={:?}",
                out.c, out.value, out.error, out.peak, p
            ),
        });
    }
    Ok(out)
}

/// G¹⁴₄₁[x | a₁..a₄; b].
pub fn meijer_g_1441(x: f64, p: MeijerParams1441) -> Result<f64> {
    Ok(meijer_g_1441_contour(x, p)?.value)
}

/// Contour evaluation of G⁰²₂₁[z | 1, 1; 0] = (1/2πi)∫ Γ(u)/u · zᵘ du, c > 0.
///
/// The line is placed near the saddle of Γ(c)zᶜ/c, which sits at c ≈ 1/z
/// for small z.
pub fn meijer_g_0221_contour(z: f64) -> Result<Contour> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("meijer_g_0221", format!("argument must be positive, got {z}")));
    }
    let lnz = z.ln();
    let kernel = |u: Complex64| ln_gamma_complex(u) - u.ln() + u * lnz;
    let c = (1.0 / z).clamp(0.5, 200.0);
    mellin_barnes(kernel, c, lnz.abs())
}

/// φ(s) = −G⁰²₂₁[1/s | 1, 1; 0], the node function of the MGF capacity
/// quadrature. The G-function reduces to E₁(s), so φ(s) = Ei(−s).
pub fn phi_node(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain("phi_node", format!("argument must be positive, got {s}")));
    }
    super::expint::expint_ei(-s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g2002_half_order_closed_form() {
        // a = 1/2, b = 0: 2·x^{1/4}·K_{1/2}(2√x) = √π·e^{−2√x}
        for &x in &[0.01, 0.3, 1.0, 4.0, 50.0] {
            let g = meijer_g_2002(x, MeijerParams2002 { a: 0.5, b: 0.0 }).unwrap();
            let want = PI.sqrt() * (-2.0 * x.sqrt()).exp();
            assert!((g / want - 1.0).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn g2002_symmetric() {
        let p = MeijerParams2002 { a: 2.296, b: 1.0 };
        let q = MeijerParams2002 { a: 1.0, b: 2.296 };
        assert_eq!(meijer_g_2002(0.7, p).unwrap(), meijer_g_2002(0.7, q).unwrap());
    }

    #[test]
    fn domain_errors() {
        let p = MeijerParams2002 { a: 1.0, b: 2.0 };
        assert!(meijer_g_2002(0.0, p).is_err());
        assert!(meijer_g_1441(-1.0, MeijerParams1441::malaga(2.0, 1, 0.0)).is_err());
        assert!(phi_node(0.0).is_err());
    }

    #[test]
    fn g1441_small_argument_limit() {
        // G → Π Γ(1 − aᵢ + b) as x → 0⁺
        let p = MeijerParams1441::malaga(2.296, 2, 0.0);
        let lim: f64 = p.upper.iter().map(|a| statrs::function::gamma::gamma(1.0 - a)).product();
        let g = meijer_g_1441(1e-12, p).unwrap();
        assert!((g / lim - 1.0).abs() < 1e-6);
    }

    #[test]
    fn g1441_continuous_across_placement_seams() {
        let p = MeijerParams1441::malaga(4.2, 3, 0.0);
        for &x in &[1e-2, 100.0] {
            let lo = meijer_g_1441(x * (1.0 - 1e-9), p).unwrap();
            let hi = meijer_g_1441(x * (1.0 + 1e-9), p).unwrap();
            assert!((lo / hi - 1.0).abs() < 1e-8, "seam at {x}: {lo} vs {hi}");
        }
    }
}
