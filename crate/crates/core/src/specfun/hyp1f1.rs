//! Kummer's confluent hypergeometric function ₁F₁(a; b; x).

use crate::error::{domain, Result};
use crate::specfun::gamma::ln_gamma;

fn nonpositive_integer(v: f64) -> Option<u64> {
    (v <= 0.0 && v.fract() == 0.0).then(|| (-v) as u64)
}

/// Terminating series for a = −n.
fn polynomial(n: u64, a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let k = k as f64;
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        sum += term;
    }
    sum
}

/// Direct series, intended for x ≥ 0 with a, b > 0 where all terms share a sign.
fn series(a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        sum += term;
        k += 1.0;
        if term.abs() <= 1e-17 * sum.abs() && k > x {
            break;
        }
        if k > 20_000.0 + 4.0 * x {
            break;
        }
    }
    sum
}

/// e^{−x}·₁F₁(a; b; x) for large positive x (leading asymptotic series).
fn scaled_asymptotic(a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..60 {
        let k = k as f64;
        let next = term * (b - a + k) * (1.0 - a + k) / ((k + 1.0) * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    let ln_pref = ln_gamma(b) - ln_gamma(a) + (a - b) * x.ln();
    sum * ln_pref.exp()
}

/// Exponentially scaled e^{−x}·₁F₁(a; b; x), for x ≥ 0.
///
/// When b − a is a non-positive integer (the integer-m shadowed-Rician
/// case) Kummer's transformation e^{x}·₁F₁(b−a; b; −x) gives a finite
/// positive polynomial, so the scaled value is exact and never overflows.
pub fn hyp1f1_scaled(a: f64, b: f64, x: f64) -> Result<f64> {
    if nonpositive_integer(b).is_some() {
        return Err(domain("hyp1f1", format!("b = {b} is a non-positive integer")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(domain("hyp1f1_scaled", format!("argument must be finite and ≥ 0, got {x}")));
    }
    if let Some(n) = nonpositive_integer(b - a) {
        return Ok(polynomial(n, b - a, b, -x));
    }
    if let Some(n) = nonpositive_integer(a) {
        return Ok(polynomial(n, a, b, x) * (-x).exp());
    }
    if x > 600.0 && a > 0.0 {
        return Ok(scaled_asymptotic(a, b, x));
    }
    Ok(series(a, b, x) * (-x).exp())
}

/// ₁F₁(a; b; x).
pub fn hyp1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if nonpositive_integer(b).is_some() {
        return Err(domain("hyp1f1", format!("b = {b} is a non-positive integer")));
    }
    if !x.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(domain("hyp1f1", "non-finite argument"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if let Some(n) = nonpositive_integer(a) {
        return Ok(polynomial(n, a, b, x));
    }
    if x < 0.0 {
        // Kummer: M(a,b,x) = e^x M(b−a,b,−x)
        return hyp1f1_scaled(b - a, b, -x);
    }
    if let Some(n) = nonpositive_integer(b - a) {
        return Ok(polynomial(n, b - a, b, -x) * x.exp());
    }
    if x > 600.0 && a > 0.0 {
        return Ok(scaled_asymptotic(a, b, x) * x.exp());
    }
    Ok(series(a, b, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero_is_one() {
        for m in 1..=20 {
            assert_eq!(hyp1f1(m as f64, 1.0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn a_equals_b_is_exponential() {
        for &x in &[-3.0, 0.1, 1.0, 7.5, 40.0] {
            let v = hyp1f1(1.0, 1.0, x).unwrap();
            assert!((v / x.exp() - 1.0).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_b() {
        assert!(hyp1f1(1.0, 0.0, 1.0).is_err());
        assert!(hyp1f1(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn scaled_matches_unscaled() {
        for &(a, b, x) in &[(2.0, 1.0, 3.0), (2.5, 1.5, 12.0), (0.3, 2.0, 1.0), (7.0, 1.0, 50.0)] {
            let s = hyp1f1_scaled(a, b, x).unwrap();
            let u = hyp1f1(a, b, x).unwrap();
            assert!((s * x.exp() / u - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn large_argument_asymptotic_joins_series() {
        let a = 2.5;
        let b = 1.5;
        let lo = scaled_asymptotic(a, b, 600.0);
        let hi = series(a, b, 600.0) * (-600f64).exp();
        assert!((lo / hi - 1.0).abs() < 1e-12);
    }
}
