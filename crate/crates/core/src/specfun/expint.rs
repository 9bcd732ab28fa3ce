//! Exponential integrals and the scaled upper incomplete gamma function of
//! negative integer order.

use crate::error::{domain, Result};

const EULER: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// e^{y}·E₁(y) for y > 1 via the Lentz continued fraction.
fn e1_scaled_cf(y: f64) -> f64 {
    let mut b = y + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn e1_series(y: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..200 {
        fact *= -y / k as f64;
        let del = -fact / k as f64;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    -EULER - y.ln() + sum
}

/// E₁(y) = ∫₁^∞ e^{−yt}/t dt for y > 0.
pub fn expint_e1(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain("expint_e1", format!("argument must be positive, got {y}")));
    }
    Ok(if y <= 1.0 {
        e1_series(y)
    } else {
        e1_scaled_cf(y) * (-y).exp()
    })
}

/// e^{y}·E₁(y) for y > 0; finite for every representable y.
pub fn expint_e1_scaled(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain("expint_e1_scaled", format!("argument must be positive, got {y}")));
    }
    Ok(if y <= 1.0 {
        e1_series(y) * y.exp()
    } else {
        e1_scaled_cf(y)
    })
}

/// Ei(x) for negative x, where Ei(x) = −E₁(−x).
pub fn expint_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(domain("expint_ei", format!("only negative arguments are supported, got {x}")));
    }
    Ok(-expint_e1(-x)?)
}

/// H_q(z) = ∫₀^∞ e^{−zv} v^q / (1 + v) dv = q!·e^{z}·Γ(−q, z), z > 0.
///
/// Uses the Legendre continued fraction of Γ(a, z), which stays accurate in
/// the large-z regime where the finite Ei/factorial expansion cancels.
pub fn laplace_rational_moment(q: u32, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("laplace_rational_moment", format!("argument must be positive, got {z}")));
    }
    let a = -(q as f64);
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut converged = false;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(crate::error::Error::Convergence {
            func: "laplace_rational_moment",
            msg: format!("continued fraction stalled at q={q}, z={z}"),
        });
    }
    // e^{z}Γ(a,z) = z^{a}·h
    let fact: f64 = (1..=q).map(|k| k as f64).product();
    Ok(fact * z.powf(a) * h)
}
