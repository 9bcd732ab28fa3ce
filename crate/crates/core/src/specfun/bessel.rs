//! Bessel functions: first kind of integer order, second modified kind of
//! real order.

use super::gamma::temme_gammas;
use crate::error::{domain, Result};
use std::f64::consts::PI;

/// First-kind Bessel function J_n(x) for integer order.
///
/// Miller's backward recurrence, normalized with J₀ + 2ΣJ_{2k} = 1.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("bessel_j", format!("non-finite argument {x}")));
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let ax = x.abs();
    let top = (n as f64).max(ax);
    let mut m = (top + 30.0 + 10.0 * top.cbrt()) as usize;
    m += m % 2;

    const BIG: f64 = 1e250;
    let mut jp = 0.0; // J_{k+1}
    let mut j = 1e-300; // J_k
    let mut sum = 0.0;
    let mut ans = 0.0;
    let two_over_x = 2.0 / ax;
    for k in (1..=m).rev() {
        let jm = k as f64 * two_over_x * j - jp;
        jp = j;
        j = jm;
        // j now holds J_{k-1}
        if j.abs() > BIG {
            j /= BIG;
            jp /= BIG;
            ans /= BIG;
            sum /= BIG;
        }
        let idx = k - 1;
        if idx == n as usize {
            ans = j;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * j;
        }
    }
    sum += j;
    let mut v = ans / sum;
    if x < 0.0 && n % 2 == 1 {
        v = -v;
    }
    Ok(v)
}

/// Exponentially scaled modified Bessel function e^x·K_ν(x), x > 0.
///
/// Temme's series for x < 2, Steed's continued fraction otherwise, then
/// forward recurrence in the order.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("bessel_k", format!("argument must be positive, got {x}")));
    }
    if !nu.is_finite() {
        return Err(domain("bessel_k", format!("non-finite order {nu}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    const EPS: f64 = 1e-16;

    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= dd / i;
            p /= i - mu;
            q /= i + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if del.abs() < sum.abs() * EPS || i > 500.0 {
                break;
            }
            i += 1.0;
        }
        let ex = x.exp();
        k_mu = sum * ex;
        k_mu1 = sum1 * xi2 * ex;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2.0;
        loop {
            a -= 2.0 * (i - 1.0);
            c = -a * c / i;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS || i > 10_000.0 {
                break;
            }
            i += 1.0;
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() / s;
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu)
}

/// Modified Bessel function of the second kind K_ν(x), x > 0.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}
