//! Goodness-of-fit statistics for sampler validation.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square test against a continuous CDF.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit with `bins` equiprobable bins.
///
/// Each sample is mapped through the analytic CDF and binned on [0, 1];
/// this is identical to binning on the analytic quantiles.
pub fn chi_square_gof<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F, bins: usize) -> ChiSquare {
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let u = cdf(x).clamp(0.0, 1.0);
        let i = ((u * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = bins - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

/// Dvoretzky–Kiefer–Wolfowitz half-width: the empirical CDF of `n` samples
/// lies within this distance of the true CDF with probability 1 − `alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Largest deviation between the empirical CDF of `sorted` and `cdf`
/// over the given probe points.
pub fn ecdf_max_deviation<F: FnMut(f64) -> f64>(sorted: &[f64], mut cdf: F, probes: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    probes
        .iter()
        .map(|&x| {
            let below = sorted.partition_point(|&v| v <= x) as f64;
            (below / n - cdf(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Empirical quantile (nearest rank) of an ascending sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[i]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_fits_uniform() {
        let xs: Vec<f64> = (0..5000).map(|i| (i as f64 + 0.5) / 5000.0).collect();
        let r = chi_square_gof(&xs, |x| x, 50);
        assert!(r.statistic < 1e-9);
        assert!(r.p_value > 0.999);
    }

    #[test]
    fn dkw_width() {
        assert!((dkw_epsilon(100_000, 0.01) - 0.005146).abs() < 1e-5);
    }
}
