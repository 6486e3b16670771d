//! Normal distribution helpers and distances between empirical samples and
//! reference laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile. Rational approximation (absolute error below
/// 1.2e-9) refined by one Halley step against [`normal_cdf`].
pub fn normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let low = 0.02425;
    let x = if u < low {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - low {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - u;
    let step = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - step / (1.0 + x * step / 2.0)
}

/// `z_{α/2}`, the upper `α/2` quantile of the standard normal.
pub fn z_half_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} is not in (0, 1)")));
    }
    Ok(normal_quantile(1.0 - alpha / 2.0))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `len - 1`).
pub fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Raw empirical moment `mean(x^k)`.
pub fn raw_moment(xs: &[f64], k: i32) -> f64 {
    xs.iter().map(|x| x.powi(k)).sum::<f64>() / xs.len() as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn ks_sorted(s: &[f64], mu: f64, sigma: f64) -> f64 {
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = normal_cdf((x - mu) / sigma);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and
/// `N(mu, sigma²)`.
pub fn ks_normal(xs: &[f64], mu: f64, sigma: f64) -> f64 {
    ks_sorted(&sorted(xs), mu, sigma)
}

pub fn ks_standard_normal(xs: &[f64]) -> f64 {
    ks_normal(xs, 0.0, 1.0)
}

/// Smallest KS distance from `xs` to any normal law: a grid search over
/// location and log-scale followed by pattern-search refinement.
pub fn ks_nearest_normal(xs: &[f64]) -> f64 {
    let s = sorted(xs);
    let m = mean(&s);
    let spread = sd(&s).max(1e-12);
    let f = |mu: f64, ls: f64| ks_sorted(&s, mu, ls.exp());
    let (mut best_mu, mut best_ls, mut best) = (m, spread.ln(), f64::INFINITY);
    for i in -20..=20 {
        for j in -30..=10 {
            let mu = m + spread * i as f64 / 10.0;
            let ls = spread.ln() + j as f64 / 5.0;
            let d = f(mu, ls);
            if d < best {
                (best_mu, best_ls, best) = (mu, ls, d);
            }
        }
    }
    let (mut step_mu, mut step_ls) = (spread / 10.0, 0.2);
    while step_ls > 1e-6 {
        let mut improved = false;
        for (dm, dl) in [(step_mu, 0.0), (-step_mu, 0.0), (0.0, step_ls), (0.0, -step_ls)] {
            let d = f(best_mu + dm, best_ls + dl);
            if d < best {
                (best_mu, best_ls, best) = (best_mu + dm, best_ls + dl, d);
                improved = true;
            }
        }
        if !improved {
            step_mu /= 2.0;
            step_ls /= 2.0;
        }
    }
    best
}

/// Wasserstein-1 distance to `N(0, 1)` through the quantile coupling of
/// order statistics.
pub fn wasserstein_standard_normal(xs: &[f64]) -> Result<f64> {
    if xs.len() < 100 {
        return Err(Error::domain(format!("need at least 100 samples, got {}", xs.len())));
    }
    let s = sorted(xs);
    let r = s.len() as f64;
    Ok(s.iter()
        .enumerate()
        .map(|(i, &x)| (x - normal_quantile((i as f64 + 0.5) / r)).abs())
        .sum::<f64>()
        / r)
}

/// Total variation distance between the empirical law of integer samples and
/// Poisson(`lambda`).
pub fn tv_poisson(ks: &[i64], lambda: f64) -> f64 {
    let n = ks.len() as f64;
    let max = ks.iter().copied().max().unwrap_or(0).max(0) as usize;
    let mut counts = vec![0usize; max + 1];
    let mut outside = 0usize;
    for &k in ks {
        if k < 0 {
            outside += 1;
        } else {
            counts[k as usize] += 1;
        }
    }
    let mut pmf = (-lambda).exp();
    let mut covered = 0.0;
    let mut tv = outside as f64 / n;
    for (k, &c) in counts.iter().enumerate() {
        if k > 0 {
            pmf *= lambda / k as f64;
        }
        covered += pmf;
        tv += (c as f64 / n - pmf).abs();
    }
    tv += (1.0 - covered).max(0.0);
    tv / 2.0
}

/// One histogram bin with its share of the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Equal-width histogram over the sample range; masses sum to 1.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<Bin> {
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| Bin {
            lo: lo + i as f64 * width,
            hi: lo + (i + 1) as f64 * width,
            mass: c as f64 / xs.len() as f64,
        })
        .collect()
}
