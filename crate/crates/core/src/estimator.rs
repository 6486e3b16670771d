//! Vertex sampling, Horvitz-Thompson estimation, variance estimation and
//! truncation diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::copies::{CopyList, VertexSet};
use crate::error::{Error, Result};
use crate::stats::z_half_alpha;

/// Largest accepted sampling ratio.
pub const MAX_P: f64 = 1.0 - 1e-9;

/// Default `ε` grid for consistency diagnostics.
pub const EPSILON_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
/// Default `M` grid for truncated statistics.
pub const M_GRID: [f64; 5] = [1.0, 4.0, 16.0, 64.0, 256.0];

pub fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= MAX_P) {
        return Err(Error::domain(format!("sampling ratio p = {p} is not in (0, 1 - 1e-9]")));
    }
    Ok(())
}

/// Independent Bernoulli(`p`) vertex indicators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMask {
    pub sampled: Vec<bool>,
    /// Sampled vertices in increasing order.
    pub list: Vec<u32>,
    pub p_bits: u64,
    pub seed: Option<u64>,
}

impl SampleMask {
    /// Builds a mask from explicit indicators.
    pub fn from_indicators(sampled: Vec<bool>, p: f64) -> Result<SampleMask> {
        check_p(p)?;
        let list = (0..sampled.len() as u32).filter(|&v| sampled[v as usize]).collect();
        Ok(SampleMask { sampled, list, p_bits: p.to_bits(), seed: None })
    }

    /// Draws a mask with `rng`. Sampled vertices are located by geometric
    /// skipping, so the cost is proportional to `p n`.
    pub fn draw<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<SampleMask> {
        check_p(p)?;
        let mut sampled = vec![false; n];
        let mut list = Vec::with_capacity((p * n as f64 * 1.1) as usize + 8);
        let log_q = (1.0 - p).ln();
        let mut v: u64 = 0;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (n as u64 - v.min(n as u64)) as f64 {
                break;
            }
            v += skip as u64;
            sampled[v as usize] = true;
            list.push(v as u32);
            v += 1;
        }
        Ok(SampleMask { sampled, list, p_bits: p.to_bits(), seed: None })
    }

    pub fn p(&self) -> f64 {
        f64::from_bits(self.p_bits)
    }

    pub fn len(&self) -> usize {
        self.sampled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sampled.is_empty()
    }

    pub fn count(&self) -> usize {
        self.list.len()
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.sampled[v as usize]
    }
}

/// Seed of replication `rep` under `master`: a SplitMix64 mix of both, so
/// replications draw independent streams regardless of scheduling.
pub fn replication_seed(master: u64, rep: u64) -> u64 {
    let mut z = master ^ rep.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Samples every vertex independently with probability `p`, reproducibly
/// from `seed`.
pub fn sample_vertices(n: usize, p: f64, seed: u64) -> Result<SampleMask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = SampleMask::draw(n, p, &mut rng)?;
    mask.seed = Some(seed);
    Ok(mask)
}

/// Calls `f(i)` for every copy whose vertices are all sampled, in index order
/// within each smallest vertex.
pub fn for_each_observed<F: FnMut(usize)>(copies: &CopyList, mask: &SampleMask, mut f: F) {
    for &v in &mask.list {
        for i in copies.with_min(v as usize) {
            if copies.vertices(i)[1..].iter().all(|&x| mask.contains(x)) {
                f(i);
            }
        }
    }
}

/// `T(H, G)`: copies with all vertices sampled.
pub fn observed_count(copies: &CopyList, mask: &SampleMask) -> u64 {
    let mut t = 0;
    for_each_observed(copies, mask, |_| t += 1);
    t
}

/// `T / p^h`.
pub fn ht_estimate(t: u64, p: f64, h: usize) -> f64 {
    t as f64 / p.powi(h as i32)
}

/// Unbiased estimate of `Var[T]`: the sum over ordered pairs of copies that
/// share a vertex (each copy paired with itself included) of
/// `(X_{c1} − p^h)(X_{c2} − p^h)`.
///
/// Evaluated as `Σ_A (−1)^{|A|+1} (s(A) − p^h t(A))²` over non-empty vertex
/// sets `A`, where `s(A)` counts observed copies containing `A`; sets with
/// `s(A) = 0` are folded into one exact integer term, so the cost is linear
/// in the number of observed copies.
pub fn variance_estimate(copies: &CopyList, mask: &SampleMask) -> f64 {
    let h = copies.order();
    let q = mask.p().powi(h as i32);
    let d = copies.profile().sums().alternating_sq() as f64;
    let mut observed: FxHashMap<VertexSet, u64> = FxHashMap::default();
    let mut full: Vec<usize> = Vec::new();
    for_each_observed(copies, mask, |i| {
        full.push(i);
        let vs = copies.vertices(i);
        for bits in 1..(1u32 << h) - 1 {
            *observed.entry(VertexSet::select(vs, bits)).or_insert(0) += 1;
        }
    });
    let term = |a_len: usize, s: u64, t: u64| {
        let (s, t) = (s as f64, t as f64);
        let v = s * s - 2.0 * q * s * t;
        if a_len % 2 == 1 { v } else { -v }
    };
    let mut acc = q * q * d;
    for (set, &s) in &observed {
        acc += term(set.len(), s, copies.profile_count(set.as_slice()));
    }
    // sets of size h: observed copies sharing a vertex set are consecutive
    let mut k = 0;
    while k < full.len() {
        let vs = copies.vertices(full[k]);
        let mut j = k + 1;
        while j < full.len() && copies.vertices(full[j]) == vs {
            j += 1;
        }
        let t = copies.with_vertex_set(vs).len() as u64;
        acc += term(h, (j - k) as u64, t);
        k = j;
    }
    acc
}

/// The defining quadratic pair sum, for cross-checking on small instances.
pub fn variance_estimate_pairs(copies: &CopyList, mask: &SampleMask) -> f64 {
    let q = mask.p().powi(copies.order() as i32);
    let y = |i: usize| {
        let x = copies.vertices(i).iter().all(|&v| mask.contains(v));
        if x { 1.0 - q } else { -q }
    };
    let mut acc = 0.0;
    let mut partners: Vec<u32> = Vec::new();
    for i in 0..copies.len() {
        partners.clear();
        for &v in copies.vertices(i) {
            partners.extend_from_slice(copies.containing(v as usize));
        }
        partners.sort_unstable();
        partners.dedup();
        let yi = y(i);
        for &j in &partners {
            acc += yi * y(j as usize);
        }
    }
    acc
}

/// Horvitz-Thompson estimate with variance estimate and normal interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "N_hat")]
    pub n_hat: f64,
    pub sigma2_hat: f64,
    pub sigma_plus: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub alpha: f64,
    pub p: f64,
    pub h: usize,
    pub sampled_vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EstimateReport {
    /// Report with the estimate fields only; the interval is degenerate.
    pub fn from_count(t: u64, p: f64, h: usize) -> EstimateReport {
        let n_hat = ht_estimate(t, p, h);
        EstimateReport {
            t,
            n_hat,
            sigma2_hat: 0.0,
            sigma_plus: 0.0,
            ci_lo: n_hat,
            ci_hi: n_hat,
            alpha: f64::NAN,
            p,
            h,
            sampled_vertices: 0,
            seed: None,
        }
    }

    pub fn with_variance(mut self, sigma2_hat: f64, alpha: f64) -> Result<EstimateReport> {
        self.sigma2_hat = sigma2_hat;
        self.sigma_plus = sigma2_hat.max(0.0).sqrt();
        self.alpha = alpha;
        let (lo, hi) = confidence_interval(&self, alpha)?;
        self.ci_lo = lo;
        self.ci_hi = hi;
        Ok(self)
    }

    pub fn covers(&self, n: f64) -> bool {
        self.ci_lo <= n && n <= self.ci_hi
    }
}

/// `[N̂ − z σ̂₊ / p^h, N̂ + z σ̂₊ / p^h]` with `z = z_{α/2}`.
pub fn confidence_interval(report: &EstimateReport, alpha: f64) -> Result<(f64, f64)> {
    let z = z_half_alpha(alpha)?;
    let half = z * report.sigma_plus / report.p.powi(report.h as i32);
    Ok((report.n_hat - half, report.n_hat + half))
}

/// Full estimate for one sample.
pub fn estimate(copies: &CopyList, mask: &SampleMask, alpha: f64) -> Result<EstimateReport> {
    let p = mask.p();
    let t = observed_count(copies, mask);
    let mut r = EstimateReport::from_count(t, p, copies.order())
        .with_variance(variance_estimate(copies, mask), alpha)?;
    r.sampled_vertices = mask.count();
    r.seed = mask.seed;
    Ok(r)
}

/// A vertex set whose local count crosses a truncation threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSet {
    pub set: Vec<u32>,
    pub count: u64,
}

/// Truncation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Epsilon(f64),
    M(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub parameter: Truncation,
    pub kept_copies: usize,
    #[serde(rename = "T_trunc", skip_serializing_if = "Option::is_none")]
    pub t_trunc: Option<u64>,
    pub flagged_count: usize,
    pub flagged_sets: Vec<FlaggedSet>,
    /// `(1/N) Σ_A t(A) 1{A flagged}` for the `ε` form; for the `M` form the
    /// same sum over sets flagged by the `M` threshold.
    pub condition_value: f64,
    /// `(1/N²) Σ_A t(A)² / p^{|A|}`.
    pub variance_condition: f64,
}

fn require_copies(copies: &CopyList) -> Result<f64> {
    if copies.is_empty() {
        return Err(Error::domain("motif absent; estimand degenerate"));
    }
    Ok(copies.len() as f64)
}

/// `(1/N²) Σ_A t_H(A)² / p^{|A|}`.
pub fn variance_condition(copies: &CopyList, p: f64) -> f64 {
    let n = copies.len() as f64;
    let sums = copies.profile().sums();
    sums.sum_sq
        .iter()
        .enumerate()
        .map(|(k, &s)| s as f64 / p.powi(k as i32 + 1))
        .sum::<f64>()
        / (n * n)
}

/// Per-copy score: the largest `weight(|A|) · f(t_H(A))` over non-empty `A`
/// inside the copy. A copy survives a truncation at level `λ` iff its score
/// is at most `λ`.
fn copy_scores(copies: &CopyList, score: impl Fn(usize, u64) -> f64) -> Vec<f64> {
    let groups = copies.group_sizes();
    (0..copies.len())
        .map(|i| {
            let mut best: f64 = 0.0;
            copies.for_each_subset_count(i, groups[i] as u64, |bits, t| {
                best = best.max(score(bits.count_ones() as usize, t));
            });
            best
        })
        .collect()
}

/// `max_A t_H(A) / (p^{|A|} N)` per copy.
pub fn epsilon_scores(copies: &CopyList, p: f64) -> Vec<f64> {
    let n = copies.len() as f64;
    copy_scores(copies, |k, t| t as f64 / (p.powi(k as i32) * n))
}

/// `max_A t_H(A)² p^{2h − 2|A|} / Var[T]` per copy.
pub fn m_scores(copies: &CopyList, p: f64, var_t: f64) -> Vec<f64> {
    let h = copies.order() as i32;
    copy_scores(copies, |k, t| (t as f64).powi(2) * p.powi(2 * h - 2 * k as i32) / var_t)
}

/// Observed copies whose score is at most `level`.
pub fn truncated_count(copies: &CopyList, mask: &SampleMask, scores: &[f64], level: f64) -> u64 {
    let mut t = 0;
    for_each_observed(copies, mask, |i| {
        if scores[i] <= level {
            t += 1;
        }
    });
    t
}

fn diagnose(
    copies: &CopyList,
    p: f64,
    parameter: Truncation,
    flagged: impl Fn(usize, u64) -> bool,
    kept_copies: usize,
) -> Result<TruncationReport> {
    let n = require_copies(copies)?;
    let mut flagged_sets = Vec::new();
    let mut mass = 0u128;
    copies.for_each_local_count(|a, t| {
        if flagged(a.len(), t) {
            mass += t as u128;
            flagged_sets.push(FlaggedSet { set: a.to_vec(), count: t });
        }
    });
    Ok(TruncationReport {
        parameter,
        kept_copies,
        t_trunc: None,
        flagged_count: flagged_sets.len(),
        flagged_sets,
        condition_value: mass as f64 / n,
        variance_condition: variance_condition(copies, p),
    })
}

/// Consistency diagnostic at level `ε`: flags every `A` with
/// `t_H(A) > ε p^{|A|} N`.
pub fn consistency_diagnostic(copies: &CopyList, p: f64, epsilon: f64) -> Result<TruncationReport> {
    check_p(p)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} must be positive")));
    }
    let n = require_copies(copies)?;
    let kept = epsilon_scores(copies, p).iter().filter(|&&s| s <= epsilon).count();
    diagnose(
        copies,
        p,
        Truncation::Epsilon(epsilon),
        |k, t| t as f64 > epsilon * p.powi(k as i32) * n,
        kept,
    )
}

/// Truncation diagnostic at level `M`: flags every `A` with
/// `t_H(A)² > M p^{2|A| − 2h} Var[T]`.
pub fn m_diagnostic(copies: &CopyList, p: f64, m: f64, var_t: f64) -> Result<TruncationReport> {
    check_p(p)?;
    check_var(var_t)?;
    let h = copies.order() as i32;
    let kept = m_scores(copies, p, var_t).iter().filter(|&&s| s <= m).count();
    diagnose(
        copies,
        p,
        Truncation::M(m),
        |k, t| (t as f64).powi(2) > m * p.powi(2 * k as i32 - 2 * h) * var_t,
        kept,
    )
}

fn check_var(var_t: f64) -> Result<()> {
    if !(var_t > 0.0) {
        return Err(Error::domain(format!("Var[T] = {var_t} must be positive")));
    }
    Ok(())
}

/// `T⁺_ε`: observed copies containing no flagged set.
pub fn truncated_statistic_eps(copies: &CopyList, mask: &SampleMask, epsilon: f64) -> Result<u64> {
    if copies.is_empty() {
        return Ok(0);
    }
    let scores = epsilon_scores(copies, mask.p());
    Ok(truncated_count(copies, mask, &scores, epsilon))
}

/// `T°_M` together with its mean `p^h · #kept` and the kept-copy count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedM {
    pub m: f64,
    pub value: u64,
    pub kept_copies: usize,
    pub mean: f64,
}

impl TruncatedM {
    /// `Z°_M = (T°_M − E[T°_M]) / σ`.
    pub fn z(&self, sigma: f64) -> f64 {
        (self.value as f64 - self.mean) / sigma
    }
}

pub fn truncated_statistic_m(copies: &CopyList, mask: &SampleMask, m: f64, var_t: f64) -> Result<TruncatedM> {
    check_var(var_t)?;
    let p = mask.p();
    let scores = m_scores(copies, p, var_t);
    let kept = scores.iter().filter(|&&s| s <= m).count();
    Ok(TruncatedM {
        m,
        value: truncated_count(copies, mask, &scores, m),
        kept_copies: kept,
        mean: p.powi(copies.order() as i32) * kept as f64,
    })
}
