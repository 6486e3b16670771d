//! Exact moments of the observed count: variance, the `β` comparison,
//! moments of centered sampling indicators over up to four copies, `E[W]`
//! and the fourth moment of `Z`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copies::CopyList;
use crate::error::{Error, Result};
use crate::estimator::{check_p, observed_count, replication_seed, SampleMask};

/// Default copy cap for quadruple sums.
pub const DEFAULT_QUAD_CAP: usize = 300;

/// `Var[T] = Σ_{k=1}^{h} p^{2h−k} (1−p)^k Σ_{|A|=k} t_H(A)²`.
///
/// Grouping ordered pairs of copies by the size `j` of their vertex overlap,
/// `Σ_{|A|=k} t(A)² = Σ_j C(j, k) P_j` where `P_j` counts pairs with overlap
/// `j`; inverting this and summing `P_j (p^{2h−j} − p^{2h})` collapses to the
/// form above.
pub fn exact_variance(copies: &CopyList, p: f64) -> f64 {
    let h = copies.order() as i32;
    copies
        .profile()
        .sums()
        .sum_sq
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let k = k as i32 + 1;
            p.powi(2 * h - k) * (1.0 - p).powi(k) * s as f64
        })
        .sum()
}

/// `Σ (p^{|V1 ∪ V2|} − p^{2h})` over ordered pairs of copies sharing a vertex.
pub fn exact_variance_pairs(copies: &CopyList, p: f64) -> f64 {
    let h = copies.order();
    let p2h = p.powi(2 * h as i32);
    let mut acc = 0.0;
    let mut partners: Vec<u32> = Vec::new();
    for i in 0..copies.len() {
        partners.clear();
        for &v in copies.vertices(i) {
            partners.extend_from_slice(copies.containing(v as usize));
        }
        partners.sort_unstable();
        partners.dedup();
        let vi = copies.vertices(i);
        for &j in &partners {
            let shared = copies.vertices(j as usize).iter().filter(|x| vi.binary_search(x).is_ok()).count();
            acc += p.powi((2 * h - shared) as i32) - p2h;
        }
    }
    acc
}

/// `β_H(p)` with the comparison `(1−p) β / (2^h − 1) ≤ Var[T] ≤ β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub var_t: f64,
    pub holds: bool,
}

pub fn beta_and_bounds(copies: &CopyList, p: f64) -> BetaBounds {
    let h = copies.order() as i32;
    let beta: f64 = copies
        .profile()
        .sums()
        .sum_sq
        .iter()
        .enumerate()
        .map(|(k, &s)| p.powi(2 * h - k as i32 - 1) * s as f64)
        .sum();
    let var_t = exact_variance(copies, p);
    let lower = (1.0 - p) * beta / ((1u64 << h) - 1) as f64;
    let tol = 1e-10 * beta.abs();
    BetaBounds { beta, lower, upper: beta, var_t, holds: lower <= var_t + tol && var_t <= beta + tol }
}

/// Vertex sets recoded as bitmasks over their (at most 64) distinct vertices.
fn local_masks(sets: &[&[u32]]) -> Vec<u64> {
    let mut verts: Vec<u32> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    verts.sort_unstable();
    verts.dedup();
    assert!(verts.len() <= 64, "at most 64 distinct vertices");
    sets.iter()
        .map(|s| s.iter().fold(0u64, |m, v| m | 1 << verts.binary_search(v).unwrap()))
        .collect()
}

/// `|∪_{i∈S} V_i|` for every sub-collection `S`.
fn union_sizes(masks: &[u64]) -> [i32; 16] {
    let mut unions = [0u64; 16];
    let mut sizes = [0i32; 16];
    for s in 1..1usize << masks.len() {
        let low = s.trailing_zeros() as usize;
        unions[s] = unions[s & (s - 1)] | masks[low];
        sizes[s] = unions[s].count_ones() as i32;
    }
    sizes
}

/// `P(all sets in S are fully sampled)` for every sub-collection `S`.
fn all_sampled(masks: &[u64], pw: &[f64; 65]) -> [f64; 16] {
    let sizes = union_sizes(masks);
    let mut g = [1.0; 16];
    for s in 1..1usize << masks.len() {
        g[s] = pw[sizes[s] as usize];
    }
    g
}

/// `p^k` for `k = 0..=64`.
fn powers(p: f64) -> [f64; 65] {
    let mut pw = [1.0; 65];
    for k in 1..65 {
        pw[k] = pw[k - 1] * p;
    }
    pw
}

fn signed_from_masks(masks: &[u64], pw: &[f64; 65]) -> f64 {
    let l = masks.len();
    let g = all_sampled(masks, pw);
    let q: Vec<f64> = masks.iter().map(|m| pw[m.count_ones() as usize]).collect();
    let mut acc = 0.0;
    for s in 0..1usize << l {
        let mut w = g[s];
        for (i, qi) in q.iter().enumerate() {
            if s >> i & 1 == 0 {
                w *= -qi;
            }
        }
        acc += w;
    }
    acc
}

fn abs_from_masks(masks: &[u64], pw: &[f64; 65]) -> f64 {
    let l = masks.len();
    let q: Vec<f64> = masks.iter().map(|m| pw[m.count_ones() as usize]).collect();
    // superset Möbius transform: P(exactly the sets in b are fully sampled)
    let mut exact = all_sampled(masks, pw);
    for i in 0..l {
        for b in 0..1usize << l {
            if b >> i & 1 == 0 {
                exact[b] -= exact[b | 1 << i];
            }
        }
    }
    let mut acc = 0.0;
    for (b, &prob) in exact.iter().enumerate().take(1 << l) {
        let mut w = prob;
        for (i, qi) in q.iter().enumerate() {
            w *= if b >> i & 1 == 1 { 1.0 - qi } else { *qi };
        }
        acc += w;
    }
    acc
}

fn check_sets(sets: &[&[u32]]) -> Result<()> {
    if sets.is_empty() || sets.len() > 4 {
        return Err(Error::domain(format!("need 1 to 4 vertex sets, got {}", sets.len())));
    }
    Ok(())
}

/// `E[Π_i (X_{V_i} − p^{|V_i|})]` by inclusion–exclusion over sub-collections.
pub fn signed_moment(sets: &[&[u32]], p: f64) -> Result<f64> {
    check_sets(sets)?;
    Ok(signed_from_masks(&local_masks(sets), &powers(p)))
}

/// `E[Π_i |X_{V_i} − p^{|V_i|}|]` by summing over the joint patterns of which
/// sets are fully sampled.
pub fn abs_moment(sets: &[&[u32]], p: f64) -> Result<f64> {
    check_sets(sets)?;
    Ok(abs_from_masks(&local_masks(sets), &powers(p)))
}

fn overlaps(a: u64, b: u64) -> bool {
    a & b != 0
}

/// Intersection graph on four sets is connected.
pub(crate) fn quad_connected(m: &[u64; 4]) -> bool {
    let mut reached = 1u32;
    loop {
        let mut next = reached;
        for i in 0..4 {
            if reached >> i & 1 == 1 {
                for j in 0..4 {
                    if overlaps(m[i], m[j]) {
                        next |= 1 << j;
                    }
                }
            }
        }
        if next == reached {
            return reached == 0b1111;
        }
        reached = next;
    }
}

/// Every set meets the union of the other three.
pub(crate) fn quad_weakly_connected(m: &[u64; 4]) -> bool {
    (0..4).all(|i| (0..4).any(|j| j != i && overlaps(m[i], m[j])))
}

/// Sums `f(masks)` over ordered quadruples of copies (with repetition)
/// accepted by `keep`, walking sorted multisets and weighting each by its
/// number of distinct orderings.
fn quad_sum(
    copies: &CopyList,
    cap: usize,
    keep: fn(&[u64; 4]) -> bool,
    f: impl Fn(&[u64; 4]) -> f64 + Sync,
) -> Result<f64> {
    let c = copies.len();
    if c > cap {
        return Err(Error::Resource(format!(
            "{c} copies exceed the exact-mode cap of {cap}; use Monte Carlo mode"
        )));
    }
    let direct = copies.graph_order() <= 64;
    let global: Vec<u64> = if direct {
        (0..c).map(|i| copies.vertices(i).iter().fold(0u64, |m, &v| m | 1 << v)).collect()
    } else {
        Vec::new()
    };
    let masks_of = |q: [usize; 4]| -> [u64; 4] {
        if direct {
            [global[q[0]], global[q[1]], global[q[2]], global[q[3]]]
        } else {
            let sets: Vec<&[u32]> = q.iter().map(|&i| copies.vertices(i)).collect();
            let m = local_masks(&sets);
            [m[0], m[1], m[2], m[3]]
        }
    };
    let words = c.div_ceil(64);
    let overlap_bits: Vec<Vec<u64>> = (0..c)
        .map(|i| {
            let vi = copies.vertices(i);
            let mut bits = vec![0u64; words];
            for j in 0..c {
                if copies.vertices(j).iter().any(|x| vi.binary_search(x).is_ok()) {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let per_first: Vec<f64> = (0..c)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in i..c {
                for k in j..c {
                    // the fourth copy must overlap at least one of the first three
                    for w in k / 64..words {
                        let mut cand = overlap_bits[i][w] | overlap_bits[j][w] | overlap_bits[k][w];
                        if w == k / 64 {
                            cand &= !0u64 << (k % 64);
                        }
                        while cand != 0 {
                            let l = w * 64 + cand.trailing_zeros() as usize;
                            cand &= cand - 1;
                            let m = masks_of([i, j, k, l]);
                            if keep(&m) {
                                acc += orderings([i, j, k, l]) * f(&m);
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(per_first.iter().sum())
}

fn orderings(q: [usize; 4]) -> f64 {
    let mut denom = 1.0;
    let mut run = 1.0;
    for w in 1..4 {
        if q[w] == q[w - 1] {
            run += 1.0;
            denom *= run;
        } else {
            run = 1.0;
        }
    }
    24.0 / denom
}

/// `E[W]`: the sum over ordered connected quadruples of copies of the
/// absolute moment of their centered indicators, divided by `|Aut(H)|⁴`.
pub fn expected_w(copies: &CopyList, p: f64, cap: usize) -> Result<f64> {
    let aut4 = (copies.automorphism_count() as f64).powi(4);
    let pw = powers(p);
    Ok(quad_sum(copies, cap, quad_connected, |m| abs_from_masks(m, &pw))? / aut4)
}

/// Exact `E[Z⁴]`: the sum over ordered weakly connected quadruples of the
/// signed moment, divided by `Var[T]²`.
pub fn fourth_moment_exact(copies: &CopyList, p: f64, cap: usize) -> Result<f64> {
    let var = exact_variance(copies, p);
    if !(var > 0.0) {
        return Err(Error::domain("Var[T] = 0; Z is undefined"));
    }
    let pw = powers(p);
    Ok(quad_sum(copies, cap, quad_weakly_connected, |m| signed_from_masks(m, &pw))? / (var * var))
}

/// Monte Carlo estimate of `E[Z⁴]` with its standard error.
pub fn fourth_moment_mc(copies: &CopyList, p: f64, reps: usize, seed: u64) -> Result<(f64, f64)> {
    check_p(p)?;
    let var = exact_variance(copies, p);
    if !(var > 0.0) {
        return Err(Error::domain("Var[T] = 0; Z is undefined"));
    }
    if reps < 2 {
        return Err(Error::domain("Monte Carlo mode needs at least 2 replications"));
    }
    let mean_t = p.powi(copies.order() as i32) * copies.len() as f64;
    let sigma = var.sqrt();
    let z4: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, r as u64));
            let mask = SampleMask::draw(copies.graph_order(), p, &mut rng)?;
            let z = (observed_count(copies, &mask) as f64 - mean_t) / sigma;
            Ok(z.powi(4))
        })
        .collect::<Result<_>>()?;
    let mean = z4.iter().sum::<f64>() / reps as f64;
    let sd = (z4.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    Ok((mean, sd / (reps as f64).sqrt()))
}

/// `√(E[W] / σ⁴)`, reported unscaled.
pub fn wass_bound_ratio(expected_w: f64, var_t: f64) -> Result<f64> {
    if !(var_t > 0.0) {
        return Err(Error::domain("Var[T] = 0; ratio undefined"));
    }
    Ok(expected_w.sqrt() / var_t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    pub copies: usize,
    pub var_t: f64,
    pub beta: f64,
    pub beta_lower: f64,
    pub beta_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wass_ratio: Option<f64>,
    pub fourth_moment: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourth_moment_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    pub mode: MomentMode,
}

pub fn moment_report(
    copies: &CopyList,
    p: f64,
    mode: MomentMode,
    reps: usize,
    seed: u64,
    cap: usize,
) -> Result<MomentReport> {
    check_p(p)?;
    let b = beta_and_bounds(copies, p);
    let mut report = MomentReport {
        p,
        copies: copies.len(),
        var_t: b.var_t,
        beta: b.beta,
        beta_lower: b.lower,
        beta_holds: b.holds,
        expected_w: None,
        wass_ratio: None,
        fourth_moment: f64::NAN,
        fourth_moment_se: None,
        reps: None,
        mode,
    };
    match mode {
        MomentMode::Exact => {
            let w = expected_w(copies, p, cap)?;
            report.expected_w = Some(w);
            report.wass_ratio = Some(wass_bound_ratio(w, b.var_t)?);
            report.fourth_moment = fourth_moment_exact(copies, p, cap)?;
        }
        MomentMode::MonteCarlo => {
            let (m, se) = fourth_moment_mc(copies, p, reps, seed)?;
            report.fourth_moment = m;
            report.fourth_moment_se = Some(se);
            report.reps = Some(reps);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copies::{enumerate_copies, DEFAULT_COPY_CAP};
    use crate::graph::tests::complete;
    use crate::graph::Graph;
    use crate::motif::Motif;
    use approx::assert_relative_eq;

    fn copies(g: &Graph, spec: &str) -> CopyList {
        enumerate_copies(g, &Motif::parse(spec).unwrap(), DEFAULT_COPY_CAP).unwrap()
    }

    #[test]
    fn single_copy_variance_and_beta() {
        let cl = copies(&complete(3), "triangle");
        let p: f64 = 0.2;
        let q = p.powi(3);
        assert_relative_eq!(exact_variance(&cl, p), q * (1.0 - q), max_relative = 1e-12);
        let b = beta_and_bounds(&cl, p);
        let expect: f64 = (1..=3).map(|k| [0.0, 3.0, 3.0, 1.0][k] * p.powi(6 - k as i32)).sum();
        assert_relative_eq!(b.beta, expect, max_relative = 1e-12);
        assert!(b.holds);
        let empty = copies(&Graph::empty(3), "triangle");
        let b = beta_and_bounds(&empty, p);
        assert_eq!((b.beta, b.var_t, b.holds), (0.0, 0.0, true));
    }

    #[test]
    fn disjoint_copies_add_variances() {
        let g = complete(3).disjoint_union(&complete(3));
        let cl = copies(&g, "triangle");
        let q = 0.3f64.powi(3);
        assert_relative_eq!(exact_variance(&cl, 0.3), 2.0 * q * (1.0 - q), max_relative = 1e-12);
    }

    #[test]
    fn variance_routes_agree() {
        let g = crate::generators::erdos_renyi(12, 0.4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for spec in ["edge", "wedge", "triangle", "path4", "cycle4"] {
            let cl = copies(&g, spec);
            for p in [0.05, 0.2, 0.5] {
                assert_relative_eq!(
                    exact_variance(&cl, p),
                    exact_variance_pairs(&cl, p),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn small_moments() {
        let a: &[u32] = &[0, 1, 2];
        let b: &[u32] = &[3, 4, 5];
        let p: f64 = 0.3;
        let q = p.powi(3);
        assert_relative_eq!(signed_moment(&[a], p).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(signed_moment(&[a, a], p).unwrap(), q * (1.0 - q), max_relative = 1e-12);
        assert_relative_eq!(signed_moment(&[a, b], p).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(abs_moment(&[a], p).unwrap(), 2.0 * q * (1.0 - q), max_relative = 1e-12);
        // identical sets, h = 2, p = 1/2: |X − 1/4|² is 9/16 w.p. 1/4, else 1/16
        let e: &[u32] = &[0, 1];
        assert_relative_eq!(abs_moment(&[e, e], 0.5).unwrap(), 0.25 * 9.0 / 16.0 + 0.75 / 16.0);
        assert!(signed_moment(&[], p).is_err());
        assert!(abs_moment(&[a, a, a, a, a], p).is_err());
    }

    #[test]
    fn quad_predicates() {
        let m = [0b0011, 0b0110, 0b1100, 0b1000_0000u64];
        assert!(!quad_connected(&m) && !quad_weakly_connected(&m));
        let m = [0b0011, 0b0010, 0b1100, 0b0100u64];
        assert!(!quad_connected(&m) && quad_weakly_connected(&m));
        let m = [0b0011, 0b0110, 0b1100, 0b1000u64];
        assert!(quad_connected(&m) && quad_weakly_connected(&m));
    }

    #[test]
    fn orderings_count() {
        assert_eq!(orderings([0, 1, 2, 3]), 24.0);
        assert_eq!(orderings([0, 0, 2, 3]), 12.0);
        assert_eq!(orderings([0, 0, 2, 2]), 6.0);
        assert_eq!(orderings([1, 1, 1, 2]), 4.0);
        assert_eq!(orderings([1, 1, 1, 1]), 1.0);
    }

    #[test]
    fn single_copy_quadruple_sums() {
        let cl = copies(&complete(3), "triangle");
        let p: f64 = 0.2;
        let q = p.powi(3);
        let v: &[u32] = &[0, 1, 2];
        let w = expected_w(&cl, p, DEFAULT_QUAD_CAP).unwrap();
        assert_relative_eq!(w, abs_moment(&[v, v, v, v], p).unwrap() / 1296.0, max_relative = 1e-12);
        let z4 = fourth_moment_exact(&cl, p, DEFAULT_QUAD_CAP).unwrap();
        assert_relative_eq!(z4, (1.0 - 3.0 * q + 3.0 * q * q) / (q * (1.0 - q)), max_relative = 1e-10);
        let ratio = wass_bound_ratio(w, exact_variance(&cl, p)).unwrap();
        assert_relative_eq!(ratio, (w / (q * (1.0 - q)).powi(2)).sqrt(), max_relative = 1e-12);
        assert!(wass_bound_ratio(w, 0.0).is_err());
    }

    #[test]
    fn disjoint_copies_w_has_two_terms() {
        let g = complete(3).disjoint_union(&complete(3));
        let cl = copies(&g, "triangle");
        let p = 0.2;
        let v: &[u32] = &[0, 1, 2];
        let single = abs_moment(&[v, v, v, v], p).unwrap() / 1296.0;
        assert_relative_eq!(expected_w(&cl, p, 300).unwrap(), 2.0 * single, max_relative = 1e-12);
    }

    #[test]
    fn cap_and_mc() {
        let cl = copies(&complete(8), "triangle");
        assert!(matches!(expected_w(&cl, 0.2, 10), Err(Error::Resource(_))));
        let cl = copies(&complete(4), "triangle");
        let exact = fourth_moment_exact(&cl, 0.2, 300).unwrap();
        let (mc, se) = fourth_moment_mc(&cl, 0.2, 200_000, 11).unwrap();
        assert!((mc - exact).abs() < 4.0 * se, "{mc} {exact} {se}");
    }
}
