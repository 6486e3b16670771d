//! Random and deterministic graph ensembles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Restart budget for the pairing model.
pub const DEFAULT_REGULAR_RESTARTS: usize = 10_000;

/// A graph family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ensemble {
    ErdosRenyi { n: usize, q: f64 },
    RandomRegular { n: usize, d: usize },
    Sbm { sizes: Vec<usize>, probs: Vec<Vec<f64>> },
    Graphon { grid: Vec<Vec<f64>>, n: usize },
    Star { n: usize },
    StarsPlusCliques { r: usize, a: usize, b: usize },
    StarPlusMatching { a: usize, b: usize },
}

/// An ensemble together with the seed used to draw from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(ensemble: Ensemble, seed: u64) -> Self {
        EnsembleSpec { ensemble, seed }
    }

    pub fn generate(&self) -> Result<Graph> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match &self.ensemble {
            Ensemble::ErdosRenyi { n, q } => erdos_renyi(*n, *q, &mut rng),
            Ensemble::RandomRegular { n, d } => {
                random_regular(*n, *d, DEFAULT_REGULAR_RESTARTS, &mut rng)
            }
            Ensemble::Sbm { sizes, probs } => sbm(sizes, probs, &mut rng),
            Ensemble::Graphon { grid, n } => graphon_sample(grid, *n, &mut rng),
            Ensemble::Star { n } => star(*n),
            Ensemble::StarsPlusCliques { r, a, b } => stars_plus_cliques(*r, *a, *b),
            Ensemble::StarPlusMatching { a, b } => star_plus_matching(*a, *b),
        }
    }

    /// Soft warnings about parameter regimes; never an error.
    pub fn guidance(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ensemble::StarsPlusCliques { r, a, b } = self.ensemble {
            let (r, a, b) = (r as f64, a as f64, b as f64);
            if a <= r + b.powf(1.5) {
                out.push(format!("a = {a} is not large against r + b^1.5 = {}", r + b.powf(1.5)));
            }
            if a >= b * b {
                out.push(format!("a = {a} is not small against b^2 = {}", b * b));
            }
        }
        out
    }
}

fn check_prob(q: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("{what} = {q} is not in [0, 1]")));
    }
    Ok(())
}

/// Number of failures before the next success in Bernoulli(`q`) trials.
fn geometric_skip<R: Rng>(q: f64, rng: &mut R) -> u64 {
    if q >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let s = (u.ln() / (1.0 - q).ln()).floor();
    if s >= u64::MAX as f64 { u64::MAX } else { s as u64 }
}

/// Visits the indices in `0..total` kept by independent Bernoulli(`q`) trials.
fn bernoulli_indices<R: Rng, F: FnMut(u64)>(total: u64, q: f64, rng: &mut R, mut f: F) {
    if q <= 0.0 {
        return;
    }
    let mut k: u64 = 0;
    loop {
        k = k.saturating_add(geometric_skip(q, rng));
        if k >= total {
            return;
        }
        f(k);
        k += 1;
    }
}

/// Position pair `(i, j)`, `i < j`, of the `k`-th pair in row-major order over
/// `s` items.
fn unrank_pair(k: u64, s: u64) -> (u64, u64) {
    // Row i holds s - 1 - i pairs; solve for i by the quadratic bound, then fix.
    let sf = s as f64;
    let mut i = ((2.0 * sf - 1.0 - ((2.0 * sf - 1.0).powi(2) - 8.0 * k as f64).max(0.0).sqrt()) / 2.0)
        .floor() as u64;
    let start = |i: u64| i * (2 * s - i - 1) / 2;
    while i > 0 && start(i) > k {
        i -= 1;
    }
    while start(i + 1) <= k {
        i += 1;
    }
    (i, i + 1 + (k - start(i)))
}

fn build(n: usize, mut pairs: Vec<(u32, u32)>) -> Graph {
    pairs.sort_unstable();
    pairs.dedup();
    Graph::from_sorted_pairs(n, &pairs)
}

/// Adds edges among `members` (within) or between `members` and `others`.
fn block_pairs<R: Rng>(members: &[u32], others: Option<&[u32]>, q: f64, rng: &mut R, out: &mut Vec<(u32, u32)>) {
    let push = |out: &mut Vec<(u32, u32)>, a: u32, b: u32| out.push((a.min(b), a.max(b)));
    match others {
        None => {
            let s = members.len() as u64;
            bernoulli_indices(s * s.saturating_sub(1) / 2, q, rng, |k| {
                let (i, j) = unrank_pair(k, s);
                push(out, members[i as usize], members[j as usize]);
            });
        }
        Some(others) => {
            let t = others.len() as u64;
            bernoulli_indices(members.len() as u64 * t, q, rng, |k| {
                push(out, members[(k / t) as usize], others[(k % t) as usize]);
            });
        }
    }
}

pub fn erdos_renyi<R: Rng>(n: usize, q: f64, rng: &mut R) -> Result<Graph> {
    if n < 1 {
        return Err(Error::domain("erdos_renyi needs n >= 1"));
    }
    check_prob(q, "q")?;
    let all: Vec<u32> = (0..n as u32).collect();
    let mut pairs = Vec::new();
    block_pairs(&all, None, q, rng, &mut pairs);
    Ok(build(n, pairs))
}

/// Uniform `d`-regular graph via the pairing model, restarting from scratch
/// whenever a loop or multi-edge appears.
pub fn random_regular<R: Rng>(n: usize, d: usize, restarts: usize, rng: &mut R) -> Result<Graph> {
    if d < 1 || d >= n {
        return Err(Error::domain(format!("need 1 <= d <= n - 1, got n = {n}, d = {d}")));
    }
    if n * d % 2 == 1 {
        return Err(Error::domain(format!("n * d = {} is odd", n * d)));
    }
    let mut points: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..restarts {
        points.shuffle(rng);
        let mut pairs: Vec<(u32, u32)> = points
            .chunks_exact(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        if pairs.iter().any(|&(a, b)| a == b) {
            continue;
        }
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0] == w[1] {
                continue 'attempt;
            }
        }
        return Ok(Graph::from_sorted_pairs(n, &pairs));
    }
    Err(Error::Resource(format!(
        "pairing model failed {restarts} times for n = {n}, d = {d}; try a smaller d"
    )))
}

fn check_symmetric(m: &[Vec<f64>], k: usize, what: &str) -> Result<()> {
    if m.len() != k || m.iter().any(|row| row.len() != k) {
        return Err(Error::validation(format!("{what} must be {k} x {k}")));
    }
    for i in 0..k {
        for j in 0..k {
            check_prob(m[i][j], what)?;
            if m[i][j] != m[j][i] {
                return Err(Error::validation(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn blocks_to_graph<R: Rng>(n: usize, blocks: &[Vec<u32>], probs: &[Vec<f64>], rng: &mut R) -> Graph {
    let mut pairs = Vec::new();
    for i in 0..blocks.len() {
        block_pairs(&blocks[i], None, probs[i][i], rng, &mut pairs);
        for j in i + 1..blocks.len() {
            block_pairs(&blocks[i], Some(&blocks[j]), probs[i][j], rng, &mut pairs);
        }
    }
    build(n, pairs)
}

/// Stochastic block model with contiguous blocks of the given sizes.
pub fn sbm<R: Rng>(sizes: &[usize], probs: &[Vec<f64>], rng: &mut R) -> Result<Graph> {
    if sizes.is_empty() {
        return Err(Error::domain("sbm needs at least one block"));
    }
    check_symmetric(probs, sizes.len(), "probs")?;
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut next = 0u32;
    for &s in sizes {
        blocks.push((next..next + s as u32).collect::<Vec<_>>());
        next += s as u32;
    }
    Ok(blocks_to_graph(next as usize, &blocks, probs, rng))
}

/// W-random graph for a piecewise-constant graphon on a `k x k` grid: each
/// vertex draws a uniform position, and pairs connect with the grid value of
/// the cells their positions fall in.
pub fn graphon_sample<R: Rng>(grid: &[Vec<f64>], n: usize, rng: &mut R) -> Result<Graph> {
    let k = grid.len();
    if k == 0 {
        return Err(Error::validation("graphon grid is empty"));
    }
    check_symmetric(grid, k, "graphon grid")?;
    let mut blocks = vec![Vec::new(); k];
    for v in 0..n as u32 {
        let x: f64 = rng.random();
        blocks[((x * k as f64) as usize).min(k - 1)].push(v);
    }
    Ok(blocks_to_graph(n, &blocks, grid, rng))
}

/// `K_{1,n}` with center 0.
pub fn star(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::domain("star needs n >= 1"));
    }
    Ok(build(n + 1, (1..=n as u32).map(|v| (0, v)).collect()))
}

fn push_star(pairs: &mut Vec<(u32, u32)>, center: u32, leaves: usize) {
    pairs.extend((1..=leaves as u32).map(|i| (center, center + i)));
}

fn push_clique(pairs: &mut Vec<(u32, u32)>, first: u32, size: usize) {
    for i in 0..size as u32 {
        for j in i + 1..size as u32 {
            pairs.push((first + i, first + j));
        }
    }
}

/// `r` disjoint `a`-stars and `r` disjoint `b`-cliques.
pub fn stars_plus_cliques(r: usize, a: usize, b: usize) -> Result<Graph> {
    if r < 1 || a < 1 || b < 1 {
        return Err(Error::domain("stars_plus_cliques needs positive r, a, b"));
    }
    let unit = a + 1 + b;
    let mut pairs = Vec::with_capacity(r * (a + b * (b - 1) / 2));
    for i in 0..r {
        let base = (i * unit) as u32;
        push_star(&mut pairs, base, a);
        push_clique(&mut pairs, base + a as u32 + 1, b);
    }
    Ok(build(r * unit, pairs))
}

/// An `a`-star (center 0) next to a perfect matching on `2b` vertices.
pub fn star_plus_matching(a: usize, b: usize) -> Result<Graph> {
    if a < 1 {
        return Err(Error::domain("star_plus_matching needs a >= 1"));
    }
    let mut pairs = Vec::with_capacity(a + b);
    push_star(&mut pairs, 0, a);
    let base = a as u32 + 1;
    pairs.extend((0..b as u32).map(|i| (base + 2 * i, base + 2 * i + 1)));
    Ok(build(a + 1 + 2 * b, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn er_extremes() {
        assert_eq!(erdos_renyi(10, 0.0, &mut rng(1)).unwrap().m(), 0);
        assert_eq!(erdos_renyi(10, 1.0, &mut rng(1)).unwrap().m(), 45);
        assert!(erdos_renyi(10, 1.5, &mut rng(1)).is_err());
    }

    #[test]
    fn er_edge_count_is_binomial() {
        let pairs = 1000.0 * 999.0 / 2.0;
        let sd = (pairs * 0.25f64).sqrt();
        for seed in 0..5 {
            let m = erdos_renyi(1000, 0.5, &mut rng(seed)).unwrap().m() as f64;
            assert!((m - pairs * 0.5).abs() < 6.0 * sd);
        }
    }

    #[test]
    fn er_pairs_are_uniform() {
        // every pair should appear roughly q * reps times
        let n = 8;
        let mut hits = vec![0usize; n * n];
        for seed in 0..4000 {
            let g = erdos_renyi(n, 0.3, &mut rng(seed)).unwrap();
            for (u, v) in g.edges() {
                hits[u * n + v] += 1;
            }
        }
        let sd = (4000.0 * 0.3 * 0.7f64).sqrt();
        for u in 0..n {
            for v in u + 1..n {
                assert!((hits[u * n + v] as f64 - 1200.0).abs() < 5.0 * sd, "{u} {v}");
            }
        }
    }

    #[test]
    fn unrank_covers_all_pairs() {
        for s in 2..40u64 {
            let mut k = 0;
            for i in 0..s {
                for j in i + 1..s {
                    assert_eq!(unrank_pair(k, s), (i, j));
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn regular_graphs() {
        let g = random_regular(4, 3, 10_000, &mut rng(3)).unwrap();
        assert_eq!(g.m(), 6);
        let g = random_regular(6, 2, 10_000, &mut rng(3)).unwrap();
        assert!(g.degree_sequence().iter().all(|&d| d == 2));
        let g = random_regular(100, 3, 10_000, &mut rng(3)).unwrap();
        assert!(g.degree_sequence().iter().all(|&d| d == 3));
        assert!(matches!(random_regular(5, 3, 10, &mut rng(3)), Err(Error::Domain(_))));
        assert!(matches!(random_regular(40, 30, 2, &mut rng(3)), Err(Error::Resource(_))));
    }

    #[test]
    fn sbm_and_graphon() {
        let g = sbm(&[5, 5], &[vec![0.0, 0.0], vec![0.0, 0.0]], &mut rng(1)).unwrap();
        assert_eq!((g.n(), g.m()), (10, 0));
        let g = sbm(&[4, 3], &[vec![1.0, 0.0], vec![0.0, 1.0]], &mut rng(1)).unwrap();
        assert_eq!(g.m(), 6 + 3);
        assert!(g.has_edge(4, 6) && !g.has_edge(3, 4));
        assert!(sbm(&[2, 2], &[vec![0.1, 0.2], vec![0.3, 0.1]], &mut rng(1)).is_err());
        assert!(matches!(
            graphon_sample(&[vec![0.1, 0.2], vec![0.3, 0.1]], 10, &mut rng(1)),
            Err(Error::Validation(_))
        ));
        let g = graphon_sample(&[vec![1.0]], 12, &mut rng(1)).unwrap();
        assert_eq!(g.m(), 66);
    }

    #[test]
    fn graphon_edge_density() {
        let grid = vec![vec![0.8, 0.1], vec![0.1, 0.4]];
        let g = graphon_sample(&grid, 2000, &mut rng(7)).unwrap();
        let density = g.m() as f64 / (2000.0 * 1999.0 / 2.0);
        // integral of W over the unit square
        assert!((density - 0.35).abs() < 0.02, "{density}");
    }

    #[test]
    fn deterministic_constructions() {
        assert_eq!(star(4).unwrap().degree_sequence(), vec![4, 1, 1, 1, 1]);
        let g = stars_plus_cliques(2, 3, 3).unwrap();
        assert_eq!((g.n(), g.m()), (14, 12));
        let g = star_plus_matching(3, 2).unwrap();
        assert_eq!((g.n(), g.m()), (8, 5));
    }

    #[test]
    fn spec_round_trip_and_determinism() {
        let spec = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 50, q: 0.2 }, 9);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"kind":"erdos_renyi","n":50,"q":0.2,"seed":9}"#);
        let back: EnsembleSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.generate().unwrap(), back.generate().unwrap());
        let warn = EnsembleSpec::new(Ensemble::StarsPlusCliques { r: 50, a: 500, b: 100 }, 0);
        assert_eq!(warn.guidance().len(), 1);
    }
}
