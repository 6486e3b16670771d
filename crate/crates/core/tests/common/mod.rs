//! Brute-force oracles over tiny graphs: copies from raw injective maps and
//! expectations from all `2^n` sampling masks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use motif_ht::generators::{erdos_renyi, star};
use motif_ht::{Graph, Motif};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MOTIFS: [&str; 5] = ["edge", "wedge", "triangle", "path4", "cycle4"];

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges.iter().copied()).unwrap()
}

fn cycle_edges(vs: &[usize]) -> Vec<(usize, usize)> {
    (0..vs.len()).map(|i| (vs[i], vs[(i + 1) % vs.len()])).collect()
}

pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v));
        }
    }
    graph(n, &e)
}

fn grid(r: usize, c: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..r {
        for j in 0..c {
            let v = i * c + j;
            if j + 1 < c {
                e.push((v, v + 1));
            }
            if i + 1 < r {
                e.push((v, v + c));
            }
        }
    }
    graph(r * c, &e)
}

fn er(n: usize, q: f64, seed: u64) -> Graph {
    erdos_renyi(n, q, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Named graphs on at most 12 vertices.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = Vec::new();
    let mut add = |name: &str, g: Graph| out.push((name.to_string(), g));
    add("path6", graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]));
    add("cycle7", graph(7, &cycle_edges(&[0, 1, 2, 3, 4, 5, 6])));
    add("star6", star(6).unwrap());
    add("k4", complete(4));
    add("k5", complete(5));
    add("diamond", graph(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]));
    add("bowtie", graph(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]));
    let mut wheel = cycle_edges(&[1, 2, 3, 4, 5, 6]);
    wheel.extend((1..=6).map(|v| (0, v)));
    add("wheel7", graph(7, &wheel));
    add("grid3x3", grid(3, 3));
    add("ladder2x5", grid(2, 5));
    let mut petersen = cycle_edges(&[0, 1, 2, 3, 4]);
    petersen.extend(cycle_edges(&[5, 7, 9, 6, 8]));
    petersen.extend((0..5).map(|i| (i, i + 5)));
    add("petersen", graph(10, &petersen));
    let mut k33 = Vec::new();
    for u in 0..3 {
        for v in 3..6 {
            k33.push((u, v));
        }
    }
    add("k3_3", graph(6, &k33));
    let cube: Vec<(usize, usize)> = (0..8usize)
        .flat_map(|u| (0..3).map(move |b| (u, u ^ (1 << b))))
        .filter(|&(u, v)| u < v)
        .collect();
    add("cube", graph(8, &cube));
    add("friendship3", graph(7, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4), (0, 5), (0, 6), (5, 6)]));
    add(
        "triangle_plus_star",
        graph(8, &[(0, 1), (1, 2), (0, 2), (3, 4), (3, 5), (3, 6), (3, 7)]),
    );
    add(
        "k4_with_tail",
        graph(7, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6)]),
    );
    add(
        "tree12",
        graph(12, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6), (3, 7), (4, 8), (5, 9), (6, 10), (6, 11)]),
    );
    add("er10_030", er(10, 0.3, 1));
    add("er11_025", er(11, 0.25, 2));
    add("er12_020", er(12, 0.2, 3));
    add("er12_030", er(12, 0.3, 4));
    add("er9_045", er(9, 0.45, 5));
    add("empty5", Graph::empty(5));
    out
}

/// A copy found by brute force: its sorted vertex list and sorted edge list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawCopy {
    pub vertices: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

/// All copies of `motif` in `g`: distinct images of edge sets over every
/// injective vertex map that preserves motif edges.
pub fn brute_copies(g: &Graph, motif: &Motif) -> (Vec<RawCopy>, usize) {
    let h = motif.order();
    let n = g.n();
    let mut set = BTreeSet::new();
    let mut maps = 0usize;
    let mut phi = vec![0usize; h];
    let mut used = vec![false; n];
    fn rec(
        i: usize,
        g: &Graph,
        motif: &Motif,
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        set: &mut BTreeSet<RawCopy>,
        maps: &mut usize,
    ) {
        let h = motif.order();
        if i == h {
            *maps += 1;
            let mut edges: Vec<(u32, u32)> = motif
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (phi[a as usize] as u32, phi[b as usize] as u32);
                    (x.min(y), x.max(y))
                })
                .collect();
            edges.sort_unstable();
            let mut vertices: Vec<u32> = phi.iter().map(|&v| v as u32).collect();
            vertices.sort_unstable();
            set.insert(RawCopy { vertices, edges });
            return;
        }
        for v in 0..g.n() {
            if used[v] {
                continue;
            }
            let ok = (0..i).all(|j| !motif.adjacent(i, j) || g.has_edge(phi[j], v));
            if ok {
                used[v] = true;
                phi[i] = v;
                rec(i + 1, g, motif, phi, used, set, maps);
                used[v] = false;
            }
        }
    }
    let _ = n;
    rec(0, g, motif, &mut phi, &mut used, &mut set, &mut maps);
    (set.into_iter().collect(), maps)
}

pub fn vertex_mask(c: &RawCopy) -> u32 {
    c.vertices.iter().fold(0, |m, &v| m | 1 << v)
}

/// Probability of the sampling mask `bits` on `n` vertices.
pub fn mask_prob(bits: u32, n: usize, p: f64) -> f64 {
    let k = bits.count_ones() as i32;
    p.powi(k) * (1.0 - p).powi(n as i32 - k)
}

pub fn indicators(bits: u32, n: usize) -> Vec<bool> {
    (0..n).map(|v| bits >> v & 1 == 1).collect()
}

/// Observed copy count under `bits`.
pub fn brute_t(masks: &[u32], bits: u32) -> u64 {
    masks.iter().filter(|&&m| m & !bits == 0).count() as u64
}

/// `E[T]`, `Var[T]` and `E[(T − E T)⁴]` over all masks.
pub fn brute_central_moments(masks: &[u32], n: usize, p: f64) -> (f64, f64, f64) {
    let mut ts = Vec::with_capacity(1 << n);
    for bits in 0..1u32 << n {
        ts.push((mask_prob(bits, n, p), brute_t(masks, bits) as f64));
    }
    let mean: f64 = ts.iter().map(|(w, t)| w * t).sum();
    let var: f64 = ts.iter().map(|(w, t)| w * (t - mean).powi(2)).sum();
    let m4: f64 = ts.iter().map(|(w, t)| w * (t - mean).powi(4)).sum();
    (mean, var, m4)
}

fn connected4(m: [u32; 4]) -> bool {
    let mut reached = 1u32;
    for _ in 0..4 {
        for i in 0..4 {
            if reached >> i & 1 == 1 {
                for j in 0..4 {
                    if m[i] & m[j] != 0 {
                        reached |= 1 << j;
                    }
                }
            }
        }
    }
    reached == 0b1111
}

/// `E[Π |X_i − p^h|]` for four copies by splitting their union into atoms of
/// vertices with equal membership and enumerating which atoms are fully
/// sampled.
fn abs_product(m: [u32; 4], p: f64, q: f64, memo: &mut HashMap<[i32; 16], f64>) -> f64 {
    let mut sizes = [0i32; 16];
    let mut rest = m[0] | m[1] | m[2] | m[3];
    while rest != 0 {
        let v = rest.trailing_zeros();
        rest &= rest - 1;
        let sig = (0..4).fold(0usize, |s, i| s | ((m[i] >> v & 1) as usize) << i);
        sizes[sig] += 1;
    }
    if let Some(&v) = memo.get(&sizes) {
        return v;
    }
    let atoms: Vec<(u32, i32)> = (1..16).filter(|&s| sizes[s] > 0).map(|s| (s as u32, sizes[s])).collect();
    let mut acc = 0.0;
    for pattern in 0u32..1 << atoms.len() {
        let mut w = 1.0;
        let mut missing = 0u32;
        for (a, &(sig, size)) in atoms.iter().enumerate() {
            if pattern >> a & 1 == 1 {
                w *= p.powi(size);
            } else {
                w *= 1.0 - p.powi(size);
                missing |= sig;
            }
        }
        for i in 0..4 {
            w *= if missing >> i & 1 == 1 { q } else { 1.0 - q };
        }
        acc += w;
    }
    memo.insert(sizes, acc);
    acc
}

/// `E[W]` by brute force over ordered connected quadruples of copies.
pub fn brute_expected_w(masks: &[u32], h: usize, aut: usize, p: f64) -> f64 {
    let q = p.powi(h as i32);
    let c = masks.len();
    let mut memo = HashMap::new();
    let mut acc = 0.0;
    for a in 0..c {
        for b in 0..c {
            for d in 0..c {
                for e in 0..c {
                    let m = [masks[a], masks[b], masks[d], masks[e]];
                    if connected4(m) {
                        acc += abs_product(m, p, q, &mut memo);
                    }
                }
            }
        }
    }
    acc / (aut as f64).powi(4)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
