//! Small connected pattern graphs ("motifs").

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported motif order.
pub const MAX_MOTIF_ORDER: usize = 8;

/// Recognized shapes with dedicated counting routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotifKind {
    Edge,
    Wedge,
    Triangle,
    General,
}

/// A connected pattern graph `H` on vertices `0..h` together with its
/// automorphism group and balancedness coefficient.
#[derive(Clone, Debug)]
pub struct Motif {
    name: String,
    h: usize,
    edges: Vec<(u8, u8)>,
    adj: [u16; MAX_MOTIF_ORDER],
    automorphisms: Vec<[u8; MAX_MOTIF_ORDER]>,
    balancedness: Ratio<u32>,
}

impl PartialEq for Motif {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.edges == other.edges
    }
}

impl Motif {
    pub fn new(h: usize, edges: &[(usize, usize)]) -> Result<Motif> {
        Self::named(String::new(), h, edges)
    }

    fn named(name: String, h: usize, edges: &[(usize, usize)]) -> Result<Motif> {
        if h > MAX_MOTIF_ORDER {
            return Err(Error::domain(format!(
                "motif has {h} vertices; at most {MAX_MOTIF_ORDER} are supported"
            )));
        }
        if h < 2 {
            return Err(Error::validation("motif needs at least 2 vertices"));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= h || b >= h {
                return Err(Error::validation(format!("motif edge {a}-{b} out of range")));
            }
            if a == b {
                return Err(Error::validation(format!("motif self-loop at {a}")));
            }
            norm.push((a.min(b) as u8, a.max(b) as u8));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = [0u16; MAX_MOTIF_ORDER];
        for &(a, b) in &norm {
            adj[a as usize] |= 1 << b;
            adj[b as usize] |= 1 << a;
        }
        if !is_connected(h, &adj) {
            return Err(Error::validation("motif must be connected"));
        }
        let automorphisms = enumerate_automorphisms(h, &adj);
        let balancedness = max_density(h, &adj);
        let name = if name.is_empty() { format_edges(&norm) } else { name };
        Ok(Motif { name, h, edges: norm, adj, automorphisms, balancedness })
    }

    /// Resolves a motif given by preset name (`edge`, `wedge`, `triangle`,
    /// `path4`, `cycle4`, `clique4`, `star_<k>`) or an inline edge list such
    /// as `0-1,1-2,2-0`.
    pub fn parse(spec: &str) -> Result<Motif> {
        let s = spec.trim();
        let lower = s.to_ascii_lowercase();
        let preset = |name: &str, h: usize, edges: &[(usize, usize)]| {
            Self::named(name.to_string(), h, edges)
        };
        match lower.as_str() {
            "edge" | "k2" => return preset("edge", 2, &[(0, 1)]),
            "wedge" | "k12" | "2-star" => return preset("wedge", 3, &[(0, 1), (0, 2)]),
            "triangle" | "k3" => return preset("triangle", 3, &[(0, 1), (1, 2), (0, 2)]),
            "path4" | "p4" => return preset("path4", 4, &[(0, 1), (1, 2), (2, 3)]),
            "cycle4" | "c4" => return preset("cycle4", 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            "clique4" | "k4" => {
                return preset("clique4", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            }
            _ => {}
        }
        if let Some(k) = lower.strip_prefix("star_") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::validation(format!("bad star size in `{spec}`")))?;
            let edges: Vec<_> = (1..=k).map(|v| (0, v)).collect();
            return Self::named(format!("star_{k}"), k + 1, &edges);
        }
        let mut edges = Vec::new();
        let mut h = 0;
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = tok
                .split_once('-')
                .ok_or_else(|| Error::validation(format!("unknown motif `{spec}`")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::validation(format!("bad motif vertex `{x}` in `{spec}`")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            h = h.max(a + 1).max(b + 1);
            edges.push((a, b));
        }
        if edges.is_empty() {
            return Err(Error::validation(format!("unknown motif `{spec}`")));
        }
        Self::named(String::new(), h, &edges)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of vertices `|V(H)|`.
    pub fn order(&self) -> usize {
        self.h
    }

    pub fn edges(&self) -> &[(u8, u8)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    /// `|Aut(H)|`.
    pub fn automorphism_count(&self) -> usize {
        self.automorphisms.len()
    }

    pub fn automorphisms(&self) -> &[[u8; MAX_MOTIF_ORDER]] {
        &self.automorphisms
    }

    /// `m(H)`: the largest edge-to-vertex ratio over non-empty subgraphs.
    pub fn balancedness(&self) -> Ratio<u32> {
        self.balancedness
    }

    pub fn is_balanced(&self) -> bool {
        self.balancedness == Ratio::new(self.edges.len() as u32, self.h as u32)
    }

    pub fn kind(&self) -> MotifKind {
        match (self.h, self.edges.len()) {
            (2, 1) => MotifKind::Edge,
            (3, 2) => MotifKind::Wedge,
            (3, 3) => MotifKind::Triangle,
            _ => MotifKind::General,
        }
    }

    /// A matching order for backtracking: start from a maximum-degree vertex,
    /// then repeatedly take the unplaced vertex with the most already-placed
    /// neighbors (ties broken by degree, then index). Every vertex after the
    /// first has at least one earlier neighbor.
    pub fn matching_order(&self) -> Vec<usize> {
        let first = (0..self.h).max_by_key(|&v| (self.degree(v), std::cmp::Reverse(v))).unwrap();
        self.matching_order_from(first)
    }

    /// Greedy connected order starting at `first`.
    pub fn matching_order_from(&self, first: usize) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.h);
        let mut placed = 0u16;
        order.push(first);
        placed |= 1 << first;
        while order.len() < self.h {
            let next = (0..self.h)
                .filter(|&v| placed >> v & 1 == 0)
                .max_by_key(|&v| {
                    (
                        (self.adj[v] & placed).count_ones(),
                        self.degree(v),
                        std::cmp::Reverse(v),
                    )
                })
                .unwrap();
            order.push(next);
            placed |= 1 << next;
        }
        order
    }

    /// Ordering constraints `(a, b)`, read as `image(a) < image(b)`, that
    /// single out exactly one embedding from each orbit of `Aut(H)` acting on
    /// embeddings. Built from a stabilizer chain: fix the vertex with the
    /// largest orbit, require it to carry the smallest image within that
    /// orbit, and recurse into its stabilizer.
    pub fn symmetry_conditions(&self) -> Vec<(usize, usize)> {
        let mut group = self.automorphisms.clone();
        let mut conds = Vec::new();
        let mut fixed = 0u16;
        while group.len() > 1 {
            let (v, orbit) = (0..self.h)
                .filter(|&v| fixed >> v & 1 == 0)
                .map(|v| {
                    let mut orbit: u16 = 0;
                    for g in &group {
                        orbit |= 1 << g[v];
                    }
                    (v, orbit)
                })
                .max_by_key(|&(v, orbit)| (orbit.count_ones(), std::cmp::Reverse(v)))
                .unwrap();
            for w in 0..self.h {
                if w != v && orbit >> w & 1 == 1 {
                    conds.push((v, w));
                }
            }
            fixed |= 1 << v;
            group.retain(|g| g[v] as usize == v);
        }
        conds
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Serializable summary of a motif for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifInfo {
    pub name: String,
    pub order: usize,
    pub edges: Vec<[u8; 2]>,
    pub automorphisms: usize,
    /// `m(H)` as `[numerator, denominator]`.
    pub balancedness: [u32; 2],
}

impl From<&Motif> for MotifInfo {
    fn from(m: &Motif) -> Self {
        MotifInfo {
            name: m.name.clone(),
            order: m.h,
            edges: m.edges.iter().map(|&(a, b)| [a, b]).collect(),
            automorphisms: m.automorphism_count(),
            balancedness: [*m.balancedness.numer(), *m.balancedness.denom()],
        }
    }
}

fn format_edges(edges: &[(u8, u8)]) -> String {
    edges.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
}

fn is_connected(h: usize, adj: &[u16; MAX_MOTIF_ORDER]) -> bool {
    let mut seen: u16 = 1;
    let mut frontier: u16 = 1;
    while frontier != 0 {
        let mut next = 0;
        for v in 0..h {
            if frontier >> v & 1 == 1 {
                next |= adj[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen.count_ones() as usize == h
}

/// All permutations of `0..h` preserving adjacency, by exhaustive search.
fn enumerate_automorphisms(h: usize, adj: &[u16; MAX_MOTIF_ORDER]) -> Vec<[u8; MAX_MOTIF_ORDER]> {
    let mut perm: Vec<u8> = (0..h as u8).collect();
    let mut out = Vec::new();
    loop {
        let preserves = (0..h).all(|a| {
            let mut image = 0u16;
            for b in 0..h {
                if adj[a] >> b & 1 == 1 {
                    image |= 1 << perm[b];
                }
            }
            image == adj[perm[a] as usize]
        });
        if preserves {
            let mut p = [0u8; MAX_MOTIF_ORDER];
            p[..h].copy_from_slice(&perm);
            out.push(p);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn next_permutation(p: &mut [u8]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Maximum of `e(S) / |S|` over non-empty vertex subsets `S`; the densest
/// subgraph on a given vertex set is the induced one.
fn max_density(h: usize, adj: &[u16; MAX_MOTIF_ORDER]) -> Ratio<u32> {
    let mut best = Ratio::new(0u32, 1);
    for s in 1u16..(1 << h) {
        let mut twice_e = 0;
        for v in 0..h {
            if s >> v & 1 == 1 {
                twice_e += (adj[v] & s).count_ones();
            }
        }
        let r = Ratio::new(twice_e / 2, s.count_ones());
        if r > best {
            best = r;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u32, b: u32) -> Ratio<u32> {
        Ratio::new(a, b)
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(Motif::parse("edge").unwrap().automorphism_count(), 2);
        assert_eq!(Motif::parse("triangle").unwrap().automorphism_count(), 6);
        assert_eq!(Motif::parse("wedge").unwrap().automorphism_count(), 2);
        assert_eq!(Motif::parse("path4").unwrap().automorphism_count(), 2);
        assert_eq!(Motif::parse("cycle4").unwrap().automorphism_count(), 8);
        assert_eq!(Motif::parse("clique4").unwrap().automorphism_count(), 24);
        assert_eq!(Motif::parse("star_4").unwrap().automorphism_count(), 24);
    }

    #[test]
    fn automorphisms_divide_factorial() {
        for spec in ["edge", "wedge", "triangle", "path4", "cycle4", "clique4", "star_5", "0-1,1-2,2-0,2-3"] {
            let m = Motif::parse(spec).unwrap();
            let fact: usize = (1..=m.order()).product();
            assert_eq!(fact % m.automorphism_count(), 0, "{spec}");
        }
    }

    #[test]
    fn balancedness_values() {
        assert_eq!(Motif::parse("edge").unwrap().balancedness(), r(1, 2));
        assert_eq!(Motif::parse("triangle").unwrap().balancedness(), r(1, 1));
        assert_eq!(Motif::parse("wedge").unwrap().balancedness(), r(2, 3));
        // triangle with a pendant edge: densest part is the whole graph
        let paw = Motif::parse("0-1,1-2,2-0,2-3").unwrap();
        assert_eq!(paw.balancedness(), r(1, 1));
        assert!(paw.is_balanced());
        // K4 with a pendant path of length 2 is unbalanced.
        let lolli = Motif::parse("0-1,0-2,0-3,1-2,1-3,2-3,3-4,4-5").unwrap();
        assert_eq!(lolli.balancedness(), r(3, 2));
        assert!(!lolli.is_balanced());
    }

    #[test]
    fn balancedness_matches_all_subgraph_enumeration() {
        // Oracle: every (vertex subset, edge subset) pair, not just induced subgraphs.
        for spec in ["edge", "wedge", "triangle", "path4", "cycle4", "0-1,1-2,2-0,2-3", "star_3"] {
            let m = Motif::parse(spec).unwrap();
            let h = m.order();
            let edges = m.edges();
            let mut best = r(0, 1);
            for vs in 1u32..(1 << h) {
                for es in 0u32..(1 << edges.len()) {
                    let ok = (0..edges.len()).filter(|&i| es >> i & 1 == 1).all(|i| {
                        let (a, b) = edges[i];
                        vs >> a & 1 == 1 && vs >> b & 1 == 1
                    });
                    if ok {
                        best = best.max(r(es.count_ones(), vs.count_ones()));
                    }
                }
            }
            assert_eq!(m.balancedness(), best, "{spec}");
            assert!(m.balancedness() >= r(m.edge_count() as u32, h as u32));
        }
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(Motif::new(4, &[(0, 1), (2, 3)]), Err(Error::Validation(_))));
        assert!(matches!(Motif::new(9, &[(0, 1)]), Err(Error::Domain(_))));
        assert!(Motif::parse("hexagon").is_err());
        assert!(Motif::parse("0-0").is_err());
    }

    #[test]
    fn inline_and_presets_agree() {
        assert_eq!(Motif::parse("0-1,1-2,2-0").unwrap(), Motif::parse("triangle").unwrap());
        assert_eq!(Motif::parse("star_2").unwrap(), Motif::parse("wedge").unwrap());
        assert_eq!(Motif::parse("triangle").unwrap().kind(), MotifKind::Triangle);
        assert_eq!(Motif::parse("1-0,1-2").unwrap().kind(), MotifKind::Wedge);
    }

    #[test]
    fn matching_order_is_connected() {
        for spec in ["path4", "cycle4", "star_5", "0-1,1-2,2-3,3-4,4-5,5-6,6-7"] {
            let m = Motif::parse(spec).unwrap();
            let order = m.matching_order();
            for (i, &v) in order.iter().enumerate().skip(1) {
                assert!(order[..i].iter().any(|&u| m.adjacent(u, v)), "{spec}");
            }
        }
    }

    #[test]
    fn symmetry_conditions_pick_one_per_orbit() {
        // Count permutations of 0..h (as embeddings into K_h) that satisfy the
        // conditions; exactly h!/|Aut| must survive.
        for spec in ["edge", "wedge", "triangle", "path4", "cycle4", "clique4", "star_4", "0-1,1-2,2-0,2-3"] {
            let m = Motif::parse(spec).unwrap();
            let conds = m.symmetry_conditions();
            let mut perm: Vec<u8> = (0..m.order() as u8).collect();
            let mut surviving = 0;
            loop {
                if conds.iter().all(|&(a, b)| perm[a] < perm[b]) {
                    surviving += 1;
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            let fact: usize = (1..=m.order()).product();
            assert_eq!(surviving, fact / m.automorphism_count(), "{spec}");
        }
    }
}
