//! Copy enumeration, motif counting and local count functions.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{Motif, MotifKind, MAX_MOTIF_ORDER};

/// Default upper bound on the number of stored copies.
pub const DEFAULT_COPY_CAP: usize = 10_000_000;

const ROOT_CHUNK: usize = 64;

/// A sorted set of at most eight vertices, usable as a hash key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    len: u8,
    v: [u32; MAX_MOTIF_ORDER],
}

impl VertexSet {
    /// Builds a set from arbitrary vertices; duplicates collapse. Returns
    /// `None` when more than eight distinct vertices are given.
    pub fn new(vertices: &[u32]) -> Option<VertexSet> {
        let mut buf: Vec<u32> = vertices.to_vec();
        buf.sort_unstable();
        buf.dedup();
        if buf.len() > MAX_MOTIF_ORDER {
            return None;
        }
        Some(Self::from_sorted(&buf))
    }

    pub(crate) fn from_sorted(sorted: &[u32]) -> VertexSet {
        let mut v = [u32::MAX; MAX_MOTIF_ORDER];
        v[..sorted.len()].copy_from_slice(sorted);
        VertexSet { len: sorted.len() as u8, v }
    }

    /// The subset of `sorted` selected by the bits of `mask`.
    pub(crate) fn select(sorted: &[u32], mask: u32) -> VertexSet {
        let mut v = [u32::MAX; MAX_MOTIF_ORDER];
        let mut len = 0;
        for (i, &x) in sorted.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v[len] = x;
                len += 1;
            }
        }
        VertexSet { len: len as u8, v }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.v[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Bit position of the local pair `(i, j)`, `i < j < h`, in an edge mask.
#[inline]
pub fn pair_index(i: usize, j: usize, h: usize) -> usize {
    debug_assert!(i < j && j < h);
    i * (2 * h - i - 1) / 2 + (j - i - 1)
}

struct Plan {
    order: Vec<usize>,
    // per step: earlier motif vertices adjacent to order[k]
    back: Vec<Vec<usize>>,
    // per step: earlier motif vertices whose image must be smaller / larger
    below: Vec<Vec<usize>>,
    above: Vec<Vec<usize>>,
}

/// Backtracking embedder producing one canonical embedding per copy.
pub(crate) struct Embedder<'a> {
    g: &'a Graph,
    motif: &'a Motif,
    plans: Vec<Option<Plan>>,
    min_plans: Vec<Option<Plan>>,
}

impl<'a> Embedder<'a> {
    pub(crate) fn new(g: &'a Graph, motif: &'a Motif) -> Self {
        let h = motif.order();
        let conds = motif.symmetry_conditions();
        let plan_for = |s: usize| {
            let order = motif.matching_order_from(s);
            let mut back = Vec::with_capacity(h);
            let mut below = Vec::with_capacity(h);
            let mut above = Vec::with_capacity(h);
            for k in 0..h {
                let x = order[k];
                let earlier = &order[..k];
                back.push(earlier.iter().copied().filter(|&y| motif.adjacent(x, y)).collect());
                below.push(
                    earlier.iter().copied().filter(|&y| conds.contains(&(y, x))).collect(),
                );
                above.push(
                    earlier.iter().copied().filter(|&y| conds.contains(&(x, y))).collect(),
                );
            }
            Plan { order, back, below, above }
        };
        let plans = (0..h).map(|s| Some(plan_for(s))).collect();
        // With the root as the smallest image, a start vertex that some
        // condition forces above another vertex can never occur.
        let min_plans = (0..h)
            .map(|s| (!conds.iter().any(|&(_, b)| b == s)).then(|| plan_for(s)))
            .collect();
        Embedder { g, motif, plans, min_plans }
    }

    /// Calls `f` once for every copy containing `root`. With `min_root`,
    /// only copies whose smallest vertex is `root` are visited.
    pub(crate) fn for_each_rooted<F>(&self, root: u32, min_root: bool, f: &mut F)
    where
        F: FnMut(&[u32; MAX_MOTIF_ORDER]),
    {
        let plans = if min_root { &self.min_plans } else { &self.plans };
        let floor = if min_root { root + 1 } else { 0 };
        for plan in plans.iter().flatten() {
            let s = plan.order[0];
            if self.g.degree(root as usize) < self.motif.degree(s) {
                continue;
            }
            let mut phi = [u32::MAX; MAX_MOTIF_ORDER];
            phi[s] = root;
            self.extend(plan, 1, &mut phi, floor, f);
        }
    }

    fn extend<F>(&self, plan: &Plan, k: usize, phi: &mut [u32; MAX_MOTIF_ORDER], floor: u32, f: &mut F)
    where
        F: FnMut(&[u32; MAX_MOTIF_ORDER]),
    {
        let h = plan.order.len();
        if k == h {
            f(phi);
            return;
        }
        let x = plan.order[k];
        let mut lo = floor;
        for &y in &plan.below[k] {
            lo = lo.max(phi[y] + 1);
        }
        let mut hi = u32::MAX;
        for &y in &plan.above[k] {
            hi = hi.min(phi[y]);
        }
        if lo >= hi {
            return;
        }
        let back = &plan.back[k];
        let src = *back
            .iter()
            .min_by_key(|&&y| self.g.degree(phi[y] as usize))
            .expect("connected order");
        let nbrs = self.g.neighbors(phi[src] as usize);
        let start = nbrs.partition_point(|&c| c < lo);
        let need = self.motif.degree(x);
        'cand: for &c in &nbrs[start..] {
            if c >= hi {
                break;
            }
            if self.g.degree(c as usize) < need {
                continue;
            }
            for &y in &plan.order[..k] {
                if phi[y] == c {
                    continue 'cand;
                }
            }
            for &y in back {
                if y != src && !self.g.has_edge(phi[y] as usize, c as usize) {
                    continue 'cand;
                }
            }
            phi[x] = c;
            self.extend(plan, k + 1, phi, floor, f);
        }
        phi[x] = u32::MAX;
    }
}

/// Sorted vertex tuple and local edge mask of the copy given by embedding `phi`.
pub(crate) fn canonical_record(motif: &Motif, phi: &[u32; MAX_MOTIF_ORDER]) -> ([u32; MAX_MOTIF_ORDER], u32) {
    let h = motif.order();
    let mut sorted = *phi;
    sorted[..h].sort_unstable();
    let mut pos = [0usize; MAX_MOTIF_ORDER];
    for x in 0..h {
        pos[x] = sorted[..h].binary_search(&phi[x]).unwrap();
    }
    let mut mask = 0u32;
    for &(a, b) in motif.edges() {
        let (i, j) = (pos[a as usize], pos[b as usize]);
        mask |= 1 << pair_index(i.min(j), i.max(j), h);
    }
    (sorted, mask)
}

/// A borrowed view of one copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CopyRef<'a> {
    pub vertices: &'a [u32],
    pub edge_mask: u32,
}

impl CopyRef<'_> {
    /// The copy's edges as graph vertex pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let h = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..h {
            for j in i + 1..h {
                if self.edge_mask >> pair_index(i, j, h) & 1 == 1 {
                    out.push((self.vertices[i], self.vertices[j]));
                }
            }
        }
        out
    }
}

struct VertexIndex {
    offsets: Vec<usize>,
    ids: Vec<u32>,
}

/// All copies of a motif in a graph, sorted by vertex tuple then edge mask.
///
/// Copies sharing a smallest vertex are contiguous; see [`CopyList::with_min`].
pub struct CopyList {
    h: usize,
    n: usize,
    aut: usize,
    verts: Vec<u32>,
    masks: Vec<u32>,
    by_min: Vec<usize>,
    index: OnceLock<VertexIndex>,
    profile: OnceLock<LocalProfile>,
}

impl std::fmt::Debug for CopyList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CopyList").field("h", &self.h).field("len", &self.len()).finish()
    }
}

/// Enumerates every copy of `motif` in `g`, failing once more than `cap`
/// copies have been produced.
pub fn enumerate_copies(g: &Graph, motif: &Motif, cap: usize) -> Result<CopyList> {
    let h = motif.order();
    let n = g.n();
    let emb = Embedder::new(g, motif);
    let produced = AtomicUsize::new(0);
    let over = || Error::Resource(format!("more than {cap} copies; raise the copy cap or use a smaller instance"));

    let chunks: Vec<(Vec<u32>, Vec<u32>, Vec<usize>)> = (0..n.div_ceil(ROOT_CHUNK))
        .into_par_iter()
        .map(|c| {
            let roots = c * ROOT_CHUNK..((c + 1) * ROOT_CHUNK).min(n);
            let mut verts = Vec::new();
            let mut masks = Vec::new();
            let mut counts = Vec::with_capacity(roots.len());
            let mut recs: Vec<([u32; MAX_MOTIF_ORDER], u32)> = Vec::new();
            for r in roots {
                recs.clear();
                emb.for_each_rooted(r as u32, true, &mut |phi| recs.push(canonical_record(motif, phi)));
                if produced.fetch_add(recs.len(), Ordering::Relaxed) + recs.len() > cap {
                    return Err(over());
                }
                recs.sort_unstable();
                for (v, m) in &recs {
                    verts.extend_from_slice(&v[..h]);
                    masks.push(*m);
                }
                counts.push(recs.len());
            }
            Ok((verts, masks, counts))
        })
        .collect::<Result<_>>()?;

    let total: usize = chunks.iter().map(|c| c.1.len()).sum();
    let mut verts = Vec::with_capacity(total * h);
    let mut masks = Vec::with_capacity(total);
    let mut by_min = Vec::with_capacity(n + 1);
    by_min.push(0);
    for (v, m, counts) in chunks {
        verts.extend_from_slice(&v);
        masks.extend_from_slice(&m);
        for c in counts {
            by_min.push(by_min.last().unwrap() + c);
        }
    }
    Ok(CopyList {
        h,
        n,
        aut: motif.automorphism_count(),
        verts,
        masks,
        by_min,
        index: OnceLock::new(),
        profile: OnceLock::new(),
    })
}

/// Calls `f` with the sorted vertex tuple and edge mask of every copy, in
/// no particular order and without storing them.
pub fn for_each_copy<F>(g: &Graph, motif: &Motif, mut f: F)
where
    F: FnMut(&[u32], u32),
{
    let h = motif.order();
    let emb = Embedder::new(g, motif);
    for r in 0..g.n() {
        emb.for_each_rooted(r as u32, true, &mut |phi| {
            let (v, m) = canonical_record(motif, phi);
            f(&v[..h], m);
        });
    }
}

/// `N(H, G)`. Edges, wedges and triangles use closed forms or direct triple
/// enumeration; other motifs are counted by streaming backtracking, so no
/// copy cap applies.
pub fn motif_count(g: &Graph, motif: &Motif) -> u64 {
    match motif.kind() {
        MotifKind::Edge => g.m() as u64,
        MotifKind::Wedge => (0..g.n())
            .map(|v| {
                let d = g.degree(v) as u64;
                d * d.saturating_sub(1) / 2
            })
            .sum(),
        MotifKind::Triangle => triangle_count(g),
        MotifKind::General => backtrack_count(g, motif),
    }
}

fn triangle_count(g: &Graph) -> u64 {
    (0..g.n())
        .into_par_iter()
        .map(|u| {
            let nu = g.neighbors(u);
            let mut t = 0u64;
            for (i, &v) in nu.iter().enumerate() {
                if (v as usize) < u {
                    continue;
                }
                for &w in &nu[i + 1..] {
                    if g.has_edge(v as usize, w as usize) {
                        t += 1;
                    }
                }
            }
            t
        })
        .sum()
}

/// Generic streaming count, used to cross-check the closed forms.
pub fn backtrack_count(g: &Graph, motif: &Motif) -> u64 {
    let emb = Embedder::new(g, motif);
    (0..g.n())
        .into_par_iter()
        .map(|r| {
            let mut c = 0u64;
            emb.for_each_rooted(r as u32, true, &mut |_| c += 1);
            c
        })
        .sum()
}

impl CopyList {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Motif order `h`.
    pub fn order(&self) -> usize {
        self.h
    }

    /// Vertex count of the host graph.
    pub fn graph_order(&self) -> usize {
        self.n
    }

    pub fn automorphism_count(&self) -> usize {
        self.aut
    }

    #[inline]
    pub fn vertices(&self, i: usize) -> &[u32] {
        &self.verts[i * self.h..(i + 1) * self.h]
    }

    #[inline]
    pub fn edge_mask(&self, i: usize) -> u32 {
        self.masks[i]
    }

    pub fn get(&self, i: usize) -> CopyRef<'_> {
        CopyRef { vertices: self.vertices(i), edge_mask: self.masks[i] }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = CopyRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Index range of the copies whose smallest vertex is `v`.
    #[inline]
    pub fn with_min(&self, v: usize) -> Range<usize> {
        self.by_min[v]..self.by_min[v + 1]
    }

    /// Index range of the copies whose vertex set is exactly `set`.
    pub fn with_vertex_set(&self, set: &[u32]) -> Range<usize> {
        if set.len() != self.h || set[0] as usize >= self.n {
            return 0..0;
        }
        let r = self.with_min(set[0] as usize);
        let slice = &self.verts[r.start * self.h..r.end * self.h];
        let rows = slice.len() / self.h;
        let row = |i: usize| &slice[i * self.h..(i + 1) * self.h];
        let lo = partition(rows, |i| row(i) < set);
        let hi = partition(rows, |i| row(i) <= set);
        r.start + lo..r.start + hi
    }

    fn vertex_index(&self) -> &VertexIndex {
        self.index.get_or_init(|| {
            let mut offsets = vec![0usize; self.n + 1];
            for &v in &self.verts {
                offsets[v as usize + 1] += 1;
            }
            for i in 0..self.n {
                offsets[i + 1] += offsets[i];
            }
            let mut fill = offsets.clone();
            let mut ids = vec![0u32; self.verts.len()];
            for (i, chunk) in self.verts.chunks_exact(self.h).enumerate() {
                for &v in chunk {
                    ids[fill[v as usize]] = i as u32;
                    fill[v as usize] += 1;
                }
            }
            VertexIndex { offsets, ids }
        })
    }

    /// Ids of the copies containing vertex `v`, ascending.
    pub fn containing(&self, v: usize) -> &[u32] {
        let idx = self.vertex_index();
        &idx.ids[idx.offsets[v]..idx.offsets[v + 1]]
    }

    /// `t_H(A)`: the number of copies whose vertex set contains `a`.
    pub fn local_count(&self, a: &[u32]) -> Result<u64> {
        let mut set: Vec<u32> = a.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.len() > self.h {
            return Err(Error::domain(format!(
                "vertex set of size {} exceeds motif order {}",
                set.len(),
                self.h
            )));
        }
        if set.is_empty() {
            return Ok(self.len() as u64);
        }
        if set.iter().any(|&v| v as usize >= self.n) {
            return Ok(0);
        }
        let pivot = *set.iter().min_by_key(|&&v| self.containing(v as usize).len()).unwrap();
        let count = self
            .containing(pivot as usize)
            .iter()
            .filter(|&&id| {
                let vs = self.vertices(id as usize);
                set.iter().all(|x| vs.binary_search(x).is_ok())
            })
            .count();
        Ok(count as u64)
    }

    /// The local count profile, built on first use.
    pub fn profile(&self) -> &LocalProfile {
        self.profile.get_or_init(|| LocalProfile::build(self))
    }

    /// `t_H(A)` read from the profile. `a` must be sorted and deduplicated.
    pub fn profile_count(&self, a: &[u32]) -> u64 {
        match a.len() {
            0 => self.len() as u64,
            1 => self.profile().singles.get(a[0] as usize).copied().unwrap_or(0),
            k if k == self.h => self.with_vertex_set(a).len() as u64,
            k if k > self.h => 0,
            _ => self.profile().get(&VertexSet::from_sorted(a)),
        }
    }

    /// Visits every non-empty `A` with `t_H(A) > 0` once, with its count.
    pub fn for_each_local_count<F: FnMut(&[u32], u64)>(&self, mut f: F) {
        let prof = self.profile();
        for (v, &t) in prof.singles.iter().enumerate() {
            if t > 0 {
                f(&[v as u32], t);
            }
        }
        for level in &prof.levels {
            let mut entries: Vec<_> = level.iter().collect();
            entries.sort_unstable();
            for (set, &t) in entries {
                f(set.as_slice(), t);
            }
        }
        if self.h > 1 {
            let mut i = 0;
            while i < self.len() {
                let vs = self.vertices(i);
                let mut j = i + 1;
                while j < self.len() && self.vertices(j) == vs {
                    j += 1;
                }
                f(vs, (j - i) as u64);
                i = j;
            }
        }
    }

    /// The full profile as an ordered map, for inspection of small instances.
    pub fn local_count_profile(&self) -> BTreeMap<Vec<u32>, u64> {
        let mut out = BTreeMap::new();
        self.for_each_local_count(|a, t| {
            out.insert(a.to_vec(), t);
        });
        out
    }

    /// Calls `f(subset_bits, t_H(A))` for every non-empty `A` inside copy `i`,
    /// where bit `j` of `subset_bits` selects `vertices(i)[j]`.
    pub fn for_each_subset_count<F: FnMut(u32, u64)>(&self, i: usize, full_group: u64, mut f: F) {
        let vs = self.vertices(i);
        let prof = self.profile();
        let full = (1u32 << self.h) - 1;
        for bits in 1..=full {
            let t = match bits.count_ones() as usize {
                1 => prof.singles[vs[bits.trailing_zeros() as usize] as usize],
                k if k == self.h => full_group,
                _ => prof.get(&VertexSet::select(vs, bits)),
            };
            f(bits, t);
        }
    }

    /// Sizes of the runs of consecutive copies sharing a vertex set, one entry
    /// per copy.
    pub fn group_sizes(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.len()];
        let mut i = 0;
        while i < self.len() {
            let mut j = i + 1;
            while j < self.len() && self.vertices(j) == self.vertices(i) {
                j += 1;
            }
            out[i..j].fill((j - i) as u32);
            i = j;
        }
        out
    }
}

fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Per-level sums `Σ_{|A|=k} t_H(A)` and `Σ_{|A|=k} t_H(A)²`, `k = 1..=h`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProfileSums {
    pub copies: u64,
    /// Index `k - 1` holds level `k`.
    pub sum: Vec<u128>,
    pub sum_sq: Vec<u128>,
}

impl ProfileSums {
    pub fn total(&self) -> u128 {
        self.sum.iter().sum()
    }

    /// `Σ_A (−1)^{|A|+1} t_H(A)²`.
    pub fn alternating_sq(&self) -> i128 {
        self.sum_sq
            .iter()
            .enumerate()
            .map(|(k, &s)| if k % 2 == 0 { s as i128 } else { -(s as i128) })
            .sum()
    }
}

/// Local counts `t_H(A)` for `1 ≤ |A| < h`; level `h` is read off the
/// sorted copy list.
#[derive(Debug)]
pub struct LocalProfile {
    singles: Vec<u64>,
    levels: Vec<FxHashMap<VertexSet, u64>>,
    sums: ProfileSums,
}

impl LocalProfile {
    fn build(copies: &CopyList) -> LocalProfile {
        let h = copies.h;
        let mut singles = vec![0u64; copies.n];
        let mut levels: Vec<FxHashMap<VertexSet, u64>> = (2..h).map(|_| FxHashMap::default()).collect();
        let full = (1u32 << h) - 1;
        for i in 0..copies.len() {
            let vs = copies.vertices(i);
            for &v in vs {
                singles[v as usize] += 1;
            }
            for bits in 1..full {
                let k = bits.count_ones() as usize;
                if k >= 2 {
                    *levels[k - 2].entry(VertexSet::select(vs, bits)).or_insert(0) += 1;
                }
            }
        }
        let mut sums = ProfileSums { copies: copies.len() as u64, sum: vec![0; h], sum_sq: vec![0; h] };
        for &t in &singles {
            sums.sum[0] += t as u128;
            sums.sum_sq[0] += (t as u128) * (t as u128);
        }
        for (l, level) in levels.iter().enumerate() {
            for &t in level.values() {
                sums.sum[l + 1] += t as u128;
                sums.sum_sq[l + 1] += (t as u128) * (t as u128);
            }
        }
        for &g in &copies.group_sizes() {
            // each copy in a group of size g contributes g to Σ t²
            sums.sum[h - 1] += 1;
            sums.sum_sq[h - 1] += g as u128;
        }
        LocalProfile { singles, levels, sums }
    }

    /// `t_H({v})` for every vertex.
    pub fn singles(&self) -> &[u64] {
        &self.singles
    }

    fn get(&self, set: &VertexSet) -> u64 {
        match set.len() {
            1 => self.singles.get(set.v[0] as usize).copied().unwrap_or(0),
            k => self.levels.get(k - 2).and_then(|m| m.get(set)).copied().unwrap_or(0),
        }
    }

    pub fn sums(&self) -> &ProfileSums {
        &self.sums
    }
}

/// Computes [`ProfileSums`] without storing copies: for each vertex `a`,
/// the copies containing `a` are enumerated and the counts of every `A` with
/// `min A = a` are tallied locally.
pub fn profile_sums(g: &Graph, motif: &Motif) -> ProfileSums {
    let h = motif.order();
    let n = g.n();
    let emb = Embedder::new(g, motif);
    let empty = || ProfileSums { copies: 0, sum: vec![0; h], sum_sq: vec![0; h] };
    let merge = |mut a: ProfileSums, b: ProfileSums| {
        a.copies += b.copies;
        for k in 0..h {
            a.sum[k] += b.sum[k];
            a.sum_sq[k] += b.sum_sq[k];
        }
        a
    };
    (0..n.div_ceil(ROOT_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = empty();
            let mut pair = vec![0u64; n];
            let mut touched: Vec<u32> = Vec::new();
            let mut upper: FxHashMap<VertexSet, u64> = FxHashMap::default();
            for a in c * ROOT_CHUNK..((c + 1) * ROOT_CHUNK).min(n) {
                let mut single = 0u64;
                emb.for_each_rooted(a as u32, false, &mut |phi| {
                    let (vs, _) = canonical_record(motif, phi);
                    let vs = &vs[..h];
                    let pos = vs.iter().position(|&x| x as usize == a).unwrap();
                    single += 1;
                    if pos == 0 {
                        acc.copies += 1;
                    }
                    let rest = h - 1 - pos;
                    for bits in 1u32..(1 << rest) {
                        let shifted = (bits << (pos + 1)) | (1 << pos);
                        match bits.count_ones() {
                            1 => {
                                let b = vs[pos + 1 + bits.trailing_zeros() as usize];
                                if pair[b as usize] == 0 {
                                    touched.push(b);
                                }
                                pair[b as usize] += 1;
                            }
                            _ => *upper.entry(VertexSet::select(vs, shifted)).or_insert(0) += 1,
                        }
                    }
                });
                acc.sum[0] += single as u128;
                acc.sum_sq[0] += (single as u128) * (single as u128);
                for &b in &touched {
                    let t = pair[b as usize] as u128;
                    acc.sum[1] += t;
                    acc.sum_sq[1] += t * t;
                    pair[b as usize] = 0;
                }
                touched.clear();
                for (set, &t) in upper.iter() {
                    let t = t as u128;
                    acc.sum[set.len() - 1] += t;
                    acc.sum_sq[set.len() - 1] += t * t;
                }
                upper.clear();
            }
            acc
        })
        .reduce(empty, merge)
}

/// First-moment level sums `Σ_{|A|=k} t_H(A)`, `k = 1..=h`, by the same
/// per-vertex grouping as [`profile_sums`] but without tallying individual
/// sets: a copy containing `a` and `r` larger vertices holds `C(r, k-1)` sets
/// of size `k` whose minimum is `a`.
pub fn profile_level_sums(g: &Graph, motif: &Motif) -> Vec<u128> {
    let h = motif.order();
    let emb = Embedder::new(g, motif);
    let mut binom = vec![vec![0u128; h]; h];
    for r in 0..h {
        binom[r][0] = 1;
        for k in 1..=r {
            binom[r][k] = binom[r - 1][k - 1] + if k < r { binom[r - 1][k] } else { 0 };
        }
    }
    (0..g.n())
        .into_par_iter()
        .map(|a| {
            let mut by_rest = vec![0u128; h];
            emb.for_each_rooted(a as u32, false, &mut |phi| {
                let rest = phi[..h].iter().filter(|&&x| x as usize > a).count();
                by_rest[rest] += 1;
            });
            let mut sums = vec![0u128; h];
            for (rest, &c) in by_rest.iter().enumerate() {
                for k in 0..=rest {
                    sums[k] += c * binom[rest][k];
                }
            }
            sums
        })
        .reduce(
            || vec![0u128; h],
            |mut x, y| {
                for k in 0..h {
                    x[k] += y[k];
                }
                x
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::complete;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn copies(g: &Graph, spec: &str) -> CopyList {
        enumerate_copies(g, &Motif::parse(spec).unwrap(), DEFAULT_COPY_CAP).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(copies(&complete(4), "triangle").len(), 4);
        assert_eq!(copies(&path(3), "triangle").len(), 0);
        assert_eq!(copies(&complete(3), "wedge").len(), 3);
        assert_eq!(motif_count(&complete(4), &Motif::parse("wedge").unwrap()), 12);
        assert_eq!(motif_count(&complete(5), &Motif::parse("triangle").unwrap()), 10);
        let star = Graph::from_edges(6, (1..6).map(|i| (0, i))).unwrap();
        assert_eq!(motif_count(&star, &Motif::parse("edge").unwrap()), 5);
    }

    #[test]
    fn wedges_on_same_vertices_are_distinct() {
        let cl = copies(&complete(3), "wedge");
        let masks: Vec<u32> = cl.iter().map(|c| c.edge_mask).collect();
        assert_eq!(cl.iter().filter(|c| c.vertices == [0, 1, 2]).count(), 3);
        assert_eq!(masks.len(), 3);
        for c in cl.iter() {
            assert_eq!(c.edges().len(), 2);
        }
        assert_eq!(cl.with_vertex_set(&[0, 1, 2]), 0..3);
    }

    #[test]
    fn local_counts() {
        let cl = copies(&complete(4), "triangle");
        assert_eq!(cl.local_count(&[0, 1]).unwrap(), 2);
        assert_eq!(cl.local_count(&[]).unwrap(), 4);
        assert!(matches!(cl.local_count(&[0, 1, 2, 3]), Err(Error::Domain(_))));
        let star = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
        let cl = copies(&star, "edge");
        assert_eq!(cl.local_count(&[0]).unwrap(), 4);
        assert_eq!(cl.local_count(&[3]).unwrap(), 1);
    }

    #[test]
    fn profile_examples() {
        let cl = copies(&complete(3), "triangle");
        let prof = cl.local_count_profile();
        assert_eq!(prof.len(), 7);
        assert!(prof.values().all(|&t| t == 1));
        let cl = copies(&complete(4), "triangle");
        assert_eq!(cl.local_count_profile().values().sum::<u64>(), 28);
        let cl = copies(&path(4), "triangle");
        assert!(cl.local_count_profile().is_empty());
    }

    #[test]
    fn profile_agrees_with_index() {
        let g = complete(6);
        for spec in ["wedge", "path4", "cycle4"] {
            let cl = copies(&g, spec);
            for (a, t) in cl.local_count_profile() {
                assert_eq!(cl.local_count(&a).unwrap(), t, "{spec} {a:?}");
                assert_eq!(cl.profile_count(&a), t);
            }
        }
    }

    #[test]
    fn streaming_sums_match_profile() {
        let g = complete(7);
        for spec in ["edge", "wedge", "triangle", "path4", "cycle4", "0-1,1-2,2-0,2-3"] {
            let m = Motif::parse(spec).unwrap();
            let cl = enumerate_copies(&g, &m, DEFAULT_COPY_CAP).unwrap();
            assert_eq!(&profile_sums(&g, &m), cl.profile().sums(), "{spec}");
            assert_eq!(profile_level_sums(&g, &m), cl.profile().sums().sum, "{spec}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_copies(&complete(8), &Motif::parse("triangle").unwrap(), 10).unwrap_err();
        assert!(matches!(err, Error::Resource(ref s) if s.contains("10")));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn pair_index_is_dense() {
        for h in 2..=8 {
            let mut seen = vec![false; h * (h - 1) / 2];
            for i in 0..h {
                for j in i + 1..h {
                    seen[pair_index(i, j, h)] = true;
                }
            }
            assert!(seen.into_iter().all(|b| b));
        }
    }
}
