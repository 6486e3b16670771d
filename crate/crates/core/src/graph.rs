//! Simple undirected graphs with dense integer labels.
//!
//! A [`Graph`] is immutable once built. Neighbor lists are stored in CSR form
//! (sorted per vertex); graphs with at most [`BITSET_MAX_VERTICES`] vertices
//! also carry one adjacency bitset row per vertex so that edge queries are a
//! single word lookup.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count for which adjacency bitset rows are materialized
/// (2^14 vertices, 32 MiB of rows). Larger graphs fall back to binary search
/// over the sorted neighbor lists.
pub const BITSET_MAX_VERTICES: usize = 1 << 14;

#[derive(Clone, Debug)]
struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    #[inline]
    fn get(&self, u: usize, v: usize) -> bool {
        self.data[u * self.words + (v >> 6)] >> (v & 63) & 1 == 1
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    bits: Option<BitRows>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.offsets == other.offsets && self.targets == other.targets
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a simple graph on `n` vertices. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::validation(format!("vertex count {n} exceeds u32 labels")));
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at vertex {u}")));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            pairs.push((a as u32, b as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted_pairs(n, &pairs))
    }

    /// `pairs` must be sorted, deduplicated and satisfy `u < v < n`.
    pub(crate) fn from_sorted_pairs(n: usize, pairs: &[(u32, u32)]) -> Graph {
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; 2 * pairs.len()];
        // Visiting pairs in (u, v) order writes every row in increasing order:
        // row w first receives its smaller neighbors (as the `v` side of pairs
        // sorted by u), then its larger ones.
        for &(u, v) in pairs {
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for &(u, v) in pairs {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
        }
        let bits = (n <= BITSET_MAX_VERTICES && n > 0).then(|| {
            let words = n.div_ceil(64);
            let mut data = vec![0u64; words * n];
            for &(u, v) in pairs {
                let (u, v) = (u as usize, v as usize);
                data[u * words + (v >> 6)] |= 1 << (v & 63);
                data[v * words + (u >> 6)] |= 1 << (u & 63);
            }
            BitRows { words, data }
        });
        Graph { n, offsets, targets, bits }
    }

    pub fn empty(n: usize) -> Graph {
        Self::from_sorted_pairs(n, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match &self.bits {
            Some(rows) => rows.get(u, v),
            None => {
                let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
                self.neighbors(a).binary_search(&(b as u32)).is_ok()
            }
        }
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| (u, v as usize))
        })
    }

    /// The subgraph induced by the vertices with `keep[v] == true`. Vertex
    /// labels are preserved; dropped vertices become isolated.
    pub fn induced(&self, keep: &[bool]) -> Graph {
        assert_eq!(keep.len(), self.n, "mask length must equal vertex count");
        let pairs: Vec<(u32, u32)> = self
            .edges()
            .filter(|&(u, v)| keep[u] && keep[v])
            .map(|(u, v)| (u as u32, v as u32))
            .collect();
        Self::from_sorted_pairs(self.n, &pairs)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n as u32;
        let pairs: Vec<(u32, u32)> = self
            .edges()
            .map(|(u, v)| (u as u32, v as u32))
            .chain(other.edges().map(|(u, v)| (u as u32 + shift, v as u32 + shift)))
            .collect();
        Self::from_sorted_pairs(self.n + other.n, &pairs)
    }

    /// Serializes to the edge-list text format: a header `n <count>` followed
    /// by one `u v` line per edge, `u < v`, in lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.m() * 12);
        writeln!(out, "n {}", self.n).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Graph> {
        Graph::from_edges(json.n, json.edges.iter().map(|e| (e[0], e[1])))
    }
}

/// JSON graph form `{"n": int, "edges": [[u, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, found `{tok}`"),
    })
}

/// Parses the edge-list text format.
///
/// The first content line declares the vertex count, either as `n <count>` or
/// as a bare `<count>`. Every following line holds one edge `u v` with
/// `0 <= u, v < count`. Blank lines and `#` comments are ignored, and
/// duplicate edges collapse.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header line `n <count>`".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let n = match toks.as_slice() {
        ["n", count] => parse_index(count, hline)?,
        [count] => parse_index(count, hline)?,
        _ => {
            return Err(Error::Parse {
                line: hline,
                msg: format!("expected header `n <count>`, found `{header}`"),
            })
        }
    };
    let mut edges = Vec::new();
    for (line, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = toks.as_slice() else {
            return Err(Error::Parse {
                line,
                msg: format!("expected `u v`, found `{l}`"),
            });
        };
        let (u, v) = (parse_index(a, line)?, parse_index(b, line)?);
        if u >= n || v >= n {
            return Err(Error::Parse {
                line,
                msg: format!("vertex out of range in `{l}` (n = {n})"),
            });
        }
        if u == v {
            return Err(Error::Validation(format!("self-loop at vertex {u} on line {line}")));
        }
        edges.push((u, v));
    }
    Graph::from_edges(n, edges)
}

/// Mapping between external string identifiers and dense vertex labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdMap {
    /// `labels[v]` is the external identifier of vertex `v`.
    pub labels: Vec<String>,
}

impl IdMap {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Parses a header-less edge list whose endpoints are arbitrary string
/// tokens. Identifiers are assigned dense labels in order of first
/// appearance.
pub fn parse_labeled_edge_list(text: &str) -> Result<(Graph, IdMap)> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut map = IdMap::default();
    let mut edges = Vec::new();
    let mut intern = |tok: &str, map: &mut IdMap| -> usize {
        *ids.entry(tok.to_string()).or_insert_with(|| {
            map.labels.push(tok.to_string());
            map.labels.len() - 1
        })
    };
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = toks.as_slice() else {
            return Err(Error::Parse {
                line,
                msg: format!("expected `u v`, found `{l}`"),
            });
        };
        if a == b {
            return Err(Error::Validation(format!("self-loop at `{a}` on line {line}")));
        }
        let u = intern(a, &mut map);
        let v = intern(b, &mut map);
        edges.push((u, v));
    }
    Ok((Graph::from_edges(map.labels.len(), edges)?, map))
}

/// Loads a graph file: `.json` files use the JSON form, anything else the
/// edge-list text format.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let json: GraphJson = serde_json::from_str(&text)?;
        Graph::from_json(&json)
    } else {
        parse_edge_list(&text)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn path_from_text() {
        let g = parse_edge_list("3\n0 1\n1 2\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert!(g.has_edge(0, 1) && g.has_edge(2, 1) && !g.has_edge(0, 2));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_edge_list("n 3\n0 1\n0 1\n1 0\n").unwrap();
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse_edge_list("2\n0 0\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_edge_list("n 4\n0 1\n\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("n 4\n0 1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("n 2\n0 5\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn degree_sequences() {
        assert_eq!(complete(3).degree_sequence(), vec![2, 2, 2]);
        let star = Graph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(star.degree_sequence(), vec![4, 1, 1, 1, 1]);
        assert_eq!(Graph::empty(3).degree_sequence(), vec![0, 0, 0]);
    }

    #[test]
    fn labeled_ids_are_remapped() {
        let (g, map) = parse_labeled_edge_list("alice bob\nbob carol\n# c\nalice bob\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(map.index_of("carol"), Some(2));
        assert!(g.has_edge(map.index_of("bob").unwrap(), map.index_of("carol").unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let g = complete(4);
        let text = serde_json::to_string(&g.to_json()).unwrap();
        assert_eq!(text, r#"{"n":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#);
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Graph::from_json(&back).unwrap(), g);
    }

    #[test]
    fn large_graphs_use_sorted_lists() {
        let n = BITSET_MAX_VERTICES + 10;
        let g = Graph::from_edges(n, [(0, n - 1), (5, 7), (n - 2, 3)]).unwrap();
        assert!(g.bits.is_none());
        assert!(g.has_edge(n - 1, 0) && g.has_edge(3, n - 2) && !g.has_edge(5, 6));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..40).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..120).prop_map(move |es| {
                Graph::from_edges(n, es.into_iter().filter(|(u, v)| u != v)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn handshake_and_symmetry(g in arb_graph()) {
            let degs = g.degree_sequence();
            prop_assert_eq!(degs.iter().sum::<usize>(), 2 * g.m());
            prop_assert!(g.max_degree() < g.n().max(1));
            for u in 0..g.n() {
                prop_assert!(!g.has_edge(u, u));
                for &v in g.neighbors(u) {
                    prop_assert!(g.has_edge(v as usize, u));
                }
                prop_assert!(g.neighbors(u).windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn edge_list_round_trip_is_exact(g in arb_graph()) {
            let text = g.to_edge_list();
            let back = parse_edge_list(&text).unwrap();
            prop_assert_eq!(back.to_edge_list(), text);
            prop_assert_eq!(back, g);
        }
    }
}
