//! Canonical certificates for small node- and arc-colored graphs.
//!
//! Color refinement (repeated re-ranking of nodes by their colored
//! neighborhood multisets) followed by individualization backtracking yields a
//! serialization that is equal for two graphs exactly when they are
//! isomorphic as colored graphs. Relations must be encoded symmetrically: an
//! undirected incidence contributes an arc in both directions, so the
//! out-neighborhood alone carries complete adjacency data.
//!
//! Sizes here are tiny (quotients of windowed gate subcomplexes), so the
//! exponential worst case of the backtracking search is irrelevant; what
//! matters is that the certificate is deterministic and relabeling-invariant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A finite graph with colored nodes and colored arcs.
#[derive(Clone, Debug, Default)]
pub struct ColoredGraph {
    pub colors: Vec<u64>,
    pub arcs: Vec<Vec<(u32, usize)>>,
}

impl ColoredGraph {
    pub fn add_node(&mut self, color: u64) -> usize {
        self.colors.push(color);
        self.arcs.push(Vec::new());
        self.colors.len() - 1
    }

    /// Record an undirected incidence as a symmetric arc pair.
    pub fn add_sym(&mut self, a: usize, b: usize, color: u32) {
        self.arcs[a].push((color, b));
        self.arcs[b].push((color, a));
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// Re-rank node colors by (current color, sorted neighborhood multiset) until
/// the partition stops splitting. Ranks are assigned in sorted signature
/// order, so they depend only on the isomorphism type.
fn refine(g: &ColoredGraph, colors: &mut Vec<u64>) {
    let n = g.colors.len();
    let mut classes = distinct(colors);
    loop {
        let mut sigs: Vec<(u64, Vec<(u32, u64)>)> = Vec::with_capacity(n);
        for v in 0..n {
            let mut nb: Vec<(u32, u64)> =
                g.arcs[v].iter().map(|&(c, w)| (c, colors[w])).collect();
            nb.sort_unstable();
            sigs.push((colors[v], nb));
        }
        let mut rank: BTreeMap<&(u64, Vec<(u32, u64)>), u64> = BTreeMap::new();
        for s in &sigs {
            let next = rank.len() as u64;
            rank.entry(s).or_insert(next);
        }
        // Re-number in sorted signature order.
        let mut ordered: Vec<_> = rank.keys().cloned().collect();
        ordered.sort();
        let by_sig: BTreeMap<_, u64> =
            ordered.into_iter().zip(0u64..).collect();
        for v in 0..n {
            colors[v] = by_sig[&sigs[v]];
        }
        let now = distinct(colors);
        if now == classes {
            return;
        }
        classes = now;
    }
}

fn distinct(colors: &[u64]) -> usize {
    let mut seen: Vec<u64> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Serialize with nodes in strictly increasing refined-color order. Only
/// valid once the partition is discrete.
fn emit(g: &ColoredGraph, colors: &[u64]) -> String {
    let n = g.colors.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| colors[v]);
    let mut pos = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut out = String::new();
    for &v in &order {
        let mut nb: Vec<(u32, usize)> =
            g.arcs[v].iter().map(|&(c, w)| (c, pos[w])).collect();
        nb.sort_unstable();
        let _ = write!(out, "|{}:", g.colors[v]);
        for (c, w) in nb {
            let _ = write!(out, "{c}>{w},");
        }
    }
    out
}

fn search(g: &ColoredGraph, mut colors: Vec<u64>, best: &mut Option<String>) {
    refine(g, &mut colors);
    let n = g.colors.len();
    // Group nodes by refined color; find the first non-singleton class.
    let mut by_color: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_color.entry(colors[v]).or_default().push(v);
    }
    let target = by_color.values().find(|c| c.len() > 1);
    match target {
        None => {
            let cert = emit(g, &colors);
            match best {
                None => *best = Some(cert),
                Some(b) => {
                    if cert < *b {
                        *b = cert;
                    }
                }
            }
        }
        Some(class) => {
            for &v in class {
                let mut branch = colors.clone();
                branch[v] = u64::MAX; // unique: refined ranks are < n
                search(g, branch, best);
            }
        }
    }
}

/// Lexicographically minimal serialization over all refinement-compatible
/// orderings. Two colored graphs get equal certificates iff they are
/// isomorphic (matching node colors, arc colors, and incidences).
pub fn certificate(g: &ColoredGraph) -> String {
    if g.colors.is_empty() {
        return "|".into();
    }
    // Seed with ranks of the declared colors.
    let mut ordered: Vec<u64> = g.colors.clone();
    ordered.sort_unstable();
    ordered.dedup();
    let rank: BTreeMap<u64, u64> =
        ordered.into_iter().zip(0u64..).collect();
    let colors: Vec<u64> = g.colors.iter().map(|c| rank[c]).collect();
    let mut best = None;
    search(g, colors, &mut best);
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3(order: [usize; 3]) -> ColoredGraph {
        // A path a-b-c with the middle node given by `order[1]`.
        let mut g = ColoredGraph::default();
        for _ in 0..3 {
            g.add_node(7);
        }
        g.add_sym(order[0], order[1], 0);
        g.add_sym(order[1], order[2], 0);
        g
    }

    #[test]
    fn relabeling_invariant() {
        let a = certificate(&path3([0, 1, 2]));
        let b = certificate(&path3([2, 0, 1]));
        let c = certificate(&path3([1, 2, 0]));
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn path_differs_from_triangle() {
        let mut t = ColoredGraph::default();
        for _ in 0..3 {
            t.add_node(7);
        }
        t.add_sym(0, 1, 0);
        t.add_sym(1, 2, 0);
        t.add_sym(2, 0, 0);
        assert_ne!(certificate(&t), certificate(&path3([0, 1, 2])));
    }

    #[test]
    fn node_colors_distinguish() {
        let mut g = path3([0, 1, 2]);
        g.colors[0] = 9;
        let mut h = path3([0, 1, 2]);
        h.colors[1] = 9;
        assert_ne!(certificate(&g), certificate(&h));
        // But coloring an end node is the same wherever the end sits.
        let mut k = path3([2, 1, 0]);
        k.colors[2] = 9;
        assert_eq!(certificate(&g), certificate(&k));
    }

    #[test]
    fn arc_colors_distinguish() {
        let mut g = ColoredGraph::default();
        g.add_node(1);
        g.add_node(1);
        g.add_sym(0, 1, 0);
        let mut h = ColoredGraph::default();
        h.add_node(1);
        h.add_node(1);
        h.add_sym(0, 1, 5);
        assert_ne!(certificate(&g), certificate(&h));
    }

    #[test]
    fn regular_graphs_need_backtracking() {
        // Two 6-cycles vs one 6-cycle plus two 3-cycles: same refinement
        // stable partition (all nodes look alike), different certificates.
        let mut a = ColoredGraph::default();
        let mut b = ColoredGraph::default();
        for _ in 0..6 {
            a.add_node(0);
            b.add_node(0);
        }
        for i in 0..6 {
            a.add_sym(i, (i + 1) % 6, 0);
        }
        b.add_sym(0, 1, 0);
        b.add_sym(1, 2, 0);
        b.add_sym(2, 0, 0);
        b.add_sym(3, 4, 0);
        b.add_sym(4, 5, 0);
        b.add_sym(5, 3, 0);
        assert_ne!(certificate(&a), certificate(&b));
    }

    #[test]
    fn empty_graph() {
        assert_eq!(certificate(&ColoredGraph::default()), "|");
    }
}
