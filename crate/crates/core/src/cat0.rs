//! CAT(0) structure on a cube complex: halfspace signatures, the wall
//! metric, medians, intervals, hulls, convexity, and gate projections.
//!
//! A finite complex is accepted when it is nonpositively curved, connected,
//! every hyperplane is two-sided and separates the 1-skeleton into exactly
//! two pieces, the wall metric agrees with the path metric, medians exist,
//! and every unit 4-cycle bounds a square. Signatures then identify each
//! vertex with its vector of halfspace sides, and all metric operations are
//! bit arithmetic.

use std::collections::{BTreeMap, VecDeque};

use crate::bits::Bits;
use crate::complex::CubeComplex;
use crate::error::{Error, Result};
use crate::hyperplane::Hyperplanes;
use crate::ids::{HId, VId};

#[derive(Clone, Debug)]
pub enum Cat0Witness {
    NotNpc(String),
    Empty,
    Disconnected(VId, VId),
    OneSidedHyperplane(HId),
    /// Deleting the dual edges does not disconnect (count of pieces given).
    NonSeparatingHyperplane(HId, usize),
    /// Path metric and wall metric disagree for this pair.
    DistanceMismatch(VId, VId, u32, u32),
    /// No vertex realizes the majority signature of the triple.
    MedianMissing(VId, VId, VId),
    /// A 4-cycle (center, two neighbors, far corner) with no square.
    UnfilledSquare(VId, VId, VId, VId),
}

impl std::fmt::Display for Cat0Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cat0Witness::NotNpc(s) => write!(f, "not nonpositively curved: {s}"),
            Cat0Witness::Empty => write!(f, "complex has no vertices"),
            Cat0Witness::Disconnected(u, v) => {
                write!(f, "vertices {} and {} lie in different components", u.0, v.0)
            }
            Cat0Witness::OneSidedHyperplane(h) => write!(f, "hyperplane {} is one-sided", h.0),
            Cat0Witness::NonSeparatingHyperplane(h, n) => {
                write!(f, "hyperplane {} does not separate (leaves {n} component(s))", h.0)
            }
            Cat0Witness::DistanceMismatch(u, v, bfs, wall) => write!(
                f,
                "path distance {bfs} but wall distance {wall} between vertices {} and {}",
                u.0, v.0
            ),
            Cat0Witness::MedianMissing(u, v, w) => {
                write!(f, "no median for vertices {}, {}, {}", u.0, v.0, w.0)
            }
            Cat0Witness::UnfilledSquare(c, u, w, x) => write!(
                f,
                "4-cycle {}-{}-{}-{} bounds no square",
                c.0, u.0, w.0, x.0
            ),
        }
    }
}

pub struct Cat0 {
    cx: CubeComplex,
    hyps: Hyperplanes,
    sigs: Vec<Bits>,
    sig_index: BTreeMap<Bits, VId>,
    adjacency: Vec<Vec<VId>>,
}

/// A convex vertex set with its gate data: hyperplanes crossing it and the
/// fixed halfspace bits shared by all members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexSet {
    pub verts: Bits,
    pub cross: Bits,
    fixed_bits: Bits,
}

fn adjacency(cx: &CubeComplex) -> Vec<Vec<VId>> {
    let mut adj = vec![Vec::new(); cx.vertex_count()];
    for e in cx.edges() {
        let [u, v] = e.ends;
        adj[u.idx()].push(v);
        if u != v {
            adj[v.idx()].push(u);
        }
    }
    for a in adj.iter_mut() {
        a.sort();
        a.dedup();
    }
    adj
}

fn bfs_row(adj: &[Vec<VId>], start: VId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[start.idx()] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v.idx()] {
            if dist[u.idx()] == u32::MAX {
                dist[u.idx()] = dist[v.idx()] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

fn analyze(cx: &CubeComplex) -> std::result::Result<(Hyperplanes, Vec<Bits>), Cat0Witness> {
    if cx.vertex_count() == 0 {
        return Err(Cat0Witness::Empty);
    }
    if let Err(e) = cx.require_npc() {
        return Err(Cat0Witness::NotNpc(e.to_string()));
    }
    let adj = adjacency(cx);
    let root_row = bfs_row(&adj, VId(0));
    if let Some(far) = root_row.iter().position(|&d| d == u32::MAX) {
        return Err(Cat0Witness::Disconnected(VId(0), VId(far as u32)));
    }
    let hyps = Hyperplanes::compute(cx);
    let nv = cx.vertex_count();
    let nh = hyps.len();
    let mut sigs = vec![Bits::new(nh); nv];
    for h in 0..nh {
        let class = &hyps.classes[h];
        if !class.two_sided {
            return Err(Cat0Witness::OneSidedHyperplane(HId(h as u32)));
        }
        // Components of the 1-skeleton minus the dual edges.
        let mut comp = vec![u32::MAX; nv];
        let mut n_comp = 0;
        for s in 0..nv {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = n_comp;
            let mut queue = VecDeque::from([VId(s as u32)]);
            while let Some(v) = queue.pop_front() {
                for end in cx.ends_at(v) {
                    if hyps.class_of(end.e) == HId(h as u32) {
                        continue;
                    }
                    let u = cx.edge(end.e).endpoint(1 - end.w);
                    if comp[u.idx()] == u32::MAX {
                        comp[u.idx()] = n_comp;
                        queue.push_back(u);
                    }
                }
            }
            n_comp += 1;
        }
        if n_comp != 2 {
            return Err(Cat0Witness::NonSeparatingHyperplane(HId(h as u32), n_comp as usize));
        }
        for e in &class.edges {
            let [a, b] = cx.edge(*e).ends;
            if comp[a.idx()] == comp[b.idx()] {
                return Err(Cat0Witness::NonSeparatingHyperplane(HId(h as u32), 1));
            }
        }
        for v in 0..nv {
            if comp[v] == 1 {
                sigs[v].insert(h);
            }
        }
    }
    // Wall metric must equal path metric.
    for u in 0..nv {
        let row = bfs_row(&adj, VId(u as u32));
        for v in u + 1..nv {
            let wall = sigs[u].hamming(&sigs[v]);
            if row[v] as usize != wall {
                return Err(Cat0Witness::DistanceMismatch(
                    VId(u as u32),
                    VId(v as u32),
                    row[v],
                    wall as u32,
                ));
            }
        }
    }
    // Each unit 4-cycle needs a filling square. Squares are keyed by their
    // two diagonals (corner positions 0/3 and 1/2 are opposite).
    let mut diagonals: std::collections::BTreeSet<((VId, VId), (VId, VId))> =
        std::collections::BTreeSet::new();
    for sq in cx.squares() {
        let c = sq.corners;
        let d1 = (c[0].min(c[3]), c[0].max(c[3]));
        let d2 = (c[1].min(c[2]), c[1].max(c[2]));
        diagonals.insert((d1.min(d2), d1.max(d2)));
    }
    for c in 0..nv {
        let center = VId(c as u32);
        let nbrs = &adj[c];
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                let (u, w) = (nbrs[i], nbrs[j]);
                for &x in &adj[u.idx()] {
                    if x == center || !adj[w.idx()].contains(&x) {
                        continue;
                    }
                    let d1 = (center.min(x), center.max(x));
                    let d2 = (u.min(w), u.max(w));
                    if !diagonals.contains(&(d1.min(d2), d1.max(d2))) {
                        return Err(Cat0Witness::UnfilledSquare(center, u, w, x));
                    }
                }
            }
        }
    }
    Ok((hyps, sigs))
}

/// None when the complex carries a CAT(0) structure; otherwise the witness.
/// Runs the full median triple check on small complexes and a deterministic
/// sample on larger ones.
pub fn cat0_witness(cx: &CubeComplex) -> Option<Cat0Witness> {
    let (hyps, sigs) = match analyze(cx) {
        Ok(v) => v,
        Err(w) => return Some(w),
    };
    let _ = &hyps;
    let nv = cx.vertex_count();
    let mut index = BTreeMap::new();
    for (v, s) in sigs.iter().enumerate() {
        index.insert(s.clone(), VId(v as u32));
    }
    let check = |u: usize, v: usize, w: usize| -> Option<Cat0Witness> {
        let mut m = sigs[u].intersection(&sigs[v]);
        let vw = sigs[v].intersection(&sigs[w]);
        let uw = sigs[u].intersection(&sigs[w]);
        m.union_with(&vw);
        m.union_with(&uw);
        if !index.contains_key(&m) {
            return Some(Cat0Witness::MedianMissing(VId(u as u32), VId(v as u32), VId(w as u32)));
        }
        None
    };
    if nv <= 220 {
        for u in 0..nv {
            for v in u + 1..nv {
                for w in v + 1..nv {
                    if let Some(wit) = check(u, v, w) {
                        return Some(wit);
                    }
                }
            }
        }
    } else {
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..20000 {
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % nv as u64) as usize
            };
            let (u, v, w) = (next(), next(), next());
            if let Some(wit) = check(u, v, w) {
                return Some(wit);
            }
        }
    }
    None
}

impl Cat0 {
    pub fn new(cx: CubeComplex) -> std::result::Result<Cat0, (CubeComplex, Cat0Witness)> {
        match analyze(&cx) {
            Ok((hyps, sigs)) => {
                let mut sig_index = BTreeMap::new();
                for (v, s) in sigs.iter().enumerate() {
                    sig_index.insert(s.clone(), VId(v as u32));
                }
                let adjacency = adjacency(&cx);
                Ok(Cat0 { cx, hyps, sigs, sig_index, adjacency })
            }
            Err(w) => Err((cx, w)),
        }
    }

    pub fn complex(&self) -> &CubeComplex {
        &self.cx
    }
    pub fn hyperplanes(&self) -> &Hyperplanes {
        &self.hyps
    }
    pub fn vertex_count(&self) -> usize {
        self.cx.vertex_count()
    }
    pub fn hyperplane_count(&self) -> usize {
        self.hyps.len()
    }
    pub fn sig(&self, v: VId) -> &Bits {
        &self.sigs[v.idx()]
    }
    pub fn neighbors(&self, v: VId) -> &[VId] {
        &self.adjacency[v.idx()]
    }

    pub fn vertex_with_sig(&self, sig: &Bits) -> Option<VId> {
        self.sig_index.get(sig).copied()
    }

    pub fn dist(&self, u: VId, v: VId) -> u32 {
        self.sigs[u.idx()].hamming(&self.sigs[v.idx()]) as u32
    }

    /// Hyperplanes separating u from v.
    pub fn walls_between(&self, u: VId, v: VId) -> Bits {
        let mut d = self.sigs[u.idx()].clone();
        d.symmetric_difference_with(&self.sigs[v.idx()]);
        d
    }

    /// x lies on a geodesic from u to v.
    pub fn between(&self, x: VId, u: VId, v: VId) -> bool {
        let xu = self.walls_between(x, u);
        let xv = self.walls_between(x, v);
        !xu.intersects(&xv)
    }

    pub fn interval(&self, u: VId, v: VId) -> Bits {
        let mut out = Bits::new(self.vertex_count());
        for x in 0..self.vertex_count() {
            if self.between(VId(x as u32), u, v) {
                out.insert(x);
            }
        }
        out
    }

    pub fn median(&self, u: VId, v: VId, w: VId) -> VId {
        let mut m = self.sigs[u.idx()].intersection(&self.sigs[v.idx()]);
        m.union_with(&self.sigs[v.idx()].intersection(&self.sigs[w.idx()]));
        m.union_with(&self.sigs[u.idx()].intersection(&self.sigs[w.idx()]));
        *self.sig_index.get(&m).expect("median realized in a CAT(0) complex")
    }

    /// Smallest convex superset: cut out by every halfspace containing all
    /// of `verts`.
    pub fn hull(&self, verts: &Bits) -> Result<Bits> {
        let first = verts.first().ok_or(Error::EmptySet)?;
        let nh = self.hyps.len();
        let mut fixed_mask = Bits::full(nh);
        let mut fixed_bits = self.sigs[first].clone();
        for v in verts.iter() {
            let mut diff = self.sigs[v].clone();
            diff.symmetric_difference_with(&fixed_bits);
            fixed_mask.subtract(&diff);
        }
        fixed_bits.intersect_with(&fixed_mask);
        let mut out = Bits::new(self.vertex_count());
        for v in 0..self.vertex_count() {
            let mut masked = self.sigs[v].intersection(&fixed_mask);
            masked.symmetric_difference_with(&fixed_bits);
            if masked.is_empty() {
                out.insert(v);
            }
        }
        Ok(out)
    }

    pub fn is_convex(&self, verts: &Bits) -> Result<bool> {
        Ok(self.hull(verts)? == *verts)
    }

    /// Package a convex set for gate lookups; errors when not convex.
    pub fn convex(&self, verts: &Bits) -> Result<ConvexSet> {
        let first = verts.first().ok_or(Error::EmptySet)?;
        let nh = self.hyps.len();
        let mut fixed_mask = Bits::full(nh);
        let mut fixed_bits = self.sigs[first].clone();
        for v in verts.iter() {
            let mut diff = self.sigs[v].clone();
            diff.symmetric_difference_with(&fixed_bits);
            fixed_mask.subtract(&diff);
        }
        fixed_bits.intersect_with(&fixed_mask);
        let mut cross = Bits::full(nh);
        cross.subtract(&fixed_mask);
        for v in 0..self.vertex_count() {
            let mut masked = self.sigs[v].intersection(&fixed_mask);
            masked.symmetric_difference_with(&fixed_bits);
            if masked.is_empty() != verts.contains(v) {
                return Err(Error::NotConvex);
            }
        }
        Ok(ConvexSet { verts: verts.clone(), cross, fixed_bits })
    }

    /// Gate (nearest-point projection) onto a convex set.
    pub fn gate(&self, x: VId, y: &ConvexSet) -> VId {
        let mut target = self.sigs[x.idx()].intersection(&y.cross);
        target.union_with(&y.fixed_bits);
        *self
            .sig_index
            .get(&target)
            .expect("gate signature realized for a convex set")
    }

    /// Lexicographically least geodesic between two vertices.
    pub fn geodesic(&self, u: VId, v: VId) -> Vec<VId> {
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            let next = self
                .adjacency[cur.idx()]
                .iter()
                .copied()
                .find(|&n| self.dist(n, v) == self.dist(cur, v) - 1)
                .expect("connected CAT(0) complex");
            path.push(next);
            cur = next;
        }
        path
    }

    /// Vertex set of the halfspace on the given side.
    pub fn halfspace(&self, h: HId, side: bool) -> Bits {
        let mut out = Bits::new(self.vertex_count());
        for v in 0..self.vertex_count() {
            if self.sigs[v].contains(h.idx()) == side {
                out.insert(v);
            }
        }
        out
    }

    /// Diameter of an induced subgraph; None when empty or disconnected.
    pub fn induced_diameter(&self, verts: &Bits) -> Option<u32> {
        let members: Vec<VId> = verts.iter().map(|v| VId(v as u32)).collect();
        if members.is_empty() {
            return None;
        }
        let mut diam = 0;
        for &s in &members {
            let mut dist: BTreeMap<VId, u32> = BTreeMap::new();
            dist.insert(s, 0);
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adjacency[v.idx()] {
                    if verts.contains(u.idx()) && !dist.contains_key(&u) {
                        dist.insert(u, dist[&v] + 1);
                        queue.push_back(u);
                    }
                }
            }
            if dist.len() != members.len() {
                return None;
            }
            diam = diam.max(*dist.values().max().unwrap());
        }
        Some(diam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn grid_vid(cx: &CubeComplex, x: usize, y: usize) -> VId {
        cx.vid(&format!("v{x}_{y}")).unwrap()
    }

    #[test]
    fn grid_is_cat0() {
        let cx = fixtures::grid(3, 2);
        assert!(cat0_witness(&cx).is_none());
        let g = Cat0::new(cx).map_err(|(_, w)| w).unwrap();
        let a = grid_vid(g.complex(), 0, 0);
        let b = grid_vid(g.complex(), 3, 0);
        let c = grid_vid(g.complex(), 1, 2);
        assert_eq!(g.dist(a, b), 3);
        assert_eq!(g.dist(a, c), 3);
        assert_eq!(g.dist(b, c), 4);
        let m = g.median(a, b, c);
        assert_eq!(m, grid_vid(g.complex(), 1, 0));
    }

    #[test]
    fn torus_rejected() {
        let cx = fixtures::torus();
        match cat0_witness(&cx) {
            Some(Cat0Witness::NonSeparatingHyperplane(_, 1)) => {}
            other => panic!("expected non-separating hyperplane, got {other:?}"),
        }
    }

    #[test]
    fn hollow_cycle_rejected() {
        // Path closed into a 4-cycle with no square.
        let spec = crate::complex::ComplexSpec {
            name: "cycle".into(),
            vertices: ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
            edges: vec![
                ("a".into(), "b".into()),
                ("b".into(), "c".into()),
                ("c".into(), "d".into()),
                ("d".into(), "a".into()),
            ],
            squares: vec![],
            cubes3: vec![],
        };
        let cx = CubeComplex::build(&spec).unwrap();
        assert!(matches!(
            cat0_witness(&cx),
            Some(Cat0Witness::NonSeparatingHyperplane(..))
        ));
    }

    #[test]
    fn hull_and_convexity() {
        let g = Cat0::new(fixtures::grid(2, 2)).map_err(|(_, w)| w).unwrap();
        let cx = g.complex();
        let mut set = Bits::new(g.vertex_count());
        set.insert(grid_vid(cx, 0, 0).idx());
        set.insert(grid_vid(cx, 2, 1).idx());
        let hull = g.hull(&set).unwrap();
        // Hull of opposite corners of a 2x1 block: the six block vertices.
        assert_eq!(hull.count(), 6);
        for (x, y) in [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)] {
            assert!(hull.contains(grid_vid(cx, x, y).idx()));
        }
        assert!(g.is_convex(&hull).unwrap());
        // An L of three corner vertices is not convex.
        let mut l = Bits::new(g.vertex_count());
        l.insert(grid_vid(cx, 0, 0).idx());
        l.insert(grid_vid(cx, 2, 0).idx());
        l.insert(grid_vid(cx, 2, 2).idx());
        assert!(!g.is_convex(&l).unwrap());
    }

    #[test]
    fn gates_to_convex_sets() {
        let g = Cat0::new(fixtures::grid(2, 2)).map_err(|(_, w)| w).unwrap();
        let cx = g.complex();
        // Bottom row is convex; the gate drops the y coordinate.
        let mut row = Bits::new(g.vertex_count());
        for x in 0..=2 {
            row.insert(grid_vid(cx, x, 0).idx());
        }
        let y = g.convex(&row).unwrap();
        for x in 0..=2 {
            for yy in 0..=2 {
                let gate = g.gate(grid_vid(cx, x, yy), &y);
                assert_eq!(gate, grid_vid(cx, x, 0));
            }
        }
    }

    #[test]
    fn geodesics_realize_distance() {
        let g = Cat0::new(fixtures::grid(3, 3)).map_err(|(_, w)| w).unwrap();
        let cx = g.complex();
        let a = grid_vid(cx, 0, 2);
        let b = grid_vid(cx, 3, 0);
        let path = g.geodesic(a, b);
        assert_eq!(path.len() as u32, g.dist(a, b) + 1);
        for pair in path.windows(2) {
            assert_eq!(g.dist(pair[0], pair[1]), 1);
        }
    }
}
