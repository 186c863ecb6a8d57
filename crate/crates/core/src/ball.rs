//! Development of universal-cover balls over a nonpositively curved base,
//! together with partial deck transformations found by seed propagation.
//!
//! The developed ball of radius R at a basepoint is the full subcomplex of
//! the universal cover induced on vertices at distance at most R. Vertices
//! are created in breadth-first order; each new edge immediately triggers
//! square-corner closure, which only ever connects existing vertices. The
//! result is independent of the radius on common prefixes, which the tests
//! pin down as a restriction invariant.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::bits::Bits;
use crate::cat0::Cat0;
use crate::complex::{CubeComplex, EdgeCell};
use crate::error::{Error, Result};
use crate::ids::{CId, EId, End, SideRef, SqId, VId};

pub const DEFAULT_CELL_BUDGET: usize = 2_000_000;

pub struct Ball {
    g: Cat0,
    radius: u32,
    basepoint: VId,
    base_basepoint: VId,
    dist: Vec<u32>,
    proj_v: Vec<VId>,
    proj_e: Vec<SideRef>,
    proj_sq: Vec<SqId>,
    proj_c: Vec<CId>,
    /// Per ball vertex: realized base ends and the neighbor/edge through them.
    ports: Vec<BTreeMap<End, (VId, EId)>>,
    interior: Bits,
    boundary: Bits,
}

struct Dev<'a> {
    base: &'a CubeComplex,
    radius: u32,
    budget: usize,
    verts: Vec<(VId, u32)>, // (base vertex, distance)
    edges: Vec<(VId, VId, SideRef)>, // normalized ends (ball ids), base traversal
    squares: Vec<([VId; 4], [SideRef; 4], SqId)>, // ball corners/sides + base square
    square_keys: BTreeSet<([VId; 4], [SideRef; 4])>,
    ports: Vec<BTreeMap<End, (VId, EId)>>,
}

impl<'a> Dev<'a> {
    fn cells(&self) -> usize {
        self.verts.len() + self.edges.len() + self.squares.len()
    }

    fn new_vertex(&mut self, base: VId, dist: u32) -> Result<VId> {
        if self.cells() >= self.budget {
            return Err(Error::CellBudget(self.budget));
        }
        self.verts.push((base, dist));
        self.ports.push(BTreeMap::new());
        Ok(VId(self.verts.len() as u32 - 1))
    }

    /// Create (or confirm) the edge from `a` to `b` whose traversal projects
    /// to `side`. Returns Some(edge) when newly created.
    fn create_edge(&mut self, a: VId, b: VId, side: SideRef) -> Result<Option<EId>> {
        let end_a = side.end(0);
        let end_b = side.end(1);
        match (self.ports[a.idx()].get(&end_a), self.ports[b.idx()].get(&end_b)) {
            (Some(&(ta, ea)), Some(&(tb, eb))) => {
                if ta != b || tb != a || ea != eb {
                    return Err(Error::Incoherent(format!(
                        "edge over base edge {} between ball vertices {} and {} collides",
                        side.e.0, a.0, b.0
                    )));
                }
                Ok(None)
            }
            (None, None) => {
                if self.cells() >= self.budget {
                    return Err(Error::CellBudget(self.budget));
                }
                let (da, db) = (self.verts[a.idx()].1, self.verts[b.idx()].1);
                if da.abs_diff(db) != 1 {
                    return Err(Error::Incoherent(format!(
                        "edge between distances {da} and {db} (cover not bipartite?)"
                    )));
                }
                let idx = EId(self.edges.len() as u32);
                let (u, v, s) = if a <= b { (a, b, side) } else { (b, a, side.reversed()) };
                self.edges.push((u, v, s));
                self.ports[a.idx()].insert(end_a, (b, idx));
                self.ports[b.idx()].insert(end_b, (a, idx));
                Ok(Some(idx))
            }
            _ => Err(Error::Incoherent(format!(
                "edge over base edge {} realized at one endpoint only",
                side.e.0
            ))),
        }
    }

    /// Square-corner closure at both endpoints of a new edge: whenever an
    /// L of two sides of a base square is realized at a vertex, the far
    /// side(s) are forced. Never creates vertices.
    fn close_edge(&mut self, eidx: EId) -> Result<()> {
        let mut work = vec![eidx];
        while let Some(e) = work.pop() {
            let (u, v, s) = self.edges[e.idx()];
            for (x, eps) in [(u, s.end(0)), (v, s.end(1))] {
                let bx = self.verts[x.idx()].0;
                for &(sq, pos) in self.base.corners_at(bx) {
                    let (c1, c2) = self.base.corner_ends(sq, pos);
                    let partner = if c1 == eps {
                        c2
                    } else if c2 == eps {
                        c1
                    } else {
                        continue;
                    };
                    let Some(&(z, _)) = self.ports[x.idx()].get(&partner) else {
                        continue;
                    };
                    let y = self.ports[x.idx()][&eps].0;
                    let (pos_y, _, cont_y) = self.base.corner_across(sq, pos, eps);
                    let (pos_z, _, cont_z) = self.base.corner_across(sq, pos, partner);
                    let pos_w = 3 - pos;
                    let wy = self.ports[y.idx()].get(&cont_y).map(|&(t, _)| t);
                    let wz = self.ports[z.idx()].get(&cont_z).map(|&(t, _)| t);
                    match (wy, wz) {
                        (Some(a), Some(b)) => {
                            if a != b {
                                return Err(Error::Incoherent(format!(
                                    "square {} closes onto two different vertices",
                                    sq.0
                                )));
                            }
                            self.record_square(sq, [(pos, x), (pos_y, y), (pos_z, z), (pos_w, a)])?;
                        }
                        (Some(w), None) => {
                            if let Some(n) = self.far_side(sq, pos_z, pos_w, z, w)? {
                                work.push(n);
                            }
                        }
                        (None, Some(w)) => {
                            if let Some(n) = self.far_side(sq, pos_y, pos_w, y, w)? {
                                work.push(n);
                            }
                        }
                        (None, None) => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Create the missing far side of a square between realized vertices.
    fn far_side(&mut self, sq: SqId, from_pos: u8, to_pos: u8, from: VId, to: VId) -> Result<Option<EId>> {
        let side_idx = crate::ids::SIDE_CORNERS
            .iter()
            .position(|&(a, b)| (a, b) == (from_pos, to_pos) || (a, b) == (to_pos, from_pos))
            .expect("adjacent corner positions");
        let (a, _) = crate::ids::SIDE_CORNERS[side_idx];
        let base_side = self.base.square(sq).sides[side_idx];
        let oriented = if a == from_pos { base_side } else { base_side.reversed() };
        self.create_edge(from, to, oriented)
    }

    fn record_square(&mut self, sq: SqId, placed: [(u8, VId); 4]) -> Result<()> {
        let mut corners = [VId(0); 4];
        for &(pos, v) in &placed {
            corners[pos as usize] = v;
        }
        let mut sides = [SideRef { e: EId(0), rev: false }; 4];
        for (i, &(pa, _pb)) in crate::ids::SIDE_CORNERS.iter().enumerate() {
            let base_side = self.base.square(sq).sides[i];
            let from = corners[pa as usize];
            let &(_, ball_edge) = self.ports[from.idx()]
                .get(&base_side.end(0))
                .expect("square sides realized before recording");
            let stored = self.edges[ball_edge.idx()];
            sides[i] = SideRef { e: ball_edge, rev: stored.0 != from };
        }
        let key = crate::complex::canonical_square_key(corners, sides);
        if self.square_keys.insert(key) {
            if self.cells() >= self.budget {
                return Err(Error::CellBudget(self.budget));
            }
            self.squares.push((corners, sides, sq));
        }
        Ok(())
    }
}

/// Develop the radius-R ball of the universal cover at a basepoint.
pub fn develop_ball(
    base: &CubeComplex,
    basepoint: VId,
    radius: u32,
    budget: usize,
) -> Result<Ball> {
    base.require_npc()?;
    if basepoint.idx() >= base.vertex_count() {
        return Err(Error::UnknownVertex(format!("vertex id {}", basepoint.0)));
    }
    let mut dev = Dev {
        base,
        radius,
        budget,
        verts: Vec::new(),
        edges: Vec::new(),
        squares: Vec::new(),
        square_keys: BTreeSet::new(),
        ports: Vec::new(),
    };
    dev.new_vertex(basepoint, 0)?;
    let mut cursor = 0usize;
    while cursor < dev.verts.len() {
        let x = VId(cursor as u32);
        let (bx, dx) = dev.verts[cursor];
        cursor += 1;
        if dx >= radius {
            continue;
        }
        for &end in base.ends_at(bx) {
            if dev.ports[x.idx()].contains_key(&end) {
                continue;
            }
            let other = base.edge(end.e).endpoint(1 - end.w);
            let y = dev.new_vertex(other, dx + 1)?;
            let side = SideRef { e: end.e, rev: end.w == 1 };
            let created = dev.create_edge(x, y, side)?.expect("fresh vertex port");
            dev.close_edge(created)?;
        }
    }
    let _ = dev.radius;

    // Lift 3-cubes: all eight corners must be realized.
    let mut cubes: Vec<([VId; 8], CId)> = Vec::new();
    let mut cube_keys = BTreeSet::new();
    if base.cube_count() > 0 {
        for x in 0..dev.verts.len() {
            let bx = dev.verts[x].0;
            'corner: for &(c, pos) in base.cube_corners_at(bx) {
                let mut lift = [None::<VId>; 8];
                lift[pos as usize] = Some(VId(x as u32));
                let mut queue = VecDeque::from([pos]);
                while let Some(q) = queue.pop_front() {
                    let here = lift[q as usize].unwrap();
                    let dirs = base.cube_corner_directed_ends(c, q)?;
                    for (bi, bit) in [1u8, 2, 4].iter().enumerate() {
                        let nq = q ^ bit;
                        let Some(&(t, _)) = dev.ports[here.idx()].get(&dirs[bi]) else {
                            continue 'corner;
                        };
                        match lift[nq as usize] {
                            None => {
                                lift[nq as usize] = Some(t);
                                queue.push_back(nq);
                            }
                            Some(prev) => {
                                if prev != t {
                                    return Err(Error::Incoherent(format!(
                                        "cube {} lift disagrees at corner {nq}",
                                        c.0
                                    )));
                                }
                            }
                        }
                    }
                }
                let corners = lift.map(|v| v.unwrap());
                let mut key = corners;
                key.sort();
                if cube_keys.insert(key) {
                    cubes.push((corners, c));
                }
            }
        }
    }

    // Assemble and re-derive the CAT(0) structure; any failure here means
    // the development itself is broken.
    let names: Vec<String> = (0..dev.verts.len()).map(|i| format!("u{i}")).collect();
    let edge_cells: Vec<EdgeCell> =
        dev.edges.iter().map(|&(u, v, _)| EdgeCell { ends: [u, v] }).collect();
    let raw_squares: Vec<([VId; 4], [SideRef; 4])> =
        dev.squares.iter().map(|&(c, s, _)| (c, s)).collect();
    let raw_cubes: Vec<([VId; 8], Option<[SqId; 6]>)> =
        cubes.iter().map(|&(c, _)| (c, None)).collect();
    let name = format!("{}@{}r{}", base.name(), base.vname(basepoint), radius);
    let cx = CubeComplex::assemble(name, names, edge_cells, raw_squares, raw_cubes)
        .map_err(|e| Error::Incoherent(format!("ball does not assemble: {e}")))?;
    let g = Cat0::new(cx).map_err(|(_, w)| Error::Incoherent(format!("ball not CAT(0): {w}")))?;

    let dist: Vec<u32> = dev.verts.iter().map(|&(_, d)| d).collect();
    let proj_v: Vec<VId> = dev.verts.iter().map(|&(b, _)| b).collect();
    let proj_e: Vec<SideRef> = dev.edges.iter().map(|&(_, _, s)| s).collect();
    let proj_sq: Vec<SqId> = dev.squares.iter().map(|&(_, _, s)| s).collect();
    let proj_c: Vec<CId> = cubes.iter().map(|&(_, c)| c).collect();

    // Projection restricted to each cell is injective on corners.
    for e in g.complex().edges() {
        if e.is_loop() {
            return Err(Error::Incoherent("loop edge in a developed ball".into()));
        }
    }
    for sq in g.complex().squares() {
        let mut c = sq.corners;
        c.sort();
        if c.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Incoherent("square with repeated corners in a ball".into()));
        }
    }

    // Distances from the basepoint must match the recorded creation layers.
    let b0 = VId(0);
    for v in 0..g.vertex_count() {
        if g.dist(b0, VId(v as u32)) != dist[v] {
            return Err(Error::Incoherent(format!(
                "vertex {v} created at layer {} but lies at distance {}",
                dist[v],
                g.dist(b0, VId(v as u32))
            )));
        }
    }

    let mut interior = Bits::new(g.vertex_count());
    let mut boundary = Bits::new(g.vertex_count());
    for v in 0..g.vertex_count() {
        if dist[v] == radius {
            boundary.insert(v);
        }
        if is_link_complete(base, g.complex(), &proj_v, &proj_e, &proj_sq, &dev.ports, VId(v as u32)) {
            interior.insert(v);
        }
    }

    Ok(Ball {
        g,
        radius,
        basepoint: b0,
        base_basepoint: basepoint,
        dist,
        proj_v,
        proj_e,
        proj_sq,
        proj_c,
        ports: dev.ports,
        interior,
        boundary,
    })
}

/// The projection is a link isomorphism at v: all base ends realized and the
/// projected corner end-pairs match the base corner end-pairs exactly.
fn is_link_complete(
    base: &CubeComplex,
    ball: &CubeComplex,
    proj_v: &[VId],
    proj_e: &[SideRef],
    proj_sq: &[SqId],
    ports: &[BTreeMap<End, (VId, EId)>],
    v: VId,
) -> bool {
    let bv = proj_v[v.idx()];
    if ports[v.idx()].len() != base.ends_at(bv).len() {
        return false;
    }
    let project_end = |end: End| -> End {
        let s = proj_e[end.e.idx()];
        End { e: s.e, w: end.w ^ s.rev as u8 }
    };
    let mut ball_pairs: Vec<(End, End)> = ball
        .corners_at(v)
        .iter()
        .map(|&(sq, pos)| {
            let _ = proj_sq;
            let (a, b) = ball.corner_ends(sq, pos);
            let (pa, pb) = (project_end(a), project_end(b));
            (pa.min(pb), pa.max(pb))
        })
        .collect();
    ball_pairs.sort();
    let mut base_pairs: Vec<(End, End)> = base
        .corners_at(bv)
        .iter()
        .map(|&(sq, pos)| {
            let (a, b) = base.corner_ends(sq, pos);
            (a.min(b), a.max(b))
        })
        .collect();
    base_pairs.sort();
    if ball_pairs != base_pairs {
        return false;
    }
    let mut ball_tris: Vec<[End; 3]> = ball
        .cube_corners_at(v)
        .iter()
        .map(|&(c, pos)| {
            let mut t = ball.cube_corner_ends(c, pos).expect("validated").map(project_end);
            t.sort();
            t
        })
        .collect();
    ball_tris.sort();
    let mut base_tris: Vec<[End; 3]> = base
        .cube_corners_at(bv)
        .iter()
        .map(|&(c, pos)| {
            let mut t = base.cube_corner_ends(c, pos).expect("validated");
            t.sort();
            t
        })
        .collect();
    base_tris.sort();
    ball_tris == base_tris
}

impl Ball {
    pub fn cat0(&self) -> &Cat0 {
        &self.g
    }
    pub fn complex(&self) -> &CubeComplex {
        self.g.complex()
    }
    pub fn radius(&self) -> u32 {
        self.radius
    }
    pub fn basepoint(&self) -> VId {
        self.basepoint
    }
    pub fn base_basepoint(&self) -> VId {
        self.base_basepoint
    }
    pub fn dist_to_base(&self, v: VId) -> u32 {
        self.dist[v.idx()]
    }
    pub fn base_of(&self, v: VId) -> VId {
        self.proj_v[v.idx()]
    }
    pub fn base_of_edge(&self, e: EId) -> SideRef {
        self.proj_e[e.idx()]
    }
    pub fn base_of_square(&self, s: SqId) -> SqId {
        self.proj_sq[s.idx()]
    }
    pub fn base_of_cube(&self, c: CId) -> CId {
        self.proj_c[c.idx()]
    }
    pub fn interior(&self) -> &Bits {
        &self.interior
    }
    pub fn boundary(&self) -> &Bits {
        &self.boundary
    }
    pub fn port(&self, v: VId, end: End) -> Option<VId> {
        self.ports[v.idx()].get(&end).map(|&(t, _)| t)
    }
    pub fn port_edge(&self, v: VId, end: End) -> Option<(VId, EId)> {
        self.ports[v.idx()].get(&end).copied()
    }

    /// Project a ball end to a base end.
    pub fn project_end(&self, end: End) -> End {
        let s = self.proj_e[end.e.idx()];
        End { e: s.e, w: end.w ^ s.rev as u8 }
    }
}

/// A partial deck transformation: images forced from a single vertex pair by
/// matching base ends outward.
#[derive(Clone, Debug)]
pub struct Deck {
    pub map: Vec<Option<VId>>,
    pub boundary_limited: bool,
}

impl Deck {
    pub fn image(&self, v: VId) -> Option<VId> {
        self.map[v.idx()]
    }
    pub fn defined(&self) -> impl Iterator<Item = (VId, VId)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|w| (VId(i as u32), w)))
    }
}

pub fn deck_search(ball: &Ball, from: VId, to: VId) -> Result<Deck> {
    if ball.base_of(from) != ball.base_of(to) {
        return Err(Error::SeedMismatch);
    }
    if from == to {
        return Err(Error::TrivialAutomorphism);
    }
    let n = ball.complex().vertex_count();
    let mut map: Vec<Option<VId>> = vec![None; n];
    map[from.idx()] = Some(to);
    let mut queue = VecDeque::from([from]);
    while let Some(a) = queue.pop_front() {
        let b = map[a.idx()].unwrap();
        for (&end, &(a2, _)) in &ball.ports[a.idx()] {
            let Some(&(b2, _)) = ball.ports[b.idx()].get(&end) else {
                continue;
            };
            match map[a2.idx()] {
                None => {
                    map[a2.idx()] = Some(b2);
                    queue.push_back(a2);
                }
                Some(prev) => {
                    if prev != b2 {
                        return Err(Error::DeckInconsistent(format!(
                            "vertex {} forced to both {} and {}",
                            a2.0, prev.0, b2.0
                        )));
                    }
                }
            }
        }
    }
    // Squares with fully mapped corners must map to squares.
    for (si, sq) in ball.complex().squares().iter().enumerate() {
        let imgs: Vec<Option<VId>> = sq.corners.iter().map(|c| map[c.idx()]).collect();
        if imgs.iter().any(|i| i.is_none()) {
            continue;
        }
        let corners = [imgs[0].unwrap(), imgs[1].unwrap(), imgs[2].unwrap(), imgs[3].unwrap()];
        let mut sides = sq.sides;
        let mut ok = true;
        for (i, side) in sq.sides.iter().enumerate() {
            let from_c = corners[crate::ids::SIDE_CORNERS[i].0 as usize];
            let base_side = ball.proj_e[side.e.idx()];
            let oriented = if side.rev { base_side.reversed() } else { base_side };
            match ball.ports[from_c.idx()].get(&oriented.end(0)) {
                Some(&(_, be)) => {
                    let stored = ball.complex().edge(be);
                    sides[i] = SideRef { e: be, rev: stored.ends[0] != from_c };
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || ball.complex().find_square(corners, sides).is_none() {
            return Err(Error::DeckInconsistent(format!(
                "square {si} with mapped corners has no image square"
            )));
        }
    }
    let boundary_limited = map.iter().any(|m| m.is_none());
    Ok(Deck { map, boundary_limited })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslationLength {
    pub length: u32,
    pub boundary_limited: bool,
}

/// Minimum displacement over the deck transformation's domain. On a window
/// too small to contain an axis this overestimates; the flag says so.
pub fn translation_length(ball: &Ball, deck: &Deck) -> Result<TranslationLength> {
    let mut best: Option<u32> = None;
    for (v, w) in deck.defined() {
        let d = ball.cat0().dist(v, w);
        best = Some(best.map_or(d, |b| b.min(d)));
    }
    match best {
        None => Err(Error::TrivialAutomorphism),
        Some(0) => Err(Error::TrivialAutomorphism),
        Some(d) => Ok(TranslationLength { length: d, boundary_limited: deck.boundary_limited }),
    }
}
