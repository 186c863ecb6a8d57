//! Cube complexes of dimension <= 3: cells, construction from file specs,
//! vertex links, and the nonpositive-curvature (flag link) validation.
//!
//! Cells are normalized on ingest: edges store their smaller endpoint first,
//! squares are rotated/reflected to the lexicographically least of their eight
//! presentations. All downstream ids are therefore deterministic functions of
//! the input file.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{CId, EId, End, SqId, SideRef, VId, CORNER_SIDES, SIDE_CORNERS, SQUARE_SYMS};

/// File form of a complex. Squares are corner 4-tuples `(v00,v10,v01,v11)`;
/// when side edges are ambiguous from corners alone (loops, parallel edges)
/// a square is written in the explicit form carrying signed 1-based edge
/// references: `+k` traverses file edge `k-1` forward, `-k` backward.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub name: String,
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub squares: Vec<SquareSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cubes3: Vec<[String; 8]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SquareSpec {
    Corners([String; 4]),
    Explicit { corners: [String; 4], edges: [i64; 4] },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeCell {
    pub ends: [VId; 2],
}

impl EdgeCell {
    pub fn endpoint(&self, w: u8) -> VId {
        self.ends[w as usize]
    }
    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SquareCell {
    /// Corner vertices at positions (0,0), (1,0), (0,1), (1,1).
    pub corners: [VId; 4],
    /// Side traversals: bottom, top, left, right (see `ids` for directions).
    pub sides: [SideRef; 4],
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CubeCell {
    /// Corners indexed by x + 2y + 4z.
    pub corners: [VId; 8],
    /// Faces (z=0, z=1, y=0, y=1, x=0, x=1), each a square id plus the
    /// presentation under which the square's corners match the face tuple.
    pub faces: [(SqId, u8); 6],
}

/// Cube corners per face, listed in square corner order for face coordinates
/// (z faces use (x,y), y faces (x,z), x faces (y,z)).
pub const CUBE_FACES: [[u8; 4]; 6] =
    [[0, 1, 2, 3], [4, 5, 6, 7], [0, 1, 4, 5], [2, 3, 6, 7], [0, 2, 4, 6], [1, 3, 5, 7]];

pub struct CubeComplex {
    name: String,
    vnames: Vec<String>,
    vindex: BTreeMap<String, VId>,
    edges: Vec<EdgeCell>,
    /// Edges whose stored endpoint order is reversed relative to the file
    /// that declared them; file-relative signed references resolve through
    /// this table. Empty for programmatic construction (no file).
    file_swapped: Vec<bool>,
    squares: Vec<SquareCell>,
    cubes: Vec<CubeCell>,
    ends_at: Vec<Vec<End>>,
    corners_at: Vec<Vec<(SqId, u8)>>,
    cube_corners_at: Vec<Vec<(CId, u8)>>,
    npc_cache: OnceLock<NpcReport>,
}

/// Outcome of the link (flag simplicial) validation.
#[derive(Clone, Debug)]
pub struct NpcReport {
    pub ok: bool,
    pub issues: Vec<LinkIssue>,
}

#[derive(Clone, Debug)]
pub struct LinkIssue {
    pub vertex: VId,
    pub kind: LinkIssueKind,
    pub detail: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LinkIssueKind {
    /// A square corner whose two edge-ends coincide (loop in the link).
    CornerLoop,
    /// Two corners spanning the same pair of edge-ends (bigon in the link).
    ParallelCorners,
    /// Triangle of link edges with no 3-cube corner filling it.
    EmptyTriangle,
    /// Four pairwise adjacent edge-ends: would need a 4-cube, above the cap.
    AboveDimensionCap,
    /// Two 3-cube corners over the same end triple.
    DuplicateTriangle,
}

/// Link of a vertex: edge-ends as link vertices, square corners as link
/// edges, 3-cube corners as link triangles.
pub struct LinkView {
    pub ends: Vec<End>,
    /// (end index, end index, square, corner position); indices into `ends`.
    pub pairs: Vec<(usize, usize, SqId, u8)>,
    /// Sorted end-index triples from cube corners.
    pub triangles: Vec<([usize; 3], CId, u8)>,
}

/// Lexicographically least presentation of a square cell; the stored form
/// and the deduplication key.
pub fn canonical_square_key(corners: [VId; 4], sides: [SideRef; 4]) -> ([VId; 4], [SideRef; 4]) {
    canonical_square(corners, sides)
}

fn canonical_square(corners: [VId; 4], sides: [SideRef; 4]) -> ([VId; 4], [SideRef; 4]) {
    let mut best: Option<([VId; 4], [SideRef; 4])> = None;
    for (cp, sp, fl) in SQUARE_SYMS {
        let c = [
            corners[cp[0] as usize],
            corners[cp[1] as usize],
            corners[cp[2] as usize],
            corners[cp[3] as usize],
        ];
        let s = [0usize, 1, 2, 3].map(|i| {
            let o = sides[sp[i] as usize];
            SideRef { e: o.e, rev: o.rev ^ fl[i] }
        });
        let key = (c, s);
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap()
}

/// Corner position `pos` of a square: the two (side, is_source) incidences.
/// For side `s` with corner pair (a,b): at `a` the traversal starts, at `b`
/// it arrives.
fn corner_side_roles(pos: u8) -> [(u8, bool); 2] {
    let (sa, sb) = CORNER_SIDES[pos as usize];
    let role = |s: u8| -> (u8, bool) { (s, SIDE_CORNERS[s as usize].0 == pos) };
    [role(sa), role(sb)]
}

impl CubeComplex {
    pub fn build(spec: &ComplexSpec) -> Result<CubeComplex> {
        let mut vindex = BTreeMap::new();
        for (i, name) in spec.vertices.iter().enumerate() {
            if vindex.insert(name.clone(), VId(i as u32)).is_some() {
                return Err(Error::DuplicateVertex(name.clone()));
            }
        }
        let vid = |name: &str, kind: &'static str, index: usize| -> Result<VId> {
            vindex.get(name).copied().ok_or(Error::DanglingCell {
                kind,
                index,
                what: format!("vertex `{name}`"),
            })
        };

        // Edges, normalized min-endpoint-first; remember which were swapped so
        // signed side references (relative to file orientation) still resolve.
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut swapped = Vec::with_capacity(spec.edges.len());
        for (i, (a, b)) in spec.edges.iter().enumerate() {
            let u = vid(a, "edge", i)?;
            let v = vid(b, "edge", i)?;
            let sw = u > v;
            edges.push(EdgeCell { ends: if sw { [v, u] } else { [u, v] } });
            swapped.push(sw);
        }

        // Squares: resolve sides, then canonicalize.
        let mut raw_squares = Vec::with_capacity(spec.squares.len());
        for (i, sq) in spec.squares.iter().enumerate() {
            let (cnames, explicit) = match sq {
                SquareSpec::Corners(c) => (c, None),
                SquareSpec::Explicit { corners, edges } => (corners, Some(edges)),
            };
            let mut corners = [VId(0); 4];
            for (p, nm) in cnames.iter().enumerate() {
                corners[p] = vid(nm, "square", i)?;
            }
            let mut sides = [SideRef { e: EId(0), rev: false }; 4];
            for s in 0..4 {
                let (pa, pb) = SIDE_CORNERS[s];
                let (a, b) = (corners[pa as usize], corners[pb as usize]);
                let side = match explicit {
                    Some(refs) => {
                        let r = refs[s];
                        if r == 0 || r.unsigned_abs() as usize > edges.len() {
                            return Err(Error::DanglingCell {
                                kind: "square",
                                index: i,
                                what: format!("edge reference {r}"),
                            });
                        }
                        let e = EId((r.unsigned_abs() - 1) as u32);
                        let rev = (r < 0) ^ swapped[e.idx()];
                        SideRef { e, rev }
                    }
                    None => {
                        let mut found = Vec::new();
                        for (ei, ec) in edges.iter().enumerate() {
                            if ec.is_loop() {
                                continue; // loop orientation is never inferable
                            }
                            if (ec.ends[0] == a && ec.ends[1] == b)
                                || (ec.ends[0] == b && ec.ends[1] == a)
                            {
                                found.push(SideRef { e: EId(ei as u32), rev: ec.ends[0] != a });
                            }
                        }
                        match found.len() {
                            1 => found[0],
                            0 => {
                                if a == b {
                                    return Err(Error::AmbiguousSide {
                                        index: i,
                                        side: s,
                                        a: cnames[pa as usize].clone(),
                                        b: cnames[pb as usize].clone(),
                                    });
                                }
                                return Err(Error::DanglingCell {
                                    kind: "square",
                                    index: i,
                                    what: format!(
                                        "edge between `{}` and `{}`",
                                        cnames[pa as usize], cnames[pb as usize]
                                    ),
                                });
                            }
                            _ => {
                                return Err(Error::AmbiguousSide {
                                    index: i,
                                    side: s,
                                    a: cnames[pa as usize].clone(),
                                    b: cnames[pb as usize].clone(),
                                })
                            }
                        }
                    }
                };
                let ec = &edges[side.e.idx()];
                let (src, tgt) = if side.rev {
                    (ec.ends[1], ec.ends[0])
                } else {
                    (ec.ends[0], ec.ends[1])
                };
                if src != a || tgt != b {
                    return Err(Error::SideMismatch { index: i, side: s });
                }
                sides[s] = side;
            }
            raw_squares.push((corners, sides));
        }

        let mut cube_corner_names = Vec::with_capacity(spec.cubes3.len());
        for (i, c) in spec.cubes3.iter().enumerate() {
            let mut corners = [VId(0); 8];
            for (p, nm) in c.iter().enumerate() {
                corners[p] = vid(nm, "cube", i)?;
            }
            cube_corner_names.push(corners);
        }

        let mut cc = Self::assemble(spec.name.clone(), spec.vertices.clone(), edges, raw_squares, {
            cube_corner_names.into_iter().map(|corners| (corners, None)).collect()
        })?;
        cc.file_swapped = swapped;
        Ok(cc)
    }

    /// Whether the stored orientation of `e` is reversed relative to the
    /// declaring file (always false for programmatically assembled cells).
    pub fn edge_file_swapped(&self, e: EId) -> bool {
        self.file_swapped.get(e.idx()).copied().unwrap_or(false)
    }

    /// Construct from already-resolved cells. Square sides reference the
    /// edges as passed (the constructor canonicalizes). Cubes carry their 8
    /// corners and optionally the 6 face square ids; faces are resolved from
    /// corners when absent.
    pub fn assemble(
        name: String,
        vnames: Vec<String>,
        edges: Vec<EdgeCell>,
        raw_squares: Vec<([VId; 4], [SideRef; 4])>,
        raw_cubes: Vec<([VId; 8], Option<[SqId; 6]>)>,
    ) -> Result<CubeComplex> {
        let mut vindex = BTreeMap::new();
        for (i, n) in vnames.iter().enumerate() {
            if vindex.insert(n.clone(), VId(i as u32)).is_some() {
                return Err(Error::DuplicateVertex(n.clone()));
            }
        }
        for e in &edges {
            debug_assert!(e.ends[0] <= e.ends[1], "edges must be normalized");
        }

        let mut squares = Vec::with_capacity(raw_squares.len());
        let mut seen = BTreeMap::new();
        for (i, (corners, sides)) in raw_squares.into_iter().enumerate() {
            let (c, s) = canonical_square(corners, sides);
            let key = (c, s);
            if seen.insert(key, i).is_some() {
                return Err(Error::DuplicateCell { kind: "square", index: i });
            }
            squares.push(SquareCell { corners: c, sides: s });
        }

        let mut cc = CubeComplex {
            name,
            vnames,
            vindex,
            edges,
            file_swapped: Vec::new(),
            squares,
            cubes: Vec::new(),
            ends_at: Vec::new(),
            corners_at: Vec::new(),
            cube_corners_at: Vec::new(),
            npc_cache: OnceLock::new(),
        };

        // Resolve cube faces against the stored squares.
        let mut cubes = Vec::with_capacity(raw_cubes.len());
        let mut cube_keys = BTreeMap::new();
        for (i, (corners, face_hint)) in raw_cubes.into_iter().enumerate() {
            let mut faces = [(SqId(0), 0u8); 6];
            for (f, positions) in CUBE_FACES.iter().enumerate() {
                let tuple = [
                    corners[positions[0] as usize],
                    corners[positions[1] as usize],
                    corners[positions[2] as usize],
                    corners[positions[3] as usize],
                ];
                let candidates: Vec<SqId> = match face_hint {
                    Some(h) => vec![h[f]],
                    None => (0..cc.squares.len()).map(|s| SqId(s as u32)).collect(),
                };
                let mut found = Vec::new();
                for sq in candidates {
                    for k in 0..8 {
                        let (pc, _) = cc.square_presentation(sq, k);
                        if pc == tuple {
                            found.push((sq, k));
                            break;
                        }
                    }
                }
                match found.len() {
                    1 => faces[f] = found[0],
                    n => return Err(Error::CubeFace { index: i, face: f, found: n }),
                }
            }
            let cell = CubeCell { corners, faces };
            let mut key: Vec<SqId> = faces.iter().map(|(s, _)| *s).collect();
            key.sort();
            if cube_keys.insert(key, i).is_some() {
                return Err(Error::DuplicateCell { kind: "cube", index: i });
            }
            cubes.push(cell);
        }
        cc.cubes = cubes;

        // Incidence tables.
        let n = cc.vnames.len();
        cc.ends_at = vec![Vec::new(); n];
        for (ei, e) in cc.edges.iter().enumerate() {
            for w in 0..2u8 {
                cc.ends_at[e.endpoint(w).idx()].push(End { e: EId(ei as u32), w });
            }
        }
        for v in cc.ends_at.iter_mut() {
            v.sort();
        }
        cc.corners_at = vec![Vec::new(); n];
        for (si, s) in cc.squares.iter().enumerate() {
            for pos in 0..4u8 {
                cc.corners_at[s.corners[pos as usize].idx()].push((SqId(si as u32), pos));
            }
        }
        cc.cube_corners_at = vec![Vec::new(); n];
        for (ci, c) in cc.cubes.iter().enumerate() {
            for pos in 0..8u8 {
                cc.cube_corners_at[c.corners[pos as usize].idx()].push((CId(ci as u32), pos));
            }
        }

        // Validate cube corner structure early: each corner must see exactly
        // three distinct edge-ends, each shared by two of its three faces.
        for ci in 0..cc.cubes.len() {
            for pos in 0..8u8 {
                cc.cube_corner_ends(CId(ci as u32), pos).map_err(|e| {
                    Error::Malformed(format!("cube #{ci} corner {pos}: {e}"))
                })?;
            }
        }

        Ok(cc)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn vertex_count(&self) -> usize {
        self.vnames.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn square_count(&self) -> usize {
        self.squares.len()
    }
    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }
    pub fn dim(&self) -> usize {
        if !self.cubes.is_empty() {
            3
        } else if !self.squares.is_empty() {
            2
        } else if !self.edges.is_empty() {
            1
        } else {
            0
        }
    }
    pub fn vname(&self, v: VId) -> &str {
        &self.vnames[v.idx()]
    }
    pub fn vid(&self, name: &str) -> Result<VId> {
        self.vindex.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }
    pub fn edge(&self, e: EId) -> &EdgeCell {
        &self.edges[e.idx()]
    }
    pub fn square(&self, s: SqId) -> &SquareCell {
        &self.squares[s.idx()]
    }
    pub fn cube(&self, c: CId) -> &CubeCell {
        &self.cubes[c.idx()]
    }
    pub fn edges(&self) -> &[EdgeCell] {
        &self.edges
    }
    pub fn squares(&self) -> &[SquareCell] {
        &self.squares
    }
    pub fn cubes(&self) -> &[CubeCell] {
        &self.cubes
    }
    pub fn ends_at(&self, v: VId) -> &[End] {
        &self.ends_at[v.idx()]
    }
    pub fn corners_at(&self, v: VId) -> &[(SqId, u8)] {
        &self.corners_at[v.idx()]
    }
    pub fn cube_corners_at(&self, v: VId) -> &[(CId, u8)] {
        &self.cube_corners_at[v.idx()]
    }
    pub fn end_vertex(&self, end: End) -> VId {
        self.edges[end.e.idx()].endpoint(end.w)
    }

    /// Find the stored square equal to the given cell up to symmetry.
    pub fn find_square(&self, corners: [VId; 4], sides: [SideRef; 4]) -> Option<SqId> {
        let (c, s) = canonical_square(corners, sides);
        self.squares
            .iter()
            .position(|cell| cell.corners == c && cell.sides == s)
            .map(|i| SqId(i as u32))
    }

    /// The square's corners and sides under presentation `k` (0..8).
    pub fn square_presentation(&self, s: SqId, k: u8) -> ([VId; 4], [SideRef; 4]) {
        let cell = &self.squares[s.idx()];
        let (cp, sp, fl) = SQUARE_SYMS[k as usize];
        let c = [
            cell.corners[cp[0] as usize],
            cell.corners[cp[1] as usize],
            cell.corners[cp[2] as usize],
            cell.corners[cp[3] as usize],
        ];
        let s = [0usize, 1, 2, 3].map(|i| {
            let o = cell.sides[sp[i] as usize];
            SideRef { e: o.e, rev: o.rev ^ fl[i] }
        });
        (c, s)
    }

    /// The two edge-ends meeting at corner `pos` of square `s` (both incident
    /// to the corner vertex).
    pub fn corner_ends(&self, s: SqId, pos: u8) -> (End, End) {
        let cell = &self.squares[s.idx()];
        let [(sa, a_src), (sb, b_src)] = corner_side_roles(pos);
        let ea = cell.sides[sa as usize].end(if a_src { 0 } else { 1 });
        let eb = cell.sides[sb as usize].end(if b_src { 0 } else { 1 });
        (ea, eb)
    }

    /// Given a corner `(s, pos)` and one of its ends, the continuation data
    /// across the side carrying that end: (far corner position, far vertex,
    /// the end at the far corner that continues around the square).
    pub fn corner_across(&self, s: SqId, pos: u8, end: End) -> (u8, VId, End) {
        let cell = &self.squares[s.idx()];
        let [(sa, a_src), (sb, b_src)] = corner_side_roles(pos);
        let (side, src) = if cell.sides[sa as usize].end(if a_src { 0 } else { 1 }) == end {
            (sa, a_src)
        } else {
            debug_assert_eq!(cell.sides[sb as usize].end(if b_src { 0 } else { 1 }), end);
            (sb, b_src)
        };
        let (pa, pb) = SIDE_CORNERS[side as usize];
        let far_pos = if src { pb } else { pa };
        let far_v = cell.corners[far_pos as usize];
        // The far corner's other side-end (the one not on `side`).
        let (fa, fb) = self.corner_ends(s, far_pos);
        let arrived = cell.sides[side as usize].end(if src { 1 } else { 0 });
        let cont = if fa == arrived { fb } else { fa };
        debug_assert!(fa == arrived || fb == arrived);
        (far_pos, far_v, cont)
    }

    /// The three edge-ends at a cube corner (its link triangle).
    pub fn cube_corner_ends(&self, c: CId, pos: u8) -> Result<[End; 3]> {
        let cell = &self.cubes[c.idx()];
        let mut ends: Vec<End> = Vec::with_capacity(6);
        for (f, positions) in CUBE_FACES.iter().enumerate() {
            if let Some(q) = positions.iter().position(|&p| p == pos) {
                let (sq, k) = cell.faces[f];
                let (_, ps) = self.square_presentation(sq, k);
                let [(sa, a_src), (sb, b_src)] = corner_side_roles(q as u8);
                ends.push(ps[sa as usize].end(if a_src { 0 } else { 1 }));
                ends.push(ps[sb as usize].end(if b_src { 0 } else { 1 }));
            }
        }
        ends.sort();
        if ends.len() != 6 || ends.chunks(2).any(|c| c[0] != c[1]) {
            return Err(Error::Malformed("cube corner does not close up".into()));
        }
        let tri = [ends[0], ends[2], ends[4]];
        if tri[0] == tri[1] || tri[1] == tri[2] {
            return Err(Error::Malformed("cube corner with repeated edge-end".into()));
        }
        Ok(tri)
    }

    /// The three edge-ends at a cube corner labeled by direction: toward the
    /// x, y, and z neighbor respectively. Each end is shared by exactly two
    /// of the corner's three faces, which determines the labeling.
    pub fn cube_corner_directed_ends(&self, c: CId, pos: u8) -> Result<[End; 3]> {
        let cell = &self.cubes[c.idx()];
        // Faces touching pos: z-face spans (x,y), y-face spans (x,z),
        // x-face spans (y,z).
        let fz = ((pos >> 2) & 1) as usize;
        let fy = 2 + ((pos >> 1) & 1) as usize;
        let fx = 4 + (pos & 1) as usize;
        let ends_on = |f: usize| -> [End; 2] {
            let q = CUBE_FACES[f].iter().position(|&p| p == pos).expect("corner on face");
            let (sq, k) = cell.faces[f];
            let (_, ps) = self.square_presentation(sq, k);
            let [(sa, a_src), (sb, b_src)] = corner_side_roles(q as u8);
            [
                ps[sa as usize].end(if a_src { 0 } else { 1 }),
                ps[sb as usize].end(if b_src { 0 } else { 1 }),
            ]
        };
        let (ez, ey, ex) = (ends_on(fz), ends_on(fy), ends_on(fx));
        let common = |a: [End; 2], b: [End; 2]| -> Result<End> {
            let shared: Vec<End> =
                a.iter().copied().filter(|e| b.contains(e)).collect();
            if shared.len() == 1 {
                Ok(shared[0])
            } else {
                Err(Error::Malformed(format!(
                    "cube {} corner {pos} has ambiguous direction ends",
                    c.0
                )))
            }
        };
        Ok([common(ez, ey)?, common(ez, ex)?, common(ey, ex)?])
    }

    pub fn link(&self, v: VId) -> LinkView {
        let ends = self.ends_at[v.idx()].clone();
        let pos_of = |end: End| ends.binary_search(&end).expect("end incident to vertex");
        let mut pairs = Vec::new();
        for &(sq, pos) in &self.corners_at[v.idx()] {
            let (a, b) = self.corner_ends(sq, pos);
            let (ia, ib) = (pos_of(a), pos_of(b));
            pairs.push((ia.min(ib), ia.max(ib), sq, pos));
        }
        let mut triangles = Vec::new();
        for &(c, pos) in &self.cube_corners_at[v.idx()] {
            let tri = self.cube_corner_ends(c, pos).expect("validated at construction");
            let mut t = [pos_of(tri[0]), pos_of(tri[1]), pos_of(tri[2])];
            t.sort();
            triangles.push((t, c, pos));
        }
        LinkView { ends, pairs, triangles }
    }

    /// Gromov link condition: every vertex link is a flag simplicial complex.
    /// The result is cached; `npc_ok()` reads the cached verdict.
    pub fn validate_npc(&self) -> &NpcReport {
        self.npc_cache.get_or_init(|| {
            let mut issues = Vec::new();
            for vi in 0..self.vnames.len() {
                let v = VId(vi as u32);
                let link = self.link(v);
                let m = link.ends.len();
                let mut adj = vec![false; m * m];
                for &(a, b, sq, pos) in &link.pairs {
                    if a == b {
                        issues.push(LinkIssue {
                            vertex: v,
                            kind: LinkIssueKind::CornerLoop,
                            detail: format!("square {} corner {}", sq.0, pos),
                        });
                        continue;
                    }
                    if adj[a * m + b] {
                        issues.push(LinkIssue {
                            vertex: v,
                            kind: LinkIssueKind::ParallelCorners,
                            detail: format!("square {} corner {}", sq.0, pos),
                        });
                    }
                    adj[a * m + b] = true;
                    adj[b * m + a] = true;
                }
                let mut tri_filled = std::collections::BTreeMap::new();
                for &(t, c, pos) in &link.triangles {
                    if tri_filled.insert(t, (c, pos)).is_some() {
                        issues.push(LinkIssue {
                            vertex: v,
                            kind: LinkIssueKind::DuplicateTriangle,
                            detail: format!("cube {} corner {}", c.0, pos),
                        });
                    }
                }
                // Flag condition: each link triangle is a cube corner, and no
                // 4-clique exists (it would demand a 4-cube).
                for a in 0..m {
                    for b in a + 1..m {
                        if !adj[a * m + b] {
                            continue;
                        }
                        for c in b + 1..m {
                            if !(adj[a * m + c] && adj[b * m + c]) {
                                continue;
                            }
                            if !tri_filled.contains_key(&[a, b, c]) {
                                issues.push(LinkIssue {
                                    vertex: v,
                                    kind: LinkIssueKind::EmptyTriangle,
                                    detail: format!(
                                        "ends of edges {}, {}, {}",
                                        link.ends[a].e.0, link.ends[b].e.0, link.ends[c].e.0
                                    ),
                                });
                                continue;
                            }
                            for d in c + 1..m {
                                if adj[a * m + d] && adj[b * m + d] && adj[c * m + d] {
                                    issues.push(LinkIssue {
                                        vertex: v,
                                        kind: LinkIssueKind::AboveDimensionCap,
                                        detail: format!(
                                            "ends of edges {}, {}, {}, {}",
                                            link.ends[a].e.0,
                                            link.ends[b].e.0,
                                            link.ends[c].e.0,
                                            link.ends[d].e.0
                                        ),
                                    });
                                }
                            }
                        }
                    }
                }
            }
            NpcReport { ok: issues.is_empty(), issues }
        })
    }

    pub fn npc_ok(&self) -> bool {
        self.validate_npc().ok
    }

    pub fn require_npc(&self) -> Result<()> {
        let rep = self.validate_npc();
        if rep.ok {
            Ok(())
        } else {
            let first = &rep.issues[0];
            Err(Error::NotNpc(format!(
                "link failure at `{}`: {:?} ({})",
                self.vname(first.vertex),
                first.kind,
                first.detail
            )))
        }
    }

    /// Serialize back to the file form. Squares with loop or parallel-edge
    /// sides are written explicitly so the round trip is faithful.
    pub fn emit(&self) -> ComplexSpec {
        let nm = |v: VId| self.vnames[v.idx()].clone();
        let squares = self
            .squares
            .iter()
            .map(|sq| {
                let corners =
                    [nm(sq.corners[0]), nm(sq.corners[1]), nm(sq.corners[2]), nm(sq.corners[3])];
                let needs_explicit = sq.sides.iter().any(|s| {
                    let ec = &self.edges[s.e.idx()];
                    ec.is_loop()
                        || self
                            .edges
                            .iter()
                            .filter(|o| {
                                (o.ends[0] == ec.ends[0] && o.ends[1] == ec.ends[1])
                                    || (o.ends[0] == ec.ends[1] && o.ends[1] == ec.ends[0])
                            })
                            .count()
                            > 1
                });
                if needs_explicit {
                    let edges = [0, 1, 2, 3].map(|i| {
                        let s: SideRef = sq.sides[i];
                        let k = s.e.0 as i64 + 1;
                        if s.rev {
                            -k
                        } else {
                            k
                        }
                    });
                    SquareSpec::Explicit { corners, edges }
                } else {
                    SquareSpec::Corners(corners)
                }
            })
            .collect();
        ComplexSpec {
            name: self.name.clone(),
            vertices: self.vnames.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (nm(e.ends[0]), nm(e.ends[1])))
                .collect(),
            squares,
            cubes3: self
                .cubes
                .iter()
                .map(|c| {
                    [
                        nm(c.corners[0]),
                        nm(c.corners[1]),
                        nm(c.corners[2]),
                        nm(c.corners[3]),
                        nm(c.corners[4]),
                        nm(c.corners[5]),
                        nm(c.corners[6]),
                        nm(c.corners[7]),
                    ]
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn grid_counts() {
        let cx = fixtures::grid(2, 2);
        assert_eq!(cx.vertex_count(), 9);
        assert_eq!(cx.edge_count(), 12);
        assert_eq!(cx.square_count(), 4);
        assert!(cx.npc_ok());
    }

    #[test]
    fn torus_counts_and_link() {
        let cx = fixtures::torus();
        assert_eq!(cx.vertex_count(), 1);
        assert_eq!(cx.edge_count(), 2);
        assert_eq!(cx.square_count(), 1);
        // One-vertex link is a 4-cycle: 4 ends, 4 corner pairs, flag.
        let link = cx.link(VId(0));
        assert_eq!(link.ends.len(), 4);
        assert_eq!(link.pairs.len(), 4);
        assert!(cx.npc_ok());
    }

    #[test]
    fn dangling_edge_rejected() {
        let spec = ComplexSpec {
            name: "bad".into(),
            vertices: vec!["a".into()],
            edges: vec![("a".into(), "zz".into())],
            squares: vec![],
            cubes3: vec![],
        };
        assert!(matches!(CubeComplex::build(&spec), Err(Error::DanglingCell { .. })));
    }

    #[test]
    fn three_squares_fail_flag() {
        // Three squares pairwise sharing edges around one vertex: the link at
        // the center is an empty triangle.
        let spec = ComplexSpec {
            name: "tripod".into(),
            vertices: ["c", "x", "y", "z", "xy", "yz", "zx"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            edges: vec![
                ("c".into(), "x".into()),
                ("c".into(), "y".into()),
                ("c".into(), "z".into()),
                ("x".into(), "xy".into()),
                ("y".into(), "xy".into()),
                ("y".into(), "yz".into()),
                ("z".into(), "yz".into()),
                ("z".into(), "zx".into()),
                ("x".into(), "zx".into()),
            ],
            squares: vec![
                SquareSpec::Corners(["c".into(), "x".into(), "y".into(), "xy".into()]),
                SquareSpec::Corners(["c".into(), "y".into(), "z".into(), "yz".into()]),
                SquareSpec::Corners(["c".into(), "z".into(), "x".into(), "zx".into()]),
            ],
            cubes3: vec![],
        };
        let cx = CubeComplex::build(&spec).unwrap();
        let rep = cx.validate_npc();
        assert!(!rep.ok);
        assert!(rep.issues.iter().any(|i| i.kind == LinkIssueKind::EmptyTriangle));
    }

    #[test]
    fn duplicate_square_rejected() {
        let spec = ComplexSpec {
            name: "dup".into(),
            vertices: ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
            edges: vec![
                ("a".into(), "b".into()),
                ("a".into(), "c".into()),
                ("b".into(), "d".into()),
                ("c".into(), "d".into()),
            ],
            squares: vec![
                SquareSpec::Corners(["a".into(), "b".into(), "c".into(), "d".into()]),
                // Same square presented with a different corner at the origin.
                SquareSpec::Corners(["b".into(), "a".into(), "d".into(), "c".into()]),
            ],
            cubes3: vec![],
        };
        assert!(matches!(
            CubeComplex::build(&spec),
            Err(Error::DuplicateCell { kind: "square", .. })
        ));
    }

    #[test]
    fn emit_round_trip() {
        for cx in [fixtures::grid(2, 3), fixtures::torus(), fixtures::klein()] {
            let spec = cx.emit();
            let back = CubeComplex::build(&spec).unwrap();
            assert_eq!(back.vertex_count(), cx.vertex_count());
            assert_eq!(back.edge_count(), cx.edge_count());
            assert_eq!(back.squares(), cx.squares());
        }
    }

    #[test]
    fn cube_link_triangles() {
        let cx = fixtures::cube3();
        assert_eq!(cx.vertex_count(), 8);
        assert_eq!(cx.edge_count(), 12);
        assert_eq!(cx.square_count(), 6);
        assert_eq!(cx.cube_count(), 1);
        let link = cx.link(VId(0));
        assert_eq!(link.ends.len(), 3);
        assert_eq!(link.pairs.len(), 3);
        assert_eq!(link.triangles.len(), 1);
        assert!(cx.npc_ok());
    }
}
