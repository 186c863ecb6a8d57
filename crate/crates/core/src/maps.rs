//! Combinatorial maps between cube complexes and the local isometry check
//! used for attaching edge spaces: the link map must be injective with full
//! image (edges and triangles).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::CubeComplex;
use crate::error::{Error, Result};
use crate::ids::{EId, End, SideRef, SqId, VId};

/// File form. Edge map keys are source edge indices (0-based, as strings);
/// values are signed 1-based target edge references, negative for reversed,
/// both read against the orientations written in the declaring files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub source: String,
    pub target: String,
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, i64>,
}

/// A validated cellular map: vertices to vertices, edges to edge traversals,
/// squares to squares. Sources of dimension 3 are not supported here (no
/// attachment in this crate needs them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMap {
    pub v: Vec<VId>,
    pub e: Vec<SideRef>,
    pub sq: Vec<SqId>,
}

impl CellMap {
    pub fn identity(cx: &CubeComplex) -> CellMap {
        CellMap {
            v: (0..cx.vertex_count() as u32).map(VId).collect(),
            e: (0..cx.edge_count() as u32).map(|e| SideRef { e: EId(e), rev: false }).collect(),
            sq: (0..cx.square_count() as u32).map(SqId).collect(),
        }
    }

    /// Check incidence and resolve square images.
    pub fn validate(src: &CubeComplex, tgt: &CubeComplex, v: Vec<VId>, e: Vec<SideRef>) -> Result<CellMap> {
        if src.cube_count() > 0 {
            return Err(Error::BadMap("maps from 3-dimensional complexes are not supported".into()));
        }
        if v.len() != src.vertex_count() || e.len() != src.edge_count() {
            return Err(Error::BadMap("vertex or edge table has the wrong length".into()));
        }
        for (ei, img) in e.iter().enumerate() {
            if img.e.idx() >= tgt.edge_count() {
                return Err(Error::BadMap(format!("edge {ei} maps to a missing edge")));
            }
            let s = src.edge(EId(ei as u32));
            let t = tgt.edge(img.e);
            let (tsrc, ttgt) =
                if img.rev { (t.ends[1], t.ends[0]) } else { (t.ends[0], t.ends[1]) };
            if v[s.ends[0].idx()] != tsrc || v[s.ends[1].idx()] != ttgt {
                return Err(Error::BadMap(format!("edge {ei} does not commute with vertices")));
            }
        }
        let mut sq = Vec::with_capacity(src.square_count());
        for (si, cell) in src.squares().iter().enumerate() {
            let corners = [
                v[cell.corners[0].idx()],
                v[cell.corners[1].idx()],
                v[cell.corners[2].idx()],
                v[cell.corners[3].idx()],
            ];
            let sides = [0, 1, 2, 3].map(|i| {
                let s: SideRef = cell.sides[i];
                let img = e[s.e.idx()];
                SideRef { e: img.e, rev: img.rev ^ s.rev }
            });
            match tgt.find_square(corners, sides) {
                Some(t) => sq.push(t),
                None => {
                    return Err(Error::BadMap(format!("square {si} has no image square")));
                }
            }
        }
        Ok(CellMap { v, e, sq })
    }

    pub fn from_spec(spec: &MapSpec, src: &CubeComplex, tgt: &CubeComplex) -> Result<CellMap> {
        let mut v = Vec::with_capacity(src.vertex_count());
        for i in 0..src.vertex_count() {
            let name = src.vname(VId(i as u32));
            let img = spec
                .vertex_map
                .get(name)
                .ok_or_else(|| Error::BadMap(format!("vertex `{name}` has no image")))?;
            v.push(tgt.vid(img)?);
        }
        let mut e = Vec::with_capacity(src.edge_count());
        for i in 0..src.edge_count() {
            let r = *spec
                .edge_map
                .get(&i.to_string())
                .ok_or_else(|| Error::BadMap(format!("edge {i} has no image")))?;
            if r == 0 || r.unsigned_abs() as usize > tgt.edge_count() {
                return Err(Error::BadMap(format!("edge {i} maps to invalid reference {r}")));
            }
            let img = EId((r.unsigned_abs() - 1) as u32);
            let rev = (r < 0)
                ^ src.edge_file_swapped(EId(i as u32))
                ^ tgt.edge_file_swapped(img);
            e.push(SideRef { e: img, rev });
        }
        CellMap::validate(src, tgt, v, e)
    }

    pub fn emit(&self, src: &CubeComplex, tgt: &CubeComplex) -> MapSpec {
        MapSpec {
            source: src.name().to_string(),
            target: tgt.name().to_string(),
            vertex_map: (0..src.vertex_count())
                .map(|i| {
                    (src.vname(VId(i as u32)).to_string(), tgt.vname(self.v[i]).to_string())
                })
                .collect(),
            edge_map: self
                .e
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let k = s.e.0 as i64 + 1;
                    let rev = s.rev
                        ^ src.edge_file_swapped(EId(i as u32))
                        ^ tgt.edge_file_swapped(s.e);
                    (i.to_string(), if rev { -k } else { k })
                })
                .collect(),
        }
    }

    pub fn end_image(&self, end: End) -> End {
        let img = self.e[end.e.idx()];
        End { e: img.e, w: end.w ^ img.rev as u8 }
    }

    pub fn side_image(&self, s: SideRef) -> SideRef {
        let img = self.e[s.e.idx()];
        SideRef { e: img.e, rev: img.rev ^ s.rev }
    }
}

/// Injective on each link with full image: any target corner or triangle on
/// image ends must come from the source link.
pub fn check_local_isometry(
    src: &CubeComplex,
    tgt: &CubeComplex,
    map: &CellMap,
    edge_label: &str,
    side_label: &'static str,
) -> Result<()> {
    let fail = |why: String| -> Error {
        Error::NotLocalIsometry { edge: edge_label.to_string(), side: side_label, why }
    };
    for vi in 0..src.vertex_count() {
        let v = VId(vi as u32);
        let w = map.v[vi];
        let src_link = src.link(v);
        let tgt_link = tgt.link(w);
        // Injectivity of the end map at v.
        let mut images = BTreeMap::new();
        for &end in &src_link.ends {
            let img = map.end_image(end);
            if let Some(prev) = images.insert(img, end) {
                return Err(fail(format!(
                    "ends of edges {} and {} at `{}` fold together",
                    prev.e.0,
                    end.e.0,
                    src.vname(v)
                )));
            }
        }
        // Fullness for link edges: target corners on two image ends must be
        // matched by a source corner on the preimages.
        let mut src_pairs = BTreeSet::new();
        for &(a, b, _, _) in &src_link.pairs {
            let (ia, ib) = (
                map.end_image(src_link.ends[a]),
                map.end_image(src_link.ends[b]),
            );
            src_pairs.insert((ia.min(ib), ia.max(ib)));
        }
        for &(a, b, sq, _) in &tgt_link.pairs {
            let (ea, eb) = (tgt_link.ends[a], tgt_link.ends[b]);
            if images.contains_key(&ea) && images.contains_key(&eb) {
                let key = (ea.min(eb), ea.max(eb));
                if !src_pairs.contains(&key) {
                    return Err(fail(format!(
                        "image misses the corner of square {} at `{}`",
                        sq.0,
                        tgt.vname(w)
                    )));
                }
            }
        }
        // Fullness for link triangles.
        let mut src_tris = BTreeSet::new();
        for &(t, _, _) in &src_link.triangles {
            let mut img = [
                map.end_image(src_link.ends[t[0]]),
                map.end_image(src_link.ends[t[1]]),
                map.end_image(src_link.ends[t[2]]),
            ];
            img.sort();
            src_tris.insert(img);
        }
        for &(t, c, _) in &tgt_link.triangles {
            let tri = [tgt_link.ends[t[0]], tgt_link.ends[t[1]], tgt_link.ends[t[2]]];
            if tri.iter().all(|end| images.contains_key(end)) && !src_tris.contains(&tri) {
                return Err(fail(format!(
                    "image misses the corner of cube {} at `{}`",
                    c.0,
                    tgt.vname(w)
                )));
            }
        }
    }
    Ok(())
}
