//! Graphs of cube complexes: vertex and edge spaces over a finite graph,
//! glued along local-isometry attachments. Loop edges are subdivided on
//! ingest (the underlying graph is kept simplicial by inserting a midpoint
//! vertex carrying a copy of the edge space, attached by identities), so
//! downstream tree machinery never sees a chamber glued to itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::{ComplexSpec, CubeComplex, EdgeCell};
use crate::error::{Error, Result};
use crate::ids::{EId, SideRef, SqId, VId};
use crate::maps::{check_local_isometry, CellMap, MapSpec};

/// Underlying graph: named vertices and endpoint pairs. Loops are allowed
/// here and removed during ingest; parallel edges are kept as they are.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

/// The two attaching maps of one edge space: `minus` lands in the space of
/// the first endpoint, `plus` in the space of the second.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachmentSpec {
    pub minus: MapSpec,
    pub plus: MapSpec,
}

/// Inline working form of a graph of cube complexes. Vertex spaces are keyed
/// by graph vertex name; edge spaces and attachments by the edge index
/// rendered in decimal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GogSpec {
    pub name: String,
    pub graph: GraphSpec,
    pub vertex_spaces: BTreeMap<String, ComplexSpec>,
    pub edge_spaces: BTreeMap<String, ComplexSpec>,
    pub attachments: BTreeMap<String, AttachmentSpec>,
}

pub struct GogVertex {
    pub name: String,
    pub space: CubeComplex,
}

pub struct GogEdge {
    pub name: String,
    /// Indices into `Gog::vertices`; never equal after subdivision.
    pub ends: [usize; 2],
    pub space: CubeComplex,
    /// `maps[0]` attaches into the space of `ends[0]`, `maps[1]` into
    /// `ends[1]`.
    pub maps: [CellMap; 2],
    /// True for the two halves a loop is subdivided into on ingest; crossing
    /// a half edge counts as half a step of original path length.
    pub half: bool,
}

/// A validated graph of cube complexes: simplicial underlying graph, all
/// spaces nonpositively curved, all attachments local isometries.
pub struct Gog {
    name: String,
    vertices: Vec<GogVertex>,
    edges: Vec<GogEdge>,
}

impl Gog {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[GogVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GogEdge] {
        &self.edges
    }

    pub fn vertex_named(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::BadGog(format!("no graph vertex named `{name}`")))
    }

    /// Edge incidences at a graph vertex as (edge index, side) pairs, side 0
    /// meaning the vertex is the minus end.
    pub fn incidences(&self, v: usize) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            for side in 0..2u8 {
                if e.ends[side as usize] == v {
                    out.push((i, side));
                }
            }
        }
        out
    }

    pub fn build(spec: &GogSpec) -> Result<Gog> {
        let mut vindex: BTreeMap<&str, usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        for name in &spec.graph.vertices {
            if vindex.contains_key(name.as_str()) {
                return Err(Error::BadGog(format!("duplicate graph vertex `{name}`")));
            }
            let vspec = spec
                .vertex_spaces
                .get(name)
                .ok_or_else(|| Error::BadGog(format!("vertex `{name}` has no space")))?;
            let space = CubeComplex::build(vspec)?;
            space.require_npc()?;
            vindex.insert(name.as_str(), vertices.len());
            vertices.push(GogVertex { name: name.clone(), space });
        }
        for key in spec.vertex_spaces.keys() {
            if !vindex.contains_key(key.as_str()) {
                return Err(Error::BadGog(format!("vertex space `{key}` has no graph vertex")));
            }
        }

        let mut edges: Vec<GogEdge> = Vec::new();
        for (i, ends) in spec.graph.edges.iter().enumerate() {
            let key = i.to_string();
            let espec = spec
                .edge_spaces
                .get(&key)
                .ok_or_else(|| Error::BadGog(format!("edge {i} has no space")))?;
            let att = spec
                .attachments
                .get(&key)
                .ok_or_else(|| Error::BadGog(format!("edge {i} has no attachments")))?;
            let u = *vindex
                .get(ends[0].as_str())
                .ok_or_else(|| Error::BadGog(format!("edge {i} endpoint `{}` unknown", ends[0])))?;
            let w = *vindex
                .get(ends[1].as_str())
                .ok_or_else(|| Error::BadGog(format!("edge {i} endpoint `{}` unknown", ends[1])))?;

            let space = CubeComplex::build(espec)?;
            space.require_npc()?;
            let minus = CellMap::from_spec(&att.minus, &space, &vertices[u].space)?;
            if u == w {
                // Subdivide the loop: a midpoint vertex carries a copy of the
                // edge space, and the two half-edges attach by identities on
                // the midpoint side.
                let mid_name = format!("e{i}^");
                if vindex.contains_key(mid_name.as_str()) || vertices.iter().any(|v| v.name == mid_name) {
                    return Err(Error::BadGog(format!("subdivision vertex `{mid_name}` collides")));
                }
                let plus = CellMap::from_spec(&att.plus, &space, &vertices[w].space)?;
                let mid_space = CubeComplex::build(espec)?;
                let mid = vertices.len();
                vertices.push(GogVertex { name: mid_name, space: mid_space });
                let ident = CellMap::identity(&space);
                edges.push(GogEdge {
                    name: format!("e{i}-"),
                    ends: [u, mid],
                    space,
                    maps: [minus, ident],
                    half: true,
                });
                let space2 = CubeComplex::build(espec)?;
                let ident2 = CellMap::identity(&space2);
                edges.push(GogEdge {
                    name: format!("e{i}+"),
                    ends: [mid, w],
                    space: space2,
                    maps: [ident2, plus],
                    half: true,
                });
            } else {
                let plus = CellMap::from_spec(&att.plus, &space, &vertices[w].space)?;
                edges.push(GogEdge {
                    name: format!("e{i}"),
                    ends: [u, w],
                    space,
                    maps: [minus, plus],
                    half: false,
                });
            }
        }

        let gog = Gog { name: spec.name.clone(), vertices, edges };
        for e in &gog.edges {
            for side in 0..2usize {
                let label: &'static str = if side == 0 { "minus" } else { "plus" };
                check_local_isometry(
                    &e.space,
                    &gog.vertices[e.ends[side]].space,
                    &e.maps[side],
                    &e.name,
                    label,
                )?;
            }
        }
        Ok(gog)
    }
}

/// Mapping-cylinder total space: every vertex space is copied verbatim, and
/// each edge space contributes one interval edge per vertex, one square per
/// edge, and one 3-cube per square, glued along the two attachment images.
pub fn total_space(gog: &Gog) -> Result<CubeComplex> {
    let nv = gog.vertices.len();
    let mut v_off = vec![0usize; nv];
    let mut e_off = vec![0usize; nv];
    let mut sq_off = vec![0usize; nv];
    let (mut vo, mut eo, mut so) = (0usize, 0usize, 0usize);
    for (i, gv) in gog.vertices.iter().enumerate() {
        v_off[i] = vo;
        e_off[i] = eo;
        sq_off[i] = so;
        vo += gv.space.vertex_count();
        eo += gv.space.edge_count();
        so += gv.space.square_count();
    }

    let mut vnames = Vec::with_capacity(vo);
    for gv in &gog.vertices {
        for i in 0..gv.space.vertex_count() {
            vnames.push(format!("{}.{}", gv.name, gv.space.vname(VId(i as u32))));
        }
    }

    let mut edges: Vec<EdgeCell> = Vec::new();
    for (i, gv) in gog.vertices.iter().enumerate() {
        for e in gv.space.edges() {
            edges.push(EdgeCell {
                ends: [
                    VId((v_off[i] + e.ends[0].idx()) as u32),
                    VId((v_off[i] + e.ends[1].idx()) as u32),
                ],
            });
        }
    }
    // Interval edges, oriented minus-to-plus before normalization.
    let mut i_edge: Vec<Vec<(EId, bool)>> = Vec::with_capacity(gog.edges.len());
    for ge in &gog.edges {
        let (u, w) = (ge.ends[0], ge.ends[1]);
        let mut table = Vec::with_capacity(ge.space.vertex_count());
        for a in 0..ge.space.vertex_count() {
            let mv = VId((v_off[u] + ge.maps[0].v[a].idx()) as u32);
            let pv = VId((v_off[w] + ge.maps[1].v[a].idx()) as u32);
            let swap = mv > pv;
            let id = EId(edges.len() as u32);
            edges.push(EdgeCell { ends: if swap { [pv, mv] } else { [mv, pv] } });
            table.push((id, swap));
        }
        i_edge.push(table);
    }

    let mut raw_squares: Vec<([VId; 4], [SideRef; 4])> = Vec::new();
    for (i, gv) in gog.vertices.iter().enumerate() {
        for s in gv.space.squares() {
            let corners =
                [0, 1, 2, 3].map(|k| VId((v_off[i] + s.corners[k].idx()) as u32));
            let sides = [0, 1, 2, 3].map(|k| SideRef {
                e: EId((e_off[i] + s.sides[k].e.idx()) as u32),
                rev: s.sides[k].rev,
            });
            raw_squares.push((corners, sides));
        }
    }
    let mut i_sq: Vec<Vec<SqId>> = Vec::with_capacity(gog.edges.len());
    for (j, ge) in gog.edges.iter().enumerate() {
        let (u, w) = (ge.ends[0], ge.ends[1]);
        let mut table = Vec::with_capacity(ge.space.edge_count());
        for (ei, e) in ge.space.edges().iter().enumerate() {
            let (a, b) = (e.ends[0].idx(), e.ends[1].idx());
            let v00 = VId((v_off[u] + ge.maps[0].v[a].idx()) as u32);
            let v10 = VId((v_off[u] + ge.maps[0].v[b].idx()) as u32);
            let v01 = VId((v_off[w] + ge.maps[1].v[a].idx()) as u32);
            let v11 = VId((v_off[w] + ge.maps[1].v[b].idx()) as u32);
            let bot = ge.maps[0].e[ei];
            let top = ge.maps[1].e[ei];
            let sides = [
                SideRef { e: EId((e_off[u] + bot.e.idx()) as u32), rev: bot.rev },
                SideRef { e: EId((e_off[w] + top.e.idx()) as u32), rev: top.rev },
                SideRef { e: i_edge[j][a].0, rev: i_edge[j][a].1 },
                SideRef { e: i_edge[j][b].0, rev: i_edge[j][b].1 },
            ];
            table.push(SqId(raw_squares.len() as u32));
            raw_squares.push(([v00, v10, v01, v11], sides));
        }
        i_sq.push(table);
    }

    let mut raw_cubes: Vec<([VId; 8], Option<[SqId; 6]>)> = Vec::new();
    for (i, gv) in gog.vertices.iter().enumerate() {
        for c in gv.space.cubes() {
            let corners =
                [0, 1, 2, 3, 4, 5, 6, 7].map(|k| VId((v_off[i] + c.corners[k].idx()) as u32));
            let faces = [0, 1, 2, 3, 4, 5].map(|k| SqId((sq_off[i] + c.faces[k].0.idx()) as u32));
            raw_cubes.push((corners, Some(faces)));
        }
    }
    for (j, ge) in gog.edges.iter().enumerate() {
        let (u, w) = (ge.ends[0], ge.ends[1]);
        for (si, s) in ge.space.squares().iter().enumerate() {
            let mv = |k: usize| VId((v_off[u] + ge.maps[0].v[s.corners[k].idx()].idx()) as u32);
            let pv = |k: usize| VId((v_off[w] + ge.maps[1].v[s.corners[k].idx()].idx()) as u32);
            let corners = [mv(0), mv(1), mv(2), mv(3), pv(0), pv(1), pv(2), pv(3)];
            let faces = [
                SqId((sq_off[u] + ge.maps[0].sq[si].idx()) as u32),
                SqId((sq_off[w] + ge.maps[1].sq[si].idx()) as u32),
                i_sq[j][s.sides[0].e.idx()],
                i_sq[j][s.sides[1].e.idx()],
                i_sq[j][s.sides[2].e.idx()],
                i_sq[j][s.sides[3].e.idx()],
            ];
            raw_cubes.push((corners, Some(faces)));
        }
    }

    CubeComplex::assemble(format!("{}_total", gog.name), vnames, edges, raw_squares, raw_cubes)
}

fn circle_spec(name: &str) -> ComplexSpec {
    ComplexSpec {
        name: name.into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into())],
        squares: vec![],
        cubes3: vec![],
    }
}

fn torus_spec(name: &str) -> ComplexSpec {
    ComplexSpec {
        name: name.into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "v".into())],
        squares: vec![crate::complex::SquareSpec::Explicit {
            corners: ["v".into(), "v".into(), "v".into(), "v".into()],
            edges: [1, 1, 2, 2],
        }],
        cubes3: vec![],
    }
}

fn circle_attachment(src: &str, tgt: &str, edge_ref: i64) -> MapSpec {
    MapSpec {
        source: src.into(),
        target: tgt.into(),
        vertex_map: [("v".to_string(), "v".to_string())].into(),
        edge_map: [("0".to_string(), edge_ref)].into(),
    }
}

/// Two tori joined along a coordinate circle of each: the simplest
/// finite-stature example (cyclic edge group in free-abelian vertex groups).
pub fn tori_gog() -> GogSpec {
    GogSpec {
        name: "tori_gog".into(),
        graph: GraphSpec {
            vertices: vec!["u".into(), "w".into()],
            edges: vec![["u".into(), "w".into()]],
        },
        vertex_spaces: [
            ("u".to_string(), torus_spec("u")),
            ("w".to_string(), torus_spec("w")),
        ]
        .into(),
        edge_spaces: [("0".to_string(), circle_spec("c"))].into(),
        attachments: [(
            "0".to_string(),
            AttachmentSpec {
                minus: circle_attachment("c", "u", 1),
                plus: circle_attachment("c", "w", 1),
            },
        )]
        .into(),
    }
}

/// A chain of three tori where the middle vertex space is entered along its
/// first coordinate circle and left along the second: the two strips through
/// the middle chamber are transverse, so length-2 path gates degenerate to a
/// single vertex.
pub fn transverse_gog() -> GogSpec {
    GogSpec {
        name: "transverse_gog".into(),
        graph: GraphSpec {
            vertices: vec!["u".into(), "w".into(), "x".into()],
            edges: vec![["u".into(), "w".into()], ["w".into(), "x".into()]],
        },
        vertex_spaces: [
            ("u".to_string(), torus_spec("u")),
            ("w".to_string(), torus_spec("w")),
            ("x".to_string(), torus_spec("x")),
        ]
        .into(),
        edge_spaces: [
            ("0".to_string(), circle_spec("c0")),
            ("1".to_string(), circle_spec("c1")),
        ]
        .into(),
        attachments: [
            (
                "0".to_string(),
                AttachmentSpec {
                    minus: circle_attachment("c0", "u", 1),
                    plus: circle_attachment("c0", "w", 1),
                },
            ),
            (
                "1".to_string(),
                AttachmentSpec {
                    minus: circle_attachment("c1", "w", 2),
                    plus: circle_attachment("c1", "x", 1),
                },
            ),
        ]
        .into(),
    }
}

/// A wedge of two circles with an index-2 cover as edge space, attached by
/// the covering map on one side and the identity on the other. The covering
/// subgroup is normal of rank 3, so pairs of distinct elevations already
/// share a free group of rank at least 2: the cyclonormality check must fail
/// here with a non-cyclic witness.
pub fn index2_gog() -> GogSpec {
    // r: wedge of loops x (edge 1) and y (edge 2) at `v`.
    let r = ComplexSpec {
        name: "r".into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "v".into())],
        squares: vec![],
        cubes3: vec![],
    };
    // c: the connected double cover unwrapping x: two vertices, the x-lifts
    // cross between them, the y-lifts stay as loops.
    let c = ComplexSpec {
        name: "c".into(),
        vertices: vec!["c0".into(), "c1".into()],
        edges: vec![
            ("c0".into(), "c1".into()), // x-lift from c0
            ("c1".into(), "c0".into()), // x-lift from c1
            ("c0".into(), "c0".into()), // y-lift at c0
            ("c1".into(), "c1".into()), // y-lift at c1
        ],
        squares: vec![],
        cubes3: vec![],
    };
    let covering = MapSpec {
        source: "c".into(),
        target: "r".into(),
        vertex_map: [("c0".to_string(), "v".to_string()), ("c1".to_string(), "v".to_string())]
            .into(),
        edge_map: [
            ("0".to_string(), 1),
            ("1".to_string(), 1),
            ("2".to_string(), 2),
            ("3".to_string(), 2),
        ]
        .into(),
    };
    let identity = MapSpec {
        source: "c".into(),
        target: "c".into(),
        vertex_map: [("c0".to_string(), "c0".to_string()), ("c1".to_string(), "c1".to_string())]
            .into(),
        edge_map: [
            ("0".to_string(), 1),
            ("1".to_string(), 2),
            ("2".to_string(), 3),
            ("3".to_string(), 4),
        ]
        .into(),
    };
    GogSpec {
        name: "index2_gog".into(),
        graph: GraphSpec {
            vertices: vec!["r".into(), "c".into()],
            edges: vec![["r".into(), "c".into()]],
        },
        vertex_spaces: [("r".to_string(), r), ("c".to_string(), c.clone())].into(),
        edge_spaces: [("0".to_string(), c)].into(),
        attachments: [(
            "0".to_string(),
            AttachmentSpec { minus: covering, plus: identity },
        )]
        .into(),
    }
}

/// The mapping torus of the identity on a circle: a single graph loop whose
/// vertex and edge spaces are circles attached by degree-1 maps on both
/// sides. The loop is subdivided on ingest, so this is the smallest gog
/// exercising half-weight path lengths; its total space is a torus.
pub fn circle_loop_gog() -> GogSpec {
    GogSpec {
        name: "circle_loop_gog".into(),
        graph: GraphSpec { vertices: vec!["v".into()], edges: vec![["v".into(), "v".into()]] },
        vertex_spaces: [("v".to_string(), circle_spec("v"))].into(),
        edge_spaces: [("0".to_string(), circle_spec("c"))].into(),
        attachments: [(
            "0".to_string(),
            AttachmentSpec {
                minus: circle_attachment("c", "v", 1),
                plus: circle_attachment("c", "v", 1),
            },
        )]
        .into(),
    }
}

/// The connected double cover of a graph complex determined by a Z/2 edge
/// labeling (the holonomy of the cover): vertex `v` lifts to `{v}_0` and
/// `{v}_1`, and the lift of edge `i` crosses sheets exactly when `flip[i]`
/// is set. Edge `2i` is the lift of edge `i` starting on sheet 0 and edge
/// `2i + 1` the one starting on sheet 1.
fn double_cover_spec(base: &ComplexSpec, flip: &[bool], name: &str) -> ComplexSpec {
    let lift = |v: &str, s: usize| format!("{v}_{s}");
    let mut vertices = Vec::new();
    for s in 0..2 {
        for v in &base.vertices {
            vertices.push(lift(v, s));
        }
    }
    let mut edges = Vec::new();
    for (i, (u, w)) in base.edges.iter().enumerate() {
        for s in 0..2 {
            let t = if flip[i] { 1 - s } else { s };
            edges.push((lift(u, s), lift(w, t)));
        }
    }
    ComplexSpec { name: name.into(), vertices, edges, squares: vec![], cubes3: vec![] }
}

/// The covering map from `double_cover_spec(base, flip, ..)` back to `base`.
fn double_cover_attachment(src: &str, tgt: &str, base: &ComplexSpec) -> MapSpec {
    let mut vertex_map = std::collections::BTreeMap::new();
    for s in 0..2 {
        for v in &base.vertices {
            vertex_map.insert(format!("{v}_{s}"), v.clone());
        }
    }
    let mut edge_map = std::collections::BTreeMap::new();
    for i in 0..base.edges.len() {
        edge_map.insert((2 * i).to_string(), i as i64 + 1);
        edge_map.insert((2 * i + 1).to_string(), i as i64 + 1);
    }
    MapSpec { source: src.into(), target: tgt.into(), vertex_map, edge_map }
}

/// The identity attachment of a complex onto itself.
fn identity_attachment(spec: &ComplexSpec, src: &str) -> MapSpec {
    let vertex_map = spec.vertices.iter().map(|v| (v.clone(), v.clone())).collect();
    let edge_map = (0..spec.edges.len()).map(|i| (i.to_string(), i as i64 + 1)).collect();
    MapSpec { source: src.into(), target: spec.name.clone(), vertex_map, edge_map }
}

/// A tower of double covers of the wedge of two circles, in the spirit of
/// Wise's graph of graphs whose iterated edge-group intersections are free
/// groups of distinct ranks. The chain k0 - k1 - k2 - k3 - k4 attaches the
/// level-(k+1) cover to level k by its covering map and to level k+1 by the
/// identity, so the pointwise stabilizer of a descending tree path of length
/// L is (a conjugate of) the level-L covering group: free of rank 2^L + 1.
/// Each level unwraps a loop the previous level still kept closed (x, then
/// y, then x^2, then y^2), so every length adds a class the window can
/// distinguish and a stature probe must keep observing growth.
pub fn wise_gog() -> GogSpec {
    // Level 0: wedge of the loops x (edge 1) and y (edge 2).
    let k0 = ComplexSpec {
        name: "k0".into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "v".into())],
        squares: vec![],
        cubes3: vec![],
    };
    // Holonomies: unwrap x; then y (its lifts are edges 2,3); then x^2 (the
    // sheet-returning x-lifts are edges 2,3); then y^2 (the returning
    // y-lifts are edges 10,11 and 14,15).
    let flips: [Vec<usize>; 4] = [vec![0], vec![2, 3], vec![2, 3], vec![10, 11, 14, 15]];
    let mut levels = vec![k0];
    for (k, hot) in flips.iter().enumerate() {
        let base = &levels[k];
        let mut flip = vec![false; base.edges.len()];
        for &i in hot {
            flip[i] = true;
        }
        let cover = double_cover_spec(base, &flip, &format!("k{}", k + 1));
        levels.push(cover);
    }
    let mut vertex_spaces = std::collections::BTreeMap::new();
    for lvl in &levels {
        vertex_spaces.insert(lvl.name.clone(), lvl.clone());
    }
    let mut edge_spaces = std::collections::BTreeMap::new();
    let mut attachments = std::collections::BTreeMap::new();
    let mut graph_edges = Vec::new();
    for k in 0..4 {
        let base = &levels[k];
        let cover = &levels[k + 1];
        let ename = k.to_string();
        let mut fiber = cover.clone();
        fiber.name = format!("e{k}");
        let minus = double_cover_attachment(&fiber.name, &base.name, base);
        let plus = identity_attachment(cover, &fiber.name);
        edge_spaces.insert(ename.clone(), fiber);
        attachments.insert(ename, AttachmentSpec { minus, plus });
        graph_edges.push([base.name.clone(), cover.name.clone()]);
    }
    GogSpec {
        name: "wise_gog".into(),
        graph: GraphSpec {
            vertices: levels.iter().map(|l| l.name.clone()).collect(),
            edges: graph_edges,
        },
        vertex_spaces,
        edge_spaces,
        attachments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tori_total_space_counts_and_curvature() {
        let gog = Gog::build(&tori_gog()).unwrap();
        assert_eq!(gog.vertices().len(), 2);
        assert_eq!(gog.edges().len(), 1);
        let total = total_space(&gog).unwrap();
        assert_eq!(total.vertex_count(), 2);
        assert_eq!(total.edge_count(), 5);
        assert_eq!(total.square_count(), 3);
        assert!(total.npc_ok());
    }

    #[test]
    fn loop_edges_are_subdivided() {
        let gog = Gog::build(&circle_loop_gog()).unwrap();
        assert_eq!(gog.vertices().len(), 2);
        assert_eq!(gog.edges().len(), 2);
        assert_eq!(gog.vertices()[1].name, "e0^");
        assert_eq!(gog.edges()[0].name, "e0-");
        assert_eq!(gog.edges()[0].ends, [0, 1]);
        assert_eq!(gog.edges()[1].ends, [1, 0]);
        assert!(gog.edges()[0].half && gog.edges()[1].half);
        // Midpoint sides are identities onto the edge-space copy.
        let mid_side = &gog.edges()[0].maps[1];
        assert_eq!(mid_side.v.len(), gog.edges()[0].space.vertex_count());
        for (i, v) in mid_side.v.iter().enumerate() {
            assert_eq!(v.idx(), i);
        }
        let total = total_space(&gog).unwrap();
        // 1 + 1 vertices; (1 + 1) space edges + 2 * 1 interval edges; 2 * 1
        // interval squares: a torus made of two squares.
        assert_eq!(total.vertex_count(), 2);
        assert_eq!(total.edge_count(), 4);
        assert_eq!(total.square_count(), 2);
        assert!(total.npc_ok());
    }

    #[test]
    fn wise_tower_levels_are_covers() {
        let spec = wise_gog();
        assert_eq!(spec.graph.vertices, vec!["k0", "k1", "k2", "k3", "k4"]);
        for (k, name) in spec.graph.vertices.iter().enumerate() {
            let lvl = &spec.vertex_spaces[name];
            assert_eq!(lvl.vertices.len(), 1 << k);
            assert_eq!(lvl.edges.len(), 2 << k);
        }
        let gog = Gog::build(&spec).unwrap();
        assert_eq!(gog.vertices().len(), 5);
        assert_eq!(gog.edges().len(), 4);
        assert!(gog.edges().iter().all(|e| !e.half));
        let total = total_space(&gog).unwrap();
        assert!(total.npc_ok());
    }

    #[test]
    fn folding_attachment_is_rejected() {
        let mut spec = tori_gog();
        // Bend the circle attachment so it folds: a length-2 circle onto the
        // a-loop forwards then backwards.
        spec.edge_spaces.insert(
            "0".to_string(),
            ComplexSpec {
                name: "c".into(),
                vertices: vec!["v".into(), "z".into()],
                edges: vec![("v".into(), "z".into()), ("z".into(), "v".into())],
                squares: vec![],
                cubes3: vec![],
            },
        );
        spec.attachments.insert(
            "0".to_string(),
            AttachmentSpec {
                minus: MapSpec {
                    source: "c".into(),
                    target: "u".into(),
                    vertex_map: [
                        ("v".to_string(), "v".to_string()),
                        ("z".to_string(), "v".to_string()),
                    ]
                    .into(),
                    edge_map: [("0".to_string(), 1), ("1".to_string(), -1)].into(),
                },
                plus: MapSpec {
                    source: "c".into(),
                    target: "w".into(),
                    vertex_map: [
                        ("v".to_string(), "v".to_string()),
                        ("z".to_string(), "v".to_string()),
                    ]
                    .into(),
                    edge_map: [("0".to_string(), 1), ("1".to_string(), 2)].into(),
                },
            },
        );
        match Gog::build(&spec) {
            Err(Error::NotLocalIsometry { side, .. }) => assert_eq!(side, "minus"),
            other => panic!("expected a local isometry failure, got {other:?}", other = other.err()),
        }
    }

    #[test]
    fn lone_vertex_space_total_is_the_space() {
        let spec = GogSpec {
            name: "lone".into(),
            graph: GraphSpec { vertices: vec!["u".into()], edges: vec![] },
            vertex_spaces: [("u".to_string(), torus_spec("u"))].into(),
            edge_spaces: [].into(),
            attachments: [].into(),
        };
        let gog = Gog::build(&spec).unwrap();
        let total = total_space(&gog).unwrap();
        assert_eq!(total.vertex_count(), 1);
        assert_eq!(total.edge_count(), 2);
        assert_eq!(total.square_count(), 1);
        assert_eq!(total.vname(VId(0)), "u.v");
    }

    #[test]
    fn missing_pieces_are_reported() {
        let mut spec = tori_gog();
        spec.edge_spaces.clear();
        assert!(matches!(Gog::build(&spec), Err(Error::BadGog(_))));
        let mut spec = tori_gog();
        spec.graph.edges[0][1] = "nope".into();
        assert!(matches!(Gog::build(&spec), Err(Error::BadGog(_))));
        let mut spec = tori_gog();
        spec.vertex_spaces.insert("stray".into(), torus_spec("stray"));
        assert!(matches!(Gog::build(&spec), Err(Error::BadGog(_))));
    }

    #[test]
    fn covering_attachment_builds() {
        let gog = Gog::build(&index2_gog()).unwrap();
        let total = total_space(&gog).unwrap();
        // 1 + 2 vertices, (2 + 4) space + 2 interval edges, 4 interval
        // squares over the cover's edges.
        assert_eq!(total.vertex_count(), 3);
        assert_eq!(total.edge_count(), 8);
        assert_eq!(total.square_count(), 4);
        assert!(total.npc_ok());
    }

    #[test]
    fn transverse_chain_builds() {
        let gog = Gog::build(&transverse_gog()).unwrap();
        assert_eq!(gog.vertices().len(), 3);
        let total = total_space(&gog).unwrap();
        assert_eq!(total.vertex_count(), 3);
        assert_eq!(total.edge_count(), 8);
        assert_eq!(total.square_count(), 5);
        assert!(total.npc_ok());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = tori_gog();
        let text = serde_json::to_string(&spec).unwrap();
        let back: GogSpec = serde_json::from_str(&text).unwrap();
        let gog = Gog::build(&back).unwrap();
        let total = total_space(&gog).unwrap();
        assert_eq!(total.vertex_count(), 2);
        assert_eq!(total.square_count(), 3);
    }
}
