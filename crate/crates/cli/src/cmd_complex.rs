//! Commands on a single cube complex: validation, hyperplane arithmetic,
//! CAT(0) geometry, development, gates and bridges.

use std::path::Path;

use mf_core::ball::develop_ball;
use mf_core::cat0::{cat0_witness, Cat0};
use mf_core::complex::CubeComplex;
use mf_core::error::Error;
use mf_core::gates::{bridge, pitchfork, separating_walls};
use mf_core::hyperplane::{check_special, Hyperplanes};
use mf_core::ids::VId;
use serde_json::{json, Value};

use crate::load::{named_convex_set, names, parse_vertex_set, resolve_vertex, Ctx};

type Outcome = Result<(Value, i32), String>;

fn cell_counts(cx: &CubeComplex) -> Value {
    json!({
        "vertices": cx.vertex_count(),
        "edges": cx.edge_count(),
        "squares": cx.square_count(),
        "cubes": cx.cube_count(),
    })
}

/// Build the CAT(0) structure or produce the failure report (exit 2).
fn require_cat0(cx: CubeComplex) -> Result<Cat0, (Value, i32)> {
    match Cat0::new(cx) {
        Ok(g) => Ok(g),
        Err((cx, witness)) => Err((
            json!({
                "name": cx.name(),
                "cat0": false,
                "witness": witness.to_string(),
            }),
            2,
        )),
    }
}

pub fn validate(ctx: &mut Ctx, path: &Path) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let npc = cx.validate_npc().clone();
    let issues: Vec<Value> = npc
        .issues
        .iter()
        .map(|i| {
            json!({
                "vertex": cx.vname(i.vertex),
                "kind": format!("{:?}", i.kind),
                "detail": i.detail,
            })
        })
        .collect();
    let witness = cat0_witness(&cx).map(|w| w.to_string());
    if !npc.ok {
        ctx.caveat("complex is not nonpositively curved".into());
    }
    let results = json!({
        "name": cx.name(),
        "cells": cell_counts(&cx),
        "npc": { "ok": npc.ok, "issues": issues },
        "cat0": { "ok": witness.is_none(), "witness": witness },
    });
    Ok((results, if npc.ok { 0 } else { 2 }))
}

pub fn hyperplanes(ctx: &mut Ctx, path: &Path) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let hyps = Hyperplanes::compute(&cx);
    let classes: Vec<Value> = hyps
        .classes
        .iter()
        .map(|h| {
            json!({
                "id": h.id.0,
                "dual_edges": h.edges.len(),
                "two_sided": h.two_sided,
                "diam": h.diam,
                "carrier": h.carrier.iter().map(|&v| cx.vname(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let results = json!({
        "name": cx.name(),
        "count": hyps.classes.len(),
        "classes": classes,
        "crossing_pairs": hyps.crossings.len(),
    });
    Ok((results, 0))
}

pub fn distance(ctx: &mut Ctx, path: &Path, from: &str, to: &str) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let g = match require_cat0(cx) {
        Ok(g) => g,
        Err(out) => return Ok(out),
    };
    let u = g.complex().vid(from).map_err(|e| e.to_string())?;
    let v = g.complex().vid(to).map_err(|e| e.to_string())?;
    let d = g.dist(u, v);
    let geo = g.geodesic(u, v);
    let walls = g.walls_between(u, v);
    ctx.trace(format!("walls between: {:?}", walls.iter().collect::<Vec<_>>()));
    let results = json!({
        "from": from,
        "to": to,
        "distance": d,
        "geodesic": geo.iter().map(|&x| g.complex().vname(x)).collect::<Vec<_>>(),
        "separating_hyperplanes": walls.count(),
    });
    Ok((results, 0))
}

pub fn hull(ctx: &mut Ctx, path: &Path, set: &str) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let g = match require_cat0(cx) {
        Ok(g) => g,
        Err(out) => return Ok(out),
    };
    let bits = parse_vertex_set(g.complex(), set)?;
    let hull = g.hull(&bits).map_err(|e| e.to_string())?;
    let results = json!({
        "input": names(g.complex(), &bits),
        "hull": names(g.complex(), &hull),
        "size": hull.count(),
        "already_convex": hull == bits,
    });
    Ok((results, 0))
}

pub fn special(ctx: &mut Ctx, path: &Path) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let rep = check_special(&cx);
    let vn = |v: VId| cx.vname(v).to_string();
    if !rep.special {
        ctx.caveat("complex fails a specialness condition".into());
    }
    let results = json!({
        "name": cx.name(),
        "special": rep.special,
        "self_crossing": rep.self_crossing.iter()
            .map(|&(h, s)| json!({ "hyperplane": h.0, "square": s.0 }))
            .collect::<Vec<_>>(),
        "one_sided": rep.one_sided.iter().map(|h| h.0).collect::<Vec<_>>(),
        "self_osculating": rep.self_osculating.iter()
            .map(|&(h, v, e1, e2)| json!({
                "hyperplane": h.0, "vertex": vn(v), "edges": [e1.0, e2.0],
            }))
            .collect::<Vec<_>>(),
        "inter_osculating": rep.inter_osculating.iter()
            .map(|&(a, b, v, e1, e2)| json!({
                "hyperplanes": [a.0, b.0], "vertex": vn(v), "edges": [e1.0, e2.0],
            }))
            .collect::<Vec<_>>(),
    });
    Ok((results, if rep.special { 0 } else { 2 }))
}

pub fn develop(ctx: &mut Ctx, path: &Path, radius: u32, basepoint: Option<&str>) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let bp = resolve_vertex(&cx, basepoint)?;
    let ball = match develop_ball(&cx, bp, radius, ctx.cell_budget) {
        Ok(b) => b,
        Err(Error::NotNpc(msg)) => {
            ctx.caveat("development requires a nonpositively curved base".into());
            return Ok((json!({ "ok": false, "error": msg }), 2));
        }
        Err(e) => return Err(e.to_string()),
    };
    if let Some(t) = &mut ctx.trace {
        let mut layers = vec![0usize; radius as usize + 1];
        for v in 0..ball.complex().vertex_count() {
            layers[ball.dist_to_base(VId(v as u32)) as usize] += 1;
        }
        for (d, n) in layers.iter().enumerate() {
            t.push(format!("layer {d}: {n} vertices"));
        }
    }
    let results = json!({
        "ok": true,
        "base": cx.name(),
        "basepoint": cx.vname(bp),
        "radius": radius,
        "cells": cell_counts(ball.complex()),
        "interior_vertices": ball.interior().count(),
        "boundary_vertices": ball.boundary().count(),
        "ball": serde_json::to_value(ball.complex().emit()).expect("ball emits"),
    });
    Ok((results, 0))
}

pub fn gate(ctx: &mut Ctx, path: &Path, set_a: &str, set_b: &str) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let g = match require_cat0(cx) {
        Ok(g) => g,
        Err(out) => return Ok(out),
    };
    let a = named_convex_set(&g, set_a, "A", ctx)?;
    let b = named_convex_set(&g, set_b, "B", ctx)?;
    let left = pitchfork(&g, &a, &b).map_err(|e| e.to_string())?;
    let right = pitchfork(&g, &b, &a).map_err(|e| e.to_string())?;
    let walls = separating_walls(&g, &a, &b);
    let results = json!({
        "a": names(g.complex(), &a.verts),
        "b": names(g.complex(), &b.verts),
        "projection_in_a": names(g.complex(), &left.verts),
        "projection_in_b": names(g.complex(), &right.verts),
        "separating_hyperplanes": walls.count(),
    });
    Ok((results, 0))
}

pub fn bridge_cmd(ctx: &mut Ctx, path: &Path, set_a: &str, set_b: &str) -> Outcome {
    let cx = ctx.load_complex(path)?;
    let g = match require_cat0(cx) {
        Ok(g) => g,
        Err(out) => return Ok(out),
    };
    let a = named_convex_set(&g, set_a, "A", ctx)?;
    let b = named_convex_set(&g, set_b, "B", ctx)?;
    let br = bridge(&g, &a, &b).map_err(|e| e.to_string())?;
    let part = |s: &mf_core::ConvexSet| {
        json!({
            "vertices": names(g.complex(), &s.verts),
            "size": s.verts.count(),
            "diam": g.induced_diameter(&s.verts),
        })
    };
    let results = json!({
        "left": part(&br.left),
        "right": part(&br.right),
        "corridor": part(&br.corridor),
        "span": part(&br.span),
    });
    Ok((results, 0))
}
