//! Graph-of-spaces commands: structural validation, the total space, the
//! developed tree window, path stabilizers, cyclonormality, and the stature
//! probe.

use std::path::Path;

use mf_core::gog::{total_space, Gog};
use mf_core::tree::{check_cyclonormal, stature_probe, CycloMode, TreeWindow, Verdict};
use serde_json::{json, Value};

use crate::load::Ctx;

type Outcome = Result<(Value, i32), String>;

/// Build the gog; structural failures are the verdict of `gog validate` but
/// input errors everywhere else.
fn build(ctx: &mut Ctx, path: &Path) -> Result<Result<Gog, String>, String> {
    let spec = ctx.load_gog_spec(path)?;
    match Gog::build(&spec) {
        Ok(g) => Ok(Ok(g)),
        Err(e) => Ok(Err(e.to_string())),
    }
}

fn require_gog(ctx: &mut Ctx, path: &Path) -> Result<Gog, String> {
    build(ctx, path)?.map_err(|e| format!("`{}`: {e}", path.display()))
}

fn resolve_root(gog: &Gog, root: Option<&str>) -> Result<usize, String> {
    match root {
        Some(name) => gog.vertex_named(name).map_err(|e| e.to_string()),
        None => Ok(0),
    }
}

fn has_half_edges(gog: &Gog) -> bool {
    gog.edges().iter().any(|e| e.half)
}

pub fn validate(ctx: &mut Ctx, path: &Path) -> Outcome {
    let gog = match build(ctx, path)? {
        Ok(g) => g,
        Err(e) => {
            ctx.caveat("graph of spaces failed validation".into());
            return Ok((json!({ "ok": false, "error": e }), 2));
        }
    };
    let vertex_spaces: Vec<Value> = gog
        .vertices()
        .iter()
        .map(|v| {
            json!({
                "vertex": v.name,
                "space": v.space.name(),
                "cells": [v.space.vertex_count(), v.space.edge_count(), v.space.square_count()],
            })
        })
        .collect();
    let edge_spaces: Vec<Value> = gog
        .edges()
        .iter()
        .map(|e| {
            json!({
                "edge": e.name,
                "space": e.space.name(),
                "cells": [e.space.vertex_count(), e.space.edge_count(), e.space.square_count()],
                "ends": [gog.vertices()[e.ends[0]].name, gog.vertices()[e.ends[1]].name],
                "half": e.half,
            })
        })
        .collect();
    let results = json!({
        "ok": true,
        "name": gog.name(),
        "vertex_spaces": vertex_spaces,
        "edge_spaces": edge_spaces,
        "subdivided_loops": has_half_edges(&gog),
    });
    Ok((results, 0))
}

pub fn total(ctx: &mut Ctx, path: &Path) -> Outcome {
    let gog = require_gog(ctx, path)?;
    let cx = total_space(&gog).map_err(|e| e.to_string())?;
    let npc_ok = cx.npc_ok();
    if !npc_ok {
        ctx.caveat("total space is not nonpositively curved".into());
    }
    let results = json!({
        "name": cx.name(),
        "npc": npc_ok,
        "cells": {
            "vertices": cx.vertex_count(),
            "edges": cx.edge_count(),
            "squares": cx.square_count(),
            "cubes": cx.cube_count(),
        },
        "complex": serde_json::to_value(cx.emit()).expect("total space emits"),
    });
    Ok((results, if npc_ok { 0 } else { 2 }))
}

pub fn parse_mode(s: &str) -> Result<CycloMode, String> {
    if s == "edges" {
        return Ok(CycloMode::Edges);
    }
    if let Some(n) = s.strip_prefix("paths:") {
        let n: u32 = n
            .parse()
            .map_err(|_| format!("`{n}` is not a path length in `paths:N`"))?;
        if n == 0 {
            return Err("path length in `paths:N` must be positive".into());
        }
        return Ok(CycloMode::Paths(n));
    }
    Err(format!("mode is `edges` or `paths:N`, not `{s}`"))
}

pub fn cyclonormal(
    ctx: &mut Ctx,
    path: &Path,
    mode: &str,
    radius: u32,
    cap: usize,
) -> Outcome {
    let gog = require_gog(ctx, path)?;
    let mode = parse_mode(mode)?;
    let rep =
        check_cyclonormal(&gog, mode, radius, cap, ctx.cell_budget).map_err(|e| e.to_string())?;
    for (name, truncated) in &rep.windows {
        if *truncated {
            ctx.caveat(format!("window at `{name}` truncated by the coset cap"));
        }
    }
    if rep.undecided > 0 {
        ctx.caveat(format!("{} stabilizer(s) undecided within the window", rep.undecided));
    }
    if let Some(t) = &mut ctx.trace {
        for e in &rep.entries {
            t.push(format!(
                "{}: {:?} over {} member(s), gate {}",
                e.vertex,
                e.verdict,
                e.members.len(),
                e.gate_size
            ));
        }
    }
    let code = if !rep.pass {
        2
    } else if rep.undecided > 0 && 2 * rep.undecided > rep.entries.len() {
        3
    } else {
        0
    };
    Ok((serde_json::to_value(&rep).expect("cyclonormal report serializes"), code))
}

#[allow(clippy::too_many_arguments)]
pub fn stature(
    ctx: &mut Ctx,
    path: &Path,
    l_max: u32,
    radius: u32,
    cap: usize,
    root: Option<&str>,
    s_bound: Option<u64>,
) -> Outcome {
    let gog = require_gog(ctx, path)?;
    let root = resolve_root(&gog, root)?;
    let rep = stature_probe(&gog, root, l_max, radius, cap, ctx.cell_budget, s_bound)
        .map_err(|e| e.to_string())?;
    for c in &rep.caveats {
        ctx.caveat(c.clone());
    }
    if let Some(t) = &mut ctx.trace {
        for c in &rep.classes {
            t.push(format!(
                "class {} first at length {} via {} ({:?})",
                &c.key[..12.min(c.key.len())],
                c.first_length,
                c.witness,
                c.verdict
            ));
        }
    }
    let code = if rep.classes.is_empty() && rep.undecided_paths > 0 { 3 } else { 0 };
    Ok((serde_json::to_value(&rep).expect("stature report serializes"), code))
}

/// `--depth` counts original-edge path length; subdivided loops double the
/// raw strip depth so that weights stay comparable across inputs.
fn raw_depth(gog: &Gog, depth: u32) -> u32 {
    if has_half_edges(gog) {
        2 * depth
    } else {
        depth
    }
}

pub fn window(
    ctx: &mut Ctx,
    path: &Path,
    depth: u32,
    radius: u32,
    cap: usize,
    root: Option<&str>,
) -> Outcome {
    let gog = require_gog(ctx, path)?;
    let root = resolve_root(&gog, root)?;
    let w = TreeWindow::build(&gog, root, raw_depth(&gog, depth), radius, cap, ctx.cell_budget)
        .map_err(|e| e.to_string())?;
    let chambers: Vec<Value> = w
        .chambers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.truncated {
                ctx.caveat(format!("chamber {i} truncated by the coset cap"));
            }
            json!({
                "id": i,
                "space": gog.vertices()[c.gvertex].name,
                "depth": c.depth,
                "parent": c.parent.map(|(pc, ps)| json!({ "chamber": pc, "strip": ps })),
                "strips": c.strips,
                "truncated": c.truncated,
            })
        })
        .collect();
    let strips: Vec<Value> = (0..w.strips.len())
        .map(|i| {
            let s = &w.strips[i];
            json!({
                "id": i,
                "edge": gog.edges()[s.gedge].name,
                "from_side": s.from_side,
                "from_chamber": s.from_chamber,
                "to_chamber": s.to_chamber,
                "ordinal": s.ordinal,
                "descriptor": w.strip_descriptor(i),
            })
        })
        .collect();
    if let Some(t) = &mut ctx.trace {
        for (i, c) in w.chambers.iter().enumerate() {
            t.push(format!(
                "chamber {i}: space {} at depth {}, {} outgoing strip(s)",
                gog.vertices()[c.gvertex].name,
                c.depth,
                c.strips.len()
            ));
        }
    }
    let paths_per_length: Vec<Value> = (1..=depth)
        .map(|l| json!({ "length": l, "paths": w.paths_of_weight(l).len() }))
        .collect();
    let results = json!({
        "root": gog.vertices()[root].name,
        "depth": depth,
        "radius": radius,
        "coset_cap": cap,
        "chambers": chambers,
        "strips": strips,
        "paths_per_length": paths_per_length,
    });
    Ok((results, 0))
}

pub fn stab(
    ctx: &mut Ctx,
    path: &Path,
    ordinals: &str,
    radius: u32,
    cap: usize,
    root: Option<&str>,
) -> Outcome {
    let gog = require_gog(ctx, path)?;
    let root = resolve_root(&gog, root)?;
    let ords: Vec<usize> = ordinals
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("path ordinal `{t}` is not a non-negative integer"))
        })
        .collect::<Result<_, _>>()?;
    if ords.is_empty() {
        return Err("path needs at least one ordinal".into());
    }
    let w = TreeWindow::build(&gog, root, ords.len() as u32, radius, cap, ctx.cell_budget)
        .map_err(|e| e.to_string())?;
    let path = w.path_from_ordinals(&ords).map_err(|e| e.to_string())?;
    ctx.trace(format!("path: {}", w.path_descriptor(&path)));
    let stab = w.path_stabilizer(&path).map_err(|e| e.to_string())?;
    if !stab.gate.reliable {
        ctx.caveat("path gate met the window boundary; verdict may be conservative".into());
    }
    if !stab.complete {
        ctx.caveat("stabilizer search hit the candidate cap; generator list may be partial".into());
    }
    if stab.undecided_candidates > 0 {
        ctx.caveat(format!(
            "{} candidate(s) undecided within the window",
            stab.undecided_candidates
        ));
    }
    let results = json!({
        "path": w.path_descriptor(&path),
        "verdict": serde_json::to_value(stab.verdict).expect("verdict serializes"),
        "generators": stab.generators.len(),
        "translations": stab.translations,
        "primitive": stab.primitive,
        "witness": stab.witness.map(|(i, j)| json!([i, j])),
        "quotient_diam": stab.quotient_diam,
        "undecided_candidates": stab.undecided_candidates,
        "complete": stab.complete,
        "gate": {
            "size": stab.gate.verts.count(),
            "reliable": stab.gate.reliable,
            "chain_equal": stab.gate.chain_equal,
        },
    });
    let code = match stab.verdict {
        Verdict::Trivial | Verdict::Cyclic => 0,
        Verdict::Higher => 2,
        Verdict::Undecided => 3,
    };
    Ok((results, code))
}
