//! Quasiline commands: classification, the constant suite, fellow traveling,
//! and commensuration of two automorphisms over one window.

use std::path::Path;

use mf_core::ball::{develop_ball, Ball};
use mf_core::complex::CubeComplex;
use mf_core::error::Error;
use mf_core::ids::VId;
use mf_core::quasiline::{commensurate, Classification, ConstantSuite, Kind, Quasiline};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::load::Ctx;
use crate::words::{walk_word, word_deck};

type Outcome = Result<(Value, i32), String>;

pub struct QlArgs<'a> {
    pub complex: &'a Path,
    pub word: &'a str,
    pub radius: u32,
    pub basepoint: Option<&'a str>,
    pub min_period: u32,
}

fn kind_str(k: Kind) -> &'static str {
    match k {
        Kind::Trivial => "trivial",
        Kind::HalfEssential => "half-essential",
        Kind::Essential => "essential",
    }
}

/// Load the base, develop the window, build the word's deck. Input problems
/// surface as `Err` (exit 1); a non-NPC base is a verdict failure.
fn setup(ctx: &mut Ctx, args: &QlArgs) -> Result<Result<(CubeComplex, Ball), (Value, i32)>, String> {
    let cx = ctx.load_complex(args.complex)?;
    let bp = crate::load::resolve_vertex(&cx, args.basepoint)?;
    match develop_ball(&cx, bp, args.radius, ctx.cell_budget) {
        Ok(ball) => Ok(Ok((cx, ball))),
        Err(Error::NotNpc(msg)) => {
            ctx.caveat("development requires a nonpositively curved base".into());
            Ok(Err((json!({ "ok": false, "error": msg }), 2)))
        }
        Err(e) => Err(e.to_string()),
    }
}

/// Serialize a validated quasiline and its classification.
fn classification_value(q: &Quasiline, cls: &Classification) -> Value {
    let cx = q.ball().complex();
    let (trivial, half, essential) = cls.counts();
    let classes: Vec<Value> = cls
        .classes
        .iter()
        .map(|c| {
            json!({
                "hyperplane": c.h.0,
                "kind": kind_str(c.kind),
                "diam": c.diam,
                "shallow_side": c.shallow_side,
                "orbit": c.orbit,
            })
        })
        .collect();
    let orbits: Vec<Value> = cls
        .orbits
        .iter()
        .map(|o| {
            json!({
                "rep": o.rep.0,
                "size": o.members.len(),
                "kind": kind_str(o.kind),
                "cyclic": o.cyclic,
            })
        })
        .collect();
    let (j_min, j_max) = q.j_range();
    json!({
        "ok": true,
        "basepoint": cx.vname(q.basepoint()),
        "shift": q.shift(),
        "period_count": q.period_count(),
        "j_range": [j_min, j_max],
        "fundamental_domain": q.fundamental_domain().len(),
        "counts": { "essential": essential, "half_essential": half, "trivial": trivial },
        "classes": classes,
        "orbits": orbits,
    })
}

macro_rules! try_setup {
    ($ctx:expr, $args:expr) => {
        match setup($ctx, $args)? {
            Ok(pair) => pair,
            Err(out) => return Ok(out),
        }
    };
}

/// Validate the word's quasiline; validation failures are verdict failures.
fn validated<'a>(
    ball: &'a Ball,
    base: &CubeComplex,
    word: &str,
    min_period: u32,
) -> Result<Result<Quasiline<'a>, (Value, i32)>, String> {
    let deck = word_deck(ball, base, word)?;
    match Quasiline::validate(ball, &deck, None, min_period) {
        Ok(q) => Ok(Ok(q)),
        Err(e) => Ok(Err((json!({ "ok": false, "error": e.to_string() }), 2))),
    }
}

pub fn classify(ctx: &mut Ctx, args: &QlArgs) -> Outcome {
    let (base, ball) = try_setup!(ctx, args);
    let q = match validated(&ball, &base, args.word, args.min_period)? {
        Ok(q) => q,
        Err(out) => return Ok(out),
    };
    match q.classify() {
        Ok(cls) => Ok((classification_value(&q, &cls), 0)),
        Err(e) => Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    }
}

fn constants_value(c: &ConstantSuite) -> Value {
    json!({
        "diam_bound": c.diam_bound,
        "shallow_bound": c.shallow_bound,
        "step": c.step,
        "overlap_bound": c.overlap_bound,
        "crossing_gap": c.crossing_gap,
        "trivial_count": c.trivial_count,
        "power": c.power,
        "threshold": c.threshold,
    })
}

pub fn constants(ctx: &mut Ctx, args: &QlArgs) -> Outcome {
    let (base, ball) = try_setup!(ctx, args);
    let q = match validated(&ball, &base, args.word, args.min_period)? {
        Ok(q) => q,
        Err(out) => return Ok(out),
    };
    let cls = match q.classify() {
        Ok(c) => c,
        Err(e) => return Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    };
    match q.constants(&cls) {
        Ok(consts) => {
            let mut v = classification_value(&q, &cls);
            v["constants"] = constants_value(&consts);
            Ok((v, 0))
        }
        Err(e) => Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    }
}

/// A geodesic argument: either explicit window vertex names or a pair of
/// words walked from the basepoint whose endpoints get joined.
#[derive(Deserialize)]
#[serde(untagged)]
enum GeodesicFile {
    Names(Vec<String>),
    Words { from_word: String, to_word: String },
}

pub fn fellow(ctx: &mut Ctx, args: &QlArgs, geodesic: &Path, b: Option<u64>) -> Outcome {
    let (base, ball) = try_setup!(ctx, args);
    let q = match validated(&ball, &base, args.word, args.min_period)? {
        Ok(q) => q,
        Err(out) => return Ok(out),
    };
    let cls = match q.classify() {
        Ok(c) => c,
        Err(e) => return Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    };
    let consts = match q.constants(&cls) {
        Ok(c) => c,
        Err(e) => return Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    };
    let data = ctx.read_bytes(geodesic)?;
    let file: GeodesicFile = serde_json::from_slice(&data)
        .map_err(|e| format!("`{}` is not a geodesic file: {e}", geodesic.display()))?;
    let g = ball.cat0();
    let gamma: Vec<VId> = match &file {
        GeodesicFile::Names(list) => list
            .iter()
            .map(|n| ball.complex().vid(n).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?,
        GeodesicFile::Words { from_word, to_word } => {
            let u = walk_word(&ball, &base, ball.basepoint(), from_word)?;
            let v = walk_word(&ball, &base, ball.basepoint(), to_word)?;
            g.geodesic(u, v)
        }
    };
    if gamma.len() < 2 {
        return Err("geodesic needs at least two vertices".into());
    }
    let b = b.unwrap_or_else(|| consts.threshold.max(1));
    ctx.trace(format!("b = {b}, threshold B0 = {}", consts.threshold));
    match q.fellow_travel(&cls, &consts, q.window(), &gamma, b) {
        Ok(ft) => {
            ctx.trace(format!(
                "anchor {} power {} q {} p {} count {}",
                ball.complex().vname(ft.anchor),
                ft.power,
                ft.q,
                ft.p,
                ft.count
            ));
            let results = json!({
                "ok": true,
                "b": b,
                "hyperplane": ft.hyperplane.0,
                "anchor": ball.complex().vname(ft.anchor),
                "power": ft.power,
                "q": ft.q,
                "p": ft.p,
                "count": ft.count,
                "gamma": gamma.iter().map(|&x| ball.complex().vname(x)).collect::<Vec<_>>(),
                "gamma_hat": ft.gamma_hat.iter().map(|&x| ball.complex().vname(x)).collect::<Vec<_>>(),
                "block_size": ft.block.count(),
                "union_size": ft.union_verts.count(),
                "constants": constants_value(&consts),
            });
            Ok((results, 0))
        }
        Err(e) => Ok((json!({ "ok": false, "b": b, "error": e.to_string() }), 2)),
    }
}

pub fn commensurate_cmd(ctx: &mut Ctx, args: &QlArgs, word2: &str, s_bound: u32) -> Outcome {
    let (base, ball) = try_setup!(ctx, args);
    let q1 = match validated(&ball, &base, args.word, args.min_period)? {
        Ok(q) => q,
        Err(out) => return Ok(out),
    };
    let q2 = match validated(&ball, &base, word2, args.min_period)? {
        Ok(q) => q,
        Err(out) => return Ok(out),
    };
    match commensurate(&q1, &q2, s_bound) {
        Ok(c) => {
            let results = json!({
                "ok": true,
                "related": c.related,
                "d1": c.d1,
                "d2": c.d2,
                "projection_diam": c.projection_diam,
                "s_bound": s_bound,
            });
            Ok((results, 0))
        }
        Err(e) => Ok((json!({ "ok": false, "error": e.to_string() }), 2)),
    }
}
