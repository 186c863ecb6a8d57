//! Deterministic fixture generation.
//!
//! Single complexes are written as one JSON file; graph-of-spaces fixtures
//! are written as a directory holding one file per space and attachment map
//! plus a `gog.json` tying them together by relative reference.

use std::collections::BTreeMap;
use std::path::Path;

use mf_core::gog::GogSpec;
use mf_core::{fixtures, gog, ComplexSpec, MapSpec};
use serde_json::{json, Value};

use crate::load::{AttachmentRef, GogFile};
use crate::report::digest;

pub const NAMES: &[&str] = &[
    "grid",
    "line",
    "ladder",
    "comb",
    "torus",
    "klein",
    "tori_gog",
    "transverse_gog",
    "wise_gog",
];

/// Write one fixture into `out`, returning the results payload (relative
/// file names with digests).
pub fn generate(
    name: &str,
    m: Option<usize>,
    n: Option<usize>,
    out: &Path,
) -> Result<Value, String> {
    std::fs::create_dir_all(out)
        .map_err(|e| format!("cannot create `{}`: {e}", out.display()))?;
    let no_params = |m: Option<usize>, n: Option<usize>| -> Result<(), String> {
        if m.is_some() || n.is_some() {
            return Err(format!("fixture `{name}` takes no --m/--n parameters"));
        }
        Ok(())
    };
    let mut written: Vec<(String, String)> = Vec::new();
    match name {
        "grid" => {
            let (m, n) = (m.unwrap_or(2), n.unwrap_or(2));
            let spec = fixtures::grid(m, n).emit();
            write_json(out, &format!("grid{m}{n}.json"), &spec, &mut written)?;
        }
        "line" => {
            if m.is_some() {
                return Err("fixture `line` takes only --n".into());
            }
            let n = n.unwrap_or(4);
            let spec = fixtures::path(n).emit();
            write_json(out, &format!("line{n}.json"), &spec, &mut written)?;
        }
        "ladder" => {
            no_params(m, n)?;
            write_json(out, "ladder.json", &fixtures::ladder().emit(), &mut written)?;
        }
        "comb" => {
            no_params(m, n)?;
            write_json(out, "comb.json", &fixtures::comb().emit(), &mut written)?;
        }
        "torus" => {
            no_params(m, n)?;
            write_json(out, "torus.json", &fixtures::torus().emit(), &mut written)?;
        }
        "klein" => {
            no_params(m, n)?;
            write_json(out, "klein.json", &fixtures::klein().emit(), &mut written)?;
        }
        "tori_gog" => {
            no_params(m, n)?;
            write_gog(out, &gog::tori_gog(), &mut written)?;
        }
        "transverse_gog" => {
            no_params(m, n)?;
            write_gog(out, &gog::transverse_gog(), &mut written)?;
        }
        "wise_gog" => {
            no_params(m, n)?;
            write_gog(out, &gog::wise_gog(), &mut written)?;
        }
        other => {
            return Err(format!(
                "unknown fixture `{other}`; available: {}",
                NAMES.join(", ")
            ));
        }
    }
    let files: Vec<Value> =
        written.iter().map(|(f, d)| json!({ "file": f, "digest": d })).collect();
    Ok(json!({ "fixture": name, "files": files }))
}

fn write_json<T: serde::Serialize>(
    dir: &Path,
    file: &str,
    value: &T,
    written: &mut Vec<(String, String)>,
) -> Result<(), String> {
    let mut s = serde_json::to_string_pretty(value).expect("fixture serializes");
    s.push('\n');
    let path = dir.join(file);
    std::fs::write(&path, s.as_bytes())
        .map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
    written.push((file.to_string(), digest(s.as_bytes())));
    Ok(())
}

/// Split an inline gog into the multi-file layout.
fn write_gog(
    dir: &Path,
    spec: &GogSpec,
    written: &mut Vec<(String, String)>,
) -> Result<(), String> {
    if !distinct_names(spec) {
        return Err(format!("gog `{}` has colliding space names", spec.name));
    }
    let mut vertex_spaces = BTreeMap::new();
    for (v, space) in &spec.vertex_spaces {
        let file = format!("{}.json", space.name);
        write_json(dir, &file, space, written)?;
        vertex_spaces.insert(v.clone(), file);
    }
    let mut edge_spaces = BTreeMap::new();
    let mut attachments = BTreeMap::new();
    for (e, space) in &spec.edge_spaces {
        let file = format!("{}.json", space.name);
        write_json(dir, &file, space, written)?;
        edge_spaces.insert(e.clone(), file);
    }
    for (e, att) in &spec.attachments {
        let minus = format!("e{e}_minus.json");
        let plus = format!("e{e}_plus.json");
        write_map(dir, &minus, &att.minus, written)?;
        write_map(dir, &plus, &att.plus, written)?;
        attachments.insert(e.clone(), AttachmentRef { minus, plus });
    }
    let file = GogFile {
        name: Some(spec.name.clone()),
        graph: spec.graph.clone(),
        vertex_spaces,
        edge_spaces,
        attachments,
    };
    write_json(dir, "gog.json", &file, written)
}

fn write_map(
    dir: &Path,
    file: &str,
    map: &MapSpec,
    written: &mut Vec<(String, String)>,
) -> Result<(), String> {
    write_json(dir, file, map, written)
}

/// Guard against two spaces emitting to one file name.
fn distinct_names(spec: &GogSpec) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    spec.vertex_spaces
        .values()
        .chain(spec.edge_spaces.values())
        .all(|s: &ComplexSpec| seen.insert(s.name.clone()))
}
