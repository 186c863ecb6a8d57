//! Input loading: complexes, maps, and graph-of-spaces files, with content
//! digests recorded for the report's provenance block.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mf_core::bits::Bits;
use mf_core::cat0::Cat0;
use mf_core::complex::CubeComplex;
use mf_core::gog::{AttachmentSpec, GogSpec, GraphSpec};
use mf_core::ids::VId;
use mf_core::{ComplexSpec, MapSpec};
use serde::{Deserialize, Serialize};

use crate::report::digest;

/// Shared command context: input digests, caveats, and the optional trace
/// log, accumulated while a command runs.
pub struct Ctx {
    pub inputs: BTreeMap<String, String>,
    pub caveats: Vec<String>,
    pub trace: Option<Vec<String>>,
    pub cell_budget: usize,
}

impl Ctx {
    pub fn new(trace: bool, cell_budget: usize) -> Ctx {
        Ctx {
            inputs: BTreeMap::new(),
            caveats: Vec::new(),
            trace: if trace { Some(Vec::new()) } else { None },
            cell_budget,
        }
    }

    pub fn trace(&mut self, line: String) {
        if let Some(t) = &mut self.trace {
            t.push(line);
        }
    }

    pub fn caveat(&mut self, line: String) {
        if !self.caveats.contains(&line) {
            self.caveats.push(line);
        }
    }

    /// Read a file, recording its digest under the path as given.
    pub fn read_bytes(&mut self, path: &Path) -> Result<Vec<u8>, String> {
        let data = std::fs::read(path)
            .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
        self.inputs.insert(path.display().to_string(), digest(&data));
        Ok(data)
    }

    pub fn load_complex_spec(&mut self, path: &Path) -> Result<ComplexSpec, String> {
        let data = self.read_bytes(path)?;
        serde_json::from_slice(&data)
            .map_err(|e| format!("`{}` is not a complex file: {e}", path.display()))
    }

    pub fn load_complex(&mut self, path: &Path) -> Result<CubeComplex, String> {
        let spec = self.load_complex_spec(path)?;
        CubeComplex::build(&spec).map_err(|e| format!("`{}`: {e}", path.display()))
    }

    pub fn load_map_spec(&mut self, path: &Path) -> Result<MapSpec, String> {
        let data = self.read_bytes(path)?;
        serde_json::from_slice(&data)
            .map_err(|e| format!("`{}` is not a map file: {e}", path.display()))
    }

    /// Load a graph-of-spaces description. The argument may be the gog file
    /// itself or a directory containing `gog.json`; referenced space and map
    /// files resolve relative to the gog file's directory.
    pub fn load_gog_spec(&mut self, given: &Path) -> Result<GogSpec, String> {
        let gog_path: PathBuf = if given.is_dir() { given.join("gog.json") } else { given.into() };
        let data = self.read_bytes(&gog_path)?;
        let file: GogFile = serde_json::from_slice(&data)
            .map_err(|e| format!("`{}` is not a gog file: {e}", gog_path.display()))?;
        let dir = gog_path.parent().map(Path::to_path_buf).unwrap_or_default();
        let name = match &file.name {
            Some(n) => n.clone(),
            None => gog_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "gog".into()),
        };

        let mut vertex_spaces = BTreeMap::new();
        for (v, f) in &file.vertex_spaces {
            vertex_spaces.insert(v.clone(), self.load_complex_spec(&dir.join(f))?);
        }
        let mut edge_spaces = BTreeMap::new();
        for (e, f) in &file.edge_spaces {
            edge_spaces.insert(e.clone(), self.load_complex_spec(&dir.join(f))?);
        }
        let mut attachments = BTreeMap::new();
        for (e, a) in &file.attachments {
            attachments.insert(
                e.clone(),
                AttachmentSpec {
                    minus: self.load_map_spec(&dir.join(&a.minus))?,
                    plus: self.load_map_spec(&dir.join(&a.plus))?,
                },
            );
        }
        Ok(GogSpec { name, graph: file.graph.clone(), vertex_spaces, edge_spaces, attachments })
    }
}

/// On-disk graph-of-spaces form: the graph inline, everything else by file
/// reference. Keys of `edge_spaces` and `attachments` are edge indices in
/// decimal.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GogFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub graph: GraphSpec,
    pub vertex_spaces: BTreeMap<String, String>,
    pub edge_spaces: BTreeMap<String, String>,
    pub attachments: BTreeMap<String, AttachmentRef>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachmentRef {
    pub minus: String,
    pub plus: String,
}

/// Resolve a comma-separated list of vertex names to a bitset.
pub fn parse_vertex_set(cx: &CubeComplex, csv: &str) -> Result<Bits, String> {
    let mut bits = Bits::new(cx.vertex_count());
    for name in csv.split(',') {
        let name = name.trim();
        if name.is_empty() {
            return Err("vertex list has an empty entry".into());
        }
        let v = cx.vid(name).map_err(|e| e.to_string())?;
        bits.insert(v.idx());
    }
    Ok(bits)
}

/// Resolve a vertex name in a complex, defaulting to the first vertex.
pub fn resolve_vertex(cx: &CubeComplex, name: Option<&str>) -> Result<VId, String> {
    match name {
        Some(n) => cx.vid(n).map_err(|e| e.to_string()),
        None => {
            if cx.vertex_count() == 0 {
                return Err("complex has no vertices".into());
            }
            Ok(VId(0))
        }
    }
}

/// Names of the vertices in a bitset, in id order.
pub fn names(cx: &CubeComplex, bits: &Bits) -> Vec<String> {
    bits.iter().map(|v| cx.vname(VId(v as u32)).to_string()).collect()
}

/// Convexity-aware set construction: hull the named set first, noting when
/// the hull strictly enlarges the input.
pub fn named_convex_set(
    g: &Cat0,
    csv: &str,
    label: &str,
    ctx: &mut Ctx,
) -> Result<mf_core::ConvexSet, String> {
    let bits = parse_vertex_set(g.complex(), csv)?;
    let hull = g.hull(&bits).map_err(|e| e.to_string())?;
    if hull != bits {
        ctx.caveat(format!(
            "set {label} was not convex; replaced by its hull ({} vertices)",
            hull.count()
        ));
    }
    g.convex(&hull).map_err(|e| e.to_string())
}
