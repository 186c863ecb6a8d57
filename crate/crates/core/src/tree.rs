//! Windowed trees of spaces over a graph of cube complexes.
//!
//! A [`TreeWindow`] develops a bounded piece of the tree of spaces attached
//! to a graph of nonpositively curved cube complexes: chambers are developed
//! balls in vertex-space covers, and strips record how consecutive chambers
//! glue along elevations of edge spaces. On top of the window sit:
//!
//! * the pitchfork gate of a chamber path (projection of the far elevation
//!   through every strip back into the root chamber),
//! * a stabilizer approximation for one or several paths by window deck
//!   transformations, with a trivial/cyclic/higher/undecided verdict,
//! * the cyclonormality check for the induced family of stabilizers, and
//! * the stature probe, which buckets quotients of gate subwindows by
//!   canonical certificate and assembles the derived growth budget.
//!
//! Everything is deterministic: elevations are enumerated by the creation
//! index of their seed vertex, strips and chambers in breadth-first order,
//! and all reported collections in a fixed order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::ball::{deck_search, develop_ball, translation_length, Ball, Deck};
use crate::bits::Bits;
use crate::canon::{self, ColoredGraph};
use crate::cat0::{Cat0, ConvexSet};
use crate::complex::CubeComplex;
use crate::error::{Error, Result};
use crate::gates::pitchfork;
use crate::gog::Gog;
use crate::ids::{SideRef, VId, SIDE_CORNERS};
use crate::maps::CellMap;
use crate::quasiline::{commensurate, Kind, Quasiline};

/// Index of the root chamber in every window.
pub const ROOT: usize = 0;

// ---------------------------------------------------------------------------
// Elevations
// ---------------------------------------------------------------------------

/// One elevation of an edge space into a chamber window: a connected
/// component of the fiber product of the attachment with the developed ball.
/// The projection to the chamber is injective and its image is convex, so the
/// elevation is carried by `verts` together with the fiber labeling.
#[derive(Clone, Debug)]
pub struct Elevation {
    /// Chamber vertices in the image.
    pub verts: Bits,
    /// Chamber vertex -> edge-space vertex lying over it.
    pub labels: BTreeMap<VId, VId>,
    /// Minimal (chamber vertex, edge-space vertex) pair; enumeration key.
    pub seed: (VId, VId),
    /// The image as a convex set of the chamber.
    pub set: ConvexSet,
}

/// Grow the elevation component through `(seed_b, seed_a)`.
fn elevation_component(
    ball: &Ball,
    fiber: &CubeComplex,
    phi: &CellMap,
    seed_b: VId,
    seed_a: VId,
) -> Result<Elevation> {
    if phi.v[seed_a.idx()] != ball.base_of(seed_b) {
        return Err(Error::SeedMismatch);
    }
    let nv = ball.complex().vertex_count();
    let mut labels: BTreeMap<VId, VId> = BTreeMap::new();
    let mut verts = Bits::new(nv);
    labels.insert(seed_b, seed_a);
    verts.insert(seed_b.idx());
    let mut queue = VecDeque::from([(seed_a, seed_b)]);
    while let Some((a, b)) = queue.pop_front() {
        for &end in fiber.ends_at(a) {
            let a2 = fiber.edge(end.e).ends[(1 - end.w) as usize];
            let Some(b2) = ball.port(b, phi.end_image(end)) else {
                continue;
            };
            match labels.get(&b2) {
                None => {
                    labels.insert(b2, a2);
                    verts.insert(b2.idx());
                    queue.push_back((a2, b2));
                }
                Some(&prev) => {
                    if prev != a2 {
                        return Err(Error::Incoherent(format!(
                            "elevation does not embed: window vertex {} lies \
                             under fiber vertices {} and {}",
                            b2.0, prev.0, a2.0
                        )));
                    }
                }
            }
        }
    }
    let seed = labels
        .iter()
        .next()
        .map(|(&b, &a)| (b, a))
        .expect("elevation has a seed");
    let set = ball
        .cat0()
        .convex(&verts)
        .map_err(|_| Error::Incoherent("elevation window is not convex".into()))?;
    Ok(Elevation { verts, labels, seed, set })
}

/// Enumerate elevations of `(fiber, phi)` into the ball, ordered by the
/// creation index of their seed vertex, stopping after `cap` components.
/// The boolean reports whether more components exist beyond the cap.
fn enumerate_elevations(
    ball: &Ball,
    fiber: &CubeComplex,
    phi: &CellMap,
    cap: usize,
) -> Result<(Vec<Elevation>, bool)> {
    let nv = ball.complex().vertex_count();
    // Fiber vertices over each base vertex.
    let base_n = phi.v.iter().map(|v| v.idx() + 1).max().unwrap_or(0);
    let mut over: Vec<Vec<VId>> = vec![Vec::new(); base_n];
    for (a, v) in phi.v.iter().enumerate() {
        over[v.idx()].push(VId(a as u32));
    }
    let mut seen: Vec<Bits> = vec![Bits::new(nv); fiber.vertex_count()];
    let mut out = Vec::new();
    let mut truncated = false;
    'scan: for b in 0..nv {
        let base = ball.base_of(VId(b as u32));
        if base.idx() >= base_n {
            continue;
        }
        for &a in &over[base.idx()] {
            if seen[a.idx()].contains(b) {
                continue;
            }
            if out.len() == cap {
                truncated = true;
                break 'scan;
            }
            let elev = elevation_component(ball, fiber, phi, VId(b as u32), a)?;
            for (&bv, &av) in &elev.labels {
                seen[av.idx()].insert(bv.idx());
            }
            out.push(elev);
        }
    }
    Ok((out, truncated))
}

// ---------------------------------------------------------------------------
// Windows: chambers and strips
// ---------------------------------------------------------------------------

/// A developed vertex-space ball placed at a tree vertex of the window.
#[derive(Debug)]
pub struct Chamber {
    /// Graph vertex whose space is developed here.
    pub gvertex: usize,
    /// Index into [`TreeWindow::balls`].
    pub ball_id: usize,
    pub depth: u32,
    /// `(parent chamber, strip leading here)`, absent at the root.
    pub parent: Option<(usize, usize)>,
    /// Outgoing strips, in creation order.
    pub strips: Vec<usize>,
    /// Some elevation list at this chamber hit the coset cap.
    pub truncated: bool,
}

/// A tree edge of the window: an elevation in the `from` chamber, its twin in
/// the `to` chamber, and the partial isomorphism across the strip cylinder.
#[derive(Debug)]
pub struct Strip {
    /// Graph edge realized by this strip.
    pub gedge: usize,
    /// Which end of the graph edge the `from` chamber realizes.
    pub from_side: u8,
    pub from_chamber: usize,
    pub to_chamber: usize,
    /// Position in the elevation enumeration of `(from_chamber, gedge, side)`.
    pub ordinal: usize,
    pub from: Elevation,
    pub to: Elevation,
    /// From-chamber elevation vertex -> to-chamber elevation vertex.
    pub cross: BTreeMap<VId, VId>,
    pub cross_rev: BTreeMap<VId, VId>,
}

/// A developed window of the tree of spaces: chambers joined by strips, all
/// balls shared through a cache keyed by (graph vertex, base vertex).
pub struct TreeWindow<'g> {
    pub gog: &'g Gog,
    pub radius: u32,
    pub depth: u32,
    pub coset_cap: usize,
    pub cell_budget: usize,
    pub balls: Vec<Ball>,
    ball_key: BTreeMap<(usize, VId), usize>,
    pub chambers: Vec<Chamber>,
    pub strips: Vec<Strip>,
}

impl<'g> TreeWindow<'g> {
    pub fn build(
        gog: &'g Gog,
        root: usize,
        depth: u32,
        radius: u32,
        coset_cap: usize,
        cell_budget: usize,
    ) -> Result<TreeWindow<'g>> {
        if root >= gog.vertices().len() {
            return Err(Error::BadGog(format!("no graph vertex #{root}")));
        }
        if coset_cap == 0 {
            return Err(Error::BadGog("coset cap must be positive".into()));
        }
        let mut w = TreeWindow {
            gog,
            radius,
            depth,
            coset_cap,
            cell_budget,
            balls: Vec::new(),
            ball_key: BTreeMap::new(),
            chambers: Vec::new(),
            strips: Vec::new(),
        };
        let ball_id = w.ensure_ball(root, VId(0))?;
        w.chambers.push(Chamber {
            gvertex: root,
            ball_id,
            depth: 0,
            parent: None,
            strips: Vec::new(),
            truncated: false,
        });

        let mut c = 0usize;
        while c < w.chambers.len() {
            if w.chambers[c].depth < depth {
                w.expand(c)?;
            }
            c += 1;
        }
        Ok(w)
    }

    fn ensure_ball(&mut self, gvertex: usize, base: VId) -> Result<usize> {
        if let Some(&id) = self.ball_key.get(&(gvertex, base)) {
            return Ok(id);
        }
        let space = &self.gog.vertices()[gvertex].space;
        let ball = develop_ball(space, base, self.radius, self.cell_budget)?;
        self.balls.push(ball);
        let id = self.balls.len() - 1;
        self.ball_key.insert((gvertex, base), id);
        Ok(id)
    }

    fn expand(&mut self, c: usize) -> Result<()> {
        let gvertex = self.chambers[c].gvertex;
        let from_ball_id = self.chambers[c].ball_id;
        let depth = self.chambers[c].depth;
        let parent = self.chambers[c].parent;
        for (ge, side) in self.gog.incidences(gvertex) {
            let (elevs, truncated) = {
                let edge = &self.gog.edges()[ge];
                enumerate_elevations(
                    &self.balls[from_ball_id],
                    &edge.space,
                    &edge.maps[side as usize],
                    self.coset_cap,
                )?
            };
            if truncated {
                self.chambers[c].truncated = true;
            }
            for (ordinal, elev) in elevs.into_iter().enumerate() {
                if let Some((_, ps)) = parent {
                    let p = &self.strips[ps];
                    if p.gedge == ge
                        && 1 - p.from_side == side
                        && p.to.seed == elev.seed
                    {
                        continue;
                    }
                }
                let far = 1 - side;
                let (w_vertex, seed_a) = {
                    let edge = &self.gog.edges()[ge];
                    (edge.ends[far as usize], elev.seed.1)
                };
                let base_w = self.gog.edges()[ge].maps[far as usize].v[seed_a.idx()];
                let to_ball_id = self.ensure_ball(w_vertex, base_w)?;

                let edge = &self.gog.edges()[ge];
                let fiber = &edge.space;
                let phi = &edge.maps[side as usize];
                let psi = &edge.maps[far as usize];
                let from_ball = &self.balls[from_ball_id];
                let to_ball = &self.balls[to_ball_id];
                let to_elev = elevation_component(
                    to_ball,
                    fiber,
                    psi,
                    to_ball.basepoint(),
                    seed_a,
                )?;

                // Joint growth of the cylinder: pair up the two elevations
                // over the edge space wherever both sides are in window.
                let mut cross: BTreeMap<VId, VId> = BTreeMap::new();
                let mut cross_rev: BTreeMap<VId, VId> = BTreeMap::new();
                let bf0 = elev.seed.0;
                let bt0 = to_ball.basepoint();
                cross.insert(bf0, bt0);
                cross_rev.insert(bt0, bf0);
                let mut queue = VecDeque::from([(seed_a, bf0, bt0)]);
                while let Some((a, bf, bt)) = queue.pop_front() {
                    for &end in fiber.ends_at(a) {
                        let a2 = fiber.edge(end.e).ends[(1 - end.w) as usize];
                        let f2 = from_ball.port(bf, phi.end_image(end));
                        let t2 = to_ball.port(bt, psi.end_image(end));
                        let (Some(f2), Some(t2)) = (f2, t2) else {
                            continue;
                        };
                        match cross.get(&f2) {
                            None => {
                                cross.insert(f2, t2);
                                if cross_rev.insert(t2, f2).is_some() {
                                    return Err(Error::Incoherent(
                                        "strip cylinder is not injective".into(),
                                    ));
                                }
                                queue.push_back((a2, f2, t2));
                            }
                            Some(&prev) => {
                                if prev != t2 {
                                    return Err(Error::Incoherent(
                                        "strip cylinder is inconsistent".into(),
                                    ));
                                }
                            }
                        }
                    }
                }

                let sidx = self.strips.len();
                self.strips.push(Strip {
                    gedge: ge,
                    from_side: side,
                    from_chamber: c,
                    to_chamber: self.chambers.len(),
                    ordinal,
                    from: elev,
                    to: to_elev,
                    cross,
                    cross_rev,
                });
                self.chambers.push(Chamber {
                    gvertex: w_vertex,
                    ball_id: to_ball_id,
                    depth: depth + 1,
                    parent: Some((c, sidx)),
                    strips: Vec::new(),
                    truncated: false,
                });
                self.chambers[c].strips.push(sidx);
            }
        }
        Ok(())
    }

    pub fn ball_of(&self, chamber: usize) -> &Ball {
        &self.balls[self.chambers[chamber].ball_id]
    }

    /// Descriptor like `e0:-[2]`: edge name, side realized at the from
    /// chamber, elevation ordinal.
    pub fn strip_descriptor(&self, s: usize) -> String {
        let strip = &self.strips[s];
        let sign = if strip.from_side == 0 { "-" } else { "+" };
        format!("{}:{}[{}]", self.gog.edges()[strip.gedge].name, sign, strip.ordinal)
    }

    pub fn path_descriptor(&self, path: &TreePath) -> String {
        path.strips
            .iter()
            .map(|&s| self.strip_descriptor(s))
            .collect::<Vec<_>>()
            .join("/")
    }

    /// All descending chamber paths of exactly `len` strips from the root.
    pub fn paths_from_root(&self, len: u32) -> Vec<TreePath> {
        let mut out = Vec::new();
        let mut stack = vec![(ROOT, Vec::new())];
        while let Some((c, prefix)) = stack.pop() {
            if prefix.len() == len as usize {
                out.push(TreePath { strips: prefix });
                continue;
            }
            // Reverse so that the earliest strip is explored first.
            for &s in self.chambers[c].strips.iter().rev() {
                let mut next = prefix.clone();
                next.push(s);
                stack.push((self.strips[s].to_chamber, next));
            }
        }
        out
    }

    /// Half-units of original path length contributed by one strip: loop
    /// halves count 1, whole edges count 2.
    fn strip_half_units(&self, s: usize) -> u32 {
        if self.gog.edges()[self.strips[s].gedge].half {
            1
        } else {
            2
        }
    }

    /// All descending chamber paths of exactly `len` original edges from the
    /// root: subdivision halves count half a step, so a loop crossing is two
    /// strips. On graphs without loops this agrees with [`paths_from_root`].
    pub fn paths_of_weight(&self, len: u32) -> Vec<TreePath> {
        let target = 2 * len;
        let mut out = Vec::new();
        let mut stack = vec![(ROOT, Vec::new(), 0u32)];
        while let Some((c, prefix, weight)) = stack.pop() {
            if weight == target {
                out.push(TreePath { strips: prefix });
                continue;
            }
            for &s in self.chambers[c].strips.iter().rev() {
                let w2 = weight + self.strip_half_units(s);
                if w2 > target {
                    continue;
                }
                let mut next = prefix.clone();
                next.push(s);
                stack.push((self.strips[s].to_chamber, next, w2));
            }
        }
        out
    }

    /// Resolve a path by per-chamber strip positions (`ords[i]` indexes the
    /// outgoing strips of the chamber reached after `i` steps).
    pub fn path_from_ordinals(&self, ords: &[usize]) -> Result<TreePath> {
        let mut c = ROOT;
        let mut strips = Vec::new();
        for (i, &o) in ords.iter().enumerate() {
            let out = &self.chambers[c].strips;
            let &s = out.get(o).ok_or_else(|| {
                Error::BadPath(format!(
                    "step {i}: chamber has {} outgoing strips, asked for #{o}",
                    out.len()
                ))
            })?;
            strips.push(s);
            c = self.strips[s].to_chamber;
        }
        Ok(TreePath { strips })
    }

    fn validate_path(&self, path: &TreePath) -> Result<()> {
        if path.strips.is_empty() {
            return Err(Error::BadPath("path has no strips".into()));
        }
        let mut at = ROOT;
        for (i, &s) in path.strips.iter().enumerate() {
            let strip = self.strips.get(s).ok_or_else(|| {
                Error::BadPath(format!("no strip #{s}"))
            })?;
            if strip.from_chamber != at {
                return Err(Error::BadPath(format!(
                    "strip #{s} at step {i} does not continue the path"
                )));
            }
            at = strip.to_chamber;
        }
        Ok(())
    }
}

/// A descending chain of strips starting at the root chamber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    pub strips: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Inter-ball deck growth
// ---------------------------------------------------------------------------

/// Grow a partial isomorphism between two windows of one cover from a seed
/// pair, by matching base ends outward; squares with fully mapped corners
/// must map to squares. `src` and `tgt` may be the same ball.
fn grow_map(src: &Ball, tgt: &Ball, from: VId, to: VId) -> Result<Deck> {
    if src.base_of(from) != tgt.base_of(to) {
        return Err(Error::SeedMismatch);
    }
    let n = src.complex().vertex_count();
    let mut map: Vec<Option<VId>> = vec![None; n];
    map[from.idx()] = Some(to);
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        let y = map[x.idx()].unwrap();
        for &end in src.complex().ends_at(x) {
            let x2 = src.complex().edge(end.e).ends[(1 - end.w) as usize];
            let Some(y2) = tgt.port(y, src.project_end(end)) else {
                continue;
            };
            match map[x2.idx()] {
                None => {
                    map[x2.idx()] = Some(y2);
                    queue.push_back(x2);
                }
                Some(prev) => {
                    if prev != y2 {
                        return Err(Error::DeckInconsistent(format!(
                            "vertex {} forced to both {} and {}",
                            x2.0, prev.0, y2.0
                        )));
                    }
                }
            }
        }
    }
    for (si, sq) in src.complex().squares().iter().enumerate() {
        let imgs: Vec<Option<VId>> = sq.corners.iter().map(|c| map[c.idx()]).collect();
        if imgs.iter().any(|i| i.is_none()) {
            continue;
        }
        let corners =
            [imgs[0].unwrap(), imgs[1].unwrap(), imgs[2].unwrap(), imgs[3].unwrap()];
        let mut sides = sq.sides;
        let mut ok = true;
        for (i, side) in sq.sides.iter().enumerate() {
            let from_c = corners[SIDE_CORNERS[i].0 as usize];
            let base_side = src.base_of_edge(side.e);
            let oriented = if side.rev { base_side.reversed() } else { base_side };
            match tgt.port_edge(from_c, oriented.end(0)) {
                Some((_, be)) => {
                    let stored = tgt.complex().edge(be);
                    sides[i] = SideRef { e: be, rev: stored.ends[0] != from_c };
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && tgt.complex().find_square(corners, sides).is_none() {
            return Err(Error::DeckInconsistent(format!(
                "square {si} with mapped corners has no image square"
            )));
        }
    }
    let boundary_limited = map.iter().any(|m| m.is_none());
    Ok(Deck { map, boundary_limited })
}

// ---------------------------------------------------------------------------
// Path gates
// ---------------------------------------------------------------------------

/// The pitchfork gate of a path, computed in the root chamber.
#[derive(Clone, Debug)]
pub struct PathGate {
    pub verts: Bits,
    pub set: Option<ConvexSet>,
    /// False when a projection met the window boundary (a transported vertex
    /// had no partner across a strip, or a transported set needed hulling).
    pub reliable: bool,
    /// The direct fold equals the step-by-step chain fold.
    pub chain_equal: bool,
}

fn convexify(g: &Cat0, bits: &Bits, reliable: &mut bool) -> Result<ConvexSet> {
    match g.convex(bits) {
        Ok(s) => Ok(s),
        Err(Error::NotConvex) => {
            *reliable = false;
            let h = g.hull(bits)?;
            g.convex(&h)
        }
        Err(e) => Err(e),
    }
}

impl<'g> TreeWindow<'g> {
    /// Project a vertex set living in `strip.to_chamber` onto the strip's far
    /// elevation and carry it across the cylinder into `strip.from_chamber`.
    fn transport(&self, strip: &Strip, bits: &Bits, reliable: &mut bool) -> Result<Bits> {
        let from_n = self.ball_of(strip.from_chamber).complex().vertex_count();
        let mut out = Bits::new(from_n);
        if bits.is_empty() {
            *reliable = false;
            return Ok(out);
        }
        let g = self.ball_of(strip.to_chamber).cat0();
        let set = convexify(g, bits, reliable)?;
        let proj = pitchfork(g, &strip.to.set, &set)?;
        for v in proj.verts.iter() {
            match strip.cross_rev.get(&VId(v as u32)) {
                Some(&bf) => {
                    out.insert(bf.idx());
                }
                None => *reliable = false,
            }
        }
        Ok(out)
    }

    /// Gate of the path in the root chamber. `verts` is the direct fold
    /// (project the far elevation through every strip); `chain_equal` checks
    /// it against the left-associated fold that gates through every
    /// intermediate elevation separately.
    pub fn path_gate(&self, path: &TreePath) -> Result<PathGate> {
        self.validate_path(path)?;
        let n = path.strips.len();
        let mut reliable = true;

        // Direct fold, innermost first.
        let mut t = self.strips[path.strips[n - 1]].from.verts.clone();
        for j in (0..n - 1).rev() {
            t = self.transport(&self.strips[path.strips[j]], &t, &mut reliable)?;
            if t.is_empty() {
                break;
            }
        }

        // Left-associated fold: transport each elevation to the root on its
        // own, gating the accumulator against each in turn.
        let root_g = self.ball_of(ROOT).cat0();
        let mut acc = self.strips[path.strips[0]].from.verts.clone();
        let mut chain_reliable = true;
        for j in 1..n {
            let mut b = self.strips[path.strips[j]].from.verts.clone();
            for k in (0..j).rev() {
                b = self.transport(&self.strips[path.strips[k]], &b, &mut chain_reliable)?;
                if b.is_empty() {
                    break;
                }
            }
            if b.is_empty() || acc.is_empty() {
                acc = Bits::new(root_g.vertex_count());
                chain_reliable = false;
                break;
            }
            let acc_set = convexify(root_g, &acc, &mut chain_reliable)?;
            let b_set = convexify(root_g, &b, &mut chain_reliable)?;
            acc = pitchfork(root_g, &acc_set, &b_set)?.verts;
        }

        let chain_equal = acc == t;
        reliable &= chain_reliable;
        let set = if t.is_empty() {
            reliable = false;
            None
        } else {
            Some(convexify(root_g, &t, &mut reliable)?)
        };
        Ok(PathGate { verts: t, set, reliable, chain_equal })
    }
}

// ---------------------------------------------------------------------------
// Stabilizer approximation
// ---------------------------------------------------------------------------

/// A labeled constraint in the root chamber: a vertex set together with the
/// fiber labeling a window deck must preserve pointwise.
#[derive(Clone, Debug)]
pub struct LabeledSet {
    pub verts: Bits,
    pub labels: BTreeMap<VId, VId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trivial,
    Cyclic,
    Higher,
    Undecided,
}

#[derive(Clone, Copy, Debug)]
pub struct StabOptions {
    /// Cap on gate vertices tried as deck targets.
    pub candidate_cap: usize,
    /// Stop scanning once two generators visibly fail to commute. Right for
    /// verdict-only callers; quotient bucketing needs the full generator
    /// list and turns this off.
    pub early_higher_exit: bool,
}

impl Default for StabOptions {
    fn default() -> Self {
        StabOptions { candidate_cap: 4096, early_higher_exit: true }
    }
}

/// Window approximation of the joint stabilizer of a family of paths (and
/// optional extra labeled constraints), acting on the root chamber.
#[derive(Debug)]
pub struct PathStabilizer {
    pub gate: PathGate,
    /// Non-identity window decks preserving every constraint; `generators[i]`
    /// moves the gate basepoint by `translations[i]`.
    pub generators: Vec<Deck>,
    pub translations: Vec<u32>,
    /// Index of the minimal-translation generator backing a cyclic verdict.
    pub primitive: Option<usize>,
    pub verdict: Verdict,
    /// Indices of an independent generator pair backing a higher verdict.
    pub witness: Option<(usize, usize)>,
    /// Diameter of the gate quotient under the generated group's window
    /// action; `None` when the quotient is too large to measure.
    pub quotient_diam: Option<u32>,
    /// Candidates whose membership could not be decided inside the window.
    pub undecided_candidates: usize,
    pub complete: bool,
}

enum PowerCheck {
    Power,
    Independent,
    OutOfWindow,
}

fn compose_maps(a: &[Option<VId>], b: &[Option<VId>]) -> Vec<Option<VId>> {
    a.iter().map(|o| o.and_then(|v| b[v.idx()])).collect()
}

fn invert_map(a: &[Option<VId>]) -> Result<Vec<Option<VId>>> {
    let mut out: Vec<Option<VId>> = vec![None; a.len()];
    for (v, img) in a.iter().enumerate() {
        if let Some(w) = img {
            if out[w.idx()].replace(VId(v as u32)).is_some() {
                return Err(Error::Incoherent("deck is not injective".into()));
            }
        }
    }
    Ok(out)
}

/// Restriction of a deck to a vertex set: defined only where source and
/// image both lie inside.
fn restrict_deck(deck: &Deck, window: &Bits) -> Deck {
    let map: Vec<Option<VId>> = deck
        .map
        .iter()
        .enumerate()
        .map(|(v, img)| {
            if !window.contains(v) {
                None
            } else {
                img.filter(|w| window.contains(w.idx()))
            }
        })
        .collect();
    let boundary_limited = map.iter().any(|m| m.is_none());
    Deck { map, boundary_limited }
}

/// Pointwise comparison of a composed partial map with a deck; both are
/// restrictions of global decks, so any overlap disagreement is an internal
/// invariant failure.
fn agree_everywhere(a: &[Option<VId>], b: &Deck) -> Result<usize> {
    let mut witnesses = 0usize;
    for (v, img) in a.iter().enumerate() {
        if let (Some(x), Some(y)) = (img, b.map[v]) {
            if *x != y {
                return Err(Error::Incoherent(
                    "two decks with a common value disagree".into(),
                ));
            }
            witnesses += 1;
        }
    }
    Ok(witnesses)
}

/// Is `g` a power of `prim` within the window? Decides by walking the
/// `prim`-orbit of `u0` in both directions and comparing reach against the
/// distance to `g(u0)`.
fn power_of(ball: &Ball, prim: &Deck, g: &Deck, u0: VId) -> Result<PowerCheck> {
    let cat = ball.cat0();
    let Some(target) = g.image(u0) else {
        return Ok(PowerCheck::OutOfWindow);
    };
    let dist_target = cat.dist(u0, target);
    let nv = ball.complex().vertex_count();

    let mut max_reach = [0u32; 2];
    for (dir, step) in [prim.map.clone(), invert_map(&prim.map)?].into_iter().enumerate() {
        let mut composed = step.clone();
        let mut cur = composed[u0.idx()];
        let mut k = 1usize;
        while let Some(v) = cur {
            max_reach[dir] = max_reach[dir].max(cat.dist(u0, v));
            if v == target {
                if agree_everywhere(&composed, g)? == 0 {
                    return Ok(PowerCheck::OutOfWindow);
                }
                return Ok(PowerCheck::Power);
            }
            if k > nv {
                return Err(Error::Incoherent("orbit walk did not terminate".into()));
            }
            composed = compose_maps(&composed, &step);
            cur = composed[u0.idx()];
            k += 1;
        }
    }
    if max_reach[0] >= dist_target && max_reach[1] >= dist_target {
        Ok(PowerCheck::Independent)
    } else {
        Ok(PowerCheck::OutOfWindow)
    }
}

/// Do two decks visibly fail to commute? `None` when no comparison point is
/// in window.
fn non_commuting(a: &Deck, b: &Deck) -> Option<bool> {
    let mut witnesses = 0usize;
    for v in 0..a.map.len() {
        let ab = a.map[v].and_then(|w| b.map[w.idx()]);
        let ba = b.map[v].and_then(|w| a.map[w.idx()]);
        if let (Some(x), Some(y)) = (ab, ba) {
            if x != y {
                return Some(true);
            }
            witnesses += 1;
        }
    }
    if witnesses > 0 {
        Some(false)
    } else {
        None
    }
}

/// Check that a deck preserves a fiber labeling: every in-window image of a
/// labeled vertex stays in the labeled set with the same label. `None` when
/// no image is in window.
fn preserves_labels(deck: &Deck, labels: &BTreeMap<VId, VId>) -> Option<bool> {
    let mut verified = 0usize;
    for (&b, &a) in labels {
        let Some(img) = deck.image(b) else {
            continue;
        };
        match labels.get(&img) {
            Some(&a2) if a2 == a => verified += 1,
            _ => return Some(false),
        }
    }
    if verified > 0 {
        Some(true)
    } else {
        None
    }
}

impl<'g> TreeWindow<'g> {
    /// Does the root deck stabilize every strip of the path? The deck is
    /// transported chamber by chamber across the strips it preserves.
    fn preserves_path(&self, path: &TreePath, root_deck: &Deck) -> Option<bool> {
        let n = path.strips.len();
        let mut cur = root_deck.clone();
        for (j, &si) in path.strips.iter().enumerate() {
            let strip = &self.strips[si];
            match preserves_labels(&cur, &strip.from.labels) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => return None,
            }
            if j + 1 == n {
                break;
            }
            // Transport across the strip: seed the far deck from any pair
            // related by the cylinder, then grow and cross-check.
            let mut seed = None;
            for (&bf, &bt) in &strip.cross {
                let Some(gbf) = cur.image(bf) else { continue };
                let Some(&gt) = strip.cross.get(&gbf) else { continue };
                seed = Some((bt, gt));
                break;
            }
            let Some((from, to)) = seed else {
                return None;
            };
            if from == to {
                // A window deck of a cover acts freely; an apparent fixed
                // point means the candidate does not extend.
                return Some(false);
            }
            let to_ball = self.ball_of(strip.to_chamber);
            let next = match deck_search(to_ball, from, to) {
                Ok(d) => d,
                Err(Error::DeckInconsistent(_)) | Err(Error::SeedMismatch) => {
                    return Some(false)
                }
                Err(_) => return None,
            };
            for (&bf, &bt) in &strip.cross {
                let Some(gbf) = cur.image(bf) else { continue };
                let Some(&gt) = strip.cross.get(&gbf) else { continue };
                match next.image(bt) {
                    Some(x) if x != gt => return Some(false),
                    _ => {}
                }
            }
            cur = next;
        }
        Some(true)
    }

    /// Quotient of the gate by the window action of the generators: diameter
    /// of the class adjacency graph, or `None` when it exceeds measurement
    /// size.
    fn gate_quotient_diam(&self, gate: &Bits, gens: &[Deck]) -> Option<u32> {
        let ball = self.ball_of(ROOT);
        let n = ball.complex().vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in gens {
            for v in gate.iter() {
                if let Some(w) = g.image(VId(v as u32)) {
                    if gate.contains(w.idx()) {
                        let (a, b) = (find(&mut parent, v), find(&mut parent, w.idx()));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
        let mut class: BTreeMap<usize, usize> = BTreeMap::new();
        for v in gate.iter() {
            let r = find(&mut parent, v);
            let next = class.len();
            class.entry(r).or_insert(next);
        }
        let c = class.len();
        if c == 0 {
            return None;
        }
        if c > 4000 {
            return None;
        }
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); c];
        let cat = ball.cat0();
        for v in gate.iter() {
            let cv = class[&find(&mut parent, v)];
            for &nb in cat.neighbors(VId(v as u32)) {
                if gate.contains(nb.idx()) {
                    let cn = class[&find(&mut parent, nb.idx())];
                    if cn != cv {
                        adj[cv].insert(cn);
                        adj[cn].insert(cv);
                    }
                }
            }
        }
        let mut diam = 0u32;
        for start in 0..c {
            let mut dist = vec![u32::MAX; c];
            dist[start] = 0;
            let mut q = VecDeque::from([start]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if dist[y] == u32::MAX {
                        dist[y] = dist[x] + 1;
                        q.push_back(y);
                    }
                }
            }
            for &d in &dist {
                if d != u32::MAX {
                    diam = diam.max(d);
                }
            }
        }
        Some(diam)
    }

    pub fn path_stabilizer(&self, path: &TreePath) -> Result<PathStabilizer> {
        self.joint_stabilizer(std::slice::from_ref(path), &[], &StabOptions::default())
    }

    /// Stabilizer approximation for several paths plus extra labeled root
    /// constraints. The gate is the pitchfork fold of the individual gates
    /// and constraint sets, in the given order.
    pub fn joint_stabilizer(
        &self,
        paths: &[TreePath],
        extras: &[LabeledSet],
        opts: &StabOptions,
    ) -> Result<PathStabilizer> {
        let ball = self.ball_of(ROOT);
        let cat = ball.cat0();

        let mut reliable = true;
        let mut gates = Vec::with_capacity(paths.len());
        for p in paths {
            let g = self.path_gate(p)?;
            reliable &= g.reliable;
            gates.push(g);
        }
        let chain_equal = gates.iter().all(|g| g.chain_equal);

        let mut acc: Option<Bits> = None;
        let sets = gates
            .iter()
            .map(|g| &g.verts)
            .chain(extras.iter().map(|e| &e.verts));
        for bits in sets {
            acc = Some(match acc {
                None => bits.clone(),
                Some(a) => {
                    if a.is_empty() || bits.is_empty() {
                        Bits::new(cat.vertex_count())
                    } else {
                        let a_set = convexify(cat, &a, &mut reliable)?;
                        let b_set = convexify(cat, bits, &mut reliable)?;
                        pitchfork(cat, &a_set, &b_set)?.verts
                    }
                }
            });
        }
        let gate_bits = acc.unwrap_or_else(|| Bits::new(cat.vertex_count()));

        let truncated = {
            let mut chambers: BTreeSet<usize> = BTreeSet::from([ROOT]);
            for p in paths {
                for &s in &p.strips {
                    chambers.insert(self.strips[s].to_chamber);
                }
            }
            chambers.iter().any(|&c| self.chambers[c].truncated)
        };

        if gate_bits.is_empty() {
            return Ok(PathStabilizer {
                gate: PathGate {
                    verts: gate_bits,
                    set: None,
                    reliable: false,
                    chain_equal,
                },
                generators: Vec::new(),
                translations: Vec::new(),
                primitive: None,
                verdict: Verdict::Undecided,
                witness: None,
                quotient_diam: None,
                undecided_candidates: 0,
                complete: false,
            });
        }
        let mut gate_reliable = reliable;
        let gate_set = Some(convexify(cat, &gate_bits, &mut gate_reliable)?);

        let u0 = VId(gate_bits.first().expect("gate is nonempty") as u32);
        let mut candidates: Vec<VId> = gate_bits
            .iter()
            .map(|v| VId(v as u32))
            .filter(|&v| v != u0 && ball.base_of(v) == ball.base_of(u0))
            .collect();
        candidates.sort_by_key(|&v| (cat.dist(u0, v), v));

        let mut generators: Vec<Deck> = Vec::new();
        let mut undecided_candidates = 0usize;
        let mut cap_hit = false;
        let mut early_witness: Option<(usize, usize)> = None;

        'scan: for (ci, &v) in candidates.iter().enumerate() {
            if ci >= opts.candidate_cap {
                cap_hit = true;
                break;
            }
            let deck = match deck_search(ball, u0, v) {
                Ok(d) => d,
                Err(Error::DeckInconsistent(_)) => continue,
                Err(e) => return Err(e),
            };
            let mut ok = true;
            for p in paths {
                match self.preserves_path(p, &deck) {
                    Some(true) => {}
                    Some(false) => {
                        ok = false;
                        break;
                    }
                    None => {
                        ok = false;
                        undecided_candidates += 1;
                        break;
                    }
                }
            }
            if ok {
                for e in extras {
                    match preserves_labels(&deck, &e.labels) {
                        Some(true) => {}
                        Some(false) => {
                            ok = false;
                            break;
                        }
                        None => {
                            ok = false;
                            undecided_candidates += 1;
                            break;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            generators.push(deck);
            let new = generators.len() - 1;
            for old in 0..new {
                if early_witness.is_none()
                    && non_commuting(&generators[old], &generators[new]) == Some(true)
                {
                    early_witness = Some((old, new));
                    if opts.early_higher_exit {
                        break 'scan;
                    }
                }
            }
        }

        let mut translations = Vec::with_capacity(generators.len());
        for g in &generators {
            translations.push(translation_length(ball, g)?.length);
        }

        let mut verdict;
        let mut primitive = None;
        let mut witness = None;
        let mut undecided_powers = false;

        if let Some(w) = early_witness {
            verdict = Verdict::Higher;
            witness = Some(w);
        } else if generators.is_empty() {
            verdict = Verdict::Undecided; // settled below via quotient size
        } else {
            let prim = (0..generators.len())
                .min_by_key(|&i| (translations[i], i))
                .expect("nonempty");
            verdict = Verdict::Cyclic;
            for (i, g) in generators.iter().enumerate() {
                if i == prim {
                    continue;
                }
                match power_of(ball, &generators[prim], g, u0)? {
                    PowerCheck::Power => {}
                    PowerCheck::Independent => {
                        verdict = Verdict::Higher;
                        witness = Some((prim, i));
                        break;
                    }
                    PowerCheck::OutOfWindow => undecided_powers = true,
                }
            }
            if verdict == Verdict::Cyclic {
                if undecided_powers {
                    verdict = Verdict::Undecided;
                } else {
                    // Two-ended growth: the primitive orbit of u0 must leave
                    // u0 in both directions inside the window.
                    let p = &generators[prim];
                    let fwd = p.image(u0).is_some();
                    let bwd = invert_map(&p.map)?[u0.idx()].is_some();
                    if fwd && bwd {
                        primitive = Some(prim);
                    } else {
                        verdict = Verdict::Undecided;
                    }
                }
            }
        }

        let quotient_diam = self.gate_quotient_diam(&gate_bits, &generators);
        if verdict == Verdict::Undecided && generators.is_empty() && early_witness.is_none()
        {
            let small = (self.radius / 2).max(1);
            if undecided_candidates == 0 && !cap_hit {
                match quotient_diam {
                    Some(d) if d <= small => verdict = Verdict::Trivial,
                    _ => {}
                }
            }
        }

        let complete = gate_reliable
            && reliable
            && undecided_candidates == 0
            && !cap_hit
            && !truncated;

        Ok(PathStabilizer {
            gate: PathGate {
                verts: gate_bits,
                set: gate_set,
                reliable: gate_reliable && reliable,
                chain_equal,
            },
            generators,
            translations,
            primitive,
            verdict,
            witness,
            quotient_diam,
            undecided_candidates,
            complete,
        })
    }
}

// ---------------------------------------------------------------------------
// Cyclonormality
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycloMode {
    Edges,
    Paths(u32),
}

impl CycloMode {
    fn level(self) -> u32 {
        match self {
            CycloMode::Edges => 1,
            CycloMode::Paths(n) => n.max(1),
        }
    }
    fn label(self) -> String {
        match self {
            CycloMode::Edges => "edges".into(),
            CycloMode::Paths(n) => format!("paths:{}", n.max(1)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CycloEntry {
    pub vertex: String,
    pub members: Vec<String>,
    pub verdict: Verdict,
    pub gate_size: usize,
    pub quotient_diam: Option<u32>,
    /// Two independent generators backing a higher verdict.
    pub witness: Option<[String; 2]>,
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycloReport {
    pub mode: String,
    pub radius: u32,
    pub coset_cap: usize,
    pub entries: Vec<CycloEntry>,
    pub windows: Vec<(String, bool)>,
    pub pass: bool,
    pub higher: usize,
    pub undecided: usize,
}

/// A stabilizer computation together with the member paths it constrains.
pub struct CycloComputed {
    pub members: Vec<TreePath>,
    pub stab: PathStabilizer,
}

impl<'g> TreeWindow<'g> {
    /// Group length-`n` paths into translate classes (`n` in original
    /// edges). Length-1 paths over one incidence are cosets of a single
    /// subgroup, hence always one class (loop halves continue uniquely
    /// through the midpoint chamber); longer paths are grouped by searching
    /// for a window deck carrying one strip chain onto the other
    /// label-for-label.
    fn path_classes(&self, n: u32) -> Result<Vec<Vec<TreePath>>> {
        let paths = self.paths_of_weight(n);
        let sig = |p: &TreePath| -> Vec<(usize, u8)> {
            p.strips
                .iter()
                .map(|&s| (self.strips[s].gedge, self.strips[s].from_side))
                .collect()
        };
        let mut keys: Vec<Vec<(usize, u8)>> = Vec::new();
        let mut buckets: Vec<Vec<TreePath>> = Vec::new();
        for p in paths {
            let k = sig(&p);
            match keys.iter().position(|x| *x == k) {
                Some(i) => buckets[i].push(p),
                None => {
                    keys.push(k);
                    buckets.push(vec![p]);
                }
            }
        }
        if n == 1 {
            return Ok(buckets);
        }
        let mut classes = Vec::new();
        for bucket in buckets {
            let m = bucket.len();
            let mut parent: Vec<usize> = (0..m).collect();
            fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for i in 0..m {
                for j in i + 1..m {
                    if find(&mut parent, i) == find(&mut parent, j) {
                        continue;
                    }
                    if self.paths_translate_equivalent(&bucket[i], &bucket[j])? {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
            let mut by_root: BTreeMap<usize, Vec<TreePath>> = BTreeMap::new();
            for (i, p) in bucket.into_iter().enumerate() {
                by_root.entry(find(&mut parent, i)).or_default().push(p);
            }
            classes.extend(by_root.into_values());
        }
        Ok(classes)
    }

    /// Is there a window deck carrying path `a` onto path `b` strip by strip,
    /// preserving fiber labels?
    fn paths_translate_equivalent(&self, a: &TreePath, b: &TreePath) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        let n = a.strips.len();
        if n != b.strips.len() {
            return Ok(false);
        }
        let ea = &self.strips[a.strips[0]].from;
        let eb = &self.strips[b.strips[0]].from;
        let (seed_v, seed_label) = ea.seed;
        let root_ball = self.ball_of(ROOT);
        'witness: for (&bv, &bl) in &eb.labels {
            if bl != seed_label {
                continue;
            }
            // Identity witness (shared first elevation) or a root deck.
            let mut cur: Deck = if bv == seed_v {
                Deck {
                    map: (0..root_ball.complex().vertex_count())
                        .map(|i| Some(VId(i as u32)))
                        .collect(),
                    boundary_limited: false,
                }
            } else {
                match deck_search(root_ball, seed_v, bv) {
                    Ok(d) => d,
                    Err(Error::DeckInconsistent(_)) | Err(Error::SeedMismatch) => continue,
                    Err(e) => return Err(e),
                }
            };
            for j in 0..n {
                let sa = &self.strips[a.strips[j]];
                let sb = &self.strips[b.strips[j]];
                // The current deck must carry sa's elevation into sb's,
                // label for label.
                let mut verified = 0usize;
                for (&x, &l) in &sa.from.labels {
                    let Some(y) = cur.image(x) else { continue };
                    match sb.from.labels.get(&y) {
                        Some(&l2) if l2 == l => verified += 1,
                        _ => continue 'witness,
                    }
                }
                if verified == 0 {
                    continue 'witness;
                }
                if j + 1 == n {
                    return Ok(true);
                }
                // Cross both cylinders and keep mapping the next chambers.
                let mut seed = None;
                for (&xf, &xt) in &sa.cross {
                    let Some(yf) = cur.image(xf) else { continue };
                    let Some(&yt) = sb.cross.get(&yf) else { continue };
                    seed = Some((xt, yt));
                    break;
                }
                let Some((from, to)) = seed else { continue 'witness };
                let next = match grow_map(
                    self.ball_of(sa.to_chamber),
                    self.ball_of(sb.to_chamber),
                    from,
                    to,
                ) {
                    Ok(d) => d,
                    Err(Error::DeckInconsistent(_)) | Err(Error::SeedMismatch) => {
                        continue 'witness
                    }
                    Err(e) => return Err(e),
                };
                for (&xf, &xt) in &sa.cross {
                    let Some(yf) = cur.image(xf) else { continue };
                    let Some(&yt) = sb.cross.get(&yf) else { continue };
                    match next.image(xt) {
                        Some(z) if z != yt => continue 'witness,
                        _ => {}
                    }
                }
                cur = next;
            }
        }
        Ok(false)
    }

    /// The canonical stabilizer collection at this window's root: within each
    /// translate class all pairs and triples, and across distinct classes
    /// every member against every 2-subset of the other class, plus all
    /// cross-class pairs.
    pub fn cyclo_entries(&self, level: u32, opts: &StabOptions) -> Result<Vec<CycloComputed>> {
        let classes = self.path_classes(level)?;
        let mut groups: Vec<Vec<TreePath>> = Vec::new();
        for class in &classes {
            let m = class.len();
            for i in 0..m {
                for j in i + 1..m {
                    groups.push(vec![class[i].clone(), class[j].clone()]);
                }
            }
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        groups.push(vec![
                            class[i].clone(),
                            class[j].clone(),
                            class[k].clone(),
                        ]);
                    }
                }
            }
        }
        for x in 0..classes.len() {
            for y in 0..classes.len() {
                if x == y {
                    continue;
                }
                for rho in &classes[x] {
                    if x < y {
                        for sigma in &classes[y] {
                            groups.push(vec![rho.clone(), sigma.clone()]);
                        }
                    }
                    let m = classes[y].len();
                    for i in 0..m {
                        for j in i + 1..m {
                            groups.push(vec![
                                rho.clone(),
                                classes[y][i].clone(),
                                classes[y][j].clone(),
                            ]);
                        }
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(groups.len());
        for members in groups {
            let stab = self.joint_stabilizer(&members, &[], opts)?;
            out.push(CycloComputed { members, stab });
        }
        Ok(out)
    }
}

/// Tree depth (in strips) needed to hold every path of `len` original edges.
fn weight_depth(gog: &Gog, len: u32) -> u32 {
    if gog.edges().iter().any(|e| e.half) {
        2 * len
    } else {
        len
    }
}

fn generator_label(deck: &Deck, translation: u32) -> String {
    let mut pairs = deck.defined();
    match pairs.next() {
        Some((v, w)) => format!("{}->{} t={}", v.0, w.0, translation),
        None => format!("t={translation}"),
    }
}

/// Run the cyclonormality check over every window root of the graph of
/// complexes. `Paths(1)` and `Edges` are by definition the same collection.
pub fn check_cyclonormal(
    gog: &Gog,
    mode: CycloMode,
    radius: u32,
    coset_cap: usize,
    cell_budget: usize,
) -> Result<CycloReport> {
    let level = mode.level();
    let opts = StabOptions::default();
    let mut entries = Vec::new();
    let mut windows = Vec::new();
    for v in 0..gog.vertices().len() {
        let depth = weight_depth(gog, level);
        let w = TreeWindow::build(gog, v, depth, radius, coset_cap, cell_budget)?;
        let name = gog.vertices()[v].name.clone();
        windows.push((name.clone(), w.chambers.iter().any(|c| c.truncated)));
        for comp in w.cyclo_entries(level, &opts)? {
            let witness = comp.stab.witness.map(|(i, j)| {
                [
                    generator_label(&comp.stab.generators[i], comp.stab.translations[i]),
                    generator_label(&comp.stab.generators[j], comp.stab.translations[j]),
                ]
            });
            entries.push(CycloEntry {
                vertex: name.clone(),
                members: comp
                    .members
                    .iter()
                    .map(|p| w.path_descriptor(p))
                    .collect(),
                verdict: comp.stab.verdict,
                gate_size: comp.stab.gate.verts.count(),
                quotient_diam: comp.stab.quotient_diam,
                witness,
                complete: comp.stab.complete,
            });
        }
    }
    let higher = entries.iter().filter(|e| e.verdict == Verdict::Higher).count();
    let undecided = entries.iter().filter(|e| e.verdict == Verdict::Undecided).count();
    Ok(CycloReport {
        mode: mode.label(),
        radius,
        coset_cap,
        entries,
        windows,
        pass: higher == 0,
        higher,
        undecided,
    })
}

// ---------------------------------------------------------------------------
// Triple intersections as quasilines
// ---------------------------------------------------------------------------

pub enum TripleOutcome<'a> {
    /// The triple stabilizer is finite in the window.
    Absent,
    /// The triple stabilizer is cyclic; its gate and primitive form a
    /// quasiline over the root chamber.
    Quasiline(Box<Quasiline<'a>>),
    /// The triple stabilizer has two independent generators.
    Violation(PathStabilizer),
}

impl<'g> TreeWindow<'g> {
    /// Intersect the stabilizers of two root strips and a translated copy of
    /// the second. The translate must genuinely move the second strip.
    pub fn triple_quasiline(
        &self,
        e_strip: usize,
        f_strip: usize,
        translate: &Deck,
    ) -> Result<TripleOutcome<'_>> {
        for s in [e_strip, f_strip] {
            if self.strips.get(s).map(|x| x.from_chamber) != Some(ROOT) {
                return Err(Error::BadPath(format!("strip #{s} is not a root strip")));
            }
        }
        let f = &self.strips[f_strip].from;
        match preserves_labels(translate, &f.labels) {
            Some(false) => {}
            Some(true) => {
                return Err(Error::Hypothesis(
                    "translate stabilizes the second strip; the triple is degenerate"
                        .into(),
                ))
            }
            None => return Err(Error::Undecided(1)),
        }
        let ball = self.ball_of(ROOT);
        // Regrow the translated elevation from one image pair so that it is
        // saturated in the window; the raw pointwise image stops short at
        // the boundary moved by the translate.
        let (gedge, from_side) =
            (self.strips[f_strip].gedge, self.strips[f_strip].from_side);
        let edge = &self.gog.edges()[gedge];
        let (fiber, phi) = (&edge.space, &edge.maps[from_side as usize]);
        let mut seed = None;
        for (&b, &a) in &f.labels {
            if let Some(img) = translate.image(b) {
                seed = Some((img, a));
                break;
            }
        }
        let Some((img0, a0)) = seed else {
            return Err(Error::Undecided(1));
        };
        let sat = elevation_component(ball, fiber, phi, img0, a0)?;
        for (&b, &a) in &f.labels {
            if let Some(img) = translate.image(b) {
                match sat.labels.get(&img) {
                    Some(&a2) if a2 == a => {}
                    _ => {
                        return Err(Error::Incoherent(
                            "translate does not carry the strip onto one elevation"
                                .into(),
                        ))
                    }
                }
            }
        }
        let paths = [
            TreePath { strips: vec![e_strip] },
            TreePath { strips: vec![f_strip] },
        ];
        let extra = LabeledSet { verts: sat.verts, labels: sat.labels };
        let stab = self.joint_stabilizer(&paths, &[extra], &StabOptions::default())?;
        match stab.verdict {
            Verdict::Trivial => Ok(TripleOutcome::Absent),
            Verdict::Higher => Ok(TripleOutcome::Violation(stab)),
            Verdict::Cyclic => {
                let prim = stab.primitive.expect("cyclic verdict has a primitive");
                let restricted = restrict_deck(&stab.generators[prim], &stab.gate.verts);
                let q =
                    Quasiline::validate(ball, &restricted, Some(&stab.gate.verts), 2)?;
                Ok(TripleOutcome::Quasiline(Box::new(q)))
            }
            Verdict::Undecided => Err(Error::Undecided(1)),
        }
    }
}

// ---------------------------------------------------------------------------
// Stature probe
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BudgetField {
    /// Decimal value; absent when left symbolic.
    pub value: Option<String>,
    pub status: &'static str,
}

fn field(v: u128, status: &'static str) -> BudgetField {
    BudgetField { value: Some(v.to_string()), status }
}

/// The derived growth budget: observed window quantities (empirical), the
/// bound formulas computed from them, and the statuses telling them apart.
#[derive(Clone, Debug, Serialize)]
pub struct StatureBudget {
    /// S: largest gate quotient diameter over the canonical collection.
    pub stature: BudgetField,
    /// Q: the relatedness threshold for quasiline pairs.
    pub pair_threshold: BudgetField,
    /// m: least common multiple of commensuration exponents.
    pub commensuration: BudgetField,
    /// L: largest window dual-edge count over essential classes.
    pub dual_load: BudgetField,
    /// M: largest crossing gap over quasiline representatives.
    pub crossing_gap: BudgetField,
    /// h: largest trivial-class count over quasiline representatives.
    pub trivial_count: BudgetField,
    /// B: block bound.
    pub block: BudgetField,
    /// R: window reach, 3B(h+1)+h.
    pub reach: BudgetField,
    /// T: transition count, (#edge-space edges)^R; symbolic when R is large.
    pub transition: BudgetField,
    /// P: window period, (T+1)R; omitted when T is symbolic.
    pub period: BudgetField,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatureClass {
    /// Digest of the canonical certificate of the quotient complex.
    pub key: String,
    pub first_length: u32,
    pub witness: String,
    /// Vertex, edge, square class counts of the quotient.
    pub quotient_cells: [usize; 3],
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatureReport {
    pub root: String,
    pub l_max: u32,
    pub radius: u32,
    pub coset_cap: usize,
    /// Cumulative distinct quotient classes over paths of length <= L.
    pub tallies: Vec<usize>,
    pub classes: Vec<StatureClass>,
    pub stabilized: bool,
    pub stabilization_length: Option<u32>,
    pub undecided_paths: usize,
    pub caveats: Vec<String>,
    pub budget: StatureBudget,
}

fn sha_hex(data: &str) -> String {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(data.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

impl<'g> TreeWindow<'g> {
    /// Image of a window edge under a deck, when every endpoint maps.
    fn edge_image(&self, ball: &Ball, deck: &Deck, e: crate::ids::EId) -> Option<crate::ids::EId> {
        let ec = ball.complex().edge(e);
        let (x0, x1) = (ec.ends[0], ec.ends[1]);
        let (y0, y1) = (deck.image(x0)?, deck.image(x1)?);
        let s = ball.base_of_edge(e);
        let (v2, e2) = ball.port_edge(y0, s.end(0))?;
        if v2 == y1 {
            Some(e2)
        } else {
            None
        }
    }

    fn square_image(&self, ball: &Ball, deck: &Deck, si: usize) -> Option<crate::ids::SqId> {
        let sq = &ball.complex().squares()[si];
        let mut corners = [VId(0); 4];
        for (i, c) in sq.corners.iter().enumerate() {
            corners[i] = deck.image(*c)?;
        }
        let mut sides = sq.sides;
        for (i, side) in sq.sides.iter().enumerate() {
            let from_c = corners[SIDE_CORNERS[i].0 as usize];
            let base_side = ball.base_of_edge(side.e);
            let oriented = if side.rev { base_side.reversed() } else { base_side };
            let (_, be) = ball.port_edge(from_c, oriented.end(0))?;
            let stored = ball.complex().edge(be);
            sides[i] = SideRef { e: be, rev: stored.ends[0] != from_c };
        }
        ball.complex().find_square(corners, sides)
    }

    /// Canonical certificate of the gate subcomplex modulo the window action
    /// of the generators, with cells colored by their base cells. Returns the
    /// certificate and the quotient cell counts.
    pub fn gate_quotient_certificate(
        &self,
        gate: &Bits,
        gens: &[Deck],
    ) -> Result<(String, [usize; 3])> {
        let ball = self.ball_of(ROOT);
        let cx = ball.complex();
        for cube in cx.cubes() {
            if cube.corners.iter().all(|c| gate.contains(c.idx())) {
                return Err(Error::Malformed(
                    "stature quotients of 3-dimensional windows are not supported"
                        .into(),
                ));
            }
        }
        let nv = cx.vertex_count();
        let ne = cx.edge_count();
        let nsq = cx.square_count();
        let active_edge: Vec<bool> = cx
            .edges()
            .iter()
            .map(|e| gate.contains(e.ends[0].idx()) && gate.contains(e.ends[1].idx()))
            .collect();
        let active_sq: Vec<bool> = cx
            .squares()
            .iter()
            .map(|s| s.corners.iter().all(|c| gate.contains(c.idx())))
            .collect();

        let total = nv + ne + nsq;
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra.max(rb)] = ra.min(rb);
            }
        };
        for g in gens {
            for v in gate.iter() {
                if let Some(w) = g.image(VId(v as u32)) {
                    if gate.contains(w.idx()) {
                        union(&mut parent, v, w.idx());
                    }
                }
            }
            for e in 0..ne {
                if !active_edge[e] {
                    continue;
                }
                if let Some(e2) = self.edge_image(ball, g, crate::ids::EId(e as u32)) {
                    if active_edge[e2.idx()] {
                        union(&mut parent, nv + e, nv + e2.idx());
                    }
                }
            }
            for s in 0..nsq {
                if !active_sq[s] {
                    continue;
                }
                if let Some(s2) = self.square_image(ball, g, s) {
                    if active_sq[s2.idx()] {
                        union(&mut parent, nv + ne + s, nv + ne + s2.idx());
                    }
                }
            }
        }

        let mut graph = ColoredGraph::default();
        let mut vnode: BTreeMap<usize, usize> = BTreeMap::new();
        let mut enode: BTreeMap<usize, usize> = BTreeMap::new();
        let mut sqnode: BTreeMap<usize, usize> = BTreeMap::new();
        for v in gate.iter() {
            let r = find(&mut parent, v);
            vnode.entry(r).or_insert_with(|| {
                graph.add_node((1 << 40) | ball.base_of(VId(r as u32)).0 as u64)
            });
        }
        for e in 0..ne {
            if !active_edge[e] {
                continue;
            }
            let r = find(&mut parent, nv + e);
            enode.entry(r).or_insert_with(|| {
                let base = ball.base_of_edge(crate::ids::EId((r - nv) as u32)).e;
                graph.add_node((2 << 40) | base.0 as u64)
            });
        }
        for s in 0..nsq {
            if !active_sq[s] {
                continue;
            }
            let r = find(&mut parent, nv + ne + s);
            sqnode.entry(r).or_insert_with(|| {
                let base = ball.base_of_square(crate::ids::SqId((r - nv - ne) as u32));
                graph.add_node((3 << 40) | base.0 as u64)
            });
        }
        // Edge incidences, colored by the base end each endpoint realizes.
        for (&r, &en) in &enode {
            let e = crate::ids::EId((r - nv) as u32);
            let ec = cx.edge(e);
            let s = ball.base_of_edge(e);
            let c0 = vnode[&find(&mut parent, ec.ends[0].idx())];
            let c1 = vnode[&find(&mut parent, ec.ends[1].idx())];
            graph.add_sym(en, c0, s.end(0).w as u32);
            graph.add_sym(en, c1, s.end(1).w as u32);
        }
        // Square incidences through corner nodes: the corner 4-cycle is
        // undirected, so dihedral presentations of one square agree.
        for (&r, &sn) in &sqnode {
            let sq = &cx.squares()[r - nv - ne];
            let mut cnodes = [0usize; 4];
            for (i, corner) in sq.corners.iter().enumerate() {
                let cn = graph.add_node(4 << 40);
                cnodes[i] = cn;
                graph.add_sym(cn, sn, 10);
                graph.add_sym(cn, vnode[&find(&mut parent, corner.idx())], 11);
                let (s1, s2) = crate::ids::CORNER_SIDES[i];
                for sidx in [s1, s2] {
                    let se = sq.sides[sidx as usize].e;
                    graph.add_sym(cn, enode[&find(&mut parent, nv + se.idx())], 12);
                }
            }
            for (a, b) in [(0, 1), (1, 3), (3, 2), (2, 0)] {
                graph.add_sym(cnodes[a], cnodes[b], 13);
            }
        }
        let cert = canon::certificate(&graph);
        Ok((cert, [vnode.len(), enode.len(), sqnode.len()]))
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn checked_lcm(a: u128, b: u128) -> Result<u128> {
    if a == 0 || b == 0 {
        return Ok(a.max(b));
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(Error::Overflow("commensuration lcm"))
}

struct BudgetInputs {
    s: u128,
    s_status: &'static str,
    m: u128,
    ell: u128,
    gap: u128,
    h: u128,
    b0s: Vec<u128>,
    powers: Vec<u128>,
    shifts: Vec<u128>,
}

fn assemble_budget(gog: &Gog, inp: &BudgetInputs, caveats: &mut Vec<String>) -> Result<StatureBudget> {
    let q = inp.s;
    let mut b: u128 = 0;
    for &b0 in &inp.b0s {
        b = b.max(b0);
    }
    let mut prod: u128 = 1;
    for &sh in &inp.shifts {
        prod = prod.checked_mul(sh).ok_or(Error::Overflow("translation product"))?;
    }
    for &n_i in &inp.powers {
        let t1 = 2u128
            .checked_mul(inp.m)
            .and_then(|x| x.checked_mul(prod))
            .and_then(|x| x.checked_mul(inp.ell))
            .and_then(|x| x.checked_add(5))
            .and_then(|x| x.checked_mul(n_i))
            .and_then(|x| x.checked_mul(inp.gap))
            .ok_or(Error::Overflow("block bound product"))?;
        b = b.max(t1 / 2);
    }
    b = b.max(2 * inp.s).max(2 * q);
    let r = 3u128
        .checked_mul(b)
        .and_then(|x| x.checked_mul(inp.h + 1))
        .and_then(|x| x.checked_add(inp.h))
        .ok_or(Error::Overflow("window reach"))?;
    let base = gog
        .edges()
        .iter()
        .map(|e| e.space.edge_count() as u128)
        .max()
        .unwrap_or(0);
    let t = if r <= 4096 {
        base.checked_pow(r as u32)
    } else {
        None
    };
    if t.is_none() {
        caveats.push("transition count left symbolic; window period omitted".into());
    }
    let p = t.and_then(|t| t.checked_add(1)).and_then(|t1| t1.checked_mul(r));
    if t.is_some() && p.is_none() {
        caveats.push("window period overflows; omitted".into());
    }
    Ok(StatureBudget {
        stature: field(inp.s, inp.s_status),
        pair_threshold: field(q, inp.s_status),
        commensuration: field(inp.m, "empirical"),
        dual_load: field(inp.ell, "empirical"),
        crossing_gap: field(inp.gap, "empirical"),
        trivial_count: field(inp.h, "empirical"),
        block: field(b, "computed"),
        reach: field(r, "computed"),
        transition: BudgetField { value: t.map(|x| x.to_string()), status: "computed" },
        period: BudgetField { value: p.map(|x| x.to_string()), status: "computed" },
    })
}

/// Probe quotient growth: for each path length up to `l_max`, compute every
/// path stabilizer, keep the infinite ones, and bucket the quotients of
/// their gates by canonical certificate. Also assembles the growth budget
/// from the length-1 canonical collection.
pub fn stature_probe(
    gog: &Gog,
    root: usize,
    l_max: u32,
    radius: u32,
    coset_cap: usize,
    cell_budget: usize,
    s_override: Option<u64>,
) -> Result<StatureReport> {
    let w = TreeWindow::build(
        gog,
        root,
        weight_depth(gog, l_max.max(1)),
        radius,
        coset_cap,
        cell_budget,
    )?;
    // Quotient bucketing needs every in-window generator, not only enough
    // of them to settle the verdict.
    let opts = StabOptions { early_higher_exit: false, ..StabOptions::default() };
    let mut caveats: Vec<String> = Vec::new();
    let push_caveat = |caveats: &mut Vec<String>, c: String| {
        if !caveats.contains(&c) {
            caveats.push(c);
        }
    };

    let mut classes: BTreeMap<String, StatureClass> = BTreeMap::new();
    let mut tallies = Vec::with_capacity(l_max as usize);
    let mut undecided_paths = 0usize;
    for l in 1..=l_max {
        for path in w.paths_of_weight(l) {
            let stab = w.joint_stabilizer(std::slice::from_ref(&path), &[], &opts)?;
            match stab.verdict {
                Verdict::Trivial => {}
                Verdict::Undecided => undecided_paths += 1,
                Verdict::Cyclic | Verdict::Higher => {
                    let (cert, cells) = match w
                        .gate_quotient_certificate(&stab.gate.verts, &stab.generators)
                    {
                        Ok(x) => x,
                        Err(Error::Malformed(m)) => {
                            undecided_paths += 1;
                            push_caveat(&mut caveats, m);
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let key = sha_hex(&cert);
                    classes.entry(key.clone()).or_insert_with(|| StatureClass {
                        key,
                        first_length: l,
                        witness: w.path_descriptor(&path),
                        quotient_cells: cells,
                        verdict: stab.verdict,
                    });
                }
            }
        }
        tallies.push(classes.len());
    }
    if undecided_paths > 0 {
        push_caveat(
            &mut caveats,
            format!("{undecided_paths} path stabilizers undecided in this window"),
        );
    }

    // Stabilization: the smallest length from which the cumulative tally is
    // constant, provided at least one later length confirms it.
    let mut stabilization_length = None;
    if tallies.len() >= 2 {
        let last = *tallies.last().unwrap();
        let mut l_star = tallies.len();
        while l_star >= 2 && tallies[l_star - 2] == last {
            l_star -= 1;
        }
        if l_star < tallies.len() {
            stabilization_length = Some(l_star as u32);
        }
    }
    if stabilization_length.is_none() && l_max > 0 {
        push_caveat(
            &mut caveats,
            "class tally still growing at the window bound; not stabilized".into(),
        );
    }

    // Budget from the length-1 canonical collection.
    let entries = w.cyclo_entries(1, &opts)?;
    let mut s_obs: u128 = 0;
    for e in &entries {
        if let Some(d) = e.stab.quotient_diam {
            s_obs = s_obs.max(d as u128);
        }
    }
    let (s, s_status): (u128, &'static str) = match s_override {
        Some(v) => (v as u128, "caller-supplied"),
        None => (s_obs, "empirical"),
    };

    let ball = w.ball_of(ROOT);
    let mut reps: Vec<Quasiline> = Vec::new();
    let mut rep_keys: BTreeSet<(Vec<u32>, u32)> = BTreeSet::new();
    for e in &entries {
        if e.stab.verdict != Verdict::Cyclic {
            continue;
        }
        let prim = match e.stab.primitive {
            Some(p) => &e.stab.generators[p],
            None => continue,
        };
        let u0 = match e.stab.gate.verts.first() {
            Some(v) => VId(v as u32),
            None => continue,
        };
        let key = (
            e.stab.gate.verts.iter().map(|v| v as u32).collect::<Vec<_>>(),
            prim.image(u0).map(|v| v.0).unwrap_or(u32::MAX),
        );
        if !rep_keys.insert(key) {
            continue;
        }
        let restricted = restrict_deck(prim, &e.stab.gate.verts);
        match Quasiline::validate(ball, &restricted, Some(&e.stab.gate.verts), 2) {
            Ok(q) => reps.push(q),
            Err(err) => push_caveat(
                &mut caveats,
                format!("quasiline representative skipped: {err}"),
            ),
        }
    }
    if reps.is_empty() {
        push_caveat(&mut caveats, "no quasiline representatives in this window".into());
    }

    let mut m: u128 = 1;
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let c = commensurate(&reps[i], &reps[j], s as u32)?;
            if c.related {
                m = checked_lcm(m, c.d1.unsigned_abs() as u128)?;
            }
        }
    }

    let mut ell: u128 = 0;
    let mut gap: u128 = 0;
    let mut h: u128 = 0;
    let mut b0s = Vec::new();
    let mut powers = Vec::new();
    let mut shifts = Vec::new();
    for q in &reps {
        shifts.push(q.shift() as u128);
        let cls = match q.classify() {
            Ok(c) => c,
            Err(err) => {
                push_caveat(&mut caveats, format!("representative unclassified: {err}"));
                continue;
            }
        };
        let hyps = ball.cat0().hyperplanes();
        for class in &cls.classes {
            if class.kind != Kind::Essential {
                continue;
            }
            let count = hyps.classes[class.h.idx()]
                .edges
                .iter()
                .filter(|&&e| {
                    let ec = ball.complex().edge(e);
                    q.window().verts.contains(ec.ends[0].idx())
                        && q.window().verts.contains(ec.ends[1].idx())
                })
                .count();
            ell = ell.max(count as u128);
        }
        match q.constants(&cls) {
            Ok(consts) => {
                gap = gap.max(consts.crossing_gap as u128);
                h = h.max(consts.trivial_count as u128);
                b0s.push(consts.threshold as u128);
                powers.push(consts.power as u128);
            }
            Err(err) => {
                push_caveat(&mut caveats, format!("constants unavailable: {err}"));
            }
        }
    }

    let budget = assemble_budget(
        gog,
        &BudgetInputs { s, s_status, m, ell, gap, h, b0s, powers, shifts },
        &mut caveats,
    )?;

    let mut class_list: Vec<StatureClass> = classes.into_values().collect();
    class_list.sort_by(|a, b| {
        (a.first_length, &a.witness).cmp(&(b.first_length, &b.witness))
    });

    Ok(StatureReport {
        root: gog.vertices()[root].name.clone(),
        l_max,
        radius,
        coset_cap,
        tallies,
        classes: class_list,
        stabilized: stabilization_length.is_some(),
        stabilization_length,
        undecided_paths,
        caveats,
        budget,
    })
}

// ---------------------------------------------------------------------------
