//! ⟨φ⟩-cocompact convex windows: the hyperplane trichotomy, the derived
//! constant suite, block-union equalities, fellow-traveling convex
//! subcomplexes, and commensuration detection between two windows.
//!
//! A [`Quasiline`] couples a convex window inside a developed ball with a
//! deck transformation φ of positive translation length. Every analysis is
//! windowed: it sees finitely many φ-translates and reports loudly (via
//! `WindowTooSmall`, `PeriodTooShort` or `Undecided`) when the window cannot
//! support a conclusion, rather than extrapolating silently.

use std::collections::BTreeMap;

use crate::ball::{Ball, Deck};
use crate::bits::Bits;
use crate::cat0::{Cat0, ConvexSet};
use crate::error::{Error, Result};
use crate::gates::pitchfork;
use crate::ids::{EId, HId, VId};

/// Fewest basepoint translates a window must realize before analysis.
pub const DEFAULT_MIN_PERIOD: u32 = 8;

/// A convex window together with a positive-translation automorphism.
pub struct Quasiline<'a> {
    ball: &'a Ball,
    window: ConvexSet,
    /// Forward/backward vertex maps of φ on the whole ambient ball.
    fwd: Vec<Option<VId>>,
    bwd: Vec<Option<VId>>,
    shift: u32,
    basepoint: VId,
    /// φ^j(basepoint) for j in `j_min..=j_max`, stored in j order.
    orbit: Vec<VId>,
    j_min: i64,
    j_max: i64,
    period_count: u32,
    fundamental_domain: Vec<VId>,
}

/// Window trichotomy of a hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Trivial,
    HalfEssential,
    Essential,
}

/// Classification record for one window-crossing hyperplane.
#[derive(Debug, Clone)]
pub struct HyperplaneClass {
    pub h: HId,
    pub kind: Kind,
    /// Window diameter of the hyperplane; `None` flags the classes whose
    /// φ-orbit is finite (unbounded in the cover).
    pub diam: Option<u32>,
    /// For half-essential classes: the side whose halfspace is shallow.
    pub shallow_side: Option<bool>,
    /// Index into [`Classification::orbits`].
    pub orbit: usize,
}

/// One ⟨φ⟩-orbit of window hyperplanes.
#[derive(Debug, Clone)]
pub struct Orbit {
    /// Members in chain order: `members[i+1]` is the φ-image of `members[i]`.
    pub members: Vec<HId>,
    /// Most central member (nearest carrier to the basepoint, ties to id).
    pub rep: HId,
    pub kind: Kind,
    /// Whether the φ-orbit closes up inside the window.
    pub cyclic: bool,
}

#[derive(Debug)]
pub struct Classification {
    pub classes: Vec<HyperplaneClass>,
    pub orbits: Vec<Orbit>,
    index: BTreeMap<HId, usize>,
}

impl Classification {
    pub fn class(&self, h: HId) -> Option<&HyperplaneClass> {
        self.index.get(&h).map(|&i| &self.classes[i])
    }

    pub fn kind(&self, h: HId) -> Option<Kind> {
        self.class(h).map(|c| c.kind)
    }

    /// (trivial, half-essential, essential) class counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut t = (0, 0, 0);
        for c in &self.classes {
            match c.kind {
                Kind::Trivial => t.0 += 1,
                Kind::HalfEssential => t.1 += 1,
                Kind::Essential => t.2 += 1,
            }
        }
        t
    }
}

/// The constant suite derived from a classified window.
///
/// Fields follow the usual naming for quasiline constants: `diam_bound` (D)
/// bounds non-trivial hyperplane diameters, `shallow_bound` (K) bounds closed
/// shallow-halfspace diameters, `step` (d) is the least integer with
/// d·|φ| > 3D+2, `overlap_bound` (N) and `crossing_gap` (M = (d+2)·N) control
/// how translates of an essential hyperplane overlap and cross geodesics,
/// `trivial_count` (h) counts trivial hyperplanes, `power` (n = 2·d·h!) and
/// `threshold` (B0) drive the fellow-traveling construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantSuite {
    pub diam_bound: u64,
    pub shallow_bound: u64,
    pub step: u64,
    pub overlap_bound: u64,
    pub crossing_gap: u64,
    pub trivial_count: u64,
    pub power: u64,
    pub threshold: u64,
}

impl ConstantSuite {
    /// (D, K, d, N, M, h, n, B0) for compact assertions.
    pub fn tuple(&self) -> (u64, u64, u64, u64, u64, u64, u64, u64) {
        (
            self.diam_bound,
            self.shallow_bound,
            self.step,
            self.overlap_bound,
            self.crossing_gap,
            self.trivial_count,
            self.power,
            self.threshold,
        )
    }
}

/// Verified block record: `block` = Hull{a, φ²(a)} with the union law
/// ⋃_{i=0}^{m} φ^i(block) = Hull{a, φ^{m+2}(a)} checked for every m ≤ reach.
#[derive(Debug, Clone)]
pub struct BlockCheck {
    pub hyperplane: HId,
    pub anchor: VId,
    pub block: Bits,
    pub reach: u32,
    pub geodesics_checked: usize,
}

/// Verified fellow-traveling data for a geodesic: the subsegment
/// `gamma_hat` sits inside ⋃_{k=0}^{count} φ^{power·k}(block), which is
/// convex, contained in the ambient convex set, and equals
/// Hull{φ^{q·power}(a), φ^{(p-1)·power}(a)}.
#[derive(Debug, Clone)]
pub struct FellowTravel {
    pub hyperplane: HId,
    pub anchor: VId,
    pub block: Bits,
    pub power: i64,
    pub q: i64,
    pub p: i64,
    pub count: i64,
    pub gamma_hat: Vec<VId>,
    pub union_verts: Bits,
}

/// Outcome of comparing two co-located windows' automorphisms.
#[derive(Debug, Clone, Copy)]
pub struct Commensuration {
    pub related: bool,
    pub d1: i64,
    pub d2: i64,
    pub projection_diam: u32,
}

impl<'a> Quasiline<'a> {
    /// Validate a window/automorphism pair. `window` defaults to the whole
    /// ball; `min_period` to [`DEFAULT_MIN_PERIOD`] when zero.
    pub fn validate(
        ball: &'a Ball,
        phi: &Deck,
        window: Option<&Bits>,
        min_period: u32,
    ) -> Result<Quasiline<'a>> {
        let g = ball.cat0();
        let nv = g.vertex_count();
        let min_period = if min_period == 0 { DEFAULT_MIN_PERIOD } else { min_period };
        let window_verts = match window {
            Some(w) => w.clone(),
            None => Bits::full(nv),
        };
        let window = g.convex(&window_verts)?;

        let mut fwd: Vec<Option<VId>> = vec![None; nv];
        let mut bwd: Vec<Option<VId>> = vec![None; nv];
        for (v, w) in phi.defined() {
            fwd[v.idx()] = Some(w);
            if bwd[w.idx()].replace(v).is_some() {
                return Err(Error::DeckInconsistent(
                    "automorphism is not injective on its domain".into(),
                ));
            }
        }

        let mut moved = 0usize;
        let mut shift = u32::MAX;
        for v in window.verts.iter() {
            if let Some(w) = fwd[v] {
                if !window.verts.contains(w.idx()) {
                    return Err(Error::WindowNotInvariant);
                }
                moved += 1;
                shift = shift.min(g.dist(VId(v as u32), w));
            }
        }
        if moved == 0 {
            return Err(Error::WindowNotInvariant);
        }
        if shift == 0 {
            return Err(Error::TrivialAutomorphism);
        }

        let basepoint = if window.verts.contains(ball.basepoint().idx()) {
            ball.basepoint()
        } else {
            g.gate(ball.basepoint(), &window)
        };

        // Basepoint orbit in both directions. A revisit means the window
        // wraps around and cannot host a two-ended space.
        let mut seen: BTreeMap<VId, i64> = BTreeMap::new();
        seen.insert(basepoint, 0);
        let mut forward = Vec::new();
        let mut cur = basepoint;
        let mut j_max = 0i64;
        while let Some(w) = fwd[cur.idx()] {
            j_max += 1;
            if seen.insert(w, j_max).is_some() {
                return Err(Error::WindowNotInvariant);
            }
            forward.push(w);
            cur = w;
        }
        let mut backward = Vec::new();
        let mut j_min = 0i64;
        cur = basepoint;
        while let Some(w) = bwd[cur.idx()] {
            j_min -= 1;
            if seen.insert(w, j_min).is_some() {
                return Err(Error::WindowNotInvariant);
            }
            backward.push(w);
            cur = w;
        }
        backward.reverse();
        let mut orbit = backward;
        orbit.push(basepoint);
        orbit.extend(forward);

        let period_count = (j_max - j_min) as u32;
        if period_count < min_period {
            return Err(Error::PeriodTooShort { got: period_count, need: min_period });
        }

        // Fundamental domain: the most central representative of each
        // ⟨φ⟩-orbit of window vertices.
        let mut parent: Vec<u32> = (0..nv as u32).collect();
        fn find(parent: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while parent[r as usize] != r {
                r = parent[r as usize];
            }
            let mut c = x;
            while parent[c as usize] != r {
                let nx = parent[c as usize];
                parent[c as usize] = r;
                c = nx;
            }
            r
        }
        for v in window.verts.iter() {
            if let Some(w) = fwd[v] {
                let (a, b) = (find(&mut parent, v as u32), find(&mut parent, w.0));
                parent[a as usize] = b;
            }
        }
        let mut best: BTreeMap<u32, (u32, VId)> = BTreeMap::new();
        for v in window.verts.iter() {
            let r = find(&mut parent, v as u32);
            let cand = (g.dist(VId(v as u32), basepoint), VId(v as u32));
            best.entry(r)
                .and_modify(|b| {
                    if cand < *b {
                        *b = cand;
                    }
                })
                .or_insert(cand);
        }
        let mut fundamental_domain: Vec<VId> = best.values().map(|&(_, v)| v).collect();
        fundamental_domain.sort();

        Ok(Quasiline {
            ball,
            window,
            fwd,
            bwd,
            shift,
            basepoint,
            orbit,
            j_min,
            j_max,
            period_count,
            fundamental_domain,
        })
    }

    pub fn ball(&self) -> &Ball {
        self.ball
    }

    pub fn cat0(&self) -> &Cat0 {
        self.ball.cat0()
    }

    pub fn window(&self) -> &ConvexSet {
        &self.window
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn basepoint(&self) -> VId {
        self.basepoint
    }

    pub fn period_count(&self) -> u32 {
        self.period_count
    }

    pub fn j_range(&self) -> (i64, i64) {
        (self.j_min, self.j_max)
    }

    pub fn fundamental_domain(&self) -> &[VId] {
        &self.fundamental_domain
    }

    /// φ^j(basepoint), when the window realizes it.
    pub fn orbit_vertex(&self, j: i64) -> Option<VId> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        Some(self.orbit[(j - self.j_min) as usize])
    }

    /// Apply φ^steps to one vertex.
    pub fn translate_vertex(&self, v: VId, steps: i64) -> Option<VId> {
        let map = if steps >= 0 { &self.fwd } else { &self.bwd };
        let mut cur = v;
        for _ in 0..steps.unsigned_abs() {
            cur = map[cur.idx()]?;
        }
        Some(cur)
    }

    /// Apply φ^steps to a vertex set; `None` if any member falls off the map.
    pub fn translate_set(&self, verts: &Bits, steps: i64) -> Option<Bits> {
        let mut out = Bits::new(verts.universe_len());
        for v in verts.iter() {
            out.insert(self.translate_vertex(VId(v as u32), steps)?.idx());
        }
        Some(out)
    }

    /// Image of a hyperplane class one φ-step away, with the orientation
    /// flip: side `s` of `h` maps to side `s ^ flip` of the image.
    pub fn class_image(&self, h: HId, dir: i64) -> Result<Option<(HId, bool)>> {
        let g = self.ball.cat0();
        let map = if dir >= 0 { &self.fwd } else { &self.bwd };
        let mut found: Option<(HId, bool)> = None;
        for &e in &g.hyperplanes().classes[h.idx()].edges {
            let [a, b] = g.complex().edges()[e.idx()].ends;
            if !(self.window.verts.contains(a.idx()) && self.window.verts.contains(b.idx())) {
                continue;
            }
            let (Some(u), Some(w)) = (map[a.idx()], map[b.idx()]) else { continue };
            let mut diff = g.sig(u).clone();
            diff.symmetric_difference_with(g.sig(w));
            debug_assert_eq!(diff.count(), 1);
            let h2 = HId(diff.first().expect("adjacent vertices differ in one wall") as u32);
            let flip = g.sig(a).contains(h.idx()) != g.sig(u).contains(h2.idx());
            match found {
                None => found = Some((h2, flip)),
                Some(prev) if prev == (h2, flip) => {}
                Some(_) => {
                    return Err(Error::DeckInconsistent(format!(
                        "dual edges of hyperplane {} map to different classes",
                        h.0
                    )))
                }
            }
        }
        Ok(found)
    }

    /// Image of a hyperplane class `steps` φ-steps away (orientation dropped).
    pub fn advance_class(&self, h: HId, steps: i64) -> Result<Option<HId>> {
        let dir = if steps >= 0 { 1 } else { -1 };
        let mut cur = h;
        for _ in 0..steps.unsigned_abs() {
            match self.class_image(cur, dir)? {
                Some((nx, _)) => cur = nx,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// Closed halfspace in the window: the component on `side` together with
    /// the carrier vertices of `h`.
    pub fn closed_halfspace(&self, h: HId, side: bool) -> Bits {
        let g = self.ball.cat0();
        let mut out = g.halfspace(h, side);
        out.intersect_with(&self.window.verts);
        for &v in &g.hyperplanes().classes[h.idx()].carrier {
            if self.window.verts.contains(v.idx()) {
                out.insert(v.idx());
            }
        }
        out
    }

    /// Carrier of `h` restricted to the window, packaged as a convex set.
    pub fn window_carrier(&self, h: HId) -> Result<ConvexSet> {
        let g = self.ball.cat0();
        let mut verts = Bits::new(g.vertex_count());
        for &v in &g.hyperplanes().classes[h.idx()].carrier {
            if self.window.verts.contains(v.idx()) {
                verts.insert(v.idx());
            }
        }
        g.convex(&verts)
    }

    fn too_small(&self, what: &str) -> Error {
        Error::WindowTooSmall(self.ball.radius().saturating_mul(2), what.into())
    }

    /// Distance from the basepoint to the nearest window vertex of the
    /// carrier of `h`.
    fn carrier_dist(&self, h: HId) -> u32 {
        let g = self.ball.cat0();
        g.hyperplanes().classes[h.idx()]
            .carrier
            .iter()
            .filter(|v| self.window.verts.contains(v.idx()))
            .map(|&v| g.dist(self.basepoint, v))
            .min()
            .unwrap_or(u32::MAX)
    }

    fn require_geodesic(&self, gamma: &[VId], within: Option<&ConvexSet>) -> Result<()> {
        if gamma.len() < 2 {
            return Err(Error::BadGeodesic("needs at least one edge".into()));
        }
        let g = self.ball.cat0();
        for v in gamma {
            if !self.window.verts.contains(v.idx()) {
                return Err(Error::BadGeodesic("leaves the quasiline window".into()));
            }
            if let Some(w) = within {
                if !w.verts.contains(v.idx()) {
                    return Err(Error::BadGeodesic("leaves the ambient convex set".into()));
                }
            }
        }
        for pair in gamma.windows(2) {
            if g.dist(pair[0], pair[1]) != 1 {
                return Err(Error::BadGeodesic("consecutive vertices are not adjacent".into()));
            }
        }
        if g.dist(gamma[0], gamma[gamma.len() - 1]) as usize != gamma.len() - 1 {
            return Err(Error::BadGeodesic("path does not realize the distance".into()));
        }
        Ok(())
    }

    /// Trichotomy over all window-crossing hyperplanes, organized by φ-orbit.
    ///
    /// Trivial ⟺ the φ-orbit closes up inside the window. Among the rest,
    /// each orbit is decided at its most central representative: a side is
    /// deep when its halfspace swallows one of the far basepoint-orbit
    /// clusters; essential = both sides deep, half-essential = exactly one.
    pub fn classify(&self) -> Result<Classification> {
        let g = self.ball.cat0();
        let window_classes: Vec<HId> =
            self.window.cross.iter().map(|i| HId(i as u32)).collect();
        let total = window_classes.len();

        // Dual-edge adjacency inside the window (opposite sides of a window
        // square), used for restricted hyperplane diameters.
        let mut square_adj: BTreeMap<EId, Vec<EId>> = BTreeMap::new();
        for sq in g.complex().squares() {
            if sq.corners.iter().any(|c| !self.window.verts.contains(c.idx())) {
                continue;
            }
            for (x, y) in [(sq.sides[0].e, sq.sides[1].e), (sq.sides[2].e, sq.sides[3].e)] {
                square_adj.entry(x).or_default().push(y);
                square_adj.entry(y).or_default().push(x);
            }
        }

        // Far basepoint-orbit clusters tracking the two window ends.
        let span = self.j_max - self.j_min;
        let quarter = span / 4;
        let lower: Vec<VId> =
            (self.j_min..=self.j_min + quarter).map(|j| self.orbit_vertex(j).unwrap()).collect();
        let upper: Vec<VId> =
            (self.j_max - quarter..=self.j_max).map(|j| self.orbit_vertex(j).unwrap()).collect();
        let cluster_inside = |h: HId, side: bool, cluster: &[VId]| {
            cluster.iter().all(|v| g.sig(*v).contains(h.idx()) == side)
        };

        let mut assigned: BTreeMap<HId, usize> = BTreeMap::new();
        let mut orbits: Vec<Orbit> = Vec::new();
        let mut records: BTreeMap<HId, HyperplaneClass> = BTreeMap::new();
        let mut undecided = 0usize;

        for &h0 in &window_classes {
            if assigned.contains_key(&h0) {
                continue;
            }
            // Forward chain from h0; detect a cycle by returning to h0.
            let mut chain: Vec<(HId, bool)> = vec![(h0, false)];
            let mut cyclic = false;
            let mut cur = h0;
            let mut acc = false;
            loop {
                match self.class_image(cur, 1)? {
                    Some((nx, f)) => {
                        acc ^= f;
                        if nx == h0 {
                            cyclic = true;
                            break;
                        }
                        chain.push((nx, acc));
                        cur = nx;
                        if chain.len() > total + 1 {
                            return Err(Error::DeckInconsistent(
                                "hyperplane orbit walk does not terminate".into(),
                            ));
                        }
                    }
                    None => break,
                }
            }
            if !cyclic {
                let mut front: Vec<(HId, bool)> = Vec::new();
                cur = h0;
                acc = false;
                loop {
                    match self.class_image(cur, -1)? {
                        Some((pv, f)) => {
                            acc ^= f;
                            front.push((pv, acc));
                            cur = pv;
                            if front.len() + chain.len() > total + 1 {
                                return Err(Error::DeckInconsistent(
                                    "hyperplane orbit walk does not terminate".into(),
                                ));
                            }
                        }
                        None => break,
                    }
                }
                front.reverse();
                front.extend(chain);
                chain = front;
            }

            let orbit_idx = orbits.len();
            for &(h, _) in &chain {
                if assigned.insert(h, orbit_idx).is_some() {
                    return Err(Error::DeckInconsistent(
                        "hyperplane orbits overlap".into(),
                    ));
                }
            }

            let rep = chain
                .iter()
                .map(|&(h, _)| h)
                .min_by_key(|&h| (self.carrier_dist(h), h.0))
                .expect("chain is nonempty");
            let rep_flip = chain.iter().find(|&&(h, _)| h == rep).unwrap().1;

            let kind;
            let mut rep_shallow: Option<bool> = None;
            if cyclic {
                kind = Kind::Trivial;
            } else {
                let deep = |side: bool| {
                    cluster_inside(rep, side, &lower) || cluster_inside(rep, side, &upper)
                };
                match (deep(false), deep(true)) {
                    (true, true) => kind = Kind::Essential,
                    (false, false) => {
                        undecided += 1;
                        continue;
                    }
                    (d0, _) => {
                        let shallow = d0; // the side that is NOT deep
                        // Guard: a genuinely shallow halfspace hugs its
                        // carrier; a trivial hyperplane whose period exceeds
                        // the window would instead own a window-sized side.
                        let closed = self.closed_halfspace(rep, shallow);
                        let cdiam = g.induced_diameter(&closed).unwrap_or(0) as u64;
                        if cdiam > (span as u64) * (self.shift as u64) / 4 {
                            undecided += 1;
                            continue;
                        }
                        kind = Kind::HalfEssential;
                        rep_shallow = Some(shallow);
                    }
                }
            }

            for &(h, flip) in &chain {
                let diam = if kind == Kind::Trivial {
                    None
                } else {
                    Some(self.window_class_diam(h, &square_adj))
                };
                let shallow_side = rep_shallow.map(|s| s ^ (flip ^ rep_flip));
                records.insert(
                    h,
                    HyperplaneClass { h, kind, diam, shallow_side, orbit: orbit_idx },
                );
            }
            orbits.push(Orbit {
                members: chain.iter().map(|&(h, _)| h).collect(),
                rep,
                kind,
                cyclic,
            });
        }

        if undecided > 0 {
            return Err(Error::Undecided(undecided));
        }

        let classes: Vec<HyperplaneClass> = records.into_values().collect();
        let index = classes.iter().enumerate().map(|(i, c)| (c.h, i)).collect();
        Ok(Classification { classes, orbits, index })
    }

    /// Diameter of the dual-edge graph of `h` restricted to the window.
    fn window_class_diam(&self, h: HId, square_adj: &BTreeMap<EId, Vec<EId>>) -> u32 {
        let g = self.ball.cat0();
        let members: Vec<EId> = g.hyperplanes().classes[h.idx()]
            .edges
            .iter()
            .copied()
            .filter(|e| {
                let [a, b] = g.complex().edges()[e.idx()].ends;
                self.window.verts.contains(a.idx()) && self.window.verts.contains(b.idx())
            })
            .collect();
        let index: BTreeMap<EId, usize> =
            members.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut diam = 0u32;
        for &start in &members {
            let mut dist: BTreeMap<EId, u32> = BTreeMap::new();
            dist.insert(start, 0);
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(e) = queue.pop_front() {
                let d = dist[&e];
                diam = diam.max(d);
                for nb in square_adj.get(&e).into_iter().flatten() {
                    if index.contains_key(nb) && !dist.contains_key(nb) {
                        dist.insert(*nb, d + 1);
                        queue.push_back(*nb);
                    }
                }
            }
        }
        diam
    }

    /// Derive the constant suite (D, K, d, N, M, h, n, B0) from a classified
    /// window. All products are overflow-checked.
    pub fn constants(&self, cls: &Classification) -> Result<ConstantSuite> {
        let g = self.ball.cat0();

        let mut diam_bound: u64 = 0;
        for orbit in &cls.orbits {
            if orbit.kind != Kind::Trivial {
                let c = cls.class(orbit.rep).expect("representative classified");
                diam_bound = diam_bound
                    .max(c.diam.expect("non-trivial class has a finite window diameter") as u64);
            }
        }

        let mut shallow_bound: u64 = 0;
        for orbit in &cls.orbits {
            if orbit.kind == Kind::HalfEssential {
                let c = cls.class(orbit.rep).unwrap();
                let side = c.shallow_side.expect("half-essential class has a shallow side");
                let closed = self.closed_halfspace(orbit.rep, side);
                shallow_bound =
                    shallow_bound.max(g.induced_diameter(&closed).unwrap_or(0) as u64);
            }
        }

        let shift = self.shift as u64;
        let step = (3 * diam_bound + 2) / shift + 1;

        let mut raw_overlap: u64 = 0;
        let mut have_essential = false;
        for orbit in &cls.orbits {
            if orbit.kind != Kind::Essential {
                continue;
            }
            have_essential = true;
            let rep = orbit.rep;
            let (h1, flip) = self.class_image(rep, 1)?.ok_or_else(|| {
                self.too_small("cannot translate an essential representative")
            })?;
            for side in [false, true] {
                let mut set = g.halfspace(rep, side);
                set.intersect_with(&self.window.verts);
                set.intersect_with(&g.halfspace(h1, !side ^ flip));
                raw_overlap = raw_overlap.max(g.induced_diameter(&set).unwrap_or(0) as u64);
            }
        }
        if !have_essential {
            return Err(Error::Hypothesis("window has no essential hyperplane".into()));
        }
        let overlap_bound = raw_overlap + diam_bound + 1;

        let crossing_gap = (step + 2)
            .checked_mul(overlap_bound)
            .ok_or(Error::Overflow("M = (d+2)·N"))?;

        let trivial_count =
            cls.classes.iter().filter(|c| c.kind == Kind::Trivial).count() as u64;
        let mut factorial: u64 = 1;
        for i in 2..=trivial_count {
            factorial = factorial.checked_mul(i).ok_or(Error::Overflow("h!"))?;
        }
        let power = 2u64
            .checked_mul(step)
            .and_then(|x| x.checked_mul(factorial))
            .ok_or(Error::Overflow("n = 2·d·h!"))?;

        let nm = power.checked_mul(crossing_gap).ok_or(Error::Overflow("n·M"))?;
        let two_nm = nm.checked_mul(2).ok_or(Error::Overflow("2·n·M"))?;
        let nn = power.checked_mul(overlap_bound).ok_or(Error::Overflow("n·N"))?;
        let numerator = nn
            .checked_mul(2)
            .and_then(|x| x.checked_add(diam_bound))
            .ok_or(Error::Overflow("2·n·N + D"))?;
        let denominator = power.checked_mul(shift).ok_or(Error::Overflow("n·|φ|"))?;
        let third = (numerator / denominator + 2)
            .checked_mul(nm)
            .ok_or(Error::Overflow("B0"))?;
        let threshold = (shallow_bound + 1).max(two_nm).max(third);

        Ok(ConstantSuite {
            diam_bound,
            shallow_bound,
            step,
            overlap_bound,
            crossing_gap,
            trivial_count,
            power,
            threshold,
        })
    }

    /// Verify the block construction for an essential hyperplane: the
    /// projection anchor is a singleton, and the union law
    /// ⋃_{i=0}^{m} φ^i(C) = Hull{a, φ^{m+2}(a)} holds for all m ≤ reach,
    /// plus the sandwich law on sampled geodesics.
    pub fn block_check(&self, cls: &Classification, h: HId, reach: u32) -> Result<BlockCheck> {
        let g = self.ball.cat0();
        let hyps = g.hyperplanes();
        match cls.kind(h) {
            Some(Kind::Essential) => {}
            Some(_) => {
                return Err(Error::Hypothesis(format!("hyperplane {} is not essential", h.0)))
            }
            None => {
                return Err(Error::Hypothesis(format!(
                    "hyperplane {} does not cross the window",
                    h.0
                )))
            }
        }
        let (h1, _) = self
            .class_image(h, 1)?
            .ok_or_else(|| self.too_small("cannot translate the block hyperplane"))?;
        if hyps.cross(h, h1) {
            return Err(Error::Hypothesis(format!(
                "hyperplane {} meets its translate {}",
                h.0, h1.0
            )));
        }
        for other in &cls.classes {
            if hyps.cross(other.h, h) && hyps.cross(other.h, h1) {
                return Err(Error::Hypothesis(format!(
                    "hyperplane {} crosses both {} and its translate {}",
                    other.h.0, h.0, h1.0
                )));
            }
        }

        let carrier = self.window_carrier(h)?;
        let image_verts = self
            .translate_set(&carrier.verts, 1)
            .ok_or_else(|| self.too_small("carrier translate leaves the window"))?;
        let image = g.convex(&image_verts)?;
        let proj = pitchfork(g, &carrier, &image)?;
        if proj.verts.count() != 1 {
            return Err(Error::Hypothesis(format!(
                "projection of the translated carrier has {} vertices (need a singleton)",
                proj.verts.count()
            )));
        }
        let anchor = VId(proj.verts.first().unwrap() as u32);
        let a2 = self
            .translate_vertex(anchor, 2)
            .ok_or_else(|| self.too_small("φ²(a) leaves the window"))?;
        let mut pair = Bits::new(g.vertex_count());
        pair.insert(anchor.idx());
        pair.insert(a2.idx());
        let block = g.hull(&pair)?;

        let mut union = Bits::new(g.vertex_count());
        for i in 0..=reach {
            let translated = self
                .translate_set(&block, i as i64)
                .ok_or_else(|| self.too_small("block translate leaves the window"))?;
            union.union_with(&translated);
            let far = self
                .translate_vertex(anchor, i as i64 + 2)
                .ok_or_else(|| self.too_small("far anchor translate leaves the window"))?;
            let mut ends = Bits::new(g.vertex_count());
            ends.insert(anchor.idx());
            ends.insert(far.idx());
            if union != g.hull(&ends)? {
                return Err(Error::Hypothesis(format!(
                    "block union law fails at translate {i}"
                )));
            }
        }

        let geodesics_checked = self.check_sandwich(h, anchor, &block)?;
        Ok(BlockCheck { hyperplane: h, anchor, block, reach, geodesics_checked })
    }

    /// Sample geodesics crossing H, φH, φ²H, φ³H and check
    /// γ_[e₁,e₂] ⊆ C ⊆ Hull{e₀,e₃}. Returns how many samples were checked.
    fn check_sandwich(&self, h: HId, anchor: VId, block: &Bits) -> Result<usize> {
        let g = self.ball.cat0();
        let mut chain = vec![h];
        let mut cur = h;
        for _ in 0..3 {
            match self.class_image(cur, 1)? {
                Some((nx, _)) => {
                    chain.push(nx);
                    cur = nx;
                }
                None => return Ok(0),
            }
        }
        let fwd_side = g.sig(anchor).contains(h.idx());
        let far3_side = !g.sig(anchor).contains(chain[3].idx());
        let mut starts = Vec::new();
        for j in [self.j_min, self.j_min + 1] {
            if let Some(v) = self.orbit_vertex(j) {
                if g.sig(v).contains(h.idx()) == !fwd_side {
                    starts.push(v);
                }
            }
        }
        let mut targets = Vec::new();
        for j in [self.j_max, self.j_max - 1] {
            if let Some(v) = self.orbit_vertex(j) {
                if g.sig(v).contains(chain[3].idx()) == far3_side {
                    targets.push(v);
                }
            }
        }
        let mut samples = Vec::new();
        for &u in &starts {
            for &v in &targets {
                samples.push(g.geodesic(u, v));
                samples.push(g.geodesic(v, u));
            }
        }
        let mut checked = 0;
        for path in samples {
            let mut pos = [usize::MAX; 4];
            for i in 0..path.len() - 1 {
                let w = g.walls_between(path[i], path[i + 1]);
                let w = HId(w.first().expect("adjacent step crosses one wall") as u32);
                for (t, &ht) in chain.iter().enumerate() {
                    if w == ht {
                        pos[t] = i;
                    }
                }
            }
            if pos.contains(&usize::MAX) {
                return Err(Error::Hypothesis(
                    "sampled geodesic misses one of the four block translates".into(),
                ));
            }
            let (lo, hi) = (pos[1].min(pos[2]), pos[1].max(pos[2]));
            for v in &path[lo..=hi + 1] {
                if !block.contains(v.idx()) {
                    return Err(Error::Hypothesis(
                        "geodesic subsegment between e₁ and e₂ escapes the block".into(),
                    ));
                }
            }
            let mut outer = Bits::new(g.vertex_count());
            for &i in &[pos[0], pos[3]] {
                outer.insert(path[i].idx());
                outer.insert(path[i + 1].idx());
            }
            if !block.is_subset(&g.hull(&outer)?) {
                return Err(Error::Hypothesis(
                    "block is not contained in Hull{e₀,e₃}".into(),
                ));
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// The fellow-traveling construction for a geodesic inside a convex set.
    pub fn fellow_travel(
        &self,
        cls: &Classification,
        consts: &ConstantSuite,
        w: &ConvexSet,
        gamma: &[VId],
        b: u64,
    ) -> Result<FellowTravel> {
        let g = self.ball.cat0();
        self.require_geodesic(gamma, Some(w))?;

        let mut gamma_walls: BTreeMap<HId, usize> = BTreeMap::new();
        for i in 0..gamma.len() - 1 {
            let wall = g.walls_between(gamma[i], gamma[i + 1]);
            let h = HId(wall.first().expect("adjacent step crosses one wall") as u32);
            if gamma_walls.insert(h, i).is_some() {
                return Err(Error::BadGeodesic("crosses a wall twice".into()));
            }
            if cls.kind(h) == Some(Kind::Trivial) {
                return Err(Error::Hypothesis(format!(
                    "geodesic crosses the trivial hyperplane {}",
                    h.0
                )));
            }
        }

        if b < consts.threshold {
            return Err(Error::Hypothesis(format!(
                "B = {b} is below the threshold B0 = {}",
                consts.threshold
            )));
        }
        let gamma_diam = (gamma.len() - 1) as u64;
        if gamma_diam < 3 * b {
            return Err(Error::BadGeodesic(format!(
                "diameter {gamma_diam} is below 3B = {}",
                3 * b
            )));
        }
        let span = (self.j_max - self.j_min) as u64 * self.shift as u64;
        let margin = consts
            .power
            .checked_mul(consts.crossing_gap)
            .and_then(|nm| nm.checked_mul(2))
            .and_then(|x| x.checked_add(3 * b))
            .ok_or(Error::Overflow("3B + 2·n·M"))?;
        if span < margin {
            return Err(Error::WindowTooSmall(
                margin.min(u32::MAX as u64) as u32,
                "fellow-travel margin 3B + 2nM exceeds the realized span".into(),
            ));
        }

        // Step 1: the hyperplane at the middle-most edge is essential.
        let mid = (gamma.len() - 2) / 2;
        let wall = g.walls_between(gamma[mid], gamma[mid + 1]);
        let h = HId(wall.first().expect("adjacent step crosses one wall") as u32);
        if cls.kind(h) != Some(Kind::Essential) {
            return Err(Error::Hypothesis(format!(
                "middle-edge hyperplane {} is not essential",
                h.0
            )));
        }
        for side in [false, true] {
            let mut hs = g.halfspace(h, side);
            hs.intersect_with(&self.window.verts);
            let d = g.induced_diameter(&hs).unwrap_or(0) as u64;
            if d < consts.shallow_bound + 1 {
                return Err(Error::Hypothesis(format!(
                    "halfspace diameter {d} is below K+1 = {}",
                    consts.shallow_bound + 1
                )));
            }
        }

        // Step 2: restrict to the sector cut out by the trivial hyperplanes
        // around γ, then anchor the block at the singleton projection.
        let mut sector_verts = self.window.verts.clone();
        for c in &cls.classes {
            if c.kind == Kind::Trivial {
                let side = g.sig(gamma[0]).contains(c.h.idx());
                sector_verts.intersect_with(&g.halfspace(c.h, side));
            }
        }
        let sector = g.convex(&sector_verts)?;
        let mut carrier_verts = Bits::new(g.vertex_count());
        for &v in &g.hyperplanes().classes[h.idx()].carrier {
            if sector.verts.contains(v.idx()) {
                carrier_verts.insert(v.idx());
            }
        }
        let carrier = g.convex(&carrier_verts)?;
        let n = consts.power as i64;
        let image_verts = self
            .translate_set(&carrier.verts, n)
            .ok_or_else(|| self.too_small("carrier n-translate leaves the window"))?;
        let image = g.convex(&image_verts)?;
        let proj = pitchfork(g, &carrier, &image)?;
        if proj.verts.count() != 1 {
            return Err(Error::Hypothesis(format!(
                "sector carrier projection has {} vertices (need a singleton)",
                proj.verts.count()
            )));
        }
        let anchor = VId(proj.verts.first().unwrap() as u32);

        // Extremal k with φ^{kn}(H) crossing γ, with the crossing edges.
        let mut cross_pos: BTreeMap<i64, usize> = BTreeMap::new();
        cross_pos.insert(0, mid);
        for dir in [1i64, -1] {
            let mut cur = h;
            let mut k = 0i64;
            'walk: loop {
                for _ in 0..n {
                    match self.class_image(cur, dir)? {
                        Some((nx, _)) => cur = nx,
                        None => break 'walk,
                    }
                }
                k += 1;
                match gamma_walls.get(&cur) {
                    Some(&i) => {
                        cross_pos.insert(dir * k, i);
                    }
                    None => break,
                }
            }
        }
        let p = *cross_pos.keys().max().unwrap();
        let q = *cross_pos.keys().min().unwrap();
        if p < 2 || q > -2 {
            return Err(Error::WindowTooSmall(
                self.ball.radius().saturating_mul(2),
                format!("only {p} forward and {} backward block translates cross", -q),
            ));
        }
        let ordered: Vec<usize> = cross_pos.values().copied().collect();
        let increasing = ordered.windows(2).all(|w| w[0] < w[1]);
        let decreasing = ordered.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::Hypothesis(
                "block translates do not cross the geodesic in order".into(),
            ));
        }

        let aq = self
            .translate_vertex(anchor, q * n)
            .ok_or_else(|| self.too_small("φ^{qn}(a) leaves the window"))?;
        let aq2 = self
            .translate_vertex(anchor, (q + 2) * n)
            .ok_or_else(|| self.too_small("φ^{(q+2)n}(a) leaves the window"))?;
        let mut pair = Bits::new(g.vertex_count());
        pair.insert(aq.idx());
        pair.insert(aq2.idx());
        let block = g.hull(&pair)?;
        let l = p - q - 3;

        let e_lo = cross_pos[&(q + 1)];
        let e_hi = cross_pos[&(p - 1)];
        let (lo, hi) = (e_lo.min(e_hi), e_lo.max(e_hi));
        let gamma_hat: Vec<VId> = gamma[lo..=hi + 1].to_vec();

        let mut union_verts = Bits::new(g.vertex_count());
        for k in 0..=l {
            let t = self
                .translate_set(&block, k * n)
                .ok_or_else(|| self.too_small("block translate leaves the window"))?;
            union_verts.union_with(&t);
        }

        for v in &gamma_hat {
            if !union_verts.contains(v.idx()) {
                return Err(Error::Hypothesis("γ̂ escapes the block union".into()));
            }
        }
        if !union_verts.is_subset(&w.verts) {
            return Err(Error::Hypothesis(
                "block union leaves the ambient convex set".into(),
            ));
        }
        if !g.is_convex(&union_verts)? {
            return Err(Error::Hypothesis("block union is not convex".into()));
        }
        let a_far = self
            .translate_vertex(anchor, (p - 1) * n)
            .ok_or_else(|| self.too_small("φ^{(q+l+2)n}(a) leaves the window"))?;
        let mut ends = Bits::new(g.vertex_count());
        ends.insert(aq.idx());
        ends.insert(a_far.idx());
        if union_verts != g.hull(&ends)? {
            return Err(Error::Hypothesis(
                "block union does not equal the anchor hull".into(),
            ));
        }
        let hat_diam = (gamma_hat.len() - 1) as u64;
        if hat_diam <= b {
            return Err(Error::Hypothesis(format!(
                "γ̂ diameter {hat_diam} is not above B = {b}"
            )));
        }
        let nm = consts.power * consts.crossing_gap;
        if (l as u64 + 5) * nm <= 2 * b {
            return Err(Error::Hypothesis(format!(
                "l = {l} violates l > 2B/(nM) − 5"
            )));
        }

        Ok(FellowTravel {
            hyperplane: h,
            anchor,
            block,
            power: n,
            q,
            p,
            count: l,
            gamma_hat,
            union_verts,
        })
    }
}

/// Compare two co-located windows: when the projection of one onto the other
/// is deeper than `s_bound`, search for the minimal |d1| with φ₁^{d1} = φ₂^{d2}
/// pointwise on the ball interior.
pub fn commensurate(
    q1: &Quasiline,
    q2: &Quasiline,
    s_bound: u32,
) -> Result<Commensuration> {
    if !std::ptr::eq(q1.ball, q2.ball) {
        return Err(Error::BadMap(
            "quasilines do not live in one ambient ball".into(),
        ));
    }
    let g = q1.ball.cat0();
    let proj = pitchfork(g, &q1.window, &q2.window)?;
    let projection_diam = g.induced_diameter(&proj.verts).unwrap_or(0);
    if projection_diam <= s_bound {
        return Ok(Commensuration { related: false, d1: 0, d2: 0, projection_diam });
    }

    let nv = g.vertex_count();
    let interior = q1.ball.interior();
    let compose = |cur: &[Option<VId>], step: &[Option<VId>]| -> Vec<Option<VId>> {
        cur.iter().map(|o| o.and_then(|v| step[v.idx()])).collect()
    };
    let identity: Vec<Option<VId>> = (0..nv).map(|v| Some(VId(v as u32))).collect();

    let mut pow1 = identity.clone();
    let mut pow2_fwd = identity.clone();
    let mut pow2_bwd = identity;
    let mut d2_reached = 0u64;

    for d1 in 1..=q1.period_count as u64 {
        pow1 = compose(&pow1, &q1.fwd);
        let prod = d1 * q1.shift as u64;
        if prod % q2.shift as u64 != 0 {
            continue;
        }
        let d2 = prod / q2.shift as u64;
        while d2_reached < d2 {
            pow2_fwd = compose(&pow2_fwd, &q2.fwd);
            pow2_bwd = compose(&pow2_bwd, &q2.bwd);
            d2_reached += 1;
        }
        for (sign, pow2) in [(1i64, &pow2_fwd), (-1i64, &pow2_bwd)] {
            let mut verified = 0usize;
            let mut ok = true;
            for v in interior.iter() {
                match (pow1[v], pow2[v]) {
                    (Some(a), Some(b)) => {
                        if a != b {
                            ok = false;
                            break;
                        }
                        verified += 1;
                    }
                    _ => {}
                }
            }
            if ok && verified > 0 {
                let d2_signed = sign * d2 as i64;
                debug_assert_eq!(
                    d1 * q1.shift as u64,
                    d2 * q2.shift as u64,
                    "translation lengths balance"
                );
                return Ok(Commensuration {
                    related: true,
                    d1: d1 as i64,
                    d2: d2_signed,
                    projection_diam,
                });
            }
        }
    }
    Ok(Commensuration { related: false, d1: 0, d2: 0, projection_diam })
}

/// Exact separation law: an essential hyperplane misses its d-step translate,
/// and only trivial hyperplanes cross both. Returns how many (hyperplane,
/// direction) pairs were realizable and checked.
pub fn check_separation(
    q: &Quasiline,
    cls: &Classification,
    consts: &ConstantSuite,
) -> Result<usize> {
    let hyps = q.ball().cat0().hyperplanes();
    let mut checked = 0;
    for c in &cls.classes {
        if c.kind != Kind::Essential {
            continue;
        }
        for dir in [1i64, -1] {
            let Some(hd) = q.advance_class(c.h, dir * consts.step as i64)? else {
                continue;
            };
            if hyps.cross(c.h, hd) {
                return Err(Error::Hypothesis(format!(
                    "essential hyperplane {} meets its d-step translate {}",
                    c.h.0, hd.0
                )));
            }
            for other in &cls.classes {
                if other.kind != Kind::Trivial
                    && hyps.cross(other.h, c.h)
                    && hyps.cross(other.h, hd)
                {
                    return Err(Error::Hypothesis(format!(
                        "non-trivial hyperplane {} crosses both {} and its d-step translate {}",
                        other.h.0, c.h.0, hd.0
                    )));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Exact overlap law: diam(H^± ∩ φ^{±k}(H^∓)) ≤ k·N for essential orbit
/// representatives and every realizable k ≤ k_cap. Returns the number of
/// (rep, direction, k, side) combinations checked.
pub fn check_overlap_bounds(
    q: &Quasiline,
    cls: &Classification,
    consts: &ConstantSuite,
    k_cap: u32,
) -> Result<usize> {
    let g = q.ball().cat0();
    let mut checked = 0;
    for orbit in &cls.orbits {
        if orbit.kind != Kind::Essential {
            continue;
        }
        let rep = orbit.rep;
        for dir in [1i64, -1] {
            let mut cur = rep;
            let mut acc = false;
            for k in 1..=k_cap {
                let Some((nx, f)) = q.class_image(cur, dir)? else { break };
                cur = nx;
                acc ^= f;
                for side in [false, true] {
                    let mut set = g.halfspace(rep, side);
                    set.intersect_with(&q.window().verts);
                    set.intersect_with(&g.halfspace(cur, !side ^ acc));
                    let d = g.induced_diameter(&set).unwrap_or(0) as u64;
                    if d > k as u64 * consts.overlap_bound {
                        return Err(Error::Hypothesis(format!(
                            "diam(H ∩ φ^{}(H')) = {d} exceeds {k}·N = {}",
                            dir * k as i64,
                            k as u64 * consts.overlap_bound
                        )));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// Exact crossing propagation: when an essential hyperplane crosses γ at an
/// edge with margin ≥ k·M to both endpoints, φ^{±k}(H) also crosses γ.
/// Returns the number of (edge, k, direction) combinations checked.
pub fn check_crossing_propagation(
    q: &Quasiline,
    cls: &Classification,
    consts: &ConstantSuite,
    gamma: &[VId],
) -> Result<usize> {
    q.require_geodesic(gamma, None)?;
    let g = q.ball().cat0();
    let len = gamma.len();
    let mut walls: BTreeMap<HId, Vec<usize>> = BTreeMap::new();
    for i in 0..len - 1 {
        let wall = g.walls_between(gamma[i], gamma[i + 1]);
        let h = HId(wall.first().expect("adjacent step crosses one wall") as u32);
        walls.entry(h).or_default().push(i);
    }
    let m = consts.crossing_gap;
    let mut checked = 0;
    let class_list: Vec<(HId, Vec<usize>)> =
        walls.iter().map(|(&h, p)| (h, p.clone())).collect();
    for (h, positions) in class_list {
        if cls.kind(h) != Some(Kind::Essential) {
            continue;
        }
        for &i in &positions {
            let edge_margin = i.min(len - 2 - i) as u64;
            let k_max = edge_margin / m;
            for dir in [1i64, -1] {
                let mut cur = h;
                for k in 1..=k_max {
                    let mut fell_off = false;
                    match q.class_image(cur, dir)? {
                        Some((nx, _)) => cur = nx,
                        None => fell_off = true,
                    }
                    if fell_off {
                        break;
                    }
                    if !walls.contains_key(&cur) {
                        return Err(Error::Hypothesis(format!(
                            "translate φ^{}({}) misses the geodesic despite margin {} ≥ {}·M",
                            dir * k as i64,
                            h.0,
                            edge_margin,
                            k
                        )));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{deck_search, develop_ball, DEFAULT_CELL_BUDGET};
    use crate::fixtures;
    use crate::ids::End;

    /// Deck shifting the basepoint along the given base end.
    fn shift_deck(ball: &Ball, base_e: u32, w: u8, steps: usize) -> Deck {
        let mut to = ball.basepoint();
        for _ in 0..steps {
            to = ball
                .port(to, End { e: EId(base_e), w })
                .expect("shift target inside the ball");
        }
        deck_search(ball, ball.basepoint(), to).expect("shift deck exists")
    }

    fn line_ball(r: u32) -> Ball {
        let cx = fixtures::circle();
        develop_ball(&cx, VId(0), r, DEFAULT_CELL_BUDGET).unwrap()
    }

    #[test]
    fn line_classification_and_constants() {
        let ball = line_ball(20);
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        assert_eq!(q.shift(), 1);
        assert_eq!(q.period_count(), 40);
        assert_eq!(q.fundamental_domain().len(), 1);

        let cls = q.classify().unwrap();
        assert_eq!(cls.counts(), (0, 0, 40));
        assert_eq!(cls.orbits.len(), 1);
        assert!(!cls.orbits[0].cyclic);

        let consts = q.constants(&cls).unwrap();
        assert_eq!(consts.tuple(), (0, 0, 3, 1, 5, 0, 6, 120));
    }

    #[test]
    fn ladder_has_one_trivial_class() {
        let cx = fixtures::ladder();
        let ball = develop_ball(&cx, VId(0), 10, DEFAULT_CELL_BUDGET).unwrap();
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        assert_eq!(q.shift(), 1);
        assert_eq!(q.fundamental_domain().len(), 2);

        let cls = q.classify().unwrap();
        let (trivial, half, _essential) = cls.counts();
        assert_eq!(trivial, 1);
        assert_eq!(half, 0);

        let consts = q.constants(&cls).unwrap();
        assert_eq!(consts.diam_bound, 1);
        assert_eq!(consts.trivial_count, 1);
        assert_eq!(consts.step, 6);
        assert_eq!(consts.power, 12);
    }

    #[test]
    fn comb_pendants_are_half_essential() {
        let cx = fixtures::comb();
        let ball = develop_ball(&cx, VId(0), 10, DEFAULT_CELL_BUDGET).unwrap();
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();

        let cls = q.classify().unwrap();
        let (trivial, half, essential) = cls.counts();
        assert_eq!(trivial, 0);
        assert!(half > 0, "pendant hyperplanes are half-essential");
        assert!(essential > 0, "spine hyperplanes are essential");
        for c in &cls.classes {
            if c.kind == Kind::HalfEssential {
                assert!(c.shallow_side.is_some());
            }
        }

        let consts = q.constants(&cls).unwrap();
        assert_eq!(consts.shallow_bound, 1);
        assert_eq!(consts.trivial_count, 0);
    }

    #[test]
    fn classification_is_stable_under_window_growth() {
        for cx in [fixtures::circle(), fixtures::ladder(), fixtures::comb()] {
            let small = develop_ball(&cx, VId(0), 6, DEFAULT_CELL_BUDGET).unwrap();
            let large = develop_ball(&cx, VId(0), 12, DEFAULT_CELL_BUDGET).unwrap();
            let qs = Quasiline::validate(&small, &shift_deck(&small, 0, 0, 1), None, 0).unwrap();
            let ql = Quasiline::validate(&large, &shift_deck(&large, 0, 0, 1), None, 0).unwrap();
            let cs = qs.classify().unwrap();
            let cl = ql.classify().unwrap();
            // Developed balls restrict consistently, so the small ball's
            // edges carry the same ids inside the large ball.
            for c in &cs.classes {
                let e = small.cat0().hyperplanes().classes[c.h.idx()].edges[0];
                let big_h = large.cat0().hyperplanes().class_of(e);
                let big = cl.class(big_h).expect("class survives growth");
                assert_eq!(c.kind, big.kind, "kind stable for {}", cx.name());
            }
        }
    }

    #[test]
    fn line_block_union_law() {
        let ball = line_ball(20);
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        let cls = q.classify().unwrap();

        let g = ball.cat0();
        let b0 = q.orbit_vertex(0).unwrap();
        let b1 = q.orbit_vertex(1).unwrap();
        let h = HId(g.walls_between(b0, b1).first().unwrap() as u32);

        let check = q.block_check(&cls, h, 10).unwrap();
        assert_eq!(check.anchor, b1, "anchor is the forward carrier vertex");
        let expected: Vec<VId> = (1..=3).map(|j| q.orbit_vertex(j).unwrap()).collect();
        let mut expected_bits = Bits::new(g.vertex_count());
        for v in &expected {
            expected_bits.insert(v.idx());
        }
        assert_eq!(check.block, expected_bits, "C = Hull{{a, φ²(a)}} is a 3-segment");
        assert!(check.geodesics_checked >= 2);
    }

    #[test]
    fn ladder_block_hypothesis_rejected() {
        let cx = fixtures::ladder();
        let ball = develop_ball(&cx, VId(0), 8, DEFAULT_CELL_BUDGET).unwrap();
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        let cls = q.classify().unwrap();

        let g = ball.cat0();
        let b0 = q.orbit_vertex(0).unwrap();
        let b1 = q.orbit_vertex(1).unwrap();
        let h = HId(g.walls_between(b0, b1).first().unwrap() as u32);
        assert_eq!(cls.kind(h), Some(Kind::Essential));

        let err = q.block_check(&cls, h, 3).unwrap_err();
        assert!(
            matches!(err, Error::Hypothesis(ref m) if m.contains("crosses both")),
            "rung hyperplane crossing both H and φ(H) rejects the block: {err}"
        );
    }

    #[test]
    fn line_commensurations() {
        let ball = line_ball(20);
        let d1 = shift_deck(&ball, 0, 0, 1);
        let d2 = shift_deck(&ball, 0, 0, 2);
        let d_back = shift_deck(&ball, 0, 1, 1);
        let q1 = Quasiline::validate(&ball, &d1, None, 0).unwrap();
        let q2 = Quasiline::validate(&ball, &d2, None, 0).unwrap();
        let q3 = Quasiline::validate(&ball, &d_back, None, 0).unwrap();
        assert_eq!(q2.shift(), 2);

        let c = commensurate(&q1, &q2, 5).unwrap();
        assert!(c.related);
        assert_eq!((c.d1, c.d2), (2, 1));
        assert_eq!(c.d1.unsigned_abs() * q1.shift() as u64, c.d2.unsigned_abs() * q2.shift() as u64);

        let c = commensurate(&q1, &q3, 5).unwrap();
        assert!(c.related);
        assert_eq!((c.d1, c.d2), (1, -1));
    }

    #[test]
    fn parallel_rows_commensurate_via_equal_shifts() {
        let cx = fixtures::ladder();
        let ball = develop_ball(&cx, VId(0), 10, DEFAULT_CELL_BUDGET).unwrap();
        let deck = shift_deck(&ball, 0, 0, 1);
        let g = ball.cat0();
        let bottom_base = ball.base_of(ball.basepoint());
        let mut bottom = Bits::new(g.vertex_count());
        let mut top = Bits::new(g.vertex_count());
        for v in 0..g.vertex_count() {
            if ball.base_of(VId(v as u32)) == bottom_base {
                bottom.insert(v);
            } else {
                top.insert(v);
            }
        }
        let q1 = Quasiline::validate(&ball, &deck, Some(&bottom), 0).unwrap();
        let q2 = Quasiline::validate(&ball, &deck, Some(&top), 0).unwrap();
        assert_eq!(q1.shift(), 1);
        assert_eq!(q2.shift(), 1);

        let c = commensurate(&q1, &q2, 3).unwrap();
        assert!(c.related, "parallel rows share their shift");
        assert_eq!((c.d1, c.d2), (1, 1));
        assert!(c.projection_diam > 3);
    }

    #[test]
    fn lemma_laws_hold_on_fixture_windows() {
        for cx in [fixtures::circle(), fixtures::ladder(), fixtures::comb()] {
            let ball = develop_ball(&cx, VId(0), 12, DEFAULT_CELL_BUDGET).unwrap();
            let deck = shift_deck(&ball, 0, 0, 1);
            let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
            let cls = q.classify().unwrap();
            let consts = q.constants(&cls).unwrap();

            assert!(check_separation(&q, &cls, &consts).unwrap() > 0);
            assert!(check_overlap_bounds(&q, &cls, &consts, 8).unwrap() > 0);

            let gamma: Vec<VId> = {
                let (lo, hi) = q.j_range();
                let g = ball.cat0();
                g.geodesic(q.orbit_vertex(lo).unwrap(), q.orbit_vertex(hi).unwrap())
            };
            check_crossing_propagation(&q, &cls, &consts, &gamma).unwrap();
        }
    }

    #[test]
    fn validate_rejections() {
        let ball = line_ball(20);
        let identity = Deck {
            map: (0..ball.cat0().vertex_count()).map(|v| Some(VId(v as u32))).collect(),
            boundary_limited: false,
        };
        assert!(matches!(
            Quasiline::validate(&ball, &identity, None, 0),
            Err(Error::TrivialAutomorphism)
        ));

        let short = line_ball(3);
        let deck = shift_deck(&short, 0, 0, 1);
        assert!(matches!(
            Quasiline::validate(&short, &deck, None, 0),
            Err(Error::PeriodTooShort { got: 6, need: 8 })
        ));
    }

    #[test]
    fn fellow_travel_on_a_long_line_window() {
        let ball = line_ball(400);
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        let cls = q.classify().unwrap();
        let consts = q.constants(&cls).unwrap();
        assert_eq!(consts.threshold, 120);

        let g = ball.cat0();
        let w = q.window().clone();
        let gamma = g.geodesic(q.orbit_vertex(-180).unwrap(), q.orbit_vertex(180).unwrap());
        assert_eq!(gamma.len(), 361);

        let ft = q.fellow_travel(&cls, &consts, &w, &gamma, 120).unwrap();
        assert!(ft.count > 3, "l = {} must beat 2B/(nM) − 5 = 3", ft.count);
        assert!((ft.gamma_hat.len() - 1) as u64 > 120);
        assert_eq!(ft.power, 6);
        assert!(ft.union_verts.is_subset(&w.verts));

        // Rejections on the same window: B below threshold, then γ too short.
        let err = q.fellow_travel(&cls, &consts, &w, &gamma, 119).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(ref m) if m.contains("below the threshold")));
        let short = g.geodesic(q.orbit_vertex(-179).unwrap(), q.orbit_vertex(180).unwrap());
        let err = q.fellow_travel(&cls, &consts, &w, &short, 120).unwrap_err();
        assert!(matches!(err, Error::BadGeodesic(ref m) if m.contains("below 3B")));
    }

    #[test]
    fn fellow_travel_rejects_trivial_crossings() {
        let cx = fixtures::ladder();
        let ball = develop_ball(&cx, VId(0), 10, DEFAULT_CELL_BUDGET).unwrap();
        let deck = shift_deck(&ball, 0, 0, 1);
        let q = Quasiline::validate(&ball, &deck, None, 0).unwrap();
        let cls = q.classify().unwrap();
        let consts = q.constants(&cls).unwrap();

        // A geodesic with one rung step crosses the trivial class.
        let g = ball.cat0();
        let (lo, hi) = q.j_range();
        let start = q.orbit_vertex(lo).unwrap();
        let far_top = {
            let end_bottom = q.orbit_vertex(hi - 1).unwrap();
            g.neighbors(end_bottom)
                .iter()
                .copied()
                .find(|&v| ball.base_of(v) != ball.base_of(end_bottom))
                .expect("rung neighbor")
        };
        let gamma = g.geodesic(start, far_top);
        let w = q.window().clone();
        let err = q.fellow_travel(&cls, &consts, &w, &gamma, consts.threshold).unwrap_err();
        assert!(
            matches!(err, Error::Hypothesis(ref m) if m.contains("trivial")),
            "got {err}"
        );
    }
}
