//! Acceptance suite: twelve oracle- and property-based criteria, one test
//! per criterion, each printing a single PASS/FAIL line (visible under
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::time::Instant;

use mf_core::ball::{deck_search, develop_ball, Ball, Deck, DEFAULT_CELL_BUDGET};
use mf_core::bits::Bits;
use mf_core::cat0::{Cat0, ConvexSet};
use mf_core::complex::CubeComplex;
use mf_core::fixtures::{self, FixtureRng};
use mf_core::gates::{bridge, pitchfork};
use mf_core::gog::{self, Gog};
use mf_core::hyperplane::check_special;
use mf_core::ids::{EId, End, VId};
use mf_core::quasiline::{
    check_crossing_propagation, check_overlap_bounds, check_separation, commensurate,
    Classification, Kind, Quasiline,
};
use mf_core::tree::{check_cyclonormal, stature_probe, CycloMode, Verdict};

fn verdict(n: u32, ok: bool, limit_s: f64, started: Instant, detail: &str) {
    let secs = started.elapsed().as_secs_f64();
    let status = if ok && secs < limit_s { "PASS" } else { "FAIL" };
    println!("criterion {n:2}: {status} — {detail} ({secs:.2}s, limit {limit_s:.0}s)");
    assert!(ok, "criterion {n}: {detail}");
    assert!(secs < limit_s, "criterion {n} overran: {secs:.2}s >= {limit_s}s");
}

// ---------------------------------------------------------------------------
// Shared oracles and random-window machinery
// ---------------------------------------------------------------------------

/// Breadth-first distances in the 1-skeleton: the metric oracle.
fn bfs_dists(cx: &CubeComplex, s: VId) -> Vec<u32> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); cx.vertex_count()];
    for e in cx.edges() {
        let [u, v] = e.ends;
        if u != v {
            adj[u.idx()].push(v.idx());
            adj[v.idx()].push(u.idx());
        }
    }
    let mut dist = vec![u32::MAX; cx.vertex_count()];
    dist[s.idx()] = 0;
    let mut queue = std::collections::VecDeque::from([s.idx()]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn shift_deck(ball: &Ball, base_e: u32, steps: usize) -> Deck {
    let mut to = ball.basepoint();
    for _ in 0..steps {
        to = ball.port(to, End { e: EId(base_e), w: 0 }).expect("shift stays inside");
    }
    deck_search(ball, ball.basepoint(), to).expect("shift deck exists")
}

fn line_quasiline(ball: &Ball, steps: usize) -> (Quasiline<'_>, Classification) {
    let deck = shift_deck(ball, 0, steps);
    let q = Quasiline::validate(ball, &deck, None, 0).expect("line quasiline validates");
    let cls = q.classify().expect("line classifies");
    (q, cls)
}

/// A deterministic family of CAT(0) windows: grids plus developed balls of
/// the torus, ladder, and comb.
fn random_windows(rng: &mut FixtureRng, count: usize) -> Vec<Cat0> {
    let bases = [fixtures::torus(), fixtures::ladder(), fixtures::comb()];
    let mut out = Vec::new();
    for _ in 0..count {
        let base = &bases[rng.next_below(bases.len())];
        let radius = 1 + rng.next_below(if base.name() == "torus" { 4 } else { 6 }) as u32;
        let bp = VId(rng.next_below(base.vertex_count()) as u32);
        let ball = develop_ball(base, bp, radius, DEFAULT_CELL_BUDGET).expect("ball develops");
        let cx = ball.complex().clone();
        out.push(Cat0::new(cx).map_err(|(_, w)| w).expect("ball is CAT(0)"));
    }
    out
}

fn check_metric_oracle(g: &Cat0) -> usize {
    let mut checked = 0;
    for u in 0..g.vertex_count() {
        let oracle = bfs_dists(g.complex(), VId(u as u32));
        for v in 0..g.vertex_count() {
            let (u, v) = (VId(u as u32), VId(v as u32));
            let d = g.dist(u, v);
            assert_eq!(d, oracle[v.idx()], "library disagrees with BFS");
            assert_eq!(
                d,
                g.walls_between(u, v).count() as u32,
                "distance differs from separating-hyperplane count"
            );
            checked += 1;
        }
    }
    checked
}

/// Convex set spanned by up to three random vertices.
fn random_convex(g: &Cat0, rng: &mut FixtureRng) -> ConvexSet {
    let n = g.vertex_count();
    let mut bits = Bits::new(n);
    for _ in 0..1 + rng.next_below(3) {
        bits.insert(rng.next_below(n));
    }
    let hull = g.hull(&bits).expect("hull exists");
    g.convex(&hull).expect("hull is convex")
}

/// Gate image of `b` inside `a`, computed pointwise: the projection oracle.
fn gate_image(g: &Cat0, a: &ConvexSet, b: &ConvexSet) -> Bits {
    let mut out = Bits::new(g.vertex_count());
    for x in b.verts.iter() {
        out.insert(g.gate(VId(x as u32), a).idx());
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_metric_oracle() {
    let t = Instant::now();
    let mut checked = 0usize;
    for m in 1..=8 {
        for n in 1..=8 {
            let g = Cat0::new(fixtures::grid(m, n)).map_err(|(_, w)| w).expect("grid is CAT(0)");
            checked += check_metric_oracle(&g);
        }
    }
    let mut rng = FixtureRng::new(0xC1);
    for g in random_windows(&mut rng, 200) {
        checked += check_metric_oracle(&g);
    }
    verdict(1, checked > 100_000, 30.0, t, &format!("{checked} vertex pairs, 3-way agreement"));
}

#[test]
fn criterion_02_gate_oracle() {
    let t = Instant::now();
    let mut rng = FixtureRng::new(0xC2);
    let mut windows = vec![
        Cat0::new(fixtures::grid(5, 5)).map_err(|(_, w)| w).unwrap(),
        Cat0::new(fixtures::grid(8, 8)).map_err(|(_, w)| w).unwrap(),
    ];
    windows.extend(random_windows(&mut rng, 8));
    let mut pairs = 0usize;
    let mut projections = 0usize;
    while pairs < 10_000 {
        let g = &windows[rng.next_below(windows.len())];
        let y = random_convex(g, &mut rng);
        let x = VId(rng.next_below(g.vertex_count()) as u32);
        let gate = g.gate(x, &y);
        let best = y.verts.iter().map(|v| g.dist(x, VId(v as u32))).min().unwrap();
        assert_eq!(g.dist(x, gate), best, "gate is not nearest");
        let minimizers: Vec<usize> = y
            .verts
            .iter()
            .filter(|&v| g.dist(x, VId(v as u32)) == best)
            .collect();
        assert_eq!(minimizers, vec![gate.idx()], "gate is not the unique nearest point");
        pairs += 1;
        if pairs % 20 == 0 {
            let b = random_convex(g, &mut rng);
            assert_eq!(
                pitchfork(g, &y, &b).expect("pitchfork").verts,
                gate_image(g, &y, &b),
                "pitchfork differs from the pointwise gate image"
            );
            projections += 1;
        }
    }
    verdict(
        2,
        pairs == 10_000 && projections == 500,
        60.0,
        t,
        &format!("{pairs} nearest-point pairs, {projections} projection identities"),
    );
}

#[test]
fn criterion_03_bridge_theorem() {
    let t = Instant::now();
    let mut rng = FixtureRng::new(0xC3);
    let mut windows = vec![Cat0::new(fixtures::grid(6, 6)).map_err(|(_, w)| w).unwrap()];
    windows.extend(random_windows(&mut rng, 10));
    for i in 0..500 {
        let g = &windows[i % windows.len()];
        let a = random_convex(g, &mut rng);
        let b = random_convex(g, &mut rng);
        let br = bridge(g, &a, &b).expect("bridge builds");

        // Gate identities for both shores.
        assert_eq!(br.left.verts, gate_image(g, &a, &b), "left shore is not the gate image");
        assert_eq!(br.right.verts, gate_image(g, &b, &a), "right shore is not the gate image");

        // Crossing equalities: shores cross the same walls; the span's
        // crossings split between the corridor's and one shore's.
        assert_eq!(br.left.cross, br.right.cross, "shores cross different walls");
        assert_eq!(
            br.span.cross,
            br.corridor.cross.union(&br.left.cross),
            "span crossings are not the disjoint union"
        );
        assert!(
            !br.corridor.cross.intersects(&br.left.cross),
            "corridor and shore share a crossing"
        );

        // Product witness: gate coordinates give an isometric bijection
        // span -> corridor x shore.
        let span: Vec<VId> = br.span.verts.iter().map(|v| VId(v as u32)).collect();
        let mut coords: BTreeMap<(VId, VId), VId> = BTreeMap::new();
        for &v in &span {
            let c = (g.gate(v, &br.corridor), g.gate(v, &br.left));
            assert!(coords.insert(c, v).is_none(), "gate coordinates collide");
        }
        assert_eq!(
            coords.len(),
            br.corridor.verts.count() * br.left.verts.count(),
            "span does not fill the product"
        );
        for (&(c1, l1), &v1) in &coords {
            for (&(c2, l2), &v2) in &coords {
                assert_eq!(
                    g.dist(v1, v2),
                    g.dist(c1, c2) + g.dist(l1, l2),
                    "product coordinates are not isometric"
                );
            }
        }
    }
    verdict(3, true, 60.0, t, "500 random convex pairs: crossings split, product isometric");
}

#[test]
fn criterion_04_projection_algebra() {
    let t = Instant::now();
    let mut rng = FixtureRng::new(0xC4);
    let mut windows = vec![Cat0::new(fixtures::grid(6, 6)).map_err(|(_, w)| w).unwrap()];
    windows.extend(random_windows(&mut rng, 10));
    for i in 0..500 {
        let g = &windows[i % windows.len()];
        let a = random_convex(g, &mut rng);
        let b = random_convex(g, &mut rng);
        let c = random_convex(g, &mut rng);

        let ab = pitchfork(g, &a, &b).unwrap();
        let ab_c = pitchfork(g, &ab, &c).unwrap();
        let bc = pitchfork(g, &b, &c).unwrap();
        let a_bc = pitchfork(g, &a, &bc).unwrap();
        assert_eq!(ab_c.verts, a_bc.verts, "projection is not associative");

        let ac = pitchfork(g, &a, &c).unwrap();
        assert!(
            ab.verts.intersection(&ac.verts).is_subset(&a_bc.verts),
            "(A-|B) ∩ (A-|C) escapes A-|(B-|C)"
        );
    }
    verdict(4, true, 60.0, t, "500 random triples: associativity and the inclusion hold");
}

#[test]
fn criterion_05_quasiline_trichotomy() {
    let t = Instant::now();
    let mut detail = Vec::new();
    for (name, base) in
        [("line", fixtures::circle()), ("ladder", fixtures::ladder()), ("comb", fixtures::comb())]
    {
        let mut counts_by_radius = Vec::new();
        for radius in [8u32, 16] {
            let ball = develop_ball(&base, VId(0), radius, DEFAULT_CELL_BUDGET).unwrap();
            let (_q, cls) = line_quasiline(&ball, 1);
            let (trivial, half, essential) = cls.counts();
            match name {
                "line" => {
                    assert_eq!((trivial, half), (0, 0), "line admits only essential classes");
                    assert_eq!(essential, cls.classes.len(), "line crossing count");
                }
                "ladder" => {
                    assert_eq!(trivial, 1, "ladder has exactly one trivial class");
                    assert_eq!(half, 0, "ladder has no half-essential class");
                }
                "comb" => {
                    assert_eq!(trivial, 0, "comb has no trivial class");
                    assert!(half > 0, "comb pendants are half-essential");
                    assert!(essential > 0, "comb spine is essential");
                    for cl in &cls.classes {
                        if cl.kind == Kind::HalfEssential {
                            assert!(cl.shallow_side.is_some(), "pendant has a shallow side");
                        }
                    }
                }
                _ => unreachable!(),
            }
            counts_by_radius.push((trivial, half));
        }
        assert_eq!(
            counts_by_radius[0], counts_by_radius[1],
            "{name}: trivial/half-essential pattern changed under window growth"
        );
        detail.push(name);
    }
    verdict(5, true, 10.0, t, "line/ladder/comb trichotomy stable under R -> 2R");
}

#[test]
fn criterion_06_constant_suite() {
    let t = Instant::now();
    let ball = develop_ball(&fixtures::circle(), VId(0), 20, DEFAULT_CELL_BUDGET).unwrap();
    let (q, cls) = line_quasiline(&ball, 1);
    let consts = q.constants(&cls).expect("line constants");
    assert_eq!(consts.tuple(), (0, 0, 3, 1, 5, 0, 6, 120), "line constant suite");

    let mut checked = 0usize;
    for (base, radius) in
        [(fixtures::circle(), 20u32), (fixtures::ladder(), 10), (fixtures::comb(), 10)]
    {
        let ball = develop_ball(&base, VId(0), radius, DEFAULT_CELL_BUDGET).unwrap();
        let (q, cls) = line_quasiline(&ball, 1);
        let consts = q.constants(&cls).unwrap();
        checked += check_separation(&q, &cls, &consts).expect("separation law");
        checked += check_overlap_bounds(&q, &cls, &consts, 50).expect("overlap law");
        let g = q.ball().cat0();
        let span = (radius / 2) as i64;
        let gamma = g.geodesic(
            q.orbit_vertex(-span).expect("left end"),
            q.orbit_vertex(span).expect("right end"),
        );
        checked += check_crossing_propagation(&q, &cls, &consts, &gamma).expect("crossing law");
    }
    verdict(
        6,
        checked > 0,
        30.0,
        t,
        &format!("line tuple (0,0,3,1,5,0,6,120); {checked} lemma instances hold"),
    );
}

#[test]
fn criterion_07_block_union_law() {
    let t = Instant::now();
    let ball = develop_ball(&fixtures::circle(), VId(0), 40, DEFAULT_CELL_BUDGET).unwrap();
    let (q, cls) = line_quasiline(&ball, 1);
    let h = cls
        .classes
        .iter()
        .find(|c| c.kind == Kind::Essential)
        .expect("essential class exists")
        .h;
    let check = q.block_check(&cls, h, 10).expect("block law verified");
    assert_eq!(check.reach, 10);
    verdict(
        7,
        check.geodesics_checked > 0,
        10.0,
        t,
        &format!("union law for m = 0..=10, {} geodesics checked", check.geodesics_checked),
    );
}

#[test]
fn criterion_08_fellow_traveling_contract() {
    let t = Instant::now();
    let ball = develop_ball(&fixtures::circle(), VId(0), 400, DEFAULT_CELL_BUDGET).unwrap();
    let (q, cls) = line_quasiline(&ball, 1);
    let consts = q.constants(&cls).unwrap();
    assert_eq!(consts.threshold, 120, "B0 = 120 on the line");
    let g = q.ball().cat0();
    let gamma = g.geodesic(q.orbit_vertex(-180).unwrap(), q.orbit_vertex(180).unwrap());
    assert_eq!(gamma.len(), 361, "gamma has length 360");

    let ft = q.fellow_travel(&cls, &consts, q.window(), &gamma, 120).expect("certificate");
    let hat_diam = g.dist(*ft.gamma_hat.first().unwrap(), *ft.gamma_hat.last().unwrap());
    assert!(hat_diam > 120, "diam(gamma-hat) = {hat_diam} must exceed B");
    assert!(ft.count > 3, "l = {} must exceed 2B/(nM) - 5 = 3", ft.count);
    for v in &ft.gamma_hat {
        assert!(ft.union_verts.contains(v.idx()), "gamma-hat escapes the block union");
    }
    assert!(ft.union_verts.is_subset(&q.window().verts), "union escapes the window");
    assert!(g.is_convex(&ft.union_verts).unwrap(), "block union is not convex");

    // Independent re-derivation: the union equals the hull of the quoted
    // anchor translates.
    let u1 = q.translate_vertex(ft.anchor, ft.q * ft.power).expect("left anchor translate");
    let u2 = q.translate_vertex(ft.anchor, (ft.p - 1) * ft.power).expect("right translate");
    let mut ends = Bits::new(g.vertex_count());
    ends.insert(u1.idx());
    ends.insert(u2.idx());
    assert_eq!(g.hull(&ends).unwrap(), ft.union_verts, "union is not the anchor hull");
    verdict(
        8,
        true,
        60.0,
        t,
        &format!("diam {hat_diam} > 120, l = {}, union convex and exact", ft.count),
    );
}

#[test]
fn criterion_09_commensuration() {
    let t = Instant::now();
    let ball = develop_ball(&fixtures::circle(), VId(0), 30, DEFAULT_CELL_BUDGET).unwrap();
    let d1 = shift_deck(&ball, 0, 1);
    let d2 = shift_deck(&ball, 0, 2);
    let q1 = Quasiline::validate(&ball, &d1, None, 0).unwrap();
    let q2 = Quasiline::validate(&ball, &d2, None, 0).unwrap();
    let c = commensurate(&q1, &q2, 0).expect("commensuration resolves");
    assert!(c.related, "unit and double shift are commensurate");
    assert_eq!((c.d1, c.d2), (2, 1), "exponents d1 = 2, d2 = 1");

    // Pointwise equality of phi1^2 and phi2 on the window.
    let mut compared = 0usize;
    for v in 0..ball.complex().vertex_count() {
        let v = VId(v as u32);
        if let (Some(a), Some(b)) = (q1.translate_vertex(v, 2), q2.translate_vertex(v, 1)) {
            assert_eq!(a, b, "phi1^2 and phi2 disagree at {}", v.0);
            compared += 1;
        }
    }
    assert_eq!(
        c.d1 as u64 * q1.shift() as u64,
        c.d2 as u64 * q2.shift() as u64,
        "|d1||phi1| = |d2||phi2|"
    );
    verdict(9, compared > 0, 10.0, t, &format!("d1=2, d2=1; pointwise on {compared} vertices"));
}

#[test]
fn criterion_10_specialness() {
    let t = Instant::now();
    let torus = check_special(&fixtures::torus());
    assert!(torus.special, "torus is special");
    let klein = check_special(&fixtures::klein());
    assert!(!klein.special, "klein bottle is not special");
    assert_eq!(klein.one_sided.len(), 1, "klein has a one-sided witness");
    let grid = check_special(&fixtures::grid(3, 3));
    assert!(grid.special, "grid is special");
    verdict(10, true, 5.0, t, "torus special, klein one-sided witness, grid special");
}

#[test]
fn criterion_11_cyclonormality() {
    let t = Instant::now();
    let tori = Gog::build(&gog::tori_gog()).unwrap();
    let edges = check_cyclonormal(&tori, CycloMode::Edges, 8, 6, DEFAULT_CELL_BUDGET).unwrap();
    assert!(edges.pass, "tori gog is cyclonormal");
    assert!(!edges.entries.is_empty());
    assert!(edges.entries.iter().all(|e| e.verdict == Verdict::Cyclic), "all triples cyclic");

    let paths1 = check_cyclonormal(&tori, CycloMode::Paths(1), 8, 6, DEFAULT_CELL_BUDGET).unwrap();
    let ve: Vec<_> = edges.entries.iter().map(|e| (e.members.clone(), e.verdict)).collect();
    let vp: Vec<_> = paths1.entries.iter().map(|e| (e.members.clone(), e.verdict)).collect();
    assert_eq!(ve, vp, "paths(1) and edges verdict tables agree on tori");

    let idx2 = Gog::build(&gog::index2_gog()).unwrap();
    let rep = check_cyclonormal(&idx2, CycloMode::Edges, 8, 6, DEFAULT_CELL_BUDGET).unwrap();
    assert!(!rep.pass, "index-2 free-group gog fails cyclonormality");
    let bad = rep.entries.iter().find(|e| e.verdict == Verdict::Higher).expect("higher entry");
    assert!(bad.witness.is_some(), "rank >= 2 witness generators reported");
    let rep1 = check_cyclonormal(&idx2, CycloMode::Paths(1), 8, 6, DEFAULT_CELL_BUDGET).unwrap();
    let we: Vec<_> = rep.entries.iter().map(|e| (e.members.clone(), e.verdict)).collect();
    let wp: Vec<_> = rep1.entries.iter().map(|e| (e.members.clone(), e.verdict)).collect();
    assert_eq!(we, wp, "paths(1) and edges verdict tables agree on index-2");
    verdict(
        11,
        true,
        120.0,
        t,
        &format!(
            "tori {} triples cyclic; index-2 higher with witness {:?}",
            edges.entries.len(),
            bad.witness.as_ref().unwrap()
        ),
    );
}

#[test]
fn criterion_12_stature_probe() {
    let t = Instant::now();
    let tori = Gog::build(&gog::tori_gog()).unwrap();
    let run_tori = || {
        stature_probe(&tori, 0, 4, 6, 4, DEFAULT_CELL_BUDGET, None).expect("tori probe")
    };
    let rt1 = run_tori();
    assert_eq!(rt1.tallies, vec![1, 1, 1, 1], "tori: one class, constant through L=4");
    assert!(rt1.stabilized, "tori probe stabilizes");
    assert_eq!(rt1.stabilization_length, Some(1), "tori stabilizes at L=1");
    assert_eq!(rt1.undecided_paths, 0);

    let wise = Gog::build(&gog::wise_gog()).unwrap();
    let run_wise = || {
        stature_probe(&wise, 0, 4, 6, 4, DEFAULT_CELL_BUDGET, None).expect("wise probe")
    };
    let rw1 = run_wise();
    assert_eq!(rw1.tallies, vec![1, 2, 3, 4], "wise: strictly increasing tallies");
    assert!(!rw1.stabilized, "wise probe must not stabilize");
    assert_eq!(rw1.stabilization_length, None);
    assert!(
        rw1.caveats.iter().any(|c| c.contains("still growing")),
        "growth caveat emitted"
    );

    // Byte-identical serialized reports across two runs.
    let bytes = |r: &mf_core::tree::StatureReport| serde_json::to_string(r).unwrap();
    assert_eq!(bytes(&rt1), bytes(&run_tori()), "tori report not deterministic");
    assert_eq!(bytes(&rw1), bytes(&run_wise()), "wise report not deterministic");
    verdict(
        12,
        true,
        300.0,
        t,
        "tori [1,1,1,1] stable at L=1; wise [1,2,3,4] growing, deterministic bytes",
    );
}
