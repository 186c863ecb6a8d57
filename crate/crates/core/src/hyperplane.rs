//! Hyperplanes: parallelism classes of edges under the square-opposition
//! relation, their sidedness, carriers, and the Haglund-Wise specialness
//! checks (no self-crossing, two-sided, no self-osculation, no pair that
//! both crosses and osculates).

use crate::complex::CubeComplex;
use crate::ids::{EId, HId, SqId, VId};

pub struct Hyperplane {
    pub id: HId,
    /// Dual edges, sorted.
    pub edges: Vec<EId>,
    pub two_sided: bool,
    /// Vertices of dual edges, sorted, deduplicated.
    pub carrier: Vec<VId>,
    /// Diameter of the graph on dual edges (adjacent when opposite in a
    /// square).
    pub diam: u32,
}

pub struct Hyperplanes {
    pub classes: Vec<Hyperplane>,
    /// Class of each edge.
    pub edge_class: Vec<HId>,
    /// Symmetric crossing relation: classes sharing a square transversally.
    pub crossings: Vec<(HId, HId)>,
}

struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect() }
    }
    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = x;
        while self.parent[c as usize] != r {
            let next = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

impl Hyperplanes {
    /// The identification runs over directed edges so that one-sidedness is
    /// detected: a class is one-sided exactly when the closure identifies
    /// some edge with its own reverse. Directed edge (e, d) has index 2e+d.
    pub fn compute(cx: &CubeComplex) -> Hyperplanes {
        let ne = cx.edge_count();
        let mut dsu = Dsu::new(2 * ne);
        let dir = |e: EId, rev: bool| -> u32 { 2 * e.0 + rev as u32 };
        for sq in cx.squares() {
            let [b, t, l, r] = sq.sides;
            for (p, q) in [(b, t), (l, r)] {
                dsu.union(dir(p.e, p.rev), dir(q.e, q.rev));
                dsu.union(dir(p.e, !p.rev), dir(q.e, !q.rev));
            }
        }
        // Merge each edge with its reverse to get the undirected classes,
        // remembering which classes were already one-sided.
        let mut directed_root = vec![0u32; 2 * ne];
        for i in 0..2 * ne as u32 {
            directed_root[i as usize] = dsu.find(i);
        }
        let mut undirected = Dsu::new(2 * ne);
        undirected.parent = directed_root.clone();
        for e in 0..ne as u32 {
            undirected.union(2 * e, 2 * e + 1);
        }
        let mut class_ids: Vec<u32> = Vec::new();
        let mut edge_class = vec![HId(0); ne];
        for e in 0..ne {
            let root = undirected.find(2 * e as u32);
            let id = match class_ids.iter().position(|&r| r == root) {
                Some(i) => i,
                None => {
                    class_ids.push(root);
                    class_ids.len() - 1
                }
            };
            edge_class[e] = HId(id as u32);
        }
        let mut classes: Vec<Hyperplane> = (0..class_ids.len())
            .map(|i| Hyperplane {
                id: HId(i as u32),
                edges: Vec::new(),
                two_sided: true,
                carrier: Vec::new(),
                diam: 0,
            })
            .collect();
        for e in 0..ne {
            let h = edge_class[e].idx();
            classes[h].edges.push(EId(e as u32));
            if directed_root[2 * e] == directed_root[2 * e + 1] {
                classes[h].two_sided = false;
            }
            let ec = cx.edge(EId(e as u32));
            classes[h].carrier.push(ec.ends[0]);
            classes[h].carrier.push(ec.ends[1]);
        }
        for cl in classes.iter_mut() {
            cl.carrier.sort();
            cl.carrier.dedup();
        }

        // Dual-edge graph adjacency for diameters, plus the crossing pairs.
        let mut opposite: Vec<Vec<EId>> = vec![Vec::new(); ne];
        let mut crossings = Vec::new();
        for sq in cx.squares() {
            let [b, t, l, r] = sq.sides;
            opposite[b.e.idx()].push(t.e);
            opposite[t.e.idx()].push(b.e);
            opposite[l.e.idx()].push(r.e);
            opposite[r.e.idx()].push(l.e);
            let (h1, h2) = (edge_class[b.e.idx()], edge_class[l.e.idx()]);
            let pair = (h1.min(h2), h1.max(h2));
            crossings.push(pair);
        }
        crossings.sort();
        crossings.dedup();
        for cl in classes.iter_mut() {
            cl.diam = dual_graph_diameter(&cl.edges, &opposite);
        }
        Hyperplanes { classes, edge_class, crossings }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, e: EId) -> HId {
        self.edge_class[e.idx()]
    }

    pub fn cross(&self, a: HId, b: HId) -> bool {
        let pair = (a.min(b), a.max(b));
        a != b && self.crossings.binary_search(&pair).is_ok()
    }
}

fn dual_graph_diameter(edges: &[EId], opposite: &[Vec<EId>]) -> u32 {
    let index = |e: EId| edges.binary_search(&e).expect("edge in class");
    let n = edges.len();
    let mut diam = 0;
    for start in 0..n {
        let mut dist = vec![u32::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for &nb in &opposite[edges[cur].idx()] {
                let ni = index(nb);
                if dist[ni] == u32::MAX {
                    dist[ni] = dist[cur] + 1;
                    queue.push_back(ni);
                }
            }
        }
        diam = diam.max(*dist.iter().max().unwrap());
    }
    diam
}

/// Why a complex fails to be special, with witnesses.
#[derive(Debug)]
pub struct SpecialReport {
    pub special: bool,
    /// Squares whose two side pairs lie in one class.
    pub self_crossing: Vec<(HId, SqId)>,
    pub one_sided: Vec<HId>,
    /// (class, vertex, the two dual edges meeting there without a square).
    pub self_osculating: Vec<(HId, VId, EId, EId)>,
    /// (class pair that crosses somewhere and osculates somewhere).
    pub inter_osculating: Vec<(HId, HId, VId, EId, EId)>,
}

/// Two distinct edges osculate at a shared vertex when no square corner
/// there spans them; they belong to hyperplanes that also cross, or to one
/// hyperplane, exactly in the non-special situations.
pub fn check_special(cx: &CubeComplex) -> SpecialReport {
    let hyps = Hyperplanes::compute(cx);
    let mut self_crossing = Vec::new();
    for (si, sq) in cx.squares().iter().enumerate() {
        let hb = hyps.class_of(sq.sides[0].e);
        let hl = hyps.class_of(sq.sides[2].e);
        if hb == hl {
            self_crossing.push((hb, SqId(si as u32)));
        }
    }
    let one_sided: Vec<HId> =
        hyps.classes.iter().filter(|c| !c.two_sided).map(|c| c.id).collect();

    // Corner spans per vertex: unordered edge pairs covered by a square.
    let mut self_osculating = Vec::new();
    let mut osculating_pairs: Vec<(HId, HId, VId, EId, EId)> = Vec::new();
    for vi in 0..cx.vertex_count() {
        let v = VId(vi as u32);
        let mut spanned = std::collections::BTreeSet::new();
        for &(sq, pos) in cx.corners_at(v) {
            let (a, b) = cx.corner_ends(sq, pos);
            spanned.insert((a.e.min(b.e), a.e.max(b.e)));
        }
        let mut incident: Vec<EId> = cx.ends_at(v).iter().map(|end| end.e).collect();
        incident.dedup();
        for i in 0..incident.len() {
            for j in i + 1..incident.len() {
                let (e, f) = (incident[i], incident[j]);
                if spanned.contains(&(e, f)) {
                    continue;
                }
                let (he, hf) = (hyps.class_of(e), hyps.class_of(f));
                if he == hf {
                    self_osculating.push((he, v, e, f));
                } else {
                    osculating_pairs.push((he.min(hf), he.max(hf), v, e, f));
                }
            }
        }
    }
    let mut inter_osculating = Vec::new();
    for (a, b, v, e, f) in osculating_pairs {
        if hyps.cross(a, b) {
            inter_osculating.push((a, b, v, e, f));
        }
    }
    let special = self_crossing.is_empty()
        && one_sided.is_empty()
        && self_osculating.is_empty()
        && inter_osculating.is_empty();
    SpecialReport { special, self_crossing, one_sided, self_osculating, inter_osculating }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn grid_classes() {
        let cx = fixtures::grid(2, 2);
        let hyps = Hyperplanes::compute(&cx);
        // Two vertical and two horizontal walls... in a 2x2 grid: 2 columns
        // of horizontal-edge classes and 2 rows of vertical-edge classes.
        assert_eq!(hyps.len(), 4);
        assert!(hyps.classes.iter().all(|c| c.two_sided));
        assert!(hyps.classes.iter().all(|c| c.edges.len() == 3));
        assert!(hyps.classes.iter().all(|c| c.diam == 2));
        // Horizontal walls cross vertical walls, nothing else.
        assert_eq!(hyps.crossings.len(), 4);
        assert!(check_special(&cx).special);
    }

    #[test]
    fn torus_two_classes_two_sided() {
        let cx = fixtures::torus();
        let hyps = Hyperplanes::compute(&cx);
        assert_eq!(hyps.len(), 2);
        assert!(hyps.classes.iter().all(|c| c.two_sided));
        assert!(hyps.cross(HId(0), HId(1)));
        // A single loop dual to a hyperplane does not osculate with itself.
        assert!(check_special(&cx).special);
    }

    #[test]
    fn klein_one_sided() {
        let cx = fixtures::klein();
        let hyps = Hyperplanes::compute(&cx);
        assert_eq!(hyps.len(), 2);
        let rep = check_special(&cx);
        assert!(!rep.special);
        assert_eq!(rep.one_sided.len(), 1);
        // The flipped side pair is the one-sided class.
        let h = rep.one_sided[0];
        assert_eq!(hyps.classes[h.idx()].edges, vec![EId(1)]);
    }

    #[test]
    fn pendant_edge_keeps_torus_special() {
        // A pendant edge at the torus vertex osculates both loop classes but
        // crosses neither, so no inter-osculation arises.
        let spec = crate::complex::ComplexSpec {
            name: "osc".into(),
            vertices: vec!["v".into(), "u".into()],
            edges: vec![
                ("v".into(), "v".into()),
                ("v".into(), "v".into()),
                ("v".into(), "u".into()),
            ],
            squares: vec![crate::complex::SquareSpec::Explicit {
                corners: ["v".into(), "v".into(), "v".into(), "v".into()],
                edges: [1, 1, 2, 2],
            }],
            cubes3: vec![],
        };
        let cx = crate::complex::CubeComplex::build(&spec).unwrap();
        assert!(check_special(&cx).special);
    }

    #[test]
    fn self_osculation_detected() {
        // Square with bottom=a, top=b, left=right=c identifies a ~ b into
        // one class; its two dual edges meet at v with no corner spanning
        // the pair {a, b}.
        let spec = crate::complex::ComplexSpec {
            name: "selfosc".into(),
            vertices: vec!["v".into()],
            edges: vec![
                ("v".into(), "v".into()),
                ("v".into(), "v".into()),
                ("v".into(), "v".into()),
            ],
            squares: vec![crate::complex::SquareSpec::Explicit {
                corners: ["v".into(), "v".into(), "v".into(), "v".into()],
                edges: [1, 2, 3, 3],
            }],
            cubes3: vec![],
        };
        let cx = crate::complex::CubeComplex::build(&spec).unwrap();
        let rep = check_special(&cx);
        assert!(!rep.special);
        assert!(!rep.self_osculating.is_empty());
    }
}
