//! Gate projections between convex sets: pitchforks (projection images),
//! right-associated chains, and bridges with their product structure.

use crate::bits::Bits;
use crate::cat0::{Cat0, ConvexSet};
use crate::error::{Error, Result};
use crate::ids::VId;

/// The pitchfork A ⊤ B: image of B under the gate onto A. Stands in for the
/// intersection of A and B even when they are disjoint.
pub fn pitchfork(g: &Cat0, a: &ConvexSet, b: &ConvexSet) -> Result<ConvexSet> {
    let mut out = Bits::new(g.vertex_count());
    for v in b.verts.iter() {
        out.insert(g.gate(VId(v as u32), a).idx());
    }
    g.convex(&out)
}

/// Right-associated pitchfork of a sequence: A1 ⊤ (A2 ⊤ (... ⊤ An)).
pub fn pitchfork_chain(g: &Cat0, sets: &[ConvexSet]) -> Result<ConvexSet> {
    let mut iter = sets.iter().rev();
    let mut acc = iter.next().ok_or(Error::EmptySet)?.clone();
    for a in iter {
        acc = pitchfork(g, a, &acc)?;
    }
    Ok(acc)
}

/// Walls with a fixed (one-sided) value on the set: (mask, values).
fn fixed_walls(g: &Cat0, s: &ConvexSet) -> (Bits, Bits) {
    let nh = g.hyperplane_count();
    let mut mask = Bits::full(nh);
    mask.subtract(&s.cross);
    let first = VId(s.verts.first().expect("nonempty convex set") as u32);
    let mut vals = g.sig(first).clone();
    vals.intersect_with(&mask);
    (mask, vals)
}

/// Walls separating two convex sets: fixed on both with opposite values.
pub fn separating_walls(g: &Cat0, a: &ConvexSet, b: &ConvexSet) -> Bits {
    let (ma, va) = fixed_walls(g, a);
    let (mb, vb) = fixed_walls(g, b);
    let mut diff = va;
    diff.symmetric_difference_with(&vb);
    diff.intersect_with(&ma);
    diff.intersect_with(&mb);
    diff
}

pub struct Bridge {
    /// A ⊤ B, inside A.
    pub left: ConvexSet,
    /// B ⊤ A, inside B.
    pub right: ConvexSet,
    /// Hull of one gate pair: the connector.
    pub corridor: ConvexSet,
    /// Hull of left ∪ right: isomorphic to corridor × left.
    pub span: ConvexSet,
}

/// Compute the bridge between two convex sets and verify its structure: the
/// crossing and separation equalities, and that gate coordinates give an
/// isometry span ≅ corridor × left.
pub fn bridge(g: &Cat0, a: &ConvexSet, b: &ConvexSet) -> Result<Bridge> {
    let left = pitchfork(g, a, b)?;
    let right = pitchfork(g, b, a)?;

    // Walls crossing A ⊤ B are exactly those crossing both A and B.
    let mut both = a.cross.clone();
    both.intersect_with(&b.cross);
    if left.cross != both || right.cross != both {
        return Err(Error::Hypothesis("bridge crossing equality fails".into()));
    }
    // Walls separating the two gates are exactly those separating A from B.
    let sep_gates = separating_walls(g, &left, &right);
    let sep_ab = separating_walls(g, a, b);
    if sep_gates != sep_ab {
        return Err(Error::Hypothesis("bridge separation equality fails".into()));
    }

    let a0 = VId(left.verts.first().ok_or(Error::EmptySet)? as u32);
    let b0 = g.gate(a0, b);
    let mut pair = Bits::new(g.vertex_count());
    pair.insert(a0.idx());
    pair.insert(b0.idx());
    let corridor = g.convex(&g.hull(&pair)?)?;
    let mut union = left.verts.clone();
    union.union_with(&right.verts);
    let span = g.convex(&g.hull(&union)?)?;

    // Product structure: (gate to left, gate to corridor) is a bijection
    // onto left x corridor and distances add coordinatewise.
    if span.verts.count() != left.verts.count() * corridor.verts.count() {
        return Err(Error::Hypothesis("bridge span has wrong cardinality".into()));
    }
    let members: Vec<VId> = span.verts.iter().map(|v| VId(v as u32)).collect();
    let coords: Vec<(VId, VId)> =
        members.iter().map(|&z| (g.gate(z, &left), g.gate(z, &corridor))).collect();
    let mut seen = std::collections::BTreeSet::new();
    for &c in &coords {
        if !seen.insert(c) {
            return Err(Error::Hypothesis("bridge coordinates collide".into()));
        }
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let d = g.dist(members[i], members[j]);
            let dp = g.dist(coords[i].0, coords[j].0) + g.dist(coords[i].1, coords[j].1);
            if d != dp {
                return Err(Error::Hypothesis("bridge product is not isometric".into()));
            }
        }
    }
    Ok(Bridge { left, right, corridor, span })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn grid_set(g: &Cat0, coords: &[(usize, usize)]) -> ConvexSet {
        let mut set = Bits::new(g.vertex_count());
        for &(x, y) in coords {
            set.insert(g.complex().vid(&format!("v{x}_{y}")).unwrap().idx());
        }
        g.convex(&g.hull(&set).unwrap()).unwrap()
    }

    #[test]
    fn pitchfork_is_pointwise_gate_image() {
        let g = Cat0::new(fixtures::grid(3, 3)).map_err(|(_, w)| w).unwrap();
        // A = left column, B = right column: A ⊤ B is all of A (the gate
        // image of a parallel column is the whole column).
        let a = grid_set(&g, &[(0, 0), (0, 3)]);
        let b = grid_set(&g, &[(3, 0), (3, 3)]);
        let p = pitchfork(&g, &a, &b).unwrap();
        assert_eq!(p.verts, a.verts);
        // A = bottom row, B = single distant vertex: the image is one gate.
        let b1 = grid_set(&g, &[(2, 3)]);
        let row = grid_set(&g, &[(0, 0), (3, 0)]);
        let p1 = pitchfork(&g, &row, &b1).unwrap();
        assert_eq!(p1.verts.count(), 1);
        let gate = VId(p1.verts.first().unwrap() as u32);
        assert_eq!(g.complex().vname(gate), "v2_0");
    }

    #[test]
    fn chain_is_right_associated() {
        let g = Cat0::new(fixtures::grid(3, 3)).map_err(|(_, w)| w).unwrap();
        let a = grid_set(&g, &[(0, 0), (0, 3)]);
        let b = grid_set(&g, &[(2, 0), (3, 3)]);
        let c = grid_set(&g, &[(1, 1), (3, 1)]);
        let chained = pitchfork_chain(&g, &[a.clone(), b.clone(), c.clone()]).unwrap();
        let nested = pitchfork(&g, &a, &pitchfork(&g, &b, &c).unwrap()).unwrap();
        assert_eq!(chained, nested);
    }

    #[test]
    fn projection_algebra_laws() {
        let g = Cat0::new(fixtures::grid(2, 2)).map_err(|(_, w)| w).unwrap();
        let a = grid_set(&g, &[(0, 0), (0, 2)]);
        let b = grid_set(&g, &[(2, 0), (2, 2)]);
        let c = grid_set(&g, &[(0, 1), (2, 1)]);
        // Associativity.
        let lhs = pitchfork(&g, &pitchfork(&g, &a, &b).unwrap(), &c).unwrap();
        let rhs = pitchfork(&g, &a, &pitchfork(&g, &b, &c).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        // Inclusion (A⊤B) ∩ (A⊤C) ⊆ A⊤(B⊤C).
        let ab = pitchfork(&g, &a, &b).unwrap();
        let ac = pitchfork(&g, &a, &c).unwrap();
        let mut meet = ab.verts.clone();
        meet.intersect_with(&ac.verts);
        assert!(meet.is_subset(&rhs.verts));
    }

    #[test]
    fn bridge_between_columns() {
        let g = Cat0::new(fixtures::grid(2, 2)).map_err(|(_, w)| w).unwrap();
        let a = grid_set(&g, &[(0, 0), (0, 2)]);
        let b = grid_set(&g, &[(2, 0), (2, 2)]);
        let br = bridge(&g, &a, &b).unwrap();
        assert_eq!(br.left.verts.count(), 3);
        assert_eq!(br.right.verts.count(), 3);
        assert_eq!(br.corridor.verts.count(), 3);
        // Span is the whole 2x2 grid: 3 columns x 3 rows.
        assert_eq!(br.span.verts.count(), 9);
    }

    #[test]
    fn bridge_disjoint_blocks() {
        let g = Cat0::new(fixtures::grid(3, 3)).map_err(|(_, w)| w).unwrap();
        // Two opposite corner vertices: bridge span is their interval.
        let a = grid_set(&g, &[(0, 3)]);
        let b = grid_set(&g, &[(3, 0)]);
        let br = bridge(&g, &a, &b).unwrap();
        assert_eq!(br.left.verts.count(), 1);
        assert_eq!(br.right.verts.count(), 1);
        assert_eq!(br.corridor.verts.count(), 16);
        assert_eq!(br.span.verts.count(), 16);
    }
}
