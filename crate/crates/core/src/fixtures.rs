//! Built-in example complexes used by tests and the `fixture` subcommand.

use crate::complex::{ComplexSpec, CubeComplex, SquareSpec};

fn build(spec: ComplexSpec) -> CubeComplex {
    CubeComplex::build(&spec).expect("fixture is well formed")
}

/// m x n grid of squares: (m+1)(n+1) vertices, flat and contractible.
pub fn grid(m: usize, n: usize) -> CubeComplex {
    let name = |x: usize, y: usize| format!("v{x}_{y}");
    let mut vertices = Vec::new();
    for y in 0..=n {
        for x in 0..=m {
            vertices.push(name(x, y));
        }
    }
    let mut edges = Vec::new();
    for y in 0..=n {
        for x in 0..m {
            edges.push((name(x, y), name(x + 1, y)));
        }
    }
    for y in 0..n {
        for x in 0..=m {
            edges.push((name(x, y), name(x, y + 1)));
        }
    }
    let mut squares = Vec::new();
    for y in 0..n {
        for x in 0..m {
            squares.push(SquareSpec::Corners([
                name(x, y),
                name(x + 1, y),
                name(x, y + 1),
                name(x + 1, y + 1),
            ]));
        }
    }
    build(ComplexSpec { name: format!("grid{m}x{n}"), vertices, edges, squares, cubes3: vec![] })
}

/// Path with n edges.
pub fn path(n: usize) -> CubeComplex {
    let vertices: Vec<String> = (0..=n).map(|i| format!("p{i}")).collect();
    let edges = (0..n).map(|i| (format!("p{i}"), format!("p{}", i + 1))).collect();
    build(ComplexSpec { name: format!("path{n}"), vertices, edges, squares: vec![], cubes3: vec![] })
}

/// One vertex with one loop: the circle.
pub fn circle() -> CubeComplex {
    build(ComplexSpec {
        name: "circle".into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into())],
        squares: vec![],
        cubes3: vec![],
    })
}

/// Circle x interval: two loops joined by a rung, one square.
pub fn ladder() -> CubeComplex {
    build(ComplexSpec {
        name: "ladder".into(),
        vertices: vec!["v0".into(), "v1".into()],
        edges: vec![
            ("v0".into(), "v0".into()),
            ("v1".into(), "v1".into()),
            ("v0".into(), "v1".into()),
        ],
        squares: vec![SquareSpec::Explicit {
            corners: ["v0".into(), "v0".into(), "v1".into(), "v1".into()],
            edges: [1, 2, 3, 3],
        }],
        cubes3: vec![],
    })
}

/// Circle with a pendant edge.
pub fn comb() -> CubeComplex {
    build(ComplexSpec {
        name: "comb".into(),
        vertices: vec!["v".into(), "u".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "u".into())],
        squares: vec![],
        cubes3: vec![],
    })
}

/// One vertex, two loops, one square with sides a a b b: the torus.
pub fn torus() -> CubeComplex {
    build(ComplexSpec {
        name: "torus".into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "v".into())],
        squares: vec![SquareSpec::Explicit {
            corners: ["v".into(), "v".into(), "v".into(), "v".into()],
            edges: [1, 1, 2, 2],
        }],
        cubes3: vec![],
    })
}

/// Like the torus but the right side runs backwards: the Klein bottle.
pub fn klein() -> CubeComplex {
    build(ComplexSpec {
        name: "klein".into(),
        vertices: vec!["v".into()],
        edges: vec![("v".into(), "v".into()), ("v".into(), "v".into())],
        squares: vec![SquareSpec::Explicit {
            corners: ["v".into(), "v".into(), "v".into(), "v".into()],
            edges: [1, 1, 2, -2],
        }],
        cubes3: vec![],
    })
}

/// A single solid 3-cube.
pub fn cube3() -> CubeComplex {
    let name = |p: usize| format!("v{}{}{}", p & 1, (p >> 1) & 1, (p >> 2) & 1);
    let vertices: Vec<String> = (0..8).map(name).collect();
    let mut edges = Vec::new();
    for p in 0..8usize {
        for bit in [1usize, 2, 4] {
            if p & bit == 0 {
                edges.push((name(p), name(p | bit)));
            }
        }
    }
    let squares = crate::complex::CUBE_FACES
        .iter()
        .map(|f| {
            SquareSpec::Corners([
                name(f[0] as usize),
                name(f[1] as usize),
                name(f[2] as usize),
                name(f[3] as usize),
            ])
        })
        .collect();
    let cubes3 = vec![[name(0), name(1), name(2), name(3), name(4), name(5), name(6), name(7)]];
    build(ComplexSpec { name: "cube3".into(), vertices, edges, squares, cubes3 })
}

/// Deterministic pseudo-random stream for fixture generation (splitmix64).
pub struct FixtureRng(u64);

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        FixtureRng(seed)
    }
    pub fn next_below(&mut self, n: usize) -> usize {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z % n as u64) as usize
    }
}

/// Random hole-free polyomino of squares grown cell by cell. Hole-free plane
/// polyominoes are simply connected with flag links, so these make varied
/// small CAT(0) test windows.
pub fn random_square_tree(rng: &mut FixtureRng, extra_squares: usize) -> CubeComplex {
    use std::collections::BTreeSet;
    // Candidate cells that would enclose a bounded complement component are
    // rejected: flood-fill the complement inside an inflated bounding box and
    // demand it stay connected.
    fn hole_free(cells: &BTreeSet<(i64, i64)>) -> bool {
        let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(x, y) in cells {
            x0 = x0.min(x - 1);
            x1 = x1.max(x + 1);
            y0 = y0.min(y - 1);
            y1 = y1.max(y + 1);
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![(x0, y0)];
        seen.insert((x0, y0));
        while let Some((x, y)) = stack.pop() {
            for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if nx < x0 || nx > x1 || ny < y0 || ny > y1 {
                    continue;
                }
                if !cells.contains(&(nx, ny)) && seen.insert((nx, ny)) {
                    stack.push((nx, ny));
                }
            }
        }
        let area = (x1 - x0 + 1) * (y1 - y0 + 1);
        seen.len() as i64 + cells.len() as i64 == area
    }
    let mut cells: BTreeSet<(i64, i64)> = BTreeSet::new();
    cells.insert((0, 0));
    let mut frontier: Vec<(i64, i64)> = vec![(0, 0)];
    while cells.len() < extra_squares + 1 {
        let base = frontier[rng.next_below(frontier.len())];
        let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
        let (dx, dy) = dirs[rng.next_below(4)];
        let next = (base.0 + dx, base.1 + dy);
        if cells.contains(&next) {
            continue;
        }
        cells.insert(next);
        if hole_free(&cells) {
            frontier.push(next);
        } else {
            cells.remove(&next);
        }
    }
    let name = |x: i64, y: i64| format!("w{x}_{y}").replace('-', "m");
    let mut vertices = BTreeSet::new();
    let mut edge_set = BTreeSet::new();
    let mut squares = Vec::new();
    for &(x, y) in &cells {
        for (cx, cy) in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
            vertices.insert(name(cx, cy));
        }
        edge_set.insert((name(x, y), name(x + 1, y)));
        edge_set.insert((name(x, y + 1), name(x + 1, y + 1)));
        edge_set.insert((name(x, y), name(x, y + 1)));
        edge_set.insert((name(x + 1, y), name(x + 1, y + 1)));
        squares.push(SquareSpec::Corners([
            name(x, y),
            name(x + 1, y),
            name(x, y + 1),
            name(x + 1, y + 1),
        ]));
    }
    build(ComplexSpec {
        name: "square_tree".into(),
        vertices: vertices.into_iter().collect(),
        edges: edge_set.into_iter().collect(),
        squares,
        cubes3: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(grid(3, 2).vertex_count(), 12);
        assert_eq!(path(4).edge_count(), 4);
        assert_eq!(circle().edge_count(), 1);
        assert_eq!(ladder().square_count(), 1);
        assert_eq!(comb().edge_count(), 2);
        assert!(torus().npc_ok());
        assert!(klein().npc_ok());
        assert!(cube3().npc_ok());
    }

    #[test]
    fn square_trees_are_npc() {
        let mut rng = FixtureRng::new(7);
        for _ in 0..10 {
            let cx = random_square_tree(&mut rng, 12);
            assert!(cx.npc_ok());
        }
    }
}
