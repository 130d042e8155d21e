//! 3D force-directed placement and lattice snapping.
//!
//! Vertices are first placed in continuous space with a three-dimensional
//! Fruchterman–Reingold layout, then rescaled onto the integer lattice and
//! separated so that every pair of vertices is at least `scale` cells apart
//! in Chebyshev distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::graph::Graph;

pub type Point = [f64; 3];
pub type Cell = [i32; 3];

pub const DEFAULT_FR_ITERATIONS: usize = 200;
pub const MIN_SCALE: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousLayout {
    pub positions: Vec<Point>,
}

/// Vertex positions on the integer lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout3D {
    pub positions: Vec<Cell>,
}

impl Layout3D {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Inclusive lattice bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Cell, Cell) {
        bounding_box(&self.positions)
    }

    pub fn min_chebyshev_separation(&self) -> Option<i32> {
        let p = &self.positions;
        let mut best = None;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d = chebyshev(p[i], p[j]);
                best = Some(best.map_or(d, |b: i32| b.min(d)));
            }
        }
        best
    }

    /// Distinct positions with pairwise Chebyshev distance at least `clearance`.
    pub fn is_valid(&self, clearance: i32) -> bool {
        self.min_chebyshev_separation().is_none_or(|d| d >= clearance)
    }

    pub fn to_continuous(&self) -> ContinuousLayout {
        ContinuousLayout {
            positions: self
                .positions
                .iter()
                .map(|c| [c[0] as f64, c[1] as f64, c[2] as f64])
                .collect(),
        }
    }
}

pub fn chebyshev(a: Cell, b: Cell) -> i32 {
    (0..3).map(|k| (a[k] - b[k]).abs()).max().unwrap()
}

pub fn manhattan(a: Cell, b: Cell) -> i32 {
    (0..3).map(|k| (a[k] - b[k]).abs()).sum()
}

pub(crate) fn bounding_box(cells: &[Cell]) -> (Cell, Cell) {
    let mut lo = [i32::MAX; 3];
    let mut hi = [i32::MIN; 3];
    for c in cells {
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    (lo, hi)
}

/// Anything that can place a graph's vertices in continuous 3D space.
pub trait LayoutEngine {
    fn layout(&self, g: &Graph, seed: u64) -> ContinuousLayout;
}

/// Fruchterman–Reingold in three dimensions with `k = 1`, a cubic frame of
/// volume `n·k³`, and a displacement cap that cools linearly from 10% of the
/// frame side to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FruchtermanReingold {
    pub iterations: usize,
    pub initial_temperature: f64,
}

impl Default for FruchtermanReingold {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_FR_ITERATIONS,
            initial_temperature: 0.1,
        }
    }
}

impl FruchtermanReingold {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }

    /// Runs the layout, calling `observe(iteration, positions)` after every
    /// round.
    pub fn run_observed(&self, g: &Graph, seed: u64, mut observe: impl FnMut(usize, &[Point])) -> ContinuousLayout {
        let n = g.n();
        assert!(n >= 1, "layout needs at least one vertex");
        let k = 1.0f64;
        let side = (n as f64 * k.powi(3)).cbrt();
        let half = side / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pos: Vec<Point> = (0..n)
            .map(|_| [rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half)])
            .collect();
        let t0 = self.initial_temperature * side;
        let mut disp = vec![[0.0f64; 3]; n];

        for it in 0..self.iterations {
            let temperature = t0 * (1.0 - it as f64 / self.iterations as f64);
            disp.iter_mut().for_each(|d| *d = [0.0; 3]);

            for v in 0..n {
                for u in v + 1..n {
                    let (dir, d) = separation(pos[v], pos[u], v, u);
                    let f = k * k / d;
                    for a in 0..3 {
                        disp[v][a] += dir[a] * f;
                        disp[u][a] -= dir[a] * f;
                    }
                }
            }
            for &(v, u) in g.edges() {
                let (dir, d) = separation(pos[v], pos[u], v, u);
                let f = d * d / k;
                for a in 0..3 {
                    disp[v][a] -= dir[a] * f;
                    disp[u][a] += dir[a] * f;
                }
            }

            for v in 0..n {
                let len = norm(disp[v]);
                if len > 0.0 {
                    let step = len.min(temperature) / len;
                    for a in 0..3 {
                        pos[v][a] = (pos[v][a] + disp[v][a] * step).clamp(-half, half);
                    }
                }
            }
            observe(it, &pos);
        }
        ContinuousLayout { positions: pos }
    }
}

impl LayoutEngine for FruchtermanReingold {
    fn layout(&self, g: &Graph, seed: u64) -> ContinuousLayout {
        self.run_observed(g, seed, |_, _| {})
    }
}

pub fn fruchterman_reingold_3d(g: &Graph, iterations: usize, seed: u64) -> ContinuousLayout {
    FruchtermanReingold::with_iterations(iterations).layout(g, seed)
}

fn norm(v: Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Unit vector from `b` to `a` and the distance, with a deterministic
/// direction when the points coincide.
fn separation(a: Point, b: Point, ia: usize, ib: usize) -> (Point, f64) {
    let delta = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let d = norm(delta);
    if d > 1e-9 {
        return ([delta[0] / d, delta[1] / d, delta[2] / d], d);
    }
    let axis = (ia + ib) % 3;
    let mut dir = [0.0; 3];
    dir[axis] = if ia < ib { 1.0 } else { -1.0 };
    (dir, 1e-9)
}

/// Smallest integer `c` with `c³ ≥ n`.
pub fn ceil_cbrt(n: usize) -> i32 {
    let mut c = 0i64;
    while c * c * c < n as i64 {
        c += 1;
    }
    c as i32
}

/// Snaps a continuous layout onto the lattice.
///
/// The layout is translated to the origin and scaled so its largest side
/// spans `scale·⌈n^{1/3}⌉` cells. Vertices are then placed in index order at
/// their rounded cell, or, if that cell is closer than `scale` (Chebyshev) to
/// an already placed vertex, at the first free cell of the smallest
/// Chebyshev shell around it, scanning each shell in lexicographic order.
/// The result is translated so its bounding box starts at the origin. An
/// input that already is a valid lattice layout comes back unchanged apart
/// from that translation.
pub fn snap_to_grid(layout: &ContinuousLayout, scale: u32) -> Result<Layout3D, LayoutError> {
    if scale < MIN_SCALE {
        return Err(LayoutError::ScaleTooSmall(scale));
    }
    let pos = &layout.positions;
    if pos.iter().flatten().any(|x| !x.is_finite()) {
        return Err(LayoutError::NonFinite);
    }
    let n = pos.len();
    let clearance = scale as i32;
    if n == 0 {
        return Ok(Layout3D { positions: Vec::new() });
    }

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pos {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }

    if let Some(lattice) = as_lattice(pos, lo) {
        let candidate = Layout3D { positions: lattice };
        if candidate.is_valid(clearance) {
            return Ok(candidate);
        }
    }

    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let span = (scale as i32 * ceil_cbrt(n)) as f64;
    let factor = if extent > 1e-12 { span / extent } else { 0.0 };

    let mut placed: Vec<Cell> = Vec::with_capacity(n);
    for p in pos {
        let target = [
            ((p[0] - lo[0]) * factor).round() as i32,
            ((p[1] - lo[1]) * factor).round() as i32,
            ((p[2] - lo[2]) * factor).round() as i32,
        ];
        let cell = first_free_cell(target, &placed, clearance);
        placed.push(cell);
    }

    let (min, _) = bounding_box(&placed);
    for c in &mut placed {
        for k in 0..3 {
            c[k] -= min[k];
        }
    }
    Ok(Layout3D { positions: placed })
}

/// Nudges vertices by single lattice steps so that as many edges as
/// possible have odd Manhattan length.
///
/// A lattice path between two cells has the parity of their Manhattan
/// distance, and odd paths carry whole-spacing chains while even ones need
/// compressed spacing. Vertices are visited in index order; one whose
/// incident edges are mostly even moves to the first neighboring cell
/// (order +x, −x, +y, −y, +z, −z) that keeps `clearance` to every other
/// vertex. Each move strictly raises the number of odd edges, so the passes
/// terminate. The result is translated back to the origin.
pub fn improve_edge_parity(g: &Graph, layout: &Layout3D, clearance: i32) -> Layout3D {
    const STEPS: [Cell; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    let mut pos = layout.positions.clone();
    if pos.is_empty() {
        return layout.clone();
    }
    let mut moved = true;
    while moved {
        moved = false;
        for v in 0..pos.len() {
            let even = g.neighbors(v).iter().filter(|&&u| manhattan(pos[u], pos[v]) % 2 == 0).count();
            if 2 * even <= g.degree(v) {
                continue;
            }
            let free = |c: Cell| (0..pos.len()).all(|u| u == v || chebyshev(c, pos[u]) >= clearance);
            let target = STEPS
                .iter()
                .map(|s| [pos[v][0] + s[0], pos[v][1] + s[1], pos[v][2] + s[2]])
                .find(|&c| free(c));
            if let Some(c) = target {
                pos[v] = c;
                moved = true;
            }
        }
    }
    let (min, _) = bounding_box(&pos);
    for c in &mut pos {
        for k in 0..3 {
            c[k] -= min[k];
        }
    }
    Layout3D { positions: pos }
}

fn as_lattice(pos: &[Point], lo: Point) -> Option<Vec<Cell>> {
    let shift = [lo[0].round(), lo[1].round(), lo[2].round()];
    pos.iter()
        .map(|p| {
            let mut c = [0i32; 3];
            for k in 0..3 {
                let r = p[k].round();
                if (p[k] - r).abs() > 1e-9 {
                    return None;
                }
                c[k] = (r - shift[k]) as i32;
            }
            Some(c)
        })
        .collect()
}

fn first_free_cell(target: Cell, placed: &[Cell], clearance: i32) -> Cell {
    let free = |c: Cell| placed.iter().all(|&q| chebyshev(c, q) >= clearance);
    for r in 0i32.. {
        for dx in -r..=r {
            for dy in -r..=r {
                for dz in -r..=r {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                        continue;
                    }
                    let c = [target[0] + dx, target[1] + dy, target[2] + dz];
                    if free(c) {
                        return c;
                    }
                }
            }
        }
    }
    unreachable!("shell probing terminates on an unbounded lattice")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er_bounded;

    fn dist(a: Point, b: Point) -> f64 {
        norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }

    #[test]
    fn parity_pass_makes_bipartite_edges_odd() {
        let g = Graph::cycle(6);
        for seed in 0..5 {
            let snapped = snap_to_grid(&fruchterman_reingold_3d(&g, 200, seed), 3).unwrap();
            let out = improve_edge_parity(&g, &snapped, 3);
            assert!(out.is_valid(3));
            for &(u, v) in g.edges() {
                assert_eq!(manhattan(out.positions[u], out.positions[v]) % 2, 1, "seed {seed}");
            }
        }
    }

    #[test]
    fn parity_pass_never_adds_even_edges() {
        for seed in 0..10 {
            let g = generate_er_bounded(12, 0.3, 6, seed);
            let snapped = snap_to_grid(&fruchterman_reingold_3d(&g, 200, seed), 3).unwrap();
            let even = |l: &Layout3D| {
                g.edges()
                    .iter()
                    .filter(|&&(u, v)| manhattan(l.positions[u], l.positions[v]) % 2 == 0)
                    .count()
            };
            let out = improve_edge_parity(&g, &snapped, 3);
            assert!(out.is_valid(3));
            assert!(even(&out) <= even(&snapped));
        }
    }

    #[test]
    fn single_vertex_does_not_move() {
        let g = Graph::empty(1);
        let mut first = None;
        let out = FruchtermanReingold::default().run_observed(&g, 3, |it, p| {
            if it == 0 {
                first = Some(p[0]);
            }
        });
        assert_eq!(Some(out.positions[0]), first);
        let snapped = snap_to_grid(&out, 3).unwrap();
        assert_eq!(snapped.positions, vec![[0, 0, 0]]);
    }

    #[test]
    fn isolated_pair_separates_monotonically() {
        let g = Graph::empty(2);
        let mut trace = Vec::new();
        let out = FruchtermanReingold::default().run_observed(&g, 11, |_, p| trace.push(dist(p[0], p[1])));
        assert_eq!(trace.len(), DEFAULT_FR_ITERATIONS);
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "distance shrank: {} -> {}", w[0], w[1]);
        }
        assert!(dist(out.positions[0], out.positions[1]) > trace[0] - 1e-12);
    }

    #[test]
    fn k4_converges_to_a_near_regular_tetrahedron() {
        let g = Graph::complete(4);
        for seed in 0..5 {
            let out = fruchterman_reingold_3d(&g, DEFAULT_FR_ITERATIONS, seed);
            let p = &out.positions;
            let d: Vec<f64> = g.edges().iter().map(|&(u, v)| dist(p[u], p[v])).collect();
            let max = d.iter().cloned().fold(f64::MIN, f64::max);
            let min = d.iter().cloned().fold(f64::MAX, f64::min);
            assert!((max - min) / max < 0.25, "seed {seed}: spread {d:?}");
        }
    }

    #[test]
    fn fr_is_deterministic() {
        let g = generate_er_bounded(12, 0.3, 6, 4);
        assert_eq!(fruchterman_reingold_3d(&g, 50, 9), fruchterman_reingold_3d(&g, 50, 9));
    }

    #[test]
    fn collisions_are_resolved_with_clearance() {
        let layout = ContinuousLayout {
            positions: vec![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0 + 1e-6]],
        };
        let snapped = snap_to_grid(&layout, 3).unwrap();
        assert!(snapped.is_valid(3));
        assert_ne!(snapped.positions[1], snapped.positions[2]);
    }

    #[test]
    fn rejects_small_scale() {
        let layout = ContinuousLayout { positions: vec![[0.0; 3]] };
        assert_eq!(snap_to_grid(&layout, 2), Err(LayoutError::ScaleTooSmall(2)));
    }

    #[test]
    fn random_layout_keeps_clearance_and_box() {
        for seed in 0..10 {
            let g = generate_er_bounded(20, 0.2, 6, seed);
            let cont = fruchterman_reingold_3d(&g, DEFAULT_FR_ITERATIONS, seed);
            let snapped = snap_to_grid(&cont, 3).unwrap();
            assert!(snapped.min_chebyshev_separation().unwrap() >= 3);
            let (lo, hi) = snapped.bounding_box();
            let limit = 2 * 3 * ceil_cbrt(20) + 20;
            for k in 0..3 {
                assert_eq!(lo[k], 0);
                assert!(hi[k] - lo[k] <= limit);
            }
        }
    }

    #[test]
    fn resnapping_a_valid_layout_is_identity() {
        for seed in 0..10 {
            let g = generate_er_bounded(15, 0.25, 6, seed);
            let snapped = snap_to_grid(&fruchterman_reingold_3d(&g, 100, seed), 4).unwrap();
            assert_eq!(snap_to_grid(&snapped.to_continuous(), 4).unwrap(), snapped);
        }
    }

    #[test]
    fn cube_root_ceiling() {
        assert_eq!(ceil_cbrt(1), 1);
        assert_eq!(ceil_cbrt(8), 2);
        assert_eq!(ceil_cbrt(9), 3);
        assert_eq!(ceil_cbrt(27), 3);
        assert_eq!(ceil_cbrt(100), 5);
    }
}
