//! Lattice routing of edges and ancilla-chain construction.
//!
//! Edges are routed one at a time, longest first, with A* on the unit
//! lattice. Every routed cell and every vertex cell claims its Chebyshev-1
//! neighborhood, so cells of unrelated chains stay at least two lattice steps
//! apart. Around a shared endpoint the first cells of its chains may sit
//! diagonally next to each other (distance √2); that is the only place where
//! two chains come closer than two cells.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::RouteError;
use crate::graph::Graph;
use crate::layout::{bounding_box, chebyshev, manhattan, Cell, Layout3D, Point};

/// Cells the router may use beyond the layout's bounding box on each side.
pub const DEFAULT_ROUTING_MARGIN: i32 = 4;

const STEPS: [Cell; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];

/// One original edge drawn as an axis-parallel lattice path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedEdge {
    pub edge: (usize, usize),
    pub edge_id: usize,
    /// Lattice points from the cell of `edge.0` to the cell of `edge.1`.
    pub waypoints: Vec<Cell>,
    /// Ancilla positions ordered from `edge.0` towards `edge.1`; empty until
    /// [`insert_ancillas`] runs.
    pub ancilla_positions: Vec<Point>,
}

impl RoutedEdge {
    /// Number of unit steps `p`.
    pub fn steps(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }

    /// Arc-length spacing between consecutive atoms of the chain: 1 for odd
    /// paths, `p/(p+1)` for even ones.
    pub fn spacing(&self) -> f64 {
        chain_spacing(self.steps())
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_positions.len()
    }
}

pub fn chain_spacing(steps: usize) -> f64 {
    if steps % 2 == 1 {
        1.0
    } else {
        steps as f64 / (steps as f64 + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Original,
    Ancilla,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub pos: Point,
    pub kind: AtomKind,
    /// Vertex id for original atoms, edge id for ancillas.
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub edge: (usize, usize),
    pub edge_id: usize,
    /// Atom ids along the chain, both original endpoints included.
    pub atom_ids: Vec<usize>,
    pub spacing: f64,
    /// Lattice path the chain follows; empty when unknown.
    #[serde(default)]
    pub waypoints: Vec<Cell>,
}

impl Chain {
    pub fn ancillas(&self) -> &[usize] {
        &self.atom_ids[1..self.atom_ids.len() - 1]
    }
}

/// Original vertices plus all ancillas, with chain adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedGraph {
    pub original_n: usize,
    pub atoms: Vec<Atom>,
    pub chains: Vec<Chain>,
    /// Consecutive atom pairs along every chain, `(min, max)` and sorted.
    pub chain_edges: Vec<(usize, usize)>,
}

impl AugmentedGraph {
    pub fn n_plus(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_ancillas(&self) -> usize {
        self.atoms.len() - self.original_n
    }

    /// Smallest distance between atoms of different chains, ignoring pairs
    /// that involve an endpoint shared by both. Originals count as members of
    /// every chain they terminate.
    pub fn min_cross_chain_distance(&self) -> Option<f64> {
        let mut chain_of = vec![usize::MAX; self.atoms.len()];
        for (c, chain) in self.chains.iter().enumerate() {
            for &a in chain.ancillas() {
                chain_of[a] = c;
            }
        }
        let mut best: Option<f64> = None;
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                let related = match (chain_of[i], chain_of[j]) {
                    (usize::MAX, usize::MAX) => false,
                    (usize::MAX, c) => endpoint_of(&self.chains[c], i),
                    (c, usize::MAX) => endpoint_of(&self.chains[c], j),
                    (a, b) => a == b,
                };
                if related {
                    continue;
                }
                let d = distance(self.atoms[i].pos, self.atoms[j].pos);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

fn endpoint_of(chain: &Chain, atom: usize) -> bool {
    chain.atom_ids[0] == atom || *chain.atom_ids.last().unwrap() == atom
}

pub fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn add(a: Cell, b: Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Occupant {
    Free,
    Vertex,
    Path,
}

/// Dense occupancy over the routing box.
struct Grid {
    lo: Cell,
    dims: [usize; 3],
    occupant: Vec<Occupant>,
    /// Number of vertex/path cells whose Chebyshev-1 ball covers the cell.
    claims: Vec<u16>,
    /// Number of vertices with unrouted edges whose port region covers the
    /// cell.
    reserved: Vec<u16>,
}

impl Grid {
    fn new(lo: Cell, hi: Cell) -> Self {
        let dims = [
            (hi[0] - lo[0] + 1) as usize,
            (hi[1] - lo[1] + 1) as usize,
            (hi[2] - lo[2] + 1) as usize,
        ];
        let volume = dims[0] * dims[1] * dims[2];
        Self {
            lo,
            dims,
            occupant: vec![Occupant::Free; volume],
            claims: vec![0; volume],
            reserved: vec![0; volume],
        }
    }

    fn index(&self, c: Cell) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..3 {
            let off = c[k] - self.lo[k];
            if off < 0 || off as usize >= self.dims[k] {
                return None;
            }
            idx = idx * self.dims[k] + off as usize;
        }
        Some(idx)
    }

    fn cell(&self, mut idx: usize) -> Cell {
        let z = idx % self.dims[2];
        idx /= self.dims[2];
        let y = idx % self.dims[1];
        let x = idx / self.dims[1];
        [self.lo[0] + x as i32, self.lo[1] + y as i32, self.lo[2] + z as i32]
    }

    fn reserve(&mut self, c: Cell, add: bool) {
        for n in ports(c) {
            if let Some(i) = self.index(n) {
                if add {
                    self.reserved[i] += 1;
                } else {
                    self.reserved[i] -= 1;
                }
            }
        }
    }

    fn claim(&mut self, c: Cell, occupant: Occupant) {
        if let Some(i) = self.index(c) {
            self.occupant[i] = occupant;
        }
        for n in ball(c) {
            if let Some(i) = self.index(n) {
                self.claims[i] += 1;
            }
        }
    }
}

/// Port region of a vertex at `c`: the Chebyshev balls around its six arms
/// of `STUB_LENGTH` cells. Edges leave and enter a vertex along its arms.
fn ports(c: Cell) -> impl Iterator<Item = Cell> {
    STEPS.into_iter().flat_map(move |s| {
        (1..=STUB_LENGTH as i32).flat_map(move |k| ball([c[0] + k * s[0], c[1] + k * s[1], c[2] + k * s[2]]))
    })
}

/// Offset of `c` from a vertex at `x` when `c` lies in the vertex's port
/// region.
fn port_offset(x: Cell, c: Cell) -> Option<Cell> {
    let off = [c[0] - x[0], c[1] - x[1], c[2] - x[2]];
    let reach = STUB_LENGTH as i32 + 1;
    (0..3)
        .any(|i| off[i].abs() <= reach && (0..3).all(|k| k == i || off[k].abs() <= 1))
        .then_some(off)
}

/// Where a step into the port region of an endpoint is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PortStep {
    /// Outside both endpoints' port regions.
    Outside,
    /// Along the straight stub out of `start` or the final run into `goal`;
    /// other vertices' reservations do not apply.
    Stub,
    /// Inside a port region but off the stubs, e.g. the corner before the
    /// final run.
    Near,
    Forbidden,
}

/// Classifies a step from `from` to `to` against the endpoint port regions.
///
/// Once past its first bend a path never re-enters the port region of
/// `start`. Inside the port region of `goal` it may only turn onto an axis
/// line through `goal` and run straight in. Without these rules a shortest
/// path may wrap around an endpoint and claim the cells in front of the
/// faces its other edges need.
fn port_step(start: Cell, goal: Cell, from: Cell, to: Cell, step: Cell, on_stub: bool) -> PortStep {
    let near_start = port_offset(start, to).is_some();
    if on_stub && near_start {
        return PortStep::Stub;
    }
    if near_start {
        return PortStep::Forbidden;
    }
    let Some(off) = port_offset(goal, to) else {
        return PortStep::Outside;
    };
    if off.iter().filter(|&&x| x != 0).count() == 1 {
        let toward = (0..3).all(|k| step[k] == -off[k].signum());
        let across = (0..3).all(|k| step[k] * off[k] == 0);
        if toward {
            PortStep::Stub
        } else if across || on_stub {
            PortStep::Near
        } else {
            PortStep::Forbidden
        }
    } else if on_stub || port_offset(goal, from).is_none() {
        PortStep::Near
    } else {
        PortStep::Forbidden
    }
}

fn ball(c: Cell) -> impl Iterator<Item = Cell> {
    (-1..=1).flat_map(move |dx| (-1..=1).flat_map(move |dy| (-1..=1).map(move |dz| [c[0] + dx, c[1] + dy, c[2] + dz])))
}

/// Routes every edge of `g` over `layout`.
///
/// Edges are processed by decreasing Manhattan distance between endpoints
/// (ties by edge id); each gets a shortest path that avoids all claimed
/// cells. The result is indexed by edge id.
pub fn route_edges(g: &Graph, layout: &Layout3D) -> Result<Vec<RoutedEdge>, RouteError> {
    route_edges_with_margin(g, layout, DEFAULT_ROUTING_MARGIN)
}

pub fn route_edges_with_margin(g: &Graph, layout: &Layout3D, margin: i32) -> Result<Vec<RoutedEdge>, RouteError> {
    let pos = &layout.positions;
    if g.edge_count() == 0 {
        return Ok(Vec::new());
    }
    let (mut lo, mut hi) = bounding_box(pos);
    for k in 0..3 {
        lo[k] -= margin;
        hi[k] += margin;
    }
    let mut grid = Grid::new(lo, hi);
    for (x, &p) in pos.iter().enumerate() {
        grid.claim(p, Occupant::Vertex);
        if g.degree(x) > 0 {
            grid.reserve(p, true);
        }
    }

    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by_key(|&e| {
        let (u, v) = g.edges()[e];
        (Reverse(manhattan(pos[u], pos[v])), e)
    });

    let mut routed: Vec<Option<RoutedEdge>> = vec![None; g.edge_count()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    let mut search = AStar::new(grid.occupant.len());

    for e in order {
        let (u, v) = g.edges()[e];
        let released = released_claims(&grid, pos, u, v, &incident, &routed);
        let own = own_reservations(&grid, pos, u, v);
        let path = search
            .shortest_path(&grid, pos[u], pos[v], &released, &own)
            .ok_or(RouteError::NoPath { edge_id: e, u, v })?;
        for &c in &path[1..path.len() - 1] {
            grid.claim(c, Occupant::Path);
        }
        incident[u].push(e);
        incident[v].push(e);
        for x in [u, v] {
            if incident[x].len() == g.degree(x) {
                grid.reserve(pos[x], false);
            }
        }
        routed[e] = Some(RoutedEdge {
            edge: (u, v),
            edge_id: e,
            waypoints: path,
            ancilla_positions: Vec::new(),
        });
    }
    Ok(routed.into_iter().map(|r| r.expect("every edge routed")).collect())
}

/// Claims that do not apply while routing `(u, v)`: the endpoints' own
/// neighborhoods, and, around each endpoint, the claim that the first cell of
/// an already routed incident chain places on the endpoint's face neighbors.
fn released_claims(
    grid: &Grid,
    pos: &[Cell],
    u: usize,
    v: usize,
    incident: &[Vec<usize>],
    routed: &[Option<RoutedEdge>],
) -> HashMap<usize, u16> {
    let mut released: HashMap<usize, u16> = HashMap::new();
    let mut release = |c: Cell| {
        if let Some(i) = grid.index(c) {
            *released.entry(i).or_default() += 1;
        }
    };
    for x in [u, v] {
        for c in ball(pos[x]) {
            release(c);
        }
        for &e in &incident[x] {
            let r = routed[e].as_ref().expect("incident edges are routed");
            let w = &r.waypoints;
            let first = if w[0] == pos[x] { w[1] } else { w[w.len() - 2] };
            for s in STEPS {
                let f = add(pos[x], s);
                if chebyshev(f, first) <= 1 {
                    release(f);
                }
            }
        }
    }
    released
}

/// Reservation counts contributed by the endpoints themselves.
fn own_reservations(grid: &Grid, pos: &[Cell], u: usize, v: usize) -> HashMap<usize, u16> {
    let mut own: HashMap<usize, u16> = HashMap::new();
    for x in [u, v] {
        for c in ports(pos[x]) {
            if let Some(i) = grid.index(c) {
                *own.entry(i).or_default() += 1;
            }
        }
    }
    own
}

/// Path cost: length dominates, bends break ties between equally short
/// paths.
const STEP_COST: u32 = 1 << 12;
/// Bend-parity imbalance tracked exactly within `±MAX_IMBALANCE`.
const MAX_IMBALANCE: i32 = 3;
const IMBALANCE_STATES: usize = 2 * MAX_IMBALANCE as usize + 1;
/// Search states per cell: incoming direction (6) × current run length
/// (1 or ≥ 2) × whether the path is still on its first segment × bend
/// imbalance.
const STATES_PER_CELL: usize = 24 * IMBALANCE_STATES;
/// Straight steps required on every segment, in particular at both ends.
pub const STUB_LENGTH: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Heading {
    dir: usize,
    /// Length of the current straight run, saturated at `STUB_LENGTH`.
    run: u8,
    first_segment: bool,
    /// Bends at even step index minus bends at odd step index, clamped.
    imbalance: i32,
}

impl Heading {
    fn encode(self) -> usize {
        let h = self.dir * 4 + (self.run as usize - 1) * 2 + self.first_segment as usize;
        h * IMBALANCE_STATES + (self.imbalance + MAX_IMBALANCE) as usize
    }

    fn decode(code: usize) -> Self {
        let (h, b) = (code / IMBALANCE_STATES, code % IMBALANCE_STATES);
        Self {
            dir: h / 4,
            run: (h / 2 % 2) as u8 + 1,
            first_segment: h % 2 == 1,
            imbalance: b as i32 - MAX_IMBALANCE,
        }
    }

    /// Heading after stepping in direction `d` from a cell at step index
    /// parity `odd`, or `None` if the turn would leave a segment shorter
    /// than [`STUB_LENGTH`].
    fn step(from: Option<Self>, d: usize, odd: bool) -> Option<Self> {
        let Some(h) = from else {
            return Some(Self {
                dir: d,
                run: 1,
                first_segment: true,
                imbalance: 0,
            });
        };
        if d == h.dir {
            return Some(Self {
                run: (h.run + 1).min(STUB_LENGTH),
                ..h
            });
        }
        if d == h.dir ^ 1 || h.run < STUB_LENGTH {
            return None;
        }
        let shift = if odd { -1 } else { 1 };
        Some(Self {
            dir: d,
            run: 1,
            first_segment: false,
            imbalance: (h.imbalance + shift).clamp(-MAX_IMBALANCE, MAX_IMBALANCE),
        })
    }
}

/// A* over `(cell, heading)` states.
struct AStar {
    g_score: Vec<u32>,
    parent: Vec<u32>,
    closed: Vec<bool>,
    touched: Vec<usize>,
}

impl AStar {
    fn new(volume: usize) -> Self {
        let states = volume * STATES_PER_CELL + 1;
        Self {
            g_score: vec![u32::MAX; states],
            parent: vec![u32::MAX; states],
            closed: vec![false; states],
            touched: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &i in &self.touched {
            self.g_score[i] = u32::MAX;
            self.parent[i] = u32::MAX;
            self.closed[i] = false;
        }
        self.touched.clear();
    }

    /// Shortest path whose straight segments are all at least
    /// [`STUB_LENGTH`] steps. Among shortest paths it prefers the smallest
    /// imbalance between bends at even and odd step indices, then the fewest
    /// bends. At a bend on step `b` the atoms on steps `b − 1` and `b + 1`
    /// sit a diagonal apart; balanced bends penalize both alternating
    /// occupation patterns of the chain equally.
    ///
    /// The heuristic is the Manhattan distance; neighbors are expanded in the
    /// order +x, −x, +y, −y, +z, −z and equal-f entries leave the queue FIFO.
    fn shortest_path(
        &mut self,
        grid: &Grid,
        start: Cell,
        goal: Cell,
        released: &HashMap<usize, u16>,
        own: &HashMap<usize, u16>,
    ) -> Option<Vec<Cell>> {
        self.reset();
        let s = grid.index(start)?;
        let t = grid.index(goal)?;
        let passable = |i: usize| {
            if i == t {
                return true;
            }
            if grid.occupant[i] != Occupant::Free {
                return false;
            }
            grid.claims[i] == released.get(&i).copied().unwrap_or(0)
        };
        // Reservations of vertices other than the endpoints.
        let foreign = |i: usize| grid.reserved[i] != own.get(&i).copied().unwrap_or(0);
        // The start state sits past every cell's block of states.
        let origin = self.g_score.len() - 1;
        let cell_of = |si: usize| si / STATES_PER_CELL;
        let h = |c: Cell| manhattan(c, goal) as u32 * STEP_COST;

        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        self.g_score[origin] = 0;
        self.touched.push(origin);
        heap.push(Reverse((h(start), seq, origin)));
        // Best goal state so far: (|imbalance|, state).
        let mut reached: Option<(i32, usize)> = None;
        let mut length_cap = u32::MAX;
        while let Some(Reverse((f, _, si))) = heap.pop() {
            if f >= length_cap {
                break;
            }
            if self.closed[si] {
                continue;
            }
            self.closed[si] = true;
            let (i, heading) = if si == origin {
                (s, None)
            } else {
                (cell_of(si), Some(Heading::decode(si % STATES_PER_CELL)))
            };
            if i == t {
                let score = heading.map_or(0, |h| h.imbalance.abs());
                if reached.is_none_or(|(best, _)| score < best) {
                    reached = Some((score, si));
                }
                length_cap = (self.g_score[si] / STEP_COST + 1) * STEP_COST;
                continue;
            }
            let c = grid.cell(i);
            let odd = manhattan(c, start) % 2 == 1;
            for (d, step) in STEPS.iter().enumerate() {
                let Some(next) = Heading::step(heading, d, odd) else { continue };
                let nc = add(c, *step);
                let Some(j) = grid.index(nc) else { continue };
                if !passable(j) || (j == t && next.run < STUB_LENGTH) {
                    continue;
                }
                // The endpoints' neighborhoods are entered only on the first
                // step out of `start` and on the straight final approach.
                if j != t {
                    let leaving = heading.is_none();
                    let approaching = add(nc, *step) == goal;
                    if (chebyshev(nc, start) <= 1 && !leaving) || (chebyshev(nc, goal) <= 1 && !approaching) {
                        continue;
                    }
                    let on_stub = heading.is_none_or(|h| h.first_segment);
                    match port_step(start, goal, c, nc, *step, on_stub) {
                        PortStep::Forbidden => continue,
                        PortStep::Outside | PortStep::Near if foreign(j) => continue,
                        _ => {}
                    }
                }
                let bend = heading.is_some_and(|h| h.dir != d) as u32;
                let g_next = self.g_score[si] + STEP_COST + bend;
                let sj = j * STATES_PER_CELL + next.encode();
                if self.closed[sj] || g_next >= self.g_score[sj] {
                    continue;
                }
                if self.g_score[sj] == u32::MAX {
                    self.touched.push(sj);
                }
                self.g_score[sj] = g_next;
                self.parent[sj] = si as u32;
                seq += 1;
                heap.push(Reverse((g_next + h(nc), seq, sj)));
            }
        }
        let (_, mut si) = reached?;
        let mut path = vec![goal];
        while self.parent[si] as usize != origin {
            si = self.parent[si] as usize;
            path.push(grid.cell(cell_of(si)));
        }
        path.push(start);
        path.reverse();
        Some(path)
    }
}

fn validate_waypoints(route: &RoutedEdge) -> Result<(), RouteError> {
    let err = |reason: String| RouteError::InvalidWaypoints {
        edge_id: route.edge_id,
        reason,
    };
    let w = &route.waypoints;
    for pair in w.windows(2) {
        if manhattan(pair[0], pair[1]) != 1 {
            return Err(err(format!("{:?} -> {:?} is not a unit step", pair[0], pair[1])));
        }
    }
    let mut seen = HashSet::new();
    for c in w {
        if !seen.insert(*c) {
            return Err(err(format!("cell {c:?} visited twice")));
        }
    }
    Ok(())
}

/// Places the ancillas of one chain.
///
/// Odd paths get an ancilla on every interior lattice point. Even paths of
/// `p` steps get `p` ancillas spread evenly by arc length, at spacing
/// `p/(p+1)`; around bends these sit on the polyline between lattice
/// points. Either way the count is even.
pub fn insert_ancillas(mut route: RoutedEdge) -> Result<RoutedEdge, RouteError> {
    validate_waypoints(&route)?;
    let p = route.steps();
    if p < 2 {
        return Err(RouteError::PathTooShort {
            edge_id: route.edge_id,
            steps: p,
        });
    }
    let w = &route.waypoints;
    route.ancilla_positions = if p % 2 == 1 {
        w[1..p].iter().map(|c| [c[0] as f64, c[1] as f64, c[2] as f64]).collect()
    } else {
        (1..=p)
            .map(|j| {
                let t = (j * p) as f64 / (p + 1) as f64;
                let seg = (t.floor() as usize).min(p - 1);
                let frac = t - seg as f64;
                let (a, b) = (w[seg], w[seg + 1]);
                [
                    a[0] as f64 + frac * (b[0] - a[0]) as f64,
                    a[1] as f64 + frac * (b[1] - a[1]) as f64,
                    a[2] as f64 + frac * (b[2] - a[2]) as f64,
                ]
            })
            .collect()
    };
    Ok(route)
}

/// Assembles the augmented graph: atoms `0..n` are the original vertices,
/// followed by each chain's ancillas in edge-id order.
pub fn build_augmented_graph(g: &Graph, layout: &Layout3D, routes: &[RoutedEdge]) -> Result<AugmentedGraph, RouteError> {
    if routes.len() != g.edge_count() {
        return Err(RouteError::Coverage(format!("{} routes for {} edges", routes.len(), g.edge_count())));
    }
    let mut atoms: Vec<Atom> = layout
        .positions
        .iter()
        .enumerate()
        .map(|(v, c)| Atom {
            pos: [c[0] as f64, c[1] as f64, c[2] as f64],
            kind: AtomKind::Original,
            source: v,
        })
        .collect();
    let mut chains = Vec::with_capacity(routes.len());
    let mut chain_edges = Vec::new();
    for (e, r) in routes.iter().enumerate() {
        let (u, v) = g.edges()[e];
        if r.edge_id != e || r.edge != (u, v) {
            return Err(RouteError::Coverage(format!("route {e} does not match edge ({u}, {v})")));
        }
        if r.waypoints.first() != Some(&layout.positions[u]) || r.waypoints.last() != Some(&layout.positions[v]) {
            return Err(RouteError::InvalidWaypoints {
                edge_id: e,
                reason: "path does not join the edge's endpoints".into(),
            });
        }
        if r.ancilla_positions.is_empty() || r.ancilla_positions.len() % 2 != 0 {
            return Err(RouteError::InvalidWaypoints {
                edge_id: e,
                reason: format!("{} ancillas; a positive even count is required", r.ancilla_positions.len()),
            });
        }
        let mut ids = vec![u];
        for &p in &r.ancilla_positions {
            ids.push(atoms.len());
            atoms.push(Atom {
                pos: p,
                kind: AtomKind::Ancilla,
                source: e,
            });
        }
        ids.push(v);
        for pair in ids.windows(2) {
            chain_edges.push((pair[0].min(pair[1]), pair[0].max(pair[1])));
        }
        chains.push(Chain {
            edge: (u, v),
            edge_id: e,
            atom_ids: ids,
            spacing: r.spacing(),
            waypoints: r.waypoints.clone(),
        });
    }
    chain_edges.sort_unstable();

    let mut seen: HashMap<[i64; 3], usize> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        let key = [
            (a.pos[0] * 1e6).round() as i64,
            (a.pos[1] * 1e6).round() as i64,
            (a.pos[2] * 1e6).round() as i64,
        ];
        if let Some(&j) = seen.get(&key) {
            return Err(RouteError::DuplicateAtom(j, i));
        }
        seen.insert(key, i);
    }

    Ok(AugmentedGraph {
        original_n: g.n(),
        atoms,
        chains,
        chain_edges,
    })
}
