//! Exact classical ground states of a register and certification of the
//! MIS encoding.
//!
//! The search only visits occupation strings that are independent in the
//! blockade graph. That restriction is exact as long as, for every blockade
//! pair `(i, j)`, the pair interaction exceeds the smaller of the two total
//! detunings: removing the cheaper atom of an occupied pair then strictly
//! lowers the energy, so no ground state contains such a pair. The bound is
//! checked on every register before the search starts.
//!
//! Registers produced by the compiler have a rigid shape: originals joined
//! by chains whose blockade edges run only between consecutive chain atoms.
//! The branch and bound exploits it. It enumerates original occupations,
//! and for each one picks a configuration per chain from a precomputed,
//! energy-sorted list, bounding the rest by each chain's stand-alone minimum
//! (every omitted cross-chain term is a non-negative interaction).

use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::graph::{exact_mis_with_limit, is_independent_set, mis_size, Graph, VertexSet, DEFAULT_MIS_LIMIT};
use crate::numfmt::fmt_sig;
use crate::register::{blockade_graph, classical_energy, AtomRegister, PhysicalParams};
use crate::router::{Atom, AtomKind, Chain};

pub const DEFAULT_ATOM_LIMIT: usize = 60;
pub const DEFAULT_ORIGINAL_LIMIT: usize = 20;
pub const DEFAULT_STATE_CAP: usize = 1_000_000;
pub const EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Largest register (N₊) the oracle accepts.
    pub max_atoms: usize,
    /// Largest number of original atoms; their occupations are enumerated.
    pub max_originals: usize,
    /// Ground states beyond this count are dropped from the report.
    pub state_cap: usize,
    /// Energies within this absolute distance (units of U) are degenerate.
    pub tolerance: f64,
    /// Vertex limit for the exact MIS of the input graph.
    pub mis_limit: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_atoms: DEFAULT_ATOM_LIMIT,
            max_originals: DEFAULT_ORIGINAL_LIMIT,
            state_cap: DEFAULT_STATE_CAP,
            tolerance: 1e-9,
            mis_limit: DEFAULT_MIS_LIMIT,
        }
    }
}

impl OracleOptions {
    pub fn with_max_atoms(max_atoms: usize) -> Self {
        Self {
            max_atoms,
            ..Self::default()
        }
    }
}

/// Occupation string over the register's atoms, atom 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit {other:?}")),
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    BranchAndBound,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationChecks {
    pub mis_size: usize,
    pub ancilla_count: usize,
    pub blockade_mis_size: usize,
    /// `MIS(G) + Σ k_e / 2`.
    pub expected_blockade_mis_size: usize,
    /// Every ground state restricts to a maximum independent set of G.
    pub ground_states_encode_mis: bool,
    /// `MIS(G₊) = MIS(G) + Σ k_e / 2` on the blockade graph.
    pub gadget_identity: bool,
    /// First ground state whose restriction is not a MIS of G, if any.
    pub counterexample: Option<VertexSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub min_energy: f64,
    pub ground_states: Vec<BitString>,
    /// More ground states existed than the state cap allowed.
    pub truncated: bool,
    pub restricted_sets: Vec<VertexSet>,
    pub certified: bool,
    pub method: SearchMethod,
    pub checks: Option<CertificationChecks>,
}

/// `{v : z_v = 1}` over the original atoms.
pub fn restrict_to_original(reg: &AtomRegister, z: &BitString) -> VertexSet {
    (0..reg.original_n.min(z.0.len())).filter(|&v| z.0[v]).collect()
}

/// Returns the first blockade pair whose interaction does not dominate the
/// cheaper of its two detunings.
pub fn pruning_violation(reg: &AtomRegister, blockade: &Graph) -> Option<(usize, usize)> {
    blockade.edges().iter().copied().find(|&(i, j)| {
        let e = reg.pair_interaction(i, j).unwrap_or(f64::INFINITY);
        let w = reg.weight(i).min(reg.weight(j));
        !(e > w)
    })
}

/// Checks that blockade edges are exactly the consecutive pairs of chains.
fn chain_structure_mismatch(reg: &AtomRegister, blockade: &Graph) -> Option<String> {
    let mut expected: Vec<(usize, usize)> = reg
        .chains
        .iter()
        .flat_map(|c| c.atom_ids.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))))
        .collect();
    expected.sort_unstable();
    if expected.as_slice() == blockade.edges() {
        return None;
    }
    let extra = blockade.edges().iter().find(|e| expected.binary_search(e).is_err());
    let missing = expected.iter().find(|e| blockade.edges().binary_search(e).is_err());
    Some(match (extra, missing) {
        (Some(e), _) => format!("unexpected blockade pair {e:?}"),
        (None, Some(e)) => format!("chain pair {e:?} is not blockaded"),
        (None, None) => "duplicate chain pairs".into(),
    })
}

/// All minimum-energy occupation strings of `reg`.
pub fn ground_states(reg: &AtomRegister, opts: &OracleOptions) -> Result<GroundStateReport, OracleError> {
    if reg.params.omega != 0.0 {
        return Err(crate::error::RegisterError::NonzeroOmega(reg.params.omega).into());
    }
    let n = reg.atoms.len();
    if n > opts.max_atoms {
        return Err(OracleError::AtomLimit {
            atoms: n,
            limit: opts.max_atoms,
        });
    }
    reg.check_structure()?;
    let blockade = blockade_graph(reg);

    let mut fallback_reason = None;
    if let Some((i, j)) = pruning_violation(reg, &blockade) {
        fallback_reason = Some(OracleError::UnsoundPruning { i, j, atoms: n });
    } else if let Some(why) = chain_structure_mismatch(reg, &blockade) {
        fallback_reason = Some(OracleError::Unstructured(why));
    } else if reg.original_n > opts.max_originals {
        fallback_reason = Some(OracleError::OriginalLimit {
            originals: reg.original_n,
            limit: opts.max_originals,
        });
    }

    let (candidates, truncated, method) = match fallback_reason {
        None => {
            let (c, t) = ChainSearch::new(reg, opts)?.run();
            (c, t, SearchMethod::BranchAndBound)
        }
        Some(err) if n <= EXHAUSTIVE_LIMIT => {
            warn!("{err}; falling back to exhaustive enumeration");
            let (c, t) = exhaustive_candidates(reg, opts)?;
            (c, t, SearchMethod::Exhaustive)
        }
        Some(err) => return Err(err),
    };
    finish_report(reg, candidates, truncated, method, opts)
}

/// Minimum-energy states among those whose original atoms are occupied
/// exactly on `originals`. Requires the structured search.
pub fn ground_states_with_originals(
    reg: &AtomRegister,
    originals: &VertexSet,
    opts: &OracleOptions,
) -> Result<GroundStateReport, OracleError> {
    reg.check_structure()?;
    let blockade = blockade_graph(reg);
    if let Some((i, j)) = pruning_violation(reg, &blockade) {
        return Err(OracleError::UnsoundPruning { i, j, atoms: reg.atoms.len() });
    }
    if let Some(why) = chain_structure_mismatch(reg, &blockade) {
        return Err(OracleError::Unstructured(why));
    }
    if reg.original_n > 64 || originals.iter().any(|v| v >= reg.original_n) {
        return Err(OracleError::Mismatch(format!("original set {originals} does not fit the register")));
    }
    let mask = originals.iter().fold(0u64, |m, v| m | 1 << v);
    let (c, t) = ChainSearch::new(reg, opts)?.run_mask(mask);
    finish_report(reg, c, t, SearchMethod::BranchAndBound, opts)
}

/// Exhaustive `2^N` enumeration, independent of the blockade restriction.
pub fn exhaustive_ground_states(reg: &AtomRegister, opts: &OracleOptions) -> Result<GroundStateReport, OracleError> {
    if reg.params.omega != 0.0 {
        return Err(crate::error::RegisterError::NonzeroOmega(reg.params.omega).into());
    }
    let n = reg.atoms.len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(OracleError::AtomLimit {
            atoms: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let (c, t) = exhaustive_candidates(reg, opts)?;
    finish_report(reg, c, t, SearchMethod::Exhaustive, opts)
}

/// Re-evaluates every candidate with [`classical_energy`] and keeps the
/// minimum-energy ones, so both search methods share one final arbiter.
fn finish_report(
    reg: &AtomRegister,
    candidates: Vec<BitString>,
    mut truncated: bool,
    method: SearchMethod,
    opts: &OracleOptions,
) -> Result<GroundStateReport, OracleError> {
    let mut scored = Vec::with_capacity(candidates.len());
    for z in candidates {
        let e = classical_energy(reg, &z.0)?;
        scored.push((e, z));
    }
    let min_energy = scored.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    let mut states: Vec<BitString> = scored
        .into_iter()
        .filter(|(e, _)| *e <= min_energy + opts.tolerance)
        .map(|(_, z)| z)
        .collect();
    states.sort();
    states.dedup();
    if states.len() > opts.state_cap {
        states.truncate(opts.state_cap);
        truncated = true;
    }
    let restricted_sets = states.iter().map(|z| restrict_to_original(reg, z)).collect();
    Ok(GroundStateReport {
        min_energy,
        ground_states: states,
        truncated,
        restricted_sets,
        certified: false,
        method,
        checks: None,
    })
}

/// Collects every state within a small band above the running minimum.
struct Collector {
    best: f64,
    band: f64,
    cap: usize,
    states: Vec<(f64, BitString)>,
    truncated: bool,
}

impl Collector {
    fn new(upper: f64, band: f64, cap: usize) -> Self {
        Self {
            best: upper,
            band,
            cap,
            states: Vec::new(),
            truncated: false,
        }
    }

    fn threshold(&self) -> f64 {
        self.best + self.band
    }

    fn offer(&mut self, e: f64, z: impl FnOnce() -> BitString) {
        if e > self.threshold() {
            return;
        }
        if e < self.best {
            self.best = e;
            let t = self.threshold();
            self.states.retain(|(x, _)| *x <= t);
            if self.states.len() <= self.cap {
                self.truncated = false;
            }
        }
        // Room for a few extra near-degenerate strings; the final filter
        // trims to the cap.
        if self.states.len() <= self.cap {
            self.states.push((e, z()));
        } else {
            self.truncated = true;
        }
    }

    fn finish(self) -> (Vec<BitString>, bool) {
        let t = self.threshold();
        (self.states.into_iter().filter(|(e, _)| *e <= t).map(|(_, z)| z).collect(), self.truncated)
    }
}

fn exhaustive_candidates(reg: &AtomRegister, opts: &OracleOptions) -> Result<(Vec<BitString>, bool), OracleError> {
    let n = reg.atoms.len();
    let j = reg.interaction_matrix()?;
    let w: Vec<f64> = (0..n).map(|i| reg.weight(i)).collect();
    let mut field = vec![0.0; n];
    let mut z = vec![false; n];
    let mut e = 0.0;
    let mut collect = Collector::new(0.0, 10.0 * opts.tolerance, opts.state_cap);
    collect.offer(0.0, || BitString(z.clone()));
    for step in 1u64..(1u64 << n) {
        let b = step.trailing_zeros() as usize;
        if z[b] {
            for k in 0..n {
                field[k] -= j[b][k];
            }
            e -= field[b] - w[b];
            z[b] = false;
        } else {
            e += field[b] - w[b];
            for k in 0..n {
                field[k] += j[b][k];
            }
            z[b] = true;
        }
        collect.offer(e, || BitString(z.clone()));
    }
    Ok(collect.finish())
}

/// Receives the configurations of one chain from [`Walker`].
trait ChainVisitor {
    /// Configurations whose energy provably exceeds this are skipped.
    fn limit(&self) -> f64;
    fn visit(&mut self, energy: f64, atoms: &[usize]);
}

/// Depth-first enumeration of a chain's independent configurations under a
/// fixed external field.
///
/// A configuration's energy is `Σ (field_a − w_a) + Σ J_ab` over its atoms.
/// Subtrees are cut with the best gain still reachable from the remaining
/// positions, which ignores their (non-negative) mutual interactions.
struct Walker<'s> {
    j: &'s [Vec<f64>],
    ancillas: &'s [usize],
    /// `w_a − field_a` per chain position.
    gain_of: Vec<f64>,
    /// Best reachable gain from position `i` onwards, by occupation of `i − 1`.
    reach: Vec<[f64; 2]>,
    first_blocked: bool,
    last_blocked: bool,
}

impl<'s> Walker<'s> {
    fn new(search: &'s ChainSearch<'_>, c: usize, z: &[bool], field: &[f64]) -> Self {
        let info = &search.chains[c];
        let k = info.ancillas.len();
        let gain_of: Vec<f64> = info.ancillas.iter().map(|&a| search.w[a] - field[a]).collect();
        let last_blocked = z[info.v];
        let mut reach = vec![[0.0f64; 2]; k + 1];
        for i in (0..k).rev() {
            let take = if last_blocked && i == k - 1 {
                f64::NEG_INFINITY
            } else {
                gain_of[i] + reach[i + 1][1]
            };
            let skip = reach[i + 1][0];
            reach[i][0] = skip.max(take);
            reach[i][1] = skip;
        }
        Self {
            j: &search.j,
            ancillas: &info.ancillas,
            gain_of,
            reach,
            first_blocked: z[info.u],
            last_blocked,
        }
    }

    fn run(&self, visitor: &mut dyn ChainVisitor) {
        let mut chosen = Vec::with_capacity(self.ancillas.len() / 2 + 1);
        self.step(0, self.first_blocked, 0.0, &mut chosen, visitor);
    }

    fn step(&self, i: usize, prev_on: bool, energy: f64, chosen: &mut Vec<usize>, visitor: &mut dyn ChainVisitor) {
        if energy - self.reach[i][prev_on as usize] > visitor.limit() {
            return;
        }
        let k = self.ancillas.len();
        if i == k {
            visitor.visit(energy, chosen);
            return;
        }
        let blocked = prev_on || (self.last_blocked && i == k - 1);
        if !blocked {
            let a = self.ancillas[i];
            let mut e = energy - self.gain_of[i];
            for &b in chosen.iter() {
                e += self.j[a][b];
            }
            chosen.push(a);
            self.step(i + 1, true, e, chosen, visitor);
            chosen.pop();
        }
        self.step(i + 1, false, energy, chosen, visitor);
    }
}

struct MinVisitor {
    best: f64,
    arg: Vec<usize>,
}

impl MinVisitor {
    fn new() -> Self {
        Self {
            best: f64::INFINITY,
            arg: Vec::new(),
        }
    }
}

impl ChainVisitor for MinVisitor {
    fn limit(&self) -> f64 {
        self.best
    }

    fn visit(&mut self, energy: f64, atoms: &[usize]) {
        if energy < self.best {
            self.best = energy;
            self.arg.clear();
            self.arg.extend_from_slice(atoms);
        }
    }
}

struct ChainInfo {
    u: usize,
    v: usize,
    ancillas: Vec<usize>,
    /// Stand-alone minimum by endpoint occupation `[z_u][z_v]`.
    alone: [[f64; 2]; 2],
}

/// Mutable search state: the occupation string, the interaction field it
/// induces on every atom, and the collected minima.
struct State {
    z: Vec<bool>,
    field: Vec<f64>,
    collect: Collector,
}

impl State {
    fn set(&mut self, j: &[Vec<f64>], atoms: &[usize], on: bool) {
        let sign = if on { 1.0 } else { -1.0 };
        for &a in atoms {
            self.z[a] = on;
            for (f, x) in self.field.iter_mut().zip(&j[a]) {
                *f += sign * x;
            }
        }
    }
}

struct ChainSearch<'a> {
    reg: &'a AtomRegister,
    opts: OracleOptions,
    j: Vec<Vec<f64>>,
    w: Vec<f64>,
    chains: Vec<ChainInfo>,
    /// Branching order over chains: each next chain is the one interacting
    /// most strongly with those already placed.
    order: Vec<usize>,
}

impl<'a> ChainSearch<'a> {
    fn new(reg: &'a AtomRegister, opts: &OracleOptions) -> Result<Self, OracleError> {
        let j = reg.interaction_matrix()?;
        let w = (0..reg.atoms.len()).map(|i| reg.weight(i)).collect();
        let mut search = Self {
            reg,
            opts: *opts,
            j,
            w,
            chains: reg
                .chains
                .iter()
                .map(|c| ChainInfo {
                    u: c.edge.0,
                    v: c.edge.1,
                    ancillas: c.ancillas().to_vec(),
                    alone: [[0.0; 2]; 2],
                })
                .collect(),
            order: Vec::new(),
        };
        let n = reg.atoms.len();
        for c in 0..search.chains.len() {
            for su in 0..2 {
                for sv in 0..2 {
                    let mut z = vec![false; n];
                    let mut field = vec![0.0; n];
                    let (u, v) = (search.chains[c].u, search.chains[c].v);
                    for (x, on) in [(u, su), (v, sv)] {
                        if on == 1 {
                            z[x] = true;
                            for a in &search.chains[c].ancillas {
                                field[*a] += search.j[x][*a];
                            }
                        }
                    }
                    let mut m = MinVisitor::new();
                    Walker::new(&search, c, &z, &field).run(&mut m);
                    search.chains[c].alone[su][sv] = m.best;
                }
            }
        }
        search.order = search.chain_order();
        Ok(search)
    }

    fn chain_order(&self) -> Vec<usize> {
        let c = self.chains.len();
        let mut placed = vec![false; c];
        let mut coupling = vec![0.0f64; c];
        let mut order = Vec::with_capacity(c);
        for _ in 0..c {
            let next = (0..c)
                .filter(|&i| !placed[i])
                .max_by(|&a, &b| coupling[a].total_cmp(&coupling[b]).then(b.cmp(&a)))
                .expect("unplaced chain remains");
            placed[next] = true;
            order.push(next);
            for (other, coup) in coupling.iter_mut().enumerate() {
                if !placed[other] {
                    for &a in &self.chains[next].ancillas {
                        for &b in &self.chains[other].ancillas {
                            *coup += self.j[a][b];
                        }
                    }
                }
            }
        }
        order
    }

    fn band(&self) -> f64 {
        10.0 * self.opts.tolerance
    }

    fn originals_energy(&self, mask: u64) -> f64 {
        let n0 = self.reg.original_n;
        let mut e = 0.0;
        for u in (0..n0).filter(|&u| mask >> u & 1 == 1) {
            e -= self.w[u];
            for v in (u + 1..n0).filter(|&v| mask >> v & 1 == 1) {
                e += self.j[u][v];
            }
        }
        e
    }

    /// Cheap bound: originals plus every chain's stand-alone minimum.
    fn mask_bound(&self, mask: u64) -> f64 {
        self.originals_energy(mask)
            + self
                .chains
                .iter()
                .map(|c| c.alone[(mask >> c.u & 1) as usize][(mask >> c.v & 1) as usize])
                .sum::<f64>()
    }

    fn run(self) -> (Vec<BitString>, bool) {
        let n0 = self.reg.original_n;
        let n = self.reg.atoms.len();
        let mut masks: Vec<(f64, u64)> = (0..1u64 << n0).map(|m| (self.mask_bound(m), m)).collect();
        masks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut st = State {
            z: vec![false; n],
            field: vec![0.0; n],
            collect: Collector::new(f64::INFINITY, self.band(), self.opts.state_cap),
        };
        for &(bound, mask) in &masks {
            if bound > st.collect.threshold() {
                break;
            }
            let originals: Vec<usize> = (0..n0).filter(|&u| mask >> u & 1 == 1).collect();
            st.set(&self.j, &originals, true);
            let e0 = self.originals_energy(mask);
            self.greedy(e0, &mut st);
            self.descend(0, e0, &mut st);
            st.set(&self.j, &originals, false);
        }
        st.collect.finish()
    }

    fn run_mask(self, mask: u64) -> (Vec<BitString>, bool) {
        let n = self.reg.atoms.len();
        let mut st = State {
            z: vec![false; n],
            field: vec![0.0; n],
            collect: Collector::new(f64::INFINITY, self.band(), self.opts.state_cap),
        };
        let originals: Vec<usize> = (0..self.reg.original_n).filter(|&u| mask >> u & 1 == 1).collect();
        st.set(&self.j, &originals, true);
        let e0 = self.originals_energy(mask);
        self.greedy(e0, &mut st);
        self.descend(0, e0, &mut st);
        st.collect.finish()
    }

    /// Places each chain at its minimum given everything placed before it,
    /// which yields a quick incumbent for the mask.
    fn greedy(&self, energy: f64, st: &mut State) {
        let mut placed = Vec::new();
        let mut e = energy;
        for &c in &self.order {
            let mut m = MinVisitor::new();
            Walker::new(self, c, &st.z, &st.field).run(&mut m);
            e += m.best;
            st.set(&self.j, &m.arg, true);
            placed.push(m.arg);
        }
        st.collect.offer(e, || BitString(st.z.clone()));
        for atoms in placed.iter().rev() {
            st.set(&self.j, atoms, false);
        }
    }

    fn descend(&self, depth: usize, energy: f64, st: &mut State) {
        if depth == self.order.len() {
            let z = &st.z;
            st.collect.offer(energy, || BitString(z.clone()));
            return;
        }
        // Chain minima under the current field bound every completion from
        // below; more placed atoms only raise the field. Minima can be
        // negative, so none of them may be capped by a partial budget.
        let chain_min = |c: usize| {
            let mut m = MinVisitor::new();
            Walker::new(self, c, &st.z, &st.field).run(&mut m);
            m.best
        };
        let c = self.order[depth];
        let here = chain_min(c);
        let rest: f64 = self.order[depth + 1..].iter().map(|&c| chain_min(c)).sum();
        if !(energy + here + rest <= st.collect.threshold()) {
            return;
        }
        let walker = Walker::new(self, c, &st.z, &st.field);
        let mut branch = Branch {
            search: self,
            depth,
            energy,
            rest,
            st,
        };
        walker.run(&mut branch);
    }
}

/// Recurses into the next chain for every configuration of the current one.
struct Branch<'b, 'a> {
    search: &'b ChainSearch<'a>,
    depth: usize,
    energy: f64,
    rest: f64,
    st: &'b mut State,
}

impl ChainVisitor for Branch<'_, '_> {
    fn limit(&self) -> f64 {
        self.st.collect.threshold() - self.energy - self.rest
    }

    fn visit(&mut self, e: f64, atoms: &[usize]) {
        let j = &self.search.j;
        self.st.set(j, atoms, true);
        self.search.descend(self.depth + 1, self.energy + e, self.st);
        self.st.set(j, atoms, false);
    }
}

/// Runs the ground-state search and checks that the register encodes a
/// maximum independent set of `g`.
pub fn certify_embedding(g: &Graph, reg: &AtomRegister, opts: &OracleOptions) -> Result<GroundStateReport, OracleError> {
    check_consistency(g, reg)?;
    let mut report = ground_states(reg, opts)?;
    let (_, mis) = exact_mis_with_limit(g, opts.mis_limit)?;

    let counterexample = report
        .restricted_sets
        .iter()
        .find(|s| s.len() != mis || !is_independent_set(g, s))
        .cloned();
    let ancilla_count = reg.total_ancillas();
    let blockade_mis = mis_size(&blockade_graph(reg));
    let expected = mis + ancilla_count / 2;
    let checks = CertificationChecks {
        mis_size: mis,
        ancilla_count,
        blockade_mis_size: blockade_mis,
        expected_blockade_mis_size: expected,
        ground_states_encode_mis: counterexample.is_none() && !report.ground_states.is_empty(),
        gadget_identity: blockade_mis == expected,
        counterexample,
    };
    report.certified = checks.ground_states_encode_mis && checks.gadget_identity;
    report.checks = Some(checks);
    Ok(report)
}

/// The register must describe `g`: one original atom per vertex and one
/// chain per edge, in edge-id order.
pub fn check_consistency(g: &Graph, reg: &AtomRegister) -> Result<(), OracleError> {
    if reg.original_n != g.n() {
        return Err(OracleError::Mismatch(format!(
            "graph has {} vertices, register has {} original atoms",
            g.n(),
            reg.original_n
        )));
    }
    if reg.chains.len() != g.edge_count() {
        return Err(OracleError::Mismatch(format!(
            "graph has {} edges, register has {} chains",
            g.edge_count(),
            reg.chains.len()
        )));
    }
    for (e, (chain, &edge)) in reg.chains.iter().zip(g.edges()).enumerate() {
        if chain.edge != edge {
            return Err(OracleError::Mismatch(format!("chain {e} joins {:?}, edge {e} is {edge:?}", chain.edge)));
        }
    }
    Ok(())
}

/// The four-atom chain (original, ancilla, ancilla, original) on a line at
/// spacing `s`. Atom ids: 0 and 1 are the originals, 2 and 3 the ancillas.
pub fn gadget_register(spacing: f64, ancilla_detuning: f64, delta_global: f64) -> AtomRegister {
    let s = spacing;
    let atom = |x: f64, kind, source| Atom {
        pos: [x, 0.0, 0.0],
        kind,
        source,
    };
    AtomRegister {
        original_n: 2,
        atoms: vec![
            atom(0.0, AtomKind::Original, 0),
            atom(3.0 * s, AtomKind::Original, 1),
            atom(s, AtomKind::Ancilla, 0),
            atom(2.0 * s, AtomKind::Ancilla, 0),
        ],
        local_detunings: vec![0.0, 0.0, ancilla_detuning, ancilla_detuning],
        params: PhysicalParams {
            delta_global,
            ..PhysicalParams::default()
        },
        chains: vec![Chain {
            edge: (0, 1),
            edge_id: 0,
            atom_ids: vec![0, 2, 3, 1],
            spacing: s,
            waypoints: Vec::new(),
        }],
        scale: None,
    }
}

/// Gadget occupation written in chain order (positions 0, s, 2s, 3s) as
/// the register's atom-order bit-string.
pub fn gadget_state(chain_order: &str) -> BitString {
    let b: Vec<bool> = chain_order.chars().map(|c| c == '1').collect();
    assert_eq!(b.len(), 4, "gadget states have four atoms");
    BitString(vec![b[0], b[3], b[1], b[2]])
}

/// Chain-order label of a gadget bit-string.
pub fn gadget_label(z: &BitString) -> String {
    let b = &z.0;
    BitString(vec![b[0], b[2], b[3], b[1]]).to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub ancilla_detuning: f64,
    /// Energies of chain-order states `0000, 0001, …, 1111`.
    pub energies: [f64; 16],
    /// Minimum-energy states, chain order, sorted.
    pub argmin: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetSpectrum {
    pub spacing: f64,
    pub delta_global: f64,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    /// Last sweep value with the old ground states.
    pub before: f64,
    /// First sweep value with the new ground states.
    pub after: f64,
    pub from: Vec<String>,
    pub to: Vec<String>,
}

pub fn state_label(m: usize) -> String {
    format!("{m:04b}")
}

/// Energies of all 16 gadget states for each ancilla detuning in `sweep`.
pub fn gadget_spectrum(spacing: f64, delta_global: f64, sweep: &[f64]) -> GadgetSpectrum {
    let rows = sweep
        .iter()
        .map(|&di| {
            let reg = gadget_register(spacing, di, delta_global);
            let mut energies = [0.0; 16];
            for (m, e) in energies.iter_mut().enumerate() {
                *e = classical_energy(&reg, &gadget_state(&state_label(m)).0).expect("gadget register is well formed");
            }
            let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
            let tol = 1e-12 * min.abs().max(1.0);
            let argmin = (0..16).filter(|&m| energies[m] <= min + tol).map(state_label).collect();
            SpectrumRow {
                ancilla_detuning: di,
                energies,
                argmin,
            }
        })
        .collect();
    GadgetSpectrum {
        spacing,
        delta_global,
        rows,
    }
}

/// `lo, lo + step, …` up to `hi` (inclusive, with a half-step allowance),
/// computed by multiplication to avoid drift.
pub fn sweep_values(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "sweep step must be positive");
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}

impl GadgetSpectrum {
    pub fn crossovers(&self) -> Vec<Crossover> {
        self.rows
            .windows(2)
            .filter(|w| w[0].argmin != w[1].argmin)
            .map(|w| Crossover {
                before: w[0].ancilla_detuning,
                after: w[1].ancilla_detuning,
                from: w[0].argmin.clone(),
                to: w[1].argmin.clone(),
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_i");
        for m in 0..16 {
            out.push_str(&format!(",E_{}", state_label(m)));
        }
        out.push_str(",argmin_states\n");
        for row in &self.rows {
            out.push_str(&fmt_sig(row.ancilla_detuning));
            for e in row.energies {
                out.push(',');
                out.push_str(&fmt_sig(e));
            }
            out.push(',');
            out.push_str(&row.argmin.join("|"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::DEFAULT_DELTA_GLOBAL;

    fn labels(report: &GroundStateReport) -> Vec<String> {
        let mut l: Vec<String> = report.ground_states.iter().map(gadget_label).collect();
        l.sort();
        l
    }

    #[test]
    fn gadget_with_safe_detuning_is_antiferromagnetic() {
        let reg = gadget_register(1.0, 0.5, 0.2);
        let r = ground_states(&reg, &OracleOptions::default()).unwrap();
        assert_eq!(labels(&r), vec!["0101", "1010"]);
        assert_eq!(r.method, SearchMethod::BranchAndBound);
    }

    #[test]
    fn gadget_without_detuning_prefers_both_endpoints() {
        let reg = gadget_register(1.0, 0.0, 0.2);
        let r = ground_states(&reg, &OracleOptions::default()).unwrap();
        assert_eq!(labels(&r), vec!["1001"]);
        assert!((r.min_energy - (-0.4 + 1.0 / 729.0)).abs() < 1e-12);
    }

    #[test]
    fn single_atom() {
        let reg = AtomRegister {
            original_n: 1,
            atoms: vec![Atom {
                pos: [0.0; 3],
                kind: AtomKind::Original,
                source: 0,
            }],
            local_detunings: vec![0.0],
            params: PhysicalParams::default(),
            chains: Vec::new(),
            scale: None,
        };
        let r = ground_states(&reg, &OracleOptions::default()).unwrap();
        assert_eq!(r.ground_states, vec![BitString(vec![true])]);
        assert!((r.min_energy + DEFAULT_DELTA_GLOBAL).abs() < 1e-15);
    }

    #[test]
    fn restriction_projects_onto_originals() {
        let reg = gadget_register(1.0, 0.5, 0.2);
        assert_eq!(restrict_to_original(&reg, &gadget_state("1010")), [0].into_iter().collect());
        assert_eq!(restrict_to_original(&reg, &gadget_state("0101")), [1].into_iter().collect());
        assert!(restrict_to_original(&reg, &gadget_state("0000")).is_empty());
    }

    #[test]
    fn atom_limit_is_enforced() {
        let reg = gadget_register(1.0, 0.5, 0.2);
        let err = ground_states(&reg, &OracleOptions::with_max_atoms(3)).unwrap_err();
        assert_eq!(err, OracleError::AtomLimit { atoms: 4, limit: 3 });
    }

    #[test]
    fn unsound_pruning_falls_back_to_enumeration() {
        // Ancillas detuned beyond their mutual interaction.
        let reg = gadget_register(1.0, 1.5, 0.2);
        let blockade = blockade_graph(&reg);
        assert_eq!(pruning_violation(&reg, &blockade), Some((2, 3)));
        let r = ground_states(&reg, &OracleOptions::default()).unwrap();
        assert_eq!(r.method, SearchMethod::Exhaustive);
        assert_eq!(labels(&r), vec!["0110"]);
    }

    #[test]
    fn certification_of_the_gadget() {
        let g = Graph::path(2);
        let reg = gadget_register(1.0, 0.5, 0.2);
        let r = certify_embedding(&g, &reg, &OracleOptions::default()).unwrap();
        assert!(r.certified);
        assert_eq!(r.ground_states.len(), 2);
        let bad = gadget_register(1.0, 0.0, 0.2);
        let r = certify_embedding(&g, &bad, &OracleOptions::default()).unwrap();
        assert!(!r.certified);
        let checks = r.checks.unwrap();
        assert!(checks.gadget_identity);
        assert_eq!(checks.counterexample, Some([0, 1].into_iter().collect()));
    }

    #[test]
    fn consistency_errors_come_first() {
        let reg = gadget_register(1.0, 0.5, 0.2);
        assert!(matches!(
            certify_embedding(&Graph::empty(2), &reg, &OracleOptions::default()),
            Err(OracleError::Mismatch(_))
        ));
        assert!(matches!(
            certify_embedding(&Graph::path(3), &reg, &OracleOptions::default()),
            Err(OracleError::Mismatch(_))
        ));
    }

    #[test]
    fn spectrum_thresholds() {
        let sweep = sweep_values(0.0, 1.1, 0.001);
        assert_eq!(sweep.len(), 1101);
        let spec = gadget_spectrum(1.0, 0.2, &sweep);
        let x = spec.crossovers();
        assert_eq!(x.len(), 2, "{x:?}");
        let lo = 1.0 / 64.0 - 1.0 / 729.0;
        let hi = 1.0 - 1.0 / 64.0;
        assert!(x[0].before <= lo && lo <= x[0].after);
        assert_eq!(x[0].from, vec!["1001"]);
        assert_eq!(x[0].to, vec!["0101", "1010"]);
        assert!(x[1].before <= hi && hi <= x[1].after);
        assert_eq!(x[1].to, vec!["0110"]);
    }

    #[test]
    fn spectrum_csv_shape() {
        let spec = gadget_spectrum(1.0, 0.2, &[0.5]);
        let csv = spec.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), 18);
        assert!(lines[1].starts_with("0.5,0,"));
        assert!(lines[1].ends_with(",0101|1010"));
    }

    #[test]
    fn bitstring_text_round_trip() {
        let z: BitString = "0110".parse().unwrap();
        assert_eq!(z.to_string(), "0110");
        assert!("01x".parse::<BitString>().is_err());
    }
}
