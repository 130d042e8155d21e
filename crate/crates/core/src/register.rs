//! Physical atom register: detunings, the diagonal (Ω = 0) energy model and
//! blockade-graph extraction.
//!
//! Energies are in units of `U`, the interaction of two atoms one lattice
//! step apart, and distances in lattice steps, so the pair interaction is
//! `U / r⁶`. The diagonal energy of an occupation string `z` is
//!
//! ```text
//! E(z) = −Σ_j (δ + δ_j) z_j + Σ_{i<j} U / r_ij⁶ · z_i z_j
//! ```
//!
//! which is the Ising eigenvalue with `σᶻ = 2n − 1` substituted and the
//! resulting constant dropped.

use serde::{Deserialize, Serialize};

use crate::error::RegisterError;
use crate::graph::Graph;
use crate::layout::{Cell, Point};
use crate::numfmt::{round_point, round_sig};
use crate::router::{distance, Atom, AtomKind, AugmentedGraph, Chain};

/// Global detuning in units of `U`. Every residual interaction between
/// non-adjacent atoms is a perturbation the global detuning has to outweigh,
/// so it sits just below `U/2`, the largest value for which a blockaded pair
/// never beats the better of its two atoms alone.
pub const DEFAULT_DELTA_GLOBAL: f64 = 0.45;
pub const DEFAULT_BLOCKADE_RADIUS: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Interaction at unit spacing; `C6 = U` in lattice units.
    #[serde(rename = "U")]
    pub u: f64,
    pub delta_global: f64,
    pub r_b: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub omega: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            u: 1.0,
            delta_global: DEFAULT_DELTA_GLOBAL,
            r_b: DEFAULT_BLOCKADE_RADIUS,
            omega: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), RegisterError> {
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(RegisterError::Params(format!("U must be positive, got {}", self.u)));
        }
        if !(self.r_b > 1.0 && self.r_b < std::f64::consts::SQRT_2) {
            return Err(RegisterError::Params(format!("r_b must lie in (1, √2), got {}", self.r_b)));
        }
        if !(self.delta_global > 0.0 && self.delta_global < self.u) {
            return Err(RegisterError::Params(format!(
                "global detuning must lie in (0, U), got {}",
                self.delta_global
            )));
        }
        Ok(())
    }
}

pub fn interaction(r: f64, params: &PhysicalParams) -> Result<f64, RegisterError> {
    if !(r > 0.0) {
        return Err(RegisterError::Coincident(r));
    }
    Ok(params.u / r.powi(6))
}

/// Window of ancilla detunings for which the antiferromagnetic states of a
/// four-atom chain at spacing `s` are its ground states:
/// `((1/2⁶ − 1/3⁶)·U_s, (1 − 1/2⁶)·U_s)` with `U_s = U/s⁶`.
pub fn detuning_bounds(spacing: f64, params: &PhysicalParams) -> (f64, f64) {
    let u_s = params.u / spacing.powi(6);
    ((1.0 / 64.0 - 1.0 / 729.0) * u_s, (1.0 - 1.0 / 64.0) * u_s)
}

/// The detuning every ancilla of a chain at spacing `s` receives: `U_s / 2`.
pub fn chain_detuning(spacing: f64, params: &PhysicalParams) -> f64 {
    params.u / spacing.powi(6) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomRegister {
    pub original_n: usize,
    pub atoms: Vec<Atom>,
    pub local_detunings: Vec<f64>,
    pub params: PhysicalParams,
    pub chains: Vec<Chain>,
    /// Lattice scale the layout was built at, when known.
    pub scale: Option<u32>,
}

/// Gives every ancilla its chain's `U_s / 2` detuning; originals get none.
pub fn assign_detunings(aug: &AugmentedGraph, params: &PhysicalParams) -> Result<AtomRegister, RegisterError> {
    params.validate()?;
    let mut local = vec![0.0; aug.atoms.len()];
    for chain in &aug.chains {
        let d = chain_detuning(chain.spacing, params);
        for &a in chain.ancillas() {
            local[a] = d;
        }
    }
    let reg = AtomRegister {
        original_n: aug.original_n,
        atoms: aug.atoms.clone(),
        local_detunings: local,
        params: *params,
        chains: aug.chains.clone(),
        scale: None,
    };
    reg.check_detunings()?;
    Ok(reg)
}

impl AtomRegister {
    pub fn n_plus(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_ancillas(&self) -> usize {
        self.atoms.len() - self.original_n
    }

    /// Chain index of every ancilla; `None` for originals.
    pub fn chain_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.atoms.len()];
        for (c, chain) in self.chains.iter().enumerate() {
            for &a in chain.ancillas() {
                out[a] = Some(c);
            }
        }
        out
    }

    /// Total detuning `δ + δ_j` of atom `j`.
    pub fn weight(&self, j: usize) -> f64 {
        self.params.delta_global + self.local_detunings[j]
    }

    pub fn pair_interaction(&self, i: usize, j: usize) -> Result<f64, RegisterError> {
        interaction(distance(self.atoms[i].pos, self.atoms[j].pos), &self.params)
    }

    /// Dense `U / r⁶` matrix with a zero diagonal.
    pub fn interaction_matrix(&self) -> Result<Vec<Vec<f64>>, RegisterError> {
        let n = self.atoms.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let e = self.pair_interaction(i, j)?;
                m[i][j] = e;
                m[j][i] = e;
            }
        }
        Ok(m)
    }

    /// Structural consistency: atom kinds and sources, chain membership,
    /// detuning vector length.
    pub fn check_structure(&self) -> Result<(), RegisterError> {
        let bad = |m: String| Err(RegisterError::Invariant(m));
        if self.local_detunings.len() != self.atoms.len() {
            return bad("one local detuning per atom is required".into());
        }
        if self.original_n > self.atoms.len() {
            return bad("more originals than atoms".into());
        }
        for (i, a) in self.atoms.iter().enumerate() {
            let want = if i < self.original_n { AtomKind::Original } else { AtomKind::Ancilla };
            if a.kind != want {
                return bad(format!("atom {i} should be {want:?}"));
            }
            if a.kind == AtomKind::Original && a.source != i {
                return bad(format!("original atom {i} has source {}", a.source));
            }
            if a.pos.iter().any(|x| !x.is_finite()) {
                return bad(format!("atom {i} has a non-finite position"));
            }
        }
        let mut owner = vec![None; self.atoms.len()];
        for (c, chain) in self.chains.iter().enumerate() {
            let ids = &chain.atom_ids;
            if ids.len() < 2 || ids[0] != chain.edge.0 || ids[ids.len() - 1] != chain.edge.1 {
                return bad(format!("chain {c} does not run between its edge's endpoints"));
            }
            if chain.edge.0 >= self.original_n || chain.edge.1 >= self.original_n {
                return bad(format!("chain {c} has a non-original endpoint"));
            }
            if ids.len() % 2 != 0 {
                return bad(format!("chain {c} has an odd ancilla count"));
            }
            for &a in chain.ancillas() {
                if a < self.original_n || a >= self.atoms.len() {
                    return bad(format!("chain {c} lists atom {a} as an ancilla"));
                }
                if owner[a].replace(c).is_some() {
                    return bad(format!("ancilla {a} belongs to two chains"));
                }
                if self.atoms[a].source != chain.edge_id {
                    return bad(format!("ancilla {a} has source {} but sits on edge {}", self.atoms[a].source, chain.edge_id));
                }
            }
        }
        if let Some(a) = (self.original_n..self.atoms.len()).find(|&a| owner[a].is_none()) {
            return bad(format!("ancilla {a} belongs to no chain"));
        }
        Ok(())
    }

    /// Detuning invariants: zero on originals, uniform per chain and strictly
    /// inside the chain's window.
    pub fn check_detunings(&self) -> Result<(), RegisterError> {
        let bad = |m: String| Err(RegisterError::Invariant(m));
        for i in 0..self.original_n {
            if self.local_detunings[i] != 0.0 {
                return bad(format!("original atom {i} has local detuning {}", self.local_detunings[i]));
            }
        }
        for (c, chain) in self.chains.iter().enumerate() {
            let (lo, hi) = detuning_bounds(chain.spacing, &self.params);
            let anc = chain.ancillas();
            let first = self.local_detunings[anc[0]];
            for &a in anc {
                let d = self.local_detunings[a];
                if d != first {
                    return bad(format!("chain {c} has non-uniform detunings"));
                }
                if !(d > lo && d < hi) {
                    return bad(format!("chain {c} detuning {d} outside ({lo}, {hi})"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RegisterFile::from(self)).expect("register serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RegisterError> {
        let file: RegisterFile = serde_json::from_str(text).map_err(|e| RegisterError::Json(e.to_string()))?;
        let reg = Self::try_from(file)?;
        reg.check_structure()?;
        Ok(reg)
    }

    /// XYZ point list: atom count, a comment line, then `kind x y z` per atom.
    pub fn to_xyz(&self) -> String {
        let mut out = format!("{}\natomembed register U={} delta={} r_b={}\n", self.atoms.len(), self.params.u, self.params.delta_global, self.params.r_b);
        for a in &self.atoms {
            let kind = match a.kind {
                AtomKind::Original => "original",
                AtomKind::Ancilla => "ancilla",
            };
            let p = round_point(a.pos);
            out.push_str(&format!("{kind} {} {} {}\n", p[0], p[1], p[2]));
        }
        out
    }
}

/// Diagonal energy of occupation string `z`, including every pair
/// interaction.
pub fn classical_energy(reg: &AtomRegister, z: &[bool]) -> Result<f64, RegisterError> {
    if reg.params.omega != 0.0 {
        return Err(RegisterError::NonzeroOmega(reg.params.omega));
    }
    if z.len() != reg.atoms.len() {
        return Err(RegisterError::LengthMismatch {
            expected: reg.atoms.len(),
            got: z.len(),
        });
    }
    let on: Vec<usize> = (0..z.len()).filter(|&j| z[j]).collect();
    let mut e = 0.0;
    for (k, &i) in on.iter().enumerate() {
        e -= reg.weight(i);
        for &j in &on[k + 1..] {
            e += reg.pair_interaction(i, j)?;
        }
    }
    Ok(e)
}

/// Atoms within `r_b` of each other are linked.
pub fn blockade_graph(reg: &AtomRegister) -> Graph {
    let n = reg.atoms.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if distance(reg.atoms[i].pos, reg.atoms[j].pos) <= reg.params.r_b {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("blockade pairs are simple")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegisterFile {
    params: PhysicalParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<u32>,
    atoms: Vec<AtomEntry>,
    chains: Vec<ChainEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AtomEntry {
    id: usize,
    pos: Point,
    kind: AtomKind,
    source: usize,
    local_detuning: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChainEntry {
    edge: [usize; 2],
    atom_ids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    waypoints: Vec<Cell>,
}

impl From<&AtomRegister> for RegisterFile {
    fn from(reg: &AtomRegister) -> Self {
        let p = reg.params;
        Self {
            params: PhysicalParams {
                u: round_sig(p.u),
                delta_global: round_sig(p.delta_global),
                r_b: round_sig(p.r_b),
                omega: round_sig(p.omega),
            },
            scale: reg.scale,
            atoms: reg
                .atoms
                .iter()
                .enumerate()
                .map(|(id, a)| AtomEntry {
                    id,
                    pos: round_point(a.pos),
                    kind: a.kind,
                    source: a.source,
                    local_detuning: round_sig(reg.local_detunings[id]),
                })
                .collect(),
            chains: reg
                .chains
                .iter()
                .map(|c| ChainEntry {
                    edge: [c.edge.0, c.edge.1],
                    atom_ids: c.atom_ids.clone(),
                    spacing: Some(round_sig(c.spacing)),
                    waypoints: c.waypoints.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RegisterFile> for AtomRegister {
    type Error = RegisterError;

    fn try_from(file: RegisterFile) -> Result<Self, RegisterError> {
        for (i, a) in file.atoms.iter().enumerate() {
            if a.id != i {
                return Err(RegisterError::Json(format!("atom ids must be 0..N in order; entry {i} has id {}", a.id)));
            }
        }
        let original_n = file.atoms.iter().take_while(|a| a.kind == AtomKind::Original).count();
        let atoms: Vec<Atom> = file
            .atoms
            .iter()
            .map(|a| Atom {
                pos: a.pos,
                kind: a.kind,
                source: a.source,
            })
            .collect();
        let local_detunings = file.atoms.iter().map(|a| a.local_detuning).collect();
        let mut chains = Vec::with_capacity(file.chains.len());
        for c in file.chains {
            let spacing = match c.spacing {
                Some(s) => s,
                None => infer_spacing(&atoms, &c.atom_ids)?,
            };
            let edge_id = c
                .atom_ids
                .get(1)
                .filter(|_| c.atom_ids.len() > 2)
                .map(|&a| atoms.get(a).map_or(usize::MAX, |x| x.source))
                .unwrap_or(usize::MAX);
            chains.push(Chain {
                edge: (c.edge[0], c.edge[1]),
                edge_id,
                atom_ids: c.atom_ids,
                spacing,
                waypoints: c.waypoints,
            });
        }
        Ok(Self {
            original_n,
            atoms,
            local_detunings,
            params: file.params,
            chains,
            scale: file.scale,
        })
    }
}

/// Spacing of a straight chain from its atom positions.
fn infer_spacing(atoms: &[Atom], ids: &[usize]) -> Result<f64, RegisterError> {
    let pos: Vec<Point> = ids
        .iter()
        .map(|&i| atoms.get(i).map(|a| a.pos).ok_or_else(|| RegisterError::Json(format!("chain references missing atom {i}"))))
        .collect::<Result<_, _>>()?;
    let arc: f64 = pos.windows(2).map(|w| distance(w[0], w[1])).sum();
    Ok(arc / (ids.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::router::Chain;

    /// Atoms 1, 3, 4, 2 of the two-ancilla gadget on a line at spacing `s`,
    /// stored as originals 0 (left) and 1 (right) plus ancillas 2, 3.
    pub(crate) fn gadget(s: f64, ancilla_detuning: f64, delta: f64) -> AtomRegister {
        let atoms = vec![
            Atom { pos: [0.0, 0.0, 0.0], kind: AtomKind::Original, source: 0 },
            Atom { pos: [3.0 * s, 0.0, 0.0], kind: AtomKind::Original, source: 1 },
            Atom { pos: [s, 0.0, 0.0], kind: AtomKind::Ancilla, source: 0 },
            Atom { pos: [2.0 * s, 0.0, 0.0], kind: AtomKind::Ancilla, source: 0 },
        ];
        AtomRegister {
            original_n: 2,
            atoms,
            local_detunings: vec![0.0, 0.0, ancilla_detuning, ancilla_detuning],
            params: PhysicalParams { delta_global: delta, ..PhysicalParams::default() },
            chains: vec![Chain { edge: (0, 1), edge_id: 0, atom_ids: vec![0, 2, 3, 1], spacing: s, waypoints: Vec::new() }],
            scale: None,
        }
    }

    /// Occupation in chain order (left original, ancilla, ancilla, right
    /// original) mapped onto atom ids.
    fn chain_bits(s: &str) -> Vec<bool> {
        let b: Vec<bool> = s.chars().map(|c| c == '1').collect();
        vec![b[0], b[3], b[1], b[2]]
    }

    #[test]
    fn interaction_law() {
        let p = PhysicalParams::default();
        assert_eq!(interaction(1.0, &p).unwrap(), 1.0);
        assert_eq!(interaction(2.0, &p).unwrap(), 1.0 / 64.0);
        assert_eq!(interaction(3.0, &p).unwrap(), 1.0 / 729.0);
        assert!(matches!(interaction(0.0, &p), Err(RegisterError::Coincident(_))));
    }

    #[test]
    fn detuning_window() {
        let p = PhysicalParams::default();
        let (lo, hi) = detuning_bounds(1.0, &p);
        assert!((lo - 0.014_253_0).abs() < 1e-6);
        assert_eq!(hi, 0.984375);
        assert!(lo < 0.5 && 0.5 < hi);
        let (lo8, hi8) = detuning_bounds(0.8, &p);
        let f = 1.0 / 0.8f64.powi(6);
        assert!((f - 3.814_697).abs() < 1e-6);
        assert!((lo8 - lo * f).abs() < 1e-12 && (hi8 - hi * f).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::default().validate().is_ok());
        let bad_rb = PhysicalParams { r_b: 1.5, ..PhysicalParams::default() };
        assert!(bad_rb.validate().is_err());
        let bad_delta = PhysicalParams { delta_global: 1.0, ..PhysicalParams::default() };
        assert!(bad_delta.validate().is_err());
    }

    #[test]
    fn gadget_energies_match_closed_forms() {
        let d = 0.2;
        let di = 0.5;
        let reg = gadget(1.0, di, d);
        let e = |s: &str| classical_energy(&reg, &chain_bits(s)).unwrap();
        assert_eq!(e("0000"), 0.0);
        assert!((e("1001") - (-2.0 * d + 1.0 / 729.0)).abs() < 1e-15);
        assert!((e("0110") - (-2.0 * (d + di) + 1.0)).abs() < 1e-15);
        assert!((e("1010") - (-2.0 * d - di + 1.0 / 64.0)).abs() < 1e-15);
        assert!(e("1010") < e("1001"));
        assert!(e("1010") < e("0110"));
    }

    #[test]
    fn energy_rejects_bad_input() {
        let mut reg = gadget(1.0, 0.5, 0.2);
        assert!(matches!(classical_energy(&reg, &[true]), Err(RegisterError::LengthMismatch { .. })));
        reg.params.omega = 1.0;
        assert!(matches!(classical_energy(&reg, &[false; 4]), Err(RegisterError::NonzeroOmega(_))));
    }

    #[test]
    fn detuning_is_linear_in_each_ancilla() {
        let reg = gadget(1.0, 0.5, 0.2);
        let mut bumped = reg.clone();
        bumped.local_detunings[2] += 0.125;
        for m in 0u32..16 {
            let z: Vec<bool> = (0..4).map(|k| m >> k & 1 == 1).collect();
            let diff = classical_energy(&bumped, &z).unwrap() - classical_energy(&reg, &z).unwrap();
            let want = if z[2] { -0.125 } else { 0.0 };
            assert!((diff - want).abs() < 1e-12);
        }
    }

    #[test]
    fn blockade_of_chains() {
        let reg = gadget(1.0, 0.5, 0.2);
        assert_eq!(blockade_graph(&reg).edges(), &[(0, 2), (1, 3), (2, 3)]);
        let even = gadget(0.8, 1.9, 0.2);
        assert_eq!(blockade_graph(&even).edges(), &[(0, 2), (1, 3), (2, 3)]);

        // A lattice bend: the two atoms flanking the corner are √2 apart.
        let mut bend = gadget(1.0, 0.5, 0.2);
        bend.atoms[3].pos = [1.0, 1.0, 0.0];
        bend.atoms[1].pos = [1.0, 2.0, 0.0];
        let g = blockade_graph(&bend);
        assert!(!g.has_edge(0, 3));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn json_round_trip() {
        let reg = gadget(1.0, 0.5, 0.2);
        let text = reg.to_json();
        let back = AtomRegister::from_json(&text).unwrap();
        assert_eq!(back, reg);
        assert!(text.contains("\"U\": 1.0"));
        assert!(text.contains("\"kind\": \"ancilla\""));
    }

    #[test]
    fn xyz_lists_every_atom() {
        let xyz = gadget(0.8, 1.9, 0.2).to_xyz();
        let lines: Vec<&str> = xyz.lines().collect();
        assert_eq!(lines[0], "4");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[4], "ancilla 0.8 0 0");
    }

    #[test]
    fn detuning_invariants_are_checked() {
        let mut reg = gadget(1.0, 0.5, 0.2);
        assert!(reg.check_detunings().is_ok());
        reg.local_detunings[2] = 0.0;
        assert!(reg.check_detunings().is_err());
        reg.local_detunings = vec![0.1, 0.0, 0.5, 0.5];
        assert!(reg.check_detunings().is_err());
    }
}
