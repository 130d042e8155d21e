use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("exact MIS refused: {n} vertices exceeds the oracle limit of {limit}")]
    MisLimit { n: usize, limit: usize },
    #[error("penalty weight U = {u} must exceed the maximum degree {max_degree}")]
    PenaltyTooSmall { u: f64, max_degree: usize },
    #[error("assignment has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("grid scale {0} is below the minimum of 3")]
    ScaleTooSmall(u32),
    #[error("layout has {got} positions, graph has {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },
    #[error("layout contains a non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("no lattice path for edge {edge_id} ({u}, {v})")]
    NoPath { edge_id: usize, u: usize, v: usize },
    #[error("path for edge {edge_id} has {steps} steps; at least 2 are required")]
    PathTooShort { edge_id: usize, steps: usize },
    #[error("invalid waypoints for edge {edge_id}: {reason}")]
    InvalidWaypoints { edge_id: usize, reason: String },
    #[error("routes do not cover the edge set: {0}")]
    Coverage(String),
    #[error("atoms {0} and {1} share a position")]
    DuplicateAtom(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegisterError {
    #[error("invalid physical parameters: {0}")]
    Params(String),
    #[error("atoms are coincident (distance {0})")]
    Coincident(f64),
    #[error("bit-string has length {got}, register has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },
    #[error("Rabi frequency must be zero for classical evaluation, got {0}")]
    NonzeroOmega(f64),
    #[error("register invariant violated: {0}")]
    Invariant(String),
    #[error("malformed register JSON: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("register has {atoms} atoms, above the oracle limit of {limit}")]
    AtomLimit { atoms: usize, limit: usize },
    #[error("register has {originals} original atoms, above the limit of {limit}")]
    OriginalLimit { originals: usize, limit: usize },
    #[error("blockade pruning is unsound for atoms {i} and {j} and the register is too large ({atoms} atoms) for exhaustive search")]
    UnsoundPruning { i: usize, j: usize, atoms: usize },
    #[error("blockade graph does not follow the chain structure ({0}) and the register is too large for exhaustive search")]
    Unstructured(String),
    #[error("register and graph disagree: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Register(#[from] RegisterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("maximum degree {0} exceeds 6; orthogonal grid drawings need degree at most 6")]
    DegreeTooHigh(usize),
    #[error("embedding failed after {attempts} scale attempts (last scale {last_scale}): {last_error}")]
    RetriesExhausted {
        attempts: usize,
        last_scale: u32,
        last_error: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Register(#[from] RegisterError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}
