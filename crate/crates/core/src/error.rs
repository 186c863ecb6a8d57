//! Crate-wide error type. Every variant is an input or precondition problem;
//! negative verdicts (not NPC, not special, cyclonormality failure, ...) are
//! ordinary return values, never errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // Complex construction.
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("cell {kind} #{index} references a missing {what}")]
    DanglingCell { kind: &'static str, index: usize, what: String },
    #[error("cell {kind} #{index} is a duplicate of an earlier cell")]
    DuplicateCell { kind: &'static str, index: usize },
    #[error("square #{index}: side {side} between `{a}` and `{b}` is ambiguous (parallel edges or loop); list the square with explicit signed edge references")]
    AmbiguousSide { index: usize, side: usize, a: String, b: String },
    #[error("square #{index}: side {side} does not close up with the corners")]
    SideMismatch { index: usize, side: usize },
    #[error("cube #{index}: face {face} matches {found} squares (need exactly one)")]
    CubeFace { index: usize, face: usize, found: usize },
    #[error("malformed input: {0}")]
    Malformed(String),

    // Preconditions.
    #[error("operation requires an NPC-validated complex: {0}")]
    NotNpc(String),
    #[error("operation requires a CAT(0) ambient complex: {0}")]
    NotCat0(String),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set is not convex")]
    NotConvex,
    #[error("combinatorial map does not respect cell structure: {0}")]
    BadMap(String),

    // Development and deck transformations.
    #[error("development exceeds cell budget ({0} cells)")]
    CellBudget(usize),
    #[error("development is incoherent over the base (input not NPC or internal error): {0}")]
    Incoherent(String),
    #[error("seed vertices do not lie over the same base vertex")]
    SeedMismatch,
    #[error("seed does not extend to a deck transformation: {0}")]
    DeckInconsistent(String),
    #[error("automorphism is trivial on its domain")]
    TrivialAutomorphism,

    // Quasilines.
    #[error("window is not invariant under the automorphism")]
    WindowNotInvariant,
    #[error("window realizes only {got} translates (need at least {need})")]
    PeriodTooShort { got: u32, need: u32 },
    #[error("quasiline analysis needs radius about {0} (window too small: {1})")]
    WindowTooSmall(u32, String),
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
    #[error("hyperplane trichotomy left {0} orbits undecided; grow the window")]
    Undecided(usize),
    #[error("geodesic invalid: {0}")]
    BadGeodesic(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    // Graphs of complexes and tree windows.
    #[error("graph of complexes malformed: {0}")]
    BadGog(String),
    #[error("attachment of edge `{edge}` ({side} side) is not a local isometry: {why}")]
    NotLocalIsometry { edge: String, side: &'static str, why: String },
    #[error("tree path invalid: {0}")]
    BadPath(String),

    // IO plumbing.
    #[error("io error on `{path}`: {err}")]
    Io { path: String, err: String },
    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
