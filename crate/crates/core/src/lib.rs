//! Combinatorics of nonpositively curved cube complexes: hyperplane
//! arithmetic on CAT(0) windows, gates and bridges, quasiline invariants,
//! and windowed computations over graphs of complexes.

pub mod ball;
pub mod bits;
pub mod canon;
pub mod cat0;
pub mod complex;
pub mod error;
pub mod fixtures;
pub mod gates;
pub mod gog;
pub mod hyperplane;
pub mod ids;
pub mod maps;
pub mod quasiline;
pub mod tree;

pub use ball::{deck_search, develop_ball, translation_length, Ball, Deck};
pub use cat0::{cat0_witness, Cat0, Cat0Witness, ConvexSet};
pub use complex::{ComplexSpec, CubeComplex, SquareSpec};
pub use error::{Error, Result};
pub use gog::{total_space, AttachmentSpec, Gog, GogEdge, GogSpec, GogVertex, GraphSpec};
pub use hyperplane::{check_special, Hyperplanes, SpecialReport};
pub use maps::{check_local_isometry, CellMap, MapSpec};
pub use quasiline::{
    check_crossing_propagation, check_overlap_bounds, check_separation, commensurate,
    BlockCheck, Classification, Commensuration, ConstantSuite, FellowTravel, HyperplaneClass,
    Kind, Orbit, Quasiline, DEFAULT_MIN_PERIOD,
};
pub use tree::{
    check_cyclonormal, stature_probe, Chamber, CycloEntry, CycloMode, CycloReport, Elevation,
    LabeledSet, PathGate, PathStabilizer, StabOptions, StatureBudget, StatureReport, Strip,
    TreePath, TreeWindow, TripleOutcome, Verdict,
};
