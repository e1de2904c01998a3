pub mod error;
pub mod geom;
pub mod gf;
pub mod mpoly;
pub mod qsim;
pub mod retrieve;
pub mod ldt;
pub mod qpcp;
pub mod experiment;
pub mod stats;

pub use error::{Error, Result};
pub use gf::{Fe, Field, FieldParams};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentKind, TrialReport};
pub use geom::{AffineSubspace, Line, LinearMap, Point};
pub use ldt::{LineOracle, ScoreTable};
pub use mpoly::{DataTable, LdeParams, MultiPoly, UniPoly};
pub use qpcp::{GapInstance, ProofBlocks, VerdictReport};
pub use qsim::QuantumState;
pub use retrieve::{MerlinStrategy, Query, Verdict, VerdictDistribution};
