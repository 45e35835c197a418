//! Fixed sets and fixed points for self-maps of abstract limit spaces.
//!
//! Convergence, Cauchy sequences and contractiveness are supplied as data:
//! a [`limspace::LimOperator`] decides which points a sequence converges to, a
//! [`cauchy::CauchyStructure`] decides which sequences are "Cauchy", and the
//! solvers in [`solver`] run the Picard orbit and certify what they can from a
//! finite prefix. Every infinite-sequence claim is reported as a tri-state
//! [`Verdict`] with a replayable witness.
//!
//! [`oracle`] enumerates small finite spaces exhaustively and cross-checks the
//! solvers against brute force.

pub mod cauchy;
pub mod cli;
pub mod error;
pub mod exec;
pub mod limspace;
pub mod maps;
pub mod oracle;
pub mod seqcore;
pub mod solver;
pub mod spaces;
pub mod table;
pub mod verdict;

pub use error::{Error, MapError, Result};
pub use exec::Execution;
pub use seqcore::{EqRule, Endomap, MapRef, Orbit, Point, SeqView};
pub use spaces::{Comparison, DistanceSpec, PosetSpec, Value};
pub use verdict::{Tolerances, Verdict, Witness};
