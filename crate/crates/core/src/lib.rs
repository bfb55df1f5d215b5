//! Static mwp-bounds flow analysis for a small imperative language.
//!
//! The analysis assigns to every function a single matrix whose entries are
//! choice polynomials: for each way of resolving the nondeterministic rules
//! of the mwp calculus, the matrix evaluates to a flow matrix over
//! `{0, m, w, p, ∞}`. An `∞` marks a dependency that may grow beyond any
//! polynomial.

pub mod analyzer;
pub mod choice_poly;
pub mod corpus;
pub mod delta_graph;
pub mod error;
pub mod frontend;
pub mod inliner;
pub mod report;
pub mod semiring;

pub use choice_poly::{Assignment, ChoicePolynomial, Delta, Monomial, PolyMatrix, Registry};
pub use delta_graph::DeltaGraph;
pub use error::MwpError;
pub use semiring::{Matrix, Mwp, MwpInf, MwpMatrix, Semiring};
