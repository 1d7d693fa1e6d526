//! Quantum metrics on finite-dimensional noncommutative spaces.
//!
//! A quantum metric on `A = M_{n_1} ⊕ … ⊕ M_{n_K}` is an element `ρ ∈ A⊗A`
//! playing the role of a distance function. This crate verifies the axioms
//! such an element must satisfy, builds metrics from classical ones and from
//! direct sums and tensor products, evaluates the induced Lipschitz seminorm
//! and Monge–Kantorovich distance, and searches numerically for new metrics.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod axioms;
pub mod construct;
pub mod exchange;
pub mod linalg;
pub mod lipschitz;
pub mod nogo;
pub mod search;
pub mod structure;

pub use algebra::{AlgebraElement, AlgebraError, AlgebraShape, BiElement, Element, TriElement};
pub use axioms::{Axiom, AxiomRecord, AxiomReport, MetricCandidate, Mode, StrictFloor, ToleranceConfig};
pub use construct::{ConstructError, FiniteMetricSpace};
pub use lipschitz::{LipschitzContext, MkDistance, PureState, State};
pub use search::{feasibility_search, SearchConfig, SearchOutcome, SearchStatus};
