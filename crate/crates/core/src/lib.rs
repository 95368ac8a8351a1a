//! Structural controllability of leader-follower consensus networks.
//!
//! A [`CommunicationTopology`] is an undirected graph with a distinguished
//! set of leaders. Followers run the consensus law; leaders are integrators
//! driven by external commands. Three independent routes decide whether the
//! follower subsystem is structurally controllable:
//!
//! * [`structural_analysis::theorem_decision`]: connectivity (one leader) or
//!   leader-follower connectivity (several leaders);
//! * [`structural_analysis::certificate_decision`]: the min-rank condition over
//!   the linear parameterization plus a spanning tree of the transfer graph;
//! * [`numeric_oracle::oracle_decide`]: exact Kalman rank at random integer weights.
//!
//! [`dynamics`] simulates the network and computes minimum-energy steering
//! plans. The `netctrl` binary wraps everything in a CLI (see [`cli`]).
//!
//! Indexing: node ids are 1-based labels as in the topology file. Matrix rows
//! and columns, weight indices and digraph vertices are 0-based; renderers
//! add one when printing `v1`, `w1`, `γ1`.

pub mod cli;
pub mod digraph;
pub mod dot;
pub mod dynamics;
pub mod generate;
pub mod graph_model;
pub mod matrix;
pub mod numeric_oracle;
pub mod parameterization;
pub mod scalar;
pub mod structural_analysis;

pub use digraph::{has_spanning_forest_rooted_at, Digraph, SpanningForest};
pub use graph_model::{CommunicationTopology, ComponentPartition, ParseError, TopologyError};
pub use matrix::Matrix;
pub use numeric_oracle::{OracleConfig, OracleResult};
pub use parameterization::{FlowGraph, LinearParameterization, Triple, WeightAssignment};
pub use scalar::{Exact, Scalar};
pub use structural_analysis::{
    CertificateOutcome, Decision, LineGraph, MinRankResult, QuotientGraph, Route, TransferGraph,
    TransferMatrix, Verdict,
};

/// Arbitrary-precision integer used for exact oracle arithmetic.
pub type BigInt = num_bigint::BigInt;
/// Arbitrary-precision rational.
pub type BigRational = num_rational::BigRational;

/// Small-integer matrices: parameterization slices and transfer matrices.
pub type IntMatrix = Matrix<i64>;
/// Exact integer matrices for Kalman rank tests at integer weights.
pub type BigIntMatrix = Matrix<BigInt>;
/// Exact rational matrices.
pub type RationalMatrix = Matrix<BigRational>;
/// Floating-point matrices used by the dynamics module.
pub type RealMatrix = Matrix<f64>;

/// Integer weight vectors, as sampled by the oracle.
pub type IntegerWeights = WeightAssignment<BigInt>;
/// Rational weight vectors.
pub type RationalWeights = WeightAssignment<BigRational>;
/// Physical (floating-point) consensus weights.
pub type RealWeights = WeightAssignment<f64>;
