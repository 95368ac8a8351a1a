//! Linear parameterization of the follower subsystem and its flow graph.
//!
//! `A(w) = Σ_k c_k w_k r1_k` and `B(w) = Σ_k c_k w_k r2_k`, one triple per
//! weight symbol. For a consensus network each triple comes from one edge of
//! the communication topology.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::digraph::Digraph;
use crate::graph_model::CommunicationTopology;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("triple {index}: expected lengths ({n}, {n}, {m}), found ({c}, {r1}, {r2})")]
    TripleShape {
        index: usize,
        n: usize,
        m: usize,
        c: usize,
        r1: usize,
        r2: usize,
    },
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("weight w{0} is zero")]
    ZeroWeight(usize),
    #[error("weight index {index} outside 0..{sigma}")]
    WeightOutOfRange { index: usize, sigma: usize },
}

/// One weight symbol: column vector `c`, row vectors `r1` (followers) and
/// `r2` (leaders).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub c: Vec<i64>,
    pub r1: Vec<i64>,
    pub r2: Vec<i64>,
}

impl Triple {
    /// `[r1 | r2]`.
    pub fn row(&self) -> Vec<i64> {
        self.r1.iter().chain(&self.r2).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearParameterization {
    n: usize,
    m: usize,
    triples: Vec<Triple>,
    follower_nodes: Vec<usize>,
    leader_nodes: Vec<usize>,
}

impl LinearParameterization {
    /// Wraps arbitrary triples, e.g. a system not generated by a topology.
    /// State columns are labelled `1..=n`, inputs `n+1..=n+m`.
    pub fn from_triples(n: usize, m: usize, triples: Vec<Triple>) -> Result<Self, ParamError> {
        for (index, t) in triples.iter().enumerate() {
            if t.c.len() != n || t.r1.len() != n || t.r2.len() != m {
                return Err(ParamError::TripleShape {
                    index,
                    n,
                    m,
                    c: t.c.len(),
                    r1: t.r1.len(),
                    r2: t.r2.len(),
                });
            }
        }
        Ok(Self {
            n,
            m,
            triples,
            follower_nodes: (1..=n).collect(),
            leader_nodes: (n + 1..=n + m).collect(),
        })
    }

    /// Follower count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Leader (input) count.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Node id of each follower column.
    pub fn follower_nodes(&self) -> &[usize] {
        &self.follower_nodes
    }

    /// Node id of each leader column.
    pub fn leader_nodes(&self) -> &[usize] {
        &self.leader_nodes
    }

    pub fn follower_index(&self) -> BTreeMap<usize, usize> {
        self.follower_nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    pub fn leader_index(&self) -> BTreeMap<usize, usize> {
        self.leader_nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    /// `C_q`: the `c_k` as columns (n × σ).
    pub fn c_matrix(&self) -> Matrix<i64> {
        Matrix::from_fn(self.n, self.sigma(), |i, k| self.triples[k].c[i])
    }

    /// `R_q`: the `[r1_k | r2_k]` as rows (σ × (n+m)).
    pub fn r_matrix(&self) -> Matrix<i64> {
        Matrix::from_fn(self.sigma(), self.n + self.m, |k, j| {
            if j < self.n {
                self.triples[k].r1[j]
            } else {
                self.triples[k].r2[j - self.n]
            }
        })
    }
}

/// Builds the triples of the follower subsystem `ẋ = -L_ff x + B u`.
///
/// Follower-follower edge between columns `i < j`: `c = -e_i + e_j`,
/// `r1 = e_i - e_j`. Leader-follower edge with follower column `i` and leader
/// column `p`: `c = e_i`, `r1 = -e_i`, `r2 = e_p`.
pub fn build_parameterization(topology: &CommunicationTopology) -> LinearParameterization {
    let follower_nodes = topology.followers();
    let leader_nodes: Vec<usize> = topology.leaders().iter().copied().collect();
    let (n, m) = (follower_nodes.len(), leader_nodes.len());
    let fcol: BTreeMap<usize, usize> = follower_nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let lcol: BTreeMap<usize, usize> = leader_nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let triples = topology
        .edges()
        .iter()
        .map(|&(a, b)| {
            let mut t = Triple {
                c: vec![0; n],
                r1: vec![0; n],
                r2: vec![0; m],
            };
            match (fcol.get(&a), fcol.get(&b)) {
                (Some(&i), Some(&j)) => {
                    let (i, j) = (i.min(j), i.max(j));
                    t.c[i] = -1;
                    t.c[j] = 1;
                    t.r1[i] = 1;
                    t.r1[j] = -1;
                }
                (Some(&i), None) | (None, Some(&i)) => {
                    let leader = if fcol.contains_key(&a) { b } else { a };
                    t.c[i] = 1;
                    t.r1[i] = -1;
                    t.r2[lcol[&leader]] = 1;
                }
                (None, None) => unreachable!("leader-leader edges are rejected by validation"),
            }
            t
        })
        .collect();

    LinearParameterization {
        n,
        m,
        triples,
        follower_nodes,
        leader_nodes,
    }
}

/// Nonzero weight vector `w = (w_1, …, w_σ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment<T> {
    values: Vec<T>,
}

impl<T: Scalar> WeightAssignment<T> {
    pub fn new(values: Vec<T>) -> Result<Self, ParamError> {
        if let Some(k) = values.iter().position(|w| w.is_zero()) {
            return Err(ParamError::ZeroWeight(k + 1));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Result<WeightAssignment<U>, ParamError> {
        WeightAssignment::new(self.values.iter().map(f).collect())
    }
}

/// `A(w)` (n × n) and `B(w)` (n × m).
pub fn assemble_matrices<T: Scalar>(
    param: &LinearParameterization,
    w: &WeightAssignment<T>,
) -> Result<(Matrix<T>, Matrix<T>), ParamError> {
    if w.len() != param.sigma() {
        return Err(ParamError::WeightCount {
            expected: param.sigma(),
            found: w.len(),
        });
    }
    let (n, m) = (param.n(), param.m());
    let mut a = Matrix::<T>::zeros(n, n);
    let mut b = Matrix::<T>::zeros(n, m);
    for (t, wk) in param.triples().iter().zip(w.values()) {
        for (i, &ci) in t.c.iter().enumerate().filter(|(_, c)| **c != 0) {
            let cw = T::from_int(ci) * wk.clone();
            for (j, &r) in t.r1.iter().enumerate().filter(|(_, r)| **r != 0) {
                a[(i, j)] = a[(i, j)].clone() + cw.clone() * T::from_int(r);
            }
            for (j, &r) in t.r2.iter().enumerate().filter(|(_, r)| **r != 0) {
                b[(i, j)] = b[(i, j)].clone() + cw.clone() * T::from_int(r);
            }
        }
    }
    Ok((a, b))
}

/// Flow-graph edge `v_from → v_to` contributed by weight `weight` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub weight: usize,
}

/// Digraph on `n + m` vertices; `edge (v_j → v_i, k)` whenever weight `k`
/// enters entry `(i, j)` of `[A | B]`. Inputs are vertices `n..n+m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    pub n: usize,
    pub m: usize,
    pub edges: BTreeSet<FlowEdge>,
}

impl FlowGraph {
    pub fn vertex_count(&self) -> usize {
        self.n + self.m
    }

    pub fn input_vertices(&self) -> BTreeSet<usize> {
        (self.n..self.n + self.m).collect()
    }

    /// Collapses parallel edges of different weights.
    pub fn to_digraph(&self) -> Digraph {
        Digraph::from_edges(self.vertex_count(), self.edges.iter().map(|e| (e.from, e.to)))
    }
}

pub fn flow_graph(param: &LinearParameterization) -> FlowGraph {
    let n = param.n();
    let mut edges = BTreeSet::new();
    for (k, t) in param.triples().iter().enumerate() {
        let tails: Vec<usize> = t
            .row()
            .iter()
            .enumerate()
            .filter(|(_, r)| **r != 0)
            .map(|(j, _)| j)
            .collect();
        for (i, _) in t.c.iter().enumerate().filter(|(_, c)| **c != 0) {
            for &j in &tails {
                edges.insert(FlowEdge {
                    from: j,
                    to: i,
                    weight: k,
                });
            }
        }
    }
    FlowGraph {
        n,
        m: param.m(),
        edges,
    }
}
