//! Transfer matrix/graph, line and quotient graphs, the min-rank certificate
//! and the three verdict routes.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digraph::{has_spanning_forest_rooted_at, Digraph, SpanningForest};
use crate::graph_model::{CommunicationTopology, ComponentPartition};
use crate::matrix::Matrix;
use crate::numeric_oracle::OracleResult;
use crate::parameterization::{flow_graph, FlowEdge, FlowGraph, LinearParameterization};

/// Default bound on σ for the exhaustive subset sweep.
pub const DEFAULT_RANK_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("weight index {index} outside 0..{sigma}")]
pub struct SubsetError {
    pub index: usize,
    pub sigma: usize,
}

/// σ × (σ+1) matrix with `T[i][j] = r1_i · c_j` and the last column taken
/// from `r2_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    pub entries: Matrix<i64>,
}

impl TransferMatrix {
    pub fn sigma(&self) -> usize {
        self.entries.rows()
    }
}

pub fn transfer_matrix(param: &LinearParameterization) -> TransferMatrix {
    let sigma = param.sigma();
    let t = param.triples();
    let entries = Matrix::from_fn(sigma, sigma + 1, |i, j| {
        if j < sigma {
            t[i].r1.iter().zip(&t[j].c).map(|(r, c)| r * c).sum()
        } else {
            t[i].r2.iter().copied().find(|&x| x != 0).unwrap_or(0)
        }
    });
    TransferMatrix { entries }
}

/// Digraph on γ_1..γ_{σ+1} (vertices `0..=σ`) with `γ_j → γ_i` whenever
/// `T[i][j] ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferGraph {
    pub sigma: usize,
    pub graph: Digraph,
}

impl TransferGraph {
    /// Vertex index of γ_{σ+1}.
    pub fn input_vertex(&self) -> usize {
        self.sigma
    }

    /// Edges among γ_1..γ_σ only.
    pub fn induced_without_input(&self) -> BTreeSet<(usize, usize)> {
        self.graph
            .edges()
            .filter(|&(a, b)| a < self.sigma && b < self.sigma)
            .collect()
    }

    /// BFS tree from γ_{σ+1}.
    pub fn spanning_tree(&self) -> SpanningForest {
        has_spanning_forest_rooted_at(&self.graph, &[self.input_vertex()].into())
    }
}

pub fn transfer_graph(tm: &TransferMatrix) -> TransferGraph {
    let sigma = tm.sigma();
    let mut graph = Digraph::new(sigma + 1);
    for i in 0..sigma {
        for j in 0..=sigma {
            if tm.entries[(i, j)] != 0 {
                graph.add_edge(j, i);
            }
        }
    }
    TransferGraph { sigma, graph }
}

/// One vertex per flow-graph edge; `(i→j, k) → (j→j', k')` whenever the head
/// of the first is the tail of the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineGraph {
    pub vertices: Vec<FlowEdge>,
    pub edges: BTreeSet<(usize, usize)>,
}

pub fn line_graph(fg: &FlowGraph) -> LineGraph {
    let vertices: Vec<FlowEdge> = fg.edges.iter().copied().collect();
    let mut by_tail: Vec<Vec<usize>> = vec![Vec::new(); fg.vertex_count()];
    for (idx, e) in vertices.iter().enumerate() {
        by_tail[e.from].push(idx);
    }
    let mut edges = BTreeSet::new();
    for (a, e) in vertices.iter().enumerate() {
        for &b in &by_tail[e.to] {
            edges.insert((a, b));
        }
    }
    LineGraph { vertices, edges }
}

/// Line graph collapsed by weight class `H_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub sigma: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

pub fn quotient_graph(lg: &LineGraph, sigma: usize) -> QuotientGraph {
    let edges = lg
        .edges
        .iter()
        .map(|&(a, b)| (lg.vertices[a].weight, lg.vertices[b].weight))
        .inspect(|&(k, k2)| assert!(k < sigma && k2 < sigma, "weight id outside 0..{sigma}"))
        .collect();
    QuotientGraph { sigma, edges }
}

/// `C_s`, `R_s` and the symbols on the diagonal of `W_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSlice {
    /// n × |s|, columns `c_k` for k ∈ s ascending.
    pub c: Matrix<i64>,
    /// |s| × (n+m), rows `[r1_k | r2_k]`.
    pub r: Matrix<i64>,
    /// 0-based weight indices forming `W_s = diag(w_k)`.
    pub symbols: Vec<usize>,
}

impl SubsetSlice {
    pub fn weight_matrix<T: crate::Scalar>(&self, w: &crate::WeightAssignment<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(self.symbols.len(), self.symbols.len());
        for (d, &k) in self.symbols.iter().enumerate() {
            out[(d, d)] = w.values()[k].clone();
        }
        out
    }
}

pub fn slice_subset(param: &LinearParameterization, s: &BTreeSet<usize>) -> Result<SubsetSlice, SubsetError> {
    let sigma = param.sigma();
    if let Some(&index) = s.iter().find(|&&k| k >= sigma) {
        return Err(SubsetError { index, sigma });
    }
    let symbols: Vec<usize> = s.iter().copied().collect();
    Ok(SubsetSlice {
        c: param.c_matrix().select_cols(&symbols),
        r: param.r_matrix().select_rows(&symbols),
        symbols,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinRankResult {
    /// `rank C_s + rank R_{q−s}` at the witness.
    pub value: usize,
    /// Sorted 0-based weight indices.
    pub witness: Vec<usize>,
    /// False when σ exceeded the cap and only forced subsets were tried.
    pub exhaustive: bool,
}

/// Minimises `rank C_s + rank R_{q−s}` over subsets `s` of the weights.
///
/// With σ ≤ cap all 2^σ subsets (including ∅ and q) are swept in parallel;
/// ties go to the lexicographically smallest index list so the result does
/// not depend on scheduling. Otherwise only ∅, q, singletons and
/// co-singletons are tried and the value is an upper bound.
pub fn min_rank_condition(param: &LinearParameterization, cap: usize) -> MinRankResult {
    let sigma = param.sigma();
    let c = param.c_matrix();
    let r = param.r_matrix();
    let eval = |s: Vec<usize>| -> (usize, Vec<usize>) {
        let rest: Vec<usize> = complement(&s, sigma);
        let v = c.select_cols(&s).rank() + r.select_rows(&rest).rank();
        (v, s)
    };
    let better = |a: (usize, Vec<usize>), b: (usize, Vec<usize>)| match a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)) {
        Ordering::Greater => b,
        _ => a,
    };

    let exhaustive = sigma <= cap && sigma < 63;
    let best = if exhaustive {
        (0..1u64 << sigma)
            .into_par_iter()
            .map(|mask| eval((0..sigma).filter(|k| mask >> k & 1 == 1).collect()))
            .reduce_with(better)
    } else {
        let all: Vec<usize> = (0..sigma).collect();
        let mut forced = vec![Vec::new(), all];
        for k in 0..sigma {
            forced.push(vec![k]);
            forced.push(complement(&[k], sigma));
        }
        forced.into_par_iter().map(eval).reduce_with(better)
    };
    let (value, witness) = best.expect("at least the empty subset is evaluated");
    MinRankResult {
        value,
        witness,
        exhaustive,
    }
}

fn complement(s: &[usize], sigma: usize) -> Vec<usize> {
    let mut it = s.iter().peekable();
    (0..sigma)
        .filter(|k| {
            if it.peek() == Some(&k) {
                it.next();
                false
            } else {
                true
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    StructurallyControllable,
    NotStructurallyControllable,
}

impl Decision {
    pub fn from_bool(controllable: bool) -> Self {
        if controllable {
            Self::StructurallyControllable
        } else {
            Self::NotStructurallyControllable
        }
    }

    pub fn is_controllable(self) -> bool {
        self == Self::StructurallyControllable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    TheoremShortcut,
    Certificate,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    Components(ComponentPartition),
    Certificate {
        min_rank: MinRankResult,
        tree: SpanningForest,
    },
    Oracle(OracleResult),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub decision: Decision,
    pub route: Route,
    pub evidence: Evidence,
}

/// Connectivity for one leader, leader-follower connectivity otherwise.
pub fn theorem_decision(topology: &CommunicationTopology) -> Verdict {
    let partition = topology.connected_components();
    let ok = if topology.leader_count() == 1 {
        partition.len() == 1
    } else {
        partition
            .components
            .iter()
            .all(|c| c.iter().any(|v| topology.is_leader(*v)))
    };
    Verdict {
        decision: Decision::from_bool(ok),
        route: Route::TheoremShortcut,
        evidence: Evidence::Components(partition),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateOutcome {
    Decided(Verdict),
    /// Truncated search reached `n` but could not prove the minimum.
    Inconclusive {
        min_rank: MinRankResult,
        tree: SpanningForest,
    },
}

impl CertificateOutcome {
    pub fn verdict(&self) -> Option<&Verdict> {
        match self {
            Self::Decided(v) => Some(v),
            Self::Inconclusive { .. } => None,
        }
    }
}

/// Min-rank condition plus a spanning tree of the transfer graph rooted at
/// γ_{σ+1}.
pub fn certificate_decision(param: &LinearParameterization, cap: usize) -> CertificateOutcome {
    let tree = transfer_graph(&transfer_matrix(param)).spanning_tree();
    let min_rank = min_rank_condition(param, cap);
    let n = param.n();
    // value is an upper bound on the minimum, so value < n is conclusive
    let decision = if !tree.spans || min_rank.value < n {
        Decision::NotStructurallyControllable
    } else if min_rank.exhaustive {
        Decision::StructurallyControllable
    } else {
        return CertificateOutcome::Inconclusive { min_rank, tree };
    };
    CertificateOutcome::Decided(Verdict {
        decision,
        route: Route::Certificate,
        evidence: Evidence::Certificate { min_rank, tree },
    })
}

/// Irreducibility via a spanning forest of the flow graph rooted at the
/// inputs. The second value lists unreachable follower columns.
pub fn is_irreducible(param: &LinearParameterization) -> (bool, BTreeSet<usize>) {
    let fg = flow_graph(param);
    let forest = has_spanning_forest_rooted_at(&fg.to_digraph(), &fg.input_vertices());
    (forest.spans, forest.unreachable)
}

/// Follower order `Q` putting the input-unreachable block first, so that
/// `Q A Qᵀ = [[A11, 0], [A12, A22]]` and `Q B = [0; B2]`. `None` when the
/// pair is irreducible.
pub fn reducing_permutation(param: &LinearParameterization) -> Option<Vec<usize>> {
    let (irreducible, unreachable) = is_irreducible(param);
    if irreducible {
        return None;
    }
    let mut order: Vec<usize> = unreachable.iter().copied().collect();
    order.extend((0..param.n()).filter(|i| !unreachable.contains(i)));
    Some(order)
}

/// Irreducible ⇒ the transfer graph spans from γ_{σ+1}.
pub fn irreducible_implies_tree(param: &LinearParameterization) -> bool {
    !is_irreducible(param).0 || transfer_graph(&transfer_matrix(param)).spanning_tree().spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameterization::{assemble_matrices, build_parameterization, Triple, WeightAssignment};

    fn star() -> LinearParameterization {
        build_parameterization(&CommunicationTopology::new(4, [4], [(1, 4), (1, 2), (1, 3)]).unwrap())
    }

    fn path3() -> LinearParameterization {
        build_parameterization(&CommunicationTopology::new(3, [3], [(1, 2), (2, 3)]).unwrap())
    }

    #[test]
    fn star_transfer_matrix() {
        let t = transfer_matrix(&star());
        assert_eq!(
            t.entries,
            Matrix::from_rows(&[[-1i64, 1, 1, 1], [1, -2, -1, 0], [1, -1, -2, 0]])
        );
    }

    #[test]
    fn path_transfer_matrix_matches_product() {
        let p = path3();
        let t = transfer_matrix(&p);
        // R1 · C computed as a plain matrix product
        let r1 = Matrix::from_fn(p.sigma(), p.n(), |k, j| p.triples()[k].r1[j]);
        let rc = r1.mul(&p.c_matrix()).unwrap();
        for i in 0..p.sigma() {
            for j in 0..p.sigma() {
                assert_eq!(t.entries[(i, j)], rc[(i, j)]);
            }
        }
        assert_eq!(t.entries, Matrix::from_rows(&[[-2i64, -1, 0], [-1, -1, 1]]));
    }

    #[test]
    fn minimal_transfer_graph() {
        let p = build_parameterization(&CommunicationTopology::new(2, [2], [(1, 2)]).unwrap());
        let t = transfer_matrix(&p);
        assert_eq!(t.entries, Matrix::from_rows(&[[-1i64, 1]]));
        let g = transfer_graph(&t);
        assert_eq!(g.graph.edges().collect::<Vec<_>>(), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn diagonal_transfer_graph() {
        let t = TransferMatrix {
            entries: Matrix::from_rows(&[[-1i64, 0, 1], [0, -2, 0]]),
        };
        let g = transfer_graph(&t);
        assert_eq!(g.graph.edges().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 0)]);
        assert!(!g.spanning_tree().spans);
    }

    #[test]
    fn star_transfer_graph_edges() {
        let g = transfer_graph(&transfer_matrix(&star()));
        let edges: BTreeSet<(usize, usize)> = g.graph.edges().collect();
        let expect: BTreeSet<(usize, usize)> =
            [(3, 0), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1), (0, 0), (1, 1), (2, 2)].into();
        assert_eq!(edges, expect);
        assert!(g.spanning_tree().spans);
    }

    #[test]
    fn star_flow_graph_forest() {
        let fg = flow_graph(&star());
        let f = has_spanning_forest_rooted_at(&fg.to_digraph(), &fg.input_vertices());
        assert!(f.spans);
        assert_eq!(f.parent[&0], 3);
        assert_eq!(f.parent[&1], 0);
        assert_eq!(f.parent[&2], 0);
    }

    #[test]
    fn line_graph_chain_and_parallel_edges() {
        let fg = FlowGraph {
            n: 3,
            m: 0,
            edges: [FlowEdge { from: 0, to: 1, weight: 0 }, FlowEdge { from: 1, to: 2, weight: 1 }].into(),
        };
        let lg = line_graph(&fg);
        assert_eq!(lg.vertices.len(), 2);
        assert_eq!(lg.edges, [(0, 1)].into());
        assert_eq!(quotient_graph(&lg, 2).edges, [(0, 1)].into());

        let fg = FlowGraph {
            n: 2,
            m: 0,
            edges: [FlowEdge { from: 0, to: 1, weight: 0 }, FlowEdge { from: 0, to: 1, weight: 1 }].into(),
        };
        let lg = line_graph(&fg);
        assert_eq!(lg.vertices.len(), 2);
        assert!(lg.edges.is_empty());
        assert!(quotient_graph(&lg, 2).edges.is_empty());
    }

    #[test]
    fn coupled_symbol_line_graph() {
        let p = LinearParameterization::from_triples(
            3,
            0,
            vec![
                Triple { c: vec![0, 1, 1], r1: vec![1, 0, 0], r2: vec![] },
                Triple { c: vec![1, 0, 0], r1: vec![1, 0, 1], r2: vec![] },
            ],
        )
        .unwrap();
        let fg = flow_graph(&p);
        let lg = line_graph(&fg);
        assert_eq!(lg.vertices.len(), 4);
        // enumerate every ordered pair of flow edges
        let mut expect = BTreeSet::new();
        for (a, x) in lg.vertices.iter().enumerate() {
            for (b, y) in lg.vertices.iter().enumerate() {
                if x.to == y.from {
                    expect.insert((a, b));
                }
            }
        }
        assert_eq!(lg.edges, expect);
        assert_eq!(lg.edges.len(), 7);
    }

    #[test]
    fn star_quotient_matches_transfer() {
        let p = star();
        let q = quotient_graph(&line_graph(&flow_graph(&p)), p.sigma());
        let t = transfer_graph(&transfer_matrix(&p));
        assert_eq!(q.edges, t.induced_without_input());
        assert_eq!(q.edges.len(), 9);
    }

    #[test]
    fn star_slices() {
        let p = star();
        let s = slice_subset(&p, &[0, 1, 2].into()).unwrap();
        assert_eq!(s.c, Matrix::from_rows(&[[1i64, -1, -1], [0, 1, 0], [0, 0, 1]]));
        assert_eq!(s.r, Matrix::from_rows(&[[-1i64, 0, 0, 1], [1, -1, 0, 0], [1, 0, -1, 0]]));
        let w = WeightAssignment::new(vec![2i64, 3, 5]).unwrap();
        assert_eq!(s.weight_matrix(&w), Matrix::from_rows(&[[2i64, 0, 0], [0, 3, 0], [0, 0, 5]]));

        let s = slice_subset(&p, &[0].into()).unwrap();
        assert_eq!(s.c, Matrix::from_rows(&[[1i64], [0], [0]]));
        assert_eq!(s.r, Matrix::from_rows(&[[-1i64, 0, 0, 1]]));
        let rest = slice_subset(&p, &[1, 2].into()).unwrap();
        assert_eq!(rest.c, Matrix::from_rows(&[[-1i64, -1], [1, 0], [0, 1]]));
        assert_eq!(rest.r, Matrix::from_rows(&[[1i64, -1, 0, 0], [1, 0, -1, 0]]));

        let e = slice_subset(&p, &BTreeSet::new()).unwrap();
        assert_eq!(e.c.shape(), (3, 0));
        assert_eq!(e.r.shape(), (0, 4));
        assert_eq!(slice_subset(&p, &[3].into()), Err(SubsetError { index: 3, sigma: 3 }));
    }

    // brute force over explicit subsets, independent of the parallel sweep
    fn brute_min(p: &LinearParameterization) -> usize {
        (0..1u32 << p.sigma())
            .map(|mask| {
                let s: BTreeSet<usize> = (0..p.sigma()).filter(|k| mask >> k & 1 == 1).collect();
                let q: BTreeSet<usize> = (0..p.sigma()).filter(|k| !s.contains(k)).collect();
                slice_subset(p, &s).unwrap().c.rank() + slice_subset(p, &q).unwrap().r.rank()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn min_rank_examples() {
        let p = star();
        assert_eq!(brute_min(&p), 3);
        let r = min_rank_condition(&p, DEFAULT_RANK_CAP);
        assert_eq!(r.value, 3);
        assert!(r.exhaustive);
        assert_eq!(r.witness, Vec::<usize>::new());

        let one = build_parameterization(&CommunicationTopology::new(2, [2], [(1, 2)]).unwrap());
        assert_eq!(min_rank_condition(&one, 20).value, 1);

        let split = build_parameterization(&CommunicationTopology::new(4, [4], [(1, 2), (3, 4)]).unwrap());
        assert_eq!(brute_min(&split), 2);
        let r = min_rank_condition(&split, 20);
        assert_eq!(r.value, 2);
        assert_eq!(r.witness, Vec::<usize>::new());
    }

    #[test]
    fn truncated_search() {
        let p = star();
        let r = min_rank_condition(&p, 2);
        assert!(!r.exhaustive);
        assert_eq!(r.value, 3);
        assert!(matches!(certificate_decision(&p, 2), CertificateOutcome::Inconclusive { .. }));

        let split = build_parameterization(&CommunicationTopology::new(4, [4], [(1, 2), (3, 4)]).unwrap());
        let out = certificate_decision(&split, 1);
        assert_eq!(out.verdict().unwrap().decision, Decision::NotStructurallyControllable);
    }

    #[test]
    fn complement_is_sorted_difference() {
        assert_eq!(complement(&[1, 3], 5), vec![0, 2, 4]);
        assert_eq!(complement(&[], 2), vec![0, 1]);
    }

    #[test]
    fn decisions_on_examples() {
        let star = CommunicationTopology::new(4, [4], [(1, 4), (1, 2), (1, 3)]).unwrap();
        assert!(theorem_decision(&star).decision.is_controllable());
        let v = certificate_decision(&build_parameterization(&star), 20);
        assert!(v.verdict().unwrap().decision.is_controllable());

        let multi = CommunicationTopology::new(6, [5, 6], [(1, 2), (2, 5), (3, 4), (4, 6)]).unwrap();
        assert!(theorem_decision(&multi).decision.is_controllable());
        let v = certificate_decision(&build_parameterization(&multi), 20);
        assert!(v.verdict().unwrap().decision.is_controllable());

        let split = CommunicationTopology::new(5, [5], [(1, 2), (3, 4), (1, 5)]).unwrap();
        let v = theorem_decision(&split);
        assert_eq!(v.decision, Decision::NotStructurallyControllable);
        assert_eq!(v.route, Route::TheoremShortcut);
        let c = certificate_decision(&build_parameterization(&split), 20);
        assert_eq!(c.verdict().unwrap().decision, Decision::NotStructurallyControllable);

        let leaderless = CommunicationTopology::new(6, [5, 6], [(1, 5), (2, 6), (3, 4)]).unwrap();
        let c = certificate_decision(&build_parameterization(&leaderless), 20);
        assert_eq!(c.verdict().unwrap().decision, Decision::NotStructurallyControllable);
    }

    #[test]
    fn irreducibility_and_zero_blocks() {
        let star = star();
        assert!(is_irreducible(&star).0);
        assert!(irreducible_implies_tree(&star));
        assert_eq!(reducing_permutation(&star), None);

        let split = build_parameterization(&CommunicationTopology::new(5, [5], [(1, 2), (3, 4), (1, 5)]).unwrap());
        let (ok, unreachable) = is_irreducible(&split);
        assert!(!ok);
        assert_eq!(unreachable, [2, 3].into());
        assert!(irreducible_implies_tree(&split));

        let order = reducing_permutation(&split).unwrap();
        let h = unreachable.len();
        let w = WeightAssignment::new(vec![7i64, 11, 13]).unwrap();
        let (a, b) = assemble_matrices(&split, &w).unwrap();
        let qa = a.select_rows(&order).select_cols(&order);
        let qb = b.select_rows(&order);
        for i in 0..h {
            for j in h..split.n() {
                assert_eq!(qa[(i, j)], 0);
            }
            assert!(qb.row(i).iter().all(|&x| x == 0));
        }
    }
}
