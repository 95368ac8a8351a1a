//! Graphviz DOT rendering. Output is byte-stable: vertices in index order,
//! edges sorted by (from, to, weight).

use std::fmt::Write as _;

use crate::graph_model::CommunicationTopology;
use crate::parameterization::FlowGraph;
use crate::structural_analysis::{LineGraph, QuotientGraph, TransferGraph, TransferMatrix};

const INPUT_SHAPE: &str = "box";

pub fn topology_dot(t: &CommunicationTopology) -> String {
    let mut out = String::from("graph topology {\n");
    for v in 1..=t.node_count() {
        if t.is_leader(v) {
            writeln!(out, "  v{v} [shape={INPUT_SHAPE}];").unwrap();
        } else {
            writeln!(out, "  v{v};").unwrap();
        }
    }
    for (k, (i, j)) in t.edges().iter().enumerate() {
        writeln!(out, "  v{i} -- v{j} [label=\"w{}\"];", k + 1).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn flow_dot(fg: &FlowGraph) -> String {
    let mut out = String::from("digraph flow {\n");
    for v in 0..fg.vertex_count() {
        if v >= fg.n {
            writeln!(out, "  v{} [shape={INPUT_SHAPE}];", v + 1).unwrap();
        } else {
            writeln!(out, "  v{};", v + 1).unwrap();
        }
    }
    for e in &fg.edges {
        writeln!(out, "  v{} -> v{} [label=\"w{}\"];", e.from + 1, e.to + 1, e.weight + 1).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Edge labels carry the nonzero entry `T[i][j]` of the edge `γ_j → γ_i`.
pub fn transfer_dot(tm: &TransferMatrix, tg: &TransferGraph) -> String {
    let mut out = String::from("digraph transfer {\n");
    for v in 0..=tg.sigma {
        if v == tg.input_vertex() {
            writeln!(out, "  g{} [label=\"γ{}\", shape={INPUT_SHAPE}];", v + 1, v + 1).unwrap();
        } else {
            writeln!(out, "  g{} [label=\"γ{}\"];", v + 1, v + 1).unwrap();
        }
    }
    for (from, to) in tg.graph.edges() {
        let value = tm.entries[(to, from)];
        writeln!(out, "  g{} -> g{} [label=\"{value}\"];", from + 1, to + 1).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Vertices are named `e<i>_<j>_<k>` for flow edge `v_i → v_j` of weight `w_k`.
pub fn line_dot(lg: &LineGraph) -> String {
    let name = |idx: usize| {
        let e = lg.vertices[idx];
        format!("e{}_{}_{}", e.from + 1, e.to + 1, e.weight + 1)
    };
    let mut out = String::from("digraph line {\n");
    for idx in 0..lg.vertices.len() {
        writeln!(out, "  {};", name(idx)).unwrap();
    }
    for &(a, b) in &lg.edges {
        writeln!(out, "  {} -> {};", name(a), name(b)).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn quotient_dot(q: &QuotientGraph) -> String {
    let mut out = String::from("digraph quotient {\n");
    for k in 0..q.sigma {
        writeln!(out, "  h{} [label=\"H{}\"];", k + 1, k + 1).unwrap();
    }
    for &(a, b) in &q.edges {
        writeln!(out, "  h{} -> h{};", a + 1, b + 1).unwrap();
    }
    out.push_str("}\n");
    out
}
