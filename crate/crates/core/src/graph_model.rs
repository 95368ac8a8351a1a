//! Communication topologies: parsing, validation and connectivity.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! nodes 4
//! leaders 4
//! edge 1 4
//! edge 1 2
//! edge 1 3
//! ```
//!
//! Node ids are 1-based. The k-th `edge` line carries weight symbol `w_k`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// Validation failures. Node ids in the messages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("node count must be positive")]
    NoNodes,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("edge {{{0}, {1}}} joins two leaders")]
    LeaderLeaderEdge(usize, usize),
    #[error("node {node} is outside 1..={count}")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("leader {0} listed more than once")]
    DuplicateLeader(usize),
    #[error("no leaders declared")]
    NoLeaders,
    #[error("every node is a leader; at least one follower is required")]
    AllLeaders,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    Invalid(TopologyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {}", match kind { ParseErrorKind::Syntax(m) => m.clone(), ParseErrorKind::Invalid(e) => e.to_string() })]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        Self {
            line,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn invalid(line: usize, err: TopologyError) -> Self {
        Self {
            line,
            kind: ParseErrorKind::Invalid(err),
        }
    }
}

/// Undirected communication graph with a distinguished leader set.
///
/// Edges are stored as `(min, max)` pairs in weight order: `edges()[k]`
/// carries weight symbol `w_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicationTopology {
    node_count: usize,
    leaders: BTreeSet<usize>,
    edges: Vec<(usize, usize)>,
}

impl CommunicationTopology {
    /// Validates and builds a topology. Ids are 1-based; edge order fixes the
    /// weight numbering.
    pub fn new(
        node_count: usize,
        leaders: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        let mut b = Builder::new(node_count)?;
        for l in leaders {
            b.leader(l)?;
        }
        b.finish_leaders()?;
        for (i, j) in edges {
            b.edge(i, j)?;
        }
        Ok(b.build())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn leaders(&self) -> &BTreeSet<usize> {
        &self.leaders
    }

    pub fn leader_count(&self) -> usize {
        self.leaders.len()
    }

    pub fn is_leader(&self, node: usize) -> bool {
        self.leaders.contains(&node)
    }

    /// Follower ids in ascending order.
    pub fn followers(&self) -> Vec<usize> {
        (1..=self.node_count).filter(|v| !self.is_leader(*v)).collect()
    }

    pub fn follower_count(&self) -> usize {
        self.node_count - self.leaders.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of weight symbols (σ).
    pub fn sigma(&self) -> usize {
        self.edges.len()
    }

    /// 0-based weight index of edge `{i, j}`.
    pub fn weight_of(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.iter().position(|&e| e == key)
    }

    /// Canonical text form; `parse_topology(&t.render()) == Ok(t)`.
    pub fn render(&self) -> String {
        let mut out = format!("nodes {}\nleaders", self.node_count);
        for l in &self.leaders {
            out.push_str(&format!(" {l}"));
        }
        out.push('\n');
        for (i, j) in &self.edges {
            out.push_str(&format!("edge {i} {j}\n"));
        }
        out
    }

    /// Connected components sorted by smallest member.
    pub fn connected_components(&self) -> ComponentPartition {
        let mut uf = UnionFind::new(self.node_count);
        for &(i, j) in &self.edges {
            uf.union(i - 1, j - 1);
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.node_count];
        for v in 0..self.node_count {
            groups[uf.find(v)].push(v + 1);
        }
        let mut components: Vec<BTreeSet<usize>> = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|g| g.into_iter().collect())
            .collect();
        components.sort_by_key(|c| *c.iter().next().unwrap());
        ComponentPartition { components }
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// Every connected component contains at least one leader.
    pub fn is_leader_follower_connected(&self) -> bool {
        self.connected_components()
            .components
            .iter()
            .all(|c| c.iter().any(|v| self.is_leader(*v)))
    }
}

impl fmt::Display for CommunicationTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for CommunicationTopology {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_topology(s)
    }
}

/// Disjoint node sets covering `1..=N`; two nodes share a set iff they are
/// joined by a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub components: Vec<BTreeSet<usize>>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, node: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&node))
    }
}

pub fn parse_topology(text: &str) -> Result<CommunicationTopology, ParseError> {
    let mut builder: Option<Builder> = None;
    let mut leaders_seen = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap();
        let args: Vec<usize> = words
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|_| ParseError::syntax(line, format!("expected a non-negative integer, found `{w}`")))
            })
            .collect::<Result<_, _>>()?;
        match keyword {
            "nodes" => {
                if builder.is_some() {
                    return Err(ParseError::syntax(line, "`nodes` declared twice"));
                }
                let [n] = args[..] else {
                    return Err(ParseError::syntax(line, "`nodes` takes exactly one count"));
                };
                builder = Some(Builder::new(n).map_err(|e| ParseError::invalid(line, e))?);
            }
            "leaders" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| ParseError::syntax(line, "`leaders` before `nodes`"))?;
                if leaders_seen {
                    return Err(ParseError::syntax(line, "`leaders` declared twice"));
                }
                leaders_seen = true;
                for id in args {
                    b.leader(id).map_err(|e| ParseError::invalid(line, e))?;
                }
                b.finish_leaders().map_err(|e| ParseError::invalid(line, e))?;
            }
            "edge" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| ParseError::syntax(line, "`edge` before `nodes`"))?;
                if !leaders_seen {
                    return Err(ParseError::syntax(line, "`edge` before `leaders`"));
                }
                let [i, j] = args[..] else {
                    return Err(ParseError::syntax(line, "`edge` takes exactly two node ids"));
                };
                b.edge(i, j).map_err(|e| ParseError::invalid(line, e))?;
            }
            other => {
                return Err(ParseError::syntax(line, format!("unknown directive `{other}`")));
            }
        }
    }
    let eof = last_line + 1;
    let b = builder.ok_or_else(|| ParseError::syntax(eof, "missing `nodes` declaration"))?;
    if !leaders_seen {
        return Err(ParseError::syntax(eof, "missing `leaders` declaration"));
    }
    Ok(b.build())
}

struct Builder {
    node_count: usize,
    leaders: BTreeSet<usize>,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl Builder {
    fn new(node_count: usize) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::NoNodes);
        }
        Ok(Self {
            node_count,
            leaders: BTreeSet::new(),
            edges: Vec::new(),
            seen: HashSet::new(),
        })
    }

    fn check_node(&self, node: usize) -> Result<(), TopologyError> {
        if node == 0 || node > self.node_count {
            return Err(TopologyError::NodeOutOfRange {
                node,
                count: self.node_count,
            });
        }
        Ok(())
    }

    fn leader(&mut self, id: usize) -> Result<(), TopologyError> {
        self.check_node(id)?;
        if !self.leaders.insert(id) {
            return Err(TopologyError::DuplicateLeader(id));
        }
        Ok(())
    }

    fn finish_leaders(&self) -> Result<(), TopologyError> {
        if self.leaders.is_empty() {
            return Err(TopologyError::NoLeaders);
        }
        if self.leaders.len() >= self.node_count {
            return Err(TopologyError::AllLeaders);
        }
        Ok(())
    }

    fn edge(&mut self, i: usize, j: usize) -> Result<(), TopologyError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(TopologyError::SelfLoop(i));
        }
        let key = (i.min(j), i.max(j));
        if self.leaders.contains(&i) && self.leaders.contains(&j) {
            return Err(TopologyError::LeaderLeaderEdge(key.0, key.1));
        }
        if !self.seen.insert(key) {
            return Err(TopologyError::DuplicateEdge(key.0, key.1));
        }
        self.edges.push(key);
        Ok(())
    }

    fn build(self) -> CommunicationTopology {
        CommunicationTopology {
            node_count: self.node_count,
            leaders: self.leaders,
            edges: self.edges,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so representatives are stable
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
