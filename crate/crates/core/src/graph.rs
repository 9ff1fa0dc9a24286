//! Finite directed multigraphs, finite paths, and rotation classes of closed paths.
//!
//! Edge order is the declaration order and never changes; the last declared
//! edge out of a regular vertex is that vertex's *special edge*, which the
//! algebra module's normal form eliminates.

use crate::error::{LpaError, Result};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub src: VertexId,
    pub dst: VertexId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Regular,
    Sink,
}

/// A finite directed multigraph with ordered vertices and edges.
#[derive(Debug)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<EdgeId>>,
    vertex_by_name: BTreeMap<String, VertexId>,
    edge_by_name: BTreeMap<String, EdgeId>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}
impl Eq for Graph {}

impl Graph {
    /// Builds a graph from vertex names and `(edge, src, dst)` triples, in
    /// declaration order.
    pub fn build(
        vertices: Vec<String>,
        edges: Vec<(String, String, String)>,
    ) -> Result<Arc<Graph>> {
        let mut vertex_by_name = BTreeMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if vertex_by_name
                .insert(name.clone(), VertexId(i as u32))
                .is_some()
            {
                return Err(LpaError::DuplicateName(name.clone()));
            }
        }
        let mut edge_by_name = BTreeMap::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        let mut outgoing = vec![Vec::new(); vertices.len()];
        for (i, (name, src, dst)) in edges.into_iter().enumerate() {
            if vertex_by_name.contains_key(&name) {
                return Err(LpaError::DuplicateName(name));
            }
            let src_id = *vertex_by_name
                .get(&src)
                .ok_or_else(|| LpaError::UndeclaredEndpoint {
                    edge: name.clone(),
                    vertex: src.clone(),
                })?;
            let dst_id = *vertex_by_name
                .get(&dst)
                .ok_or_else(|| LpaError::UndeclaredEndpoint {
                    edge: name.clone(),
                    vertex: dst.clone(),
                })?;
            if edge_by_name.insert(name.clone(), EdgeId(i as u32)).is_some() {
                return Err(LpaError::DuplicateName(name));
            }
            outgoing[src_id.0 as usize].push(EdgeId(i as u32));
            edge_list.push(Edge {
                name,
                src: src_id,
                dst: dst_id,
            });
        }
        if vertices.is_empty() {
            return Err(LpaError::EmptyVertexSet);
        }
        Ok(Arc::new(Graph {
            vertices,
            edges: edge_list,
            outgoing,
            vertex_by_name,
            edge_by_name,
        }))
    }

    /// The rose graph R_n: one vertex `v` with loops `e1..en`.
    pub fn rose(n: usize) -> Result<Arc<Graph>> {
        if n < 1 {
            return Err(LpaError::RoseTooSmall(n));
        }
        let edges = (1..=n)
            .map(|i| (format!("e{i}"), "v".to_string(), "v".to_string()))
            .collect();
        Graph::build(vec!["v".to_string()], edges)
    }

    /// Parses the line-oriented graph file format:
    /// `vertex <name>`, `edge <name> <src> <dst>`, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Arc<Graph>> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["vertex", name] if valid_name(name) => vertices.push((*name).to_string()),
                ["edge", name, src, dst] if valid_name(name) => {
                    edges.push(((*name).to_string(), (*src).to_string(), (*dst).to_string()))
                }
                _ => {
                    return Err(LpaError::Script {
                        line: lineno + 1,
                        msg: format!("bad graph declaration `{line}`"),
                    })
                }
            }
        }
        Graph::build(vertices, edges)
    }

    /// Renders back into the file format; `parse(render(g)) == g`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("vertex {v}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                e.name,
                self.vertex_name(e.src),
                self.vertex_name(e.dst)
            ));
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0 as usize]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0 as usize]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0 as usize].name
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.0 as usize].src
    }

    pub fn range(&self, e: EdgeId) -> VertexId {
        self.edges[e.0 as usize].dst
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_by_name
            .get(name)
            .copied()
            .ok_or_else(|| LpaError::UnknownName(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId> {
        self.edge_by_name
            .get(name)
            .copied()
            .ok_or_else(|| LpaError::UnknownName(name.to_string()))
    }

    /// Outgoing edges of `v` in declaration order (the set s^-1(v)).
    pub fn outgoing(&self, v: VertexId) -> &[EdgeId] {
        &self.outgoing[v.0 as usize]
    }

    /// Regular or sink; finite graphs have no infinite emitters.
    pub fn classify_vertex(&self, v: VertexId) -> VertexKind {
        if self.outgoing(v).is_empty() {
            VertexKind::Sink
        } else {
            VertexKind::Regular
        }
    }

    /// The special edge of a regular vertex: the last declared edge out of it.
    pub fn special_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.outgoing(v).last().copied()
    }

    /// True when the graph is R_n for some n >= 1: a single vertex, all loops.
    pub fn is_rose(&self) -> bool {
        self.vertices.len() == 1 && !self.edges.is_empty()
    }

    pub fn require_rose(&self, min_petals: usize) -> Result<usize> {
        if self.is_rose() && self.edges.len() >= min_petals {
            Ok(self.edges.len())
        } else {
            Err(LpaError::NotARose {
                min_petals,
            })
        }
    }
}

/// A finite path: a base vertex and a (possibly empty) composable edge list.
#[derive(Clone)]
pub struct Path {
    graph: Arc<Graph>,
    base: VertexId,
    edges: Vec<EdgeId>,
}

impl Path {
    /// The length-0 path sitting at `v`.
    pub fn vertex(graph: &Arc<Graph>, v: VertexId) -> Path {
        Path {
            graph: graph.clone(),
            base: v,
            edges: Vec::new(),
        }
    }

    pub fn single(graph: &Arc<Graph>, e: EdgeId) -> Path {
        Path {
            graph: graph.clone(),
            base: graph.source(e),
            edges: vec![e],
        }
    }

    /// Builds a path from consecutive edges, checking r(e_i) = s(e_{i+1}).
    pub fn from_edges(graph: &Arc<Graph>, edges: Vec<EdgeId>) -> Result<Path> {
        if edges.is_empty() {
            // no base vertex can be inferred; callers use `vertex` instead
            return Err(LpaError::NotComposable {
                left: "<empty>".into(),
                right: "<empty>".into(),
            });
        }
        for w in edges.windows(2) {
            if graph.range(w[0]) != graph.source(w[1]) {
                return Err(LpaError::NotComposable {
                    left: graph.edge_name(w[0]).to_string(),
                    right: graph.edge_name(w[1]).to_string(),
                });
            }
        }
        Ok(Path {
            graph: graph.clone(),
            base: graph.source(edges[0]),
            edges,
        })
    }

    /// Parses a whitespace- or `*`-separated list of edge names.
    pub fn parse(graph: &Arc<Graph>, text: &str) -> Result<Path> {
        let names: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|s| !s.is_empty())
            .collect();
        let edges = names
            .iter()
            .map(|n| graph.edge_id(n))
            .collect::<Result<Vec<_>>>()?;
        Path::from_edges(graph, edges)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn source(&self) -> VertexId {
        self.base
    }

    pub fn range(&self) -> VertexId {
        match self.edges.last() {
            Some(&e) => self.graph.range(e),
            None => self.base,
        }
    }

    pub fn is_closed(&self) -> bool {
        !self.edges.is_empty() && self.source() == self.range()
    }

    /// Concatenation; defined iff r(self) = s(other).
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.range() != other.source() {
            return Err(LpaError::NotComposable {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Path {
            graph: self.graph.clone(),
            base: self.base,
            edges,
        })
    }

    pub(crate) fn rotate_left(&self, k: usize) -> Path {
        debug_assert!(self.is_closed());
        let n = self.edges.len();
        let k = k % n;
        let mut edges = Vec::with_capacity(n);
        edges.extend_from_slice(&self.edges[k..]);
        edges.extend_from_slice(&self.edges[..k]);
        Path {
            graph: self.graph.clone(),
            base: self.graph.source(edges[0]),
            edges,
        }
    }
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.edges == other.edges
    }
}
impl Eq for Path {}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            write!(f, "{}", self.graph.vertex_name(self.base))
        } else {
            let names: Vec<&str> = self
                .edges
                .iter()
                .map(|&e| self.graph.edge_name(e))
                .collect();
            write!(f, "{}", names.join("*"))
        }
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Path({self})")
    }
}

/// The rotation class Pi_c of a closed path, with its primitivity data.
#[derive(Debug, Clone)]
pub struct ClosedPathClass {
    rep: Path,
    rotations: Vec<Path>,
    period: usize,
}

impl ClosedPathClass {
    /// Rotations c_1 = c, c_2 = e_2..e_t e_1, ..., c_t; |c| entries counted
    /// with multiplicity.
    pub fn rotations(c: &Path) -> Result<ClosedPathClass> {
        if !c.is_closed() {
            return Err(LpaError::NotClosed);
        }
        let n = c.len();
        let rotations: Vec<Path> = (0..n).map(|k| c.rotate_left(k)).collect();
        let period = primitive_period(c.edges());
        Ok(ClosedPathClass {
            rep: c.clone(),
            rotations,
            period,
        })
    }

    pub fn representative(&self) -> &Path {
        &self.rep
    }

    pub fn all(&self) -> &[Path] {
        &self.rotations
    }

    pub fn distinct(&self) -> Vec<&Path> {
        self.rotations[..self.period].iter().collect()
    }

    /// c is primitive (the paper's "simple closed path") iff c != d^n for n >= 2.
    pub fn is_primitive(&self) -> bool {
        self.period == self.rep.len()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn contains(&self, d: &Path) -> bool {
        self.rotations.iter().any(|r| r == d)
    }
}

/// Smallest d dividing len with w[i] == w[i mod d] for all i.
pub(crate) fn primitive_period(word: &[EdgeId]) -> usize {
    let n = word.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (0..n).all(|i| word[i] == word[i % d]) {
            return d;
        }
    }
    n
}

pub(crate) fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
