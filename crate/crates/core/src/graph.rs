//! Feynman graphs: arcs with a fixed-point-free involution, vertices, and a
//! partial attachment of arcs to vertices.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("arc `{0}` is paired with itself")]
    InvolutionFixedPoint(String),
    #[error("involution pairs do not partition the arcs: {0}")]
    InvolutionNotPairing(String),
    #[error("unknown arc or vertex `{0}`")]
    UnknownArcOrVertex(String),
    #[error("a graph without vertices must consist of exactly one edge")]
    NodelessLoopUnrepresentable,
    #[error("graph is not connected")]
    Disconnected,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("betti number is undefined for a disconnected graph")]
    BettiUndefined,
    #[error("duplicate identifier `{0}`")]
    Duplicate(String),
    #[error("genus map must cover exactly the vertex set: {0}")]
    GenusDomain(String),
    #[error("search budget of {0} candidates exceeded")]
    SearchBudgetExceeded(usize),
}

/// A finite graph with loose ends. Arcs and vertices are addressed by index
/// internally and carry opaque string names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeynmanGraph {
    arcs: Vec<String>,
    inv: Vec<usize>,
    attach: Vec<Option<usize>>,
    vertices: Vec<String>,
    nb: Vec<Vec<usize>>,
}

/// An edge as the pair of its two arcs, smaller index first.
pub type Edge = (usize, usize);

impl FeynmanGraph {
    /// Builds a connected graph from names.
    pub fn new<A, P, V, T>(
        arcs: &[A],
        pairs: &[(P, P)],
        vertices: &[V],
        attach: &[(T, T)],
    ) -> Result<Self, GraphError>
    where
        A: AsRef<str>,
        P: AsRef<str>,
        V: AsRef<str>,
        T: AsRef<str>,
    {
        let g = Self::new_raw(arcs, pairs, vertices, attach)?;
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph without demanding connectivity.
    pub fn new_raw<A, P, V, T>(
        arcs: &[A],
        pairs: &[(P, P)],
        vertices: &[V],
        attach: &[(T, T)],
    ) -> Result<Self, GraphError>
    where
        A: AsRef<str>,
        P: AsRef<str>,
        V: AsRef<str>,
        T: AsRef<str>,
    {
        let arcs: Vec<String> = arcs.iter().map(|a| a.as_ref().to_string()).collect();
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let arc_id = index_of(&arcs)?;
        let vertex_id = index_of(&vertices)?;
        let mut inv = vec![usize::MAX; arcs.len()];
        for (a, b) in pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *arc_id
                .get(a)
                .ok_or_else(|| GraphError::UnknownArcOrVertex(a.to_string()))?;
            let ib = *arc_id
                .get(b)
                .ok_or_else(|| GraphError::UnknownArcOrVertex(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::InvolutionFixedPoint(a.to_string()));
            }
            if inv[ia] != usize::MAX || inv[ib] != usize::MAX {
                let twice = if inv[ia] != usize::MAX { a } else { b };
                return Err(GraphError::InvolutionNotPairing(format!(
                    "`{twice}` occurs in two pairs"
                )));
            }
            inv[ia] = ib;
            inv[ib] = ia;
        }
        if let Some(a) = inv.iter().position(|&x| x == usize::MAX) {
            return Err(GraphError::InvolutionNotPairing(format!(
                "`{}` has no partner",
                arcs[a]
            )));
        }
        let mut att = vec![None; arcs.len()];
        for (a, v) in attach {
            let (a, v) = (a.as_ref(), v.as_ref());
            let ia = *arc_id
                .get(a)
                .ok_or_else(|| GraphError::UnknownArcOrVertex(a.to_string()))?;
            let iv = *vertex_id
                .get(v)
                .ok_or_else(|| GraphError::UnknownArcOrVertex(v.to_string()))?;
            if att[ia].is_some() {
                return Err(GraphError::Duplicate(a.to_string()));
            }
            att[ia] = Some(iv);
        }
        Self::from_parts(arcs, inv, att, vertices)
    }

    /// Index-level constructor. Checks the involution and the edge rule for
    /// vertexless graphs, but not connectivity.
    pub(crate) fn from_parts(
        arcs: Vec<String>,
        inv: Vec<usize>,
        attach: Vec<Option<usize>>,
        vertices: Vec<String>,
    ) -> Result<Self, GraphError> {
        index_of(&arcs)?;
        index_of(&vertices)?;
        for (a, &b) in inv.iter().enumerate() {
            if b == a {
                return Err(GraphError::InvolutionFixedPoint(arcs[a].clone()));
            }
            if b >= inv.len() || inv[b] != a {
                return Err(GraphError::InvolutionNotPairing(arcs[a].clone()));
            }
        }
        if vertices.is_empty() && arcs.len() != 2 {
            return Err(GraphError::NodelessLoopUnrepresentable);
        }
        let mut nb = vec![Vec::new(); vertices.len()];
        for (a, t) in attach.iter().enumerate() {
            if let Some(v) = *t {
                if v >= vertices.len() {
                    return Err(GraphError::UnknownArcOrVertex(format!("vertex #{v}")));
                }
                nb[v].push(a);
            }
        }
        Ok(Self {
            arcs,
            inv,
            attach,
            vertices,
            nb,
        })
    }

    /// The exceptional edge ↕ with arcs `a`, `a†`.
    pub fn edge() -> Self {
        Self::from_parts(
            vec!["a".into(), "a†".into()],
            vec![1, 0],
            vec![None, None],
            vec![],
        )
        .expect("edge is valid")
    }

    /// The n-star: arcs `1, 1†, …, n, n†`, with `1..n` attached to vertex `v`.
    pub fn star(n: usize) -> Self {
        let mut arcs = Vec::with_capacity(2 * n);
        let mut inv = Vec::with_capacity(2 * n);
        let mut attach = Vec::with_capacity(2 * n);
        for k in 1..=n {
            arcs.push(k.to_string());
            arcs.push(format!("{k}†"));
            let i = 2 * (k - 1);
            inv.push(i + 1);
            inv.push(i);
            attach.push(Some(0));
            attach.push(None);
        }
        Self::from_parts(arcs, inv, attach, vec!["v".into()]).expect("star is valid")
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arc_name(&self, a: usize) -> &str {
        &self.arcs[a]
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn arc_names(&self) -> &[String] {
        &self.arcs
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn arc_id(&self, name: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a == name)
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// The involution `i`.
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// The vertex an arc is attached to, if any.
    pub fn attach(&self, a: usize) -> Option<usize> {
        self.attach[a]
    }

    pub fn is_attached(&self, a: usize) -> bool {
        self.attach[a].is_some()
    }

    /// `nb(v)` in arc order.
    pub fn nb(&self, v: usize) -> &[usize] {
        &self.nb[v]
    }

    pub fn arity(&self, v: usize) -> usize {
        self.nb[v].len()
    }

    /// True for the exceptional edge (the only vertexless graph).
    pub fn is_edge(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True if the graph has exactly one vertex and no internal edges.
    pub fn is_star(&self) -> bool {
        self.vertices.len() == 1 && self.internal_edges().is_empty()
    }

    pub fn edge_of(&self, a: usize) -> Edge {
        let b = self.inv[a];
        (a.min(b), a.max(b))
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.arcs.len())
            .filter(|&a| a < self.inv[a])
            .map(|a| (a, self.inv[a]))
            .collect()
    }

    pub fn internal_edges(&self) -> Vec<Edge> {
        self.edges()
            .into_iter()
            .filter(|&(a, b)| self.is_attached(a) && self.is_attached(b))
            .collect()
    }

    pub fn is_internal(&self, e: Edge) -> bool {
        self.is_attached(e.0) && self.is_attached(e.1)
    }

    /// `∂(G) = A \ D`, in arc order.
    pub fn boundary(&self) -> Vec<usize> {
        (0..self.arcs.len())
            .filter(|&a| !self.is_attached(a))
            .collect()
    }

    /// Internal edges with both ends in `vs`, including loops.
    pub fn internal_edges_among(&self, in_set: &[bool]) -> Vec<Edge> {
        self.internal_edges()
            .into_iter()
            .filter(|&(a, b)| {
                in_set[self.attach[a].unwrap()] && in_set[self.attach[b].unwrap()]
            })
            .collect()
    }

    /// Loops at `v`.
    pub fn loops_at(&self, v: usize) -> Vec<Edge> {
        self.internal_edges()
            .into_iter()
            .filter(|&(a, b)| self.attach[a] == Some(v) && self.attach[b] == Some(v))
            .collect()
    }

    /// Connectivity of arcs and vertices under attachment and the involution.
    pub fn is_connected(&self) -> bool {
        let n = self.arcs.len() + self.vertices.len();
        if n == 0 {
            return false;
        }
        let na = self.arcs.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            let mut next = Vec::new();
            if x < na {
                next.push(self.inv[x]);
                if let Some(v) = self.attach[x] {
                    next.push(na + v);
                }
            } else {
                next.extend(self.nb[x - na].iter().copied());
            }
            for y in next {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `deg(G) = |V| + |iE|`.
    pub fn degree(&self) -> usize {
        self.vertices.len() + self.internal_edges().len()
    }

    /// First Betti number `|iE| − |V| + 1`, and 0 for the edge.
    pub fn betti(&self) -> Result<usize, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::BettiUndefined);
        }
        if self.is_edge() {
            return Ok(0);
        }
        Ok(self.internal_edges().len() + 1 - self.vertices.len())
    }

    /// `☆_v`: arcs `nb(v)` (attached) followed by fresh partners. The returned
    /// vector lists, for each arc of the star, the arc of `G` it is sent to by
    /// the canonical embedding.
    pub fn star_of_vertex(&self, v: usize) -> Result<(FeynmanGraph, Vec<usize>), GraphError> {
        if v >= self.vertices.len() {
            return Err(GraphError::UnknownVertex(format!("#{v}")));
        }
        let nb = &self.nb[v];
        let mut taken: HashSet<String> = nb.iter().map(|&a| self.arcs[a].clone()).collect();
        let mut arcs = Vec::new();
        let mut inv = Vec::new();
        let mut attach = Vec::new();
        let mut image = Vec::new();
        for (k, &a) in nb.iter().enumerate() {
            let dag = fresh_name(&format!("{}†", self.arcs[a]), &mut taken);
            arcs.push(self.arcs[a].clone());
            arcs.push(dag);
            inv.push(2 * k + 1);
            inv.push(2 * k);
            attach.push(Some(0));
            attach.push(None);
            image.push(a);
            image.push(self.inv[a]);
        }
        let g = Self::from_parts(arcs, inv, attach, vec![self.vertices[v].clone()])?;
        Ok((g, image))
    }

    /// `☆_G`: the boundary arcs of `G` (unattached) with fresh attached
    /// partners on a single vertex. For the edge this is the 2-star on `∂(↕)`.
    /// The returned vector gives the image of each star arc under `☆_G → G`.
    pub fn star_of_graph(&self) -> (FeynmanGraph, Vec<usize>) {
        let bd = self.boundary();
        let mut taken: HashSet<String> = self.arcs.iter().cloned().collect();
        let mut arcs = Vec::new();
        let mut inv = Vec::new();
        let mut attach = Vec::new();
        let mut image = Vec::new();
        for (k, &b) in bd.iter().enumerate() {
            let dag = fresh_name(&format!("{}†", self.arcs[b]), &mut taken);
            arcs.push(dag);
            arcs.push(self.arcs[b].clone());
            inv.push(2 * k + 1);
            inv.push(2 * k);
            attach.push(Some(0));
            attach.push(None);
            image.push(self.inv[b]);
            image.push(b);
        }
        let vname = if self.vertices.is_empty() {
            "v".to_string()
        } else {
            self.vertices.join("+")
        };
        let g = Self::from_parts(arcs, inv, attach, vec![vname]).expect("star of graph");
        (g, image)
    }

    /// Renames arcs and vertices, keeping the structure.
    pub fn renamed(&self, arcs: Vec<String>, vertices: Vec<String>) -> Result<Self, GraphError> {
        Self::from_parts(arcs, self.inv.clone(), self.attach.clone(), vertices)
    }

    /// A deterministic code equal for two graphs iff they are isomorphic.
    pub fn canonical_code(&self) -> String {
        crate::iso::canonical_code(self)
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        crate::iso::is_isomorphic(self, other)
    }

    pub fn isomorphisms(&self, other: &Self) -> Vec<GraphIso> {
        crate::iso::isomorphisms(self, other)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson::from_graph(self, None)
    }
}

/// An isomorphism of graphs as index maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphIso {
    pub arc_map: Vec<usize>,
    pub vertex_map: Vec<usize>,
}

pub(crate) fn fresh_name(base: &str, taken: &mut HashSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('†');
    }
    taken.insert(name.clone());
    name
}

fn index_of(names: &[String]) -> Result<BTreeMap<&str, usize>, GraphError> {
    let mut m = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if m.insert(n.as_str(), i).is_some() {
            return Err(GraphError::Duplicate(n.clone()));
        }
    }
    Ok(m)
}

/// A graph with a genus function on its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenusGraph {
    pub graph: FeynmanGraph,
    pub genus: Vec<u32>,
}

impl GenusGraph {
    pub fn new(graph: FeynmanGraph, genus: Vec<u32>) -> Result<Self, GraphError> {
        if genus.len() != graph.vertex_count() {
            return Err(GraphError::GenusDomain(format!(
                "{} values for {} vertices",
                genus.len(),
                graph.vertex_count()
            )));
        }
        Ok(Self { graph, genus })
    }

    /// Every vertex gets genus 0.
    pub fn genus_zero(graph: FeynmanGraph) -> Self {
        let genus = vec![0; graph.vertex_count()];
        Self { graph, genus }
    }

    /// `β₁(G) + Σ g(v)`.
    pub fn total_genus(&self) -> Result<u32, GraphError> {
        Ok(self.graph.betti()? as u32 + self.genus.iter().sum::<u32>())
    }

    /// Connected, and `2g(v) + |nb(v)| − 2 > 0` at every vertex.
    pub fn is_stable(&self) -> bool {
        self.graph.is_connected()
            && (0..self.graph.vertex_count())
                .all(|v| 2 * self.genus[v] as i64 + self.graph.arity(v) as i64 - 2 > 0)
    }
}

/// Serialized graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub arcs: Vec<String>,
    pub involution: Vec<[String; 2]>,
    pub vertices: Vec<String>,
    pub attach: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<BTreeMap<String, u32>>,
}

impl GraphJson {
    pub fn from_graph(g: &FeynmanGraph, genus: Option<&[u32]>) -> Self {
        GraphJson {
            arcs: g.arcs.clone(),
            involution: g
                .edges()
                .into_iter()
                .map(|(a, b)| [g.arcs[a].clone(), g.arcs[b].clone()])
                .collect(),
            vertices: g.vertices.clone(),
            attach: (0..g.arc_count())
                .filter_map(|a| g.attach[a].map(|v| (g.arcs[a].clone(), g.vertices[v].clone())))
                .collect(),
            genus: genus.map(|gs| {
                gs.iter()
                    .enumerate()
                    .map(|(v, &x)| (g.vertices[v].clone(), x))
                    .collect()
            }),
        }
    }

    /// Builds the (connected) graph; the genus field is ignored.
    pub fn to_graph(&self) -> Result<FeynmanGraph, GraphError> {
        let pairs: Vec<(&str, &str)> = self
            .involution
            .iter()
            .map(|[a, b]| (a.as_str(), b.as_str()))
            .collect();
        let attach: Vec<(&str, &str)> = self
            .attach
            .iter()
            .map(|(a, v)| (a.as_str(), v.as_str()))
            .collect();
        let arcs: Vec<&str> = self.arcs.iter().map(String::as_str).collect();
        let vertices: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        FeynmanGraph::new(&arcs, &pairs, &vertices, &attach)
    }

    /// Builds a genus graph; a missing genus field means genus 0 everywhere.
    pub fn to_genus_graph(&self) -> Result<GenusGraph, GraphError> {
        let g = self.to_graph()?;
        let genus = match &self.genus {
            None => vec![0; g.vertex_count()],
            Some(m) => {
                if m.len() != g.vertex_count() {
                    return Err(GraphError::GenusDomain(format!(
                        "{} entries for {} vertices",
                        m.len(),
                        g.vertex_count()
                    )));
                }
                let mut out = vec![0; g.vertex_count()];
                for (name, &x) in m {
                    let v = g
                        .vertex_id(name)
                        .ok_or_else(|| GraphError::GenusDomain(name.clone()))?;
                    out[v] = x;
                }
                out
            }
        };
        GenusGraph::new(g, genus)
    }
}
