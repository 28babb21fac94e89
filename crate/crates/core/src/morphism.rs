//! Embeddings and graphical maps between Feynman graphs.
//!
//! An embedding class into `G` is either an edge of `G`, or a vertex set `W`
//! together with a set of internal edges among `W` that are cut open. The
//! source of the class is the cut graph: vertices `W`, their arcs, uncut
//! edges paired as in `G`, and fresh boundary partners for every other arc.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{fresh_name, Edge, FeynmanGraph, GraphError, GraphJson};

pub type GraphRef = Arc<FeynmanGraph>;

/// Default cap on candidate steps per search.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("invalid graphical map: {0}")]
    InvalidMap(String),
    #[error("composition incompatible: {0}")]
    CompositionIncompatible(String),
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("search budget of {0} candidates exceeded")]
    SearchBudgetExceeded(usize),
}

/// Identifies an embedding up to isomorphism over the target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbKey {
    Edge(Edge),
    Sub { vertices: Vec<usize>, cut: Vec<Edge> },
}

impl EmbKey {
    pub fn is_edge(&self) -> bool {
        matches!(self, EmbKey::Edge(_))
    }

    /// The key of `☆_w → G`: the vertex with all its loops cut.
    pub fn star(g: &FeynmanGraph, w: usize) -> Self {
        EmbKey::Sub {
            vertices: vec![w],
            cut: g.loops_at(w),
        }
    }

    pub fn vertices(&self) -> &[usize] {
        match self {
            EmbKey::Edge(_) => &[],
            EmbKey::Sub { vertices, .. } => vertices,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Embedding {
    pub source: GraphRef,
    pub target: GraphRef,
    pub arc_map: Vec<usize>,
    pub vertex_map: Vec<usize>,
}

impl Embedding {
    pub fn key(&self) -> EmbKey {
        let t = &self.target;
        if self.source.is_edge() {
            return EmbKey::Edge(t.edge_of(self.arc_map[0]));
        }
        let mut vertices = self.vertex_map.clone();
        vertices.sort_unstable();
        let mut in_w = vec![false; t.vertex_count()];
        for &w in &vertices {
            in_w[w] = true;
        }
        let realized: BTreeSet<Edge> = self
            .source
            .internal_edges()
            .into_iter()
            .map(|(a, _)| t.edge_of(self.arc_map[a]))
            .collect();
        let cut = t
            .internal_edges_among(&in_w)
            .into_iter()
            .filter(|e| !realized.contains(e))
            .collect();
        EmbKey::Sub { vertices, cut }
    }

    /// Images of the boundary arcs of the source.
    pub fn boundary_image(&self) -> Vec<usize> {
        self.source
            .boundary()
            .into_iter()
            .map(|b| self.arc_map[b])
            .collect()
    }

    /// The boundary arc of the source sent to `y`.
    pub fn boundary_preimage(&self, y: usize) -> Option<usize> {
        self.source
            .boundary()
            .into_iter()
            .find(|&b| self.arc_map[b] == y)
    }

    /// Genus contribution `β₁(source) + Σ g(image vertex)`.
    pub fn genus(&self, target_genus: &[u32]) -> u32 {
        if self.source.is_edge() {
            return 0;
        }
        self.source.betti().unwrap_or(0) as u32
            + self.vertex_map.iter().map(|&w| target_genus[w]).sum::<u32>()
    }

    pub fn validate(&self) -> Result<(), MorphismError> {
        validate_embedding(self)
    }
}

/// Checks the embedding clauses; the error names the first failing one.
pub fn validate_embedding(e: &Embedding) -> Result<(), MorphismError> {
    let (h, g) = (&e.source, &e.target);
    let bad = |s: String| Err(MorphismError::InvalidEmbedding(s));
    if e.arc_map.len() != h.arc_count() || e.arc_map.iter().any(|&x| x >= g.arc_count()) {
        return bad("arc map is not a total map into the target arcs".into());
    }
    if e.vertex_map.len() != h.vertex_count() || e.vertex_map.iter().any(|&w| w >= g.vertex_count())
    {
        return bad("vertex map is not a total map into the target vertices".into());
    }
    for a in 0..h.arc_count() {
        if e.arc_map[h.inv(a)] != g.inv(e.arc_map[a]) {
            return bad(format!(
                "involution: arc `{}` and its partner are not sent to partners",
                h.arc_name(a)
            ));
        }
    }
    for a in 0..h.arc_count() {
        if let Some(v) = h.attach(a) {
            if g.attach(e.arc_map[a]) != Some(e.vertex_map[v]) {
                return bad(format!(
                    "naturality: attached arc `{}` is not sent to an arc at the image vertex",
                    h.arc_name(a)
                ));
            }
        }
    }
    let mut seen = HashSet::new();
    for &w in &e.vertex_map {
        if !seen.insert(w) {
            return bad(format!("vertex map is not injective at `{}`", g.vertex_name(w)));
        }
    }
    for v in 0..h.vertex_count() {
        let w = e.vertex_map[v];
        let mut img: Vec<usize> = h.nb(v).iter().map(|&a| e.arc_map[a]).collect();
        img.sort_unstable();
        let mut nbw = g.nb(w).to_vec();
        nbw.sort_unstable();
        if img != nbw {
            return bad(format!(
                "pullback: nb(`{}`) is not sent bijectively onto nb(`{}`)",
                h.vertex_name(v),
                g.vertex_name(w)
            ));
        }
    }
    Ok(())
}

/// All embeddings `H → G`.
pub fn enumerate_embeddings(
    h: &GraphRef,
    g: &GraphRef,
    budget: usize,
) -> Result<Vec<Embedding>, MorphismError> {
    let maps = crate::iso::local_maps(h, g, false, budget).map_err(|e| match e {
        GraphError::SearchBudgetExceeded(b) => MorphismError::SearchBudgetExceeded(b),
        other => MorphismError::Graph(other),
    })?;
    Ok(maps
        .into_iter()
        .map(|(arc_map, vertex_map)| Embedding {
            source: h.clone(),
            target: g.clone(),
            arc_map,
            vertex_map,
        })
        .collect())
}

/// The cut graph of a key together with its embedding into `g`.
pub fn class_embedding(g: &GraphRef, key: &EmbKey) -> Result<Embedding, MorphismError> {
    match key {
        EmbKey::Edge((a, b)) => {
            let src = FeynmanGraph::from_parts(
                vec![g.arc_name(*a).to_string(), g.arc_name(*b).to_string()],
                vec![1, 0],
                vec![None, None],
                vec![],
            )?;
            Ok(Embedding {
                source: Arc::new(src),
                target: g.clone(),
                arc_map: vec![*a, *b],
                vertex_map: vec![],
            })
        }
        EmbKey::Sub { vertices, cut } => {
            let mut in_w = vec![false; g.vertex_count()];
            for &w in vertices {
                in_w[w] = true;
            }
            let in_w_arc = |x: usize| g.attach(x).is_some_and(|v| in_w[v]);
            let cut_set: HashSet<Edge> = cut.iter().copied().collect();
            let mut names = Vec::new();
            let mut image = Vec::new();
            let mut attached = Vec::new();
            let mut local = vec![usize::MAX; g.arc_count()];
            for x in 0..g.arc_count() {
                if in_w_arc(x) || in_w_arc(g.inv(x)) {
                    local[x] = names.len();
                    names.push(g.arc_name(x).to_string());
                    image.push(x);
                    attached.push(in_w_arc(x));
                }
            }
            let mut inv = vec![usize::MAX; names.len()];
            let mut taken: HashSet<String> = g.arc_names().iter().cloned().collect();
            let mut extra = Vec::new();
            for x in 0..g.arc_count() {
                if local[x] == usize::MAX || inv[local[x]] != usize::MAX {
                    continue;
                }
                let y = g.inv(x);
                let e = g.edge_of(x);
                if in_w_arc(x) && in_w_arc(y) && cut_set.contains(&e) {
                    continue;
                }
                inv[local[x]] = local[y];
                inv[local[y]] = local[x];
            }
            for &(a, b) in cut {
                for (p, q) in [(a, b), (b, a)] {
                    let name = fresh_name(&format!("{}′", g.arc_name(q)), &mut taken);
                    extra.push((local[p], name, q));
                }
            }
            for (p, name, q) in extra {
                let idx = names.len();
                names.push(name);
                image.push(q);
                attached.push(false);
                inv.push(p);
                inv[p] = idx;
            }
            let mut vidx = vec![usize::MAX; g.vertex_count()];
            for (k, &w) in vertices.iter().enumerate() {
                vidx[w] = k;
            }
            let attach: Vec<Option<usize>> = image
                .iter()
                .zip(&attached)
                .map(|(&x, &att)| att.then(|| vidx[g.attach(x).unwrap()]))
                .collect();
            let vnames = vertices.iter().map(|&w| g.vertex_name(w).to_string()).collect();
            let src = FeynmanGraph::from_parts(names, inv, attach, vnames)?;
            if !src.is_connected() {
                return Err(GraphError::Disconnected.into());
            }
            Ok(Embedding {
                source: Arc::new(src),
                target: g.clone(),
                arc_map: image,
                vertex_map: vertices.clone(),
            })
        }
    }
}

/// A member of `Emb(G)` with its cached boundary image.
#[derive(Clone, Debug)]
pub struct EmbClass {
    pub key: EmbKey,
    pub embedding: Embedding,
    pub boundary_image: Vec<usize>,
}

/// One representative per isomorphism class of embeddings into `g`.
pub fn emb_classes(g: &GraphRef, budget: usize) -> Result<Vec<EmbClass>, MorphismError> {
    let mut out = Vec::new();
    let mut steps = 0usize;
    for e in g.edges() {
        let emb = class_embedding(g, &EmbKey::Edge(e))?;
        out.push(EmbClass {
            key: EmbKey::Edge(e),
            boundary_image: emb.boundary_image(),
            embedding: emb,
        });
    }
    let n = g.vertex_count();
    if n > 20 {
        return Err(MorphismError::SearchBudgetExceeded(budget));
    }
    for mask in 1u32..(1u32 << n) {
        let in_w: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
        let vertices: Vec<usize> = (0..n).filter(|&v| in_w[v]).collect();
        let edges = g.internal_edges_among(&in_w);
        if edges.len() > 20 {
            return Err(MorphismError::SearchBudgetExceeded(budget));
        }
        for cmask in 0u32..(1u32 << edges.len()) {
            steps += 1;
            if steps > budget {
                return Err(MorphismError::SearchBudgetExceeded(budget));
            }
            let kept: Vec<Edge> = (0..edges.len())
                .filter(|&k| cmask >> k & 1 == 0)
                .map(|k| edges[k])
                .collect();
            if !spans(g, &vertices, &kept) {
                continue;
            }
            let cut: Vec<Edge> = (0..edges.len())
                .filter(|&k| cmask >> k & 1 == 1)
                .map(|k| edges[k])
                .collect();
            let key = EmbKey::Sub {
                vertices: vertices.clone(),
                cut,
            };
            let emb = class_embedding(g, &key)?;
            out.push(EmbClass {
                key,
                boundary_image: emb.boundary_image(),
                embedding: emb,
            });
        }
    }
    Ok(out)
}

/// Whether `edges` connect all of `vertices`.
fn spans(g: &FeynmanGraph, vertices: &[usize], edges: &[Edge]) -> bool {
    let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(a, b) in edges {
        let (u, w) = (g.attach(a).unwrap(), g.attach(b).unwrap());
        let (ru, rw) = (find(&mut parent, u), find(&mut parent, w));
        parent[ru] = rw;
    }
    let root = find(&mut parent, vertices[0]);
    vertices.iter().all(|&v| find(&mut parent, v) == root)
}

/// Identifies a graphical map up to isomorphism of its vertex assignments.
pub type MapKey = (Vec<usize>, Vec<EmbKey>);

#[derive(Clone, Debug)]
pub struct GraphicalMap {
    pub source: GraphRef,
    pub target: GraphRef,
    pub arc_map: Vec<usize>,
    pub phi1: Vec<Embedding>,
    keys: Vec<EmbKey>,
}

impl PartialEq for GraphicalMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.arc_map == other.arc_map
            && self.keys == other.keys
    }
}

impl Eq for GraphicalMap {}

impl GraphicalMap {
    /// Builds and validates a graphical map.
    pub fn new(
        source: GraphRef,
        target: GraphRef,
        arc_map: Vec<usize>,
        phi1: Vec<Embedding>,
    ) -> Result<Self, MorphismError> {
        let m = Self::new_unchecked(source, target, arc_map, phi1);
        validate_graphical_map(&m)?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(
        source: GraphRef,
        target: GraphRef,
        arc_map: Vec<usize>,
        phi1: Vec<Embedding>,
    ) -> Self {
        let keys = phi1.iter().map(Embedding::key).collect();
        Self {
            source,
            target,
            arc_map,
            phi1,
            keys,
        }
    }

    /// Builds a map from keys, materializing their cut graphs.
    pub fn from_keys(
        source: GraphRef,
        target: GraphRef,
        arc_map: Vec<usize>,
        keys: &[EmbKey],
    ) -> Result<Self, MorphismError> {
        let phi1 = keys
            .iter()
            .map(|k| class_embedding(&target, k))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(source, target, arc_map, phi1)
    }

    pub fn keys(&self) -> &[EmbKey] {
        &self.keys
    }

    pub fn map_key(&self) -> MapKey {
        (self.arc_map.clone(), self.keys.clone())
    }

    /// `φ₀ = id`, `φ₁(v) = ☆_v → G`.
    pub fn identity(g: &GraphRef) -> Self {
        let keys: Vec<EmbKey> = (0..g.vertex_count()).map(|v| EmbKey::star(g, v)).collect();
        Self::from_keys(g.clone(), g.clone(), (0..g.arc_count()).collect(), &keys)
            .expect("identity is valid")
    }

    /// The graphical map of an embedding: every vertex goes to the star of its
    /// image vertex.
    pub fn from_embedding(e: &Embedding) -> Result<Self, MorphismError> {
        validate_embedding(e)?;
        let keys: Vec<EmbKey> = e
            .vertex_map
            .iter()
            .map(|&w| EmbKey::star(&e.target, w))
            .collect();
        Self::from_keys(e.source.clone(), e.target.clone(), e.arc_map.clone(), &keys)
    }

    /// The graphical map of a graph isomorphism.
    pub fn from_iso(
        source: &GraphRef,
        target: &GraphRef,
        iso: &crate::graph::GraphIso,
    ) -> Result<Self, MorphismError> {
        Self::from_embedding(&Embedding {
            source: source.clone(),
            target: target.clone(),
            arc_map: iso.arc_map.clone(),
            vertex_map: iso.vertex_map.clone(),
        })
    }

    /// Bijective on arcs with star assignments bijective on vertices.
    pub fn is_isomorphism(&self) -> bool {
        if self.source.arc_count() != self.target.arc_count()
            || self.source.vertex_count() != self.target.vertex_count()
        {
            return false;
        }
        let arcs: HashSet<usize> = self.arc_map.iter().copied().collect();
        if arcs.len() != self.target.arc_count() {
            return false;
        }
        let mut seen = HashSet::new();
        self.keys.iter().all(|k| match k {
            EmbKey::Sub { vertices, .. } if vertices.len() == 1 => {
                *k == EmbKey::star(&self.target, vertices[0]) && seen.insert(vertices[0])
            }
            _ => false,
        })
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Result<Self, MorphismError> {
        if !self.is_isomorphism() {
            return Err(MorphismError::InvalidMap("not an isomorphism".into()));
        }
        let mut arc_map = vec![0; self.arc_map.len()];
        for (a, &x) in self.arc_map.iter().enumerate() {
            arc_map[x] = a;
        }
        let mut keys = vec![EmbKey::Edge((0, 0)); self.target.vertex_count()];
        for (v, k) in self.keys.iter().enumerate() {
            keys[k.vertices()[0]] = EmbKey::star(&self.source, v);
        }
        Self::from_keys(self.target.clone(), self.source.clone(), arc_map, &keys)
    }

    /// The boundary arc of `φ₁(v)` matched with `a ∈ nb(v)`.
    pub fn boundary_match(&self, v: usize, a: usize) -> Option<usize> {
        self.phi1[v].boundary_preimage(self.arc_map[self.source.inv(a)])
    }

    pub fn to_json(&self, with_graphs: bool) -> MapJson {
        let s = &self.source;
        let t = &self.target;
        MapJson {
            source: with_graphs.then(|| GraphJson::from_graph(s, None)),
            target: with_graphs.then(|| GraphJson::from_graph(t, None)),
            arc_map: (0..s.arc_count())
                .map(|a| (s.arc_name(a).to_string(), t.arc_name(self.arc_map[a]).to_string()))
                .collect(),
            phi1: (0..s.vertex_count())
                .map(|v| {
                    let e = &self.phi1[v];
                    (
                        s.vertex_name(v).to_string(),
                        EmbJson {
                            shape: GraphJson::from_graph(&e.source, None),
                            arc_map: (0..e.source.arc_count())
                                .map(|a| {
                                    (
                                        e.source.arc_name(a).to_string(),
                                        t.arc_name(e.arc_map[a]).to_string(),
                                    )
                                })
                                .collect(),
                            vertex_map: (0..e.source.vertex_count())
                                .map(|u| {
                                    (
                                        e.source.vertex_name(u).to_string(),
                                        t.vertex_name(e.vertex_map[u]).to_string(),
                                    )
                                })
                                .collect(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(
        j: &MapJson,
        source: Option<GraphRef>,
        target: Option<GraphRef>,
    ) -> Result<Self, MorphismError> {
        let missing = |w: &str| MorphismError::InvalidMap(format!("{w} graph missing"));
        let source = match source {
            Some(s) => s,
            None => Arc::new(j.source.as_ref().ok_or_else(|| missing("source"))?.to_graph()?),
        };
        let target = match target {
            Some(t) => t,
            None => Arc::new(j.target.as_ref().ok_or_else(|| missing("target"))?.to_graph()?),
        };
        let unknown = |n: &str| MorphismError::Graph(GraphError::UnknownArcOrVertex(n.into()));
        let mut arc_map = vec![usize::MAX; source.arc_count()];
        for (a, x) in &j.arc_map {
            let ia = source.arc_id(a).ok_or_else(|| unknown(a))?;
            arc_map[ia] = target.arc_id(x).ok_or_else(|| unknown(x))?;
        }
        if arc_map.contains(&usize::MAX) {
            return Err(MorphismError::InvalidMap("arc map is not total".into()));
        }
        let mut phi1: Vec<Option<Embedding>> = vec![None; source.vertex_count()];
        for (v, e) in &j.phi1 {
            let iv = source.vertex_id(v).ok_or_else(|| unknown(v))?;
            let shape = Arc::new(e.shape.to_graph()?);
            let mut am = vec![usize::MAX; shape.arc_count()];
            for (a, x) in &e.arc_map {
                let ia = shape.arc_id(a).ok_or_else(|| unknown(a))?;
                am[ia] = target.arc_id(x).ok_or_else(|| unknown(x))?;
            }
            let mut vm = vec![usize::MAX; shape.vertex_count()];
            for (u, w) in &e.vertex_map {
                let iu = shape.vertex_id(u).ok_or_else(|| unknown(u))?;
                vm[iu] = target.vertex_id(w).ok_or_else(|| unknown(w))?;
            }
            if am.contains(&usize::MAX) || vm.contains(&usize::MAX) {
                return Err(MorphismError::InvalidEmbedding(format!(
                    "assignment of `{v}` is not total"
                )));
            }
            phi1[iv] = Some(Embedding {
                source: shape,
                target: target.clone(),
                arc_map: am,
                vertex_map: vm,
            });
        }
        let phi1 = phi1
            .into_iter()
            .enumerate()
            .map(|(v, e)| {
                e.ok_or_else(|| {
                    MorphismError::InvalidMap(format!(
                        "vertex `{}` has no assignment",
                        source.vertex_name(v)
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(source, target, arc_map, phi1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbJson {
    pub shape: GraphJson,
    pub arc_map: BTreeMap<String, String>,
    pub vertex_map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<GraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<GraphJson>,
    pub arc_map: BTreeMap<String, String>,
    pub phi1: BTreeMap<String, EmbJson>,
}

/// Checks the graphical-map clauses; the error names the first failing one.
pub fn validate_graphical_map(m: &GraphicalMap) -> Result<(), MorphismError> {
    let (s, t) = (&m.source, &m.target);
    let bad = |x: String| Err(MorphismError::InvalidMap(x));
    if m.arc_map.len() != s.arc_count() || m.arc_map.iter().any(|&x| x >= t.arc_count()) {
        return bad("arc map is not a total map into the target arcs".into());
    }
    for a in 0..s.arc_count() {
        if m.arc_map[s.inv(a)] != t.inv(m.arc_map[a]) {
            return bad(format!(
                "arc map does not commute with the involutions at `{}`",
                s.arc_name(a)
            ));
        }
    }
    if m.phi1.len() != s.vertex_count() {
        return bad("vertex assignment is not total".into());
    }
    let mut owner: Vec<Option<usize>> = vec![None; t.vertex_count()];
    for (v, e) in m.phi1.iter().enumerate() {
        if *e.target != **t {
            return bad(format!(
                "assignment of `{}` does not land in the target",
                s.vertex_name(v)
            ));
        }
        validate_embedding(e).map_err(|err| {
            MorphismError::InvalidMap(format!("assignment of `{}`: {err}", s.vertex_name(v)))
        })?;
        for &w in &e.vertex_map {
            if let Some(u) = owner[w] {
                return bad(format!(
                    "overlap: `{}` and `{}` both reach `{}`",
                    s.vertex_name(u),
                    s.vertex_name(v),
                    t.vertex_name(w)
                ));
            }
            owner[w] = Some(v);
        }
    }
    for v in 0..s.vertex_count() {
        let e = &m.phi1[v];
        let mut bd: Vec<usize> = e.boundary_image();
        bd.sort_unstable();
        if bd.windows(2).any(|w| w[0] == w[1]) {
            return bad(format!(
                "boundary of the assignment of `{}` is not mapped injectively",
                s.vertex_name(v)
            ));
        }
        let mut want: Vec<usize> = s.nb(v).iter().map(|&a| m.arc_map[s.inv(a)]).collect();
        want.sort_unstable();
        if want != bd {
            return bad(format!(
                "boundary bijection: nb(`{}`) does not match the boundary of its assignment",
                s.vertex_name(v)
            ));
        }
    }
    if s.boundary().is_empty()
        && s.vertex_count() > 0
        && m.phi1.iter().all(|e| e.source.is_edge())
    {
        return bad("boundaryless source with every vertex sent to an edge".into());
    }
    Ok(())
}

/// Substitutes the assignments of `psi` into the source of `f: H → G'` and
/// returns the key of the resulting embedding into the target of `psi`.
pub(crate) fn substitute_key(psi: &GraphicalMap, f: &Embedding) -> Result<EmbKey, MorphismError> {
    let g2 = &psi.target;
    let h = &f.source;
    let gp = &psi.source;
    let incompatible = |s: &str| MorphismError::CompositionIncompatible(s.to_string());
    if h.is_edge() {
        return Ok(EmbKey::Edge(g2.edge_of(psi.arc_map[f.arc_map[0]])));
    }
    let nv = h.vertex_count();
    let mut offset = vec![0usize; nv + 1];
    for u in 0..nv {
        offset[u + 1] = offset[u] + psi.phi1[f.vertex_map[u]].source.arc_count();
    }
    let total = offset[nv];
    // Boundary arc of the copy at u matched with each a ∈ nb_H(u).
    let mut beta = vec![usize::MAX; h.arc_count()];
    for u in 0..nv {
        let w = f.vertex_map[u];
        let gw = &psi.phi1[w];
        for &a in h.nb(u) {
            let x = f.arc_map[a];
            let y = psi.arc_map[gp.inv(x)];
            let b = gw
                .boundary_preimage(y)
                .ok_or_else(|| incompatible("no boundary arc matches a neighbourhood arc"))?;
            beta[a] = b;
        }
    }
    let copy_of = |k: usize| -> (usize, usize) {
        let u = offset.partition_point(|&o| o <= k) - 1;
        (u, k - offset[u])
    };
    let src = |u: usize| -> &FeynmanGraph { &psi.phi1[f.vertex_map[u]].source };
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for u in 0..nv {
        for &a in h.nb(u) {
            let b = h.inv(a);
            if let Some(u2) = h.attach(b) {
                let left = offset[u] + beta[a];
                let right = offset[u2] + src(u2).inv(beta[b]);
                let (l, r) = (find(&mut parent, left), find(&mut parent, right));
                parent[l] = r;
            }
        }
    }
    let inv_k = |k: usize| -> usize {
        let (u, x) = copy_of(k);
        offset[u] + src(u).inv(x)
    };
    let attached_k = |k: usize| -> bool {
        let (u, x) = copy_of(k);
        src(u).is_attached(x)
    };
    let image_k = |k: usize| -> usize {
        let (u, x) = copy_of(k);
        psi.phi1[f.vertex_map[u]].arc_map[x]
    };
    let mut class_inv: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_attached: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_image: BTreeMap<usize, usize> = BTreeMap::new();
    for k in 0..total {
        let c = find(&mut parent, k);
        let ci = find(&mut parent, inv_k(k));
        if c == ci {
            return Err(incompatible("substitution closes an arc onto itself"));
        }
        if *class_inv.entry(c).or_insert(ci) != ci {
            return Err(incompatible("substitution does not induce an involution"));
        }
        if attached_k(k) {
            *class_attached.entry(c).or_insert(0) += 1;
        }
        if *class_image.entry(c).or_insert(image_k(k)) != image_k(k) {
            return Err(incompatible("identified arcs have different images"));
        }
    }
    if class_attached.values().any(|&n| n > 1) {
        return Err(incompatible("an arc class is attached twice"));
    }
    let unattached = class_inv
        .keys()
        .filter(|c| !class_attached.contains_key(c))
        .count();
    let has_vertices = (0..nv).any(|u| !src(u).is_edge());
    if !has_vertices {
        if class_inv.len() != 2 {
            return Err(incompatible("substitution yields a nodeless loop"));
        }
        let c = *class_inv.keys().next().unwrap();
        return Ok(EmbKey::Edge(g2.edge_of(class_image[&c])));
    }
    if unattached != h.boundary().len() {
        return Err(incompatible("substitution yields a nodeless loop"));
    }
    let mut vertices: Vec<usize> = (0..nv)
        .flat_map(|u| psi.phi1[f.vertex_map[u]].vertex_map.iter().copied())
        .collect();
    vertices.sort_unstable();
    if vertices.windows(2).any(|w| w[0] == w[1]) {
        return Err(incompatible("vertex images overlap"));
    }
    let mut realized = BTreeSet::new();
    for (&c, &ci) in &class_inv {
        if c < ci && class_attached.contains_key(&c) && class_attached.contains_key(&ci)
            && !realized.insert(g2.edge_of(class_image[&c])) {
                return Err(incompatible("two edges of the substitution share an image"));
            }
    }
    let mut in_w = vec![false; g2.vertex_count()];
    for &w in &vertices {
        in_w[w] = true;
    }
    let all = g2.internal_edges_among(&in_w);
    if realized.iter().any(|e| !all.contains(e)) {
        return Err(incompatible("substituted edge is not internal in the target"));
    }
    let cut = all.into_iter().filter(|e| !realized.contains(e)).collect();
    Ok(EmbKey::Sub { vertices, cut })
}

/// `ψ ∘ φ` by substituting the assignments of `ψ` into those of `φ`.
pub fn compose(psi: &GraphicalMap, phi: &GraphicalMap) -> Result<GraphicalMap, MorphismError> {
    if phi.target != psi.source {
        return Err(MorphismError::CompositionIncompatible(
            "target of the first map differs from the source of the second".into(),
        ));
    }
    let arc_map: Vec<usize> = phi.arc_map.iter().map(|&x| psi.arc_map[x]).collect();
    let keys = phi
        .phi1
        .iter()
        .map(|f| substitute_key(psi, f))
        .collect::<Result<Vec<_>, _>>()?;
    GraphicalMap::from_keys(phi.source.clone(), psi.target.clone(), arc_map, &keys)
}

/// The key of the image of the whole source: the substitution of all
/// assignments into the source graph.
pub fn image_key(m: &GraphicalMap) -> Result<EmbKey, MorphismError> {
    let s = &m.source;
    let id = Embedding {
        source: s.clone(),
        target: s.clone(),
        arc_map: (0..s.arc_count()).collect(),
        vertex_map: (0..s.vertex_count()).collect(),
    };
    substitute_key(m, &id)
}

/// All graphical maps `H → G`, in a deterministic order.
pub fn hom_set(h: &GraphRef, g: &GraphRef, budget: usize) -> Result<Vec<GraphicalMap>, MorphismError> {
    if h.is_edge() {
        return Ok((0..g.arc_count())
            .map(|x| GraphicalMap::new_unchecked(h.clone(), g.clone(), vec![x, g.inv(x)], vec![]))
            .collect());
    }
    let classes = emb_classes(g, budget)?;
    hom_set_with(h, g, &classes, budget)
}

pub(crate) fn hom_set_with(
    h: &GraphRef,
    g: &GraphRef,
    classes: &[EmbClass],
    budget: usize,
) -> Result<Vec<GraphicalMap>, MorphismError> {
    if h.is_edge() {
        return hom_set(h, g, budget);
    }
    let mut s = HomSearch {
        h,
        g,
        classes,
        budget,
        steps: 0,
        phi0: vec![None; h.arc_count()],
        chosen: vec![usize::MAX; h.vertex_count()],
        used: vec![false; g.vertex_count()],
        out: Vec::new(),
    };
    s.vertex_step(0)?;
    Ok(s.out)
}

struct HomSearch<'a> {
    h: &'a GraphRef,
    g: &'a GraphRef,
    classes: &'a [EmbClass],
    budget: usize,
    steps: usize,
    phi0: Vec<Option<usize>>,
    chosen: Vec<usize>,
    used: Vec<bool>,
    out: Vec<GraphicalMap>,
}

impl HomSearch<'_> {
    fn tick(&mut self) -> Result<(), MorphismError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(MorphismError::SearchBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn vertex_step(&mut self, v: usize) -> Result<(), MorphismError> {
        if v == self.h.vertex_count() {
            if self.h.boundary().is_empty()
                && self.chosen.iter().all(|&c| self.classes[c].key.is_edge())
            {
                return Ok(());
            }
            let arc_map = self.phi0.iter().map(|x| x.unwrap()).collect();
            let phi1 = self
                .chosen
                .iter()
                .map(|&c| self.classes[c].embedding.clone())
                .collect();
            self.out.push(GraphicalMap::new_unchecked(
                self.h.clone(),
                self.g.clone(),
                arc_map,
                phi1,
            ));
            return Ok(());
        }
        let arity = self.h.arity(v);
        for c in 0..self.classes.len() {
            let cl = &self.classes[c];
            if cl.boundary_image.len() != arity {
                continue;
            }
            if cl.key.vertices().iter().any(|&w| self.used[w]) {
                continue;
            }
            self.tick()?;
            for &w in cl.key.vertices() {
                self.used[w] = true;
            }
            self.chosen[v] = c;
            let mut taken = vec![false; arity];
            self.arc_step(v, c, 0, &mut taken)?;
            self.chosen[v] = usize::MAX;
            for &w in cl.key.vertices() {
                self.used[w] = false;
            }
        }
        Ok(())
    }

    fn arc_step(
        &mut self,
        v: usize,
        c: usize,
        j: usize,
        taken: &mut Vec<bool>,
    ) -> Result<(), MorphismError> {
        if j == self.h.arity(v) {
            return self.vertex_step(v + 1);
        }
        let a = self.h.nb(v)[j];
        let ia = self.h.inv(a);
        for t in 0..taken.len() {
            if taken[t] {
                continue;
            }
            let y = self.classes[c].boundary_image[t];
            let iy = self.g.inv(y);
            if self.phi0[ia].is_some_and(|z| z != y) || self.phi0[a].is_some_and(|z| z != iy) {
                continue;
            }
            self.tick()?;
            let set_ia = self.phi0[ia].is_none();
            let set_a = self.phi0[a].is_none();
            self.phi0[ia] = Some(y);
            self.phi0[a] = Some(iy);
            taken[t] = true;
            self.arc_step(v, c, j + 1, taken)?;
            taken[t] = false;
            if set_ia {
                self.phi0[ia] = None;
            }
            if set_a {
                self.phi0[a] = None;
            }
        }
        Ok(())
    }
}
