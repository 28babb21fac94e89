//! Elementary graphical maps and the factorization of an arbitrary map into
//! codegeneracies, an isomorphism, and cofaces.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::graph::{Edge, FeynmanGraph, GraphError};
use crate::morphism::{
    class_embedding, compose, image_key, EmbKey, Embedding, GraphRef, GraphicalMap, MorphismError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ElementaryKind {
    Isomorphism,
    Codegeneracy,
    InnerCoface,
    OuterCofaceEmbedding,
    EdgeInclusion,
}

/// `G/e` together with the inner coface `G/e → G`.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub quotient: GraphRef,
    pub coface: GraphicalMap,
    /// Vertex of `G` ↦ vertex of `G/e`.
    pub vertex_map: Vec<usize>,
}

/// Contracts an internal edge. Endpoints merge into the endpoint listed
/// first in `G`.
pub fn contract_edge(g: &GraphRef, e: Edge) -> Result<Contraction, MorphismError> {
    let (a, b) = e;
    if !g.is_internal(e) {
        return Err(MorphismError::InvalidMap(format!(
            "edge `{}` is not internal",
            g.arc_name(a)
        )));
    }
    let (u, w) = (g.attach(a).unwrap(), g.attach(b).unwrap());
    let (keep, drop) = (u.min(w), u.max(w));
    let kept: Vec<usize> = (0..g.arc_count()).filter(|&x| x != a && x != b).collect();
    let mut local = vec![usize::MAX; g.arc_count()];
    for (k, &x) in kept.iter().enumerate() {
        local[x] = k;
    }
    let mut vmap = vec![usize::MAX; g.vertex_count()];
    let mut vnames = Vec::new();
    for v in 0..g.vertex_count() {
        if v == drop && u != w {
            continue;
        }
        vmap[v] = vnames.len();
        vnames.push(g.vertex_name(v).to_string());
    }
    vmap[drop] = vmap[keep];
    let q = FeynmanGraph::from_parts(
        kept.iter().map(|&x| g.arc_name(x).to_string()).collect(),
        kept.iter().map(|&x| local[g.inv(x)]).collect(),
        kept.iter().map(|&x| g.attach(x).map(|v| vmap[v])).collect(),
        vnames,
    )?;
    let q = Arc::new(q);
    let merged = vmap[keep];
    let mut pair = vec![false; g.vertex_count()];
    pair[u] = true;
    pair[w] = true;
    let keys: Vec<EmbKey> = (0..q.vertex_count())
        .map(|y| {
            if y == merged {
                let mut vertices = vec![u, w];
                vertices.dedup();
                let cut = g
                    .internal_edges_among(&pair)
                    .into_iter()
                    .filter(|&f| f != e)
                    .collect();
                EmbKey::Sub { vertices, cut }
            } else {
                let v = (0..g.vertex_count()).find(|&v| vmap[v] == y).unwrap();
                EmbKey::star(g, v)
            }
        })
        .collect();
    let coface = GraphicalMap::from_keys(q.clone(), g.clone(), kept, &keys)?;
    Ok(Contraction {
        quotient: q,
        coface,
        vertex_map: vmap,
    })
}

/// One inner coface `G/e → G` per internal edge.
pub fn inner_cofaces_into(g: &GraphRef) -> Result<Vec<GraphicalMap>, MorphismError> {
    g.internal_edges()
        .into_iter()
        .map(|e| contract_edge(g, e).map(|c| c.coface))
        .collect()
}

/// The codegeneracy `s_v: G → G/v` deleting a bivalent vertex. A bivalent
/// vertex carrying a loop has none.
pub fn codegeneracy(g: &GraphRef, v: usize) -> Result<GraphicalMap, MorphismError> {
    if g.arity(v) != 2 {
        return Err(MorphismError::InvalidMap(format!(
            "vertex `{}` is not bivalent",
            g.vertex_name(v)
        )));
    }
    let (p, q) = (g.nb(v)[0], g.nb(v)[1]);
    let (pp, qq) = (g.inv(p), g.inv(q));
    if pp == q {
        return Err(GraphError::NodelessLoopUnrepresentable.into());
    }
    let kept: Vec<usize> = (0..g.arc_count()).filter(|&x| x != p && x != q).collect();
    let mut local = vec![usize::MAX; g.arc_count()];
    for (k, &x) in kept.iter().enumerate() {
        local[x] = k;
    }
    let vmap: Vec<usize> = (0..g.vertex_count())
        .map(|x| if x < v { x } else { x.wrapping_sub(1) })
        .collect();
    let inv = kept
        .iter()
        .map(|&x| {
            if x == pp {
                local[qq]
            } else if x == qq {
                local[pp]
            } else {
                local[g.inv(x)]
            }
        })
        .collect();
    let t = Arc::new(FeynmanGraph::from_parts(
        kept.iter().map(|&x| g.arc_name(x).to_string()).collect(),
        inv,
        kept.iter().map(|&x| g.attach(x).map(|y| vmap[y])).collect(),
        (0..g.vertex_count())
            .filter(|&x| x != v)
            .map(|x| g.vertex_name(x).to_string())
            .collect(),
    )?);
    let mut arc_map: Vec<usize> = (0..g.arc_count())
        .map(|x| local[x])
        .collect();
    arc_map[p] = local[qq];
    arc_map[q] = local[pp];
    let keys: Vec<EmbKey> = (0..g.vertex_count())
        .map(|x| {
            if x == v {
                EmbKey::Edge(t.edge_of(local[pp]))
            } else {
                EmbKey::star(&t, vmap[x])
            }
        })
        .collect();
    GraphicalMap::from_keys(g.clone(), t, arc_map, &keys)
}

/// All codegeneracies out of `g`.
pub fn codegeneracies_out_of(g: &GraphRef) -> Vec<GraphicalMap> {
    (0..g.vertex_count())
        .filter(|&v| g.arity(v) == 2)
        .filter_map(|v| codegeneracy(g, v).ok())
        .collect()
}

/// Outer cofaces into `g`. For a star these are the inclusions of the edge,
/// one per arc. Otherwise one embedding per class with one fewer internal
/// edge: a non-disconnecting edge cut open, or a leaf vertex removed.
pub fn outer_cofaces_into(g: &GraphRef) -> Result<Vec<GraphicalMap>, MorphismError> {
    let mut out = Vec::new();
    if g.is_edge() {
        return Ok(out);
    }
    if g.is_star() {
        for x in 0..g.arc_count() {
            out.push(edge_inclusion(g, x)?);
        }
        return Ok(out);
    }
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    for e in g.internal_edges() {
        let key = EmbKey::Sub {
            vertices: all.clone(),
            cut: vec![e],
        };
        if let Ok(emb) = class_embedding(g, &key) {
            out.push(GraphicalMap::from_embedding(&emb)?);
        }
    }
    if g.vertex_count() >= 2 {
        for w in 0..g.vertex_count() {
            let incident: Vec<Edge> = g
                .internal_edges()
                .into_iter()
                .filter(|&(a, b)| g.attach(a) == Some(w) || g.attach(b) == Some(w))
                .collect();
            if incident.len() != 1 || !g.loops_at(w).is_empty() {
                continue;
            }
            let rest: Vec<usize> = all.iter().copied().filter(|&v| v != w).collect();
            let key = EmbKey::Sub {
                vertices: rest,
                cut: vec![],
            };
            let emb = class_embedding(g, &key)?;
            out.push(GraphicalMap::from_embedding(&emb)?);
        }
    }
    Ok(out)
}

/// `↕ → G` sending the first edge arc to `x`.
pub fn edge_inclusion(g: &GraphRef, x: usize) -> Result<GraphicalMap, MorphismError> {
    edge_inclusion_from(&Arc::new(FeynmanGraph::edge()), g, x)
}

/// As [`edge_inclusion`], from a given copy of the edge.
pub fn edge_inclusion_from(
    e: &GraphRef,
    g: &GraphRef,
    x: usize,
) -> Result<GraphicalMap, MorphismError> {
    if !e.is_edge() {
        return Err(MorphismError::InvalidMap("source is not the edge".into()));
    }
    GraphicalMap::new(e.clone(), g.clone(), vec![x, g.inv(x)], vec![])
}

fn is_star_key(t: &FeynmanGraph, k: &EmbKey) -> bool {
    match k {
        EmbKey::Sub { vertices, .. } if vertices.len() == 1 => *k == EmbKey::star(t, vertices[0]),
        _ => false,
    }
}

fn covers(t: &FeynmanGraph, k: &EmbKey) -> bool {
    match k {
        EmbKey::Edge(_) => t.is_edge(),
        EmbKey::Sub { vertices, cut } => vertices.len() == t.vertex_count() && cut.is_empty(),
    }
}

/// Which elementary kind `m` is, if any.
pub fn classify_elementary(m: &GraphicalMap) -> Option<ElementaryKind> {
    let (s, t) = (&m.source, &m.target);
    if s.is_edge() {
        return if t.is_edge() {
            Some(ElementaryKind::Isomorphism)
        } else if t.is_star() {
            Some(ElementaryKind::EdgeInclusion)
        } else {
            None
        };
    }
    if m.is_isomorphism() {
        return Some(ElementaryKind::Isomorphism);
    }
    let keys = m.keys();
    let stars = keys.iter().filter(|k| is_star_key(t, k)).count();
    let edges = keys.iter().filter(|k| k.is_edge()).count();
    let image = image_key(m).ok()?;
    if stars == keys.len() {
        let extra = t.internal_edges().len() as isize - s.internal_edges().len() as isize;
        return (extra == 1).then_some(ElementaryKind::OuterCofaceEmbedding);
    }
    if !covers(t, &image) {
        return None;
    }
    if edges == 1 && stars + 1 == keys.len() && s.vertex_count() == t.vertex_count() + 1 {
        return Some(ElementaryKind::Codegeneracy);
    }
    if edges == 0 && stars + 1 == keys.len() {
        let odd = m.phi1.iter().zip(keys).find(|(_, k)| !is_star_key(t, k))?.0;
        if odd.source.internal_edges().len() == 1 {
            return Some(ElementaryKind::InnerCoface);
        }
    }
    None
}

/// `φ = cofaces ∘ isomorphism ∘ codegeneracies`, each list in application
/// order.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub codegeneracies: Vec<GraphicalMap>,
    pub isomorphism: GraphicalMap,
    pub cofaces: Vec<GraphicalMap>,
}

impl Factorization {
    pub fn recompose(&self) -> Result<GraphicalMap, MorphismError> {
        let src = match self.codegeneracies.first() {
            Some(s) => s.source.clone(),
            None => self.isomorphism.source.clone(),
        };
        let mut m = GraphicalMap::identity(&src);
        for s in &self.codegeneracies {
            m = compose(s, &m)?;
        }
        m = compose(&self.isomorphism, &m)?;
        for c in &self.cofaces {
            m = compose(c, &m)?;
        }
        Ok(m)
    }

    pub fn steps(&self) -> impl Iterator<Item = &GraphicalMap> {
        self.codegeneracies
            .iter()
            .chain(std::iter::once(&self.isomorphism))
            .chain(&self.cofaces)
    }
}

/// Lifts `m: S → T` through an embedding `emb: M → T` whose image contains
/// the image of `m`. Every vertex of `S` must have a non-edge assignment.
pub fn lift_through(m: &GraphicalMap, emb: &Embedding) -> Result<GraphicalMap, MorphismError> {
    let (s, t, mg) = (&m.source, &m.target, &emb.source);
    let fail = |x: &str| MorphismError::FactorizationFailed(x.to_string());
    let mut vpre = vec![None; t.vertex_count()];
    for (k, &w) in emb.vertex_map.iter().enumerate() {
        vpre[w] = Some(k);
    }
    let mut apre = vec![None; t.arc_count()];
    for z in 0..mg.arc_count() {
        if mg.is_attached(z) {
            apre[emb.arc_map[z]] = Some(z);
        }
    }
    let mut arc_map = vec![usize::MAX; s.arc_count()];
    for x in 0..s.arc_count() {
        if s.is_attached(x) {
            arc_map[x] = apre[m.arc_map[x]].ok_or_else(|| fail("arc outside the image"))?;
        }
    }
    for x in 0..s.arc_count() {
        if !s.is_attached(x) {
            let y = arc_map[s.inv(x)];
            if y == usize::MAX {
                return Err(fail("edge source"));
            }
            arc_map[x] = mg.inv(y);
        }
    }
    for x in 0..s.arc_count() {
        if mg.inv(arc_map[x]) != arc_map[s.inv(x)] {
            return Err(fail("an edge of the image is cut in the embedding"));
        }
    }
    let mut keys = Vec::new();
    for k in m.keys() {
        let EmbKey::Sub { vertices, cut } = k else {
            return Err(fail("edge assignment"));
        };
        let mut wm = Vec::new();
        let mut in_w = vec![false; mg.vertex_count()];
        for &w in vertices {
            let y = vpre[w].ok_or_else(|| fail("vertex outside the image"))?;
            wm.push(y);
            in_w[y] = true;
        }
        wm.sort_unstable();
        let mut tin = vec![false; t.vertex_count()];
        for &w in vertices {
            tin[w] = true;
        }
        let cutset: HashSet<Edge> = cut.iter().copied().collect();
        let mut realized = HashSet::new();
        for (a, b) in t.internal_edges_among(&tin) {
            if cutset.contains(&(a, b)) {
                continue;
            }
            let (za, zb) = (apre[a].unwrap(), apre[b].unwrap());
            if mg.inv(za) != zb {
                return Err(fail("a realized edge is cut in the embedding"));
            }
            realized.insert(mg.edge_of(za));
        }
        let mcut = mg
            .internal_edges_among(&in_w)
            .into_iter()
            .filter(|e| !realized.contains(e))
            .collect();
        keys.push(EmbKey::Sub {
            vertices: wm,
            cut: mcut,
        });
    }
    GraphicalMap::from_keys(s.clone(), mg.clone(), arc_map, &keys)
}

/// Deletes a vertex sent to an edge: `m = m' ∘ s_v`.
fn peel(m: &GraphicalMap, v: usize) -> Result<(GraphicalMap, GraphicalMap), MorphismError> {
    let s = codegeneracy(&m.source, v)?;
    let src = &m.source;
    let t = &s.target;
    let kept: Vec<usize> = (0..src.arc_count())
        .filter(|&x| !src.nb(v).contains(&x))
        .collect();
    let arc_map: Vec<usize> = kept.iter().map(|&x| m.arc_map[x]).collect();
    let keys: Vec<EmbKey> = (0..src.vertex_count())
        .filter(|&x| x != v)
        .map(|x| m.keys()[x].clone())
        .collect();
    debug_assert_eq!(keys.len(), t.vertex_count());
    let rest = GraphicalMap::from_keys(t.clone(), m.target.clone(), arc_map, &keys)?;
    Ok((s, rest))
}

/// Factorizes `m` into codegeneracies, an isomorphism and cofaces (inner
/// cofaces first, then outer cofaces). The result recomposes to `m`.
pub fn factorize(m: &GraphicalMap) -> Result<Factorization, MorphismError> {
    let fail = |x: &str| MorphismError::FactorizationFailed(x.to_string());
    let t = m.target.clone();
    let mut codegeneracies = Vec::new();
    let mut cur = m.clone();
    while let Some(v) = cur.keys().iter().position(EmbKey::is_edge) {
        let (s, rest) = peel(&cur, v)?;
        codegeneracies.push(s);
        cur = rest;
    }
    let sp = cur.source.clone();
    let (isomorphism, cofaces) = if sp.is_edge() {
        if t.is_edge() {
            (cur.clone(), vec![])
        } else {
            let x = cur.arc_map[0];
            let w = t.attach(x).or_else(|| t.attach(t.inv(x))).unwrap();
            let star = class_embedding(&t, &EmbKey::star(&t, w))?;
            let pre = star
                .source
                .boundary()
                .into_iter()
                .chain((0..star.source.arc_count()).filter(|&z| star.source.is_attached(z)))
                .find(|&z| star.arc_map[z] == x)
                .ok_or_else(|| fail("edge image outside its star"))?;
            let inc = edge_inclusion_from(&sp, &star.source, pre)?;
            let mut cofaces = vec![inc];
            cofaces.extend(outer_chain(&t, &EmbKey::star(&t, w))?);
            (GraphicalMap::identity(&sp), cofaces)
        }
    } else {
        let key = image_key(&cur)?;
        let memb = class_embedding(&t, &key)?;
        let lifted = lift_through(&cur, &memb)?;
        let mg = memb.source.clone();
        // Edges of M blown up by the assignments, by arc name.
        let mut blown: Vec<(String, String)> = Vec::new();
        for emb in &lifted.phi1 {
            for (a, b) in emb.source.internal_edges() {
                let (za, zb) = (emb.arc_map[a], emb.arc_map[b]);
                blown.push((
                    mg.arc_name(za.min(zb)).to_string(),
                    mg.arc_name(za.max(zb)).to_string(),
                ));
            }
        }
        blown.sort();
        let mut chain = Vec::new();
        let mut y = mg.clone();
        let mut vtrack: Vec<usize> = (0..mg.vertex_count()).collect();
        for (a, _) in blown.iter().rev() {
            let ia = y.arc_id(a).unwrap();
            let c = contract_edge(&y, y.edge_of(ia))?;
            for v in vtrack.iter_mut() {
                *v = c.vertex_map[*v];
            }
            chain.push(c.coface);
            y = c.quotient;
        }
        chain.reverse();
        let theta_arcs = lifted
            .arc_map
            .iter()
            .map(|&z| y.arc_id(mg.arc_name(z)).ok_or_else(|| fail("arc contracted away")))
            .collect::<Result<Vec<_>, _>>()?;
        let theta_keys: Vec<EmbKey> = lifted
            .keys()
            .iter()
            .map(|k| EmbKey::star(&y, vtrack[k.vertices()[0]]))
            .collect();
        let theta = GraphicalMap::from_keys(sp.clone(), y.clone(), theta_arcs, &theta_keys)?;
        if !theta.is_isomorphism() {
            return Err(fail("middle map is not an isomorphism"));
        }
        let mut cofaces = chain;
        cofaces.extend(outer_chain(&t, &key)?);
        (theta, cofaces)
    };
    let f = Factorization {
        codegeneracies,
        isomorphism,
        cofaces,
    };
    if f.recompose()? != *m {
        return Err(fail("factors do not recompose to the map"));
    }
    Ok(f)
}

/// Outer cofaces from the cut graph of `key` up to all of `t`: reglue cut
/// edges, then attach neighbouring vertices one edge at a time.
fn outer_chain(t: &GraphRef, key: &EmbKey) -> Result<Vec<GraphicalMap>, MorphismError> {
    let EmbKey::Sub { vertices, cut } = key else {
        return Err(MorphismError::FactorizationFailed("edge key".into()));
    };
    let (mut w, mut c) = (vertices.clone(), cut.clone());
    let mut out = Vec::new();
    let mut cur = class_embedding(t, key)?;
    while !(w.len() == t.vertex_count() && c.is_empty()) {
        if !c.is_empty() {
            c.remove(0);
        } else {
            let mut in_w = vec![false; t.vertex_count()];
            for &v in &w {
                in_w[v] = true;
            }
            let (x, nv) = (0..t.arc_count())
                .filter(|&x| t.attach(x).is_some_and(|v| in_w[v]))
                .find_map(|x| t.attach(t.inv(x)).filter(|&v| !in_w[v]).map(|v| (x, v)))
                .ok_or_else(|| MorphismError::FactorizationFailed("image not connected".into()))?;
            let glue = t.edge_of(x);
            let old: HashSet<Edge> = t.internal_edges_among(&in_w).into_iter().collect();
            in_w[nv] = true;
            w.push(nv);
            w.sort_unstable();
            c = t
                .internal_edges_among(&in_w)
                .into_iter()
                .filter(|e| !old.contains(e) && *e != glue)
                .collect();
        }
        let next_key = EmbKey::Sub {
            vertices: w.clone(),
            cut: c.clone(),
        };
        let next = class_embedding(t, &next_key)?;
        let step = lift_through(&GraphicalMap::from_embedding(&cur)?, &next)?;
        out.push(step);
        cur = next;
    }
    // The last cut graph is a copy of `t`; retarget the final step.
    if let Some(last) = out.pop() {
        let fixed = GraphicalMap::from_keys(
            last.source.clone(),
            t.clone(),
            last.arc_map.iter().map(|&z| cur.arc_map[z]).collect(),
            &last
                .keys()
                .iter()
                .map(|k| EmbKey::star(t, cur.vertex_map[k.vertices()[0]]))
                .collect::<Vec<_>>(),
        )?;
        out.push(fixed);
    }
    Ok(out)
}

/// The map `☆_G → G` sending the single vertex to all of `G`.
pub fn graph_star_map(g: &GraphRef) -> Result<GraphicalMap, MorphismError> {
    let (star, image) = g.star_of_graph();
    let key = if g.is_edge() {
        EmbKey::Edge(g.edge_of(0))
    } else {
        EmbKey::Sub {
            vertices: (0..g.vertex_count()).collect(),
            cut: vec![],
        }
    };
    GraphicalMap::from_keys(Arc::new(star), g.clone(), image, &[key])
}
