//! Finite presheaves on graphical maps, truncated to a finite universe of
//! graphs: nerves, representables, Segal maps, inner horns and extraction
//! of a modular operad from a strictly Segal presheaf.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus;
use crate::decoration::{decorations, restrict, Decoration};
use crate::elementary::{inner_cofaces_into, outer_cofaces_into};
use crate::graph::{FeynmanGraph, GraphError, GraphIso, GraphJson};
use crate::morphism::{
    compose, hom_set, EmbKey, GraphRef, GraphicalMap, MapKey, MorphismError, DEFAULT_BUDGET,
};
use crate::operad::{comp_profile, contract_profile, Colour, Elem, ModularOperad, OperadError};

#[derive(Debug, thiserror::Error)]
pub enum PresheafError {
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph outside the carried range: {0}")]
    OutOfRange(String),
    #[error("not strictly Segal: {0}")]
    NotSegal(String),
    #[error("invalid presheaf: {0}")]
    Invalid(String),
}

/// Short stable hash of a graph's isomorphism class.
pub fn graph_hash(g: &FeynmanGraph) -> String {
    let digest = Sha256::digest(g.canonical_code().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// The carried graphs: one per isomorphism class of connected graphs with
/// `deg ≤ max_degree` and contraction width `≤ max_arity`, with every
/// graphical map between them. The range is closed under vertex stars and
/// under the sources of elementary cofaces.
pub struct Universe {
    pub max_degree: usize,
    pub max_arity: usize,
    graphs: Vec<GraphRef>,
    codes: HashMap<String, usize>,
    homs: Vec<Vec<Vec<GraphicalMap>>>,
    index: Vec<Vec<HashMap<MapKey, usize>>>,
    comp: OnceLock<Vec<Vec<Vec<Vec<usize>>>>>,
    horns: OnceLock<Result<Vec<Horn>, String>>,
    cores: OnceLock<Result<Vec<Option<SegalCore>>, String>>,
}

impl std::fmt::Debug for Universe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Universe")
            .field("max_degree", &self.max_degree)
            .field("max_arity", &self.max_arity)
            .field("graphs", &self.graphs.len())
            .finish()
    }
}

impl Universe {
    pub fn new(max_degree: usize, max_arity: usize) -> Result<Self, PresheafError> {
        let graphs: Vec<GraphRef> = corpus::universe(max_degree, max_arity)
            .into_iter()
            .map(Arc::new)
            .collect();
        let codes = graphs
            .iter()
            .enumerate()
            .map(|(k, g)| (g.canonical_code(), k))
            .collect();
        let mut homs = Vec::with_capacity(graphs.len());
        let mut index = Vec::with_capacity(graphs.len());
        for h in &graphs {
            let mut row = Vec::with_capacity(graphs.len());
            let mut irow = Vec::with_capacity(graphs.len());
            for g in &graphs {
                let maps = hom_set(h, g, DEFAULT_BUDGET)?;
                irow.push(maps.iter().enumerate().map(|(k, m)| (m.map_key(), k)).collect());
                row.push(maps);
            }
            homs.push(row);
            index.push(irow);
        }
        Ok(Self {
            max_degree,
            max_arity,
            graphs,
            codes,
            homs,
            index,
            comp: OnceLock::new(),
            horns: OnceLock::new(),
            cores: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graph(&self, g: usize) -> &GraphRef {
        &self.graphs[g]
    }

    pub fn graphs(&self) -> &[GraphRef] {
        &self.graphs
    }

    pub fn hom(&self, h: usize, g: usize) -> &[GraphicalMap] {
        &self.homs[h][g]
    }

    /// Position of the edge ↕.
    pub fn edge(&self) -> usize {
        0
    }

    /// Human-readable tag for a carried graph.
    pub fn label(&self, g: usize) -> String {
        let x = &self.graphs[g];
        format!(
            "G{g}(|V|={}, |iE|={}, |∂|={})",
            x.vertex_count(),
            x.internal_edges().len(),
            x.boundary().len()
        )
    }

    pub fn position(&self, g: &FeynmanGraph) -> Option<usize> {
        self.codes.get(&g.canonical_code()).copied()
    }

    pub fn identity_index(&self, g: usize) -> usize {
        let id = GraphicalMap::identity(&self.graphs[g]);
        self.index[g][g][&id.map_key()]
    }

    /// The carried representative of `h` with a fixed isomorphism onto it;
    /// the identity when `h` already is the representative.
    pub fn locate(&self, h: &GraphRef) -> Result<(usize, GraphicalMap), PresheafError> {
        let k = self
            .position(h)
            .ok_or_else(|| PresheafError::OutOfRange(format!("{:?}", h.arc_names())))?;
        let r = &self.graphs[k];
        let isos = h.isomorphisms(r);
        let same = |i: &GraphIso| {
            i.arc_map.iter().enumerate().all(|(a, &b)| a == b)
                && i.vertex_map.iter().enumerate().all(|(a, &b)| a == b)
        };
        let iso = isos
            .iter()
            .find(|i| same(i))
            .or(isos.first())
            .ok_or_else(|| PresheafError::Invalid("canonical code without isomorphism".into()))?;
        Ok((k, GraphicalMap::from_iso(h, r, iso)?))
    }

    /// Transports `φ: H → G` to the carried representatives.
    pub fn conjugate(&self, phi: &GraphicalMap) -> Result<(usize, usize, usize), PresheafError> {
        let (h, ah) = self.locate(&phi.source)?;
        let (g, ag) = self.locate(&phi.target)?;
        let m = compose(&ag, &compose(phi, &ah.inverse()?)?)?;
        let i = self.index[h][g]
            .get(&m.map_key())
            .copied()
            .ok_or_else(|| PresheafError::Invalid("transported map is missing".into()))?;
        Ok((h, g, i))
    }

    fn comp_table(&self) -> &Vec<Vec<Vec<Vec<usize>>>> {
        self.comp.get_or_init(|| {
            let n = self.graphs.len();
            (0..n)
                .map(|h| {
                    (0..n)
                        .map(|g| {
                            (0..n)
                                .map(|k| {
                                    let mut out = Vec::new();
                                    for phi in &self.homs[h][g] {
                                        for psi in &self.homs[g][k] {
                                            let c = compose(psi, phi).expect("carried maps compose");
                                            out.push(self.index[h][k][&c.map_key()]);
                                        }
                                    }
                                    out
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Index of `ψ_j ∘ φ_i` in `hom(h, k)`, for `φ_i: h → g`, `ψ_j: g → k`.
    pub fn composite(&self, h: usize, g: usize, k: usize, i: usize, j: usize) -> usize {
        self.comp_table()[h][g][k][i * self.homs[g][k].len() + j]
    }

    /// Every inner horn of every carried graph.
    pub fn inner_horns(&self) -> Result<&[Horn], PresheafError> {
        let r = self.horns.get_or_init(|| {
            let mut out = Vec::new();
            for g in 0..self.graphs.len() {
                let n = inner_cofaces_into(&self.graphs[g]).map_err(|e| e.to_string())?.len();
                for d in 0..n {
                    out.push(horn(self, g, d).map_err(|e| e.to_string())?);
                }
            }
            Ok(out)
        });
        r.as_deref().map_err(|e| PresheafError::Invalid(e.clone()))
    }

    fn segal_cores(&self) -> Result<&[Option<SegalCore>], PresheafError> {
        let r = self.cores.get_or_init(|| {
            (0..self.graphs.len())
                .map(|g| segal_core(self, g).map_err(|e| e.to_string()))
                .collect()
        });
        r.as_deref().map_err(|e| PresheafError::Invalid(e.clone()))
    }
}

/// A presheaf carried on a universe: a finite set per graph and, per
/// graphical map `φ: H → G`, the function `φ*: X_G → X_H`.
#[derive(Clone, Debug)]
pub struct FinPresheaf {
    pub name: String,
    universe: Arc<Universe>,
    elements: Vec<Vec<String>>,
    /// `action[h][g][i][x] = φ_i*(x)`.
    action: Vec<Vec<Vec<Vec<usize>>>>,
}

impl FinPresheaf {
    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn size(&self, g: usize) -> usize {
        self.elements[g].len()
    }

    pub fn element_name(&self, g: usize, x: usize) -> &str {
        &self.elements[g][x]
    }

    pub fn act(&self, h: usize, g: usize, i: usize, x: usize) -> usize {
        self.action[h][g][i][x]
    }

    /// `φ*(x)` for an arbitrary map between graphs of the range, elements
    /// read through [`Universe::locate`].
    pub fn pull(&self, phi: &GraphicalMap, x: usize) -> Result<usize, PresheafError> {
        let (h, g, i) = self.universe.conjugate(phi)?;
        Ok(self.action[h][g][i][x])
    }

    /// Table of `φ*` for an arbitrary map.
    pub fn pull_all(&self, phi: &GraphicalMap) -> Result<Vec<usize>, PresheafError> {
        let (h, g, i) = self.universe.conjugate(phi)?;
        Ok(self.action[h][g][i].clone())
    }

    /// Identities act trivially and `(ψ∘φ)* = φ*∘ψ*` on every composable
    /// pair; the first violation is returned.
    pub fn check_functoriality(&self) -> Result<usize, String> {
        let u = &self.universe;
        let n = u.len();
        let mut checked = 0;
        for g in 0..n {
            let id = u.identity_index(g);
            for x in 0..self.size(g) {
                if self.action[g][g][id][x] != x {
                    return Err(format!("identity of {} moves element {x}", u.label(g)));
                }
            }
        }
        for (h, g, k) in (0..n).cartesian_product(0..n).cartesian_product(0..n).map(|((a, b), c)| (a, b, c)) {
            for i in 0..u.hom(h, g).len() {
                for j in 0..u.hom(g, k).len() {
                    let c = u.composite(h, g, k, i, j);
                    for x in 0..self.size(k) {
                        checked += 1;
                        let lhs = self.action[h][k][c][x];
                        let rhs = self.action[h][g][i][self.action[g][k][j][x]];
                        if lhs != rhs {
                            return Err(format!(
                                "maps {} → {} → {}: element {x} gives {lhs} ≠ {rhs}",
                                u.label(h),
                                u.label(g),
                                u.label(k)
                            ));
                        }
                    }
                }
            }
        }
        Ok(checked)
    }

    /// Keeps the marked elements; the marking must be closed under the action.
    pub fn sub_presheaf(&self, keep: &[Vec<bool>], name: &str) -> Result<Self, PresheafError> {
        let u = &self.universe;
        let renum: Vec<Vec<Option<usize>>> = keep
            .iter()
            .map(|k| {
                let mut next = 0;
                k.iter()
                    .map(|&b| {
                        b.then(|| {
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let elements = (0..u.len())
            .map(|g| {
                (0..self.size(g))
                    .filter(|&x| keep[g][x])
                    .map(|x| self.elements[g][x].clone())
                    .collect()
            })
            .collect();
        let mut action = vec![vec![Vec::new(); u.len()]; u.len()];
        for h in 0..u.len() {
            for g in 0..u.len() {
                for i in 0..u.hom(h, g).len() {
                    let mut row = Vec::new();
                    for x in (0..self.size(g)).filter(|&x| keep[g][x]) {
                        let y = self.action[h][g][i][x];
                        row.push(renum[h][y].ok_or_else(|| {
                            PresheafError::Invalid("marking is not closed under restriction".into())
                        })?);
                    }
                    action[h][g].push(row);
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            universe: u.clone(),
            elements,
            action,
        })
    }

    /// Removes `x ∈ X_g` together with every element restricting to it.
    pub fn delete_element(&self, g: usize, x: usize) -> Result<Self, PresheafError> {
        let u = &self.universe;
        let mut keep: Vec<Vec<bool>> = (0..u.len()).map(|k| vec![true; self.size(k)]).collect();
        keep[g][x] = false;
        loop {
            let mut changed = false;
            for (h, k) in (0..u.len()).cartesian_product(0..u.len()) {
                for i in 0..u.hom(h, k).len() {
                    for y in 0..self.size(k) {
                        if keep[k][y] && !keep[h][self.action[h][k][i][y]] {
                            keep[k][y] = false;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.sub_presheaf(&keep, &format!("{} minus {}#{x}", self.name, u.label(g)))
    }

    /// Adds a second copy of the `Aut(g)`-orbit of `x ∈ X_g`. Copies restrict
    /// like the originals along non-invertible maps and are permuted among
    /// themselves by automorphisms.
    pub fn duplicate_orbit(&self, g: usize, x: usize) -> Self {
        let u = &self.universe;
        let maps = u.hom(g, g);
        let autos: Vec<usize> = (0..maps.len()).filter(|&i| maps[i].is_isomorphism()).collect();
        let orbit: Vec<usize> = autos
            .iter()
            .map(|&i| self.action[g][g][i][x])
            .sorted()
            .dedup()
            .collect();
        let base = self.size(g);
        let copy: HashMap<usize, usize> = orbit.iter().enumerate().map(|(k, &o)| (o, base + k)).collect();
        let mut out = self.clone();
        out.name = format!("{} with a doubled orbit at {}", self.name, u.label(g));
        for &o in &orbit {
            out.elements[g].push(format!("{}′", self.elements[g][o]));
        }
        for h in 0..u.len() {
            for i in 0..u.hom(h, g).len() {
                let auto = h == g && maps[i].is_isomorphism();
                for &o in &orbit {
                    let y = self.action[h][g][i][o];
                    out.action[h][g][i].push(if auto { copy[&y] } else { y });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> PresheafJson {
        let u = &self.universe;
        let hashes: Vec<String> = u.graphs.iter().map(|g| graph_hash(g)).collect();
        PresheafJson {
            name: self.name.clone(),
            max_degree: u.max_degree,
            max_arity: u.max_arity,
            values: (0..u.len())
                .map(|g| {
                    (
                        hashes[g].clone(),
                        ValueJson {
                            graph: GraphJson::from_graph(&u.graphs[g], None),
                            elements: self.elements[g].clone(),
                        },
                    )
                })
                .collect(),
            action: (0..u.len())
                .cartesian_product(0..u.len())
                .filter(|&(h, g)| !u.hom(h, g).is_empty())
                .map(|(h, g)| (format!("{}>{}", hashes[h], hashes[g]), self.action[h][g].clone()))
                .collect(),
        }
    }

    /// Rebuilds a presheaf over `universe`, which must match the recorded
    /// bounds; maps are indexed in the universe's enumeration order.
    pub fn from_json(j: &PresheafJson, universe: Arc<Universe>) -> Result<Self, PresheafError> {
        let u = &universe;
        if (u.max_degree, u.max_arity) != (j.max_degree, j.max_arity) {
            return Err(PresheafError::Invalid("universe bounds differ".into()));
        }
        let hashes: Vec<String> = u.graphs.iter().map(|g| graph_hash(g)).collect();
        let mut elements = Vec::with_capacity(u.len());
        for h in &hashes {
            let v = j
                .values
                .get(h)
                .ok_or_else(|| PresheafError::Invalid(format!("no value at graph {h}")))?;
            elements.push(v.elements.clone());
        }
        let mut action = vec![vec![Vec::new(); u.len()]; u.len()];
        for (h, g) in (0..u.len()).cartesian_product(0..u.len()) {
            let n = u.hom(h, g).len();
            if n == 0 {
                continue;
            }
            let key = format!("{}>{}", hashes[h], hashes[g]);
            let rows = j
                .action
                .get(&key)
                .ok_or_else(|| PresheafError::Invalid(format!("no action for {key}")))?;
            if rows.len() != n
                || rows.iter().any(|r| {
                    r.len() != elements[g].len() || r.iter().any(|&y| y >= elements[h].len())
                })
            {
                return Err(PresheafError::Invalid(format!("malformed action for {key}")));
            }
            action[h][g] = rows.clone();
        }
        Ok(Self {
            name: j.name.clone(),
            universe,
            elements,
            action,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueJson {
    pub graph: GraphJson,
    pub elements: Vec<String>,
}

/// Values keyed by graph hash; actions keyed `"h>g"`, one row per map in
/// enumeration order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafJson {
    pub name: String,
    pub max_degree: usize,
    pub max_arity: usize,
    pub values: BTreeMap<String, ValueJson>,
    pub action: BTreeMap<String, Vec<Vec<usize>>>,
}

fn decoration_name(p: &dyn ModularOperad, g: &FeynmanGraph, d: &Decoration) -> String {
    let col = g
        .edges()
        .iter()
        .map(|&(a, _)| format!("{}:{}", g.arc_name(a), p.colour_name(d.colouring[a])))
        .join(" ");
    let lab = (0..g.vertex_count())
        .map(|v| {
            let prof: Vec<Colour> = g.nb(v).iter().map(|&a| d.colouring[a]).collect();
            let l = d.labels[v];
            let name = p.elem_name(l.genus, &prof, l.elem);
            if p.graded() {
                format!("{}={}@{}", g.vertex_name(v), name, l.genus)
            } else {
                format!("{}={}", g.vertex_name(v), name)
            }
        })
        .join(" ");
    format!("[{col}] [{lab}]").replace(" ]", "]")
}

/// `NP`: decorations, acted on by [`restrict`].
pub fn nerve_presheaf(p: &dyn ModularOperad, universe: Arc<Universe>) -> Result<FinPresheaf, PresheafError> {
    let u = &universe;
    let decs: Vec<Vec<Decoration>> = u.graphs.iter().map(|g| decorations(p, g)).collect();
    let pos: Vec<HashMap<&Decoration, usize>> = decs
        .iter()
        .map(|ds| ds.iter().enumerate().map(|(k, d)| (d, k)).collect())
        .collect();
    let mut action = vec![vec![Vec::new(); u.len()]; u.len()];
    for (h, g) in (0..u.len()).cartesian_product(0..u.len()) {
        for m in u.hom(h, g) {
            let row = decs[g]
                .iter()
                .map(|d| {
                    let r = restrict(p, m, d)?;
                    pos[h].get(&r).copied().ok_or_else(|| {
                        PresheafError::Invalid(format!("restriction to {} is not a decoration", u.label(h)))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            action[h][g].push(row);
        }
    }
    let elements = decs
        .iter()
        .zip(&u.graphs)
        .map(|(ds, g)| ds.iter().map(|d| decoration_name(p, g, d)).collect())
        .collect();
    Ok(FinPresheaf {
        name: format!("N({})", p.name()),
        universe: universe.clone(),
        elements,
        action,
    })
}

/// `U[G] = hom(−, G)`, acted on by precomposition.
pub fn representable(g: &GraphRef, universe: Arc<Universe>) -> Result<FinPresheaf, PresheafError> {
    let u = &universe;
    let values: Vec<Vec<GraphicalMap>> = u
        .graphs
        .iter()
        .map(|h| hom_set(h, g, DEFAULT_BUDGET))
        .collect::<Result<_, _>>()?;
    let pos: Vec<HashMap<MapKey, usize>> = values
        .iter()
        .map(|ms| ms.iter().enumerate().map(|(k, m)| (m.map_key(), k)).collect())
        .collect();
    let mut action = vec![vec![Vec::new(); u.len()]; u.len()];
    for (h, k) in (0..u.len()).cartesian_product(0..u.len()) {
        for phi in u.hom(h, k) {
            let row = values[k]
                .iter()
                .map(|m| {
                    let c = compose(m, phi)?;
                    pos[h]
                        .get(&c.map_key())
                        .copied()
                        .ok_or_else(|| PresheafError::Invalid("composite missing from hom set".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            action[h][k].push(row);
        }
    }
    let elements = values
        .iter()
        .map(|ms| {
            ms.iter()
                .map(|m| {
                    m.arc_map
                        .iter()
                        .map(|&a| g.arc_name(a))
                        .join(",")
                })
                .collect()
        })
        .collect();
    Ok(FinPresheaf {
        name: format!("U[{}]", graph_hash(g)),
        universe: universe.clone(),
        elements,
        action,
    })
}

/// The terminal presheaf: one element everywhere.
pub fn terminal_presheaf(universe: Arc<Universe>) -> FinPresheaf {
    let u = &universe;
    let mut action = vec![vec![Vec::new(); u.len()]; u.len()];
    for (h, g) in (0..u.len()).cartesian_product(0..u.len()) {
        action[h][g] = vec![vec![0]; u.hom(h, g).len()];
    }
    FinPresheaf {
        name: "terminal".into(),
        universe: universe.clone(),
        elements: vec![vec!["*".into()]; u.len()],
        action,
    }
}

// ---------------------------------------------------------------------------
// Segal maps.

/// The spine of a carried graph: one star per vertex, and per internal edge
/// `[a, b]` the two edge inclusions `↕ → ☆_v`, `↕ → ☆_w` whose composites
/// into `G` agree.
#[derive(Clone, Debug)]
pub struct SegalCore {
    /// `(star representative, map index into G)` per vertex.
    pub stars: Vec<(usize, usize)>,
    /// `(v, edge map into star v, w, edge map into star w)`.
    pub edges: Vec<(usize, usize, usize, usize)>,
}

fn segal_core(u: &Universe, g: usize) -> Result<Option<SegalCore>, PresheafError> {
    let gr = u.graph(g).clone();
    if gr.vertex_count() == 0 {
        return Ok(None);
    }
    let mut stars = Vec::new();
    let mut star_graphs = Vec::new();
    for v in 0..gr.vertex_count() {
        let (star, image) = gr.star_of_vertex(v)?;
        let star = Arc::new(star);
        let m = GraphicalMap::from_keys(star.clone(), gr.clone(), image, &[EmbKey::star(&gr, v)])?;
        let (s, t, i) = u.conjugate(&m)?;
        debug_assert_eq!(t, g);
        stars.push((s, i));
        star_graphs.push(star);
    }
    let edge = u.graph(u.edge()).clone();
    // ↕ → ☆_v onto star arcs `(x, x†)`; star arc `2k` is `nb(v)[k]` and
    // `2k+1` its fresh partner.
    let into_star = |v: usize, x: usize, y: usize| -> Result<usize, PresheafError> {
        let m = GraphicalMap::from_keys(edge.clone(), star_graphs[v].clone(), vec![x, y], &[])?;
        Ok(u.conjugate(&m)?.2)
    };
    let mut edges = Vec::new();
    for (a, b) in gr.internal_edges() {
        let (v, w) = (gr.attach(a).unwrap(), gr.attach(b).unwrap());
        let ka = gr.nb(v).iter().position(|&x| x == a).unwrap();
        let kb = gr.nb(w).iter().position(|&x| x == b).unwrap();
        // Both composites send the edge's first arc to `a`.
        edges.push((v, into_star(v, 2 * ka, 2 * ka + 1)?, w, into_star(w, 2 * kb + 1, 2 * kb)?));
    }
    Ok(Some(SegalCore { stars, edges }))
}

fn spine_tuples(x: &FinPresheaf, core: &SegalCore) -> Vec<Vec<usize>> {
    let e = x.universe.edge();
    let sizes: Vec<usize> = core.stars.iter().map(|&(s, _)| x.size(s)).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(sizes.len());
    fn rec(
        x: &FinPresheaf,
        core: &SegalCore,
        e: usize,
        sizes: &[usize],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = cur.len();
        if k == sizes.len() {
            out.push(cur.clone());
            return;
        }
        for y in 0..sizes[k] {
            cur.push(y);
            let ok = core.edges.iter().all(|&(v, jv, w, jw)| {
                if v.max(w) != k {
                    return true;
                }
                let (sv, sw) = (core.stars[v].0, core.stars[w].0);
                x.act(e, sv, jv, cur[v]) == x.act(e, sw, jw, cur[w])
            });
            if ok {
                rec(x, core, e, sizes, cur, out);
            }
            cur.pop();
        }
    }
    rec(x, core, e, &sizes, &mut cur, &mut out);
    out
}

/// `X¹_G`: star values agreeing over ↕ along every internal edge. For ↕
/// itself this is `X_↕`.
pub fn segal_limit(x: &FinPresheaf, g: usize) -> Result<Vec<Vec<usize>>, PresheafError> {
    let cores = x.universe.segal_cores()?;
    Ok(match &cores[g] {
        None => (0..x.size(g)).map(|y| vec![y]).collect(),
        Some(core) => spine_tuples(x, core),
    })
}

/// The Segal map `X_G → X¹_G`, as the tuple of star restrictions of each
/// element.
pub fn segal_map(x: &FinPresheaf, g: usize) -> Result<Vec<Vec<usize>>, PresheafError> {
    let cores = x.universe.segal_cores()?;
    Ok((0..x.size(g))
        .map(|y| match &cores[g] {
            None => vec![y],
            Some(core) => core.stars.iter().map(|&(s, i)| x.act(s, g, i, y)).collect(),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckFailure {
    pub graph: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SegalReport {
    pub strict: bool,
    pub graphs_checked: usize,
    pub failure: Option<CheckFailure>,
}

/// Bijectivity of the Segal map at one graph.
pub fn segal_at(x: &FinPresheaf, g: usize) -> Result<Option<String>, PresheafError> {
    let images = segal_map(x, g)?;
    let limit: HashSet<Vec<usize>> = segal_limit(x, g)?.into_iter().collect();
    let mut seen: HashMap<&Vec<usize>, usize> = HashMap::new();
    for (y, t) in images.iter().enumerate() {
        if let Some(&z) = seen.get(t) {
            return Ok(Some(format!(
                "not injective: `{}` and `{}` have the same star restrictions",
                x.element_name(g, z),
                x.element_name(g, y)
            )));
        }
        if !limit.contains(t) {
            return Ok(Some(format!("element `{}` misses the spine", x.element_name(g, y))));
        }
        seen.insert(t, y);
    }
    if let Some(t) = limit.iter().sorted().find(|t| !seen.contains_key(t)) {
        return Ok(Some(format!("not surjective: no element over star values {t:?}")));
    }
    Ok(None)
}

pub fn is_strict_segal(x: &FinPresheaf) -> Result<SegalReport, PresheafError> {
    let u = x.universe.clone();
    for g in 0..u.len() {
        if let Some(reason) = segal_at(x, g)? {
            return Ok(SegalReport {
                strict: false,
                graphs_checked: g + 1,
                failure: Some(CheckFailure {
                    graph: u.label(g),
                    reason,
                }),
            });
        }
    }
    Ok(SegalReport {
        strict: true,
        graphs_checked: u.len(),
        failure: None,
    })
}

// ---------------------------------------------------------------------------
// Inner horns.

/// `Λ^δ[G]`: the subobject of `U[G]` generated by every elementary coface
/// into `G` except the inner coface `δ`. Generators are stored as maps from
/// carried graphs; `constraints` lists pairs of generator restrictions that
/// agree as maps into `G`.
#[derive(Clone, Debug)]
pub struct Horn {
    pub base: usize,
    pub omitted: GraphicalMap,
    /// `(source, map index into base)`.
    pub generators: Vec<(usize, usize)>,
    /// `(K, generator a, map K → source a, generator b, map K → source b)`.
    pub constraints: Vec<(usize, usize, usize, usize, usize)>,
}

pub fn horn(u: &Universe, g: usize, omitted: usize) -> Result<Horn, PresheafError> {
    let gr = u.graph(g);
    let inner = inner_cofaces_into(gr)?;
    let delta = inner
        .get(omitted)
        .cloned()
        .ok_or_else(|| PresheafError::Invalid(format!("no inner coface #{omitted}")))?;
    let mut generators = Vec::new();
    for (k, f) in inner.iter().enumerate() {
        if k != omitted {
            let (s, _, i) = u.conjugate(f)?;
            generators.push((s, i));
        }
    }
    for f in outer_cofaces_into(gr)? {
        let (s, _, i) = u.conjugate(&f)?;
        generators.push((s, i));
    }
    let generators: Vec<(usize, usize)> = generators.into_iter().unique().collect();
    let mut constraints = Vec::new();
    for k in 0..u.len() {
        let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (f, &(s, i)) in generators.iter().enumerate() {
            for phi in 0..u.hom(k, s).len() {
                groups.entry(u.composite(k, s, g, phi, i)).or_default().push((f, phi));
            }
        }
        for members in groups.values() {
            let (f0, p0) = members[0];
            for &(f1, p1) in &members[1..] {
                constraints.push((k, f0, p0, f1, p1));
            }
        }
    }
    Ok(Horn {
        base: g,
        omitted: delta,
        generators,
        constraints,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Filler {
    Unique,
    /// A compatible family with no filler.
    Missing(Vec<usize>),
    /// A compatible family with several fillers.
    Ambiguous(Vec<usize>),
}

/// Checks that every compatible family on the horn extends to exactly one
/// element of `X_G`.
pub fn has_unique_filler(x: &FinPresheaf, h: &Horn) -> Filler {
    let g = h.base;
    let mut fillers: HashMap<Vec<usize>, usize> = HashMap::new();
    for y in 0..x.size(g) {
        let fam: Vec<usize> = h.generators.iter().map(|&(s, i)| x.act(s, g, i, y)).collect();
        *fillers.entry(fam).or_default() += 1;
    }
    // Constraints become checkable once both generators are assigned.
    let mut by_last: Vec<Vec<(usize, usize, usize, usize, usize)>> = vec![Vec::new(); h.generators.len()];
    for &c in &h.constraints {
        by_last[c.1.max(c.3)].push(c);
    }
    let sizes: Vec<usize> = h.generators.iter().map(|&(s, _)| x.size(s)).collect();
    let mut cur = Vec::with_capacity(sizes.len());
    let mut verdict = Filler::Unique;
    fn rec(
        x: &FinPresheaf,
        h: &Horn,
        by_last: &[Vec<(usize, usize, usize, usize, usize)>],
        sizes: &[usize],
        fillers: &HashMap<Vec<usize>, usize>,
        cur: &mut Vec<usize>,
        verdict: &mut Filler,
    ) {
        if *verdict != Filler::Unique {
            return;
        }
        let k = cur.len();
        if k == sizes.len() {
            match fillers.get(cur.as_slice()).copied().unwrap_or(0) {
                1 => {}
                0 => *verdict = Filler::Missing(cur.clone()),
                _ => *verdict = Filler::Ambiguous(cur.clone()),
            }
            return;
        }
        for y in 0..sizes[k] {
            cur.push(y);
            let ok = by_last[k].iter().all(|&(kk, a, pa, b, pb)| {
                let (sa, sb) = (h.generators[a].0, h.generators[b].0);
                x.act(kk, sa, pa, cur[a]) == x.act(kk, sb, pb, cur[b])
            });
            if ok {
                rec(x, h, by_last, sizes, fillers, cur, verdict);
            }
            cur.pop();
        }
    }
    rec(x, h, &by_last, &sizes, &fillers, &mut cur, &mut verdict);
    verdict
}

#[derive(Clone, Debug, Serialize)]
pub struct KanReport {
    pub kan: bool,
    pub horns_checked: usize,
    pub failure: Option<CheckFailure>,
}

pub fn is_strict_inner_kan(x: &FinPresheaf) -> Result<KanReport, PresheafError> {
    let u = x.universe.clone();
    let horns = u.inner_horns()?;
    for (k, h) in horns.iter().enumerate() {
        let verdict = has_unique_filler(x, h);
        if verdict != Filler::Unique {
            let reason = match verdict {
                Filler::Missing(f) => format!("family {f:?} has no filler"),
                Filler::Ambiguous(f) => format!("family {f:?} has several fillers"),
                Filler::Unique => unreachable!(),
            };
            return Ok(KanReport {
                kan: false,
                horns_checked: k + 1,
                failure: Some(CheckFailure {
                    graph: u.label(h.base),
                    reason: format!("horn omitting the contraction onto {:?}: {reason}", h.omitted.source.vertex_names()),
                }),
            });
        }
    }
    Ok(KanReport {
        kan: true,
        horns_checked: horns.len(),
        failure: None,
    })
}

// ---------------------------------------------------------------------------
// Extraction.

/// A modular operad read off a strictly Segal presheaf: colours `X_↕`,
/// entries the elements of `X_{☆ₙ}` over each colour profile.
#[derive(Clone, Debug)]
pub struct ExtractedOperad {
    name: String,
    colours: Vec<String>,
    dagger: Vec<Colour>,
    max_arity: usize,
    entries: HashMap<Vec<Colour>, Vec<String>>,
    units: Vec<Elem>,
    sigma: HashMap<(Vec<Colour>, Vec<usize>), Vec<Elem>>,
    comp: HashMap<(Vec<Colour>, usize, Vec<Colour>, usize), Vec<Vec<Elem>>>,
    contract: HashMap<(Vec<Colour>, usize, usize), Vec<Elem>>,
}

/// Inclusion `☆ₙ → G` of a vertex, star arc `2k` onto `nb(v)[k]`.
fn vertex_inclusion(star: &GraphRef, g: &GraphRef, v: usize) -> Result<GraphicalMap, MorphismError> {
    let arc_map = g
        .nb(v)
        .iter()
        .flat_map(|&a| [a, g.inv(a)])
        .collect();
    GraphicalMap::from_keys(star.clone(), g.clone(), arc_map, &[EmbKey::star(g, v)])
}

/// `☆_N → G` onto all of `G`, star arc `2k` onto `i(∂G[k])`.
fn whole_inclusion(star: &GraphRef, g: &GraphRef) -> Result<GraphicalMap, MorphismError> {
    let arc_map = g
        .boundary()
        .iter()
        .flat_map(|&b| [g.inv(b), b])
        .collect();
    let key = EmbKey::Sub {
        vertices: (0..g.vertex_count()).collect(),
        cut: vec![],
    };
    GraphicalMap::from_keys(star.clone(), g.clone(), arc_map, &[key])
}

/// Two vertices of arities `n`, `m` with arcs in order, arc `i` of the first
/// joined to arc `j` of the second.
fn glued(sides: &[(usize, Option<usize>)]) -> GraphRef {
    let mut arcs = Vec::new();
    let mut attach = Vec::new();
    let mut pairs = Vec::new();
    let mut legs = Vec::new();
    for (v, &(n, at)) in sides.iter().enumerate() {
        for k in 0..n {
            let name = if Some(k) == at {
                if v == 0 { "e".to_string() } else { "e†".to_string() }
            } else {
                let a = format!("x{v}.{k}");
                legs.push(a.clone());
                a
            };
            attach.push((name.clone(), format!("v{v}")));
            arcs.push(name);
        }
    }
    for a in &legs {
        let b = format!("{a}†");
        arcs.push(b.clone());
        pairs.push((a.clone(), b));
    }
    pairs.push(("e".to_string(), "e†".to_string()));
    let vs: Vec<String> = (0..sides.len()).map(|v| format!("v{v}")).collect();
    Arc::new(FeynmanGraph::new(&arcs, &pairs, &vs, &attach).expect("gluing graph"))
}

/// One vertex of arity `n` whose arcs `i < j` form a loop.
fn looped(n: usize, i: usize, j: usize) -> GraphRef {
    let mut arcs = Vec::new();
    let mut attach = Vec::new();
    let mut pairs = Vec::new();
    let mut legs = Vec::new();
    for k in 0..n {
        let name = if k == i {
            "p".to_string()
        } else if k == j {
            "q".to_string()
        } else {
            let a = format!("x{k}");
            legs.push(a.clone());
            a
        };
        attach.push((name.clone(), "v".to_string()));
        arcs.push(name);
    }
    for a in &legs {
        let b = format!("{a}†");
        arcs.push(b.clone());
        pairs.push((a.clone(), b));
    }
    pairs.push(("p".to_string(), "q".to_string()));
    Arc::new(FeynmanGraph::new(&arcs, &pairs, &["v"], &attach).expect("loop graph"))
}

/// Reads a modular operad off a strictly Segal presheaf: colours from `X_↕`
/// with the dagger given by its nontrivial automorphism, units from the
/// maps `☆₂ → ↕`, `∘` and `ξ` by inverting the Segal map on the two-star
/// and one-loop graphs and restricting along `☆_G → G`.
pub fn extract_modular_operad(x: &FinPresheaf) -> Result<ExtractedOperad, PresheafError> {
    let report = is_strict_segal(x)?;
    if let Some(f) = report.failure {
        return Err(PresheafError::NotSegal(format!("{}: {}", f.graph, f.reason)));
    }
    let u = x.universe.clone();
    let e = u.edge();
    let edge = u.graph(e).clone();
    let nc = x.size(e);
    let swap = (0..u.hom(e, e).len())
        .find(|&i| u.hom(e, e)[i].arc_map == vec![1, 0])
        .ok_or_else(|| PresheafError::Invalid("↕ has no swap".into()))?;
    let dagger: Vec<Colour> = (0..nc).map(|c| x.act(e, e, swap, c)).collect();
    let colours: Vec<String> = (0..nc).map(|c| x.element_name(e, c).to_string()).collect();
    let max_arity = u.max_arity;

    // Entries over each profile, as elements of the standard stars.
    let stars: Vec<GraphRef> = (0..=max_arity).map(|n| Arc::new(FeynmanGraph::star(n))).collect();
    let mut profile_of: Vec<Vec<Vec<Colour>>> = Vec::new();
    let mut position: Vec<Vec<usize>> = Vec::new();
    let mut members: HashMap<Vec<Colour>, Vec<usize>> = HashMap::new();
    for (n, s) in stars.iter().enumerate() {
        let (rep, _) = u.locate(s)?;
        let incl: Vec<Vec<usize>> = (0..n)
            .map(|k| {
                let m = GraphicalMap::from_keys(
                    edge.clone(),
                    s.clone(),
                    vec![2 * k, 2 * k + 1],
                    &[],
                )?;
                x.pull_all(&m)
            })
            .collect::<Result<_, PresheafError>>()?;
        let profs: Vec<Vec<Colour>> = (0..x.size(rep))
            .map(|y| incl.iter().map(|t| t[y]).collect())
            .collect();
        let mut pos = vec![0; x.size(rep)];
        for (y, c) in profs.iter().enumerate() {
            let list = members.entry(c.clone()).or_default();
            pos[y] = list.len();
            list.push(y);
        }
        profile_of.push(profs);
        position.push(pos);
    }
    let entries: HashMap<Vec<Colour>, Vec<String>> = members
        .iter()
        .map(|(c, ys)| {
            let rep = u.locate(&stars[c.len()]).map(|r| r.0).unwrap_or(0);
            (c.clone(), ys.iter().map(|&y| x.element_name(rep, y).to_string()).collect())
        })
        .collect();

    // Σ on each standard star.
    let mut sigma = HashMap::new();
    for (n, s) in stars.iter().enumerate() {
        for p in (0..n).permutations(n) {
            let arc_map: Vec<usize> = (0..2 * n).map(|a| 2 * p[a / 2] + a % 2).collect();
            let m = GraphicalMap::from_iso(s, s, &GraphIso { arc_map, vertex_map: vec![0] })?;
            let t = x.pull_all(&m)?;
            for (c, ys) in members.iter().filter(|(c, _)| c.len() == n) {
                let row = ys.iter().map(|&y| position[n][t[y]]).collect();
                sigma.insert((c.clone(), p.clone()), row);
            }
        }
    }

    // Units from ☆₂ → ↕.
    let mut units = Vec::with_capacity(nc);
    for c in 0..nc {
        let want = vec![dagger[c], c];
        let mut found = None;
        for m in hom_set(&stars[2], &edge, DEFAULT_BUDGET)? {
            let y = x.pull(&m, c)?;
            if profile_of[2][y] == want {
                found = Some(position[2][y]);
                break;
            }
        }
        units.push(found.ok_or_else(|| PresheafError::Invalid(format!("no unit for colour {c}")))?);
    }

    // ∘ through two stars joined by one edge.
    let mut comp: HashMap<(Vec<Colour>, usize, Vec<Colour>, usize), Vec<Vec<Elem>>> = HashMap::new();
    for n in 1..=max_arity {
        for m in 1..=max_arity {
            if n + m - 2 > max_arity {
                continue;
            }
            for (i, j) in (0..n).cartesian_product(0..m) {
                let k = glued(&[(n, Some(i)), (m, Some(j))]);
                let (rk, _) = u.locate(&k)?;
                let left = x.pull_all(&vertex_inclusion(&stars[n], &k, 0)?)?;
                let right = x.pull_all(&vertex_inclusion(&stars[m], &k, 1)?)?;
                let whole = x.pull_all(&whole_inclusion(&stars[n + m - 2], &k)?)?;
                for z in 0..x.size(rk) {
                    let (a, b, r) = (left[z], right[z], whole[z]);
                    let (c, d) = (&profile_of[n][a], &profile_of[m][b]);
                    let key = (c.clone(), i, d.clone(), j);
                    let table = comp.entry(key).or_insert_with(|| {
                        vec![vec![usize::MAX; members[d].len()]; members[c].len()]
                    });
                    table[position[n][a]][position[m][b]] = position[n + m - 2][r];
                    if profile_of[n + m - 2][r] != comp_profile(c, i, d, j) {
                        return Err(PresheafError::Invalid("∘ lands in the wrong profile".into()));
                    }
                }
            }
        }
    }
    // ξ through one loop.
    let mut contract = HashMap::new();
    for n in 2..=max_arity {
        for (i, j) in (0..n).tuple_combinations() {
            let l = looped(n, i, j);
            let (rl, _) = u.locate(&l)?;
            let star = x.pull_all(&vertex_inclusion(&stars[n], &l, 0)?)?;
            let whole = x.pull_all(&whole_inclusion(&stars[n - 2], &l)?)?;
            for z in 0..x.size(rl) {
                let (a, r) = (star[z], whole[z]);
                let c = &profile_of[n][a];
                let row = contract
                    .entry((c.clone(), i, j))
                    .or_insert_with(|| vec![usize::MAX; members[c].len()]);
                row[position[n][a]] = position[n - 2][r];
                if profile_of[n - 2][r] != contract_profile(c, i, j) {
                    return Err(PresheafError::Invalid("ξ lands in the wrong profile".into()));
                }
            }
        }
    }
    Ok(ExtractedOperad {
        name: format!("extract({})", x.name),
        colours,
        dagger,
        max_arity,
        entries,
        units,
        sigma,
        comp,
        contract,
    })
}

impl ModularOperad for ExtractedOperad {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn colour_count(&self) -> usize {
        self.colours.len()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.colours[c].clone()
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.dagger[c]
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn max_genus(&self) -> Option<u32> {
        None
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        if genus > 0 {
            return 0;
        }
        self.entries.get(profile).map_or(0, Vec::len)
    }
    fn elem_name(&self, _: u32, profile: &[Colour], x: Elem) -> String {
        self.entries[profile][x].clone()
    }
    fn act(&self, _: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem {
        self.sigma[&(profile.to_vec(), perm.to_vec())][x]
    }
    fn unit(&self, c: Colour) -> Elem {
        self.units[c]
    }
    fn compose(
        &self,
        _: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        _: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        let t = self.comp.get(&(c.to_vec(), i, d.to_vec(), j))?;
        let z = t[x][y];
        (z != usize::MAX).then_some(z)
    }
    fn contract(&self, _: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem> {
        let t = self.contract.get(&(c.to_vec(), i, j))?;
        let z = t[x];
        (z != usize::MAX).then_some(z)
    }
}
