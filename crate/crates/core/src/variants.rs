//! Subcategories of `U`: the simply connected sieves `U₀ ⊂ U_cyc`, and the
//! stable category `U_st` of genus graphs.

use std::sync::Arc;

use itertools::Itertools;
use serde::Serialize;

use crate::elementary::{classify_elementary, ElementaryKind};
use crate::graph::{FeynmanGraph, GenusGraph};
use crate::morphism::{hom_set, GraphRef, GraphicalMap, MorphismError};

pub fn in_u0(g: &FeynmanGraph) -> bool {
    g.betti() == Ok(0)
}

pub fn in_ucyc(g: &FeynmanGraph) -> bool {
    in_u0(g) && !g.boundary().is_empty()
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveWitness {
    pub source: String,
    pub target: String,
    pub map: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveReport {
    pub holds: bool,
    pub targets: usize,
    pub maps_checked: usize,
    pub counterexample: Option<SieveWitness>,
}

/// Checks that `pred` is closed under precomposition: whenever `φ: G → T`
/// with `pred(T)`, also `pred(G)`. `G` ranges over `sources`, `T` over
/// `targets`; stops at the first counterexample.
pub fn verify_sieve(
    pred: impl Fn(&FeynmanGraph) -> bool,
    sources: &[FeynmanGraph],
    targets: &[FeynmanGraph],
    budget: usize,
) -> Result<SieveReport, MorphismError> {
    let mut report = SieveReport {
        holds: true,
        targets: 0,
        maps_checked: 0,
        counterexample: None,
    };
    let sources: Vec<GraphRef> = sources.iter().cloned().map(Arc::new).collect();
    for t in targets.iter().filter(|t| pred(t)) {
        report.targets += 1;
        let t = Arc::new(t.clone());
        for g in &sources {
            let homs = hom_set(g, &t, budget)?;
            report.maps_checked += homs.len();
            if !homs.is_empty() && !pred(g) {
                report.holds = false;
                report.counterexample = Some(SieveWitness {
                    source: g.canonical_code(),
                    target: t.canonical_code(),
                    map: 0,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// A graphical map between genus graphs.
#[derive(Clone, Debug)]
pub struct GenusMorphism {
    pub underlying: GraphicalMap,
    pub source_genus: Vec<u32>,
    pub target_genus: Vec<u32>,
}

impl GenusMorphism {
    pub fn source(&self) -> GenusGraph {
        GenusGraph::new((*self.underlying.source).clone(), self.source_genus.clone())
            .expect("genus lengths checked")
    }

    pub fn target(&self) -> GenusGraph {
        GenusGraph::new((*self.underlying.target).clone(), self.target_genus.clone())
            .expect("genus lengths checked")
    }
}

/// `g(v) = β₁(H_v) + Σ g′(w)` for every source vertex, where `φ₁(v): H_v → G′`.
pub fn validate_genus_morphism(m: &GenusMorphism) -> bool {
    let phi = &m.underlying;
    m.source_genus.len() == phi.source.vertex_count()
        && m.target_genus.len() == phi.target.vertex_count()
        && phi
            .phi1
            .iter()
            .zip(&m.source_genus)
            .all(|(f, &g)| f.genus(&m.target_genus) == g)
}

/// All genus functions on `g` with values in `0..=max_genus`.
pub fn genus_functions(g: &FeynmanGraph, max_genus: u32) -> Vec<Vec<u32>> {
    if g.vertex_count() == 0 {
        return vec![vec![]];
    }
    (0..g.vertex_count())
        .map(|_| 0..=max_genus)
        .multi_cartesian_product()
        .collect()
}

/// Every stable genus graph on `graphs` with vertex genera at most `max_genus`.
pub fn stable_samples(graphs: &[FeynmanGraph], max_genus: u32) -> Vec<GenusGraph> {
    graphs
        .iter()
        .filter(|g| !g.is_edge())
        .flat_map(|g| {
            genus_functions(g, max_genus)
                .into_iter()
                .map(move |gs| GenusGraph::new(g.clone(), gs).expect("lengths match"))
        })
        .filter(GenusGraph::is_stable)
        .collect()
}

/// The `U_st` morphisms `(G, g) → (G′, g′)`.
pub fn genus_homs(
    s: &GenusGraph,
    t: &GenusGraph,
    budget: usize,
) -> Result<Vec<GenusMorphism>, MorphismError> {
    let (h, g) = (Arc::new(s.graph.clone()), Arc::new(t.graph.clone()));
    Ok(hom_set(&h, &g, budget)?
        .into_iter()
        .map(|m| GenusMorphism {
            underlying: m,
            source_genus: s.genus.clone(),
            target_genus: t.genus.clone(),
        })
        .filter(validate_genus_morphism)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct StableReport {
    pub holds: bool,
    pub samples: usize,
    pub unstable_samples: usize,
    pub maps_checked: usize,
    pub codegeneracies: usize,
    pub witness: Option<SieveWitness>,
}

/// Enumerates `U_st` morphisms between all pairs of stable samples and
/// counts those classified as codegeneracies.
pub fn ust_codegeneracy_check(
    samples: &[GenusGraph],
    budget: usize,
) -> Result<StableReport, MorphismError> {
    let stable: Vec<&GenusGraph> = samples.iter().filter(|s| s.is_stable()).collect();
    let mut report = StableReport {
        holds: true,
        samples: stable.len(),
        unstable_samples: samples.len() - stable.len(),
        maps_checked: 0,
        codegeneracies: 0,
        witness: None,
    };
    for (s, t) in stable.iter().cartesian_product(&stable) {
        for (k, m) in genus_homs(s, t, budget)?.iter().enumerate() {
            report.maps_checked += 1;
            if classify_elementary(&m.underlying) == Some(ElementaryKind::Codegeneracy) {
                report.codegeneracies += 1;
                report.holds = false;
                report.witness.get_or_insert(SieveWitness {
                    source: s.graph.canonical_code(),
                    target: t.graph.canonical_code(),
                    map: k,
                });
            }
        }
    }
    Ok(report)
}

pub fn ust_has_no_codegeneracies(samples: &[GenusGraph], budget: usize) -> Result<bool, MorphismError> {
    Ok(ust_codegeneracy_check(samples, budget)?.holds)
}
