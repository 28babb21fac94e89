use std::collections::HashSet;
use std::sync::Arc;

use itertools::Itertools;
use modgraph::corpus;
use modgraph::elementary::{
    codegeneracies_out_of, codegeneracy, contract_edge, inner_cofaces_into, outer_cofaces_into,
};
use modgraph::morphism::{emb_classes, enumerate_embeddings, image_key, DEFAULT_BUDGET};
use modgraph::{
    classify_elementary, compose, factorize, hom_set, validate_embedding, validate_graphical_map,
    ElementaryKind, EmbKey, Embedding, FeynmanGraph, GraphRef, GraphicalMap,
};

fn arc(g: FeynmanGraph) -> GraphRef {
    Arc::new(g)
}

/// Raw maps `{a, a†} → A(G)` commuting with the involutions.
fn oracle_edge_maps(g: &FeynmanGraph) -> usize {
    let n = g.arc_count();
    (0..n)
        .cartesian_product(0..n)
        .filter(|&(x, y)| g.inv(x) == y && g.inv(y) == x)
        .count()
}

/// Raw automorphisms: bijections of the attached and of the unattached arcs
/// commuting with the involution and attachment.
fn oracle_automorphisms(g: &FeynmanGraph) -> usize {
    let att: Vec<usize> = (0..g.arc_count()).filter(|&a| g.is_attached(a)).collect();
    let free: Vec<usize> = (0..g.arc_count()).filter(|&a| !g.is_attached(a)).collect();
    let mut count = 0;
    for pa in att.iter().permutations(att.len()) {
        for pf in free.iter().permutations(free.len()) {
            let mut f = vec![0; g.arc_count()];
            for (k, &&a) in pa.iter().enumerate() {
                f[att[k]] = a;
            }
            for (k, &&a) in pf.iter().enumerate() {
                f[free[k]] = a;
            }
            if (0..g.arc_count()).all(|a| f[g.inv(a)] == g.inv(f[a])) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn hom_counts_from_the_edge_match_the_oracle() {
    let e = arc(FeynmanGraph::edge());
    assert_eq!(oracle_edge_maps(&e), 2);
    assert_eq!(hom_set(&e, &e, DEFAULT_BUDGET).unwrap().len(), 2);
    for n in 0..=6 {
        let s = arc(FeynmanGraph::star(n));
        let homs = hom_set(&e, &s, DEFAULT_BUDGET).unwrap();
        assert_eq!(homs.len(), oracle_edge_maps(&s));
        assert_eq!(homs.len(), 2 * n);
        assert_eq!(enumerate_embeddings(&e, &s, DEFAULT_BUDGET).unwrap().len(), 2 * n);
    }
}

#[test]
fn star_automorphisms_match_the_oracle() {
    for n in 0..=5 {
        let s = arc(FeynmanGraph::star(n));
        let oracle = oracle_automorphisms(&s);
        assert_eq!(oracle, (1..=n).product::<usize>());
        assert_eq!(s.isomorphisms(&s).len(), oracle);
        let isos = hom_set(&s, &s, DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .filter(GraphicalMap::is_isomorphism)
            .count();
        assert_eq!(isos, oracle);
    }
}

#[test]
fn every_hom_validates_and_is_duplicate_free() {
    let graphs: Vec<GraphRef> = corpus::small_graphs().into_iter().map(arc).collect();
    for h in &graphs {
        for g in &graphs {
            let homs = hom_set(h, g, DEFAULT_BUDGET).unwrap();
            let mut keys = HashSet::new();
            for m in &homs {
                validate_graphical_map(m).unwrap();
                assert!(keys.insert(m.map_key()));
            }
        }
    }
}

#[test]
fn star_inclusions_are_embeddings() {
    let g = arc(corpus::first_figure());
    for v in 0..g.vertex_count() {
        let (s, image) = g.star_of_vertex(v).unwrap();
        let e = Embedding {
            source: Arc::new(s),
            target: g.clone(),
            arc_map: image,
            vertex_map: vec![v],
        };
        validate_embedding(&e).unwrap();
        let all = enumerate_embeddings(&e.source, &g, DEFAULT_BUDGET).unwrap();
        assert_eq!(all.len(), (1..=g.arity(v)).product::<usize>());
        assert!(all.iter().all(|f| f.vertex_map == vec![v]));
    }
}

#[test]
fn five_star_embeds_in_the_contracted_five_star() {
    let s = arc(FeynmanGraph::star(5));
    let c = arc(corpus::contracted_star(5));
    let id = |n: &str| c.arc_id(n).unwrap();
    let arc_map: Vec<usize> = s
        .arc_names()
        .iter()
        .map(|n| match n.as_str() {
            "4†" => id("5"),
            "5†" => id("4"),
            other => id(other),
        })
        .collect();
    let e = Embedding {
        source: s.clone(),
        target: c.clone(),
        arc_map,
        vertex_map: vec![0],
    };
    validate_embedding(&e).unwrap();
    let distinct: HashSet<usize> = e.arc_map.iter().copied().collect();
    assert!(distinct.len() < s.arc_count());
    assert!(!enumerate_embeddings(&s, &c, DEFAULT_BUDGET).unwrap().is_empty());
}

#[test]
fn arity_mismatch_is_not_an_embedding() {
    let s3 = arc(FeynmanGraph::star(3));
    let s4 = arc(FeynmanGraph::star(4));
    let e = Embedding {
        source: s3.clone(),
        target: s4.clone(),
        arc_map: (0..6).collect(),
        vertex_map: vec![0],
    };
    let err = validate_embedding(&e).unwrap_err().to_string();
    assert!(err.contains("pullback"), "{err}");
}

#[test]
fn identity_and_codegeneracy_validate() {
    let s3 = arc(FeynmanGraph::star(3));
    let id = GraphicalMap::identity(&s3);
    validate_graphical_map(&id).unwrap();
    assert_eq!(classify_elementary(&id), Some(ElementaryKind::Isomorphism));

    let p = arc(corpus::path(3));
    let s = codegeneracy(&p, 1).unwrap();
    assert_eq!(classify_elementary(&s), Some(ElementaryKind::Codegeneracy));
    assert!(s.source.degree() > s.target.degree());
}

#[test]
fn boundaryless_source_cannot_go_entirely_to_edges() {
    let c = arc(corpus::cycle(2));
    let e = arc(FeynmanGraph::edge());
    let keys = vec![EmbKey::Edge((0, 1)), EmbKey::Edge((0, 1))];
    let arc_map = vec![0, 1, 0, 1];
    let err = GraphicalMap::from_keys(c.clone(), e.clone(), arc_map, &keys);
    assert!(err.is_err());
    assert!(hom_set(&c, &e, DEFAULT_BUDGET).unwrap().is_empty());
}

#[test]
fn compose_with_identity_is_neutral() {
    let graphs: Vec<GraphRef> = corpus::small_graphs().into_iter().map(arc).collect();
    for h in &graphs {
        for g in &graphs {
            for m in hom_set(h, g, DEFAULT_BUDGET).unwrap() {
                let left = compose(&GraphicalMap::identity(g), &m).unwrap();
                let right = compose(&m, &GraphicalMap::identity(h)).unwrap();
                assert_eq!(left, m);
                assert_eq!(right, m);
            }
        }
    }
}

#[test]
fn two_outer_cofaces_add_two_edges() {
    let g = arc(corpus::path(3));
    let d2 = outer_cofaces_into(&g).unwrap();
    let first = d2
        .iter()
        .find(|d| d.source.vertex_count() == 2)
        .unwrap()
        .clone();
    let d1 = outer_cofaces_into(&first.source).unwrap();
    let second = d1.iter().find(|d| d.source.vertex_count() == 1).unwrap();
    let both = compose(&first, second).unwrap();
    assert!(both.keys().iter().all(|k| k.vertices().len() == 1));
    assert_eq!(
        both.target.internal_edges().len(),
        both.source.internal_edges().len() + 2
    );
}

#[test]
fn codegeneracy_after_inner_coface_is_an_isomorphism() {
    let p = arc(corpus::build(&["u", "w"], &[("u", "w")], &["u", "u", "w"]));
    let c = contract_edge(&p, p.internal_edges()[0]).unwrap();
    let s = codegeneracy(&p, 1).unwrap();
    let both = compose(&s, &c.coface).unwrap();
    assert!(both.is_isomorphism());
    assert!(c.quotient.is_isomorphic(&s.target));
}

#[test]
fn elementary_enumerations() {
    let js = arc(corpus::joined_stars(2, 3));
    assert_eq!(inner_cofaces_into(&js).unwrap().len(), 1);
    for n in 0..=4 {
        let s = arc(FeynmanGraph::star(n));
        let outer = outer_cofaces_into(&s).unwrap();
        assert_eq!(outer.len(), 2 * n);
        assert!(outer
            .iter()
            .all(|d| classify_elementary(d) == Some(ElementaryKind::EdgeInclusion)));
    }
    assert!(codegeneracies_out_of(&arc(FeynmanGraph::star(3))).is_empty());
    for g in corpus::small_graphs().into_iter().map(arc) {
        for d in inner_cofaces_into(&g).unwrap() {
            assert_eq!(classify_elementary(&d), Some(ElementaryKind::InnerCoface));
            assert!(d.target.degree() > d.source.degree());
        }
        for d in outer_cofaces_into(&g).unwrap() {
            let k = classify_elementary(&d).unwrap();
            assert!(matches!(
                k,
                ElementaryKind::OuterCofaceEmbedding | ElementaryKind::EdgeInclusion
            ));
        }
        for s in codegeneracies_out_of(&g) {
            assert_eq!(classify_elementary(&s), Some(ElementaryKind::Codegeneracy));
            assert!(s.source.degree() > s.target.degree());
        }
    }
}

#[test]
fn loop_contraction_keeps_the_vertex() {
    let b = arc(corpus::bouquet(1, 2));
    let c = contract_edge(&b, b.internal_edges()[0]).unwrap();
    assert!(c.quotient.is_isomorphic(&FeynmanGraph::star(2)));
    assert_eq!(classify_elementary(&c.coface), Some(ElementaryKind::InnerCoface));
}

#[test]
fn outer_coface_figure_is_classified() {
    let g = arc(corpus::joined_stars(2, 3));
    let d = outer_cofaces_into(&g).unwrap();
    assert!(!d.is_empty());
    for m in &d {
        assert_eq!(classify_elementary(m), Some(ElementaryKind::OuterCofaceEmbedding));
    }
}

#[test]
fn factorization_round_trips_on_small_homs() {
    let graphs: Vec<GraphRef> = corpus::small_graphs().into_iter().map(arc).collect();
    let mut total = 0;
    for h in &graphs {
        for g in &graphs {
            for m in hom_set(h, g, DEFAULT_BUDGET).unwrap() {
                let f = factorize(&m).unwrap_or_else(|e| {
                    panic!("{e}: {}", serde_json::to_string(&m.to_json(true)).unwrap())
                });
                assert_eq!(f.recompose().unwrap(), m);
                assert!(f.isomorphism.is_isomorphism());
                for s in &f.codegeneracies {
                    assert_eq!(classify_elementary(s), Some(ElementaryKind::Codegeneracy));
                }
                for c in &f.cofaces {
                    let k = classify_elementary(c);
                    assert!(
                        matches!(
                            k,
                            Some(ElementaryKind::InnerCoface)
                                | Some(ElementaryKind::OuterCofaceEmbedding)
                                | Some(ElementaryKind::EdgeInclusion)
                        ),
                        "{k:?}"
                    );
                }
                total += 1;
            }
        }
    }
    assert!(total > 100);
}

#[test]
fn composition_is_associative_on_small_triples() {
    let graphs: Vec<GraphRef> = corpus::small_graphs()
        .into_iter()
        .filter(|g| g.vertex_count() <= 2)
        .map(arc)
        .collect();
    let mut checked = 0;
    for a in &graphs {
        for b in &graphs {
            let ab = hom_set(a, b, DEFAULT_BUDGET).unwrap();
            if ab.is_empty() {
                continue;
            }
            for c in &graphs {
                let bc = hom_set(b, c, DEFAULT_BUDGET).unwrap();
                for d in &graphs {
                    let cd = hom_set(c, d, DEFAULT_BUDGET).unwrap();
                    for f in ab.iter().take(4) {
                        for g in bc.iter().take(4) {
                            for h in cd.iter().take(4) {
                                let l = compose(h, &compose(g, f).unwrap()).unwrap();
                                let r = compose(&compose(h, g).unwrap(), f).unwrap();
                                assert_eq!(l, r);
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn no_graphical_map_realizes_the_star_assignments() {
    let g = arc(corpus::four_cycle_vw());
    let gp = arc(corpus::two_vertex_loop());
    let v = gp.vertex_id("v").unwrap();
    let w = gp.vertex_id("w").unwrap();
    let homs = hom_set(&g, &gp, DEFAULT_BUDGET).unwrap();
    let hit = homs.iter().any(|m| {
        (0..g.vertex_count()).all(|x| {
            let target = if g.vertex_name(x).starts_with('v') { v } else { w };
            m.keys()[x] == EmbKey::star(&gp, target)
        })
    });
    assert!(!hit);
}

#[test]
fn emb_classes_include_stars_and_edges() {
    let g = arc(corpus::first_figure());
    let classes = emb_classes(&g, DEFAULT_BUDGET).unwrap();
    for v in 0..g.vertex_count() {
        assert!(classes.iter().any(|c| c.key == EmbKey::star(&g, v)));
    }
    assert_eq!(classes.iter().filter(|c| c.key.is_edge()).count(), 5);
    for c in &classes {
        validate_embedding(&c.embedding).unwrap();
        assert_eq!(c.embedding.key(), c.key);
    }
}

#[test]
fn image_of_identity_is_everything() {
    for g in corpus::small_graphs().into_iter().map(arc) {
        let k = image_key(&GraphicalMap::identity(&g)).unwrap();
        match k {
            EmbKey::Edge(_) => assert!(g.is_edge()),
            EmbKey::Sub { vertices, cut } => {
                assert_eq!(vertices.len(), g.vertex_count());
                assert!(cut.is_empty());
            }
        }
    }
}
