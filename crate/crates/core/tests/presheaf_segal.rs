use std::sync::Arc;

use modgraph::corpus;
use modgraph::elementary::{inner_cofaces_into, outer_cofaces_into};
use modgraph::operad::{builtin, compare_operads, ModularOperad};
use modgraph::presheaf::{
    extract_modular_operad, has_unique_filler, horn, is_strict_inner_kan, is_strict_segal,
    nerve_presheaf, representable, segal_limit, segal_map, terminal_presheaf, Filler,
    FinPresheaf, PresheafError, Universe,
};
use modgraph::validate::{validate_modular_operad, ValidateOptions};
use modgraph::FeynmanGraph;

fn universe() -> Arc<Universe> {
    Arc::new(Universe::new(4, 4).unwrap())
}

fn at(u: &Universe, g: FeynmanGraph) -> usize {
    u.position(&g).expect("carried")
}

#[test]
fn universe_is_closed_under_stars_and_coface_sources() {
    let u = universe();
    assert_eq!(u.len(), 27);
    for g in u.graphs() {
        for v in 0..g.vertex_count() {
            assert!(u.position(&g.star_of_vertex(v).unwrap().0).is_some());
        }
        for f in inner_cofaces_into(g).unwrap().into_iter().chain(outer_cofaces_into(g).unwrap()) {
            assert!(u.position(&f.source).is_some());
        }
    }
}

fn nerve(name: &str, u: &Arc<Universe>) -> FinPresheaf {
    let p = builtin(name, u.max_arity).unwrap();
    nerve_presheaf(p.as_ref(), u.clone()).unwrap()
}

#[test]
fn representable_values() {
    let u = universe();
    let e = u.edge();
    let edge = Arc::new(FeynmanGraph::edge());
    assert_eq!(representable(&edge, u.clone()).unwrap().size(e), 2);
    for n in 0..=4 {
        let s = Arc::new(FeynmanGraph::star(n));
        let x = representable(&s, u.clone()).unwrap();
        assert_eq!(x.size(e), 2 * n);
        x.check_functoriality().unwrap();
    }
    // U[☆₀] is one point at ☆₀ and empty elsewhere, as is N⟨☆₀⟩: the free
    // operad on ☆₀ has no colours and the single operation v.
    let s0 = Arc::new(FeynmanGraph::star(0));
    let x = representable(&s0, u.clone()).unwrap();
    let here = at(&u, FeynmanGraph::star(0));
    for g in 0..u.len() {
        let expected = usize::from(g == here);
        assert_eq!(x.size(g), expected, "{}", u.label(g));
    }
}

#[test]
fn representable_of_a_loop_is_smaller_than_its_free_nerve() {
    // hom(☆₂, G) for G one vertex with a loop: two star inclusions and two
    // maps onto the loop edge. N⟨G⟩ at ☆₂ already contains id_a, id_b, v,
    // σ*v and v∘v, told apart by colour profile and vertex count.
    let u = universe();
    let g = Arc::new(corpus::bouquet(1, 0));
    let x = representable(&g, u.clone()).unwrap();
    let s2 = at(&u, FeynmanGraph::star(2));
    assert_eq!(x.size(s2), 4);
    let free: Vec<(&str, [&str; 2], usize)> = vec![
        ("id_a", ["b", "a"], 0),
        ("id_b", ["a", "b"], 0),
        ("v", ["a", "b"], 1),
        ("σ*v", ["b", "a"], 1),
        ("v∘v", ["a", "b"], 2),
    ];
    let distinct: std::collections::HashSet<_> = free.iter().map(|(_, p, k)| (*p, *k)).collect();
    assert_eq!(distinct.len(), free.len());
    assert!(x.size(s2) < distinct.len());
}

#[test]
fn nerve_values() {
    let u = universe();
    let e = u.edge();
    let t = nerve("terminal", &u);
    assert!((0..u.len()).all(|g| t.size(g) == 1));
    let c = nerve("charge", &u);
    assert_eq!(c.size(at(&u, FeynmanGraph::star(3))), 2);
    assert_eq!(c.size(e), 1);
    let s = nerve("terminal-swap", &u);
    assert_eq!(s.size(e), 2);
    for x in [t, c, s, nerve("charge-swap", &u)] {
        x.check_functoriality().unwrap();
    }
}

#[test]
fn segal_limits() {
    let u = universe();
    let c = nerve("charge", &u);
    for g in 0..u.len() {
        let gr = u.graph(g);
        if gr.vertex_count() == 0 {
            continue;
        }
        let prod: usize = (0..gr.vertex_count())
            .map(|v| c.size(u.position(&gr.star_of_vertex(v).unwrap().0).unwrap()))
            .product();
        assert_eq!(segal_limit(&c, g).unwrap().len(), prod, "{}", u.label(g));
    }
    let j = at(&u, corpus::joined_stars(3, 3));
    assert_eq!(segal_limit(&c, j).unwrap().len(), 4);
    let edge = Arc::new(FeynmanGraph::edge());
    let r = representable(&edge, u.clone()).unwrap();
    let e = u.edge();
    assert_eq!(segal_map(&r, e).unwrap(), vec![vec![0], vec![1]]);
}

fn corruptions(u: &Arc<Universe>) -> Vec<FinPresheaf> {
    let c = nerve("charge", u);
    let j = at(u, corpus::joined_stars(3, 3));
    let s4 = at(u, FeynmanGraph::star(4));
    // A decomposable 4-ary element: everything in ☆₄ is some x ∘ y.
    let star_elem = 1;
    vec![
        c.delete_element(j, 0).unwrap(),
        c.duplicate_orbit(j, 1),
        c.delete_element(s4, star_elem).unwrap(),
    ]
}

#[test]
fn nerves_are_strict_segal_and_strict_inner_kan() {
    let u = universe();
    for name in ["terminal", "charge", "terminal-swap", "charge-swap"] {
        let x = nerve(name, &u);
        let s = is_strict_segal(&x).unwrap();
        assert!(s.strict, "{name}: {:?}", s.failure);
        let k = is_strict_inner_kan(&x).unwrap();
        assert!(k.kan, "{name}: {:?}", k.failure);
        assert!(k.horns_checked > 10);
    }
    assert!(is_strict_segal(&terminal_presheaf(u.clone())).unwrap().strict);
}

#[test]
fn corrupted_presheaves_fail_both_checks() {
    let u = universe();
    for x in corruptions(&u) {
        x.check_functoriality().unwrap();
        let s = is_strict_segal(&x).unwrap();
        let k = is_strict_inner_kan(&x).unwrap();
        assert!(!s.strict, "{}", x.name);
        assert_eq!(s.strict, k.kan, "{}", x.name);
    }
}

#[test]
fn deleted_element_loses_its_filler() {
    let u = universe();
    let c = nerve("charge", &u);
    let j = at(&u, corpus::joined_stars(3, 3));
    let x = c.delete_element(j, 0).unwrap();
    let h = horn(&u, j, 0).unwrap();
    assert!(matches!(has_unique_filler(&x, &h), Filler::Missing(_)));
    assert_eq!(has_unique_filler(&c, &h), Filler::Unique);
    let d = c.duplicate_orbit(j, 1);
    assert!(matches!(has_unique_filler(&d, &h), Filler::Ambiguous(_)));
}

#[test]
fn extraction_round_trips() {
    let u = universe();
    for name in ["terminal", "charge", "terminal-swap", "charge-swap"] {
        let p = builtin(name, u.max_arity).unwrap();
        let x = nerve_presheaf(p.as_ref(), u.clone()).unwrap();
        let q = extract_modular_operad(&x).unwrap();
        compare_operads(p.as_ref(), &q, u.max_arity).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r = validate_modular_operad(&q, &ValidateOptions::default());
        assert!(r.valid, "{name}: {:?}", r.failures);
    }
    let t = extract_modular_operad(&terminal_presheaf(u.clone())).unwrap();
    let term = builtin("terminal", u.max_arity).unwrap();
    compare_operads(term.as_ref(), &t, u.max_arity).unwrap();
    let swap = extract_modular_operad(&nerve("terminal-swap", &u)).unwrap();
    assert_eq!((swap.dagger(0), swap.dagger(1)), (1, 0));
}

#[test]
fn extraction_refuses_non_segal_presheaves() {
    let u = universe();
    for x in corruptions(&u) {
        assert!(matches!(extract_modular_operad(&x), Err(PresheafError::NotSegal(_))));
    }
}

#[test]
fn presheaf_json_round_trip() {
    let u = universe();
    let x = nerve("charge-swap", &u);
    let j = x.to_json();
    let text = serde_json::to_string(&j).unwrap();
    let y = FinPresheaf::from_json(&serde_json::from_str(&text).unwrap(), u.clone()).unwrap();
    assert_eq!(y.to_json(), j);
    assert!(is_strict_segal(&y).unwrap().strict);
}
