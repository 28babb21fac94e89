use std::sync::Arc;

use itertools::Itertools;
use modgraph::corpus;
use modgraph::decoration::{
    boundary_profile, check_decoration, colourings, decoration_count, decorations, evaluate,
    evaluate_in_order, restrict, Decoration, Label,
};
use modgraph::elementary::{codegeneracy, graph_star_map};
use modgraph::morphism::DEFAULT_BUDGET;
use modgraph::operad::{
    builtin, materialize, profiles, truncate_genus, underlying_cyclic, ChargeOperad,
    ModularOperad, OperadRef, TableOperad, TensorOperad,
};
use modgraph::validate::{validate_modular_operad, ValidateOptions};
use modgraph::{compose, hom_set, FeynmanGraph, GraphRef};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn arc(g: FeynmanGraph) -> GraphRef {
    Arc::new(g)
}

fn opts(max_arity: usize) -> ValidateOptions {
    ValidateOptions {
        max_arity,
        ..ValidateOptions::default()
    }
}

#[test]
fn builtin_operads_validate() {
    for name in ["terminal", "terminal-swap", "charge", "charge-swap", "graded-charge"] {
        let p = builtin(name, 4).unwrap();
        let r = validate_modular_operad(p.as_ref(), &opts(4));
        assert!(r.valid, "{name}: {:?}", r.failures);
        assert!(r.instances_checked > 0);
    }
}

#[test]
fn tensor_operad_validates() {
    let p = TensorOperad::new(3);
    let r = validate_modular_operad(&p, &opts(3));
    assert!(r.valid, "{:?}", r.failures);
}

#[test]
fn xi_plus_one_is_still_a_modular_operad() {
    // Both sides of every axiom apply the same number of contractions.
    let p = builtin("charge-xi-plus-one", 4).unwrap();
    let r = validate_modular_operad(p.as_ref(), &opts(4));
    assert!(r.valid, "{:?}", r.failures);
}

#[test]
fn xi_parity_breaks_the_interchange() {
    let p = builtin("charge-xi-parity", 4).unwrap();
    let r = validate_modular_operad(p.as_ref(), &opts(4));
    assert!(!r.valid);
    assert!(r
        .failures
        .iter()
        .any(|f| f.axiom == "interchange-contract-compose"));
    assert!(!r.failures[0].instance.is_empty());
}

#[test]
fn table_round_trip_preserves_everything() {
    for name in ["charge-swap", "graded-charge", "charge-xi-parity"] {
        let p = builtin(name, 3).unwrap();
        let j = materialize(p.as_ref(), 3);
        let text = serde_json::to_string(&j).unwrap();
        let t = TableOperad::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(materialize(&t, 3), j);
        let a = validate_modular_operad(p.as_ref(), &opts(3)).valid;
        let b = validate_modular_operad(&t, &opts(3)).valid;
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn corrupted_table_is_rejected() {
    let p = builtin("charge", 3).unwrap();
    let mut j = materialize(p.as_ref(), 3);
    let entry = j
        .comp
        .iter_mut()
        .find(|c| c.left.split(',').count() == 2 && c.right.split(',').count() == 2)
        .unwrap();
    let row = entry.table.iter_mut().find(|r| r[0] == "1" && r[1] == "1").unwrap();
    row[2] = "1".into();
    let t = TableOperad::from_json(&j).unwrap();
    assert!(!validate_modular_operad(&t, &opts(3)).valid);
}

/// Every arc map into the colours commuting with the involutions.
fn oracle_colourings(p: &dyn ModularOperad, g: &FeynmanGraph) -> usize {
    (0..g.arc_count())
        .map(|_| 0..p.colour_count())
        .multi_cartesian_product()
        .filter(|k| (0..g.arc_count()).all(|a| k[g.inv(a)] == p.dagger(k[a])))
        .count()
        .max(usize::from(g.arc_count() == 0))
}

#[test]
fn decoration_counts_match_the_oracle() {
    for name in ["terminal", "terminal-swap", "charge", "charge-swap", "graded-charge"] {
        let p = builtin(name, 6).unwrap();
        for g in corpus::small_graphs() {
            assert_eq!(colourings(p.as_ref(), &g).len(), oracle_colourings(p.as_ref(), &g));
            let decs = decorations(p.as_ref(), &g);
            assert_eq!(decs.len(), decoration_count(p.as_ref(), &g));
            for d in &decs {
                check_decoration(p.as_ref(), &g, d).unwrap();
            }
            assert!(decs.iter().all_unique());
            if p.colour_count() == 1 && !g.is_edge() {
                let prod: usize = (0..g.vertex_count())
                    .map(|v| {
                        p.genus_range()
                            .map(|gen| p.entry_count(gen, &vec![0; g.arity(v)]))
                            .sum::<usize>()
                    })
                    .product();
                assert_eq!(decs.len(), prod);
            }
        }
    }
}

#[test]
fn decorations_of_edges_and_stars() {
    for name in ["terminal", "terminal-swap", "charge-swap"] {
        let p = builtin(name, 6).unwrap();
        let e = FeynmanGraph::edge();
        assert_eq!(decorations(p.as_ref(), &e).len(), p.colour_count());
        for n in 0..=4 {
            let total: usize = profiles(p.colour_count(), n)
                .iter()
                .map(|c| p.entry_count(0, c))
                .sum();
            assert_eq!(decorations(p.as_ref(), &FeynmanGraph::star(n)).len(), total);
        }
    }
    let t = builtin("terminal", 6).unwrap();
    assert_eq!(decorations(t.as_ref(), &corpus::first_figure()).len(), 1);
}

#[test]
fn evaluate_examples() {
    let p = ChargeOperad::new(6);
    let s = FeynmanGraph::star(3);
    for x in 0..2 {
        let d = Decoration {
            colouring: vec![0; 6],
            labels: vec![Label::new(x)],
        };
        assert_eq!(evaluate(&p, &s, &d).unwrap().1, Label::new(x));
    }
    let g = corpus::joined_stars(3, 3);
    let d = Decoration {
        colouring: vec![0; g.arc_count()],
        labels: vec![Label::new(1), Label::new(1)],
    };
    assert_eq!(evaluate(&p, &g, &d).unwrap().1, Label::new(0));
    let l = corpus::bouquet(1, 1);
    let d = Decoration {
        colouring: vec![0; l.arc_count()],
        labels: vec![Label::new(1)],
    };
    assert_eq!(evaluate(&p, &l, &d).unwrap().1, Label::new(1));
}

#[test]
fn evaluate_rejects_clashing_colours() {
    let p = ChargeOperad::dagger_swap(6);
    let g = corpus::joined_stars(2, 2);
    let d = Decoration {
        colouring: vec![0; g.arc_count()],
        labels: vec![Label::new(0); 2],
    };
    assert!(evaluate(&p, &g, &d).is_err());
}

#[test]
fn evaluate_of_charge_sums_labels() {
    let p = ChargeOperad::dagger_swap(6);
    for g in test_graphs() {
        for d in decorations(&p, &g) {
            let sum = d.labels.iter().map(|l| l.elem).sum::<usize>() % 2;
            let (prof, l) = evaluate(&p, &g, &d).unwrap();
            assert_eq!(l.elem, sum);
            assert_eq!(prof, boundary_profile(&g, &d.colouring));
        }
    }
}

fn test_graphs() -> Vec<FeynmanGraph> {
    let mut gs = corpus::small_graphs();
    gs.extend([
        corpus::cycle(3),
        corpus::bouquet(2, 0),
        corpus::bouquet(2, 1),
        corpus::joined_stars(3, 3),
        corpus::path(2),
    ]);
    gs.retain(|g| g.internal_edges().len() <= 3);
    gs
}

/// State sum over `{0,1}`-values on the edges, boundary values fixed.
fn tensor_oracle(g: &FeynmanGraph, d: &Decoration) -> usize {
    let bd = g.boundary();
    let internal = g.internal_edges();
    let mut out = 0;
    for y in 0..1usize << bd.len() {
        let mut total = 0;
        for z in 0..1usize << internal.len() {
            let mut val = vec![0; g.arc_count()];
            for (k, &b) in bd.iter().enumerate() {
                val[b] = (y >> k) & 1;
                val[g.inv(b)] = (y >> k) & 1;
            }
            for (k, &(a, b)) in internal.iter().enumerate() {
                val[a] = (z >> k) & 1;
                val[b] = (z >> k) & 1;
            }
            let prod: usize = (0..g.vertex_count())
                .map(|v| {
                    let idx: usize = g.nb(v).iter().enumerate().map(|(k, &a)| val[a] << k).sum();
                    (d.labels[v].elem >> idx) & 1
                })
                .product();
            total += prod;
        }
        out |= (total & 1) << y;
    }
    out
}

fn random_decoration(p: &dyn ModularOperad, g: &FeynmanGraph, rng: &mut StdRng) -> Decoration {
    let colouring = vec![0; g.arc_count()];
    let labels = (0..g.vertex_count())
        .map(|v| Label::new(rng.gen_range(0..p.entry_count(0, &vec![0; g.arity(v)]))))
        .collect();
    Decoration { colouring, labels }
}

#[test]
fn tensor_evaluation_matches_the_state_sum() {
    let p = TensorOperad::new(4);
    let mut rng = StdRng::seed_from_u64(7);
    for g in test_graphs() {
        if g.is_edge() || (0..g.vertex_count()).any(|v| g.arity(v) > 4) {
            continue;
        }
        for _ in 0..40 {
            let d = random_decoration(&p, &g, &mut rng);
            match evaluate(&p, &g, &d) {
                Ok((_, l)) => assert_eq!(l.elem, tensor_oracle(&g, &d), "{:?}", g.arc_names()),
                Err(_) => assert!(g.boundary().len() > 4),
            }
        }
    }
}

#[test]
fn evaluation_is_independent_of_elimination_order() {
    let charge: Vec<OperadRef> = vec![
        builtin("charge-swap", 6).unwrap(),
        builtin("graded-charge", 6).unwrap(),
    ];
    let tensor = TensorOperad::new(4);
    let mut rng = StdRng::seed_from_u64(11);
    for g in test_graphs() {
        let edges = g.internal_edges();
        let orders: Vec<Vec<_>> = edges.iter().copied().permutations(edges.len()).collect();
        for p in &charge {
            for d in decorations(p.as_ref(), &g) {
                let first = evaluate(p.as_ref(), &g, &d).ok();
                for o in &orders {
                    assert_eq!(evaluate_in_order(p.as_ref(), &g, &d, o).ok(), first);
                }
            }
        }
        if g.is_edge() || (0..g.vertex_count()).any(|v| g.arity(v) > 4) {
            continue;
        }
        for _ in 0..20 {
            let d = random_decoration(&tensor, &g, &mut rng);
            let first = evaluate(&tensor, &g, &d).ok();
            for o in &orders {
                let r = evaluate_in_order(&tensor, &g, &d, o).ok();
                if first.is_some() && r.is_some() {
                    assert_eq!(r, first);
                }
            }
        }
    }
}

/// `g` with its arcs stored in the order `perm`.
fn reorder_arcs(g: &FeynmanGraph, perm: &[usize]) -> FeynmanGraph {
    let arcs: Vec<&str> = perm.iter().map(|&a| g.arc_name(a)).collect();
    let pairs: Vec<(&str, &str)> = g
        .edges()
        .iter()
        .map(|&(a, b)| (g.arc_name(a), g.arc_name(b)))
        .collect();
    let attach: Vec<(&str, &str)> = perm
        .iter()
        .filter_map(|&a| g.attach(a).map(|v| (g.arc_name(a), g.vertex_name(v))))
        .collect();
    FeynmanGraph::new(&arcs, &pairs, g.vertex_names(), &attach).unwrap()
}

#[test]
fn evaluation_is_equivariant_under_boundary_relabelling() {
    let p = TensorOperad::new(4);
    let mut rng = StdRng::seed_from_u64(3);
    for g in [corpus::joined_stars(3, 2), corpus::bouquet(1, 2), corpus::path(3)] {
        for _ in 0..10 {
            let mut perm: Vec<usize> = (0..g.arc_count()).collect();
            for k in (1..perm.len()).rev() {
                perm.swap(k, rng.gen_range(0..=k));
            }
            let h = reorder_arcs(&g, &perm);
            let d = random_decoration(&p, &g, &mut rng);
            // Relabel each vertex for its new neighbourhood order.
            let labels = (0..g.vertex_count())
                .map(|v| {
                    let nb_h = h.nb(v);
                    let q: Vec<usize> = nb_h
                        .iter()
                        .map(|&a| g.nb(v).iter().position(|&x| x == perm[a]).unwrap())
                        .collect();
                    Label::new(p.act(0, &vec![0; q.len()], &q, d.labels[v].elem))
                })
                .collect();
            let dh = Decoration {
                colouring: vec![0; h.arc_count()],
                labels,
            };
            let (_, lg) = evaluate(&p, &g, &d).unwrap();
            let (_, lh) = evaluate(&p, &h, &dh).unwrap();
            let bg = g.boundary();
            let q: Vec<usize> = h
                .boundary()
                .iter()
                .map(|&b| bg.iter().position(|&x| x == perm[b]).unwrap())
                .collect();
            assert_eq!(lh.elem, p.act(0, &vec![0; q.len()], &q, lg.elem));
        }
    }
}

#[test]
fn restrict_along_identity_is_identity() {
    let p = ChargeOperad::dagger_swap(6);
    for g in test_graphs() {
        let g = arc(g);
        let id = modgraph::GraphicalMap::identity(&g);
        for d in decorations(&p, &g) {
            assert_eq!(restrict(&p, &id, &d).unwrap(), d);
        }
    }
}

#[test]
fn restrict_along_the_star_map_of_a_loop_contracts() {
    for n in 2..=5 {
        let p = TensorOperad::new(4);
        let g = arc(corpus::contracted_star(n));
        let m = graph_star_map(&g).unwrap();
        let mut rng = StdRng::seed_from_u64(n as u64);
        for _ in 0..10 {
            if n > 4 {
                break;
            }
            let d = random_decoration(&p, &g, &mut rng);
            let r = restrict(&p, &m, &d).unwrap();
            let (i, j) = (n - 2, n - 1);
            let xi = p.contract(0, &vec![0; n], i, j, d.labels[0].elem).unwrap();
            assert_eq!(r.labels, vec![Label::new(xi)]);
        }
        let c = ChargeOperad::new(6);
        for d in decorations(&c, &g) {
            let r = restrict(&c, &m, &d).unwrap();
            assert_eq!(r.labels, d.labels);
        }
    }
}

#[test]
fn restrict_along_a_codegeneracy_inserts_the_unit() {
    let g = arc(corpus::path(3));
    let s = codegeneracy(&g, 1).unwrap();
    for p in [builtin("charge-swap", 6).unwrap(), Arc::new(TensorOperad::new(4)) as OperadRef] {
        let mut rng = StdRng::seed_from_u64(5);
        let decs = if p.name() == "tensor" {
            (0..20).map(|_| random_decoration(p.as_ref(), &s.target, &mut rng)).collect()
        } else {
            decorations(p.as_ref(), &s.target)
        };
        for d in decs {
            let r = restrict(p.as_ref(), &s, &d).unwrap();
            let c = r.colouring[g.nb(1)[1]];
            assert_eq!(r.labels[1], Label::new(p.unit(c)));
            assert_eq!(r.labels[0], d.labels[0]);
            assert_eq!(r.labels[2], d.labels[1]);
            check_decoration(p.as_ref(), &g, &r).unwrap();
        }
    }
}

#[test]
fn restrict_is_functorial() {
    let graphs: Vec<GraphRef> = corpus::small_graphs()
        .into_iter()
        .filter(|g| g.vertex_count() <= 2)
        .map(arc)
        .collect();
    let charge = ChargeOperad::dagger_swap(6);
    let tensor = TensorOperad::new(4);
    let mut rng = StdRng::seed_from_u64(19);
    let mut pairs = 0;
    for (h, g, k) in graphs.iter().cartesian_product(&graphs).cartesian_product(&graphs).map(|((a, b), c)| (a, b, c)) {
        let phis = hom_set(h, g, DEFAULT_BUDGET).unwrap();
        let psis = hom_set(g, k, DEFAULT_BUDGET).unwrap();
        for (phi, psi) in phis.iter().take(6).cartesian_product(psis.iter().take(6)) {
            let Ok(comp) = compose(psi, phi) else { continue };
            pairs += 1;
            for d in decorations(&charge, k) {
                let lhs = restrict(&charge, &comp, &d).unwrap();
                let rhs = restrict(&charge, phi, &restrict(&charge, psi, &d).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
            if (0..k.vertex_count()).all(|v| k.arity(v) <= 4) && !k.is_edge() {
                for _ in 0..4 {
                    let d = random_decoration(&tensor, k, &mut rng);
                    let lhs = restrict(&tensor, &comp, &d).unwrap();
                    let rhs =
                        restrict(&tensor, phi, &restrict(&tensor, psi, &d).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
    assert!(pairs > 100, "{pairs}");
}

#[test]
fn truncation_and_underlying_cyclic() {
    let graded: OperadRef = Arc::new(ChargeOperad::graded(4, 2));
    let full = truncate_genus(graded.clone(), None);
    assert_eq!(materialize(full.as_ref(), 3), materialize(graded.as_ref(), 3));
    let t0 = truncate_genus(graded.clone(), Some(0));
    for n in 2..=4 {
        for (i, j) in (0..n).tuple_combinations() {
            for x in 0..2 {
                assert_eq!(t0.contract(0, &vec![0; n], i, j, x), None);
            }
        }
    }
    assert!(validate_modular_operad(t0.as_ref(), &opts(4)).valid);
    let t1 = truncate_genus(graded, Some(1));
    assert_eq!(t1.entry_count(2, &[0, 0]), 0);
    assert_eq!(t1.entry_count(1, &[0, 0]), 2);

    let term = builtin("terminal", 4).unwrap();
    let cyc = underlying_cyclic(term.clone());
    assert!(!cyc.has_contractions());
    for n in 0..=4 {
        assert_eq!(cyc.entry_count(0, &vec![0; n]), term.entry_count(0, &vec![0; n]));
    }
    assert!(validate_modular_operad(cyc.as_ref(), &opts(4)).valid);
}
