use std::collections::BTreeSet;

use itertools::Itertools;
use modgraph::profinite::*;
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Compatible tuples by filtering the whole product.
fn limit_oracle(sys: &InverseSystem) -> Vec<Vec<usize>> {
    sys.sizes
        .iter()
        .map(|&n| 0..n)
        .multi_cartesian_product()
        .filter(|t| {
            sys.maps
                .iter()
                .all(|(i, j, f)| f[t[*i]] == t[*j])
        })
        .collect()
}

/// Normal subgroups by testing every subset.
fn normal_oracle(g: &FiniteGroup) -> Vec<BTreeSet<usize>> {
    let n = g.order();
    let mut out: Vec<BTreeSet<usize>> = (0u64..1 << n)
        .map(|mask| (0..n).filter(|&k| mask >> k & 1 == 1).collect::<BTreeSet<usize>>())
        .filter(|s| {
            s.contains(&g.identity())
                && s.iter().all(|&a| s.iter().all(|&b| s.contains(&g.mul(a, g.inv(b)))))
                && s.iter().all(|&a| (0..n).all(|x| s.contains(&g.mul(g.mul(x, a), g.inv(x)))))
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn group_corpus() -> Vec<(&'static str, FiniteGroup)> {
    let c = FiniteGroup::cyclic;
    vec![
        ("Z1", c(1)),
        ("Z2", c(2)),
        ("Z3", c(3)),
        ("Z4", c(4)),
        ("Z2xZ2", c(2).product(&c(2))),
        ("Z6", c(6)),
        ("S3", FiniteGroup::symmetric(3)),
        ("Z8", c(8)),
        ("Z2xZ4", c(2).product(&c(4))),
        ("Z2^3", c(2).product(&c(2)).product(&c(2))),
        ("D4", FiniteGroup::dihedral(4)),
        ("Q8", FiniteGroup::quaternion()),
        ("D5", FiniteGroup::dihedral(5)),
        ("Z12", c(12)),
        ("A4", FiniteGroup::alternating4()),
        ("D6", FiniteGroup::dihedral(6)),
        ("Z3xS3", c(3).product(&FiniteGroup::symmetric(3))),
        ("Z2xZ12", c(2).product(&c(12))),
        ("S4", FiniteGroup::symmetric(4)),
    ]
}

#[test]
fn small_limits() {
    let sys = InverseSystem {
        levels: vec!["Z/4".into(), "Z/2".into()],
        sizes: vec![4, 2],
        maps: vec![(0, 1, vec![0, 1, 0, 1])],
        groups: None,
    };
    sys.validate().unwrap();
    let lim = sys.limit();
    assert_eq!(lim, vec![vec![0, 0], vec![1, 1], vec![2, 0], vec![3, 1]]);
    assert_eq!(lim, limit_oracle(&sys));

    let single = InverseSystem {
        levels: vec!["X".into()],
        sizes: vec![5],
        maps: vec![],
        groups: None,
    };
    single.validate().unwrap();
    assert_eq!(single.limit(), (0..5).map(|x| vec![x]).collect::<Vec<_>>());
}

#[test]
fn divisor_towers() {
    for n in [1, 2, 6, 12, 30] {
        let t = InverseSystem::divisor_tower(n);
        t.validate().unwrap();
        let lim = t.limit();
        assert_eq!(lim.len(), n);
        assert_eq!(lim, limit_oracle(&t));
    }
}

#[test]
fn invalid_systems_are_rejected() {
    let mut t = InverseSystem::divisor_tower(4);
    // φ_(Z/4, Z/2) altered so the triangle through Z/1 still holds but the
    // homomorphism property fails.
    let k = t.maps.iter().position(|(i, j, _)| (*i, *j) == (2, 1)).unwrap();
    t.maps[k].2 = vec![0, 0, 1, 1];
    assert!(t.validate().is_err());
    let mut u = InverseSystem::divisor_tower(4);
    u.maps.retain(|(i, j, _)| (*i, *j) != (2, 0));
    assert!(matches!(u.validate(), Err(ProfiniteError::InvalidSystem(_))));
    let disconnected = InverseSystem {
        levels: vec!["A".into(), "B".into()],
        sizes: vec![1, 1],
        maps: vec![],
        groups: None,
    };
    assert!(disconnected.validate().is_err());
}

#[test]
fn limit_shrinks_as_constraints_are_added() {
    let t = InverseSystem::divisor_tower(12);
    let mut loose = t.clone();
    let mut prev = limit_oracle(&loose).len();
    while loose.maps.pop().is_some() {
        let now = limit_oracle(&loose).len();
        assert!(now >= prev);
        prev = now;
    }
    // Levels below the top are determined by it and do not change the limit.
    for n in [2, 4, 8] {
        assert_eq!(InverseSystem::divisor_tower(n).limit().len(), n);
    }
}

#[test]
fn groups_in_the_corpus_are_what_they_claim() {
    let q = FiniteGroup::quaternion();
    assert_eq!(q.order(), 8);
    assert!(!q.is_abelian());
    let order_two = (0..8).filter(|&a| a != q.identity() && q.mul(a, a) == q.identity()).count();
    assert_eq!(order_two, 1);
    assert_eq!(FiniteGroup::symmetric(4).order(), 24);
    assert_eq!(FiniteGroup::alternating4().order(), 12);
    assert_eq!(FiniteGroup::dihedral(6).order(), 12);
    assert!(!FiniteGroup::dihedral(4).is_abelian());
    for (name, g) in group_corpus() {
        assert!(g.order() <= 24, "{name}");
        FiniteGroup::new(g.table().to_vec()).unwrap();
    }
}

#[test]
fn normal_subgroups_match_brute_force() {
    for (name, g) in group_corpus() {
        if g.order() <= 16 {
            assert_eq!(g.normal_subgroups(), normal_oracle(&g), "{name}");
        }
    }
    let counts = [
        (FiniteGroup::symmetric(4), 4),
        (FiniteGroup::alternating4(), 3),
        (FiniteGroup::symmetric(3), 3),
        (FiniteGroup::quaternion(), 6),
        (FiniteGroup::dihedral(4), 6),
        (FiniteGroup::cyclic(12), 6),
    ];
    for (g, k) in counts {
        assert_eq!(g.normal_subgroups().len(), k);
    }
}

#[test]
fn completion_of_a_finite_group_is_itself() {
    for (name, g) in group_corpus() {
        let (sys, _) = InverseSystem::quotient_system(&g);
        sys.validate().unwrap();
        assert_eq!(sys.limit().len(), g.order(), "{name}");
        assert!(completion_is_identity(&g), "{name}");
    }
}

#[test]
fn non_groups_are_rejected() {
    assert!(FiniteGroup::new(vec![vec![0, 1], vec![1, 1]]).is_err());
    assert!(FiniteGroup::new(vec![vec![1, 0], vec![0, 0]]).is_err());
    let big: Vec<Vec<usize>> = (0..65).map(|a| (0..65).map(|b| (a + b) % 65).collect()).collect();
    assert!(matches!(FiniteGroup::new(big), Err(ProfiniteError::TooLarge(65))));
}

#[test]
fn zhat_residues() {
    let l = [1, 2, 3, 4, 6, 12];
    let five = ProfiniteInt::from_int(5, &l).unwrap();
    assert_eq!(five.residues(), &[0, 1, 2, 1, 5, 5]);
    let sum = ProfiniteInt::from_int(7, &l)
        .unwrap()
        .add(&ProfiniteInt::from_int(6, &l).unwrap())
        .unwrap();
    assert_eq!(sum, ProfiniteInt::from_int(13, &l).unwrap());
    assert_eq!(ProfiniteInt::from_int(-1, &l).unwrap().residues(), &[0, 1, 2, 3, 5, 11]);
    assert!(matches!(
        ProfiniteInt::from_int(1, &[1, 4]),
        Err(ProfiniteError::IncompatibleLevels(_))
    ));
    assert!(ProfiniteInt::new(vec![1, 2, 4], vec![0, 1, 2]).is_err());
    let other = ProfiniteInt::from_int(1, &[1, 2]).unwrap();
    assert!(five.add(&other).is_err());
}

#[test]
fn compatible_tuples_are_integers_at_every_finite_stage() {
    let x = ProfiniteInt::new(vec![1, 2, 3, 6], vec![0, 0, 1, 4]).unwrap();
    assert_eq!(x, ProfiniteInt::from_int(4, &[1, 2, 3, 6]).unwrap());
    assert_eq!(x.to_int(), Some(4));
    for top in [12u64, 30, 36, 60] {
        let l = divisor_closure(&[top]);
        let points = ProfiniteInt::all_points(&l).unwrap();
        assert_eq!(points.len() as u64, top);
        for p in &points {
            let k = p.to_int().unwrap();
            assert_eq!(&ProfiniteInt::from_int(k as i64, &l).unwrap(), p);
        }
    }
    // Without the top level the stage is still integral by CRT.
    let l = [1, 2, 3, 4, 5];
    let points = ProfiniteInt::all_points(&l).unwrap();
    assert_eq!(points.len(), 60);
    assert!(points.iter().all(|p| p.to_int().is_some()));
}

#[test]
fn zhat_is_a_commutative_ring_at_a_fixed_stage() {
    let l = divisor_closure(&[12]);
    let pts = ProfiniteInt::all_points(&l).unwrap();
    let zero = ProfiniteInt::from_int(0, &l).unwrap();
    let one = ProfiniteInt::from_int(1, &l).unwrap();
    for a in &pts {
        assert_eq!(a.add(&zero).unwrap(), *a);
        assert_eq!(a.mul(&one).unwrap(), *a);
        assert_eq!(a.add(&a.neg()).unwrap(), zero);
        for b in &pts {
            assert_eq!(a.add(b).unwrap(), b.add(a).unwrap());
            assert_eq!(a.mul(b).unwrap(), b.mul(a).unwrap());
            for c in &pts {
                assert_eq!(a.add(b).unwrap().add(c).unwrap(), a.add(&b.add(c).unwrap()).unwrap());
                assert_eq!(a.mul(b).unwrap().mul(c).unwrap(), a.mul(&b.mul(c).unwrap()).unwrap());
                assert_eq!(
                    a.mul(&b.add(c).unwrap()).unwrap(),
                    a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap()
                );
            }
        }
    }
    assert_eq!(pts.iter().filter(|p| p.is_unit()).count(), 4);
}

#[test]
fn from_int_agrees_with_integer_arithmetic_on_random_pairs() {
    let mut rng = StdRng::seed_from_u64(7);
    for l in [vec![1, 2, 3, 4, 6, 12], divisor_closure(&[360]), vec![1, 2, 3, 5, 7]] {
        for _ in 0..100 {
            let (a, b): (i64, i64) = (rng.gen_range(-1_000_000_000..1_000_000_000), rng.gen_range(-1_000_000_000..1_000_000_000));
            let (x, y) = (ProfiniteInt::from_int(a, &l).unwrap(), ProfiniteInt::from_int(b, &l).unwrap());
            assert_eq!(x.add(&y).unwrap(), ProfiniteInt::from_int(a + b, &l).unwrap());
            assert_eq!(x.mul(&y).unwrap(), ProfiniteInt::from_int(a * b, &l).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn from_int_is_a_ring_map(a in -100_000i64..100_000, b in -100_000i64..100_000, top in 1u64..200) {
        let l = divisor_closure(&[top]);
        let (x, y) = (ProfiniteInt::from_int(a, &l).unwrap(), ProfiniteInt::from_int(b, &l).unwrap());
        prop_assert_eq!(x.add(&y).unwrap(), ProfiniteInt::from_int(a + b, &l).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), ProfiniteInt::from_int(a * b, &l).unwrap());
        prop_assert_eq!(x.neg(), ProfiniteInt::from_int(-a, &l).unwrap());
        let k = x.to_int().unwrap() as i64;
        prop_assert_eq!((k - a).rem_euclid(*l.last().unwrap() as i64), 0);
    }
}

#[test]
fn groupoid_laws_hold_for_constructions() {
    let s3 = FiniteGroup::symmetric(3);
    let c = FiniteGroupoid::connected(2, &s3);
    c.validate().unwrap();
    assert_eq!(c.arrows.len(), 24);
    FiniteGroupoid::from_group(&FiniteGroup::quaternion()).validate().unwrap();
    let p = c.product(&FiniteGroupoid::connected(3, &FiniteGroup::cyclic(2)));
    p.validate().unwrap();
    assert_eq!(p.objects, 6);
    assert_eq!(p.arrows.len(), 24 * 18);

    let mut broken = FiniteGroupoid::connected(2, &FiniteGroup::cyclic(2));
    let (f, g) = (0, 0);
    let h = broken.compose[f][g].unwrap();
    broken.compose[f][g] = Some(h ^ 1);
    assert!(broken.validate().is_err());
}

#[test]
fn equivalences_of_groupoids() {
    let g = FiniteGroup::cyclic(3);
    let c = FiniteGroupoid::connected(2, &g);
    assert!(groupoid_equivalence(&Functor::identity(&c), &c, &c));

    // One object of the connected groupoid.
    let one = FiniteGroupoid::from_group(&g);
    let incl = Functor {
        objects: vec![0],
        arrows: (0..3).collect(),
    };
    incl.validate(&one, &c).unwrap();
    assert!(incl.is_fully_faithful(&one, &c));
    assert!(incl.is_essentially_surjective(&c));
    assert!(groupoid_equivalence(&incl, &one, &c));

    // Into two copies with no arrows between them: not essentially surjective.
    let two = FiniteGroupoid {
        objects: 2,
        arrows: c.arrows.iter().copied().filter(|a| a.source == a.target).collect(),
        compose: vec![],
    };
    let keep: Vec<usize> = (0..c.arrows.len()).filter(|&f| c.arrows[f].source == c.arrows[f].target).collect();
    let two = FiniteGroupoid {
        compose: keep
            .iter()
            .map(|&f| {
                keep.iter()
                    .map(|&h| c.comp(f, h).map(|x| keep.iter().position(|&k| k == x).unwrap()))
                    .collect()
            })
            .collect(),
        ..two
    };
    two.validate().unwrap();
    let into_two = Functor {
        objects: vec![0],
        arrows: (0..3).collect(),
    };
    into_two.validate(&one, &two).unwrap();
    assert!(!groupoid_equivalence(&into_two, &one, &two));

    // Collapsing ℤ/3 to the trivial group: not faithful.
    let triv = FiniteGroupoid::from_group(&FiniteGroup::cyclic(1));
    let collapse = Functor {
        objects: vec![0],
        arrows: vec![0, 0, 0],
    };
    collapse.validate(&one, &triv).unwrap();
    assert!(!groupoid_equivalence(&collapse, &one, &triv));
}

#[test]
fn completion_commutes_with_products() {
    let gs = [
        FiniteGroupoid::from_group(&FiniteGroup::cyclic(2)),
        FiniteGroupoid::connected(2, &FiniteGroup::cyclic(1)),
        FiniteGroupoid::connected(2, &FiniteGroup::symmetric(3)),
        FiniteGroupoid::from_group(&FiniteGroup::quaternion()),
    ];
    for (c, d) in gs.iter().cartesian_product(&gs) {
        assert!(product_completion_check(c, d));
        let (p1, p2) = projections(c, d);
        let p = groupoid_product(c, d);
        p1.validate(&p, c).unwrap();
        p2.validate(&p, d).unwrap();
    }
}
