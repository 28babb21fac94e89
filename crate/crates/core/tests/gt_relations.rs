use itertools::Itertools;
use modgraph::gt::*;
use modgraph::profinite::FiniteGroup;
use proptest::prelude::*;
use rand::{rngs::StdRng, seq::SliceRandom, Rng, SeedableRng};

// Oracle: words as strings over x y z X Y Z, reduced by deleting adjacent
// cancelling pairs until nothing changes.

fn o_inv_char(c: char) -> char {
    if c.is_ascii_lowercase() {
        c.to_ascii_uppercase()
    } else {
        c.to_ascii_lowercase()
    }
}

fn o_reduce(s: &str) -> String {
    let mut w: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    loop {
        let hit = (0..w.len().saturating_sub(1)).find(|&i| w[i + 1] == o_inv_char(w[i]));
        match hit {
            Some(i) => {
                w.drain(i..i + 2);
            }
            None => return w.into_iter().collect(),
        }
    }
}

fn o_inv(s: &str) -> String {
    s.chars().rev().map(o_inv_char).collect()
}

fn o_subst(f: &str, a: &str, b: &str) -> String {
    let raw: String = f
        .chars()
        .map(|c| match c {
            'x' => a.to_string(),
            'X' => o_inv(a),
            'y' => b.to_string(),
            'Y' => o_inv(b),
            other => other.to_string(),
        })
        .collect();
    o_reduce(&raw)
}

fn o_pow(s: &str, k: i64) -> String {
    let base = if k < 0 { o_inv(s) } else { s.to_string() };
    base.repeat(k.unsigned_abs() as usize)
}

fn o_rel_i(f: &str) -> bool {
    o_reduce(&(o_subst(f, "x", "y") + &o_subst(f, "y", "x"))).is_empty()
}

fn o_rel_ii(lambda: i64, f: &str) -> bool {
    let m = (lambda - 1) / 2;
    let z = "YX";
    let w = [
        o_subst(f, "x", "y"),
        o_pow("x", m),
        o_subst(f, z, "x"),
        o_pow(z, m),
        o_subst(f, "y", z),
        o_pow("y", m),
    ]
    .concat();
    o_reduce(&w).is_empty()
}

fn compact(w: &ReducedWord) -> String {
    w.to_string().replace(' ', "")
}

fn word(s: &str) -> ReducedWord {
    ReducedWord::parse(s).unwrap()
}

/// A random word with zero exponent sums and length at most `2·half`.
fn random_balanced(rng: &mut StdRng, half: usize) -> String {
    let k = rng.gen_range(0..=half);
    let mut letters: Vec<char> = (0..k).map(|_| *['x', 'y', 'X', 'Y'].choose(rng).unwrap()).collect();
    let inverses: Vec<char> = letters.iter().map(|&c| o_inv_char(c)).collect();
    letters.extend(inverses);
    letters.shuffle(rng);
    letters.into_iter().collect()
}

#[test]
fn reduction_and_substitution_examples() {
    assert_eq!(word("x X y"), word("y"));
    assert_eq!(compact(&word("x X y")), "y");
    let (x, y) = (ReducedWord::x(), ReducedWord::y());
    let xy = ReducedWord::commutator(&x, &y);
    assert_eq!(compact(&xy), "xyXY");
    let swapped = substitute(&xy, &y, &x);
    assert_eq!(swapped, ReducedWord::commutator(&y, &x));
    assert_eq!(swapped, xy.inverse());
    assert_eq!(substitute(&ReducedWord::empty(), &xy, &x), ReducedWord::empty());
    assert_eq!(compact(&z()), "YX");
    assert!(ReducedWord::parse("x+y").is_err());
}

#[test]
fn relation_i_examples() {
    assert!(check_relation_i(&ReducedWord::empty()));
    assert!(check_relation_i(&word("x y X Y")));
    assert!(!check_relation_i(&word("x y X")));
    for f in ["", "xyXY", "xyX"] {
        assert_eq!(check_relation_i(&word(f)), o_rel_i(f), "{f}");
    }
}

#[test]
fn relation_ii_examples() {
    assert!(check_relation_ii(1, &ReducedWord::empty()).unwrap());
    assert!(!check_relation_ii(1, &word("xyXY")).unwrap());
    assert!(!o_rel_ii(1, "xyXY"));
    assert!(!check_relation_ii(3, &ReducedWord::empty()).unwrap());
    assert!(!o_rel_ii(3, ""));
    assert_eq!(check_relation_ii(2, &ReducedWord::empty()), Err(GtError::LambdaEven(2)));
    // m = −1: x⁻¹ z⁻¹ y⁻¹ = x⁻¹ (xy) y⁻¹ = 1.
    assert!(check_relation_ii(-1, &ReducedWord::empty()).unwrap());
    assert!(o_rel_ii(-1, ""));
}

#[test]
fn unsupported_relations_are_refused() {
    let f = ReducedWord::empty();
    assert!(check_relation("I", 1, &f).unwrap());
    assert!(check_relation("II", 1, &f).unwrap());
    for r in ["III", "IV"] {
        assert_eq!(check_relation(r, 1, &f), Err(GtError::UnsupportedRelation(r.into())));
    }
}

#[test]
fn gt_pairs_require_odd_lambda_and_balanced_f() {
    assert!(GtPair::new(1, word("xyXY")).is_ok());
    assert_eq!(GtPair::new(4, ReducedWord::empty()), Err(GtError::LambdaEven(4)));
    assert_eq!(GtPair::new(1, word("xyX")), Err(GtError::NotInCommutator(0, 1)));
}

#[test]
fn random_balanced_words_agree_with_the_oracle() {
    let mut rng = StdRng::seed_from_u64(2024);
    for _ in 0..20 {
        let s = random_balanced(&mut rng, 4);
        assert!(s.len() <= 8);
        let f = word(&s);
        assert_eq!(compact(&f), o_reduce(&s));
        assert_eq!(check_relation_i(&f), o_rel_i(&s), "{s}");
        for lambda in [1, 3, -1, 5] {
            assert_eq!(check_relation_ii(lambda, &f).unwrap(), o_rel_ii(lambda, &s), "{lambda} {s}");
        }
    }
}

// Permutation oracle: one-line permutations composed as (st)(i) = s(t(i)).

fn p_mul(s: &[usize], t: &[usize]) -> Vec<usize> {
    t.iter().map(|&i| s[i]).collect()
}

fn p_inv(s: &[usize]) -> Vec<usize> {
    let mut out = vec![0; s.len()];
    for (i, &j) in s.iter().enumerate() {
        out[j] = i;
    }
    out
}

fn p_eval(w: &ReducedWord, a: &[usize], b: &[usize]) -> Vec<usize> {
    let id: Vec<usize> = (0..a.len()).collect();
    w.letters().iter().fold(id, |acc, l| {
        let g = if l.gen == 0 { a.to_vec() } else { b.to_vec() };
        p_mul(&acc, &if l.inverse { p_inv(&g) } else { g })
    })
}

fn p_name(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for i in 0..p.len() {
        if seen[i] || p[i] == i {
            continue;
        }
        let mut c = vec![i + 1];
        seen[i] = true;
        let mut j = p[i];
        while j != i {
            seen[j] = true;
            c.push(j + 1);
            j = p[j];
        }
        out += &format!("({})", c.iter().join(" "));
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

#[test]
fn endomorphism_on_s3() {
    let s3 = FiniteGroup::symmetric(3);
    let (pa, pb) = (vec![1, 0, 2], vec![1, 2, 0]);
    let a = s3.element(&p_name(&pa)).unwrap();
    let b = s3.element(&p_name(&pb)).unwrap();

    let id = induced_endo_on_quotient(&GtPair::identity(), &s3, a, b).unwrap();
    assert!(id.well_defined && id.is_bijective);
    assert_eq!((id.image_x, id.image_y), (a, b));

    let pair = GtPair::new(1, word("xyXY")).unwrap();
    let r = induced_endo_on_quotient(&pair, &s3, a, b).unwrap();
    let (wx, wy) = pair.endo_images();
    assert_eq!(s3.name(r.image_x), p_name(&p_eval(&wx, &pa, &pb)));
    assert_eq!(s3.name(r.image_y), p_name(&p_eval(&wy, &pa, &pb)));
    // [a,b] lies in A₃, which is abelian, so it commutes with b.
    assert_eq!(r.image_y, b);
    assert_eq!(r.image_order, 6);
    assert!(r.is_bijective);
}

#[test]
fn endomorphism_on_the_klein_group() {
    let v = FiniteGroup::cyclic(2).product(&FiniteGroup::cyclic(2));
    let (a, b) = (v.element("(1,0)").unwrap(), v.element("(0,1)").unwrap());
    let pair = GtPair::new(3, ReducedWord::empty()).unwrap();
    let r = induced_endo_on_quotient(&pair, &v, a, b).unwrap();
    assert_eq!((r.image_x, r.image_y), (a, b));
    assert!(r.is_bijective);
    assert_eq!(
        induced_endo_on_quotient(&pair, &v, a, a),
        Err(GtError::NotGenerated { generated: 2, order: 4 })
    );
}

#[test]
fn identity_pair_is_bijective_on_every_quotient() {
    let groups = [
        FiniteGroup::symmetric(3),
        FiniteGroup::dihedral(4),
        FiniteGroup::quaternion(),
        FiniteGroup::alternating4(),
        FiniteGroup::symmetric(4),
    ];
    let mut checked = 0;
    for g in &groups {
        for (a, b) in (0..g.order()).cartesian_product(0..g.order()) {
            if g.generated(&[a, b]).len() != g.order() {
                continue;
            }
            let r = induced_endo_on_quotient(&GtPair::identity(), g, a, b).unwrap();
            assert!(r.is_bijective);
            assert_eq!(r.map.unwrap(), (0..g.order()).collect::<Vec<_>>());
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn lambda_minus_one_with_trivial_f_inverts() {
    // x ↦ x⁻¹, y ↦ y⁻¹ extends to a homomorphism only on abelian quotients.
    let pair = GtPair::new(-1, ReducedWord::empty()).unwrap();
    let z6 = FiniteGroup::cyclic(6);
    let r = induced_endo_on_quotient(&pair, &z6, 1, 0).unwrap();
    assert!(r.well_defined && r.is_bijective);
    let s3 = FiniteGroup::symmetric(3);
    let (a, b) = (s3.element("(1 2)").unwrap(), s3.element("(1 2 3)").unwrap());
    let r = induced_endo_on_quotient(&pair, &s3, a, b).unwrap();
    assert!(r.well_defined && r.is_bijective);
}

fn letters() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('x'), Just('y'), Just('X'), Just('Y')], 0..12)
        .prop_map(|v| v.into_iter().collect())
}

proptest! {
    #[test]
    fn reduce_matches_oracle_and_is_idempotent(s in letters()) {
        let w = word(&s);
        prop_assert_eq!(compact(&w), o_reduce(&s));
        prop_assert_eq!(word(&compact(&w)), w);
    }

    #[test]
    fn substitution_commutes_with_reduction(f in letters(), a in letters(), b in letters()) {
        let got = substitute(&word(&f), &word(&a), &word(&b));
        prop_assert_eq!(compact(&got), o_subst(&f, &a, &b));
    }

    #[test]
    fn relation_i_is_symmetric(f in letters()) {
        let f = word(&f);
        let (x, y) = (ReducedWord::x(), ReducedWord::y());
        let g = substitute(&f, &y, &x).inverse();
        prop_assert_eq!(check_relation_i(&f), check_relation_i(&g));
    }
}
