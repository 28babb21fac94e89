//! Free-group words and the word-level GT relations (I) and (II).

use modgraph::gt::{check_relation_i, check_relation_ii, induced_endo_on_quotient, z, GtPair, ReducedWord};
use modgraph::profinite::FiniteGroup;

fn main() {
    let w = ReducedWord::parse("x y Y X y").unwrap();
    println!("x y Y X y reduces to {w}");
    println!("z = (xy)⁻¹ = {}", z());

    let comm = ReducedWord::commutator(&ReducedWord::x(), &ReducedWord::y());
    for (lambda, f) in [(1, ReducedWord::empty()), (-1, ReducedWord::empty()), (1, comm.clone()), (3, ReducedWord::empty())] {
        println!(
            "λ = {lambda:>2}, f = {:<8} (I): {:<5} (II): {}",
            if f.is_empty() { "1".to_string() } else { f.to_string() },
            check_relation_i(&f),
            check_relation_ii(lambda, &f).unwrap()
        );
    }

    // Push the pair through the quotient F₂ → S₃, x ↦ (1 2), y ↦ (1 2 3).
    let s3 = FiniteGroup::symmetric(3);
    let (a, b) = (s3.element("(1 2)").unwrap(), s3.element("(1 2 3)").unwrap());
    for (lambda, f) in [(1, comm), (3, ReducedWord::empty())] {
        let pair = GtPair::new(lambda, f).unwrap();
        let q = induced_endo_on_quotient(&pair, &s3, a, b).unwrap();
        println!(
            "on S3, λ = {lambda}: x ↦ {}, y ↦ {}, bijective: {}",
            s3.name(q.image_x),
            s3.name(q.image_y),
            q.is_bijective
        );
    }
}
