//! Finite inverse limits, profinite integers and groupoid completions.

use modgraph::profinite::{
    completion_is_identity, divisor_closure, groupoid_product, product_completion_check,
    FiniteGroup, FiniteGroupoid, InverseSystem, ProfiniteInt,
};

fn main() {
    let tower = InverseSystem::divisor_tower(12);
    println!("levels {:?}: limit has {} points", tower.levels, tower.limit().len());

    let levels = divisor_closure(&[12, 10]);
    let a = ProfiniteInt::from_int(-7, &levels).unwrap();
    let b = ProfiniteInt::from_int(11, &levels).unwrap();
    println!("levels {levels:?}");
    println!("  -7   ↦ {:?}", a.residues());
    println!("  11   ↦ {:?}", b.residues());
    println!("  sum  ↦ {:?}", a.add(&b).unwrap().residues());
    println!("  prod ↦ {:?} = {:?}", a.mul(&b).unwrap().residues(), ProfiniteInt::from_int(-77, &levels).unwrap().residues());
    println!("  11 is a unit: {}, back to an integer: {:?}", b.is_unit(), b.to_int());
    println!("  points at this stage: {}", ProfiniteInt::all_points(&levels).unwrap().len());

    for (name, g) in [
        ("S3", FiniteGroup::symmetric(3)),
        ("Q8", FiniteGroup::quaternion()),
        ("A4", FiniteGroup::alternating4()),
    ] {
        let (sys, _) = InverseSystem::quotient_system(&g);
        println!(
            "{name}: {} normal subgroups, limit {} points, completes to itself: {}",
            g.normal_subgroups().len(),
            sys.limit().len(),
            completion_is_identity(&g)
        );
    }

    let c = FiniteGroupoid::connected(2, &FiniteGroup::cyclic(2));
    let d = FiniteGroupoid::from_group(&FiniteGroup::cyclic(3));
    let cd = groupoid_product(&c, &d);
    println!(
        "product groupoid: {} objects, {} arrows; completion commutes with products: {}",
        cd.objects,
        cd.arrows.len(),
        product_completion_check(&c, &d)
    );
}
