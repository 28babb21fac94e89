//! Simply connected and stable variants of the graph category.

use std::sync::Arc;

use modgraph::corpus::{self, universe};
use modgraph::elementary::contract_edge;
use modgraph::morphism::DEFAULT_BUDGET;
use modgraph::variants::{
    in_u0, in_ucyc, stable_samples, ust_codegeneracy_check, validate_genus_morphism, verify_sieve,
    GenusMorphism,
};

fn main() {
    let graphs = universe(4, 4);
    let trees = graphs.iter().filter(|g| in_u0(g)).count();
    let ucyc = graphs.iter().filter(|g| in_ucyc(g)).count();
    println!("{} graphs, {trees} trees, {ucyc} trees with boundary", graphs.len());

    for (name, pred) in [("u0", in_u0 as fn(&_) -> bool), ("ucyc", in_ucyc)] {
        let r = verify_sieve(pred, &graphs, &graphs, DEFAULT_BUDGET).unwrap();
        println!("{name} is a sieve: {} ({} maps)", r.holds, r.maps_checked);
    }
    let r = verify_sieve(|g| g.betti().unwrap() == 1, &graphs, &graphs, DEFAULT_BUDGET).unwrap();
    println!("β₁ = 1 is a sieve: {} witness {:?}", r.holds, r.counterexample);

    // Contracting a loop moves one unit of genus into the vertex.
    let g = Arc::new(corpus::bouquet(1, 1));
    let c = contract_edge(&g, g.internal_edges()[0]).unwrap();
    let m = GenusMorphism { underlying: c.coface, source_genus: vec![1], target_genus: vec![0] };
    println!("loop contraction with g = 1 ↦ 0 is valid: {}", validate_genus_morphism(&m));

    let samples = stable_samples(&graphs, 1);
    let r = ust_codegeneracy_check(&samples, DEFAULT_BUDGET).unwrap();
    println!(
        "{} stable samples, {} maps, {} codegeneracies",
        r.samples, r.maps_checked, r.codegeneracies
    );
}
