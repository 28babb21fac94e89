//! Splitting graphical maps into codegeneracies, an isomorphism and cofaces.

use std::sync::Arc;

use modgraph::corpus;
use modgraph::elementary::{codegeneracies_out_of, contract_edge, inner_cofaces_into, outer_cofaces_into};
use modgraph::morphism::DEFAULT_BUDGET;
use modgraph::{classify_elementary, factorize, hom_set};

fn main() {
    let g = Arc::new(corpus::first_figure());
    println!("first figure, degree {}", g.degree());
    println!("  inner cofaces into it: {}", inner_cofaces_into(&g).unwrap().len());
    println!("  outer cofaces into it: {}", outer_cofaces_into(&g).unwrap().len());
    println!("  codegeneracies out of it: {}", codegeneracies_out_of(&g).len());

    let b = Arc::new(corpus::bouquet(1, 2));
    let c = contract_edge(&b, b.internal_edges()[0]).unwrap();
    println!(
        "contracting the loop of bouquet(1, 2): {:?}, quotient has {} vertex",
        classify_elementary(&c.coface),
        c.quotient.vertex_count()
    );

    let p = Arc::new(corpus::path(3));
    let t = Arc::new(corpus::two_vertex_loop());
    let maps = hom_set(&p, &t, DEFAULT_BUDGET).unwrap();
    println!("{} maps path(3) → two-vertex loop", maps.len());
    for m in maps.iter().take(4) {
        let f = factorize(m).unwrap();
        let kinds: Vec<_> = f.cofaces.iter().map(classify_elementary).collect();
        println!(
            "  {} codegeneracies, cofaces {:?}, recomposes: {}",
            f.codegeneracies.len(),
            kinds,
            f.recompose().unwrap() == *m
        );
    }
}
