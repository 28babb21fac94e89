//! Nerves of operads, the Segal and inner horn checks, and extraction.

use std::sync::Arc;

use modgraph::corpus;
use modgraph::operad::{builtin, compare_operads};
use modgraph::presheaf::{
    extract_modular_operad, is_strict_inner_kan, is_strict_segal, nerve_presheaf, representable,
    Universe,
};
use modgraph::FeynmanGraph;

fn main() {
    let u = Arc::new(Universe::new(4, 4).unwrap());
    println!("carried graphs: {}", u.len());

    for name in ["terminal", "charge", "charge-swap"] {
        let p = builtin(name, 4).unwrap();
        let x = nerve_presheaf(p.as_ref(), u.clone()).unwrap();
        let s = is_strict_segal(&x).unwrap();
        let k = is_strict_inner_kan(&x).unwrap();
        let q = extract_modular_operad(&x).unwrap();
        println!(
            "N({name}): segal={} kan={} horns={} extract matches: {}",
            s.strict,
            k.kan,
            k.horns_checked,
            compare_operads(p.as_ref(), &q, 4).is_ok()
        );
    }

    // Break a nerve by deleting one element over two joined 3-stars.
    let c = nerve_presheaf(builtin("charge", 4).unwrap().as_ref(), u.clone()).unwrap();
    let j = u.position(&corpus::joined_stars(3, 3)).unwrap();
    let bad = c.delete_element(j, 0).unwrap();
    let s = is_strict_segal(&bad).unwrap();
    println!("corrupted: segal={} ({:?})", s.strict, s.failure.map(|f| f.reason));

    // Representables of graphs with a self-glued loop are not Segal.
    let r = representable(&Arc::new(FeynmanGraph::star(2)), u.clone()).unwrap();
    println!(
        "U[star 2]: segal={} kan={}",
        is_strict_segal(&r).unwrap().strict,
        is_strict_inner_kan(&r).unwrap().kan
    );
}
