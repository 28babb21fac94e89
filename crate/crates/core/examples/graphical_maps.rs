//! Enumerating graphical maps, composing them, and looking at images.

use std::sync::Arc;

use modgraph::corpus;
use modgraph::morphism::{image_key, DEFAULT_BUDGET};
use modgraph::{compose, hom_set, FeynmanGraph, GraphicalMap};

fn main() {
    let edge = Arc::new(FeynmanGraph::edge());
    for n in 0..=4 {
        let s = Arc::new(FeynmanGraph::star(n));
        let maps = hom_set(&edge, &s, DEFAULT_BUDGET).unwrap();
        let auts = hom_set(&s, &s, DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .filter(GraphicalMap::is_isomorphism)
            .count();
        println!("|hom(edge, star {n})| = {:<2} |Aut(star {n})| = {auts}", maps.len());
    }

    // A path of two vertices wraps around a 2-cycle in several ways.
    let p = Arc::new(corpus::path(2));
    let c = Arc::new(corpus::cycle(2));
    let maps = hom_set(&p, &c, DEFAULT_BUDGET).unwrap();
    println!("|hom(path 2, cycle 2)| = {}", maps.len());
    for m in maps.iter().take(3) {
        println!("  image {:?}", image_key(m).unwrap());
    }

    // Composition with the inclusion of an edge.
    let into_path = hom_set(&edge, &p, DEFAULT_BUDGET).unwrap();
    let f = &into_path[0];
    let composites: Vec<GraphicalMap> = maps.iter().map(|g| compose(g, f).unwrap()).collect();
    println!("composites edge → path → cycle: {}", composites.len());
    let id = GraphicalMap::identity(&c);
    println!("identity is neutral: {}", compose(&id, &maps[0]).unwrap() == maps[0]);

    let json = serde_json::to_string(&maps[0].to_json(false)).unwrap();
    println!("first map as JSON: {json}");
}
