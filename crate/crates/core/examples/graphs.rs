//! Building Feynman graphs, reading off invariants, and JSON round trips.

use modgraph::corpus::{self, build};
use modgraph::{FeynmanGraph, GenusGraph, GraphJson};

fn describe(name: &str, g: &FeynmanGraph) {
    println!(
        "{name:>16}: |A|={:<2} |V|={} |iE|={} |∂|={} deg={} β₁={}",
        g.arc_count(),
        g.vertex_count(),
        g.internal_edges().len(),
        g.boundary().len(),
        g.degree(),
        g.betti().unwrap(),
    );
}

fn main() {
    describe("edge", &FeynmanGraph::edge());
    describe("star 3", &FeynmanGraph::star(3));
    describe("bouquet(2, 1)", &corpus::bouquet(2, 1));
    describe("first figure", &corpus::first_figure());

    // Two spellings of the same tree are isomorphic and share a canonical code.
    let a = build(&["u", "w"], &[("u", "w")], &["u", "u", "w"]);
    let b = build(&["p", "q"], &[("q", "p")], &["q", "p", "p"]);
    println!("isomorphic: {}", a.is_isomorphic(&b));
    println!("codes: {} / {}", a.canonical_code(), b.canonical_code());

    let gg = corpus::genus_figure();
    println!(
        "genus figure: β₁={} vertex genera={:?} total genus={} stable={}",
        gg.graph.betti().unwrap(),
        gg.genus,
        gg.total_genus().unwrap(),
        gg.is_stable()
    );

    let j = GraphJson::from_graph(&gg.graph, Some(&gg.genus));
    let text = serde_json::to_string_pretty(&j).unwrap();
    let back: GraphJson = serde_json::from_str(&text).unwrap();
    let again: GenusGraph = back.to_genus_graph().unwrap();
    println!("json round trip preserves the genus graph: {}", again.total_genus().unwrap() == 9);
}
