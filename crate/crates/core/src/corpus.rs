//! Named small graphs used by tests, examples and the CLI.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::graph::{FeynmanGraph, GenusGraph};

/// Builds a connected graph from vertices, internal edges and legs.
///
/// Internal edge `k` between `u` and `w` gets arcs `e{k}` at `u` and `e{k}†`
/// at `w`; leg `j` at `v` gets arc `l{j}` at `v` and boundary arc `l{j}†`.
pub fn build(vertices: &[&str], internal: &[(&str, &str)], legs: &[&str]) -> FeynmanGraph {
    let mut arcs = Vec::new();
    let mut pairs = Vec::new();
    let mut attach = Vec::new();
    for (k, (u, w)) in internal.iter().enumerate() {
        let (a, b) = (format!("e{}", k + 1), format!("e{}†", k + 1));
        attach.push((a.clone(), u.to_string()));
        attach.push((b.clone(), w.to_string()));
        arcs.push(a.clone());
        arcs.push(b.clone());
        pairs.push((a, b));
    }
    for (j, v) in legs.iter().enumerate() {
        let (a, b) = (format!("l{}", j + 1), format!("l{}†", j + 1));
        attach.push((a.clone(), v.to_string()));
        arcs.push(a.clone());
        arcs.push(b.clone());
        pairs.push((a, b));
    }
    FeynmanGraph::new(&arcs, &pairs, vertices, &attach).expect("corpus graph")
}

/// Two vertices with internal edges `[3,4]`, `[5,6]` and boundary `{1,8,10}`.
pub fn first_figure() -> FeynmanGraph {
    let arcs: Vec<String> = (1..=10).map(|k| k.to_string()).collect();
    let pairs: Vec<(String, String)> = (1..=5)
        .map(|n| ((2 * n - 1).to_string(), (2 * n).to_string()))
        .collect();
    let attach = [
        ("2", "v1"),
        ("3", "v1"),
        ("9", "v1"),
        ("4", "v2"),
        ("5", "v2"),
        ("6", "v2"),
        ("7", "v2"),
    ];
    FeynmanGraph::new(&arcs, &pairs, &["v1", "v2"], &attach).expect("figure graph")
}

/// Three vertices, Betti number 2, vertex genera 4, 1, 2.
pub fn genus_figure() -> GenusGraph {
    let g = build(
        &["x", "y", "z"],
        &[("x", "y"), ("y", "z"), ("z", "x"), ("x", "y")],
        &["x", "y", "z"],
    );
    GenusGraph::new(g, vec![4, 1, 2]).expect("genus figure")
}

/// One vertex with `loops` loops and `legs` legs.
pub fn bouquet(loops: usize, legs: usize) -> FeynmanGraph {
    let internal = vec![("v", "v"); loops];
    build(&["v"], &internal, &vec!["v"; legs])
}

/// A cycle through `n ≥ 2` bivalent vertices `c1 … cn`.
pub fn cycle(n: usize) -> FeynmanGraph {
    let names: Vec<String> = (1..=n).map(|k| format!("c{k}")).collect();
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let internal: Vec<(&str, &str)> = (0..n).map(|k| (vs[k], vs[(k + 1) % n])).collect();
    build(&vs, &internal, &[])
}

/// `v1, w1, v2, w2` around a cycle.
pub fn four_cycle_vw() -> FeynmanGraph {
    build(
        &["v1", "w1", "v2", "w2"],
        &[("v1", "w1"), ("w1", "v2"), ("v2", "w2"), ("w2", "v1")],
        &[],
    )
}

/// `v` and `w` joined by two edges.
pub fn two_vertex_loop() -> FeynmanGraph {
    build(&["v", "w"], &[("v", "w"), ("v", "w")], &[])
}

/// Stars of arities `m` and `n` joined along one edge.
pub fn joined_stars(m: usize, n: usize) -> FeynmanGraph {
    let mut legs = vec!["u"; m - 1];
    legs.extend(vec!["w"; n - 1]);
    build(&["u", "w"], &[("u", "w")], &legs)
}

/// A path of `n ≥ 1` vertices `p1 … pn`, with one leg at each end.
pub fn path(n: usize) -> FeynmanGraph {
    let names: Vec<String> = (1..=n).map(|k| format!("p{k}")).collect();
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let internal: Vec<(&str, &str)> = (1..n).map(|k| (vs[k - 1], vs[k])).collect();
    build(&vs, &internal, &[vs[0], vs[n - 1]])
}

/// The `n`-star with arcs `n-1` and `n` joined into a loop.
pub fn contracted_star(n: usize) -> FeynmanGraph {
    let arcs: Vec<String> = (1..=n)
        .flat_map(|k| [k.to_string(), format!("{k}†")])
        .take(2 * n - 4)
        .chain([(n - 1).to_string(), n.to_string()])
        .collect();
    let mut pairs: Vec<(String, String)> = (1..=n - 2)
        .map(|k| (k.to_string(), format!("{k}†")))
        .collect();
    pairs.push(((n - 1).to_string(), n.to_string()));
    let attach: Vec<(String, String)> = (1..=n).map(|k| (k.to_string(), "v".to_string())).collect();
    FeynmanGraph::new(&arcs, &pairs, &["v"], &attach).expect("contracted star")
}

/// Named graphs accepted by the CLI.
pub fn by_name(name: &str) -> Option<FeynmanGraph> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, a.parse::<usize>().ok()),
        None => (name, None),
    };
    Some(match (head, arg) {
        ("edge", None) => FeynmanGraph::edge(),
        ("star", Some(n)) => FeynmanGraph::star(n),
        ("first-figure", None) => first_figure(),
        ("genus-figure", None) => genus_figure().graph,
        ("cycle", Some(n)) if n >= 2 => cycle(n),
        ("path", Some(n)) if n >= 1 => path(n),
        ("bouquet", Some(n)) => bouquet(1, n),
        ("two-vertex-loop", None) => two_vertex_loop(),
        ("four-cycle", None) => four_cycle_vw(),
        ("contracted-star", Some(n)) if n >= 2 => contracted_star(n),
        _ => return None,
    })
}

/// Connected graphs with at most three vertices used for exhaustive checks.
pub fn small_graphs() -> Vec<FeynmanGraph> {
    vec![
        FeynmanGraph::edge(),
        FeynmanGraph::star(0),
        FeynmanGraph::star(1),
        FeynmanGraph::star(2),
        FeynmanGraph::star(3),
        bouquet(1, 0),
        bouquet(1, 1),
        joined_stars(1, 2),
        joined_stars(2, 2),
        two_vertex_loop(),
        path(3),
    ]
}

/// Largest arity a vertex can reach by contracting internal edges: the
/// maximum over connected vertex sets `W` of `Σ_{v∈W} |nb(v)| − 2(|W|−1)`.
pub fn contraction_width(g: &FeynmanGraph) -> usize {
    let n = g.vertex_count();
    if n == 0 {
        return 2;
    }
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let in_set: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
        if !connected_within(g, &in_set) {
            continue;
        }
        let k = mask.count_ones() as usize;
        let total: usize = (0..n).filter(|&v| in_set[v]).map(|v| g.arity(v)).sum();
        best = best.max(total + 2 - 2 * k);
    }
    best
}

fn connected_within(g: &FeynmanGraph, in_set: &[bool]) -> bool {
    let start = match in_set.iter().position(|&b| b) {
        Some(s) => s,
        None => return false,
    };
    let mut seen = vec![false; in_set.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for (a, b) in g.internal_edges_among(in_set) {
            let (x, y) = (g.attach(a).unwrap(), g.attach(b).unwrap());
            for (p, q) in [(x, y), (y, x)] {
                if p == v && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    (0..in_set.len()).all(|v| !in_set[v] || seen[v])
}

/// One graph per isomorphism class of connected graphs with degree at most
/// `max_degree` and contraction width at most `max_arity`, ↕ first, then by
/// degree, vertex count and canonical code.
pub fn universe(max_degree: usize, max_arity: usize) -> Vec<FeynmanGraph> {
    let mut found: BTreeMap<(usize, usize, String), FeynmanGraph> = BTreeMap::new();
    let names: Vec<String> = (1..=max_degree).map(|k| format!("v{k}")).collect();
    for v in 1..=max_degree {
        let vs: Vec<&str> = names[..v].iter().map(String::as_str).collect();
        let slots: Vec<(usize, usize)> = (0..v).flat_map(|i| (i..v).map(move |j| (i, j))).collect();
        for e in 0..=max_degree - v {
            for edges in slots.iter().copied().combinations_with_replacement(e) {
                let mut inc = vec![0; v];
                for &(i, j) in &edges {
                    inc[i] += 1;
                    inc[j] += 1;
                }
                if inc.iter().any(|&x| x > max_arity) {
                    continue;
                }
                let internal: Vec<(&str, &str)> = edges.iter().map(|&(i, j)| (vs[i], vs[j])).collect();
                for legs in inc
                    .iter()
                    .map(|&x| 0..=max_arity - x)
                    .multi_cartesian_product()
                {
                    let leg_list: Vec<&str> = legs
                        .iter()
                        .enumerate()
                        .flat_map(|(i, &l)| std::iter::repeat_n(vs[i], l))
                        .collect();
                    let Some(g) = try_build(&vs, &internal, &leg_list) else {
                        continue;
                    };
                    if contraction_width(&g) > max_arity {
                        continue;
                    }
                    let key = (g.degree(), g.vertex_count(), g.canonical_code());
                    found.entry(key).or_insert(g);
                }
            }
        }
    }
    std::iter::once(FeynmanGraph::edge())
        .chain(found.into_values())
        .collect()
}

fn try_build(vertices: &[&str], internal: &[(&str, &str)], legs: &[&str]) -> Option<FeynmanGraph> {
    let mut arcs = Vec::new();
    let mut pairs = Vec::new();
    let mut attach = Vec::new();
    for (k, (u, w)) in internal.iter().enumerate() {
        let (a, b) = (format!("e{}", k + 1), format!("e{}†", k + 1));
        attach.push((a.clone(), u.to_string()));
        attach.push((b.clone(), w.to_string()));
        arcs.extend([a.clone(), b.clone()]);
        pairs.push((a, b));
    }
    for (j, v) in legs.iter().enumerate() {
        let (a, b) = (format!("l{}", j + 1), format!("l{}†", j + 1));
        attach.push((a.clone(), v.to_string()));
        arcs.extend([a.clone(), b.clone()]);
        pairs.push((a, b));
    }
    FeynmanGraph::new(&arcs, &pairs, vertices, &attach).ok()
}
