//! Structure-preserving arc/vertex maps: embeddings searches, isomorphisms and
//! canonical codes.

use std::collections::VecDeque;

use itertools::Itertools;

use crate::graph::{FeynmanGraph, GraphError, GraphIso};

/// Enumerates pairs `(arc_map, vertex_map)` from `h` to `g` that commute with
/// the involutions and the attachment, are injective on vertices, and are
/// bijective on every neighbourhood. With `bijective` the arc map must also
/// be a bijection (graph isomorphisms).
pub(crate) fn local_maps(
    h: &FeynmanGraph,
    g: &FeynmanGraph,
    bijective: bool,
    budget: usize,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>, GraphError> {
    if bijective && (h.arc_count() != g.arc_count() || h.vertex_count() != g.vertex_count()) {
        return Ok(Vec::new());
    }
    if h.is_edge() {
        if bijective && !g.is_edge() {
            return Ok(Vec::new());
        }
        return Ok((0..g.arc_count())
            .map(|x| (vec![x, g.inv(x)], vec![]))
            .collect());
    }
    let mut s = Search {
        h,
        g,
        bijective,
        budget,
        steps: 0,
        order: bfs_vertex_order(h),
        arc_map: vec![None; h.arc_count()],
        arc_used: vec![0; g.arc_count()],
        vertex_map: vec![None; h.vertex_count()],
        vertex_used: vec![false; g.vertex_count()],
        out: Vec::new(),
    };
    s.vertex_step(0)?;
    Ok(s.out)
}

fn bfs_vertex_order(h: &FeynmanGraph) -> Vec<usize> {
    let mut order = Vec::new();
    let mut seen = vec![false; h.vertex_count()];
    for start in 0..h.vertex_count() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &a in h.nb(v) {
                if let Some(w) = h.attach(h.inv(a)) {
                    if !seen[w] {
                        seen[w] = true;
                        q.push_back(w);
                    }
                }
            }
        }
    }
    order
}

struct Search<'a> {
    h: &'a FeynmanGraph,
    g: &'a FeynmanGraph,
    bijective: bool,
    budget: usize,
    steps: usize,
    order: Vec<usize>,
    arc_map: Vec<Option<usize>>,
    arc_used: Vec<usize>,
    vertex_map: Vec<Option<usize>>,
    vertex_used: Vec<bool>,
    out: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), GraphError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(GraphError::SearchBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn vertex_step(&mut self, k: usize) -> Result<(), GraphError> {
        if k == self.order.len() {
            let arcs: Vec<usize> = self.arc_map.iter().map(|x| x.unwrap()).collect();
            let verts: Vec<usize> = self.vertex_map.iter().map(|x| x.unwrap()).collect();
            self.out.push((arcs, verts));
            return Ok(());
        }
        let v = self.order[k];
        let arity = self.h.arity(v);
        // A preset arc forces the image vertex.
        let forced = self.h.nb(v).iter().find_map(|&a| self.arc_map[a]);
        let candidates: Vec<usize> = match forced {
            Some(x) => match self.g.attach(x) {
                Some(w) => vec![w],
                None => vec![],
            },
            None => (0..self.g.vertex_count()).collect(),
        };
        for w in candidates {
            if self.vertex_used[w] || self.g.arity(w) != arity {
                continue;
            }
            self.tick()?;
            self.vertex_used[w] = true;
            self.vertex_map[v] = Some(w);
            let mut taken = vec![false; arity];
            self.arc_step(k, v, w, 0, &mut taken)?;
            self.vertex_map[v] = None;
            self.vertex_used[w] = false;
        }
        Ok(())
    }

    fn arc_step(
        &mut self,
        k: usize,
        v: usize,
        w: usize,
        j: usize,
        taken: &mut Vec<bool>,
    ) -> Result<(), GraphError> {
        let nbv = self.h.nb(v);
        if j == nbv.len() {
            return self.vertex_step(k + 1);
        }
        let a = nbv[j];
        for (t, &x) in self.g.nb(w).iter().enumerate() {
            if taken[t] {
                continue;
            }
            if let Some(y) = self.arc_map[a] {
                if y != x {
                    continue;
                }
            }
            let b = self.h.inv(a);
            let xb = self.g.inv(x);
            if let Some(y) = self.arc_map[b] {
                if y != xb {
                    continue;
                }
            }
            self.tick()?;
            let set_a = self.arc_map[a].is_none();
            let set_b = self.arc_map[b].is_none();
            if self.bijective
                && ((set_a && self.arc_used[x] > 0) || (set_b && self.arc_used[xb] > 0)) {
                    continue;
                }
            if set_a {
                self.arc_map[a] = Some(x);
                self.arc_used[x] += 1;
            }
            if set_b {
                self.arc_map[b] = Some(xb);
                self.arc_used[xb] += 1;
            }
            taken[t] = true;
            self.arc_step(k, v, w, j + 1, taken)?;
            taken[t] = false;
            if set_a {
                self.arc_map[a] = None;
                self.arc_used[x] -= 1;
            }
            if set_b {
                self.arc_map[b] = None;
                self.arc_used[xb] -= 1;
            }
        }
        Ok(())
    }
}

pub(crate) fn isomorphisms(g: &FeynmanGraph, h: &FeynmanGraph) -> Vec<GraphIso> {
    if g.is_edge() != h.is_edge() || g.arc_count() != h.arc_count() {
        return Vec::new();
    }
    if g.vertex_count() != h.vertex_count() {
        return Vec::new();
    }
    local_maps(g, h, true, usize::MAX)
        .expect("unbounded search")
        .into_iter()
        .map(|(arc_map, vertex_map)| GraphIso {
            arc_map,
            vertex_map,
        })
        .collect()
}

pub(crate) fn is_isomorphic(g: &FeynmanGraph, h: &FeynmanGraph) -> bool {
    if g.arc_count() != h.arc_count() || g.vertex_count() != h.vertex_count() {
        return false;
    }
    let mut ag: Vec<usize> = (0..g.vertex_count()).map(|v| g.arity(v)).collect();
    let mut ah: Vec<usize> = (0..h.vertex_count()).map(|v| h.arity(v)).collect();
    ag.sort_unstable();
    ah.sort_unstable();
    if ag != ah || g.internal_edges().len() != h.internal_edges().len() {
        return false;
    }
    g.canonical_code() == h.canonical_code()
}

/// Per arc in discovery order: partner label and attached vertex label.
type Code = Vec<(usize, Option<usize>)>;

/// Minimum over traversal labelings. Starting at each vertex and each
/// ordering of its neighbourhood, vertices and arcs are labeled in breadth
/// first discovery order; a newly discovered vertex is entered through a known
/// arc and its remaining arcs are tried in every order.
pub(crate) fn canonical_code(g: &FeynmanGraph) -> String {
    if g.is_edge() {
        return "E".to_string();
    }
    let mut best: Option<Code> = None;
    for start in 0..g.vertex_count() {
        for perm in g.nb(start).iter().copied().permutations(g.arity(start)) {
            let mut st = Labeling::new(g);
            st.discover_vertex(start);
            for &a in &perm {
                st.label_arc(a);
                st.queue.push_back(a);
            }
            st.explore(&mut best);
        }
    }
    let code = best.expect("graph with vertices");
    let mut s = format!("V{}A{}:", g.vertex_count(), g.arc_count());
    for (p, v) in code {
        match v {
            Some(v) => s.push_str(&format!("{p}@{v},")),
            None => s.push_str(&format!("{p}-,")),
        }
    }
    s
}

#[derive(Clone)]
struct Labeling<'a> {
    g: &'a FeynmanGraph,
    arc_label: Vec<Option<usize>>,
    arc_order: Vec<usize>,
    vertex_label: Vec<Option<usize>>,
    vertex_count: usize,
    queue: VecDeque<usize>,
}

impl<'a> Labeling<'a> {
    fn new(g: &'a FeynmanGraph) -> Self {
        Self {
            g,
            arc_label: vec![None; g.arc_count()],
            arc_order: Vec::new(),
            vertex_label: vec![None; g.vertex_count()],
            vertex_count: 0,
            queue: VecDeque::new(),
        }
    }

    fn discover_vertex(&mut self, v: usize) {
        self.vertex_label[v] = Some(self.vertex_count);
        self.vertex_count += 1;
    }

    fn label_arc(&mut self, a: usize) {
        if self.arc_label[a].is_none() {
            self.arc_label[a] = Some(self.arc_order.len());
            self.arc_order.push(a);
        }
    }

    /// Labels partners of queued arcs; a newly discovered vertex branches over
    /// orderings of its remaining arcs.
    fn explore(mut self, best: &mut Option<Code>) {
        while let Some(a) = self.queue.pop_front() {
            let b = self.g.inv(a);
            self.label_arc(b);
            let Some(w) = self.g.attach(b) else { continue };
            if self.vertex_label[w].is_some() {
                continue;
            }
            self.discover_vertex(w);
            let rest: Vec<usize> = self.g.nb(w).iter().copied().filter(|&x| x != b).collect();
            let n = rest.len();
            let mut perms = rest.into_iter().permutations(n);
            let first = perms.next().unwrap_or_default();
            for perm in perms {
                let mut child = self.clone();
                for &x in &perm {
                    child.label_arc(x);
                    child.queue.push_back(x);
                }
                child.explore(best);
            }
            for &x in &first {
                self.label_arc(x);
                self.queue.push_back(x);
            }
        }
        let code: Code = self
            .arc_order
            .iter()
            .map(|&a| {
                (
                    self.arc_label[self.g.inv(a)].expect("connected"),
                    self.g.attach(a).map(|v| self.vertex_label[v].unwrap()),
                )
            })
            .collect();
        if best.as_ref().is_none_or(|b| code < *b) {
            *best = Some(code);
        }
    }
}
