//! Decorations of graphs by a modular operad: the nerve values `NP_G`.

use std::collections::HashMap;

use itertools::Itertools;
use serde::Serialize;

use crate::graph::{Edge, FeynmanGraph};
use crate::morphism::GraphicalMap;
use crate::operad::{Colour, Elem, ModularOperad, OperadError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub genus: u32,
    pub elem: Elem,
}

impl Label {
    pub fn new(elem: Elem) -> Self {
        Self { genus: 0, elem }
    }
}

/// An involutive colouring of the arcs and a label per vertex, lying in the
/// entries of `κ(nb(v))` taken in stored arc order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Decoration {
    pub colouring: Vec<Colour>,
    pub labels: Vec<Label>,
}

pub fn vertex_profile(g: &FeynmanGraph, colouring: &[Colour], v: usize) -> Vec<Colour> {
    g.nb(v).iter().map(|&a| colouring[a]).collect()
}

/// Colours seen from the graph along its boundary: `κ(i(b))` for `b ∈ ∂`.
pub fn boundary_profile(g: &FeynmanGraph, colouring: &[Colour]) -> Vec<Colour> {
    g.boundary()
        .into_iter()
        .map(|b| colouring[g.inv(b)])
        .collect()
}

pub fn check_decoration(
    p: &dyn ModularOperad,
    g: &FeynmanGraph,
    d: &Decoration,
) -> Result<(), OperadError> {
    if d.colouring.len() != g.arc_count() || d.labels.len() != g.vertex_count() {
        return Err(OperadError::ProfileMismatch("decoration has the wrong shape".into()));
    }
    for a in 0..g.arc_count() {
        if d.colouring[g.inv(a)] != p.dagger(d.colouring[a]) {
            return Err(OperadError::ProfileMismatch(format!(
                "colouring is not involutive at `{}`",
                g.arc_name(a)
            )));
        }
    }
    for v in 0..g.vertex_count() {
        let prof = vertex_profile(g, &d.colouring, v);
        let l = d.labels[v];
        if l.elem >= p.entry_count(l.genus, &prof) {
            return Err(OperadError::ProfileMismatch(format!(
                "label of `{}` is not an entry of its profile",
                g.vertex_name(v)
            )));
        }
    }
    Ok(())
}

/// All involutive colourings of `g`.
pub fn colourings(p: &dyn ModularOperad, g: &FeynmanGraph) -> Vec<Vec<Colour>> {
    let edges = g.edges();
    let n = p.colour_count();
    if edges.is_empty() {
        return vec![vec![]];
    }
    (0..edges.len())
        .map(|_| 0..n)
        .multi_cartesian_product()
        .map(|choice| {
            let mut col = vec![0; g.arc_count()];
            for (&(a, b), &c) in edges.iter().zip(&choice) {
                col[a] = c;
                col[b] = p.dagger(c);
            }
            col
        })
        .collect()
}

/// Every decoration of `g`; labels range over all genera of the operad.
pub fn decorations(p: &dyn ModularOperad, g: &FeynmanGraph) -> Vec<Decoration> {
    let mut out = Vec::new();
    for col in colourings(p, g) {
        let choices: Vec<Vec<Label>> = (0..g.vertex_count())
            .map(|v| {
                let prof = vertex_profile(g, &col, v);
                p.genus_range()
                    .flat_map(|gen| {
                        (0..p.entry_count(gen, &prof)).map(move |x| Label { genus: gen, elem: x })
                    })
                    .collect()
            })
            .collect();
        if choices.is_empty() {
            out.push(Decoration {
                colouring: col,
                labels: vec![],
            });
            continue;
        }
        for labels in choices.into_iter().multi_cartesian_product() {
            out.push(Decoration {
                colouring: col.clone(),
                labels,
            });
        }
    }
    out
}

/// `|decorations(p, g)|` without listing them.
pub fn decoration_count(p: &dyn ModularOperad, g: &FeynmanGraph) -> usize {
    colourings(p, g)
        .into_iter()
        .map(|col| {
            (0..g.vertex_count())
                .map(|v| {
                    let prof = vertex_profile(g, &col, v);
                    p.genus_range().map(|gen| p.entry_count(gen, &prof)).sum::<usize>()
                })
                .product::<usize>()
        })
        .sum()
}

/// Evaluates a decoration, eliminating internal edges in stored order.
pub fn evaluate(
    p: &dyn ModularOperad,
    g: &FeynmanGraph,
    d: &Decoration,
) -> Result<(Vec<Colour>, Label), OperadError> {
    evaluate_in_order(p, g, d, &g.internal_edges())
}

struct Blob {
    ports: Vec<usize>,
    vertices: Vec<usize>,
    label: Label,
}

/// Evaluates a decoration eliminating the internal edges in `order`.
pub fn evaluate_in_order(
    p: &dyn ModularOperad,
    g: &FeynmanGraph,
    d: &Decoration,
    order: &[Edge],
) -> Result<(Vec<Colour>, Label), OperadError> {
    let col = &d.colouring;
    if g.vertex_count() == 0 {
        let c = col[0];
        return Ok((vec![p.dagger(c), c], Label::new(p.unit(c))));
    }
    let mut blobs: Vec<Option<Blob>> = (0..g.vertex_count())
        .map(|v| {
            Some(Blob {
                ports: g.nb(v).to_vec(),
                vertices: vec![v],
                label: d.labels[v],
            })
        })
        .collect();
    let mut owner: Vec<usize> = (0..g.vertex_count()).collect();
    let profile = |ports: &[usize]| -> Vec<Colour> { ports.iter().map(|&a| col[a]).collect() };
    let undefined = |s: String| OperadError::Undefined(s);
    for &(a, b) in order {
        if col[a] != p.dagger(col[b]) {
            return Err(OperadError::ProfileMismatch(format!(
                "colours across `{}` are not daggers of each other",
                g.arc_name(a)
            )));
        }
        let (ba, bb) = (owner[g.attach(a).unwrap()], owner[g.attach(b).unwrap()]);
        if ba == bb {
            let blob = blobs[ba].as_mut().unwrap();
            let i = blob.ports.iter().position(|&x| x == a).unwrap();
            let j = blob.ports.iter().position(|&x| x == b).unwrap();
            let (i, j) = (i.min(j), i.max(j));
            let c = profile(&blob.ports);
            let z = p
                .contract(blob.label.genus, &c, i, j, blob.label.elem)
                .ok_or_else(|| undefined(format!("ξ at `{}`", g.arc_name(a))))?;
            blob.label = Label {
                genus: p.contract_genus(blob.label.genus),
                elem: z,
            };
            blob.ports.retain(|&x| x != a && x != b);
        } else {
            let x = blobs[ba].take().unwrap();
            let y = blobs[bb].take().unwrap();
            let i = x.ports.iter().position(|&t| t == a).unwrap();
            let j = y.ports.iter().position(|&t| t == b).unwrap();
            let (c, e) = (profile(&x.ports), profile(&y.ports));
            let z = p
                .compose(x.label.genus, &c, i, x.label.elem, y.label.genus, &e, j, y.label.elem)
                .ok_or_else(|| undefined(format!("∘ at `{}`", g.arc_name(a))))?;
            let mut ports: Vec<usize> = x.ports.iter().copied().filter(|&t| t != a).collect();
            ports.extend(y.ports.iter().copied().filter(|&t| t != b));
            let mut vertices = x.vertices;
            vertices.extend(y.vertices);
            for &v in &vertices {
                owner[v] = ba;
            }
            blobs[ba] = Some(Blob {
                ports,
                vertices,
                label: Label {
                    genus: p.comp_genus(x.label.genus, y.label.genus),
                    elem: z,
                },
            });
        }
    }
    let live: Vec<Blob> = blobs.into_iter().flatten().collect();
    if live.len() != 1 {
        return Err(OperadError::ProfileMismatch(
            "elimination order does not connect the graph".into(),
        ));
    }
    let blob = &live[0];
    let target: Vec<usize> = g.boundary().into_iter().map(|b| g.inv(b)).collect();
    let perm: Vec<usize> = target
        .iter()
        .map(|t| blob.ports.iter().position(|x| x == t).unwrap())
        .collect();
    let c = profile(&blob.ports);
    let elem = p.act(blob.label.genus, &c, &perm, blob.label.elem);
    Ok((
        boundary_profile(g, col),
        Label {
            genus: blob.label.genus,
            elem,
        },
    ))
}

/// `φ*(dec)`: colours pulled back along `φ₀`, each vertex labelled by the
/// evaluation of the sub-decoration carried by `φ₁(v)`.
pub fn restrict(
    p: &dyn ModularOperad,
    phi: &GraphicalMap,
    d: &Decoration,
) -> Result<Decoration, OperadError> {
    let (h, g) = (&phi.source, &phi.target);
    let colouring: Vec<Colour> = phi.arc_map.iter().map(|&x| d.colouring[x]).collect();
    let mut labels = Vec::with_capacity(h.vertex_count());
    for v in 0..h.vertex_count() {
        let f = &phi.phi1[v];
        let k = &f.source;
        let sub_col: Vec<Colour> = f.arc_map.iter().map(|&x| d.colouring[x]).collect();
        let sub_labels: Vec<Label> = (0..k.vertex_count())
            .map(|u| {
                let w = f.vertex_map[u];
                let perm: Vec<usize> = k
                    .nb(u)
                    .iter()
                    .map(|&a| g.nb(w).iter().position(|&x| x == f.arc_map[a]).unwrap())
                    .collect();
                let l = d.labels[w];
                let prof = vertex_profile(g, &d.colouring, w);
                Label {
                    genus: l.genus,
                    elem: p.act(l.genus, &prof, &perm, l.elem),
                }
            })
            .collect();
        let sub = Decoration {
            colouring: sub_col,
            labels: sub_labels,
        };
        let (prof, l) = evaluate(p, k, &sub)?;
        let bd = k.boundary();
        let perm: Vec<usize> = h
            .nb(v)
            .iter()
            .map(|&a| {
                let y = phi.arc_map[h.inv(a)];
                bd.iter().position(|&b| f.arc_map[b] == y).unwrap()
            })
            .collect();
        labels.push(Label {
            genus: l.genus,
            elem: p.act(l.genus, &prof, &perm, l.elem),
        });
    }
    Ok(Decoration { colouring, labels })
}

/// Index of each decoration for fast lookup.
pub fn index_decorations(decs: &[Decoration]) -> HashMap<Decoration, usize> {
    decs.iter().cloned().enumerate().map(|(k, d)| (d, k)).collect()
}
