//! Feynman graphs, graphical maps, modular operads and their nerves.

pub mod cli;
pub mod corpus;
pub mod decoration;
pub mod elementary;
pub mod graph;
pub mod gt;
mod iso;
pub mod morphism;
pub mod operad;
pub mod presheaf;
pub mod profinite;
pub mod validate;
pub mod variants;

pub use elementary::{classify_elementary, factorize, ElementaryKind, Factorization};
pub use graph::{Edge, FeynmanGraph, GenusGraph, GraphError, GraphJson};
pub use morphism::{
    compose, hom_set, validate_embedding, validate_graphical_map, EmbKey, Embedding, GraphRef,
    GraphicalMap, MorphismError,
};
