//! Exact finite geometry over small fields.
//!
//! Grassmann graphs `Γ_k(V)` and dual polar graphs `Γ(Π)` over `GF(q)`, and
//! isometric embeddings of the latter into the former: construction,
//! verification, structural analysis (star subspace, quotient reduction,
//! induced point map), exhaustive search, and classification up to
//! automorphisms of the Grassmann graph.

pub mod cli;
pub mod embed;
pub mod gf;
pub mod graph;
pub mod grassmann;
pub mod polar;
pub mod subspace;

pub use embed::{
    analyze, canonical_embedding, check_line_images, classify_embeddings, connecting_automorphism,
    extract_star_subspace, induce_point_map, polar_span, reduce_to_quotient, search_embeddings, verify_isometric,
    EmbedError, Embedding, EquivalenceWitness, SearchOptions,
};
pub use gf::{build_field, Elem, Field, FieldElement, FieldError, FieldSpec};
pub use graph::{bfs_distance, intersection_numbers, FiniteGraph, GraphError, IntersectionNumbers, SubspaceGraph};
pub use grassmann::{
    duality_map, enum_grassmannian, gaussian_binomial, grassmann_distance, star, GrassmannError, GrassmannGraph,
};
pub use polar::{build_polar_space, dual_polar_graph, point_star, Form, FormKind, FormSpec, PolarError, PolarSpace};
pub use subspace::{rref, MatrixGF, QuotientSpace, Subspace, SubspaceError};
