//! Exact symbolic computation for Leavitt path algebras.
//!
//! The crate provides canonical normal forms for elements of L_K(E) over an
//! exact field, construction and certification of (graded) endomorphisms and
//! automorphisms from matrix data, Zhang-twisted multiplication with the
//! embedding theta_P, and Chen simple modules over rose graphs together with
//! their scalar-matrix twists. Every operation is exact; there is no floating
//! point anywhere.

pub mod algebra;
pub mod chenmod;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod matrix;
pub mod morphism;
pub mod parse;
pub mod scalar;
pub mod script;
pub mod twist;
pub mod verify;

pub use algebra::{Element, Monomial, Word};
pub use error::{LpaError, Result};
pub use graph::{ClosedPathClass, Edge, EdgeId, Graph, Path, VertexId, VertexKind};
pub use matrix::{AlgMatrix, InvertiblePair, KMatrix};
pub use morphism::{Automorphism, Endo, Frame};
pub use scalar::{FieldMode, Scalar};
