//! Finite-field model of Bruen chains in PG(3,q).
//!
//! Points of PG(3,q) are elements of F_{q^4} up to F_q-scalars, the elliptic
//! quadric is Q(x) = tr(x^2), and X = <1>. On top of that model the crate
//! builds the cone graphs Γ_X and Δ_X, searches them for maximum cliques with
//! symmetry-reduced starters, and verifies Bruen chains.

pub mod bitset;
pub mod chains;
pub mod clique;
pub mod conway;
pub mod field;
pub mod graphs;
pub mod io;
pub mod projective;
pub mod symmetry;

pub use bitset::{AdjacencyMatrix, Bitset};
pub use chains::{Chain, ChainError, VerifyReport};
pub use clique::{SearchConfig, SearchResult, StarterSet};
pub use field::{make_field, Elem, FieldCtx, FieldError, FieldOptions, SquareClass};
pub use graphs::{ConeRule, Graph, GraphError, GraphKind};
pub use io::{FormatError, ResultRow};
pub use projective::{GeomError, LineType, PointKind, ProjPoint};
pub use symmetry::{OrbitPartition, PermSource, VertexPerm};
