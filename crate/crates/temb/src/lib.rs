//! Perfect t-embeddings and origami maps of uniformly weighted Aztec diamonds
//! and tower graphs.
//!
//! Three independent constructions of the Aztec embedding are provided: the
//! wave recurrence and its update rules ([`recurrence`]), edge probabilities
//! from domino shuffling ([`probability`]) and contour integrals of the
//! inverse Kasteleyn matrix ([`kasteleyn`]). [`tower`] builds the tower-graph
//! embeddings, [`limits`] holds the continuum objects and [`verify`] checks
//! the geometric hypotheses numerically.

pub mod io;
pub mod kasteleyn;
pub mod lattice;
pub mod limits;
pub mod probability;
pub mod recurrence;
pub mod scalar;
pub mod tower;
pub mod verify;

pub use lattice::{FaceCoord, GraphKind, Grid, TEmbeddingLevel, Vertex, VertexKind};
pub use scalar::{Cx, Dyadic, Scalar};

/// Exact dyadic embedding level.
pub type ExactLevel = TEmbeddingLevel<Dyadic>;
/// Double-precision embedding level.
pub type FloatLevel = TEmbeddingLevel<f64>;
/// Exact complex scalar.
pub type ExactCx = Cx<Dyadic>;
/// Exact rational scalar, used by the brute-force oracle.
pub type Rational = num_rational::BigRational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("({j},{k},{n}) is off the parity lattice")]
    Parity { j: i64, k: i64, n: i64 },
    #[error("({x},{y}) is outside the liquid region")]
    OutsideLiquid { x: f64, y: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("no admissible pairs")]
    NoAdmissiblePairs,
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("disconnected face graph")]
    Disconnected,
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
