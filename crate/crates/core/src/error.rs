use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("unknown lattice family `{0}`")]
    UnknownFamily(String),

    #[error("vertex {0} is absent from the graph")]
    AbsentVertex(usize),

    #[error("vertex {vertex} out of range for a graph with {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },

    #[error("invalid coin parameters: {0}")]
    InvalidCoin(String),

    #[error("graph has no present arcs")]
    NoPresentArcs,

    #[error("initial coin weights are not normalised (norm² = {0})")]
    Unnormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shift rule unavailable: {0}")]
    InvalidShift(String),

    #[error("vertex {0} carries probability but is unreachable from the origin")]
    Unreachable(usize),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
