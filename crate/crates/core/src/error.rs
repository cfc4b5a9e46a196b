use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("depth must be at least 1, got {0}")]
    InvalidDepth(i64),

    #[error("particle label (k={k}, m={m}) is outside 1 <= k <= m <= {depth}")]
    InvalidLabel { k: i64, m: i64, depth: usize },

    #[error("level {n} is outside 1..={depth}")]
    LevelOutOfRange { n: i64, depth: usize },

    #[error("pattern does not interlace: {0}")]
    NotInterlacing(String),

    #[error("window rows {n_min}..={n_max} leave the tiled rows 0..={max_row}")]
    WindowOutsideRegion {
        n_min: i64,
        n_max: i64,
        max_row: i64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "quadrature did not converge with {nodes} nodes: last {last:?}, previous {previous:?}"
    )]
    QuadratureNonConvergence {
        nodes: usize,
        last: (f64, f64),
        previous: (f64, f64),
    },

    #[error("kernel value {re} + {im}i should be real (tolerance {tol})")]
    ImaginaryPart { re: f64, im: f64, tol: f64 },

    #[error("invalid slope: {0}")]
    InvalidSlope(String),

    #[error("slope is frozen (a lozenge proportion vanishes)")]
    FrozenSlope,

    #[error("weights ({a}, {b}, {c}) violate the strict triangle inequality")]
    DegenerateTriangle { a: f64, b: f64, c: f64 },

    #[error("graph admits no dimer cover")]
    NotTileable,

    #[error("edge from white ({wx},{wn}) to black ({bx},{bn}) is not a honeycomb edge")]
    InvalidEdge { wx: i64, wn: i64, bx: i64, bn: i64 },

    #[error("vertex {0} is not in the graph")]
    MissingVertex(String),

    #[error("edge {0} is not in the graph")]
    MissingEdge(String),

    #[error("edges share a vertex")]
    OverlappingEdges,

    #[error("enumeration limited to {limit} black vertices, graph has {blacks}")]
    EnumerationTooLarge { blacks: usize, limit: usize },

    #[error("edge weights are not of (a,b,c) type: {0}")]
    NotAbcWeighted(String),

    #[error("couple precondition violated: {0}")]
    CouplePrecondition(String),

    #[error("stationary series terms stopped decreasing at m = {m}")]
    NonDecreasingTerms { m: usize },

    #[error("stationary series did not reach tolerance by m = {m_max}")]
    SeriesTruncated { m_max: usize },
}
