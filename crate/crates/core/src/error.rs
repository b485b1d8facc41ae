use thiserror::Error;

/// Errors raised by the mesh generation pipeline. Each variant names the module it comes from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain: invalid rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]")]
    InvalidDomain { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
    #[error("domain: grid must have at least 3x3 nodes, got {nx}x{ny}")]
    InvalidGrid { nx: usize, ny: usize },
    #[error("domain: field has {got} values, expected {expected}")]
    FieldLength { expected: usize, got: usize },
    #[error("domain: non-finite value at node ({i}, {j})")]
    NonFiniteValue { i: usize, j: usize },
    #[error("domain: point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("domain: xi and eta fields live on different grids")]
    GridMismatch,
    #[error("domain: inversion failed for target ({a}, {b}), outside the computational image")]
    InversionFailure { a: usize, b: usize },
    #[error("domain: degenerate map, zero-area triangle in cell ({i}, {j})")]
    DegenerateMap { i: usize, j: usize },

    #[error("monitor: non-finite or non-positive density at ({x}, {y})")]
    MonitorEvaluation { x: f64, y: f64 },
    #[error("monitor: invalid parameter {name} = {value}")]
    MonitorParameter { name: String, value: f64 },

    #[error("detsolver: invalid configuration: {0}")]
    SolverConfig(String),
    #[error("detsolver: boundary data mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("sde: invalid walk configuration: {0}")]
    WalkConfig(String),

    #[error("decomposition: grid with {nodes} nodes on the {axis} axis cannot be split into {parts} subdomains")]
    Layout { axis: char, nodes: usize, parts: usize },
    #[error("decomposition: {0}")]
    Plan(String),

    #[error("smoothing: invalid configuration: {0}")]
    SmoothConfig(String),
    #[error("smoothing: FTCS instability detected with dt = {dt}")]
    Instability { dt: f64 },
    #[error("smoothing: singular local fit at node {node}")]
    SingularFit { node: usize },

    #[error("quality: tangled or degenerate cell ({a}, {b})")]
    Tangled { a: usize, b: usize },
    #[error("quality: mesh shapes differ ({0}x{1} vs {2}x{3})")]
    ShapeMismatch(usize, usize, usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
