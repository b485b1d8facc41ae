//! Adaptive mesh generation for the Winslow-type linear generator `div(w grad xi) = 0`,
//! `w = 1 / rho`, solved either deterministically or by stochastic domain decomposition.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases fix `f64`.

pub mod decomposition;
pub mod detsolver;
pub mod error;
pub mod grid;
pub mod monitor;
pub mod quality;
pub mod real;
pub mod sde;
pub mod smoothing;

pub use decomposition::{
    build_layout, plan_interface_points, solve_interfaces, solve_sdd, InterfaceLine, InterfacePlan, InterfaceValues,
    Orientation, PlacementStrategy, SddReport, Subdomain, SubdomainLayout,
};
pub use detsolver::{
    boundary_data, solve_1d_boundary, solve_dirichlet, solve_single_domain, BoundaryValues, DirichletSolve, Edge,
    SingleDomainSolve, SolveStats, SolverConfig,
};
pub use error::{Error, Result};
pub use grid::{invert_mesh, GridSpec, MeshSolution, PhysicalMesh, Point, RectDomain, ScalarField};
pub use monitor::{GradientMode, MonitorFunction, MonitorKind};
pub use quality::{cell_quality, quality_report, QualityReport};
pub use real::Real;
pub use sde::{mc_estimate, solve_all_points, BoundaryData, ExitSample, McEstimate, Scheme, StochasticSolve, WalkConfig};
pub use smoothing::{perona_malik, smooth_interface, Scope, SmoothConfig};

pub type Point64 = Point<f64>;
pub type RectDomain64 = RectDomain<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type MeshSolution64 = MeshSolution<f64>;
pub type PhysicalMesh64 = PhysicalMesh<f64>;
pub type MonitorFunction64 = MonitorFunction<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type WalkConfig64 = WalkConfig<f64>;
pub type SmoothConfig64 = SmoothConfig<f64>;
pub type SubdomainLayout64 = SubdomainLayout<f64>;
pub type QualityReport64 = QualityReport<f64>;
pub type SddReport64 = SddReport<f64>;

pub type MeshSolution32 = MeshSolution<f32>;
pub type PhysicalMesh32 = PhysicalMesh<f32>;
pub type MonitorFunction32 = MonitorFunction<f32>;
