//! Pipeline execution for every subcommand.

use std::time::{Duration, Instant};

use sddmesh_core::{
    build_layout, invert_mesh, perona_malik, plan_interface_points, quality_report, solve_all_points, solve_sdd,
    solve_single_domain, GridSpec, MeshSolution, MonitorFunction, PhysicalMesh, QualityReport, Scope,
    SubdomainLayout, WalkConfig,
};

use crate::config::{Command, ReferenceSpec, RunConfig};
use crate::{io, CliError};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimingReport {
    pub t_stoc: f64,
    pub t_sub: f64,
    pub t_smooth: f64,
    pub t_total: f64,
    /// One-thread single-domain solve (bench only).
    pub t_1: Option<f64>,
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub mesh: PhysicalMesh<f64>,
    pub solution: Option<MeshSolution<f64>>,
    pub quality: QualityReport<f64>,
    pub timing: TimingReport,
    /// Monte Carlo points evaluated.
    pub mc_points: usize,
    pub warnings: Vec<String>,
}

/// Modelled speedup `p / (1 + k (nx + ny) t_mc / t_1)` for `p` processors, `k` Monte Carlo
/// points per interface, `nx` by `ny` subdomains and per-point Monte Carlo cost `t_mc`.
pub fn speedup_model(p: usize, k: usize, nx: usize, ny: usize, t_mc: f64, t_1: f64) -> f64 {
    p as f64 / (1.0 + k as f64 * (nx + ny) as f64 * t_mc / t_1)
}

fn core_err(e: sddmesh_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs `cfg` inside a pool of `cfg.threads` workers (rayon's default when unset), then
/// writes the requested outputs.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(format!("cli: thread pool: {e}")))?;
    let summary = pool.install(|| execute(cfg))?;
    write_outputs(cfg, &summary)?;
    Ok(summary)
}

fn execute(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    if cfg.command == Command::Quality {
        return quality_only(cfg);
    }
    let m = cfg.monitor_function()?;
    let grid = GridSpec::new(*m.domain(), cfg.nx, cfg.ny).map_err(|e| CliError::Validation(e.to_string()))?;
    let walk = WalkConfig::new(cfg.scheme, cfg.walks, cfg.seed);
    let mut timing = TimingReport::default();
    let mut warnings = Vec::new();
    let mut mc_points = 0;
    let mut layout = None;

    let raw = match cfg.command {
        Command::Single => {
            let t = Instant::now();
            let s = solve_single_domain(&m, &grid, &cfg.solver).map_err(core_err)?;
            timing.t_sub = secs(t.elapsed());
            for (name, st) in [("xi", s.xi), ("eta", s.eta)] {
                if !st.converged {
                    warnings.push(format!("detsolver: {name} stopped at the iteration cap, last update {:e}", st.last_update));
                }
            }
            s.solution
        }
        Command::StochasticFull => {
            let t = Instant::now();
            let s = solve_all_points(&m, &grid, &walk).map_err(core_err)?;
            timing.t_stoc = secs(t.elapsed());
            mc_points = (cfg.nx - 2) * (cfg.ny - 2);
            warnings.extend(s.warnings);
            s.solution
        }
        Command::Sdd | Command::Bench => {
            let l = build_layout(&grid, cfg.subdomains.0, cfg.subdomains.1).map_err(|e| CliError::Validation(e.to_string()))?;
            let plan = plan_interface_points(cfg.placement, &m, &l).map_err(core_err)?;
            let r = solve_sdd(&m, &l, &plan, &walk, &cfg.solver, cfg.interface_span).map_err(core_err)?;
            timing.t_stoc = secs(r.t_stoc);
            timing.t_sub = secs(r.t_sub);
            mc_points = r.interfaces.as_ref().map_or(0, |i| i.mc_points);
            warnings.extend(r.warnings);
            layout = Some(l);
            r.solution
        }
        Command::Quality => unreachable!(),
    };

    let t = Instant::now();
    let solution = match &cfg.smoothing {
        Some(s) => {
            warnings.extend(s.stability_warning(&grid));
            let scoped = if s.scope == Scope::PerSubdomain { layout.as_ref() } else { None };
            perona_malik(&raw, s, scoped).map_err(core_err)?
        }
        None => raw,
    };
    timing.t_smooth = secs(t.elapsed());
    timing.t_total = timing.t_stoc + timing.t_sub + timing.t_smooth;
    let mesh = invert_mesh(&solution, cfg.nx, cfg.ny).map_err(core_err)?;

    if cfg.command == Command::Bench {
        let t1 = one_thread_single(&m, &grid, cfg)?;
        timing.t_1 = Some(t1);
        let (sx, sy) = cfg.subdomains;
        let t_mc = if mc_points == 0 { 0.0 } else { timing.t_stoc / mc_points as f64 };
        let k = mc_points.div_ceil(sx + sy);
        timing.speedup = Some(speedup_model(rayon::current_num_threads(), k, sx, sy, t_mc, t1));
    }

    let reference = match (&cfg.reference, cfg.command) {
        (Some(ReferenceSpec::File(p)), _) => Some(io::read_mesh(p)?),
        (Some(ReferenceSpec::Single), _) | (None, Command::Bench) => Some(reference_mesh(&m, &grid, cfg, layout.as_ref())?),
        (None, _) => None,
    };
    let quality = quality_report(&mesh, reference.as_ref(), Some(&m)).map_err(core_err)?;

    Ok(RunSummary { mesh, solution: Some(solution), quality, timing, mc_points, warnings })
}

fn one_thread_single(m: &MonitorFunction<f64>, grid: &GridSpec<f64>, cfg: &RunConfig) -> Result<f64, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Runtime(format!("cli: thread pool: {e}")))?;
    pool.install(|| {
        let t = Instant::now();
        let s = solve_single_domain(m, grid, &cfg.solver).map_err(core_err)?;
        invert_mesh(&s.solution, cfg.nx, cfg.ny).map_err(core_err)?;
        Ok(secs(t.elapsed()))
    })
}

/// Deterministic single-domain mesh, passed through the same smoothing as the run so both
/// meshes see the same filter.
pub fn reference_mesh(
    m: &MonitorFunction<f64>,
    grid: &GridSpec<f64>,
    cfg: &RunConfig,
    layout: Option<&SubdomainLayout<f64>>,
) -> Result<PhysicalMesh<f64>, CliError> {
    let s = solve_single_domain(m, grid, &cfg.solver).map_err(core_err)?;
    let sol = match &cfg.smoothing {
        Some(sm) => {
            let scoped = if sm.scope == Scope::PerSubdomain { layout } else { None };
            perona_malik(&s.solution, sm, scoped).map_err(core_err)?
        }
        None => s.solution,
    };
    invert_mesh(&sol, cfg.nx, cfg.ny).map_err(core_err)
}

fn quality_only(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let path = cfg.mesh_in.as_ref().ok_or_else(|| CliError::Validation("--mesh is required".into()))?;
    let mesh = io::read_mesh(path)?;
    let reference = match &cfg.reference {
        Some(ReferenceSpec::File(p)) => Some(io::read_mesh(p)?),
        _ => None,
    };
    let m = if reference.is_some() && cfg.monitor != "constant" { Some(cfg.monitor_function()?) } else { None };
    let quality = quality_report(&mesh, reference.as_ref(), m.as_ref()).map_err(core_err)?;
    Ok(RunSummary { mesh, solution: None, quality, timing: TimingReport::default(), mc_points: 0, warnings: Vec::new() })
}

fn write_outputs(cfg: &RunConfig, s: &RunSummary) -> Result<(), CliError> {
    if let Some(p) = &cfg.out {
        io::write_mesh(&s.mesh, p)?;
    }
    if let Some(p) = &cfg.svg {
        io::render_svg(&s.mesh, p)?;
    }
    if let Some(p) = &cfg.csv {
        let text = match cfg.command {
            Command::Bench => io::bench_csv((cfg.nx, cfg.ny), cfg.subdomains, cfg.walks, cfg.scheme, s.mc_points, &s.timing, &s.quality),
            Command::Single | Command::Quality => io::quality_csv(None, None, &s.quality),
            Command::StochasticFull | Command::Sdd => io::quality_csv(Some(cfg.walks), Some(cfg.scheme), &s.quality),
        };
        io::write_text(p, &text)?;
    }
    Ok(())
}
