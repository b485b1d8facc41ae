//! Command-line arguments and their validation into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sddmesh_core::{
    build_layout, GridSpec, MonitorFunction, PlacementStrategy, Scheme, Scope, SmoothConfig, SolverConfig,
};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "sddmesh", version, about = "Adaptive mesh generation by stochastic domain decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Deterministic single-domain solve.
    Single(RunArgs),
    /// Every interior node by Monte Carlo.
    StochasticFull(RunArgs),
    /// Stochastic domain decomposition.
    Sdd(RunArgs),
    /// Quality of a mesh file, optionally against a reference mesh file.
    Quality(QualityArgs),
    /// Timed SDD run against a one-thread single-domain solve.
    Bench(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// constant, running, huang-sloan, mackenzie or five-ring.
    #[arg(long, default_value = "running")]
    pub monitor: String,
    /// Monitor parameter override, e.g. `--param R=30`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Grid nodes per axis, `NXxNY`.
    #[arg(long, default_value = "29x29")]
    pub grid: String,
    /// Subdomain counts, `SXxSY` (sdd, bench).
    #[arg(long)]
    pub subdomains: Option<String>,
    /// `exponential:LAMBDA`, `linear:DT` or `linear-nobridge:DT`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Monte Carlo walks per point.
    #[arg(long)]
    pub walks: Option<usize>,
    /// `all`, `equispaced:K` or `optimal` (sdd, bench).
    #[arg(long)]
    pub placement: Option<String>,
    /// Perona-Malik smoothing, `global:M` or `subdomain:M`.
    #[arg(long)]
    pub smooth: Option<String>,
    #[arg(long)]
    pub smooth_k: Option<f64>,
    #[arg(long)]
    pub smooth_dt: Option<f64>,
    /// Interface pre-smoothing window (odd, at least 3).
    #[arg(long)]
    pub interface_span: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// `single` for an in-process single-domain reference, or a mesh file.
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Mesh output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV report.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG plot of the mesh lines.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct QualityArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Monitor for the l-infinity error (needs a reference).
    #[arg(long)]
    pub monitor: Option<String>,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Single,
    StochasticFull,
    Sdd,
    Quality,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Single => "single",
            Command::StochasticFull => "stochastic-full",
            Command::Sdd => "sdd",
            Command::Quality => "quality",
            Command::Bench => "bench",
        }
    }

    fn is_stochastic(self) -> bool {
        matches!(self, Command::StochasticFull | Command::Sdd | Command::Bench)
    }

    fn is_decomposed(self) -> bool {
        matches!(self, Command::Sdd | Command::Bench)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    Single,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub monitor: String,
    pub params: Vec<(String, f64)>,
    pub nx: usize,
    pub ny: usize,
    pub subdomains: (usize, usize),
    pub scheme: Scheme<f64>,
    pub walks: usize,
    pub placement: PlacementStrategy,
    pub smoothing: Option<SmoothConfig<f64>>,
    pub interface_span: Option<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub reference: Option<ReferenceSpec>,
    pub solver: SolverConfig<f64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Input mesh of the `quality` command.
    pub mesh_in: Option<PathBuf>,
}

pub const DEFAULT_WALKS: usize = 1000;
pub const DEFAULT_LAMBDA: f64 = 1000.0;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn parse_pair(s: &str, what: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| invalid(format!("{what} must look like 29x29, got '{s}'")))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid(format!("{what} must look like 29x29, got '{s}'")));
    Ok((p(a)?, p(b)?))
}

pub fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    raw.iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| invalid(format!("parameter '{p}' must be NAME=VALUE")))?;
            let v: f64 = v.parse().map_err(|_| invalid(format!("parameter '{p}' has a non-numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn parse_scheme(s: &str) -> Result<Scheme<f64>, CliError> {
    let (kind, value) = s.split_once(':').ok_or_else(|| invalid(format!("scheme '{s}' must be exponential:LAMBDA or linear:DT")))?;
    let v: f64 = value.parse().map_err(|_| invalid(format!("scheme '{s}' has a non-numeric value")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("scheme '{s}' needs a positive value")));
    }
    match kind {
        "exponential" | "exp" => Ok(Scheme::Exponential { lambda: v }),
        "linear" => Ok(Scheme::Linear { dt: v, bridge: true }),
        "linear-nobridge" => Ok(Scheme::Linear { dt: v, bridge: false }),
        _ => Err(invalid(format!("unknown scheme '{kind}'"))),
    }
}

pub fn parse_placement(s: &str) -> Result<PlacementStrategy, CliError> {
    match s {
        "all" => Ok(PlacementStrategy::All),
        "optimal" => Ok(PlacementStrategy::Optimal),
        _ => match s.strip_prefix("equispaced:") {
            Some(k) => match k.parse::<usize>() {
                Ok(k) if k > 0 => Ok(PlacementStrategy::Equispaced(k)),
                _ => Err(invalid(format!("placement '{s}' needs a positive point count"))),
            },
            None => Err(invalid(format!("placement must be all, equispaced:K or optimal, got '{s}'"))),
        },
    }
}

fn parse_smooth(s: &str, k: Option<f64>, dt: Option<f64>) -> Result<SmoothConfig<f64>, CliError> {
    let (scope, steps) = s.split_once(':').unwrap_or((s, "5"));
    let scope = match scope {
        "global" => Scope::Global,
        "subdomain" => Scope::PerSubdomain,
        _ => return Err(invalid(format!("smoothing scope must be global or subdomain, got '{scope}'"))),
    };
    let steps = steps.parse().map_err(|_| invalid(format!("smoothing steps must be an integer, got '{steps}'")))?;
    let d = SmoothConfig::default();
    let cfg = SmoothConfig { k: k.unwrap_or(d.k), dt: dt.unwrap_or(d.dt), steps, scope };
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(cfg)
}

impl RunConfig {
    /// Parses and validates arguments given without the program name.
    pub fn parse_from<I, S>(args: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = S>,
        S: Into<std::ffi::OsString> + Clone,
    {
        let argv = std::iter::once(std::ffi::OsString::from("sddmesh")).chain(args.into_iter().map(Into::into));
        let cli = Cli::try_parse_from(argv).map_err(|e| invalid(e.to_string().lines().next().unwrap_or("").to_string()))?;
        Self::from_args(cli.command)
    }

    pub fn from_args(args: CommandArgs) -> Result<Self, CliError> {
        match args {
            CommandArgs::Single(a) => Self::from_run_args(Command::Single, a),
            CommandArgs::StochasticFull(a) => Self::from_run_args(Command::StochasticFull, a),
            CommandArgs::Sdd(a) => Self::from_run_args(Command::Sdd, a),
            CommandArgs::Bench(a) => Self::from_run_args(Command::Bench, a),
            CommandArgs::Quality(q) => Self::from_quality_args(q),
        }
    }

    pub fn from_run_args(command: Command, a: RunArgs) -> Result<Self, CliError> {
        let cmd = command.name();
        let only = |present: bool, flag: &str, ok: bool| -> Result<(), CliError> {
            if present && !ok {
                return Err(invalid(format!("--{flag} is not valid for the {cmd} command")));
            }
            Ok(())
        };
        only(a.subdomains.is_some(), "subdomains", command.is_decomposed())?;
        only(a.placement.is_some(), "placement", command.is_decomposed())?;
        only(a.interface_span.is_some(), "interface-span", command.is_decomposed())?;
        only(a.scheme.is_some(), "scheme", command.is_stochastic())?;
        only(a.walks.is_some(), "walks", command.is_stochastic())?;
        only(a.seed.is_some(), "seed", command.is_stochastic())?;
        only(a.smooth_k.is_some() || a.smooth_dt.is_some(), "smooth-k/--smooth-dt without --smooth", a.smooth.is_some())?;
        if command.is_decomposed() && a.seed.is_none() {
            return Err(invalid(format!("--seed is required for the {cmd} command")));
        }

        let params = parse_params(&a.params)?;
        let monitor = MonitorFunction::<f64>::builtin(&a.monitor, &params).map_err(|e| invalid(e.to_string()))?;
        let (nx, ny) = parse_pair(&a.grid, "--grid")?;
        let grid = GridSpec::new(*monitor.domain(), nx, ny).map_err(|e| invalid(e.to_string()))?;
        let subdomains = match &a.subdomains {
            Some(s) => parse_pair(s, "--subdomains")?,
            None if command.is_decomposed() => (2, 2),
            None => (1, 1),
        };
        if command.is_decomposed() {
            build_layout(&grid, subdomains.0, subdomains.1).map_err(|e| invalid(e.to_string()))?;
        }
        let scheme = match &a.scheme {
            Some(s) => parse_scheme(s)?,
            None => Scheme::Exponential { lambda: DEFAULT_LAMBDA },
        };
        let walks = a.walks.unwrap_or(DEFAULT_WALKS);
        if walks == 0 {
            return Err(invalid("--walks must be at least 1"));
        }
        let placement = match &a.placement {
            Some(p) => parse_placement(p)?,
            None => PlacementStrategy::All,
        };
        let smoothing = a.smooth.as_deref().map(|s| parse_smooth(s, a.smooth_k, a.smooth_dt)).transpose()?;
        if let Some(s) = &smoothing {
            if s.scope == Scope::PerSubdomain && !command.is_decomposed() {
                return Err(invalid(format!("subdomain smoothing is not valid for the {cmd} command")));
            }
        }
        if let Some(span) = a.interface_span {
            let shortest = nx.min(ny);
            if span < 3 || span % 2 == 0 || span > shortest {
                return Err(invalid(format!("--interface-span must be odd with 3 <= span <= {shortest}, got {span}")));
            }
        }
        if a.threads == Some(0) {
            return Err(invalid("--threads must be at least 1"));
        }
        let reference = match a.reference.as_deref() {
            None => None,
            Some("single") => Some(ReferenceSpec::Single),
            Some(path) => Some(ReferenceSpec::File(PathBuf::from(path))),
        };
        let d = SolverConfig::default();
        let solver = SolverConfig { tol: a.tol.unwrap_or(d.tol), max_iters: a.max_iters };
        solver.validate().map_err(|e| invalid(e.to_string()))?;

        Ok(Self {
            command,
            monitor: a.monitor,
            params,
            nx,
            ny,
            subdomains,
            scheme,
            walks,
            placement,
            smoothing,
            interface_span: a.interface_span,
            seed: a.seed.unwrap_or(0),
            threads: a.threads,
            reference,
            solver,
            out: a.out,
            csv: a.csv,
            svg: a.svg,
            mesh_in: None,
        })
    }

    fn from_quality_args(q: QualityArgs) -> Result<Self, CliError> {
        let params = parse_params(&q.params)?;
        if q.monitor.is_some() && q.reference.is_none() {
            return Err(invalid("--monitor needs --reference for the l-infinity error"));
        }
        let monitor = q.monitor.unwrap_or_else(|| "constant".into());
        MonitorFunction::<f64>::builtin(&monitor, &params).map_err(|e| invalid(e.to_string()))?;
        Ok(Self {
            command: Command::Quality,
            monitor,
            params,
            nx: 0,
            ny: 0,
            subdomains: (1, 1),
            scheme: Scheme::Exponential { lambda: DEFAULT_LAMBDA },
            walks: 0,
            placement: PlacementStrategy::All,
            smoothing: None,
            interface_span: None,
            seed: 0,
            threads: None,
            reference: q.reference.map(ReferenceSpec::File),
            solver: SolverConfig::default(),
            out: None,
            csv: q.csv,
            svg: None,
            mesh_in: Some(q.mesh),
        })
    }

    pub fn monitor_function(&self) -> Result<MonitorFunction<f64>, CliError> {
        MonitorFunction::builtin(&self.monitor, &self.params).map_err(|e| invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(line: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse_from(line.split_whitespace())
    }

    #[test]
    fn parses_a_full_sdd_line() {
        let c = cfg("sdd --monitor running --grid 29x29 --subdomains 2x2 --walks 10000 --scheme exponential:10000 --placement all --reference single --seed 3").unwrap();
        assert_eq!(c.command, Command::Sdd);
        assert_eq!((c.nx, c.ny, c.subdomains), (29, 29, (2, 2)));
        assert_eq!(c.scheme, Scheme::Exponential { lambda: 10000.0 });
        assert_eq!(c.walks, 10000);
        assert_eq!(c.reference, Some(ReferenceSpec::Single));
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn rejects_invalid_combinations() {
        for line in [
            "single --placement optimal",
            "single --subdomains 2x2",
            "single --seed 1",
            "sdd --grid 29x29",
            "bench --grid 29x29",
            "sdd --seed 1 --subdomains 3x3",
            "sdd --seed 1 --placement equispaced:0",
            "sdd --seed 1 --interface-span 4",
            "stochastic-full --smooth subdomain:5",
            "single --grid 2x29",
            "single --grid 29",
            "single --monitor nope",
            "single --param R",
            "single --param Q=3",
            "stochastic-full --scheme linear:-1",
            "stochastic-full --scheme walk:1",
            "stochastic-full --walks 0",
            "single --threads 0",
            "single --smooth-k 3",
            "single --tol 0",
        ] {
            let e = cfg(line).unwrap_err();
            assert!(matches!(e, CliError::Validation(_)), "{line}");
            assert_eq!(e.exit_code(), 1);
            assert!(!e.to_string().contains('\n'), "{line}");
        }
    }

    #[test]
    fn clap_errors_are_validation_errors() {
        let e = cfg("single --no-such-flag").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn smoothing_and_placement_specs() {
        let c = cfg("sdd --seed 1 --smooth subdomain:10 --smooth-k 500 --placement equispaced:7 --interface-span 5").unwrap();
        let s = c.smoothing.unwrap();
        assert_eq!((s.scope, s.steps, s.k, s.dt), (Scope::PerSubdomain, 10, 500.0, 1e-4));
        assert_eq!(c.placement, PlacementStrategy::Equispaced(7));
        assert_eq!(c.interface_span, Some(5));
        assert_eq!(parse_scheme("linear-nobridge:1e-5").unwrap(), Scheme::Linear { dt: 1e-5, bridge: false });
    }
}
