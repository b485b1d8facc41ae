//! First-exit Monte Carlo for `dX = b dt + sqrt(2) dW`, `b = -grad(rho) / rho`, whose
//! generator `Laplace + b . grad` is the expanded form of `div(w grad u) = 0`.
//! Linear Euler-Maruyama stepping with a Brownian-bridge exit test, exponential time
//! stepping with its closed-form hit probability, and the boundary-functional estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::detsolver::{boundary_data, BoundaryValues, Edge};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MeshSolution, Point, RectDomain, ScalarField};
use crate::monitor::MonitorFunction;
use crate::real::Real;

/// Diffusion coefficient `sigma^2` of the walk.
pub const DIFFUSION: f64 = 2.0;
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
/// Walks that hit `max_steps` are retried with a fresh stream at most this many times.
pub const MAX_ATTEMPTS: u64 = 64;
/// Restart fraction above which an estimate carries a reliability warning.
pub const RESTART_WARNING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme<T> {
    /// Fixed step `dt`, optionally with the Brownian-bridge exit test.
    Linear { dt: T, bridge: bool },
    /// Steps drawn from `Exp(lambda)`, mean `1 / lambda`.
    Exponential { lambda: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig<T> {
    pub scheme: Scheme<T>,
    pub walks: usize,
    pub seed: u64,
    pub max_steps: u64,
}

impl<T: Real> WalkConfig<T> {
    pub fn new(scheme: Scheme<T>, walks: usize, seed: u64) -> Self {
        Self { scheme, walks, seed, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::Linear { dt, .. } if !(dt > T::zero()) || !dt.is_finite() => {
                return Err(Error::WalkConfig(format!("dt must be positive, got {dt}")));
            }
            Scheme::Exponential { lambda } if !(lambda > T::zero()) || !lambda.is_finite() => {
                return Err(Error::WalkConfig(format!("lambda must be positive, got {lambda}")));
            }
            _ => {}
        }
        if self.walks == 0 {
            return Err(Error::WalkConfig("walks must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::WalkConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSample<T> {
    pub exit_point: Point<T>,
    pub exit_edge: Edge,
    pub steps_taken: u64,
}

/// Dirichlet data for `xi` (f) and `eta` (g) on the four edges, tabulated at the grid's
/// boundary nodes and interpolated linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData<T> {
    domain: RectDomain<T>,
    xi: BoundaryValues<T>,
    eta: BoundaryValues<T>,
}

impl<T: Real> BoundaryData<T> {
    pub fn new(domain: RectDomain<T>, xi: BoundaryValues<T>, eta: BoundaryValues<T>) -> Result<Self> {
        for e in Edge::ALL {
            if xi.edge(e).len() < 2 || xi.edge(e).len() != eta.edge(e).len() {
                return Err(Error::BoundaryMismatch(format!("{e:?} tables differ between xi and eta")));
            }
        }
        Ok(Self { domain, xi, eta })
    }

    /// Tables from the same one-dimensional edge solves the deterministic solver uses.
    pub fn from_monitor(m: &MonitorFunction<T>, grid: &GridSpec<T>) -> Result<Self> {
        let (xi, eta) = boundary_data(m, grid)?;
        Self::new(*grid.domain(), xi, eta)
    }

    pub fn domain(&self) -> &RectDomain<T> {
        &self.domain
    }
    pub fn xi(&self) -> &BoundaryValues<T> {
        &self.xi
    }
    pub fn eta(&self) -> &BoundaryValues<T> {
        &self.eta
    }

    /// `(f, g)` at a point of `edge`.
    pub fn eval(&self, edge: Edge, p: Point<T>) -> (T, T) {
        let d = &self.domain;
        let s = match edge {
            Edge::Bottom | Edge::Top => (p.x - d.xmin()) / d.width(),
            Edge::Left | Edge::Right => (p.y - d.ymin()) / d.height(),
        };
        (interp_table(self.xi.edge(edge), s), interp_table(self.eta.edge(edge), s))
    }
}

/// Linear interpolation in a table on equally spaced nodes over `[0, 1]`.
fn interp_table<T: Real>(t: &[T], s: T) -> T {
    let n = t.len();
    let u = s.max(T::zero()).min(T::one()) * T::from_usize_lossy(n - 1);
    let k = u.floor().to_usize().unwrap_or(0).min(n - 2);
    let r = u - T::from_usize_lossy(k);
    t[k] + r * (t[k + 1] - t[k])
}

/// Stream for one walk attempt, keyed by `(seed, point_id, walk_id, attempt)`.
pub fn walk_rng(seed: u64, point_id: u64, walk_id: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point_id.to_le_bytes());
    key[16..24].copy_from_slice(&walk_id.to_le_bytes());
    key[24..32].copy_from_slice(&attempt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn normal_pair<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 2] {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    [T::lit(a), T::lit(b)]
}

fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random::<f64>())
}

/// `x + b dt + sqrt(2 dt) z` for given drift and normal draws.
pub fn step_with<T: Real>(x: Point<T>, drift: [T; 2], dt: T, z: [T; 2]) -> Point<T> {
    let s = (T::lit(DIFFUSION) * dt).sqrt();
    Point::new(x.x + drift[0] * dt + s * z[0], x.y + drift[1] * dt + s * z[1])
}

/// One Euler-Maruyama step with the drift evaluated at the start point.
pub fn step_linear<T: Real, R: Rng + ?Sized>(x: Point<T>, m: &MonitorFunction<T>, dt: T, rng: &mut R) -> Result<Point<T>> {
    let b = m.drift(x)?;
    Ok(step_with(x, b, dt, normal_pair(rng)))
}

/// Distances from `p` to the four edges, in `Edge::ALL` order; negative outside.
fn edge_distances<T: Real>(p: Point<T>, d: &RectDomain<T>) -> [T; 4] {
    [p.y - d.ymin(), d.ymax() - p.y, p.x - d.xmin(), d.xmax() - p.x]
}

/// Point on `edge` at segment parameter `t`, with the edge coordinate set exactly and the
/// other one clamped to the domain.
fn point_on_edge<T: Real>(x0: Point<T>, x1: Point<T>, t: T, edge: Edge, d: &RectDomain<T>) -> Point<T> {
    let px = (x0.x + t * (x1.x - x0.x)).max(d.xmin()).min(d.xmax());
    let py = (x0.y + t * (x1.y - x0.y)).max(d.ymin()).min(d.ymax());
    match edge {
        Edge::Bottom => Point::new(px, d.ymin()),
        Edge::Top => Point::new(px, d.ymax()),
        Edge::Left => Point::new(d.xmin(), py),
        Edge::Right => Point::new(d.xmax(), py),
    }
}

/// Exit through the first edge the straight segment crosses when `x1` is not strictly inside.
pub fn explicit_exit<T: Real>(x0: Point<T>, x1: Point<T>, d: &RectDomain<T>) -> Option<ExitSample<T>> {
    if d.contains_strictly(x1) {
        return None;
    }
    let d0 = edge_distances(x0, d);
    let d1 = edge_distances(x1, d);
    let mut best: Option<(T, Edge)> = None;
    for e in Edge::ALL {
        let k = e.index();
        if d1[k] <= T::zero() {
            let denom = d0[k] - d1[k];
            let t = if denom > T::zero() { d0[k] / denom } else { T::zero() };
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, e));
            }
        }
    }
    best.map(|(t, e)| ExitSample { exit_point: point_on_edge(x0, x1, t, e, d), exit_edge: e, steps_taken: 0 })
}

/// Edges ordered by distance from `x0`, nearest first (ties keep `Edge::ALL` order).
fn nearest_first<T: Real>(d0: &[T; 4]) -> [Edge; 4] {
    let mut order = Edge::ALL;
    order.sort_by(|a, b| d0[a.index()].partial_cmp(&d0[b.index()]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Probability that a bridge of diffusion `sigma^2 = 2` over `dt` between points at
/// distances `d0`, `d1` from a straight edge touches it: `exp(-2 d0 d1 / (sigma^2 dt))`.
pub fn bridge_probability<T: Real>(d0: T, d1: T, dt: T) -> T {
    (-(T::lit(2.0) * d0 * d1) / (T::lit(DIFFUSION) * dt)).exp()
}

/// Hit probability of an `Exp(lambda)`-time step given its end point:
/// `exp(-gamma (d0 + d1 - |d0 - d1|))`, `gamma = sqrt(2 lambda / sigma^2)`.
pub fn exponential_hit_probability<T: Real>(d0: T, d1: T, lambda: T) -> T {
    let gamma = (T::lit(2.0) * lambda / T::lit(DIFFUSION)).sqrt();
    (-gamma * (d0 + d1 - (d0 - d1).abs())).exp()
}

fn conditional_exit<T: Real, R: Rng + ?Sized>(
    x0: Point<T>,
    x1: Point<T>,
    d: &RectDomain<T>,
    rng: &mut R,
    prob: impl Fn(T, T) -> T,
) -> Option<ExitSample<T>> {
    let d0 = edge_distances(x0, d);
    let d1 = edge_distances(x1, d);
    for e in nearest_first(&d0) {
        let k = e.index();
        let p = prob(d0[k], d1[k]);
        if uniform::<T, R>(rng) < p {
            let s = d0[k] + d1[k];
            let t = if s > T::zero() { d0[k] / s } else { T::zero() };
            return Some(ExitSample { exit_point: point_on_edge(x0, x1, t, e, d), exit_edge: e, steps_taken: 0 });
        }
    }
    None
}

/// Exit test for the step `x0 -> x1`: the explicit crossing when `x1` is outside, otherwise
/// the per-edge bridge test, nearest edge first, at most one exit.
pub fn bridge_exit_test<T: Real, R: Rng + ?Sized>(
    x0: Point<T>,
    x1: Point<T>,
    dt: T,
    domain: &RectDomain<T>,
    rng: &mut R,
) -> Option<ExitSample<T>> {
    explicit_exit(x0, x1, domain).or_else(|| conditional_exit(x0, x1, domain, rng, |a, b| bridge_probability(a, b, dt)))
}

/// One exponential step: `dt ~ Exp(lambda)`, a Gaussian step of that length, then the explicit
/// and conditional exit tests.
pub fn step_exponential<T: Real, R: Rng + ?Sized>(
    x: Point<T>,
    m: &MonitorFunction<T>,
    lambda: T,
    domain: &RectDomain<T>,
    rng: &mut R,
) -> Result<(Point<T>, Option<ExitSample<T>>)> {
    let e: f64 = rng.sample(Exp1);
    let dt = T::lit(e) / lambda;
    let x1 = step_linear(x, m, dt, rng)?;
    let exit = explicit_exit(x, x1, domain)
        .or_else(|| conditional_exit(x, x1, domain, rng, |a, b| exponential_hit_probability(a, b, lambda)));
    Ok((x1, exit))
}

/// Runs one walk from `p`. `None` when `max_steps` is reached without exiting.
pub fn run_walk<T: Real, R: Rng + ?Sized>(
    p: Point<T>,
    m: &MonitorFunction<T>,
    domain: &RectDomain<T>,
    scheme: Scheme<T>,
    max_steps: u64,
    rng: &mut R,
) -> Result<Option<ExitSample<T>>> {
    let mut x = p;
    for step in 1..=max_steps {
        let (x1, exit) = match scheme {
            Scheme::Linear { dt, bridge } => {
                let x1 = step_linear(x, m, dt, rng)?;
                let exit = if bridge { bridge_exit_test(x, x1, dt, domain, rng) } else { explicit_exit(x, x1, domain) };
                (x1, exit)
            }
            Scheme::Exponential { lambda } => step_exponential(x, m, lambda, domain, rng)?,
        };
        if let Some(mut e) = exit {
            e.steps_taken = step;
            return Ok(Some(e));
        }
        x = x1;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate<T> {
    pub xi: T,
    pub eta: T,
    pub stderr_xi: T,
    pub stderr_eta: T,
    pub walks: usize,
    /// Exits per edge, `Edge::ALL` order.
    pub edge_counts: [usize; 4],
    pub restarts: u64,
    pub total_steps: u64,
    pub warning: Option<String>,
}

struct WalkOutcome<T> {
    f: T,
    g: T,
    edge: Edge,
    steps: u64,
    restarts: u64,
}

fn one_walk<T: Real>(
    p: Point<T>,
    point_id: u64,
    walk_id: u64,
    m: &MonitorFunction<T>,
    bd: &BoundaryData<T>,
    cfg: &WalkConfig<T>,
) -> Result<WalkOutcome<T>> {
    let mut steps = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = walk_rng(cfg.seed, point_id, walk_id, attempt);
        match run_walk(p, m, bd.domain(), cfg.scheme, cfg.max_steps, &mut rng)? {
            Some(e) => {
                let (f, g) = bd.eval(e.exit_edge, e.exit_point);
                return Ok(WalkOutcome { f, g, edge: e.exit_edge, steps: steps + e.steps_taken, restarts: attempt });
            }
            None => steps += cfg.max_steps,
        }
    }
    Err(Error::WalkConfig(format!(
        "walk {walk_id} of point {point_id} did not exit within {} steps in {MAX_ATTEMPTS} attempts",
        cfg.max_steps
    )))
}

fn mean_and_stderr<T: Real>(v: impl Iterator<Item = T> + Clone, n: usize) -> (T, T) {
    let nn = T::from_usize_lossy(n);
    let mean = v.clone().fold(T::zero(), |a, b| a + b) / nn;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = v.fold(T::zero(), |a, b| a + (b - mean) * (b - mean));
    let var = ss / T::from_usize_lossy(n - 1);
    (mean, (var / nn).sqrt())
}

/// Monte Carlo estimate of `(xi, eta)` at `p` from `cfg.walks` walks. Each walk's exit point
/// feeds both estimates. Walk `k` uses the stream keyed by `(seed, point_id, k)`, and the
/// reduction runs in walk order, so the result does not depend on scheduling.
pub fn mc_estimate<T: Real>(
    p: Point<T>,
    point_id: u64,
    m: &MonitorFunction<T>,
    bd: &BoundaryData<T>,
    cfg: &WalkConfig<T>,
) -> Result<McEstimate<T>> {
    cfg.validate()?;
    if !bd.domain().contains_strictly(p) {
        return Err(Error::OutOfDomain { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
    }
    let outcomes: Vec<WalkOutcome<T>> = (0..cfg.walks as u64)
        .into_par_iter()
        .map(|w| one_walk(p, point_id, w, m, bd, cfg))
        .collect::<Result<_>>()?;
    let n = outcomes.len();
    let (xi, stderr_xi) = mean_and_stderr(outcomes.iter().map(|o| o.f), n);
    let (eta, stderr_eta) = mean_and_stderr(outcomes.iter().map(|o| o.g), n);
    let mut edge_counts = [0; 4];
    let mut restarts = 0;
    let mut total_steps = 0;
    for o in &outcomes {
        edge_counts[o.edge.index()] += 1;
        restarts += o.restarts;
        total_steps += o.steps;
    }
    let warning = (restarts as f64 > RESTART_WARNING_FRACTION * n as f64).then(|| {
        format!("sde: {restarts} restarts over {n} walks at point {point_id}, estimate may be unreliable")
    });
    Ok(McEstimate { xi, eta, stderr_xi, stderr_eta, walks: n, edge_counts, restarts, total_steps, warning })
}

/// Fully probabilistic solution: every interior node estimated by Monte Carlo, boundary
/// nodes taken from the Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSolve<T> {
    pub solution: MeshSolution<T>,
    pub max_stderr: T,
    pub restarts: u64,
    pub warnings: Vec<String>,
}

pub fn solve_all_points<T: Real>(m: &MonitorFunction<T>, grid: &GridSpec<T>, cfg: &WalkConfig<T>) -> Result<StochasticSolve<T>> {
    cfg.validate()?;
    let bd = BoundaryData::from_monitor(m, grid)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let interior: Vec<(usize, usize)> = (1..ny - 1).flat_map(|j| (1..nx - 1).map(move |i| (i, j))).collect();
    let estimates: Vec<McEstimate<T>> = interior
        .par_iter()
        .map(|&(i, j)| mc_estimate(grid.node(i, j), grid.index(i, j) as u64, m, &bd, cfg))
        .collect::<Result<_>>()?;
    let mut xi = dirichlet_frame(grid, bd.xi());
    let mut eta = dirichlet_frame(grid, bd.eta());
    let mut max_stderr = T::zero();
    let mut restarts = 0;
    let mut warnings = Vec::new();
    for (&(i, j), e) in interior.iter().zip(estimates) {
        let k = grid.index(i, j);
        xi[k] = e.xi;
        eta[k] = e.eta;
        max_stderr = max_stderr.max(e.stderr_xi).max(e.stderr_eta);
        restarts += e.restarts;
        warnings.extend(e.warning);
    }
    let solution = MeshSolution::new(ScalarField::new(*grid, xi)?, ScalarField::new(*grid, eta)?)?;
    Ok(StochasticSolve { solution, max_stderr, restarts, warnings })
}

/// Zero field with the boundary values written in (side columns last, as in the solver).
pub(crate) fn dirichlet_frame<T: Real>(grid: &GridSpec<T>, bv: &BoundaryValues<T>) -> Vec<T> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut u = vec![T::zero(); grid.len()];
    for i in 0..nx {
        u[grid.index(i, 0)] = bv.bottom[i];
        u[grid.index(i, ny - 1)] = bv.top[i];
    }
    for j in 0..ny {
        u[grid.index(0, j)] = bv.left[j];
        u[grid.index(nx - 1, j)] = bv.right[j];
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_bd() -> BoundaryData<f64> {
        let g = GridSpec::new(RectDomain::unit(), 29, 29).unwrap();
        BoundaryData::from_monitor(&MonitorFunction::constant(), &g).unwrap()
    }

    #[test]
    fn zero_increment_keeps_position() {
        let x = Point::new(0.3, 0.4);
        assert_eq!(step_with(x, [0.0, 0.0], 0.01, [0.0, 0.0]), x);
        let m = MonitorFunction::running_example();
        let c = Point::new(0.75, 0.5);
        assert_eq!(step_with(c, m.drift(c).unwrap(), 0.01, [0.0, 0.0]), c);
    }

    #[test]
    fn step_variance_is_diffusion_times_dt() {
        let m = MonitorFunction::<f64>::constant();
        let mut rng = walk_rng(7, 0, 0, 0);
        let dt = 0.01;
        let n = 100_000;
        let x0 = Point::new(0.5, 0.5);
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let d = step_linear(x0, &m, dt, &mut rng).unwrap().x - 0.5;
            s += d;
            ss += d * d;
        }
        let mean = s / n as f64;
        let var = ss / n as f64 - mean * mean;
        assert!((var / (DIFFUSION * dt) - 1.0).abs() < 0.03, "{var}");
        assert!(mean.abs() < 4.0 * (DIFFUSION * dt / n as f64).sqrt());
    }

    #[test]
    fn bridge_fire_rate_matches_formula() {
        // d0 = d1 = 0.1 against the bottom edge; dt chosen so the probability is exp(-2).
        let d = RectDomain::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let dt = 0.005;
        let p = bridge_probability(0.1, 0.1, dt);
        assert_abs_diff_eq!(p, (-2.0f64).exp(), epsilon = 1e-15);
        let mut rng = walk_rng(3, 1, 2, 0);
        let n = 100_000;
        let mut fired = 0;
        for _ in 0..n {
            if let Some(e) = bridge_exit_test(Point::new(5.0, 0.1), Point::new(5.2, 0.1), dt, &d, &mut rng) {
                assert_eq!(e.exit_edge, Edge::Bottom);
                assert_eq!(e.exit_point, Point::new(5.1, 0.0));
                fired += 1;
            }
        }
        assert!((fired as f64 / n as f64 - p).abs() < 0.005);
    }

    #[test]
    fn bridge_limits_and_explicit_exit() {
        let d = RectDomain::unit();
        let mut rng = walk_rng(1, 1, 1, 1);
        let e = bridge_exit_test(Point::new(0.9, 0.5), Point::new(1.1, 0.7), 0.01, &d, &mut rng).unwrap();
        assert_eq!(e.exit_edge, Edge::Right);
        assert_eq!(e.exit_point.x, 1.0);
        assert_abs_diff_eq!(e.exit_point.y, 0.6, epsilon = 1e-12);
        let e = bridge_exit_test(Point::new(0.5, 0.5), Point::new(0.5, 0.0), 0.01, &d, &mut rng).unwrap();
        assert_eq!(e.exit_edge, Edge::Bottom);
        assert_eq!(bridge_probability(0.3, 0.0, 0.01), 1.0);
    }

    #[test]
    fn bridge_probability_monotone() {
        let mut rng = walk_rng(5, 5, 5, 5);
        for _ in 0..1000 {
            let (a, b, c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random::<f64>() + 1e-3);
            let k: f64 = 1.0 + rng.random::<f64>();
            assert!(bridge_probability(a / k, b, c) >= bridge_probability(a, b, c));
        }
    }

    #[test]
    fn exponential_step_mean() {
        let mut rng = walk_rng(11, 0, 0, 0);
        let n = 1_000_000;
        let lambda = 1000.0;
        let s: f64 = (0..n).map(|_| rng.sample::<f64, _>(Exp1) / lambda).sum();
        assert!((s / n as f64 / 1e-3 - 1.0).abs() < 0.01);
    }

    #[test]
    fn exponential_explicit_exit() {
        let d = RectDomain::unit();
        let m = MonitorFunction::constant();
        let mut rng = walk_rng(2, 0, 0, 0);
        // lambda tiny: steps are long, so the first step from near the edge leaves explicitly.
        let mut exits = 0;
        for _ in 0..100 {
            let (x1, e) = step_exponential(Point::new(0.999, 0.5), &m, 1e-3, &d, &mut rng).unwrap();
            if !d.contains_strictly(x1) {
                let e = e.unwrap();
                assert!(d.contains(e.exit_point));
                exits += 1;
            }
        }
        assert!(exits > 90);
    }

    #[test]
    fn exit_points_lie_on_edges() {
        let bd = unit_bd();
        let m = MonitorFunction::running_example();
        for scheme in [Scheme::Linear { dt: 1e-3, bridge: true }, Scheme::Exponential { lambda: 1000.0 }] {
            for w in 0..200 {
                let mut rng = walk_rng(9, 0, w, 0);
                let e = run_walk(Point::new(0.6, 0.45), &m, bd.domain(), scheme, DEFAULT_MAX_STEPS, &mut rng).unwrap().unwrap();
                let p = e.exit_point;
                let on = match e.exit_edge {
                    Edge::Bottom => p.y == 0.0,
                    Edge::Top => p.y == 1.0,
                    Edge::Left => p.x == 0.0,
                    Edge::Right => p.x == 1.0,
                };
                assert!(on && bd.domain().contains(p), "{e:?}");
            }
        }
    }

    #[test]
    fn centre_estimate_and_edge_symmetry() {
        let bd = unit_bd();
        let cfg = WalkConfig::new(Scheme::Linear { dt: 1e-4, bridge: true }, 4000, 1);
        let e = mc_estimate(Point::new(0.5, 0.5), 0, &MonitorFunction::constant(), &bd, &cfg).unwrap();
        assert!((e.xi - 0.5).abs() <= 3.0 * e.stderr_xi);
        assert!((e.eta - 0.5).abs() <= 3.0 * e.stderr_eta);
        let n = cfg.walks as f64;
        for c in e.edge_counts {
            assert!((c as f64 / n - 0.25).abs() <= 3.0 * (0.25 * 0.75 / n).sqrt());
        }
        assert_eq!(e.restarts, 0);
        assert!(e.warning.is_none());
    }

    #[test]
    fn stderr_scales_with_inverse_sqrt_n() {
        let bd = unit_bd();
        let m = MonitorFunction::constant();
        let p = Point::new(0.4, 0.6);
        let a = mc_estimate(p, 3, &m, &bd, &WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 4000, 2)).unwrap();
        let b = mc_estimate(p, 3, &m, &bd, &WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 8000, 2)).unwrap();
        let ratio = a.stderr_xi / b.stderr_xi;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn estimates_are_reproducible_across_pools() {
        let bd = unit_bd();
        let m = MonitorFunction::running_example();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 500, 42);
        let p = Point::new(0.7, 0.55);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_estimate(p, 17, &m, &bd, &cfg)).unwrap();
        let b = four.install(|| mc_estimate(p, 17, &m, &bd, &cfg)).unwrap();
        assert_eq!(a, b);
        let c = mc_estimate(p, 18, &m, &bd, &cfg).unwrap();
        assert_ne!(a.xi, c.xi);
    }

    #[test]
    fn max_steps_restarts_are_counted() {
        let bd = unit_bd();
        let mut cfg = WalkConfig::new(Scheme::Linear { dt: 1e-4, bridge: false }, 50, 4);
        cfg.max_steps = 300;
        let e = mc_estimate(Point::new(0.5, 0.5), 0, &MonitorFunction::constant(), &bd, &cfg).unwrap();
        assert!(e.restarts > 0);
        assert!(e.warning.is_some());
        cfg.max_steps = 1;
        assert!(mc_estimate(Point::new(0.5, 0.5), 0, &MonitorFunction::constant(), &bd, &cfg).is_err());
    }

    #[test]
    fn invalid_configs() {
        let bd = unit_bd();
        let m = MonitorFunction::constant();
        let p = Point::new(0.5, 0.5);
        for cfg in [
            WalkConfig::new(Scheme::Linear { dt: 0.0, bridge: true }, 10, 0),
            WalkConfig::new(Scheme::Exponential { lambda: -1.0 }, 10, 0),
            WalkConfig::new(Scheme::Exponential { lambda: 1.0 }, 0, 0),
        ] {
            assert!(matches!(mc_estimate(p, 0, &m, &bd, &cfg), Err(Error::WalkConfig(_))));
        }
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1.0 }, 10, 0);
        assert!(matches!(mc_estimate(Point::new(0.0, 0.5), 0, &m, &bd, &cfg), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn boundary_table_interpolation() {
        let bd = unit_bd();
        let (f, g) = bd.eval(Edge::Bottom, Point::new(0.37, 0.0));
        assert_abs_diff_eq!(f, 0.37, epsilon = 1e-12);
        assert_eq!(g, 0.0);
        let (f, g) = bd.eval(Edge::Right, Point::new(1.0, 0.81));
        assert_eq!(f, 1.0);
        assert_abs_diff_eq!(g, 0.81, epsilon = 1e-12);
    }
}
