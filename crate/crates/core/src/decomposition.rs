//! Non-overlapping, non-iterative stochastic domain decomposition: subdomain layout,
//! interface-point planning, Monte Carlo interface values and independent subdomain solves.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::detsolver::{boundary_data, solve_dirichlet, BoundaryValues, SolveStats, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MeshSolution, ScalarField};
use crate::monitor::MonitorFunction;
use crate::real::Real;
use crate::sde::{mc_estimate, BoundaryData, WalkConfig};
use crate::smoothing::smooth_interface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Line `j = index`, running along x.
    Horizontal,
    /// Line `i = index`, running along y.
    Vertical,
}

/// A full-length interior grid line shared by the subdomains on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceLine {
    pub orientation: Orientation,
    pub index: usize,
    pub len: usize,
}

impl InterfaceLine {
    /// Global `(i, j)` of the `k`-th node along the line.
    pub fn node(&self, k: usize) -> (usize, usize) {
        match self.orientation {
            Orientation::Horizontal => (k, self.index),
            Orientation::Vertical => (self.index, k),
        }
    }
}

/// Subdomain `(a, b)` covering global nodes `i0..=i1` x `j0..=j1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain<T> {
    pub a: usize,
    pub b: usize,
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
    pub grid: GridSpec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainLayout<T> {
    grid: GridSpec<T>,
    n_sub_x: usize,
    n_sub_y: usize,
    subdomains: Vec<Subdomain<T>>,
    lines: Vec<InterfaceLine>,
}

impl<T: Real> SubdomainLayout<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
    pub fn n_sub_x(&self) -> usize {
        self.n_sub_x
    }
    pub fn n_sub_y(&self) -> usize {
        self.n_sub_y
    }
    /// Subdomains, `b`-major.
    pub fn subdomains(&self) -> &[Subdomain<T>] {
        &self.subdomains
    }
    /// Vertical lines first (by `i`), then horizontal lines (by `j`).
    pub fn lines(&self) -> &[InterfaceLine] {
        &self.lines
    }

    /// Positions along `line` where another interface line crosses it.
    pub fn junctions(&self, line: &InterfaceLine) -> Vec<usize> {
        self.lines
            .iter()
            .filter(|l| l.orientation != line.orientation)
            .map(|l| l.index)
            .collect()
    }
}

/// Splits `grid` into `n_sub_x` x `n_sub_y` blocks sharing their interface lines.
pub fn build_layout<T: Real>(grid: &GridSpec<T>, n_sub_x: usize, n_sub_y: usize) -> Result<SubdomainLayout<T>> {
    let (nx, ny) = (grid.nx(), grid.ny());
    if n_sub_x == 0 || (nx - 1) % n_sub_x != 0 || (nx - 1) / n_sub_x < 2 {
        return Err(Error::Layout { axis: 'x', nodes: nx, parts: n_sub_x });
    }
    if n_sub_y == 0 || (ny - 1) % n_sub_y != 0 || (ny - 1) / n_sub_y < 2 {
        return Err(Error::Layout { axis: 'y', nodes: ny, parts: n_sub_y });
    }
    let cx = (nx - 1) / n_sub_x;
    let cy = (ny - 1) / n_sub_y;
    let mut subdomains = Vec::with_capacity(n_sub_x * n_sub_y);
    for b in 0..n_sub_y {
        for a in 0..n_sub_x {
            let (i0, i1, j0, j1) = (a * cx, (a + 1) * cx, b * cy, (b + 1) * cy);
            subdomains.push(Subdomain { a, b, i0, i1, j0, j1, grid: grid.block(i0, i1, j0, j1)? });
        }
    }
    let mut lines = Vec::new();
    for a in 1..n_sub_x {
        lines.push(InterfaceLine { orientation: Orientation::Vertical, index: a * cx, len: ny });
    }
    for b in 1..n_sub_y {
        lines.push(InterfaceLine { orientation: Orientation::Horizontal, index: b * cy, len: nx });
    }
    Ok(SubdomainLayout { grid: *grid, n_sub_x, n_sub_y, subdomains, lines })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementStrategy {
    All,
    Equispaced(usize),
    Optimal,
}

/// Minimum index distance between two optimally placed points.
pub const OPTIMAL_MIN_SEP: usize = 2;
/// Derivative samples below this fraction of the line maximum count as zero.
pub const OPTIMAL_FLAT_TOL: f64 = 1e-8;

/// Interior positions along each line (same order as `layout.lines()`) that are solved by
/// Monte Carlo; the rest are interpolated between these and the two boundary anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfacePlan {
    pub strategy: PlacementStrategy,
    pub stochastic: Vec<Vec<usize>>,
}

impl InterfacePlan {
    pub fn total_points(&self) -> usize {
        self.stochastic.iter().map(Vec::len).sum()
    }
}

/// `round(l (n - 1) / (k + 1))` for `l = 1..=k`, restricted to interior positions.
pub fn equispaced_positions(n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=k)
        .map(|l| ((l * (n - 1)) as f64 / (k + 1) as f64).round() as usize)
        .filter(|&p| p > 0 && p + 1 < n)
        .collect();
    v.dedup();
    v
}

/// Positions of strict discrete local extrema of `v`, ignoring samples below
/// `OPTIMAL_FLAT_TOL` times the largest magnitude.
pub fn strict_extrema<T: Real>(v: &[T]) -> Vec<usize> {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if !(scale > T::zero()) {
        return Vec::new();
    }
    let floor = T::lit(OPTIMAL_FLAT_TOL) * scale;
    (1..v.len().saturating_sub(1))
        .filter(|&k| {
            let (a, b, c) = (v[k - 1], v[k], v[k + 1]);
            b.abs() >= floor && ((b > a && b > c) || (b < a && b < c))
        })
        .collect()
}

fn optimal_positions<T: Real>(m: &MonitorFunction<T>, grid: &GridSpec<T>, line: &InterfaceLine, junctions: &[usize]) -> Result<Vec<usize>> {
    let axis = match line.orientation {
        Orientation::Horizontal => 0,
        Orientation::Vertical => 1,
    };
    let mut first = Vec::with_capacity(line.len);
    let mut second = Vec::with_capacity(line.len);
    for k in 0..line.len {
        let (i, j) = line.node(k);
        let p = grid.node(i, j);
        first.push(m.gradient(p)?[axis]);
        second.push(m.second_derivatives(p)?[axis]);
    }
    let mut candidates = strict_extrema(&first);
    candidates.extend(strict_extrema(&second));
    candidates.sort_unstable();
    candidates.dedup();
    let mut kept: Vec<usize> = junctions.to_vec();
    for c in candidates {
        if kept.iter().all(|&k| k.abs_diff(c) >= OPTIMAL_MIN_SEP) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Chooses the Monte Carlo positions on every interface line. Line crossings are always
/// included so both lines share one estimate there; a line with no point gets its midpoint.
pub fn plan_interface_points<T: Real>(
    strategy: PlacementStrategy,
    m: &MonitorFunction<T>,
    layout: &SubdomainLayout<T>,
) -> Result<InterfacePlan> {
    if let PlacementStrategy::Equispaced(0) = strategy {
        return Err(Error::Plan("equispaced placement needs at least one point per line".into()));
    }
    let mut stochastic = Vec::with_capacity(layout.lines().len());
    for line in layout.lines() {
        let junctions = layout.junctions(line);
        let mut pos = match strategy {
            PlacementStrategy::All => (1..line.len - 1).collect(),
            PlacementStrategy::Equispaced(k) => {
                let mut v = equispaced_positions(line.len, k);
                v.extend(&junctions);
                v
            }
            PlacementStrategy::Optimal => optimal_positions(m, layout.grid(), line, &junctions)?,
        };
        pos.sort_unstable();
        pos.dedup();
        if pos.is_empty() {
            pos.push((line.len - 1) / 2);
        }
        stochastic.push(pos);
    }
    Ok(InterfacePlan { strategy, stochastic })
}

/// Values on every interface line, indexed like `layout.lines()`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceValues<T> {
    pub xi: Vec<Vec<T>>,
    pub eta: Vec<Vec<T>>,
    /// `(stderr_xi, stderr_eta)` at Monte Carlo positions, `None` elsewhere.
    pub stderr: Vec<Vec<Option<(T, T)>>>,
    pub mc_points: usize,
    pub restarts: u64,
    pub warnings: Vec<String>,
}

/// Piecewise-linear fill of `values` between the positions in `known` (sorted, including
/// both ends).
fn interpolate_line<T: Real>(values: &mut [T], known: &[usize]) {
    for w in known.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (va, vb) = (values[a], values[b]);
        let span = T::from_usize_lossy(b - a);
        for k in a + 1..b {
            let t = T::from_usize_lossy(k - a) / span;
            values[k] = va + t * (vb - va);
        }
    }
}

fn anchors<T: Real>(line: &InterfaceLine, bv: &BoundaryValues<T>) -> (T, T) {
    match line.orientation {
        Orientation::Horizontal => (bv.left[line.index], bv.right[line.index]),
        Orientation::Vertical => (bv.bottom[line.index], bv.top[line.index]),
    }
}

/// Monte Carlo estimates at the planned positions (shared per global node, keyed by its
/// global index), linear interpolation elsewhere, then optional local quadratic smoothing with
/// window `span`. Where two lines cross, the smoothed values of both are averaged.
pub fn solve_interfaces<T: Real>(
    plan: &InterfacePlan,
    layout: &SubdomainLayout<T>,
    m: &MonitorFunction<T>,
    bd: &BoundaryData<T>,
    cfg: &WalkConfig<T>,
    span: Option<usize>,
) -> Result<InterfaceValues<T>> {
    let lines = layout.lines();
    if plan.stochastic.len() != lines.len() {
        return Err(Error::Plan(format!("plan has {} lines, layout has {}", plan.stochastic.len(), lines.len())));
    }
    let grid = layout.grid();
    let mut nodes = BTreeMap::new();
    for (line, pos) in lines.iter().zip(&plan.stochastic) {
        for &k in pos {
            if k == 0 || k + 1 >= line.len {
                return Err(Error::Plan(format!("position {k} is not interior to a line of {} nodes", line.len)));
            }
            let (i, j) = line.node(k);
            nodes.insert(grid.index(i, j), (i, j));
        }
    }
    let keys: Vec<(usize, (usize, usize))> = nodes.into_iter().collect();
    let estimates: Vec<_> = keys
        .par_iter()
        .map(|&(id, (i, j))| mc_estimate(grid.node(i, j), id as u64, m, bd, cfg))
        .collect::<Result<_>>()?;
    let by_id: BTreeMap<usize, _> = keys.iter().map(|k| k.0).zip(&estimates).collect();

    let mut out = InterfaceValues {
        xi: Vec::new(),
        eta: Vec::new(),
        stderr: Vec::new(),
        mc_points: estimates.len(),
        restarts: estimates.iter().map(|e| e.restarts).sum(),
        warnings: estimates.iter().filter_map(|e| e.warning.clone()).collect(),
    };
    for (line, pos) in lines.iter().zip(&plan.stochastic) {
        let n = line.len;
        let mut xi = vec![T::zero(); n];
        let mut eta = vec![T::zero(); n];
        let mut se = vec![None; n];
        (xi[0], xi[n - 1]) = anchors(line, bd.xi());
        (eta[0], eta[n - 1]) = anchors(line, bd.eta());
        for &k in pos {
            let (i, j) = line.node(k);
            let e = by_id[&grid.index(i, j)];
            xi[k] = e.xi;
            eta[k] = e.eta;
            se[k] = Some((e.stderr_xi, e.stderr_eta));
        }
        let mut known = Vec::with_capacity(pos.len() + 2);
        known.push(0);
        known.extend(pos);
        known.push(n - 1);
        interpolate_line(&mut xi, &known);
        interpolate_line(&mut eta, &known);
        if let Some(span) = span {
            xi = smooth_interface(&xi, span)?;
            eta = smooth_interface(&eta, span)?;
        }
        out.xi.push(xi);
        out.eta.push(eta);
        out.stderr.push(se);
    }
    if span.is_some() {
        reconcile_junctions(lines, &mut out);
    }
    Ok(out)
}

fn reconcile_junctions<T: Real>(lines: &[InterfaceLine], v: &mut InterfaceValues<T>) {
    let half = T::lit(0.5);
    for (p, lp) in lines.iter().enumerate() {
        for (q, lq) in lines.iter().enumerate() {
            if lp.orientation == Orientation::Vertical && lq.orientation == Orientation::Horizontal {
                // Vertical line i = lp.index meets horizontal j = lq.index at (i, j).
                let (kp, kq) = (lq.index, lp.index);
                let xi = half * (v.xi[p][kp] + v.xi[q][kq]);
                let eta = half * (v.eta[p][kp] + v.eta[q][kq]);
                v.xi[p][kp] = xi;
                v.xi[q][kq] = xi;
                v.eta[p][kp] = eta;
                v.eta[q][kq] = eta;
            }
        }
    }
}

/// Dirichlet data of subdomain `s`: global boundary values on physical edges, interface
/// tables on interior edges.
fn subdomain_boundary<T: Real>(
    s: &Subdomain<T>,
    layout: &SubdomainLayout<T>,
    global: &BoundaryValues<T>,
    tables: &[Vec<T>],
) -> Result<BoundaryValues<T>> {
    let grid = layout.grid();
    let find = |o: Orientation, index: usize| -> &[T] {
        let p = layout.lines().iter().position(|l| l.orientation == o && l.index == index).expect("interface line");
        &tables[p]
    };
    let bottom = if s.j0 == 0 { &global.bottom[..] } else { find(Orientation::Horizontal, s.j0) };
    let top = if s.j1 == grid.ny() - 1 { &global.top[..] } else { find(Orientation::Horizontal, s.j1) };
    let left = if s.i0 == 0 { &global.left[..] } else { find(Orientation::Vertical, s.i0) };
    let right = if s.i1 == grid.nx() - 1 { &global.right[..] } else { find(Orientation::Vertical, s.i1) };
    BoundaryValues::new(
        bottom[s.i0..=s.i1].to_vec(),
        top[s.i0..=s.i1].to_vec(),
        left[s.j0..=s.j1].to_vec(),
        right[s.j0..=s.j1].to_vec(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SddReport<T> {
    pub solution: MeshSolution<T>,
    pub interfaces: Option<InterfaceValues<T>>,
    /// Wall time of the interface phase (Monte Carlo plus interface smoothing).
    pub t_stoc: Duration,
    /// Wall time of the subdomain solves.
    pub t_sub: Duration,
    /// Deterministic subdomain solves performed (one per subdomain, each covering xi and eta).
    pub subdomain_solves: usize,
    pub stats: Vec<(SolveStats<T>, SolveStats<T>)>,
    pub warnings: Vec<String>,
}

/// Stochastic domain decomposition: interface values by Monte Carlo, then one independent
/// Dirichlet solve per subdomain for each of `xi` and `eta`, then assembly.
#[allow(clippy::too_many_arguments)]
pub fn solve_sdd<T: Real>(
    m: &MonitorFunction<T>,
    layout: &SubdomainLayout<T>,
    plan: &InterfacePlan,
    walk: &WalkConfig<T>,
    solver: &SolverConfig<T>,
    interface_span: Option<usize>,
) -> Result<SddReport<T>> {
    solver.validate()?;
    let grid = *layout.grid();
    let (gxi, geta) = boundary_data(m, &grid)?;
    let t0 = Instant::now();
    let interfaces = if layout.lines().is_empty() {
        None
    } else {
        walk.validate()?;
        let bd = BoundaryData::new(*grid.domain(), gxi.clone(), geta.clone())?;
        Some(solve_interfaces(plan, layout, m, &bd, walk, interface_span)?)
    };
    let t_stoc = if interfaces.is_some() { t0.elapsed() } else { Duration::ZERO };

    let t1 = Instant::now();
    let empty: Vec<Vec<T>> = Vec::new();
    let (txi, teta) = match &interfaces {
        Some(v) => (&v.xi, &v.eta),
        None => (&empty, &empty),
    };
    let results: Vec<_> = layout
        .subdomains()
        .par_iter()
        .map(|s| {
            let bxi = subdomain_boundary(s, layout, &gxi, txi)?;
            let beta = subdomain_boundary(s, layout, &geta, teta)?;
            let xi = solve_dirichlet(m, &s.grid, &bxi, solver)?;
            let eta = solve_dirichlet(m, &s.grid, &beta, solver)?;
            Ok((xi, eta))
        })
        .collect::<Result<_>>()?;
    let t_sub = t1.elapsed();

    let mut xi = vec![T::zero(); grid.len()];
    let mut eta = vec![T::zero(); grid.len()];
    let mut stats = Vec::with_capacity(results.len());
    let mut warnings = interfaces.as_ref().map(|v| v.warnings.clone()).unwrap_or_default();
    for (s, (rx, re)) in layout.subdomains().iter().zip(&results) {
        for j in s.j0..=s.j1 {
            for i in s.i0..=s.i1 {
                xi[grid.index(i, j)] = rx.field.get(i - s.i0, j - s.j0);
                eta[grid.index(i, j)] = re.field.get(i - s.i0, j - s.j0);
            }
        }
        for (name, r) in [("xi", rx), ("eta", re)] {
            if !r.converged {
                warnings.push(format!(
                    "detsolver: subdomain ({}, {}) {name} stopped after {} iterations with update {}",
                    s.a, s.b, r.iterations, r.last_update
                ));
            }
        }
        stats.push((SolveStats::from(rx), SolveStats::from(re)));
    }
    let solution = MeshSolution::new(ScalarField::new(grid, xi)?, ScalarField::new(grid, eta)?)?;
    Ok(SddReport { solution, interfaces, t_stoc, t_sub, subdomain_solves: results.len(), stats, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detsolver::solve_single_domain;
    use crate::grid::RectDomain;
    use crate::sde::Scheme;

    fn grid(n: usize) -> GridSpec<f64> {
        GridSpec::new(RectDomain::unit(), n, n).unwrap()
    }

    #[test]
    fn two_by_two_layout() {
        let l = build_layout(&grid(29), 2, 2).unwrap();
        assert_eq!(l.subdomains().len(), 4);
        for s in l.subdomains() {
            assert_eq!((s.grid.nx(), s.grid.ny()), (15, 15));
        }
        let lines: Vec<_> = l.lines().iter().map(|x| (x.orientation, x.index)).collect();
        assert_eq!(lines, vec![(Orientation::Vertical, 14), (Orientation::Horizontal, 14)]);
        assert_eq!(l.junctions(&l.lines()[0]), vec![14]);
    }

    #[test]
    fn trivial_and_large_layouts() {
        let g = grid(29);
        let l = build_layout(&g, 1, 1).unwrap();
        assert!(l.lines().is_empty());
        assert_eq!(l.subdomains()[0].grid, g);
        let l = build_layout(&grid(157), 4, 4).unwrap();
        assert_eq!(l.subdomains().len(), 16);
        assert_eq!(l.lines().len(), 6);
        assert!(l.subdomains().iter().all(|s| s.grid.nx() == 40 && s.grid.ny() == 40));
    }

    #[test]
    fn indivisible_layout_names_axis() {
        assert_eq!(build_layout(&grid(29), 3, 2), Err(Error::Layout { axis: 'x', nodes: 29, parts: 3 }));
        let g = GridSpec::<f64>::new(RectDomain::unit(), 29, 30).unwrap();
        assert!(matches!(build_layout(&g, 2, 2), Err(Error::Layout { axis: 'y', .. })));
    }

    #[test]
    fn equispaced_rule() {
        assert_eq!(equispaced_positions(29, 7), vec![4, 7, 11, 14, 18, 21, 25]);
        let l = build_layout(&grid(29), 2, 2).unwrap();
        let p = plan_interface_points(PlacementStrategy::Equispaced(7), &MonitorFunction::constant(), &l).unwrap();
        assert!(p.stochastic.iter().all(|v| v.len() == 7 && v.contains(&14)));
    }

    #[test]
    fn all_and_constant_optimal() {
        let l = build_layout(&grid(29), 2, 2).unwrap();
        let m = MonitorFunction::constant();
        let all = plan_interface_points(PlacementStrategy::All, &m, &l).unwrap();
        assert!(all.stochastic.iter().all(|v| *v == (1..28).collect::<Vec<_>>()));
        let opt = plan_interface_points(PlacementStrategy::Optimal, &m, &l).unwrap();
        assert_eq!(opt.stochastic, vec![vec![14], vec![14]]);
        let single = build_layout(&grid(29), 2, 1).unwrap();
        let opt = plan_interface_points(PlacementStrategy::Optimal, &m, &single).unwrap();
        assert_eq!(opt.stochastic, vec![vec![14]]);
    }

    #[test]
    fn optimal_running_example_concentrates_near_the_peak() {
        let l = build_layout(&grid(29), 2, 2).unwrap();
        let p = plan_interface_points(PlacementStrategy::Optimal, &MonitorFunction::running_example(), &l).unwrap();
        for (line, pos) in l.lines().iter().zip(&p.stochastic) {
            assert!(pos.contains(&14));
            assert!(pos.windows(2).all(|w| w[1] - w[0] >= OPTIMAL_MIN_SEP));
            assert!((4..=9).contains(&pos.len()), "{line:?}: {pos:?}");
        }
        // Horizontal line y = 1/2 passes through the peak at x = 3/4 (index 21).
        assert!(p.stochastic[1].iter().any(|&k| k.abs_diff(21) <= 1));
    }

    #[test]
    fn strict_extrema_ignores_flat_and_plateaus() {
        assert!(strict_extrema(&[0.0f64; 7]).is_empty());
        assert_eq!(strict_extrema(&[0.0, 1.0, 0.0, -1.0, 0.0]), vec![1, 3]);
        assert!(strict_extrema(&[0.0, 1.0, 1.0, 0.0]).is_empty());
    }

    #[test]
    fn linear_interpolation_between_known() {
        let mut v = vec![0.0, 9.0, 9.0, 3.0, 9.0, 1.0];
        interpolate_line(&mut v, &[0, 3, 5]);
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn unit_weight_interfaces_are_harmonic() {
        let g = grid(17);
        let m = MonitorFunction::constant();
        let l = build_layout(&g, 2, 2).unwrap();
        let plan = plan_interface_points(PlacementStrategy::All, &m, &l).unwrap();
        let bd = BoundaryData::from_monitor(&m, &g).unwrap();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 2000, 5);
        let v = solve_interfaces(&plan, &l, &m, &bd, &cfg, None).unwrap();
        assert_eq!(v.mc_points, 15 + 15 - 1);
        for k in 1..16 {
            let (sx, _) = v.stderr[0][k].unwrap();
            assert!((v.xi[0][k] - 0.5).abs() <= 3.5 * sx, "{k}: {}", v.xi[0][k]);
        }
        // The crossing is one shared estimate.
        assert_eq!(v.xi[0][8], v.xi[1][8]);
        assert_eq!(v.eta[0][8], v.eta[1][8]);
    }

    #[test]
    fn one_by_one_reproduces_single_domain_bit_exactly() {
        let g = grid(21);
        let m = MonitorFunction::running_example();
        let l = build_layout(&g, 1, 1).unwrap();
        let plan = plan_interface_points(PlacementStrategy::All, &m, &l).unwrap();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 10, 1);
        let r = solve_sdd(&m, &l, &plan, &cfg, &SolverConfig::default(), None).unwrap();
        let s = solve_single_domain(&m, &g, &SolverConfig::default()).unwrap();
        assert_eq!(r.solution, s.solution);
        assert_eq!(r.t_stoc, Duration::ZERO);
        assert_eq!(r.subdomain_solves, 1);
    }

    #[test]
    fn sdd_unit_weight_matches_single_domain() {
        let g = grid(17);
        let m = MonitorFunction::constant();
        let l = build_layout(&g, 2, 2).unwrap();
        let plan = plan_interface_points(PlacementStrategy::Optimal, &m, &l).unwrap();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 4000, 9);
        let r = solve_sdd(&m, &l, &plan, &cfg, &SolverConfig { tol: 1e-12, max_iters: None }, None).unwrap();
        assert_eq!(r.subdomain_solves, 4);
        let v = r.interfaces.as_ref().unwrap();
        let (sx, se) = v.stderr[0][8].unwrap();
        for j in 0..17 {
            for i in 0..17 {
                assert!((r.solution.xi.get(i, j) - g.x(i)).abs() <= 4.0 * sx);
                assert!((r.solution.eta.get(i, j) - g.y(j)).abs() <= 4.0 * se);
            }
        }
        for (k, line) in l.lines().iter().enumerate() {
            for p in 0..line.len {
                let (i, j) = line.node(p);
                assert_eq!(r.solution.xi.get(i, j), v.xi[k][p]);
            }
        }
    }

    #[test]
    fn smoothed_interfaces_agree_at_crossings() {
        let g = grid(29);
        let m = MonitorFunction::running_example();
        let l = build_layout(&g, 2, 2).unwrap();
        let plan = plan_interface_points(PlacementStrategy::All, &m, &l).unwrap();
        let bd = BoundaryData::from_monitor(&m, &g).unwrap();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 200, 5);
        let v = solve_interfaces(&plan, &l, &m, &bd, &cfg, Some(5)).unwrap();
        assert_eq!(v.xi[0][14], v.xi[1][14]);
        assert_eq!(v.eta[0][14], v.eta[1][14]);
        assert_eq!(v.xi[0][0], bd.xi().bottom[14]);
    }

    #[test]
    fn plan_shape_is_checked() {
        let g = grid(17);
        let m = MonitorFunction::constant();
        let l = build_layout(&g, 2, 2).unwrap();
        let bd = BoundaryData::from_monitor(&m, &g).unwrap();
        let cfg = WalkConfig::new(Scheme::Exponential { lambda: 1000.0 }, 10, 1);
        let bad = InterfacePlan { strategy: PlacementStrategy::All, stochastic: vec![vec![3]] };
        assert!(matches!(solve_interfaces(&bad, &l, &m, &bd, &cfg, None), Err(Error::Plan(_))));
        let bad = InterfacePlan { strategy: PlacementStrategy::All, stochastic: vec![vec![0], vec![3]] };
        assert!(matches!(solve_interfaces(&bad, &l, &m, &bd, &cfg, None), Err(Error::Plan(_))));
        assert!(plan_interface_points(PlacementStrategy::Equispaced(0), &m, &l).is_err());
    }
}
