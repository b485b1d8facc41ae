//! Deterministic solution of `-div(w grad u) = 0` on a rectangle with the conservative
//! five-point stencil and Jacobi iteration, plus the one-dimensional edge solves that
//! provide the Dirichlet data.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MeshSolution, Point, RectDomain, ScalarField};
use crate::monitor::MonitorFunction;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Stop once the max-norm of a Jacobi update falls below this.
    pub tol: T,
    /// Iteration cap; `None` means `200 * max(nx, ny)^2`.
    pub max_iters: Option<usize>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), max_iters: None }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return Err(Error::SolverConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == Some(0) {
            return Err(Error::SolverConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, grid: &GridSpec<T>) -> usize {
        self.max_iters.unwrap_or_else(|| {
            let n = grid.nx().max(grid.ny());
            200 * n * n
        })
    }
}

/// Side of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    Bottom,
    Top,
    Left,
    Right,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Bottom, Edge::Top, Edge::Left, Edge::Right];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One-dimensional equidistribution along an edge: `u(s) = int_0^s rho / int_0^1 rho`,
/// integrated with the trapezoidal rule on `n` equally spaced edge nodes.
pub fn solve_1d_boundary<T: Real>(
    m: &MonitorFunction<T>,
    domain: &RectDomain<T>,
    edge: Edge,
    n: usize,
) -> Result<Vec<T>> {
    if n < 3 {
        return Err(Error::InvalidGrid { nx: n, ny: 1 });
    }
    let along_x = matches!(edge, Edge::Bottom | Edge::Top);
    let (lo, hi) = if along_x { (domain.xmin(), domain.xmax()) } else { (domain.ymin(), domain.ymax()) };
    let fixed = match edge {
        Edge::Bottom => domain.ymin(),
        Edge::Top => domain.ymax(),
        Edge::Left => domain.xmin(),
        Edge::Right => domain.xmax(),
    };
    let h = (hi - lo) / T::from_usize_lossy(n - 1);
    let mut rho = Vec::with_capacity(n);
    for k in 0..n {
        let s = if k + 1 == n { hi } else { lo + T::from_usize_lossy(k) * h };
        let p = if along_x { Point::new(s, fixed) } else { Point::new(fixed, s) };
        rho.push(m.rho(p)?);
    }
    let half = T::lit(0.5);
    let mut u = Vec::with_capacity(n);
    u.push(T::zero());
    for k in 1..n {
        let prev = u[k - 1];
        u.push(prev + half * (rho[k - 1] + rho[k]) * h);
    }
    let total = u[n - 1];
    for v in u.iter_mut() {
        *v /= total;
    }
    u[0] = T::zero();
    u[n - 1] = T::one();
    Ok(u)
}

/// Dirichlet values on the four sides of a grid. `bottom`/`top` have `nx` entries,
/// `left`/`right` have `ny`; corners are shared and must agree.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues<T> {
    pub bottom: Vec<T>,
    pub top: Vec<T>,
    pub left: Vec<T>,
    pub right: Vec<T>,
}

impl<T: Real> BoundaryValues<T> {
    pub fn new(bottom: Vec<T>, top: Vec<T>, left: Vec<T>, right: Vec<T>) -> Result<Self> {
        let b = Self { bottom, top, left, right };
        b.check_corners()?;
        Ok(b)
    }

    /// Samples `f` at the boundary nodes of `grid`.
    pub fn from_fn(grid: &GridSpec<T>, f: impl Fn(Point<T>) -> T) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        Self {
            bottom: (0..nx).map(|i| f(grid.node(i, 0))).collect(),
            top: (0..nx).map(|i| f(grid.node(i, ny - 1))).collect(),
            left: (0..ny).map(|j| f(grid.node(0, j))).collect(),
            right: (0..ny).map(|j| f(grid.node(nx - 1, j))).collect(),
        }
    }

    pub fn edge(&self, edge: Edge) -> &[T] {
        match edge {
            Edge::Bottom => &self.bottom,
            Edge::Top => &self.top,
            Edge::Left => &self.left,
            Edge::Right => &self.right,
        }
    }

    fn check_corners(&self) -> Result<()> {
        let (b, t, l, r) = (&self.bottom, &self.top, &self.left, &self.right);
        if b.is_empty() || t.is_empty() || l.is_empty() || r.is_empty() {
            return Err(Error::BoundaryMismatch("empty edge".into()));
        }
        let corners = [
            (b[0], l[0], "bottom-left"),
            (b[b.len() - 1], r[0], "bottom-right"),
            (t[0], l[l.len() - 1], "top-left"),
            (t[t.len() - 1], r[r.len() - 1], "top-right"),
        ];
        for (u, v, name) in corners {
            if u != v {
                return Err(Error::BoundaryMismatch(format!("{name} corner: {u} vs {v}")));
            }
        }
        Ok(())
    }

    fn check_grid(&self, grid: &GridSpec<T>) -> Result<()> {
        let (nx, ny) = (grid.nx(), grid.ny());
        if self.bottom.len() != nx || self.top.len() != nx || self.left.len() != ny || self.right.len() != ny {
            return Err(Error::BoundaryMismatch(format!(
                "edge lengths {}/{}/{}/{} for a {nx}x{ny} grid",
                self.bottom.len(),
                self.top.len(),
                self.left.len(),
                self.right.len()
            )));
        }
        self.check_corners()
    }

    pub fn min_max(&self) -> (T, T) {
        [&self.bottom, &self.top, &self.left, &self.right]
            .iter()
            .flat_map(|e| e.iter())
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Dirichlet data for `xi` and `eta`: `xi` is 0 on the left and 1 on the right side with the
/// one-dimensional solves on bottom and top; `eta` is 0 at the bottom and 1 at the top with
/// the one-dimensional solves on the left and right.
pub fn boundary_data<T: Real>(m: &MonitorFunction<T>, grid: &GridSpec<T>) -> Result<(BoundaryValues<T>, BoundaryValues<T>)> {
    let d = grid.domain();
    let (nx, ny) = (grid.nx(), grid.ny());
    let xi = BoundaryValues::new(
        solve_1d_boundary(m, d, Edge::Bottom, nx)?,
        solve_1d_boundary(m, d, Edge::Top, nx)?,
        vec![T::zero(); ny],
        vec![T::one(); ny],
    )?;
    let eta = BoundaryValues::new(
        vec![T::zero(); nx],
        vec![T::one(); nx],
        solve_1d_boundary(m, d, Edge::Left, ny)?,
        solve_1d_boundary(m, d, Edge::Right, ny)?,
    )?;
    Ok((xi, eta))
}

/// Result of one Dirichlet solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolve<T> {
    pub field: ScalarField<T>,
    pub iterations: usize,
    /// Max-norm of the last Jacobi update.
    pub last_update: T,
    /// False when the iteration cap was hit before `tol`; the field is still returned.
    pub converged: bool,
}

/// Normalised stencil weights of every node (east, west, north, south).
struct Stencil<T> {
    east: Vec<T>,
    west: Vec<T>,
    north: Vec<T>,
    south: Vec<T>,
}

impl<T: Real> Stencil<T> {
    /// Half-point weights are arithmetic means of the nodal `w = 1 / rho`.
    fn new(m: &MonitorFunction<T>, grid: &GridSpec<T>) -> Result<Self> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut w = Vec::with_capacity(grid.len());
        for j in 0..ny {
            for i in 0..nx {
                let wv = m.weight(grid.node(i, j))?;
                if !(wv > T::zero()) || !wv.is_finite() {
                    let p = grid.node(i, j);
                    return Err(Error::MonitorEvaluation { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
                }
                w.push(wv);
            }
        }
        let hx2 = grid.hx() * grid.hx();
        let hy2 = grid.hy() * grid.hy();
        let half = T::lit(0.5);
        let n = grid.len();
        let mut s = Self { east: vec![T::zero(); n], west: vec![T::zero(); n], north: vec![T::zero(); n], south: vec![T::zero(); n] };
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = grid.index(i, j);
                let we = half * (w[k] + w[k + 1]) / hx2;
                let ww = half * (w[k] + w[k - 1]) / hx2;
                let wn = half * (w[k] + w[k + nx]) / hy2;
                let ws = half * (w[k] + w[k - nx]) / hy2;
                let total = (we + ww) + (wn + ws);
                s.east[k] = we / total;
                s.west[k] = ww / total;
                s.north[k] = wn / total;
                s.south[k] = ws / total;
            }
        }
        Ok(s)
    }
}

/// Transfinite (bilinear blend) interpolation of the boundary data, used as initial guess.
pub fn boundary_blend<T: Real>(grid: &GridSpec<T>, bv: &BoundaryValues<T>) -> Vec<T> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let one = T::one();
    let mut u = vec![T::zero(); grid.len()];
    let (b00, b10) = (bv.bottom[0], bv.bottom[nx - 1]);
    let (b01, b11) = (bv.top[0], bv.top[nx - 1]);
    for j in 0..ny {
        let t = T::from_usize_lossy(j) / T::from_usize_lossy(ny - 1);
        for i in 0..nx {
            let s = T::from_usize_lossy(i) / T::from_usize_lossy(nx - 1);
            // Grouped so that swapping the axes only commutes additions.
            let along = ((one - s) * bv.left[j] + s * bv.right[j]) + ((one - t) * bv.bottom[i] + t * bv.top[i]);
            let corners = ((one - s) * (one - t) * b00 + s * t * b11) + (s * (one - t) * b10 + (one - s) * t * b01);
            let v = along - corners;
            u[grid.index(i, j)] = v;
        }
    }
    write_boundary(grid, bv, &mut u);
    u
}

fn write_boundary<T: Real>(grid: &GridSpec<T>, bv: &BoundaryValues<T>, u: &mut [T]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    for i in 0..nx {
        u[grid.index(i, 0)] = bv.bottom[i];
        u[grid.index(i, ny - 1)] = bv.top[i];
    }
    // Side columns are written last so corners follow the left/right data; the corner check
    // guarantees both agree.
    for j in 0..ny {
        u[grid.index(0, j)] = bv.left[j];
        u[grid.index(nx - 1, j)] = bv.right[j];
    }
}

/// Jacobi fixed point of the conservative stencil
/// `(w_{i+1/2}(u_{i+1} - u_i) - w_{i-1/2}(u_i - u_{i-1})) / hx^2 + (same in y) = 0`,
/// starting from the bilinear blend of the boundary data.
pub fn solve_dirichlet<T: Real>(
    m: &MonitorFunction<T>,
    grid: &GridSpec<T>,
    boundary: &BoundaryValues<T>,
    cfg: &SolverConfig<T>,
) -> Result<DirichletSolve<T>> {
    boundary.check_grid(grid)?;
    let init = boundary_blend(grid, boundary);
    solve_dirichlet_from(m, grid, boundary, cfg, init)
}

/// As [`solve_dirichlet`] with an explicit initial guess (interior values of `init` are used).
pub fn solve_dirichlet_from<T: Real>(
    m: &MonitorFunction<T>,
    grid: &GridSpec<T>,
    boundary: &BoundaryValues<T>,
    cfg: &SolverConfig<T>,
    mut init: Vec<T>,
) -> Result<DirichletSolve<T>> {
    cfg.validate()?;
    boundary.check_grid(grid)?;
    if init.len() != grid.len() {
        return Err(Error::FieldLength { expected: grid.len(), got: init.len() });
    }
    write_boundary(grid, boundary, &mut init);
    let stencil = Stencil::new(m, grid)?;
    let cap = cfg.iteration_cap(grid);
    let mut cur = init;
    let mut next = cur.clone();
    let mut iterations = 0;
    let mut last_update = T::infinity();
    while iterations < cap {
        last_update = jacobi_sweep(grid, &stencil, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if last_update < cfg.tol {
            break;
        }
    }
    let converged = last_update < cfg.tol;
    Ok(DirichletSolve { field: ScalarField::new(*grid, cur)?, iterations, last_update, converged })
}

/// One Jacobi sweep from `cur` into `next`, parallel over rows. Returns the max update.
fn jacobi_sweep<T: Real>(grid: &GridSpec<T>, s: &Stencil<T>, cur: &[T], next: &mut [T]) -> T {
    let nx = grid.nx();
    let ny = grid.ny();
    next.par_chunks_mut(nx)
        .enumerate()
        .filter(|(j, _)| *j > 0 && *j + 1 < ny)
        .map(|(j, row)| {
            let mut local = T::zero();
            let base = j * nx;
            for i in 1..nx - 1 {
                let k = base + i;
                let v = (s.east[k] * cur[k + 1] + s.west[k] * cur[k - 1]) + (s.north[k] * cur[k + nx] + s.south[k] * cur[k - nx]);
                let d = (v - cur[k]).abs();
                if d > local {
                    local = d;
                }
                row[i] = v;
            }
            local
        })
        .reduce(T::zero, |a, b| a.max(b))
}

/// Full single-domain solve for `(xi, eta)` with its two solver reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleDomainSolve<T> {
    pub solution: MeshSolution<T>,
    pub xi: SolveStats<T>,
    pub eta: SolveStats<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats<T> {
    pub iterations: usize,
    pub last_update: T,
    pub converged: bool,
}

impl<T: Real> From<&DirichletSolve<T>> for SolveStats<T> {
    fn from(d: &DirichletSolve<T>) -> Self {
        Self { iterations: d.iterations, last_update: d.last_update, converged: d.converged }
    }
}

pub fn solve_single_domain<T: Real>(
    m: &MonitorFunction<T>,
    grid: &GridSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<SingleDomainSolve<T>> {
    let (bxi, beta) = boundary_data(m, grid)?;
    let xi = solve_dirichlet(m, grid, &bxi, cfg)?;
    let eta = solve_dirichlet(m, grid, &beta, cfg)?;
    let xs = SolveStats::from(&xi);
    let es = SolveStats::from(&eta);
    Ok(SingleDomainSolve { solution: MeshSolution::new(xi.field, eta.field)?, xi: xs, eta: es })
}
