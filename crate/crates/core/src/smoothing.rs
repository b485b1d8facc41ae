//! Perona-Malik diffusion of mesh solutions and local quadratic least-squares smoothing of
//! interface values.

use rayon::prelude::*;

use crate::decomposition::SubdomainLayout;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MeshSolution, ScalarField};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    /// Each subdomain separately, interface lines held fixed.
    PerSubdomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothConfig<T> {
    /// Edge-stopping parameter of `c = exp(-|grad u|^2 / k^2)`.
    pub k: T,
    pub dt: T,
    pub steps: usize,
    pub scope: Scope,
}

impl<T: Real> Default for SmoothConfig<T> {
    fn default() -> Self {
        Self { k: T::lit(1000.0), dt: T::lit(1e-4), steps: 5, scope: Scope::Global }
    }
}

impl<T: Real> SmoothConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::SmoothConfig(format!("k must be positive, got {}", self.k)));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::SmoothConfig(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// Warning when `dt` exceeds the FTCS bound `hx hy / 4` of `grid`.
    pub fn stability_warning(&self, grid: &GridSpec<T>) -> Option<String> {
        let bound = grid.hx() * grid.hy() / T::lit(4.0);
        (self.dt > bound).then(|| format!("smoothing: dt = {} exceeds the FTCS bound {}", self.dt, bound))
    }
}

/// Index block `i0..=i1` x `j0..=j1` whose interior is updated.
#[derive(Debug, Clone, Copy)]
struct Block {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

fn blocks<T: Real>(grid: &GridSpec<T>, scope: Scope, layout: Option<&SubdomainLayout<T>>) -> Result<Vec<Block>> {
    match (scope, layout) {
        (Scope::Global, _) => Ok(vec![Block { i0: 0, i1: grid.nx() - 1, j0: 0, j1: grid.ny() - 1 }]),
        (Scope::PerSubdomain, Some(l)) => {
            if l.grid() != grid {
                return Err(Error::SmoothConfig("layout grid differs from the solution grid".into()));
            }
            Ok(l.subdomains().iter().map(|s| Block { i0: s.i0, i1: s.i1, j0: s.j0, j1: s.j1 }).collect())
        }
        (Scope::PerSubdomain, None) => Err(Error::SmoothConfig("per-subdomain smoothing needs a layout".into())),
    }
}

/// `m` FTCS steps of `u_t = div(c grad u)` for `xi` and `eta` independently. Nodal `c` uses
/// centred differences (one-sided on block edges); half-point `c` is the mean of its two
/// nodes. Block boundaries are Dirichlet: the physical boundary for global scope, plus the
/// interface lines for per-subdomain scope.
pub fn perona_malik<T: Real>(sol: &MeshSolution<T>, cfg: &SmoothConfig<T>, layout: Option<&SubdomainLayout<T>>) -> Result<MeshSolution<T>> {
    cfg.validate()?;
    let grid = *sol.grid();
    let blocks = blocks(&grid, cfg.scope, layout)?;
    if cfg.steps == 0 {
        return Ok(sol.clone());
    }
    let xi = smooth_field(&sol.xi, &blocks, cfg)?;
    let eta = smooth_field(&sol.eta, &blocks, cfg)?;
    MeshSolution::new(xi, eta)
}

fn smooth_field<T: Real>(f: &ScalarField<T>, blocks: &[Block], cfg: &SmoothConfig<T>) -> Result<ScalarField<T>> {
    let grid = *f.grid();
    let src = f.values();
    let results: Vec<(Block, Vec<T>)> = blocks
        .par_iter()
        .map(|&b| {
            let w = b.i1 - b.i0 + 1;
            let h = b.j1 - b.j0 + 1;
            let mut local = Vec::with_capacity(w * h);
            for j in b.j0..=b.j1 {
                local.extend_from_slice(&src[grid.index(b.i0, j)..=grid.index(b.i1, j)]);
            }
            smooth_block(local, w, h, grid.hx(), grid.hy(), cfg).map(|v| (b, v))
        })
        .collect::<Result<_>>()?;
    let mut out = src.to_vec();
    for (b, v) in results {
        let w = b.i1 - b.i0 + 1;
        for j in b.j0 + 1..b.j1 {
            for i in b.i0 + 1..b.i1 {
                out[grid.index(i, j)] = v[(j - b.j0) * w + (i - b.i0)];
            }
        }
    }
    ScalarField::new(grid, out)
}

/// Nodal diffusivity `exp(-|grad u|^2 / k^2)` on a `w` x `h` block.
fn diffusivity<T: Real>(u: &[T], w: usize, h: usize, hx: T, hy: T, k2: T) -> Vec<T> {
    let two = T::lit(2.0);
    let mut c = vec![T::zero(); w * h];
    c.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, out) in row.iter_mut().enumerate() {
            let at = |ii: usize, jj: usize| u[jj * w + ii];
            let ux = if i == 0 {
                (at(1, j) - at(0, j)) / hx
            } else if i == w - 1 {
                (at(i, j) - at(i - 1, j)) / hx
            } else {
                (at(i + 1, j) - at(i - 1, j)) / (two * hx)
            };
            let uy = if j == 0 {
                (at(i, 1) - at(i, 0)) / hy
            } else if j == h - 1 {
                (at(i, j) - at(i, j - 1)) / hy
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (two * hy)
            };
            *out = (-(ux * ux + uy * uy) / k2).exp();
        }
    });
    c
}

fn smooth_block<T: Real>(mut u: Vec<T>, w: usize, h: usize, hx: T, hy: T, cfg: &SmoothConfig<T>) -> Result<Vec<T>> {
    let k2 = cfg.k * cfg.k;
    let half = T::lit(0.5);
    let (hx2, hy2) = (hx * hx, hy * hy);
    let scale = u.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
    let floor = T::epsilon().sqrt() * scale;
    let mut next = u.clone();
    let mut prev_update: Option<T> = None;
    for _ in 0..cfg.steps {
        let c = diffusivity(&u, w, h, hx, hy, k2);
        let update = next
            .par_chunks_mut(w)
            .enumerate()
            .filter(|(j, _)| *j > 0 && *j + 1 < h)
            .map(|(j, row)| {
                let mut local = T::zero();
                for i in 1..w - 1 {
                    let k = j * w + i;
                    let ce = half * (c[k] + c[k + 1]);
                    let cw = half * (c[k] + c[k - 1]);
                    let cn = half * (c[k] + c[k + w]);
                    let cs = half * (c[k] + c[k - w]);
                    let flux = (ce * (u[k + 1] - u[k]) - cw * (u[k] - u[k - 1])) / hx2
                        + (cn * (u[k + w] - u[k]) - cs * (u[k] - u[k - w])) / hy2;
                    let d = cfg.dt * flux;
                    row[i] = u[k] + d;
                    local = local.max(d.abs());
                }
                local
            })
            .reduce(T::zero, |a, b| a.max(b));
        if !update.is_finite() {
            return Err(Error::Instability { dt: cfg.dt.to_f64_lossy() });
        }
        if let Some(p) = prev_update {
            if update > T::lit(10.0) * p && update > floor {
                return Err(Error::Instability { dt: cfg.dt.to_f64_lossy() });
            }
        }
        prev_update = Some(update);
        std::mem::swap(&mut u, &mut next);
    }
    Ok(u)
}

/// Local weighted quadratic regression along a line: each interior node is replaced by the
/// value at that node of a degree-2 least-squares fit over a `span`-node window (shifted at
/// the ends) with tricube weights. The two end values are kept.
pub fn smooth_interface<T: Real>(values: &[T], span: usize) -> Result<Vec<T>> {
    let n = values.len();
    if span < 3 || span % 2 == 0 || span > n {
        return Err(Error::SmoothConfig(format!("span must be odd with 3 <= span <= {n}, got {span}")));
    }
    let half = span / 2;
    let mut out = values.to_vec();
    for (node, o) in out.iter_mut().enumerate().take(n - 1).skip(1) {
        let lo = node.saturating_sub(half).min(n - span);
        let hi = lo + span - 1;
        let reach = (node - lo).max(hi - node) + 1;
        let bw = T::from_usize_lossy(reach);
        // Normal equations in the local coordinate d = s - node.
        let mut a = [[T::zero(); 3]; 3];
        let mut rhs = [T::zero(); 3];
        for (s, &v) in values.iter().enumerate().take(hi + 1).skip(lo) {
            let d = T::from_usize_lossy(s) - T::from_usize_lossy(node);
            let r = (d.abs() / bw).min(T::one());
            let t = T::one() - r * r * r;
            let wgt = t * t * t;
            let basis = [T::one(), d, d * d];
            for p in 0..3 {
                for q in 0..3 {
                    a[p][q] += wgt * basis[p] * basis[q];
                }
                rhs[p] += wgt * basis[p] * v;
            }
        }
        *o = solve3(a, rhs).ok_or(Error::SingularFit { node })?[0];
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let tiny = T::epsilon() * T::lit(64.0) * scale;
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(a[piv][col].abs() > tiny) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in r + 1..3 {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}
