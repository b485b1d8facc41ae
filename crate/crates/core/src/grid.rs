//! Rectangular domains, uniform structured grids, scalar fields and the
//! inversion of a computational-coordinate solution into a physical mesh.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain<T> {
    xmin: T,
    xmax: T,
    ymin: T,
    ymax: T,
}

impl<T: Real> RectDomain<T> {
    pub fn new(xmin: T, xmax: T, ymin: T, ymax: T) -> Result<Self> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin >= xmax || ymin >= ymax {
            return Err(Error::InvalidDomain {
                xmin: xmin.to_f64_lossy(),
                xmax: xmax.to_f64_lossy(),
                ymin: ymin.to_f64_lossy(),
                ymax: ymax.to_f64_lossy(),
            });
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    pub fn unit() -> Self {
        Self { xmin: T::zero(), xmax: T::one(), ymin: T::zero(), ymax: T::one() }
    }

    /// The square `[-h, h]^2`.
    pub fn centered_square(h: T) -> Result<Self> {
        Self::new(-h, h, -h, h)
    }

    pub fn xmin(&self) -> T {
        self.xmin
    }
    pub fn xmax(&self) -> T {
        self.xmax
    }
    pub fn ymin(&self) -> T {
        self.ymin
    }
    pub fn ymax(&self) -> T {
        self.ymax
    }
    pub fn width(&self) -> T {
        self.xmax - self.xmin
    }
    pub fn height(&self) -> T {
        self.ymax - self.ymin
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// True when `p` is inside and not on the boundary.
    pub fn contains_strictly(&self, p: Point<T>) -> bool {
        p.x > self.xmin && p.x < self.xmax && p.y > self.ymin && p.y < self.ymax
    }
}

/// Uniform node layout of `nx * ny` points over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    domain: RectDomain<T>,
    nx: usize,
    ny: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(domain: RectDomain<T>, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid { nx, ny });
        }
        Ok(Self { domain, nx, ny })
    }

    pub fn domain(&self) -> &RectDomain<T> {
        &self.domain
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hx(&self) -> T {
        self.domain.width() / T::from_usize_lossy(self.nx - 1)
    }
    pub fn hy(&self) -> T {
        self.domain.height() / T::from_usize_lossy(self.ny - 1)
    }

    /// x-coordinate of column `i`; the last column is pinned to `xmax`.
    pub fn x(&self, i: usize) -> T {
        if i + 1 == self.nx {
            self.domain.xmax
        } else {
            self.domain.xmin + T::from_usize_lossy(i) * self.hx()
        }
    }

    /// y-coordinate of row `j`; the last row is pinned to `ymax`.
    pub fn y(&self, j: usize) -> T {
        if j + 1 == self.ny {
            self.domain.ymax
        } else {
            self.domain.ymin + T::from_usize_lossy(j) * self.hy()
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Point<T> {
        Point::new(self.x(i), self.y(j))
    }

    /// Row-major index, `j` major.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Grid over the index block `[i0, i1] x [j0, j1]`, sharing this grid's node positions.
    /// A block covering the whole grid returns an identical grid.
    pub fn block(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> Result<Self> {
        let domain = RectDomain::new(self.x(i0), self.x(i1), self.y(j0), self.y(j1))?;
        Self::new(domain, i1 - i0 + 1, j1 - j0 + 1)
    }
}

/// Nodal values on a [`GridSpec`], row-major by `j` then `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength { expected: grid.len(), got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { i: k % grid.nx, j: k / grid.nx });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(Point<T>) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        Self::new(grid, values)
    }

    pub fn constant(grid: GridSpec<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn min_max(&self) -> (T, T) {
        self.values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
    }

    /// Bilinear interpolant of the four nodes around `p`.
    pub fn sample_bilinear(&self, p: Point<T>) -> Result<T> {
        let d = self.grid.domain();
        if !d.contains(p) {
            return Err(Error::OutOfDomain { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
        }
        let (i, s) = cell_coordinate(p.x - d.xmin(), self.grid.hx(), self.grid.nx);
        let (j, t) = cell_coordinate(p.y - d.ymin(), self.grid.hy(), self.grid.ny);
        let v00 = self.get(i, j);
        let v10 = self.get(i + 1, j);
        let v01 = self.get(i, j + 1);
        let v11 = self.get(i + 1, j + 1);
        let lower = v00 + s * (v10 - v00);
        let upper = v01 + s * (v11 - v01);
        Ok(lower + t * (upper - lower))
    }
}

/// Cell index and local coordinate in `[0, 1]` for offset `off` along an axis of `n` nodes.
fn cell_coordinate<T: Real>(off: T, h: T, n: usize) -> (usize, T) {
    let u = off / h;
    let last = n - 2;
    let i = u.floor().to_usize().unwrap_or(0).min(last);
    let s = (u - T::from_usize_lossy(i)).max(T::zero()).min(T::one());
    (i, s)
}

/// Computational coordinates `(xi, eta)` sampled on the physical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSolution<T> {
    pub xi: ScalarField<T>,
    pub eta: ScalarField<T>,
}

impl<T: Real> MeshSolution<T> {
    pub fn new(xi: ScalarField<T>, eta: ScalarField<T>) -> Result<Self> {
        if xi.grid != eta.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { xi, eta })
    }

    /// `xi = (x - xmin) / width`, `eta = (y - ymin) / height`.
    pub fn identity(grid: GridSpec<T>) -> Self {
        let d = *grid.domain();
        let xi = ScalarField::from_fn(grid, |p| (p.x - d.xmin()) / d.width()).expect("finite");
        let eta = ScalarField::from_fn(grid, |p| (p.y - d.ymin()) / d.height()).expect("finite");
        Self { xi, eta }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.xi.grid()
    }
}

/// Physical node positions `x(xi_a, eta_b)`, `y(xi_a, eta_b)` of the adapted mesh.
/// Stored row-major with `b` major: index `b * m_xi + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalMesh<T> {
    m_xi: usize,
    m_eta: usize,
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> PhysicalMesh<T> {
    pub fn new(m_xi: usize, m_eta: usize, x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if m_xi < 2 || m_eta < 2 {
            return Err(Error::InvalidGrid { nx: m_xi, ny: m_eta });
        }
        let n = m_xi * m_eta;
        for v in [&x, &y] {
            if v.len() != n {
                return Err(Error::FieldLength { expected: n, got: v.len() });
            }
            if let Some(k) = v.iter().position(|c| !c.is_finite()) {
                return Err(Error::NonFiniteValue { i: k % m_xi, j: k / m_xi });
            }
        }
        Ok(Self { m_xi, m_eta, x, y })
    }

    /// Uniform tensor mesh over `domain`.
    pub fn uniform(domain: &RectDomain<T>, m_xi: usize, m_eta: usize) -> Result<Self> {
        let mut x = Vec::with_capacity(m_xi * m_eta);
        let mut y = Vec::with_capacity(m_xi * m_eta);
        for b in 0..m_eta {
            for a in 0..m_xi {
                x.push(lerp_index(domain.xmin(), domain.xmax(), a, m_xi));
                y.push(lerp_index(domain.ymin(), domain.ymax(), b, m_eta));
            }
        }
        Self::new(m_xi, m_eta, x, y)
    }

    pub fn m_xi(&self) -> usize {
        self.m_xi
    }
    pub fn m_eta(&self) -> usize {
        self.m_eta
    }
    pub fn xs(&self) -> &[T] {
        &self.x
    }
    pub fn ys(&self) -> &[T] {
        &self.y
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        b * self.m_xi + a
    }

    #[inline]
    pub fn node(&self, a: usize, b: usize) -> Point<T> {
        let k = self.index(a, b);
        Point::new(self.x[k], self.y[k])
    }

    /// Applies `f` to every node position.
    pub fn map_nodes(&self, f: impl Fn(Point<T>) -> Point<T>) -> Self {
        let (x, y) = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(&x, &y)| {
                let p = f(Point::new(x, y));
                (p.x, p.y)
            })
            .unzip();
        Self { m_xi: self.m_xi, m_eta: self.m_eta, x, y }
    }
}

/// `lo + (hi - lo) * k / (n - 1)` with both ends exact.
fn lerp_index<T: Real>(lo: T, hi: T, k: usize, n: usize) -> T {
    if k + 1 == n {
        hi
    } else {
        lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)
    }
}

/// Targets closer than this to the computational image (in xi/eta units) snap onto it.
pub const INVERSION_SNAP_TOL: f64 = 1e-9;

/// Inverts `(xi, eta)` on the physical grid into physical coordinates of the uniform
/// `m_xi x m_eta` computational mesh on `[0, 1]^2`.
///
/// Each physical cell is split along its lower-left to upper-right diagonal; the images of
/// the two triangles tessellate the computational square and every target is interpolated
/// barycentrically inside the triangle that contains it. Rows of targets are independent,
/// and every row starts its walk from a fixed triangle, so the output does not depend on
/// how rows are scheduled.
pub fn invert_mesh<T: Real>(sol: &MeshSolution<T>, m_xi: usize, m_eta: usize) -> Result<PhysicalMesh<T>> {
    if m_xi < 2 || m_eta < 2 {
        return Err(Error::InvalidGrid { nx: m_xi, ny: m_eta });
    }
    let tess = Tessellation::new(sol)?;
    let rows: Vec<Result<Vec<(T, T)>>> = (0..m_eta)
        .into_par_iter()
        .map(|b| {
            let eta_t = lerp_index(T::zero(), T::one(), b, m_eta);
            let start_j = (b * (tess.ny - 1)) / (m_eta - 1).max(1);
            let mut current = tess.tri_id(0, start_j.min(tess.ny - 2), 1);
            let mut row = Vec::with_capacity(m_xi);
            for a in 0..m_xi {
                let xi_t = lerp_index(T::zero(), T::one(), a, m_xi);
                let q = Point::new(xi_t, eta_t);
                let (tri, bary) = tess.locate(q, current).ok_or(Error::InversionFailure { a, b })?;
                current = tri;
                row.push(tess.interpolate(tri, bary));
            }
            Ok(row)
        })
        .collect();
    let mut x = Vec::with_capacity(m_xi * m_eta);
    let mut y = Vec::with_capacity(m_xi * m_eta);
    for row in rows {
        for (px, py) in row? {
            x.push(px);
            y.push(py);
        }
    }
    PhysicalMesh::new(m_xi, m_eta, x, y)
}

/// Triangulated image of the physical grid in computational space.
struct Tessellation<'a, T> {
    sol: &'a MeshSolution<T>,
    nx: usize,
    ny: usize,
}

impl<'a, T: Real> Tessellation<'a, T> {
    fn new(sol: &'a MeshSolution<T>) -> Result<Self> {
        let grid = sol.grid();
        let t = Self { sol, nx: grid.nx(), ny: grid.ny() };
        for j in 0..t.ny - 1 {
            for i in 0..t.nx - 1 {
                for k in 0..2 {
                    let [p0, p1, p2] = t.image(t.tri_id(i, j, k));
                    let e1 = sub(p1, p0);
                    let e2 = sub(p2, p0);
                    let det = cross(e1, e2);
                    let scale = norm(e1) * norm(e2);
                    if !(det.abs() > T::epsilon() * scale) || scale == T::zero() {
                        return Err(Error::DegenerateMap { i, j });
                    }
                }
            }
        }
        Ok(t)
    }

    fn n_tri(&self) -> usize {
        2 * (self.nx - 1) * (self.ny - 1)
    }

    #[inline]
    fn tri_id(&self, i: usize, j: usize, k: usize) -> usize {
        2 * (j * (self.nx - 1) + i) + k
    }

    /// Grid vertices of triangle `t`. `k = 0` is the lower-right half, `k = 1` the upper-left.
    fn vertices(&self, t: usize) -> [(usize, usize); 3] {
        let k = t % 2;
        let c = t / 2;
        let i = c % (self.nx - 1);
        let j = c / (self.nx - 1);
        if k == 0 {
            [(i, j), (i + 1, j), (i + 1, j + 1)]
        } else {
            [(i, j), (i + 1, j + 1), (i, j + 1)]
        }
    }

    /// Neighbor across the edge opposite local vertex `v`.
    fn neighbor(&self, t: usize, v: usize) -> Option<usize> {
        let k = t % 2;
        let c = t / 2;
        let i = c % (self.nx - 1);
        let j = c / (self.nx - 1);
        match (k, v) {
            (0, 0) => (i + 2 < self.nx).then(|| self.tri_id(i + 1, j, 1)),
            (0, 1) => Some(self.tri_id(i, j, 1)),
            (0, _) => (j > 0).then(|| self.tri_id(i, j - 1, 1)),
            (_, 0) => (j + 2 < self.ny).then(|| self.tri_id(i, j + 1, 0)),
            (_, 1) => (i > 0).then(|| self.tri_id(i - 1, j, 0)),
            _ => Some(self.tri_id(i, j, 0)),
        }
    }

    fn image(&self, t: usize) -> [Point<T>; 3] {
        self.vertices(t).map(|(i, j)| Point::new(self.sol.xi.get(i, j), self.sol.eta.get(i, j)))
    }

    fn barycentric(&self, t: usize, q: Point<T>) -> [T; 3] {
        let [p0, p1, p2] = self.image(t);
        let e1 = sub(p1, p0);
        let e2 = sub(p2, p0);
        let d = cross(e1, e2);
        let r = sub(q, p0);
        let l1 = cross(r, e2) / d;
        let l2 = cross(e1, r) / d;
        [T::one() - l1 - l2, l1, l2]
    }

    fn locate(&self, q: Point<T>, start: usize) -> Option<(usize, [T; 3])> {
        let eps = T::lit(1e-12);
        let mut t = start;
        for _ in 0..self.n_tri() {
            let bary = self.barycentric(t, q);
            let (worst, &lmin) = bary
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .expect("three coordinates");
            if lmin >= -eps {
                return Some((t, clamp_bary(bary)));
            }
            match self.neighbor(t, worst) {
                Some(n) => t = n,
                None => break,
            }
        }
        self.locate_exhaustive(q)
    }

    /// Closest triangle by distance in computational space, accepted within the snap tolerance.
    fn locate_exhaustive(&self, q: Point<T>) -> Option<(usize, [T; 3])> {
        let mut best: Option<(T, usize, Point<T>)> = None;
        for t in 0..self.n_tri() {
            let [p0, p1, p2] = self.image(t);
            let c = closest_point_on_triangle(q, p0, p1, p2);
            let d = norm(sub(q, c));
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, t, c));
            }
        }
        let (d, t, c) = best?;
        if d > T::lit(INVERSION_SNAP_TOL) {
            return None;
        }
        Some((t, clamp_bary(self.barycentric(t, c))))
    }

    fn interpolate(&self, t: usize, bary: [T; 3]) -> (T, T) {
        let grid = self.sol.grid();
        let verts = self.vertices(t);
        let mut x = T::zero();
        let mut y = T::zero();
        for (l, (i, j)) in bary.iter().zip(verts) {
            x += *l * grid.x(i);
            y += *l * grid.y(j);
        }
        (x, y)
    }
}

fn clamp_bary<T: Real>(b: [T; 3]) -> [T; 3] {
    if b.iter().all(|&l| l >= T::zero()) {
        return b;
    }
    let c = b.map(|l| l.max(T::zero()));
    let s = c[0] + c[1] + c[2];
    c.map(|l| l / s)
}

#[inline]
fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    Point::new(a.x - b.x, a.y - b.y)
}
#[inline]
fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a.x * b.y - a.y * b.x
}
#[inline]
fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a.x * b.x + a.y * b.y
}
#[inline]
fn norm<T: Real>(a: Point<T>) -> T {
    dot(a, a).sqrt()
}

fn closest_point_on_segment<T: Real>(q: Point<T>, a: Point<T>, b: Point<T>) -> Point<T> {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == T::zero() {
        return a;
    }
    let s = (dot(sub(q, a), ab) / len2).max(T::zero()).min(T::one());
    Point::new(a.x + s * ab.x, a.y + s * ab.y)
}

fn closest_point_on_triangle<T: Real>(q: Point<T>, p0: Point<T>, p1: Point<T>, p2: Point<T>) -> Point<T> {
    let d = cross(sub(p1, p0), sub(p2, p0));
    let s0 = cross(sub(p1, p0), sub(q, p0)) * d;
    let s1 = cross(sub(p2, p1), sub(q, p1)) * d;
    let s2 = cross(sub(p0, p2), sub(q, p2)) * d;
    if s0 >= T::zero() && s1 >= T::zero() && s2 >= T::zero() {
        return q;
    }
    [(p0, p1), (p1, p2), (p2, p0)]
        .iter()
        .map(|&(a, b)| closest_point_on_segment(q, a, b))
        .min_by(|a, b| {
            norm(sub(q, *a)).partial_cmp(&norm(sub(q, *b))).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("three edges")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_grid(n: usize) -> GridSpec<f64> {
        GridSpec::new(RectDomain::unit(), n, n).unwrap()
    }

    #[test]
    fn domain_rejects_inverted_bounds() {
        assert!(RectDomain::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(RectDomain::new(0.0, 1.0, 0.0, 0.0).is_err());
        let d = RectDomain::<f64>::unit();
        assert!(d.contains(Point::new(1.0, 0.0)));
        assert!(!d.contains(Point::new(1.0 + 1e-15, 0.5)));
    }

    #[test]
    fn grid_needs_interior_nodes() {
        assert!(GridSpec::new(RectDomain::<f64>::unit(), 2, 5).is_err());
        let g = unit_grid(5);
        assert_eq!(g.node(4, 2), Point::new(1.0, 0.5));
        assert_eq!(g.index(1, 2), 11);
    }

    #[test]
    fn bilinear_reproduces_linear_in_x() {
        let f = ScalarField::from_fn(unit_grid(11), |p| p.x).unwrap();
        assert_abs_diff_eq!(f.sample_bilinear(Point::new(0.37, 0.9)).unwrap(), 0.37, epsilon = 1e-14);
    }

    #[test]
    fn bilinear_constant_and_product() {
        let c = ScalarField::constant(unit_grid(7), 4.2);
        assert_eq!(c.sample_bilinear(Point::new(0.123, 0.987)).unwrap(), 4.2);
        let f = ScalarField::from_fn(unit_grid(3), |p| p.x * p.y).unwrap();
        assert_eq!(f.sample_bilinear(Point::new(0.25, 0.25)).unwrap(), 0.0625);
    }

    #[test]
    fn bilinear_out_of_domain() {
        let f = ScalarField::constant(unit_grid(3), 1.0);
        assert!(matches!(
            f.sample_bilinear(Point::new(1.5, 0.5)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn field_rejects_nan() {
        let g = unit_grid(3);
        let mut v = vec![0.0; 9];
        v[4] = f64::NAN;
        assert_eq!(ScalarField::new(g, v), Err(Error::NonFiniteValue { i: 1, j: 1 }));
    }

    #[test]
    fn invert_identity_is_uniform() {
        let sol = MeshSolution::identity(unit_grid(9));
        let mesh = invert_mesh(&sol, 5, 5).unwrap();
        for b in 0..5 {
            for a in 0..5 {
                let p = mesh.node(a, b);
                assert_abs_diff_eq!(p.x, a as f64 / 4.0, epsilon = 1e-12);
                assert_abs_diff_eq!(p.y, b as f64 / 4.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn invert_square_map_row() {
        let g = unit_grid(29);
        let xi = ScalarField::from_fn(g, |p| p.x * p.x).unwrap();
        let eta = ScalarField::from_fn(g, |p| p.y).unwrap();
        let sol = MeshSolution::new(xi, eta).unwrap();
        let mesh = invert_mesh(&sol, 5, 5).unwrap();
        // Oracle: invert the piecewise-linear interpolant of x^2 on the same nodes.
        let xs: Vec<f64> = (0..29).map(|i| g.x(i)).collect();
        let k = xs.iter().position(|&x| x * x > 0.25).unwrap();
        let (x0, x1) = (xs[k - 1], xs[k]);
        let s = (0.25 - x0 * x0) / (x1 * x1 - x0 * x0);
        let pl = x0 + s * (x1 - x0);
        for b in 0..5 {
            assert_abs_diff_eq!(mesh.node(1, b).x, pl, epsilon = 1e-12);
        }
        assert!((pl - 0.5).abs() < 1e-3);
    }

    #[test]
    fn invert_rejects_degenerate_map() {
        let g = unit_grid(5);
        let xi = ScalarField::from_fn(g, |p| if p.x < 0.3 { 0.0 } else { p.x }).unwrap();
        let eta = ScalarField::from_fn(g, |p| p.y).unwrap();
        let sol = MeshSolution::new(xi, eta).unwrap();
        assert!(matches!(invert_mesh(&sol, 5, 5), Err(Error::DegenerateMap { .. })));
    }

    #[test]
    fn invert_reports_uncovered_target() {
        let g = unit_grid(5);
        // Image only covers xi in [0, 0.5].
        let xi = ScalarField::from_fn(g, |p| 0.5 * p.x).unwrap();
        let eta = ScalarField::from_fn(g, |p| p.y).unwrap();
        let sol = MeshSolution::new(xi, eta).unwrap();
        assert!(matches!(invert_mesh(&sol, 5, 5), Err(Error::InversionFailure { a: 3, b: 0 })));
    }

    #[test]
    fn block_of_full_range_is_identical() {
        let g = GridSpec::new(RectDomain::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 13, 9).unwrap();
        assert_eq!(g.block(0, 12, 0, 8).unwrap(), g);
        let b = g.block(3, 6, 2, 8).unwrap();
        assert_eq!(b.nx(), 4);
        assert_eq!(b.x(0), g.x(3));
        assert_eq!(b.y(b.ny() - 1), g.y(8));
    }

    #[test]
    fn f32_grid_samples() {
        let g = GridSpec::<f32>::new(RectDomain::unit(), 5, 5).unwrap();
        let f = ScalarField::from_fn(g, |p| 2.0 * p.x + p.y).unwrap();
        assert!((f.sample_bilinear(Point::new(0.3, 0.6)).unwrap() - 1.2).abs() < 1e-6);
    }
}
