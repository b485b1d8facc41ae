//! Monitor (mesh density) functions.
//!
//! A monitor `rho > 0` sets where the physical mesh concentrates. The generator uses the
//! diffusion weight `w = 1 / rho`, and the walk drift `grad(w) / w`, which equals
//! `-grad(rho) / rho`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Point, RectDomain};
use crate::real::Real;

/// Closed-form density used by a [`MonitorFunction`].
#[derive(Clone)]
pub enum MonitorKind<T> {
    /// `rho = 1`.
    Constant,
    /// Gaussian bump `1 + R exp(-50 (x - 3/4)^2 - 50 (y - 1/2)^2 - 1/2)`.
    RunningExample { r: T },
    /// Boundary-layer monitor
    /// `sqrt(1 + alpha (R^2 E^2 sin^2(pi y) + (1 - E)^2 cos^2(pi y) pi^2))`, `E = exp(R (x - 1))`.
    HuangSloan { alpha: T, r: T },
    /// Sine-wave layer `1 / (1 + alpha exp(-R (y - 1/2 - sin(2 pi x) / 4)^2))`.
    Mackenzie { alpha: T, r: T },
    /// Arc-length monitor `sqrt(1 + alpha |grad u|^2)` of five `tanh` rings.
    FiveRing { alpha: T, r: T },
    User(UserMonitor<T>),
}

/// Density supplied as a closure; derivatives come from central differences.
#[derive(Clone)]
pub struct UserMonitor<T> {
    name: String,
    rho: Arc<dyn Fn(Point<T>) -> T + Send + Sync>,
}

impl<T> fmt::Debug for MonitorKind<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "Constant"),
            Self::RunningExample { r } => write!(f, "RunningExample {{ r: {r:?} }}"),
            Self::HuangSloan { alpha, r } => write!(f, "HuangSloan {{ alpha: {alpha:?}, r: {r:?} }}"),
            Self::Mackenzie { alpha, r } => write!(f, "Mackenzie {{ alpha: {alpha:?}, r: {r:?} }}"),
            Self::FiveRing { alpha, r } => write!(f, "FiveRing {{ alpha: {alpha:?}, r: {r:?} }}"),
            Self::User(u) => write!(f, "User({})", u.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode<T> {
    Analytic,
    CentralDifference { h: T },
}

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Positive density with first and second derivatives.
#[derive(Debug, Clone)]
pub struct MonitorFunction<T> {
    kind: MonitorKind<T>,
    gradient: GradientMode<T>,
    domain: RectDomain<T>,
}

const RING_CENTERS: [(f64, f64); 5] = [(0.0, 0.0), (0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)];

impl<T: Real> MonitorFunction<T> {
    fn build(kind: MonitorKind<T>, gradient: GradientMode<T>, domain: RectDomain<T>) -> Result<Self> {
        let m = Self { kind, gradient, domain };
        m.probe_positive(101)?;
        Ok(m)
    }

    pub fn constant() -> Self {
        Self { kind: MonitorKind::Constant, gradient: GradientMode::Analytic, domain: RectDomain::unit() }
    }

    pub fn constant_on(domain: RectDomain<T>) -> Self {
        Self { kind: MonitorKind::Constant, gradient: GradientMode::Analytic, domain }
    }

    /// Gaussian bump centred at `(3/4, 1/2)` on the unit square, `R = 15`.
    pub fn running_example() -> Self {
        Self::running_example_with(T::lit(15.0)).expect("default parameters are valid")
    }

    pub fn running_example_with(r: T) -> Result<Self> {
        check_param("R", r, true)?;
        Self::build(MonitorKind::RunningExample { r }, GradientMode::Analytic, RectDomain::unit())
    }

    /// `alpha = 0.7`, `R = 15` on the unit square.
    pub fn huang_sloan() -> Self {
        Self::huang_sloan_with(T::lit(0.7), T::lit(15.0)).expect("default parameters are valid")
    }

    pub fn huang_sloan_with(alpha: T, r: T) -> Result<Self> {
        check_param("alpha", alpha, true)?;
        check_param("R", r, false)?;
        Self::build(MonitorKind::HuangSloan { alpha, r }, GradientMode::Analytic, RectDomain::unit())
    }

    /// `alpha = 10`, `R = 50` on the unit square.
    pub fn mackenzie() -> Self {
        Self::mackenzie_with(T::lit(10.0), T::lit(50.0)).expect("default parameters are valid")
    }

    pub fn mackenzie_with(alpha: T, r: T) -> Result<Self> {
        check_param("alpha", alpha, true)?;
        check_param("R", r, false)?;
        Self::build(MonitorKind::Mackenzie { alpha, r }, GradientMode::Analytic, RectDomain::unit())
    }

    /// `alpha = 0.2`, `R = 30` on `[-1, 1]^2`.
    pub fn five_ring() -> Self {
        Self::five_ring_with(T::lit(0.2), T::lit(30.0)).expect("default parameters are valid")
    }

    pub fn five_ring_with(alpha: T, r: T) -> Result<Self> {
        check_param("alpha", alpha, true)?;
        check_param("R", r, false)?;
        let domain = RectDomain::centered_square(T::one())?;
        Self::build(MonitorKind::FiveRing { alpha, r }, GradientMode::Analytic, domain)
    }

    /// Wraps a user density. Positivity is probed on a 101x101 lattice of `domain`.
    pub fn user<F>(name: impl Into<String>, domain: RectDomain<T>, h: T, rho: F) -> Result<Self>
    where
        F: Fn(Point<T>) -> T + Send + Sync + 'static,
    {
        check_param("h", h, false)?;
        let kind = MonitorKind::User(UserMonitor { name: name.into(), rho: Arc::new(rho) });
        Self::build(kind, GradientMode::CentralDifference { h }, domain)
    }

    /// Builtin monitor by name with `(parameter, value)` overrides (`R`, `alpha`).
    pub fn builtin(name: &str, overrides: &[(String, f64)]) -> Result<Self> {
        let get = |key: &str, default: f64| -> T {
            let v = overrides
                .iter()
                .rev()
                .find(|(k, _)| k.eq_ignore_ascii_case(key))
                .map_or(default, |(_, v)| *v);
            T::lit(v)
        };
        let allowed: &[&str] = match name {
            "constant" => &[],
            "running" | "running-example" => &["R"],
            _ => &["R", "alpha"],
        };
        if let Some((k, v)) = overrides.iter().find(|(k, _)| !allowed.iter().any(|a| a.eq_ignore_ascii_case(k))) {
            return Err(Error::MonitorParameter { name: k.clone(), value: *v });
        }
        match name {
            "constant" => Ok(Self::constant()),
            "running" | "running-example" => Self::running_example_with(get("R", 15.0)),
            "huang-sloan" => Self::huang_sloan_with(get("alpha", 0.7), get("R", 15.0)),
            "mackenzie" => Self::mackenzie_with(get("alpha", 10.0), get("R", 50.0)),
            "five-ring" => Self::five_ring_with(get("alpha", 0.2), get("R", 30.0)),
            _ => Err(Error::MonitorParameter { name: format!("monitor {name}"), value: f64::NAN }),
        }
    }

    /// Switches between analytic derivatives and central differences with step `h`.
    pub fn with_gradient_mode(mut self, mode: GradientMode<T>) -> Self {
        if matches!(self.kind, MonitorKind::User(_)) && mode == GradientMode::Analytic {
            return self;
        }
        self.gradient = mode;
        self
    }

    pub fn kind(&self) -> &MonitorKind<T> {
        &self.kind
    }
    pub fn gradient_mode(&self) -> GradientMode<T> {
        self.gradient
    }
    /// Natural domain of the monitor.
    pub fn domain(&self) -> &RectDomain<T> {
        &self.domain
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            MonitorKind::Constant => "constant",
            MonitorKind::RunningExample { .. } => "running",
            MonitorKind::HuangSloan { .. } => "huang-sloan",
            MonitorKind::Mackenzie { .. } => "mackenzie",
            MonitorKind::FiveRing { .. } => "five-ring",
            MonitorKind::User(u) => &u.name,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, MonitorKind::Constant)
    }

    fn raw_rho(&self, p: Point<T>) -> T {
        match &self.kind {
            MonitorKind::User(u) => (u.rho)(p),
            _ => self.analytic(p).0,
        }
    }

    pub fn rho(&self, p: Point<T>) -> Result<T> {
        checked(p, self.raw_rho(p))
    }

    /// Diffusion weight `w = 1 / rho`.
    pub fn weight(&self, p: Point<T>) -> Result<T> {
        Ok(T::one() / self.rho(p)?)
    }

    /// `(rho, [rho_x, rho_y])`.
    pub fn rho_and_gradient(&self, p: Point<T>) -> Result<(T, [T; 2])> {
        let (rho, g) = match (self.gradient, &self.kind) {
            (GradientMode::Analytic, kind) if !matches!(kind, MonitorKind::User(_)) => {
                let (r, gx, gy) = self.analytic(p);
                (r, [gx, gy])
            }
            (GradientMode::CentralDifference { h }, _) => (self.raw_rho(p), self.central_gradient(p, h)),
            _ => (self.raw_rho(p), self.central_gradient(p, T::lit(DEFAULT_FD_STEP))),
        };
        let rho = checked(p, rho)?;
        if !g[0].is_finite() || !g[1].is_finite() {
            return Err(eval_error(p));
        }
        Ok((rho, g))
    }

    pub fn gradient(&self, p: Point<T>) -> Result<[T; 2]> {
        Ok(self.rho_and_gradient(p)?.1)
    }

    /// Walk drift `grad(w) / w = -grad(rho) / rho`.
    pub fn drift(&self, p: Point<T>) -> Result<[T; 2]> {
        if self.is_constant() {
            return Ok([T::zero(), T::zero()]);
        }
        let (rho, g) = self.rho_and_gradient(p)?;
        Ok([-g[0] / rho, -g[1] / rho])
    }

    /// `[rho_xx, rho_yy]`.
    pub fn second_derivatives(&self, p: Point<T>) -> Result<[T; 2]> {
        let d = match (self.gradient, &self.kind) {
            (GradientMode::Analytic, kind) if !matches!(kind, MonitorKind::User(_)) => self.analytic_second(p),
            (GradientMode::CentralDifference { h }, _) => self.central_second(p, h),
            _ => self.central_second(p, T::lit(DEFAULT_FD_STEP)),
        };
        if !d[0].is_finite() || !d[1].is_finite() {
            return Err(eval_error(p));
        }
        Ok(d)
    }

    fn central_gradient(&self, p: Point<T>, h: T) -> [T; 2] {
        let two_h = h + h;
        let gx = (self.raw_rho(Point::new(p.x + h, p.y)) - self.raw_rho(Point::new(p.x - h, p.y))) / two_h;
        let gy = (self.raw_rho(Point::new(p.x, p.y + h)) - self.raw_rho(Point::new(p.x, p.y - h))) / two_h;
        [gx, gy]
    }

    fn central_second(&self, p: Point<T>, h: T) -> [T; 2] {
        // Second differences lose precision as h^-2; use a wider step than for the gradient.
        let h = h.max(T::lit(1e-4));
        let c = self.raw_rho(p);
        let two = T::lit(2.0);
        let xx = (self.raw_rho(Point::new(p.x + h, p.y)) - two * c + self.raw_rho(Point::new(p.x - h, p.y))) / (h * h);
        let yy = (self.raw_rho(Point::new(p.x, p.y + h)) - two * c + self.raw_rho(Point::new(p.x, p.y - h))) / (h * h);
        [xx, yy]
    }

    /// `(rho, rho_x, rho_y)` in closed form.
    fn analytic(&self, p: Point<T>) -> (T, T, T) {
        let (x, y) = (p.x, p.y);
        let one = T::one();
        let two = T::lit(2.0);
        match &self.kind {
            MonitorKind::Constant => (one, T::zero(), T::zero()),
            MonitorKind::RunningExample { r } => {
                let dx = x - T::lit(0.75);
                let dy = y - T::lit(0.5);
                let e = *r * (T::lit(-50.0) * (dx * dx + dy * dy) - T::lit(0.5)).exp();
                (one + e, T::lit(-100.0) * dx * e, T::lit(-100.0) * dy * e)
            }
            MonitorKind::HuangSloan { alpha, r } => {
                let hs = HuangSloanTerms::new(*r, x, y);
                let rho = (one + *alpha * hs.s).sqrt();
                (rho, *alpha * hs.sx / (two * rho), *alpha * hs.sy / (two * rho))
            }
            MonitorKind::Mackenzie { alpha, r } => {
                let mk = MackenzieTerms::new(*alpha, *r, x, y);
                let d2 = mk.d * mk.d;
                (one / mk.d, -mk.gx / d2, -mk.gy / d2)
            }
            MonitorKind::FiveRing { alpha, r } => {
                let u = RingTerms::new(*r, x, y);
                let rho = (one + *alpha * (u.ux * u.ux + u.uy * u.uy)).sqrt();
                let rx = *alpha * (u.ux * u.uxx + u.uy * u.uxy) / rho;
                let ry = *alpha * (u.ux * u.uxy + u.uy * u.uyy) / rho;
                (rho, rx, ry)
            }
            MonitorKind::User(_) => unreachable!("user monitors have no closed form"),
        }
    }

    /// `[rho_xx, rho_yy]` in closed form.
    fn analytic_second(&self, p: Point<T>) -> [T; 2] {
        let (x, y) = (p.x, p.y);
        let two = T::lit(2.0);
        match &self.kind {
            MonitorKind::Constant => [T::zero(), T::zero()],
            MonitorKind::RunningExample { r } => {
                let dx = x - T::lit(0.75);
                let dy = y - T::lit(0.5);
                let e = *r * (T::lit(-50.0) * (dx * dx + dy * dy) - T::lit(0.5)).exp();
                let c = T::lit(1e4);
                [e * (c * dx * dx - T::lit(100.0)), e * (c * dy * dy - T::lit(100.0))]
            }
            MonitorKind::HuangSloan { alpha, r } => {
                let hs = HuangSloanTerms::new(*r, x, y);
                let rho = (T::one() + *alpha * hs.s).sqrt();
                let rx = *alpha * hs.sx / (two * rho);
                let ry = *alpha * hs.sy / (two * rho);
                [*alpha * hs.sxx / (two * rho) - rx * rx / rho, *alpha * hs.syy / (two * rho) - ry * ry / rho]
            }
            MonitorKind::Mackenzie { alpha, r } => {
                let mk = MackenzieTerms::new(*alpha, *r, x, y);
                let d2 = mk.d * mk.d;
                let d3 = d2 * mk.d;
                [-mk.gxx / d2 + two * mk.gx * mk.gx / d3, -mk.gyy / d2 + two * mk.gy * mk.gy / d3]
            }
            MonitorKind::FiveRing { alpha, r } => {
                let u = RingTerms::new(*r, x, y);
                let rho = (T::one() + *alpha * (u.ux * u.ux + u.uy * u.uy)).sqrt();
                let rx = *alpha * (u.ux * u.uxx + u.uy * u.uxy) / rho;
                let ry = *alpha * (u.ux * u.uxy + u.uy * u.uyy) / rho;
                let rxx = *alpha * (u.uxx * u.uxx + u.ux * u.uxxx + u.uxy * u.uxy + u.uy * u.uxxy) / rho - rx * rx / rho;
                let ryy = *alpha * (u.uxy * u.uxy + u.ux * u.uxyy + u.uyy * u.uyy + u.uy * u.uyyy) / rho - ry * ry / rho;
                [rxx, ryy]
            }
            MonitorKind::User(_) => unreachable!("user monitors have no closed form"),
        }
    }

    /// Checks `rho > 0` and finite on an `n x n` lattice over the natural domain.
    pub fn probe_positive(&self, n: usize) -> Result<()> {
        let d = self.domain;
        let n = n.max(2);
        for j in 0..n {
            for i in 0..n {
                let fx = T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
                let fy = T::from_usize_lossy(j) / T::from_usize_lossy(n - 1);
                let p = Point::new(d.xmin() + fx * d.width(), d.ymin() + fy * d.height());
                self.rho(p)?;
            }
        }
        Ok(())
    }
}

fn check_param<T: Real>(name: &str, v: T, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && if allow_zero { v >= T::zero() } else { v > T::zero() };
    if ok {
        Ok(())
    } else {
        Err(Error::MonitorParameter { name: name.to_string(), value: v.to_f64_lossy() })
    }
}

fn eval_error<T: Real>(p: Point<T>) -> Error {
    Error::MonitorEvaluation { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() }
}

fn checked<T: Real>(p: Point<T>, rho: T) -> Result<T> {
    if rho.is_finite() && rho > T::zero() {
        Ok(rho)
    } else {
        Err(eval_error(p))
    }
}

/// `S = R^2 E^2 sin^2(pi y) + pi^2 (1 - E)^2 cos^2(pi y)` and its derivatives.
struct HuangSloanTerms<T> {
    s: T,
    sx: T,
    sy: T,
    sxx: T,
    syy: T,
}

impl<T: Real> HuangSloanTerms<T> {
    fn new(r: T, x: T, y: T) -> Self {
        let one = T::one();
        let two = T::lit(2.0);
        let pi = T::PI();
        let e = (r * (x - one)).exp();
        let (sn, cs) = (pi * y).sin_cos();
        let (sn2, cs2) = (sn * sn, cs * cs);
        let sin2 = (two * pi * y).sin();
        let cos2 = (two * pi * y).cos();
        let r2 = r * r;
        let pi2 = pi * pi;
        let a = r2 * e * e;
        let b = pi2 * (one - e) * (one - e);
        Self {
            s: a * sn2 + b * cs2,
            sx: two * r * a * sn2 - two * r * pi2 * cs2 * (one - e) * e,
            sy: pi * sin2 * (a - b),
            sxx: T::lit(4.0) * r2 * a * sn2 - two * r2 * pi2 * cs2 * e * (one - two * e),
            syy: two * pi2 * cos2 * (a - b),
        }
    }
}

/// `g = alpha exp(-R q^2)`, `q = y - 1/2 - sin(2 pi x) / 4`, `d = 1 + g`.
struct MackenzieTerms<T> {
    d: T,
    gx: T,
    gy: T,
    gxx: T,
    gyy: T,
}

impl<T: Real> MackenzieTerms<T> {
    fn new(alpha: T, r: T, x: T, y: T) -> Self {
        let two = T::lit(2.0);
        let pi = T::PI();
        let (s2, c2) = (two * pi * x).sin_cos();
        let q = y - T::lit(0.5) - T::lit(0.25) * s2;
        let qx = -(pi / two) * c2;
        let qxx = pi * pi * s2;
        let g = alpha * (-r * q * q).exp();
        let kx = two * r * q * qx;
        let ky = two * r * q;
        Self {
            d: T::one() + g,
            gx: -kx * g,
            gy: -ky * g,
            gxx: g * (kx * kx - two * r * (qx * qx + q * qxx)),
            gyy: g * (ky * ky - two * r),
        }
    }
}

/// Derivatives of `u = sum_k tanh(R (|p - c_k|^2 - 1/8))` up to third order.
struct RingTerms<T> {
    ux: T,
    uy: T,
    uxx: T,
    uxy: T,
    uyy: T,
    uxxx: T,
    uxxy: T,
    uxyy: T,
    uyyy: T,
}

impl<T: Real> RingTerms<T> {
    fn new(r: T, x: T, y: T) -> Self {
        let z = T::zero();
        let mut acc = Self { ux: z, uy: z, uxx: z, uxy: z, uyy: z, uxxx: z, uxxy: z, uxyy: z, uyyy: z };
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        let sixteen = T::lit(16.0);
        let eighth = T::lit(0.125);
        let r2 = r * r;
        let r3 = r2 * r;
        for (cx, cy) in RING_CENTERS {
            let d = x - T::lit(cx);
            let e = y - T::lit(cy);
            let t = (r * (d * d + e * e - eighth)).tanh();
            let s = T::one() - t * t;
            let bx = two * r - eight * r2 * d * d * t;
            let by = two * r - eight * r2 * e * e * t;
            acc.ux += two * r * d * s;
            acc.uy += two * r * e * s;
            acc.uxx += s * bx;
            acc.uyy += s * by;
            acc.uxy += -eight * r2 * t * s * d * e;
            acc.uxxx += -four * r * d * s * t * bx - s * (sixteen * r2 * d * t + sixteen * r3 * d * d * d * s);
            acc.uxxy += -four * r * e * s * t * bx - sixteen * r3 * d * d * e * s * s;
            acc.uyyy += -four * r * e * s * t * by - s * (sixteen * r2 * e * t + sixteen * r3 * e * e * e * s);
            acc.uxyy += -four * r * d * s * t * by - sixteen * r3 * e * e * d * s * s;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn builtins() -> Vec<MonitorFunction<f64>> {
        vec![
            MonitorFunction::constant(),
            MonitorFunction::running_example(),
            MonitorFunction::huang_sloan(),
            MonitorFunction::mackenzie(),
            MonitorFunction::five_ring(),
        ]
    }

    #[test]
    fn running_example_peak_value() {
        let m = MonitorFunction::<f64>::running_example();
        let expected = 1.0 + 15.0 * (-0.5f64).exp();
        assert_relative_eq!(m.rho(Point::new(0.75, 0.5)).unwrap(), expected, max_relative = 1e-15);
        assert!((expected - 10.098).abs() < 1e-3);
    }

    #[test]
    fn running_example_with_zero_amplitude_is_flat() {
        let m = MonitorFunction::<f64>::running_example_with(0.0).unwrap();
        assert_eq!(m.rho(Point::new(0.3, 0.9)).unwrap(), 1.0);
        assert_eq!(m.drift(Point::new(0.3, 0.9)).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn five_ring_symmetry_point() {
        let m = MonitorFunction::<f64>::five_ring();
        assert_relative_eq!(m.rho(Point::new(0.0, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_and_critical_point_drift_vanish() {
        let c = MonitorFunction::<f64>::constant();
        assert_eq!(c.drift(Point::new(0.2, 0.4)).unwrap(), [0.0, 0.0]);
        let m = MonitorFunction::<f64>::running_example();
        let d = m.drift(Point::new(0.75, 0.5)).unwrap();
        assert_eq!(d, [0.0, 0.0]);
    }

    #[test]
    fn running_example_drift_points_away_from_peak() {
        let m = MonitorFunction::<f64>::running_example();
        let p = Point::new(0.85, 0.5);
        // Independent evaluation: rho_x = -100 (x - 3/4) (rho - 1), drift = -rho_x / rho.
        let rho = 1.0 + 15.0 * (-1.0f64).exp();
        let rho_x = -100.0 * 0.1 * (rho - 1.0);
        let expected = -rho_x / rho;
        let d = m.drift(p).unwrap();
        assert_relative_eq!(d[0], expected, max_relative = 1e-12);
        assert!(d[0] > 0.0, "drift heads to larger w, away from the density peak");
        let fd = m.clone().with_gradient_mode(GradientMode::CentralDifference { h: 1e-6 });
        assert_relative_eq!(fd.drift(p).unwrap()[0], expected, max_relative = 1e-6);
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in builtins() {
            let fd = m.clone().with_gradient_mode(GradientMode::CentralDifference { h: 1e-6 });
            let d = *m.domain();
            for _ in 0..1000 {
                let p = Point::new(
                    d.xmin() + rng.random::<f64>() * d.width(),
                    d.ymin() + rng.random::<f64>() * d.height(),
                );
                let a = m.gradient(p).unwrap();
                let n = fd.gradient(p).unwrap();
                let scale = a[0].abs().max(a[1].abs()).max(1.0);
                for k in 0..2 {
                    assert!(
                        (a[k] - n[k]).abs() <= 1e-6 * scale,
                        "{} at {:?}: analytic {:?} vs fd {:?}",
                        m.name(),
                        p,
                        a,
                        n
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_second_derivatives_match_differenced_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for m in builtins() {
            let d = *m.domain();
            for _ in 0..300 {
                let p = Point::new(
                    d.xmin() + rng.random::<f64>() * d.width(),
                    d.ymin() + rng.random::<f64>() * d.height(),
                );
                let s = m.second_derivatives(p).unwrap();
                let gxp = m.gradient(Point::new(p.x + h, p.y)).unwrap()[0];
                let gxm = m.gradient(Point::new(p.x - h, p.y)).unwrap()[0];
                let gyp = m.gradient(Point::new(p.x, p.y + h)).unwrap()[1];
                let gym = m.gradient(Point::new(p.x, p.y - h)).unwrap()[1];
                let nxx = (gxp - gxm) / (2.0 * h);
                let nyy = (gyp - gym) / (2.0 * h);
                let scale = s[0].abs().max(s[1].abs()).max(1.0);
                assert!((s[0] - nxx).abs() <= 1e-5 * scale, "{} xx at {:?}: {} vs {}", m.name(), p, s[0], nxx);
                assert!((s[1] - nyy).abs() <= 1e-5 * scale, "{} yy at {:?}: {} vs {}", m.name(), p, s[1], nyy);
            }
        }
    }

    #[test]
    fn drift_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in builtins() {
            let d = *m.domain();
            for _ in 0..200 {
                let p = Point::new(
                    d.xmin() + rng.random::<f64>() * d.width(),
                    d.ymin() + rng.random::<f64>() * d.height(),
                );
                let rho = m.rho(p).unwrap();
                let g = m.gradient(p).unwrap();
                let dr = m.drift(p).unwrap();
                assert!((dr[0] + g[0] / rho).abs() <= 1e-12 * (1.0 + dr[0].abs()));
                assert!((dr[1] + g[1] / rho).abs() <= 1e-12 * (1.0 + dr[1].abs()));
            }
        }
    }

    #[test]
    fn builtins_positive_on_probe() {
        for m in builtins() {
            m.probe_positive(101).unwrap();
        }
    }

    #[test]
    fn mackenzie_density_dips_inside_layer() {
        let m = MonitorFunction::<f64>::mackenzie();
        let inside = m.rho(Point::new(0.0, 0.5)).unwrap();
        assert_relative_eq!(inside, 1.0 / 11.0, max_relative = 1e-14);
    }

    #[test]
    fn user_monitor_uses_finite_differences() {
        let m = MonitorFunction::user("ramp", RectDomain::unit(), 1e-6, |p: Point<f64>| 1.0 + p.x * p.x).unwrap();
        let g = m.gradient(Point::new(0.5, 0.5)).unwrap();
        assert_relative_eq!(g[0], 1.0, max_relative = 1e-8);
        assert!(g[1].abs() < 1e-9);
        let s = m.second_derivatives(Point::new(0.5, 0.5)).unwrap();
        assert_relative_eq!(s[0], 2.0, max_relative = 1e-5);
    }

    #[test]
    fn user_monitor_must_be_positive() {
        let r = MonitorFunction::user("bad", RectDomain::unit(), 1e-6, |p: Point<f64>| p.x - 0.5);
        assert!(matches!(r, Err(Error::MonitorEvaluation { .. })));
        let nan = MonitorFunction::user("nan", RectDomain::unit(), 1e-6, |_p: Point<f64>| f64::NAN);
        assert!(nan.is_err());
    }

    #[test]
    fn builtin_by_name_with_overrides() {
        let m = MonitorFunction::<f64>::builtin("running", &[("R".into(), 0.0)]).unwrap();
        assert_eq!(m.rho(Point::new(0.75, 0.5)).unwrap(), 1.0);
        assert!(MonitorFunction::<f64>::builtin("nope", &[]).is_err());
        assert!(MonitorFunction::<f64>::builtin("constant", &[("R".into(), 1.0)]).is_err());
        let f = MonitorFunction::<f64>::builtin("five-ring", &[]).unwrap();
        assert_eq!(f.domain().xmin(), -1.0);
    }

    #[test]
    fn f32_monitor_evaluates() {
        let m = MonitorFunction::<f32>::running_example();
        let v = m.rho(Point::new(0.75, 0.5)).unwrap();
        assert!((v - 10.098_0).abs() < 1e-3);
    }
}
