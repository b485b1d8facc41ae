//! Geometric cell quality `Q = tr(J^T J) / (2 sqrt(det(J^T J)))`, aggregate statistics,
//! ratios against a reference mesh and the l-infinity monitor-resolution error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::PhysicalMesh;
use crate::monitor::MonitorFunction;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport<T> {
    pub q_max: T,
    pub q_mean: T,
    /// `reference.q_max / mesh.q_max`.
    pub r_max: Option<T>,
    pub r_mean: Option<T>,
    pub l_inf: Option<T>,
}

/// Cell-centre Jacobian `[[x_xi, x_eta], [y_xi, y_eta]]` of the bilinear map of cell `(a, b)`,
/// differences taken per unit of the uniform computational spacing.
pub fn cell_jacobian<T: Real>(mesh: &PhysicalMesh<T>, a: usize, b: usize) -> [[T; 2]; 2] {
    let dxi = T::one() / T::from_usize_lossy(mesh.m_xi() - 1);
    let deta = T::one() / T::from_usize_lossy(mesh.m_eta() - 1);
    let half = T::lit(0.5);
    let p00 = mesh.node(a, b);
    let p10 = mesh.node(a + 1, b);
    let p01 = mesh.node(a, b + 1);
    let p11 = mesh.node(a + 1, b + 1);
    let x_xi = half * ((p10.x - p00.x) + (p11.x - p01.x)) / dxi;
    let y_xi = half * ((p10.y - p00.y) + (p11.y - p01.y)) / dxi;
    let x_eta = half * ((p01.x - p00.x) + (p11.x - p10.x)) / deta;
    let y_eta = half * ((p01.y - p00.y) + (p11.y - p10.y)) / deta;
    [[x_xi, x_eta], [y_xi, y_eta]]
}

/// `Q` of a 2x2 Jacobian, or `None` when it is folded or degenerate (`det J <= 0`).
pub fn jacobian_quality<T: Real>(j: [[T; 2]; 2]) -> Option<T> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det > T::zero()) {
        return None;
    }
    let tr = (j[0][0] * j[0][0] + j[1][0] * j[1][0]) + (j[0][1] * j[0][1] + j[1][1] * j[1][1]);
    // sqrt(det(J^T J)) = |det J|.
    Some(tr / (T::lit(2.0) * det))
}

pub fn cell_quality<T: Real>(mesh: &PhysicalMesh<T>, a: usize, b: usize) -> Result<T> {
    if a + 1 >= mesh.m_xi() || b + 1 >= mesh.m_eta() {
        return Err(Error::Tangled { a, b });
    }
    jacobian_quality(cell_jacobian(mesh, a, b)).ok_or(Error::Tangled { a, b })
}

/// Quality of every cell, `b`-major (row of cells `b`, then `a`).
pub fn cell_qualities<T: Real>(mesh: &PhysicalMesh<T>) -> Result<Vec<T>> {
    let ca = mesh.m_xi() - 1;
    let rows: Vec<Result<Vec<T>>> = (0..mesh.m_eta() - 1)
        .into_par_iter()
        .map(|b| (0..ca).map(|a| cell_quality(mesh, a, b)).collect())
        .collect();
    let mut out = Vec::with_capacity(ca * (mesh.m_eta() - 1));
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// `(q_max, q_mean)` over all cells.
pub fn quality_stats<T: Real>(mesh: &PhysicalMesh<T>) -> Result<(T, T)> {
    let q = cell_qualities(mesh)?;
    let max = q.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let mean = q.iter().copied().sum::<T>() / T::from_usize_lossy(q.len());
    Ok((max, mean))
}

/// Max over node indices of `|rho(reference node) - rho(mesh node)|`.
pub fn l_inf_error<T: Real>(mesh: &PhysicalMesh<T>, reference: &PhysicalMesh<T>, m: &MonitorFunction<T>) -> Result<T> {
    check_shape(mesh, reference)?;
    let mut worst = T::zero();
    for k in 0..mesh.xs().len() {
        let a = m.rho(crate::grid::Point::new(reference.xs()[k], reference.ys()[k]))?;
        let b = m.rho(crate::grid::Point::new(mesh.xs()[k], mesh.ys()[k]))?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

fn check_shape<T: Real>(mesh: &PhysicalMesh<T>, reference: &PhysicalMesh<T>) -> Result<()> {
    if mesh.m_xi() != reference.m_xi() || mesh.m_eta() != reference.m_eta() {
        return Err(Error::ShapeMismatch(mesh.m_xi(), mesh.m_eta(), reference.m_xi(), reference.m_eta()));
    }
    Ok(())
}

/// Quality of `mesh`, with ratios against `reference` and, when `m` is also given, the
/// l-infinity error.
pub fn quality_report<T: Real>(
    mesh: &PhysicalMesh<T>,
    reference: Option<&PhysicalMesh<T>>,
    m: Option<&MonitorFunction<T>>,
) -> Result<QualityReport<T>> {
    let (q_max, q_mean) = quality_stats(mesh)?;
    let mut report = QualityReport { q_max, q_mean, r_max: None, r_mean: None, l_inf: None };
    if let Some(r) = reference {
        check_shape(mesh, r)?;
        let (rq_max, rq_mean) = quality_stats(r)?;
        report.r_max = Some(rq_max / q_max);
        report.r_mean = Some(rq_mean / q_mean);
        if let Some(m) = m {
            report.l_inf = Some(l_inf_error(mesh, r, m)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Point, RectDomain};
    use approx::assert_abs_diff_eq;

    fn unit_mesh(n: usize) -> PhysicalMesh<f64> {
        PhysicalMesh::uniform(&RectDomain::unit(), n, n).unwrap()
    }

    #[test]
    fn uniform_cells_have_unit_quality() {
        let r = quality_report(&unit_mesh(9), None, None).unwrap();
        assert_eq!(r.q_max, 1.0);
        assert_eq!(r.q_mean, 1.0);
        assert!(r.r_max.is_none() && r.l_inf.is_none());
    }

    #[test]
    fn stretched_cell_quality() {
        let m = unit_mesh(5).map_nodes(|p| Point::new(2.0 * p.x, p.y));
        assert_abs_diff_eq!(cell_quality(&m, 1, 2).unwrap(), 1.25, epsilon = 1e-14);
    }

    #[test]
    fn rotation_and_scale_invariance() {
        let base = unit_mesh(6).map_nodes(|p| Point::new(p.x + 0.3 * p.x * p.y, p.y + 0.1 * p.x * p.x));
        let (s, c) = 0.7f64.sin_cos();
        let rot = base.map_nodes(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y));
        let scaled = base.map_nodes(|p| Point::new(3.5 * p.x, 3.5 * p.y));
        let q0 = cell_qualities(&base).unwrap();
        for other in [rot, scaled] {
            for (a, b) in q0.iter().zip(cell_qualities(&other).unwrap()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn folded_cell_is_reported() {
        let mut x = unit_mesh(4).xs().to_vec();
        let y = unit_mesh(4).ys().to_vec();
        // Column a = 1 moves past column a = 2, folding the cells between them.
        for b in 0..4 {
            x[4 * b + 1] = 0.9;
        }
        let m = PhysicalMesh::new(4, 4, x, y).unwrap();
        assert!(matches!(quality_stats(&m), Err(Error::Tangled { .. })));
    }

    #[test]
    fn self_comparison() {
        let m = unit_mesh(7).map_nodes(|p| Point::new(p.x * p.x, p.y));
        let mon = MonitorFunction::running_example();
        let r = quality_report(&m, Some(&m), Some(&mon)).unwrap();
        assert_eq!(r.r_max, Some(1.0));
        assert_eq!(r.r_mean, Some(1.0));
        assert_eq!(r.l_inf, Some(0.0));
        assert!(r.q_max >= r.q_mean && r.q_mean >= 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let r = quality_report(&unit_mesh(5), Some(&unit_mesh(6)), None);
        assert_eq!(r, Err(Error::ShapeMismatch(5, 5, 6, 6)));
    }
}
