//! Mesh files, CSV reports and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sddmesh_core::{PhysicalMesh, QualityReport, Scheme};

use crate::run::TimingReport;
use crate::CliError;

pub const MESH_MAGIC: &str = "sddmesh v1";
pub const QUALITY_HEADER: &str = "n,lambda,dt,l_inf,q_max,q_mean,r_max,r_mean";
pub const BENCH_HEADER: &str =
    "grid,subdomains,walks,lambda,dt,mc_points,t_stoc,t_sub,t_smooth,t_total,t_1,speedup_model,l_inf,q_max,q_mean,r_max,r_mean";

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("cli: cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("cli: cannot read {}: {e}", path.display())))
}

/// Header `sddmesh v1 <m_xi> <m_eta>`, then one line `a b x y xi eta` per node, `a`-major,
/// with 17 significant digits.
pub fn format_mesh(mesh: &PhysicalMesh<f64>) -> String {
    let (mx, my) = (mesh.m_xi(), mesh.m_eta());
    let mut s = String::with_capacity(mx * my * 100);
    let _ = writeln!(s, "{MESH_MAGIC} {mx} {my}");
    for a in 0..mx {
        let xi = a as f64 / (mx - 1) as f64;
        for b in 0..my {
            let eta = b as f64 / (my - 1) as f64;
            let p = mesh.node(a, b);
            let _ = writeln!(s, "{a} {b} {:.16e} {:.16e} {:.16e} {:.16e}", p.x, p.y, xi, eta);
        }
    }
    s
}

pub fn parse_mesh(text: &str) -> Result<PhysicalMesh<f64>, CliError> {
    let bad = |line: usize, why: &str| CliError::Runtime(format!("cli: mesh file line {line}: {why}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let rest = header.strip_prefix(MESH_MAGIC).ok_or_else(|| bad(1, "missing sddmesh v1 header"))?;
    let dims: Vec<usize> = rest.split_whitespace().map(|v| v.parse().map_err(|_| bad(1, "bad size"))).collect::<Result<_, _>>()?;
    let [mx, my] = dims[..] else { return Err(bad(1, "expected two sizes")) };
    if mx < 2 || my < 2 {
        return Err(bad(1, "mesh needs at least 2x2 nodes"));
    }
    let mut x = vec![0.0; mx * my];
    let mut y = vec![0.0; mx * my];
    let mut count = 0;
    for (n, line) in lines.enumerate() {
        let ln = n + 2;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(bad(ln, "expected 6 fields"));
        }
        let a: usize = f[0].parse().map_err(|_| bad(ln, "bad index"))?;
        let b: usize = f[1].parse().map_err(|_| bad(ln, "bad index"))?;
        if a != count / my || b != count % my {
            return Err(bad(ln, "nodes out of order"));
        }
        x[b * mx + a] = f[2].parse().map_err(|_| bad(ln, "bad x"))?;
        y[b * mx + a] = f[3].parse().map_err(|_| bad(ln, "bad y"))?;
        count += 1;
    }
    if count != mx * my {
        return Err(bad(count + 1, "truncated mesh"));
    }
    PhysicalMesh::new(mx, my, x, y).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn write_mesh(mesh: &PhysicalMesh<f64>, path: &Path) -> Result<(), CliError> {
    write_file(path, &format_mesh(mesh))
}

pub fn read_mesh(path: &Path) -> Result<PhysicalMesh<f64>, CliError> {
    parse_mesh(&read_file(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn scheme_columns(scheme: Option<Scheme<f64>>) -> (String, String) {
    match scheme {
        Some(Scheme::Exponential { lambda }) => (lambda.to_string(), String::new()),
        Some(Scheme::Linear { dt, .. }) => (String::new(), dt.to_string()),
        None => (String::new(), String::new()),
    }
}

/// Quality CSV: header plus one row; empty cells where a value does not apply.
pub fn quality_csv(walks: Option<usize>, scheme: Option<Scheme<f64>>, q: &QualityReport<f64>) -> String {
    let (lambda, dt) = scheme_columns(scheme);
    format!(
        "{QUALITY_HEADER}\n{},{lambda},{dt},{},{},{},{},{}\n",
        walks.map(|n| n.to_string()).unwrap_or_default(),
        opt(q.l_inf),
        q.q_max,
        q.q_mean,
        opt(q.r_max),
        opt(q.r_mean)
    )
}

#[allow(clippy::too_many_arguments)]
pub fn bench_csv(
    grid: (usize, usize),
    subdomains: (usize, usize),
    walks: usize,
    scheme: Scheme<f64>,
    mc_points: usize,
    t: &TimingReport,
    q: &QualityReport<f64>,
) -> String {
    let (lambda, dt) = scheme_columns(Some(scheme));
    format!(
        "{BENCH_HEADER}\n{}x{},{}x{},{walks},{lambda},{dt},{mc_points},{},{},{},{},{},{},{},{},{},{},{}\n",
        grid.0,
        grid.1,
        subdomains.0,
        subdomains.1,
        t.t_stoc,
        t.t_sub,
        t.t_smooth,
        t.t_total,
        opt(t.t_1),
        opt(t.speedup),
        opt(q.l_inf),
        q.q_max,
        q.q_mean,
        opt(q.r_max),
        opt(q.r_mean)
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_file(path, text)
}

/// SVG with one polyline per mesh row and per mesh column; the view box is the mesh's
/// bounding box with `y` pointing up.
pub fn svg_string(mesh: &PhysicalMesh<f64>) -> String {
    let (mx, my) = (mesh.m_xi(), mesh.m_eta());
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (x0, x1) = fold(mesh.xs());
    let (y0, y1) = fold(mesh.ys());
    let (w, h) = ((x1 - x0).max(f64::MIN_POSITIVE), (y1 - y0).max(f64::MIN_POSITIVE));
    let stroke = 0.002 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}" width="600" height="{}">"#,
        (600.0 * h / w).round()
    );
    let _ = writeln!(s, r#"<g fill="none" stroke="black" stroke-width="{stroke}">"#);
    let pt = |a: usize, b: usize| {
        let p = mesh.node(a, b);
        format!("{},{}", p.x, y0 + y1 - p.y)
    };
    for b in 0..my {
        let pts: Vec<String> = (0..mx).map(|a| pt(a, b)).collect();
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
    }
    for a in 0..mx {
        let pts: Vec<String> = (0..my).map(|b| pt(a, b)).collect();
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn render_svg(mesh: &PhysicalMesh<f64>, path: &Path) -> Result<(), CliError> {
    write_file(path, &svg_string(mesh))
}
