//! The four verbs. Each renders its whole output into a string; nothing here touches the filesystem.

use std::fmt::Write as _;

use e4surf_core::classification::{self, VerificationReport};
use e4surf_core::position::{self, ClassName, ClassVerdict, Grid};
use e4surf_core::surface::{self, FramePolicy};
use e4surf_core::{DiffScheme, GeomError, ImmersionPatch, Numerics, Stencil, Vec4};

use crate::config::{Projection, RunConfig};
use crate::surfaces::Setup;

/// Rendered output plus the number of requested operations that errored.
pub struct Output {
    pub text: String,
    pub errors: usize,
    /// One-line human summary.
    pub summary: String,
}

fn e(v: f64) -> String {
    format!("{v:.17e}")
}

fn scheme_name(j: DiffScheme) -> String {
    match j {
        DiffScheme::Analytic => "analytic".into(),
        DiffScheme::Central(h) => format!("central({h:?})"),
        DiffScheme::Richardson(h) => format!("richardson({h:?})"),
    }
}

fn stencil_name(s: Stencil) -> String {
    match s {
        Stencil::Central(h) => format!("central({h:?})"),
        Stencil::Richardson(h) => format!("richardson({h:?})"),
    }
}

fn grid_text(g: &Grid) -> String {
    let d = g.domain;
    format!("s=[{:?}, {:?}] n_s={} t=[{:?}, {:?}] n_t={} (cell-centered)", d.s0, d.s1, g.n_s, d.t0, d.t1, g.n_t)
}

fn environment(out: &mut String, cfg: &RunConfig, setup: &Setup, class_tol: f64) {
    let n = &setup.numerics;
    let _ = writeln!(out, "[environment]");
    let _ = writeln!(out, "tool = e4surf {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "surface = {}", setup.patch.label);
    let _ = writeln!(out, "grid = {}", grid_text(&setup.grid));
    let _ = writeln!(out, "jets = {}", scheme_name(n.jets));
    let _ = writeln!(out, "fields = {}", stencil_name(n.fields));
    let _ = writeln!(out, "tol.class = {class_tol:?}");
    let _ = writeln!(out, "tol.numeric = {:?}", n.tol);
    out.push('\n');
    let _ = writeln!(out, "[config]");
    out.push_str(&cfg.serialize());
    out.push('\n');
}

pub fn class_tol(cfg: &RunConfig, numerics: &Numerics) -> f64 {
    cfg.class_tol.unwrap_or_else(|| position::default_class_tol(numerics))
}

/// Grid table with columns `s,t,x1..x4`, `t` in the outer loop.
pub fn generate(setup: &Setup) -> Output {
    let mut text = String::from("s,t,x1,x2,x3,x4\n");
    for (_, _, s, t) in setup.grid.nodes() {
        let x = setup.patch.position(s, t);
        let _ = writeln!(text, "{},{},{},{},{},{}", e(s), e(t), e(x[0]), e(x[1]), e(x[2]), e(x[3]));
    }
    Output { text, errors: 0, summary: format!("{} grid points", setup.grid.len()) }
}

const POINT_COLUMNS: &str = "s,t,x1,x2,x3,x4,E,F,G,h3_11,h3_12,h3_22,h4_11,h4_12,h4_22,H1,H2,H3,H4,K,mu,theta,frame,gauss_residual,codazzi_residual,ricci_residual";

fn point_row(patch: &ImmersionPatch, s: f64, t: f64, n: &Numerics) -> String {
    let x = patch.position(s, t);
    let mut cells: Vec<String> = vec![e(s), e(t), e(x[0]), e(x[1]), e(x[2]), e(x[3])];
    let mut policy = FramePolicy::PositionAdapted;
    let mut data = surface::fundamental_at(patch, s, t, policy, n);
    if data.is_err() {
        policy = FramePolicy::CoordinateAdapted;
        data = surface::fundamental_at(patch, s, t, policy, n);
    }
    match data {
        Ok((_, _, d)) => {
            for v in [d.E, d.F, d.G, d.h3_11, d.h3_12, d.h3_22, d.h4_11, d.h4_12, d.h4_22, d.H[0], d.H[1], d.H[2], d.H[3], d.K] {
                cells.push(e(v));
            }
        }
        Err(_) => cells.extend(std::iter::repeat_n("nan".to_string(), 14)),
    }
    match position::decompose_at(patch, s, t, n) {
        Ok(p) => cells.extend([e(p.mu), e(p.theta)]),
        Err(_) => cells.extend(["nan".to_string(), "nan".to_string()]),
    }
    cells.push(match (&data, policy) {
        (Err(_), _) => "none".into(),
        (Ok(_), FramePolicy::PositionAdapted) => "position".into(),
        (Ok(_), _) => "coordinate".into(),
    });
    let opt = |r: Result<f64, GeomError>| r.map_or_else(|_| "nan".to_string(), e);
    cells.push(opt(surface::gauss_curvatures(patch, s, t, policy, n).map(|(a, b)| (a - b).abs())));
    cells.push(opt(surface::codazzi_residual(patch, s, t, policy, n)));
    cells.push(opt(surface::normal_connection(patch, s, t, policy, n).map(|c| (c.rd - c.rd_exterior).abs())));
    cells.join(",")
}

fn status(v: &ClassVerdict) -> &'static str {
    if v.is_inconclusive() {
        "inconclusive"
    } else if v.holds {
        "holds"
    } else {
        "fails"
    }
}

fn verdict_section(out: &mut String, class: ClassName, verdict: &Result<ClassVerdict, GeomError>, grid: &Grid) {
    let _ = writeln!(out, "[verdict.{}]", class.as_str());
    match verdict {
        Ok(v) => {
            let _ = writeln!(out, "status = {}", status(v));
            let _ = writeln!(out, "holds = {}", v.holds);
            let _ = writeln!(out, "max_deviation = {}", e(v.max_deviation));
            let _ = writeln!(out, "max_abs = {}", e(v.max_abs));
            let _ = writeln!(out, "tolerance = {}", e(v.tolerance));
            let _ = writeln!(out, "grid = {}", grid_text(grid));
            let _ = writeln!(out, "evaluated = {}", v.evaluated);
            let _ = writeln!(out, "excluded = {}", v.excluded);
            if let Some(w) = v.witness {
                let _ = writeln!(out, "witness.phi = {}", e(w.phi));
                let _ = writeln!(out, "witness.angle = {}", e(w.angle));
                let _ = writeln!(out, "witness.frame = {:?}", w.policy);
            }
            for f in &v.flags {
                let _ = writeln!(out, "flag = {f:?}");
            }
        }
        Err(err) => {
            let _ = writeln!(out, "status = error");
            let _ = writeln!(out, "grid = {}", grid_text(grid));
            let _ = writeln!(out, "error = {err}");
        }
    }
    out.push('\n');
}

/// Verdicts for the requested classes followed by the per-point table.
pub fn analyze(cfg: &RunConfig, setup: &Setup) -> Output {
    let Setup { patch, grid, numerics } = setup;
    let tol = class_tol(cfg, numerics);
    let mut text = String::from("# e4surf analysis report\n\n");
    environment(&mut text, cfg, setup, tol);
    let mut errors = 0;
    let mut summary = Vec::new();
    for &class in &cfg.checks {
        let verdict = position::run_detector(class, patch, grid, tol, numerics);
        summary.push(format!("{}: {}", class.as_str(), verdict.as_ref().map_or("error", status)));
        errors += usize::from(verdict.is_err());
        verdict_section(&mut text, class, &verdict, grid);
    }
    text.push_str("[points]\n");
    text.push_str(POINT_COLUMNS);
    text.push('\n');
    for (_, _, s, t) in grid.nodes() {
        text.push_str(&point_row(patch, s, t, numerics));
        text.push('\n');
    }
    Output { text, errors, summary: summary.join(", ") }
}

fn report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[summary]");
    let _ = writeln!(out, "family = {}", report.family.as_str());
    let _ = writeln!(out, "overall = {}", if report.all_pass() { "pass" } else { "fail" });
    out.push('\n');
    let _ = writeln!(out, "[rows]");
    let _ = writeln!(out, "name,value,tolerance,pass");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{}", r.name, e(r.value), e(r.tolerance), r.pass);
    }
    out.push('\n');
    let _ = writeln!(out, "[verdicts]");
    let _ = writeln!(out, "class,status,max_deviation,tolerance");
    for v in &report.verdicts {
        let _ = writeln!(out, "{},{},{},{}", v.class.as_str(), status(v), e(v.max_deviation), e(v.tolerance));
    }
    out.push('\n');
    if let Some(m) = &report.model {
        let _ = writeln!(out, "[model]");
        let _ = writeln!(out, "family = {}", m.family.as_str());
        let _ = writeln!(out, "residual = {}", e(m.residual));
        let _ = writeln!(out, "threshold = {}", e(m.threshold));
        let _ = writeln!(out, "fit = {}", m.is_fit());
        for f in &m.flags {
            let _ = writeln!(out, "flag = {f:?}");
        }
        let _ = writeln!(out, "t,phi,rho_m,rho_4,residual,skipped");
        for l in &m.lines {
            let _ = writeln!(out, "{},{},{},{},{},{}", e(l.t), e(l.phi), e(l.rho_m), e(l.rho_4), e(l.residual), l.skipped);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "[errors]");
    for (op, err) in &report.errors {
        let _ = writeln!(out, "{op} = {err}");
    }
    out
}

/// Residual table of every reduction and closed form.
pub fn verify(cfg: &RunConfig, setup: &Setup) -> Output {
    let report = classification::verify_classification(&setup.patch, &setup.grid, &setup.numerics);
    let mut text = String::from("# e4surf verification report\n\n");
    // the verifier always uses the scheme-dependent detector tolerance
    environment(&mut text, cfg, setup, position::default_class_tol(&setup.numerics));
    text.push_str(&report_text(&report));
    let passed = report.rows.iter().filter(|r| r.pass).count();
    let summary = format!("{} family, {passed}/{} rows pass, {} errors", report.family.as_str(), report.rows.len(), report.errors.len());
    Output { text, errors: report.errors.len(), summary }
}

fn project(x: Vec4, projection: Projection) -> [f64; 3] {
    match projection {
        Projection::Drop(k) => {
            let mut kept = (0..4).filter(|&i| i != k - 1).map(|i| x[i]);
            [kept.next().unwrap_or(0.0), kept.next().unwrap_or(0.0), kept.next().unwrap_or(0.0)]
        }
        Projection::Stereographic { axis, sign } => {
            let r = x.norm();
            let height = sign * x[axis - 1];
            let k = r / (r - height);
            let mut kept = (0..4).filter(|&i| i != axis - 1).map(|i| k * x[i]);
            [kept.next().unwrap_or(0.0), kept.next().unwrap_or(0.0), kept.next().unwrap_or(0.0)]
        }
    }
}

fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Triangle mesh in OBJ format. Quad `(a, b, c, d)` with `a = (i, j)`,
/// `b = (i+1, j)`, `c = (i+1, j+1)`, `d = (i, j+1)` becomes faces `abc`, `acd`.
pub fn project3d(cfg: &RunConfig, setup: &Setup) -> Result<Output, GeomError> {
    let Setup { patch, grid, numerics } = setup;
    let vertices: Vec<[f64; 3]> = grid.nodes().map(|(_, _, s, t)| project(patch.position(s, t), cfg.projection)).collect();
    if vertices.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GeomError::DegenerateProjection);
    }
    let index = |i: usize, j: usize| j * grid.n_s + i;
    let mut faces = Vec::with_capacity(2 * (grid.n_s - 1) * (grid.n_t - 1));
    for j in 0..grid.n_t - 1 {
        for i in 0..grid.n_s - 1 {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let max_area = faces.iter().map(|f| triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]])).fold(0.0, f64::max);
    if max_area <= numerics.tol {
        return Err(GeomError::DegenerateProjection);
    }
    let mut text = String::new();
    let projection = match cfg.projection {
        Projection::Drop(k) => format!("drop x{k}"),
        Projection::Stereographic { axis, sign } => format!("stereographic from {}e{axis}", if sign < 0.0 { "-" } else { "+" }),
    };
    let _ = writeln!(text, "# e4surf mesh: {} ({projection}), {}", patch.label, grid_text(grid));
    for v in &vertices {
        let _ = writeln!(text, "v {} {} {}", e(v[0]), e(v[1]), e(v[2]));
    }
    for f in &faces {
        let _ = writeln!(text, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    let summary = format!("{} vertices, {} triangles", vertices.len(), faces.len());
    Ok(Output { text, errors: 0, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Builtin, SurfaceSpec};
    use crate::surfaces;

    fn setup(b: Builtin, n: usize) -> (RunConfig, Setup) {
        let mut cfg = RunConfig::new(SurfaceSpec::Builtin(b));
        cfg.grid.n_s = Some(n);
        cfg.grid.n_t = Some(n);
        let s = surfaces::build(&cfg).unwrap();
        (cfg, s)
    }

    #[test]
    fn generate_rows_and_norms() {
        let (_, s) = setup(Builtin::CssPi3, 5);
        let out = generate(&s);
        let lines: Vec<&str> = out.text.lines().collect();
        assert_eq!(lines.len(), 26);
        assert_eq!(lines[0], "s,t,x1,x2,x3,x4");
        for row in &lines[1..] {
            let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            let norm = (v[2] * v[2] + v[3] * v[3] + v[4] * v[4] + v[5] * v[5]).sqrt();
            assert!((norm - v[0]).abs() < 1e-12);
        }
        // t outer: the first n_s rows share t
        let t_of = |k: usize| lines[k].split(',').nth(1).unwrap().to_string();
        assert!((1..=5).all(|k| t_of(k) == t_of(1)));
        assert_ne!(t_of(6), t_of(1));
    }

    #[test]
    fn mesh_counts_and_orientation() {
        let (cfg, s) = setup(Builtin::Hyperplane, 5);
        let out = project3d(&cfg, &s).unwrap();
        assert_eq!(out.text.lines().filter(|l| l.starts_with("v ")).count(), 25);
        assert_eq!(out.text.lines().filter(|l| l.starts_with("f ")).count(), 32);
        assert!(out.text.contains("\nf 1 2 7\nf 1 7 6\n"));
    }

    #[test]
    fn drop_projection_is_isometric_on_hyperplane_patch() {
        let (cfg, s) = setup(Builtin::Hyperplane, 5);
        let nodes: Vec<_> = s.grid.nodes().collect();
        for w in nodes.windows(2) {
            let (a, b) = (s.patch.position(w[0].2, w[0].3), s.patch.position(w[1].2, w[1].3));
            let (pa, pb) = (project(a, cfg.projection), project(b, cfg.projection));
            let d3 = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt();
            assert!((d3 - a.distance(b)).abs() < 1e-14);
        }
    }

    #[test]
    fn stereographic_of_sphere_point() {
        let p = project(Vec4::new(0.0, 0.0, 0.0, -2.0), Projection::Stereographic { axis: 4, sign: 1.0 });
        assert_eq!(p, [0.0, 0.0, 0.0]);
        let q = project(Vec4::new(1.0, 0.0, 0.0, 0.0), Projection::Stereographic { axis: 4, sign: 1.0 });
        assert_eq!(q, [1.0, 0.0, 0.0]);
        let pole = project(Vec4::new(0.0, 0.0, 0.0, 1.0), Projection::Stereographic { axis: 4, sign: 1.0 });
        assert!(pole.iter().any(|v| !v.is_finite()));
    }

    #[test]
    fn collapsed_projection_rejected() {
        let (mut cfg, s) = setup(Builtin::Hyperplane, 5);
        cfg.projection = Projection::Drop(1);
        assert!(project3d(&cfg, &s).is_ok());
        let flat = surfaces::build(&cfg).unwrap();
        let squashed = Setup { patch: flat.patch.transformed(e4surf_core::Mat4::IDENTITY, 1e-9), ..flat };
        assert_eq!(project3d(&cfg, &squashed).err(), Some(GeomError::DegenerateProjection));
    }

    #[test]
    fn analyze_sections() {
        let (cfg, s) = setup(Builtin::CssPi3, 9);
        let out = analyze(&cfg, &s);
        assert_eq!(out.errors, 0);
        for class in ["CSS", "GCR", "CR"] {
            let section = out.text.split(&format!("[verdict.{class}]\n")).nth(1).unwrap();
            assert!(section.starts_with("status = holds"), "{class}: {section}");
        }
        let table = out.text.split("[points]\n").nth(1).unwrap();
        assert_eq!(table.lines().count(), 82);
    }

    #[test]
    fn verify_css_pi3_passes() {
        let (cfg, s) = setup(Builtin::CssPi3, 9);
        let out = verify(&cfg, &s);
        assert_eq!(out.errors, 0);
        assert!(out.text.contains("overall = pass"), "{}", out.text);
    }
}
