use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn e4surf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_e4surf")).args(args).output().unwrap()
}

fn section<'a>(text: &'a str, header: &str) -> &'a str {
    let start = text.find(header).unwrap_or_else(|| panic!("no section {header}")) + header.len();
    let rest = &text[start..];
    rest.find("\n[").map_or(rest, |end| &rest[..end])
}

fn value<'a>(section: &'a str, key: &str) -> &'a str {
    section
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no key {key} in {section}"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_writes_header_and_rows() {
    let o = e4surf(&["generate", "--set", "surface.builtin=css_pi3", "--set", "grid.n_s=5", "--set", "grid.n_t=5", "--quiet"]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 26);
    assert_eq!(lines[0], "s,t,x1,x2,x3,x4");
    for row in &lines[1..] {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[2..].iter().map(|x| x * x).sum::<f64>().sqrt() - v[0]).abs() < 1e-12);
    }
}

#[test]
fn analyze_example_and_sphere() {
    let o = e4surf(&["analyze", "--set", "surface.builtin=css_pi3", "--set", "grid.n_s=9", "--set", "grid.n_t=9", "--quiet"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for class in ["CSS", "GCR", "CR"] {
        assert_eq!(value(section(&text, &format!("[verdict.{class}]")), "status"), "holds");
    }

    let o = e4surf(&["analyze", "--set", "surface.builtin=sphere", "--set", "grid.n_s=9", "--set", "grid.n_t=9", "--quiet"]);
    let text = stdout(&o);
    assert_eq!(value(section(&text, "[verdict.N_constant]"), "status"), "holds");
    let gcr = section(&text, "[verdict.GCR]");
    assert!(gcr.contains("flag = UmbilicDominated"), "{gcr}");
    // the constant ratio detector errors on a sphere (x^T vanishes), which is a nonzero exit
    assert_eq!(value(section(&text, "[verdict.CR]"), "status"), "error");
    assert_eq!(o.status.code(), Some(3));
    let o = e4surf(&["analyze", "--set", "surface.builtin=sphere", "--set", "checks=N_constant,GCR", "--set", "grid.n_s=9", "--set", "grid.n_t=9", "--quiet"]);
    assert!(o.status.success());
}

#[test]
fn failing_class_is_not_an_error() {
    let o = e4surf(&["analyze", "--set", "surface.builtin=cylinder", "--set", "checks=GCR", "--set", "grid.n_s=9", "--set", "grid.n_t=9", "--quiet"]);
    assert!(o.status.success());
    assert_eq!(value(section(&stdout(&o), "[verdict.GCR]"), "status"), "fails");
}

#[test]
fn verify_golden_runs() {
    let small = ["--set", "grid.n_s=9", "--set", "grid.n_t=9", "--quiet"];
    let run = |extra: &[&str]| {
        let mut args = vec!["verify"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&small);
        e4surf(&args)
    };
    let o = run(&["--set", "surface.builtin=css_pi3"]);
    assert!(o.status.success());
    assert_eq!(value(section(&stdout(&o), "[summary]"), "overall"), "pass");

    let o = run(&["--set", "surface.builtin=gcr_u_eq_s", "--set", "scheme.jets=central(1e-4)"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(section(&text, "[summary]"), "overall"), "pass");
    assert_eq!(value(section(&text, "[environment]"), "jets"), "central(0.0001)");

    let o = run(&["--set", "surface.builtin=css_pi3_perturbed"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(section(&text, "[summary]"), "overall"), "fail");
    let rows = section(&text, "[rows]");
    let closed: Vec<_> = rows.lines().filter(|l| l.starts_with("closed_form")).collect();
    assert_eq!(closed.len(), 3);
    assert!(closed.iter().all(|l| l.ends_with(",false")));
    assert!(section(&text, "[errors]").trim().is_empty());
}

#[test]
fn project3d_mesh() {
    let o = e4surf(&["project3d", "--set", "surface.builtin=hyperplane", "--set", "grid.n_s=5", "--set", "grid.n_t=5", "--quiet"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 25);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 32);

    let o = e4surf(&["project3d", "--set", "surface.builtin=sphere", "--set", "project.mode=stereographic", "--set", "project.pole=-4", "--quiet"]);
    assert!(o.status.success());
}

#[test]
fn rotated_patch_projects_differently_but_analyzes_identically() {
    let base = ["--set", "surface.builtin=gcr_u_eq_s", "--set", "grid.n_s=7", "--set", "grid.n_t=7", "--quiet"];
    let with = |verb: &str, extra: &[&str]| {
        let mut args = vec![verb];
        args.extend_from_slice(&base);
        args.extend_from_slice(extra);
        stdout(&e4surf(&args))
    };
    let rot = ["--set", "surface.rotation_seed=11"];
    assert_ne!(with("project3d", &[]), with("project3d", &rot));
    let (a, b) = (with("analyze", &[]), with("analyze", &rot));
    for class in ["CR", "T_constant", "N_constant", "GCR", "CSS"] {
        let header = format!("[verdict.{class}]");
        assert_eq!(value(section(&a, &header), "status"), value(section(&b, &header), "status"));
    }
    let column = |text: &str, name: &str| -> Vec<f64> {
        let table = section(text, "[points]\n");
        let mut lines = table.lines();
        let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
        lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
    };
    for name in ["K", "mu", "theta", "E", "G"] {
        for (x, y) in column(&a, name).iter().zip(column(&b, name)) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn config_file_output_path_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("# grid export\nsurface.family = css\nsurface.theta = 0.5\ngrid.n_s = 6\ngrid.n_t = 5\noutput.path = {}\n", out.display())).unwrap();
    let o = e4surf(&["generate", "--config", cfg.to_str().unwrap(), "--set", "grid.n_t=7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("generate:"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 6 * 7);
}

#[test]
fn exit_codes() {
    let o = e4surf(&["generate", "--set", "surface.builtin=css_pi3", "--set", "grid.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key `grid.bogus`"));

    let o = e4surf(&["generate", "--set", "surface.builtin=css_pi3", "--set", "grid.n_s=3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = e4surf(&["generate", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(4));

    let o = e4surf(&["generate", "--set", "surface.builtin=css_pi3", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(4));

    let o = e4surf(&["project3d", "--set", "surface.builtin=css_pi3", "--set", "surface.scale=1e-12", "--quiet"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "surface.builtin = css_pi3\n\nthis line is wrong\n").unwrap();
    let o = e4surf(&["generate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(!Path::new("out.csv").exists());
}
