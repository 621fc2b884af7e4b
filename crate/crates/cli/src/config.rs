//! Flat `key = value` run configuration with dotted section keys.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use e4surf_core::position::ClassName;
use e4surf_core::{DiffScheme, Stencil};

use crate::error::ConfigError;

/// Named example surfaces with preset parameters and grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    CssPi3,
    CssPi4,
    CssPi6,
    GcrUEqS,
    GcrUEqS2,
    GcrLog,
    Sphere,
    Hyperplane,
    Cylinder,
    CssPi3Perturbed,
}

impl Builtin {
    pub const ALL: [Builtin; 10] = [
        Builtin::CssPi3,
        Builtin::CssPi4,
        Builtin::CssPi6,
        Builtin::GcrUEqS,
        Builtin::GcrUEqS2,
        Builtin::GcrLog,
        Builtin::Sphere,
        Builtin::Hyperplane,
        Builtin::Cylinder,
        Builtin::CssPi3Perturbed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Builtin::CssPi3 => "css_pi3",
            Builtin::CssPi4 => "css_pi4",
            Builtin::CssPi6 => "css_pi6",
            Builtin::GcrUEqS => "gcr_u_eq_s",
            Builtin::GcrUEqS2 => "gcr_u_eq_s2",
            Builtin::GcrLog => "gcr_u_eq_2log_s_plus_s",
            Builtin::Sphere => "sphere",
            Builtin::Hyperplane => "hyperplane",
            Builtin::Cylinder => "cylinder",
            Builtin::CssPi3Perturbed => "css_pi3_perturbed",
        }
    }

    pub fn parse(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.as_str() == name)
    }
}

/// Which surface to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceSpec {
    Builtin(Builtin),
    /// Constant slope family over a latitude (or wobbly) curve on S².
    Css { theta: f64, curve_radius: f64, curve_amplitude: f64 },
    /// GCR family with `u = linear·s + quadratic·s² + log·ln s`.
    Gcr { linear: f64, quadratic: f64, log: f64, curve_radius: f64, curve_amplitude: f64 },
    /// Clifford torus on the centered 3-sphere.
    Sphere { radius: f64 },
    /// Cone over a latitude circle inside a hyperplane through the origin.
    Hyperplane { radius: f64 },
    Cylinder,
}

impl SurfaceSpec {
    fn family_name(&self) -> Option<&'static str> {
        Some(match self {
            SurfaceSpec::Builtin(_) => return None,
            SurfaceSpec::Css { .. } => "css",
            SurfaceSpec::Gcr { .. } => "gcr",
            SurfaceSpec::Sphere { .. } => "sphere",
            SurfaceSpec::Hyperplane { .. } => "hyperplane",
            SurfaceSpec::Cylinder => "cylinder",
        })
    }
}

/// Grid overrides; unset fields fall back to the surface's default grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridSpec {
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub n_s: Option<usize>,
    pub n_t: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Orthogonal projection forgetting coordinate `x_k` (1-based).
    Drop(usize),
    /// Stereographic projection from the pole `sign·e_k` of the sphere through each point.
    Stereographic { axis: usize, sign: f64 },
}

impl Default for Projection {
    fn default() -> Self {
        Projection::Drop(4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    /// Bump amplitude added on top of the surface (0 disables).
    pub perturbation: f64,
    /// Seed of a random rotation of E⁴ applied to the surface.
    pub rotation_seed: Option<u64>,
    pub scale: f64,
    pub grid: GridSpec,
    /// Jet scheme; `None` picks analytic jets when available.
    pub jets: Option<DiffScheme>,
    pub fields: Stencil,
    pub checks: Vec<ClassName>,
    /// Detector tolerance; `None` uses the scheme-dependent default.
    pub class_tol: Option<f64>,
    pub numeric_tol: f64,
    pub output: Option<String>,
    pub projection: Projection,
}

impl RunConfig {
    pub fn new(surface: SurfaceSpec) -> Self {
        RunConfig {
            surface,
            perturbation: 0.0,
            rotation_seed: None,
            scale: 1.0,
            grid: GridSpec::default(),
            jets: None,
            fields: Stencil::Richardson(1e-3),
            checks: ClassName::ALL.to_vec(),
            class_tol: None,
            numeric_tol: 1e-9,
            output: None,
            projection: Projection::default(),
        }
    }

    /// Parses a whole configuration file. `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: k + 1, text: raw.trim().to_string() })?;
            pairs.push((Some(k + 1), key.trim().to_string(), value.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    /// Parses file contents and then applies `KEY=VALUE` overrides in order.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut text = text.to_string();
        for o in overrides {
            if !o.contains('=') {
                return Err(ConfigError::Override(o.clone()));
            }
            text.push('\n');
            text.push_str(o);
        }
        Self::parse(&text)
    }

    fn from_pairs(pairs: Vec<(Option<usize>, String, String)>) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (line, key, value) in pairs {
            raw.set(line, &key, &value)?;
        }
        raw.finish()
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match self.surface {
            SurfaceSpec::Builtin(b) => kv("surface.builtin", b.as_str().into()),
            spec => {
                kv("surface.family", spec.family_name().unwrap_or_default().into());
                match spec {
                    SurfaceSpec::Css { theta, curve_radius, curve_amplitude } => {
                        kv("surface.theta", num(theta));
                        kv("surface.curve_radius", num(curve_radius));
                        kv("surface.curve_amplitude", num(curve_amplitude));
                    }
                    SurfaceSpec::Gcr { linear, quadratic, log, curve_radius, curve_amplitude } => {
                        kv("surface.u_linear", num(linear));
                        kv("surface.u_quadratic", num(quadratic));
                        kv("surface.u_log", num(log));
                        kv("surface.curve_radius", num(curve_radius));
                        kv("surface.curve_amplitude", num(curve_amplitude));
                    }
                    SurfaceSpec::Sphere { radius } | SurfaceSpec::Hyperplane { radius } => kv("surface.radius", num(radius)),
                    SurfaceSpec::Cylinder | SurfaceSpec::Builtin(_) => {}
                }
            }
        }
        kv("surface.perturbation", num(self.perturbation));
        if let Some(seed) = self.rotation_seed {
            kv("surface.rotation_seed", seed.to_string());
        }
        kv("surface.scale", num(self.scale));
        let g = &self.grid;
        for (k, v) in [("grid.s_min", g.s_min), ("grid.s_max", g.s_max), ("grid.t_min", g.t_min), ("grid.t_max", g.t_max)] {
            if let Some(v) = v {
                kv(k, num(v));
            }
        }
        for (k, v) in [("grid.n_s", g.n_s), ("grid.n_t", g.n_t)] {
            if let Some(v) = v {
                kv(k, v.to_string());
            }
        }
        if let Some(j) = self.jets {
            kv("scheme.jets", SchemeText::Jets(j).to_string());
        }
        kv("scheme.fields", SchemeText::Fields(self.fields).to_string());
        kv("checks", self.checks.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(","));
        if let Some(t) = self.class_tol {
            kv("tol.class", num(t));
        }
        kv("tol.numeric", num(self.numeric_tol));
        if let Some(p) = &self.output {
            kv("output.path", p.clone());
        }
        match self.projection {
            Projection::Drop(k) => {
                kv("project.mode", "drop".into());
                kv("project.drop", k.to_string());
            }
            Projection::Stereographic { axis, sign } => {
                kv("project.mode", "stereographic".into());
                kv("project.pole", if sign < 0.0 { format!("-{axis}") } else { axis.to_string() });
            }
        }
        out
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

enum SchemeText {
    Jets(DiffScheme),
    Fields(Stencil),
}

impl fmt::Display for SchemeText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SchemeText::Jets(DiffScheme::Analytic) => f.write_str("analytic"),
            SchemeText::Jets(DiffScheme::Central(h)) | SchemeText::Fields(Stencil::Central(h)) => write!(f, "central({})", num(h)),
            SchemeText::Jets(DiffScheme::Richardson(h)) | SchemeText::Fields(Stencil::Richardson(h)) => {
                write!(f, "richardson({})", num(h))
            }
        }
    }
}

/// Parses `analytic`, `central(h)` or `richardson(h)`.
pub fn parse_scheme(text: &str) -> Option<DiffScheme> {
    if text == "analytic" {
        return Some(DiffScheme::Analytic);
    }
    let (name, rest) = text.split_once('(')?;
    let h: f64 = rest.strip_suffix(')')?.trim().parse().ok()?;
    if !(h > 0.0 && h.is_finite()) {
        return None;
    }
    match name.trim() {
        "central" => Some(DiffScheme::Central(h)),
        "richardson" => Some(DiffScheme::Richardson(h)),
        _ => None,
    }
}

#[derive(Default)]
struct RawConfig {
    builtin: Option<Builtin>,
    family: Option<String>,
    theta: Option<f64>,
    u: [Option<f64>; 3],
    curve_radius: Option<f64>,
    curve_amplitude: Option<f64>,
    radius: Option<f64>,
    perturbation: Option<f64>,
    rotation_seed: Option<u64>,
    scale: Option<f64>,
    grid: GridSpec,
    jets: Option<DiffScheme>,
    fields: Option<Stencil>,
    checks: Option<Vec<ClassName>>,
    class_tol: Option<f64>,
    numeric_tol: Option<f64>,
    output: Option<String>,
    mode: Option<String>,
    drop: Option<usize>,
    pole: Option<(usize, f64)>,
    lines: Vec<(String, Option<usize>)>,
}

fn parsed<T: FromStr>(line: Option<usize>, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value { line, key: key.to_string(), value: value.to_string() })
}

impl RawConfig {
    fn set(&mut self, line: Option<usize>, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::Value { line, key: key.to_string(), value: value.to_string() };
        match key {
            "surface.builtin" => self.builtin = Some(Builtin::parse(value).ok_or_else(bad)?),
            "surface.family" => {
                if !["css", "gcr", "sphere", "hyperplane", "cylinder"].contains(&value) {
                    return Err(bad());
                }
                self.family = Some(value.to_string());
            }
            "surface.theta" => self.theta = Some(parsed(line, key, value)?),
            "surface.u_linear" => self.u[0] = Some(parsed(line, key, value)?),
            "surface.u_quadratic" => self.u[1] = Some(parsed(line, key, value)?),
            "surface.u_log" => self.u[2] = Some(parsed(line, key, value)?),
            "surface.curve_radius" => self.curve_radius = Some(parsed(line, key, value)?),
            "surface.curve_amplitude" => self.curve_amplitude = Some(parsed(line, key, value)?),
            "surface.radius" => self.radius = Some(parsed(line, key, value)?),
            "surface.perturbation" => self.perturbation = Some(parsed(line, key, value)?),
            "surface.rotation_seed" => self.rotation_seed = Some(parsed(line, key, value)?),
            "surface.scale" => self.scale = Some(parsed(line, key, value)?),
            "grid.s_min" => self.grid.s_min = Some(parsed(line, key, value)?),
            "grid.s_max" => self.grid.s_max = Some(parsed(line, key, value)?),
            "grid.t_min" => self.grid.t_min = Some(parsed(line, key, value)?),
            "grid.t_max" => self.grid.t_max = Some(parsed(line, key, value)?),
            "grid.n_s" => self.grid.n_s = Some(parsed(line, key, value)?),
            "grid.n_t" => self.grid.n_t = Some(parsed(line, key, value)?),
            "scheme.jets" => self.jets = Some(parse_scheme(value).ok_or_else(bad)?),
            "scheme.fields" => {
                self.fields = Some(match parse_scheme(value).ok_or_else(bad)? {
                    DiffScheme::Central(h) => Stencil::Central(h),
                    DiffScheme::Richardson(h) => Stencil::Richardson(h),
                    DiffScheme::Analytic => return Err(bad()),
                })
            }
            "checks" => {
                let mut list = Vec::new();
                for name in value.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                    list.push(ClassName::parse(name).ok_or_else(bad)?);
                }
                if list.is_empty() {
                    return Err(bad());
                }
                self.checks = Some(list);
            }
            "tol.class" => self.class_tol = Some(parsed(line, key, value)?),
            "tol.numeric" => self.numeric_tol = Some(parsed(line, key, value)?),
            "output.path" => {
                if value.is_empty() {
                    return Err(bad());
                }
                self.output = Some(value.to_string());
            }
            "project.mode" => {
                if value != "drop" && value != "stereographic" {
                    return Err(bad());
                }
                self.mode = Some(value.to_string());
            }
            "project.drop" => self.drop = Some(parsed(line, key, value)?),
            "project.pole" => {
                let (sign, digits) = match value.strip_prefix('-') {
                    Some(rest) => (-1.0, rest),
                    None => (1.0, value.strip_prefix('+').unwrap_or(value)),
                };
                self.pole = Some((parsed(line, key, digits)?, sign));
            }
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
        self.lines.push((key.to_string(), line));
        Ok(())
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.iter().rev().find(|(k, _)| k == key).and_then(|(_, l)| *l)
    }

    fn invalid(&self, key: &str, reason: &str) -> ConfigError {
        ConfigError::Invalid { line: self.line_of(key), key: key.to_string(), reason: reason.to_string() }
    }

    /// Rejects keys that do not apply to the chosen surface.
    fn forbid(&self, keys: &[&str], context: &str) -> Result<(), ConfigError> {
        for key in keys {
            if self.lines.iter().any(|(k, _)| k == key) {
                return Err(self.invalid(key, &format!("not applicable to {context}")));
            }
        }
        Ok(())
    }

    fn check_curve(&self, radius: f64, amplitude: f64) -> Result<(), ConfigError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(self.invalid("surface.curve_radius", "must be positive"));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(self.invalid("surface.curve_amplitude", "must be non-negative"));
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, ConfigError> {
        const CURVE: [&str; 2] = ["surface.curve_radius", "surface.curve_amplitude"];
        const PARAMS: [&str; 7] = [
            "surface.theta",
            "surface.u_linear",
            "surface.u_quadratic",
            "surface.u_log",
            "surface.curve_radius",
            "surface.curve_amplitude",
            "surface.radius",
        ];
        let surface = match (self.builtin, self.family.as_deref()) {
            (Some(_), Some(_)) => return Err(self.invalid("surface.family", "conflicts with surface.builtin")),
            (None, None) => return Err(ConfigError::Missing("surface.builtin or surface.family")),
            (Some(b), None) => {
                self.forbid(&PARAMS, "a builtin surface")?;
                SurfaceSpec::Builtin(b)
            }
            (None, Some(family)) => {
                let curve_radius = self.curve_radius.unwrap_or(1.0);
                let curve_amplitude = self.curve_amplitude.unwrap_or(0.0);
                match family {
                    "css" => {
                        self.forbid(&["surface.u_linear", "surface.u_quadratic", "surface.u_log", "surface.radius"], "css")?;
                        let theta = self.theta.ok_or(ConfigError::Missing("surface.theta"))?;
                        SurfaceSpec::Css { theta, curve_radius, curve_amplitude }
                    }
                    "gcr" => {
                        self.forbid(&["surface.theta", "surface.radius"], "gcr")?;
                        let [linear, quadratic, log] = self.u.map(|c| c.unwrap_or(0.0));
                        SurfaceSpec::Gcr { linear, quadratic, log, curve_radius, curve_amplitude }
                    }
                    "sphere" | "hyperplane" => {
                        self.forbid(&["surface.theta", "surface.u_linear", "surface.u_quadratic", "surface.u_log"], family)?;
                        self.forbid(&CURVE, family)?;
                        let radius = self.radius.unwrap_or(if family == "sphere" { 1.0 } else { 0.5 });
                        if family == "sphere" {
                            SurfaceSpec::Sphere { radius }
                        } else {
                            SurfaceSpec::Hyperplane { radius }
                        }
                    }
                    _ => {
                        self.forbid(&PARAMS, "cylinder")?;
                        SurfaceSpec::Cylinder
                    }
                }
            }
        };
        let mut cfg = RunConfig::new(surface);
        cfg.perturbation = self.perturbation.unwrap_or(0.0);
        cfg.rotation_seed = self.rotation_seed;
        cfg.scale = self.scale.unwrap_or(1.0);
        cfg.grid = self.grid;
        cfg.jets = self.jets;
        if let Some(f) = self.fields {
            cfg.fields = f;
        }
        if let Some(c) = self.checks.clone() {
            cfg.checks = c;
        }
        cfg.class_tol = self.class_tol;
        cfg.numeric_tol = self.numeric_tol.unwrap_or(cfg.numeric_tol);
        cfg.output = self.output.clone();

        let finite = |key: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(self.invalid(key, "must be finite")) };
        let positive = |key: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(self.invalid(key, "must be positive")) };
        positive("tol.numeric", cfg.numeric_tol)?;
        if let Some(t) = cfg.class_tol {
            positive("tol.class", t)?;
        }
        positive("surface.scale", cfg.scale)?;
        if !(cfg.perturbation >= 0.0 && cfg.perturbation.is_finite()) {
            return Err(self.invalid("surface.perturbation", "must be non-negative"));
        }
        for (k, v) in [("grid.s_min", cfg.grid.s_min), ("grid.s_max", cfg.grid.s_max), ("grid.t_min", cfg.grid.t_min), ("grid.t_max", cfg.grid.t_max)] {
            if let Some(v) = v {
                finite(k, v)?;
            }
        }
        for (k, v) in [("grid.n_s", cfg.grid.n_s), ("grid.n_t", cfg.grid.n_t)] {
            if v.is_some_and(|n| n < 5) {
                return Err(self.invalid(k, "grid resolution must be at least 5"));
            }
        }
        match surface {
            SurfaceSpec::Css { theta, curve_radius, curve_amplitude } => {
                finite("surface.theta", theta)?;
                self.check_curve(curve_radius, curve_amplitude)?;
            }
            SurfaceSpec::Gcr { linear, quadratic, log, curve_radius, curve_amplitude } => {
                finite("surface.u_linear", linear)?;
                finite("surface.u_quadratic", quadratic)?;
                finite("surface.u_log", log)?;
                self.check_curve(curve_radius, curve_amplitude)?;
            }
            SurfaceSpec::Sphere { radius } | SurfaceSpec::Hyperplane { radius } => positive("surface.radius", radius)?,
            SurfaceSpec::Cylinder | SurfaceSpec::Builtin(_) => {}
        }

        cfg.projection = match self.mode.as_deref().unwrap_or("drop") {
            "drop" => {
                if self.pole.is_some() {
                    return Err(self.invalid("project.pole", "only used with project.mode = stereographic"));
                }
                let k = self.drop.unwrap_or(4);
                if !(1..=4).contains(&k) {
                    return Err(self.invalid("project.drop", "coordinate index must be 1..4"));
                }
                Projection::Drop(k)
            }
            _ => {
                if self.drop.is_some() {
                    return Err(self.invalid("project.drop", "only used with project.mode = drop"));
                }
                let (axis, sign) = self.pole.unwrap_or((4, 1.0));
                if !(1..=4).contains(&axis) {
                    return Err(self.invalid("project.pole", "axis must be 1..4, optionally negated"));
                }
                Projection::Stereographic { axis, sign }
            }
        };
        Ok(cfg)
    }
}
