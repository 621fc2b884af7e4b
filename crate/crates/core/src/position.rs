//! Tangential/normal split of the position vector and the surface-class detectors.
//!
//! Every detector sweeps a cell-centered [`Grid`]: nodes sit at the centers
//! of `n_s × n_t` cells, so no node lies on the boundary of the rectangle and
//! finite-difference stencils of width below half a cell stay inside it.

use alloc::vec::Vec;

use crate::euclid4::{eig_sym2, SymOp2, Vec4};
use crate::jets::{frame_field_derivative, jet2, partial, Axis, Domain, ImmersionPatch, Jet2, Numerics};
use crate::surface::{self, adapted_frame, frame_at, second_form, tangent_projection, FramePolicy};
use crate::{math, GeomError, Result};

/// `x = x^T + x^⊥` with `‖x^T‖ = μ cos θ`, `‖x^⊥‖ = μ sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionDecomposition {
    pub mu: f64,
    pub theta: f64,
    pub x_t: Vec4,
    pub x_perp: Vec4,
}

/// Splits the position vector of `jet` into tangent and normal parts.
pub fn decompose(jet: &Jet2, tol: f64) -> Result<PositionDecomposition> {
    let mu = jet.x.norm();
    if mu < tol {
        return Err(GeomError::OriginPoint { s: f64::NAN, t: f64::NAN });
    }
    let x_t = tangent_projection(jet, jet.x);
    let x_perp = jet.x - x_t;
    let theta = math::atan2(x_perp.norm(), x_t.norm());
    Ok(PositionDecomposition { mu, theta, x_t, x_perp })
}

/// Decomposition at a parameter point.
pub fn decompose_at(patch: &ImmersionPatch, s: f64, t: f64, numerics: &Numerics) -> Result<PositionDecomposition> {
    let jet = jet2(patch, s, t, numerics.jets)?;
    decompose(&jet, numerics.tol).map_err(|e| match e {
        GeomError::OriginPoint { .. } => GeomError::OriginPoint { s, t },
        other => other,
    })
}

/// Cell-centered sampling of a parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub n_s: usize,
    pub n_t: usize,
}

impl Grid {
    pub fn new(domain: Domain, n_s: usize, n_t: usize) -> Result<Self> {
        if n_s < 2 || n_t < 2 {
            return Err(GeomError::InvalidGrid("need at least two nodes per axis"));
        }
        Ok(Grid { domain, n_s, n_t })
    }

    /// 33 × 33 nodes over `domain`.
    pub fn standard(domain: Domain) -> Self {
        Grid { domain, n_s: 33, n_t: 33 }
    }

    pub fn ds(&self) -> f64 {
        (self.domain.s1 - self.domain.s0) / self.n_s as f64
    }

    pub fn dt(&self) -> f64 {
        (self.domain.t1 - self.domain.t0) / self.n_t as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.domain.s0 + (i as f64 + 0.5) * self.ds()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.domain.t0 + (j as f64 + 0.5) * self.dt()
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(i, j, s, t)` with `t` outer and `s` inner.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n_t).flat_map(move |j| (0..self.n_s).map(move |i| (i, j, self.s(i), self.t(j))))
    }
}

/// The surface classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassName {
    ConstantRatio,
    TConstant,
    NConstant,
    Gcr,
    Css,
}

impl ClassName {
    pub const ALL: [ClassName; 5] = [ClassName::ConstantRatio, ClassName::TConstant, ClassName::NConstant, ClassName::Gcr, ClassName::Css];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassName::ConstantRatio => "CR",
            ClassName::TConstant => "T_constant",
            ClassName::NConstant => "N_constant",
            ClassName::Gcr => "GCR",
            ClassName::Css => "CSS",
        }
    }

    pub fn parse(name: &str) -> Option<ClassName> {
        ClassName::ALL.into_iter().find(|c| c.as_str() == name)
    }
}

/// Qualifications attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flag {
    /// Most evaluated points are umbilic for every shape operator, so principal
    /// directions carry no information.
    UmbilicDominated { umbilic: usize, total: usize },
    /// More than a tenth of the points had to be excluded.
    Inconclusive { excluded: usize, total: usize },
    /// `x^⊥` vanishes at some points (surface through a cone point or in a hyperplane through the origin).
    NormalComponentVanishes { count: usize },
    NonFlatNormalBundle { max_normal_curvature: f64 },
    /// The position-adapted frame failed somewhere; a seeded coordinate frame was used.
    SeededFrame,
    /// The only witness is orthogonal to `x` but its shape operator does not vanish.
    TrivialAngleRejected { max_shape_operator: f64 },
    /// Some cells sit too close to a pole of `sec(Φ − u)` and were skipped.
    NearSingular { skipped: usize },
    /// `μ − s` varies along a `t`-line.
    MuNotAdapted { spread: f64 },
}

/// Parallel normal field found by the slope detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelWitness {
    /// Rotation of `N` inside the parallel normal frame.
    pub phi: f64,
    /// Recovered angle `asin ⟨x, N⟩/μ`.
    pub angle: f64,
    pub policy: FramePolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassVerdict {
    pub class: ClassName,
    pub holds: bool,
    /// Normalized deviation compared against `tolerance`.
    pub max_deviation: f64,
    /// Raw magnitude of the tested quantity (e.g. `max |h^β₁₂|`).
    pub max_abs: f64,
    pub tolerance: f64,
    pub evaluated: usize,
    pub excluded: usize,
    pub witness: Option<ParallelWitness>,
    pub flags: Vec<Flag>,
}

impl ClassVerdict {
    fn new(class: ClassName, tolerance: f64) -> Self {
        ClassVerdict {
            class,
            holds: false,
            max_deviation: 0.0,
            max_abs: 0.0,
            tolerance,
            evaluated: 0,
            excluded: 0,
            witness: None,
            flags: Vec::new(),
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        self.flags.iter().any(|f| matches!(f, Flag::Inconclusive { .. }))
    }

    pub fn has_flag(&self, pred: impl Fn(&Flag) -> bool) -> bool {
        self.flags.iter().any(pred)
    }
}

/// Class tolerance matching how jets are produced: `1e-5` analytic, `1e-3` otherwise.
pub fn default_class_tol(numerics: &Numerics) -> f64 {
    if numerics.jets.is_analytic() {
        1e-5
    } else {
        1e-3
    }
}

/// `(e₁(μ), e₂(μ))` by differencing `μ = ‖x‖` along coordinate directions.
///
/// Uses the position-adapted frame, or the coordinate frame where `x^T` vanishes
/// (then `μ` is stationary and both values are zero up to truncation).
pub fn directional_derivatives_of_mu(patch: &ImmersionPatch, s: f64, t: f64, numerics: &Numerics) -> Result<(f64, f64)> {
    let (jet, frame) = match frame_at(patch, s, t, FramePolicy::PositionAdapted, numerics) {
        Ok(v) => v,
        Err(GeomError::TangentialComponentVanishes { .. }) | Err(GeomError::NormalComponentVanishes { .. }) => {
            frame_at(patch, s, t, FramePolicy::CoordinateAdapted, numerics)?
        }
        Err(e) => return Err(e),
    };
    let mu = |a: f64, b: f64| Ok(patch.position(a, b).norm());
    let mu_s = partial(mu, s, t, Axis::S, numerics.fields, &patch.domain)?;
    let mu_t = partial(mu, s, t, Axis::T, numerics.fields, &patch.domain)?;
    let [(a1, b1), (a2, b2)] = surface::frame_coefficients(&jet, &frame);
    Ok((a1 * mu_s + b1 * mu_t, a2 * mu_s + b2 * mu_t))
}

fn decompositions(patch: &ImmersionPatch, grid: &Grid, numerics: &Numerics) -> Result<Vec<PositionDecomposition>> {
    grid.nodes()
        .map(|(_, _, s, t)| {
            decompose_at(patch, s, t, numerics).map_err(|_| GeomError::DegenerateGrid { s, t, reason: "decomposition failed" })
        })
        .collect()
}

fn vanishing(len: f64, d: &PositionDecomposition, tol: f64) -> bool {
    len <= tol * (1.0 + d.mu)
}

/// Constant ratio `‖x^T‖/‖x^⊥‖`: stddev below `tol·mean`.
pub fn is_constant_ratio(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    let mut ratios = Vec::with_capacity(grid.len());
    for ((_, _, s, t), d) in grid.nodes().zip(decompositions(patch, grid, numerics)?) {
        if vanishing(d.x_t.norm(), &d, numerics.tol) || vanishing(d.x_perp.norm(), &d, numerics.tol) {
            return Err(GeomError::DegenerateGrid { s, t, reason: "position component vanishes" });
        }
        ratios.push(d.x_t.norm() / d.x_perp.norm());
    }
    let (mean, std) = math::mean_std(&ratios);
    let mut v = ClassVerdict::new(ClassName::ConstantRatio, tol);
    v.evaluated = ratios.len();
    v.max_abs = std;
    v.max_deviation = std / mean;
    v.holds = std < tol * mean;
    Ok(v)
}

fn constant_length(class: ClassName, lengths: &[f64], tol: f64) -> ClassVerdict {
    let (mean, std) = math::mean_std(lengths);
    let mut v = ClassVerdict::new(class, tol);
    v.evaluated = lengths.len();
    v.max_abs = std;
    v.max_deviation = std / (1.0 + mean);
    v.holds = std < tol * (1.0 + mean);
    v
}

/// `‖x^T‖` constant over the grid.
pub fn is_t_constant(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    let lengths: Vec<f64> = decompositions(patch, grid, numerics)?.iter().map(|d| d.x_t.norm()).collect();
    Ok(constant_length(ClassName::TConstant, &lengths, tol))
}

/// `‖x^⊥‖` constant over the grid.
pub fn is_n_constant(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    let lengths: Vec<f64> = decompositions(patch, grid, numerics)?.iter().map(|d| d.x_perp.norm()).collect();
    Ok(constant_length(ClassName::NConstant, &lengths, tol))
}

/// Frame with `e₁ ∥ x^T` even where `x^⊥` vanishes; normals then come from the coordinate policy.
fn tangent_aligned_frame(jet: &Jet2, tol: f64) -> Result<surface::AdaptedFrame> {
    let base = adapted_frame(jet, FramePolicy::CoordinateAdapted, tol)?;
    let xt = tangent_projection(jet, jet.x);
    Ok(surface::frame_with_tangent(jet, xt / xt.norm(), base.e3))
}

/// `x^T` principal for both shape operators: `max |h^β₁₂| < tol·(1 + max |h^β_ij|)` in the position frame.
pub fn is_gcr(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    let mut v = ClassVerdict::new(ClassName::Gcr, tol);
    let (mut worst_h12, mut worst_h, mut umbilic, mut zero_normal) = (0.0_f64, 0.0_f64, 0usize, 0usize);
    for (_, _, s, t) in grid.nodes() {
        let jet = jet2(patch, s, t, numerics.jets)?;
        let d = decompose(&jet, numerics.tol).map_err(|_| GeomError::OriginPoint { s, t })?;
        if vanishing(d.x_t.norm(), &d, numerics.tol) {
            v.excluded += 1;
            // x is normal here; the shape operator along it decides umbilicity
            let f = adapted_frame(&jet, FramePolicy::Seeded(jet.x), numerics.tol)?;
            if second_form(&jet, &f).S3.is_umbilic() {
                umbilic += 1;
            }
            continue;
        }
        let frame = match adapted_frame(&jet, FramePolicy::PositionAdapted, numerics.tol) {
            Ok(f) => f,
            Err(GeomError::NormalComponentVanishes { .. }) => {
                zero_normal += 1;
                tangent_aligned_frame(&jet, numerics.tol)?
            }
            Err(GeomError::TangentialComponentVanishes { .. }) => return Err(GeomError::TangentialComponentVanishes { s, t }),
            Err(e) => return Err(e),
        };
        let data = second_form(&jet, &frame);
        v.evaluated += 1;
        if data.S3.is_umbilic() && data.S4.is_umbilic() {
            umbilic += 1;
        }
        worst_h12 = worst_h12.max(data.h3_12.abs()).max(data.h4_12.abs());
        worst_h = worst_h.max(data.max_abs_h());
    }
    let total = grid.len();
    v.max_abs = worst_h12;
    v.max_deviation = worst_h12 / (1.0 + worst_h);
    v.holds = v.evaluated > 0 && v.max_deviation < tol;
    if zero_normal > 0 {
        v.flags.push(Flag::NormalComponentVanishes { count: zero_normal });
    }
    if 2 * umbilic > total {
        v.flags.push(Flag::UmbilicDominated { umbilic, total });
        v.holds = false;
    }
    if 10 * v.excluded > total {
        v.flags.push(Flag::Inconclusive { excluded: v.excluded, total });
        v.holds = false;
    }
    Ok(v)
}

/// Ambient basis vector with the largest normal projection at the grid center.
fn seed_for(patch: &ImmersionPatch, grid: &Grid, numerics: &Numerics) -> Result<Vec4> {
    let (s, t) = (grid.s(grid.n_s / 2), grid.t(grid.n_t / 2));
    let jet = jet2(patch, s, t, numerics.jets)?;
    Ok(adapted_frame(&jet, FramePolicy::CoordinateAdapted, numerics.tol)?.e3)
}

fn omega_along(patch: &ImmersionPatch, s: f64, t: f64, axis: Axis, policy: FramePolicy, numerics: &Numerics) -> Result<f64> {
    let provider = |a: f64, b: f64| frame_at(patch, a, b, policy, numerics).map(|(_, f)| f.as_array());
    let center = provider(s, t)?;
    let d = frame_field_derivative(provider, s, t, axis, numerics.fields, &patch.domain)?;
    Ok(d[2].dot(center[3]))
}

const SIMPSON_PANELS: usize = 4;

/// `∫ ω(∂_axis)` from `from` to `to` along a coordinate line, composite Simpson.
fn integrate_omega(
    patch: &ImmersionPatch,
    fixed: f64,
    from: f64,
    to: f64,
    axis: Axis,
    policy: FramePolicy,
    numerics: &Numerics,
) -> Result<f64> {
    let n = 2 * SIMPSON_PANELS;
    let h = (to - from) / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let c = from + h * k as f64;
        let (s, t) = match axis {
            Axis::S => (c, fixed),
            Axis::T => (fixed, c),
        };
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * omega_along(patch, s, t, axis, policy, numerics)?;
    }
    Ok(acc * h / 3.0)
}

/// Rotation angle `α` of the parallel normal frame at every node, integrated
/// `s`-first and `t`-first from node `(0, 0)`.
fn transport_angles(patch: &ImmersionPatch, grid: &Grid, policy: FramePolicy, numerics: &Numerics) -> Result<(Vec<f64>, Vec<f64>)> {
    let (ns, nt) = (grid.n_s, grid.n_t);
    let mut row = alloc::vec![0.0; ns];
    for i in 1..ns {
        row[i] = row[i - 1] - integrate_omega(patch, grid.t(0), grid.s(i - 1), grid.s(i), Axis::S, policy, numerics)?;
    }
    let mut col = alloc::vec![0.0; nt];
    for j in 1..nt {
        col[j] = col[j - 1] - integrate_omega(patch, grid.s(0), grid.t(j - 1), grid.t(j), Axis::T, policy, numerics)?;
    }
    let mut first = alloc::vec![0.0; ns * nt];
    let mut second = alloc::vec![0.0; ns * nt];
    for i in 0..ns {
        let mut a = row[i];
        first[i] = a;
        for j in 1..nt {
            a -= integrate_omega(patch, grid.s(i), grid.t(j - 1), grid.t(j), Axis::T, policy, numerics)?;
            first[j * ns + i] = a;
        }
    }
    for j in 0..nt {
        let mut a = col[j];
        second[j * ns] = a;
        for i in 1..ns {
            a -= integrate_omega(patch, grid.t(j), grid.s(i - 1), grid.s(i), Axis::S, policy, numerics)?;
            second[j * ns + i] = a;
        }
    }
    Ok((first, second))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Constant slope: a parallel unit normal `N` with `⟨x, N⟩/μ` constant.
///
/// Requires a flat normal bundle. The parallel frame `{ẽ₃, ẽ₄}` is obtained by
/// rotating the chosen normal frame by `α` with `dα = −ω`, integrated along
/// grid lines; the candidate `N_φ = cos φ ẽ₃ + sin φ ẽ₄` minimizing the spread
/// of `⟨x, N_φ⟩/μ` is the witness. A witness orthogonal to `x` (angle zero)
/// only counts when its shape operator vanishes, i.e. `N` is constant and the
/// patch lies in a hyperplane through the origin.
pub fn is_css(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    let mut v = ClassVerdict::new(ClassName::Css, tol);

    let mut policy = FramePolicy::PositionAdapted;
    if grid.nodes().any(|(_, _, s, t)| frame_at(patch, s, t, policy, numerics).is_err()) {
        policy = FramePolicy::Seeded(seed_for(patch, grid, numerics)?);
        v.flags.push(Flag::SeededFrame);
    }

    struct Node {
        x: Vec4,
        e3: Vec4,
        e4: Vec4,
        s3: SymOp2,
        s4: SymOp2,
    }
    let mut nodes = Vec::with_capacity(grid.len());
    let (mut max_rd, mut max_h) = (0.0_f64, 0.0_f64);
    for (_, _, s, t) in grid.nodes() {
        let (jet, frame) = frame_at(patch, s, t, policy, numerics)?;
        let data = second_form(&jet, &frame);
        max_rd = max_rd.max(data.S3.commutator_21(&data.S4).abs());
        max_h = max_h.max(data.max_abs_h());
        nodes.push(Node { x: jet.x, e3: frame.e3, e4: frame.e4, s3: data.S3, s4: data.S4 });
    }
    v.evaluated = nodes.len();
    if max_rd >= tol * (1.0 + max_h * max_h) {
        v.flags.push(Flag::NonFlatNormalBundle { max_normal_curvature: max_rd });
        v.max_deviation = f64::INFINITY;
        return Ok(v);
    }

    let (alpha, alpha_alt) = transport_angles(patch, grid, policy, numerics)?;
    let discrepancy = alpha
        .iter()
        .zip(&alpha_alt)
        .map(|(a, b)| {
            let d = math::wrap(a - b + core::f64::consts::PI, 2.0 * core::f64::consts::PI) - core::f64::consts::PI;
            d.abs()
        })
        .fold(0.0, f64::max);
    if discrepancy > tol {
        return Err(GeomError::PathDependence { discrepancy });
    }

    // ⟨x, ẽ₃⟩/μ and ⟨x, ẽ₄⟩/μ
    let mut a = Vec::with_capacity(nodes.len());
    let mut b = Vec::with_capacity(nodes.len());
    for (n, &al) in nodes.iter().zip(&alpha) {
        let (sa, ca) = (math::sin(al), math::cos(al));
        let t3 = n.e3 * ca + n.e4 * sa;
        let t4 = n.e4 * ca - n.e3 * sa;
        let mu = n.x.norm();
        a.push(n.x.dot(t3) / mu);
        b.push(n.x.dot(t4) / mu);
    }
    let spread = |phi: f64| -> f64 {
        let (sp, cp) = (math::sin(phi), math::cos(phi));
        let vals: Vec<f64> = a.iter().zip(&b).map(|(x, y)| cp * x + sp * y).collect();
        math::mean_std(&vals).1
    };

    // the spread has period π in φ
    let pi = core::f64::consts::PI;
    let samples = 64;
    let mut best = (0.0, f64::INFINITY);
    let mut worst = 0.0_f64;
    for k in 0..samples {
        let phi = pi * k as f64 / samples as f64;
        let val = spread(phi);
        worst = worst.max(val);
        if val < best.1 {
            best = (phi, val);
        }
    }
    let step = pi / samples as f64;
    let (ma, _) = math::mean_std(&a);
    let (mb, _) = math::mean_std(&b);
    let mut phi = if worst < tol && math::hypot(ma, mb) < tol {
        // every direction is a witness orthogonal to x: take the one whose
        // shape operator is smallest in the least-squares sense
        let mut gram = [0.0; 3];
        for (n, &al) in nodes.iter().zip(&alpha) {
            let (sa, ca) = (math::sin(al), math::cos(al));
            let p3 = n.s3.scaled(ca).plus(&n.s4.scaled(sa));
            let p4 = n.s4.scaled(ca).plus(&n.s3.scaled(-sa));
            let ip = |x: &SymOp2, y: &SymOp2| x.a11 * y.a11 + 2.0 * x.a12 * y.a12 + x.a22 * y.a22;
            gram[0] += ip(&p3, &p3);
            gram[1] += ip(&p3, &p4);
            gram[2] += ip(&p4, &p4);
        }
        let low = eig_sym2(SymOp2::new(gram[0], gram[1], gram[2])).vectors[0];
        math::atan2(low[1], low[0])
    } else if worst < tol {
        // every direction is a witness: take the one most aligned with x
        math::atan2(mb, ma)
    } else {
        golden_section(spread, best.0 - step, best.0 + step, 1e-8)
    };
    let (sp, cp) = (math::sin(phi), math::cos(phi));
    let vals: Vec<f64> = a.iter().zip(&b).map(|(x, y)| cp * x + sp * y).collect();
    let (mut mean, std) = math::mean_std(&vals);
    if mean < 0.0 {
        phi += pi;
        mean = -mean;
    }
    phi = math::wrap(phi, 2.0 * pi);
    let angle = math::asin(mean.min(1.0));
    v.max_deviation = std;
    v.max_abs = std;
    v.holds = std < tol;
    v.witness = Some(ParallelWitness { phi, angle, policy });

    if v.holds && mean < tol {
        let mut worst_op = 0.0_f64;
        for (n, &al) in nodes.iter().zip(&alpha) {
            let (c3, c4) = (math::cos(al + phi), math::sin(al + phi));
            let op = n.s3.scaled(c3).plus(&n.s4.scaled(c4));
            worst_op = worst_op.max(op.max_abs());
        }
        if worst_op >= tol * (1.0 + max_h) {
            v.holds = false;
            v.flags.push(Flag::TrivialAngleRejected { max_shape_operator: worst_op });
        }
    }
    Ok(v)
}

/// Runs every detector; errors are kept per class.
pub fn classify_all(patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Vec<(ClassName, Result<ClassVerdict>)> {
    ClassName::ALL.into_iter().map(|c| (c, run_detector(c, patch, grid, tol, numerics))).collect()
}

pub fn run_detector(class: ClassName, patch: &ImmersionPatch, grid: &Grid, tol: f64, numerics: &Numerics) -> Result<ClassVerdict> {
    match class {
        ClassName::ConstantRatio => is_constant_ratio(patch, grid, tol, numerics),
        ClassName::TConstant => is_t_constant(patch, grid, tol, numerics),
        ClassName::NConstant => is_n_constant(patch, grid, tol, numerics),
        ClassName::Gcr => is_gcr(patch, grid, tol, numerics),
        ClassName::Css => is_css(patch, grid, tol, numerics),
    }
}
