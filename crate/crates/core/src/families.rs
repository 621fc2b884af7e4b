//! Example surfaces with analytic jets.
//!
//! The central family is `x(s, t) = s cos u(s) φ₀ + s sin u(s) ψ(t)` with `φ₀`
//! a unit vector and `ψ` a curve on the unit 2-sphere of the hyperplane
//! orthogonal to `φ₀`. Along it the angle function satisfies `tan θ = s u′`;
//! the choice `u = tan θ₀ ln s` gives the constant-slope surfaces.
//!
//! Note that the immersion degenerates where `sin u(s) = 0` (every `t` maps to
//! `±s φ₀`), so grids for this family must stay away from those `s`.

use alloc::format;
use alloc::sync::Arc;

use crate::euclid4::{gram_schmidt, Vec4};
use crate::jets::{Domain, ImmersionPatch, Jet2, Surface};
use crate::math;
use crate::{GeomError, Result};

const ORTHO_TOL: f64 = 1e-10;

/// Shape of a [`SphereCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveShape {
    /// Latitude circle of Euclidean radius `r` around `axis`, unit angular rate.
    Circle { radius: f64 },
    /// Radial projection onto the sphere of a circle with a superimposed wobble
    /// `amplitude·(sin 2t·axis + cos 3t·b)`. Only used to exercise generality.
    Wobbly { radius: f64, amplitude: f64 },
}

/// A curve on `𝕊² = 𝕊³(1) ∩ Π`, where `Π` is the hyperplane orthogonal to `plane_normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCurve {
    pub plane_normal: Vec4,
    pub axis: Vec4,
    /// `{b, c}` spans the equatorial plane orthogonal to `axis` inside `Π`.
    pub b: Vec4,
    pub c: Vec4,
    pub shape: CurveShape,
}

impl SphereCurve {
    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: f64) -> (Vec4, Vec4, Vec4) {
        match self.shape {
            CurveShape::Circle { radius } => {
                let k = math::sqrt((1.0 - radius * radius).max(0.0));
                let (st, ct) = (math::sin(t), math::cos(t));
                let ring = self.b * ct + self.c * st;
                let ring_d = self.c * ct - self.b * st;
                (self.axis * k + ring * radius, ring_d * radius, -ring * radius)
            }
            CurveShape::Wobbly { radius, amplitude } => {
                let k = math::sqrt((1.0 - radius * radius).max(0.0));
                let (st, ct) = (math::sin(t), math::cos(t));
                let (s2, c2) = (math::sin(2.0 * t), math::cos(2.0 * t));
                let (s3, c3) = (math::sin(3.0 * t), math::cos(3.0 * t));
                let g = self.axis * (k + amplitude * s2) + self.b * (radius * ct + amplitude * c3) + self.c * (radius * st);
                let g1 = self.axis * (2.0 * amplitude * c2) + self.b * (-radius * st - 3.0 * amplitude * s3) + self.c * (radius * ct);
                let g2 = self.axis * (-4.0 * amplitude * s2) + self.b * (-radius * ct - 9.0 * amplitude * c3) + self.c * (-radius * st);
                normalize_curve(g, g1, g2)
            }
        }
    }

    pub fn point(&self, t: f64) -> Vec4 {
        self.eval(t).0
    }
}

/// Radial projection `γ/|γ|` with its first two derivatives.
fn normalize_curve(g: Vec4, g1: Vec4, g2: Vec4) -> (Vec4, Vec4, Vec4) {
    let n = g.norm();
    let p = g / n;
    let n1 = g.dot(g1) / n;
    let n2 = (g1.norm_squared() + g.dot(g2) - n1 * n1) / n;
    let p1 = (g1 - p * n1) / n;
    let p2 = (g2 - p1 * (2.0 * n1) - p * n2) / n;
    (p, p1, p2)
}

fn check_orthonormal(plane_normal: Vec4, axis: Vec4) -> Result<(Vec4, Vec4)> {
    let ok = (plane_normal.norm() - 1.0).abs() < ORTHO_TOL
        && (axis.norm() - 1.0).abs() < ORTHO_TOL
        && plane_normal.dot(axis).abs() < ORTHO_TOL;
    if !ok {
        return Err(GeomError::NonOrthonormalInputs);
    }
    // Complete {n, axis} with the first two ambient basis vectors that stay independent.
    let mut basis = alloc::vec![plane_normal, axis];
    for i in 0..4 {
        let mut trial = basis.clone();
        trial.push(Vec4::basis(i));
        if let Ok(q) = gram_schmidt(&trial, 1e-6) {
            basis = q;
        }
        if basis.len() == 4 {
            break;
        }
    }
    Ok((basis[2], basis[3]))
}

/// Latitude circle of Euclidean radius `r` on the unit 2-sphere inside `Π`.
pub fn circle_on_s2(plane_normal: Vec4, axis: Vec4, radius: f64) -> Result<SphereCurve> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(GeomError::InvalidRadius(radius));
    }
    let (b, c) = check_orthonormal(plane_normal, axis)?;
    Ok(SphereCurve { plane_normal, axis, b, c, shape: CurveShape::Circle { radius } })
}

/// Non-circular spherical curve for property tests.
pub fn wobbly_on_s2(plane_normal: Vec4, axis: Vec4, radius: f64, amplitude: f64) -> Result<SphereCurve> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(GeomError::InvalidRadius(radius));
    }
    if amplitude.is_nan() || amplitude.abs() >= 0.25 * radius {
        return Err(GeomError::InvalidParameter("wobble amplitude must stay below radius/4"));
    }
    let (b, c) = check_orthonormal(plane_normal, axis)?;
    Ok(SphereCurve { plane_normal, axis, b, c, shape: CurveShape::Wobbly { radius, amplitude } })
}

/// Default placement: `c₀ = (1,0,0,0)`, latitude axis `(0,1,0,0)`.
pub fn default_normal() -> Vec4 {
    Vec4::basis(0)
}

pub fn default_axis() -> Vec4 {
    Vec4::basis(1)
}

/// Slope profile `u(s)`; the angle function is `θ(s) = arctan(s u′(s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeProfile {
    /// `u(s) = tan θ · ln s`.
    ConstantTheta { theta: f64 },
    /// `u(s) = linear·s + quadratic·s² + log·ln s`.
    PolyLog { linear: f64, quadratic: f64, log: f64 },
}

impl SlopeProfile {
    pub fn constant_theta(theta: f64) -> Self {
        SlopeProfile::ConstantTheta { theta }
    }

    pub fn polylog(linear: f64, quadratic: f64, log: f64) -> Self {
        SlopeProfile::PolyLog { linear, quadratic, log }
    }

    pub fn is_constant_theta(&self) -> bool {
        match *self {
            SlopeProfile::ConstantTheta { .. } => true,
            SlopeProfile::PolyLog { linear, quadratic, .. } => linear == 0.0 && quadratic == 0.0,
        }
    }

    pub fn u(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { theta } => math::tan(theta) * math::ln(s),
            SlopeProfile::PolyLog { linear, quadratic, log } => linear * s + quadratic * s * s + log * math::ln(s),
        }
    }

    pub fn du(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { theta } => math::tan(theta) / s,
            SlopeProfile::PolyLog { linear, quadratic, log } => linear + 2.0 * quadratic * s + log / s,
        }
    }

    pub fn d2u(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { theta } => -math::tan(theta) / (s * s),
            SlopeProfile::PolyLog { quadratic, log, .. } => 2.0 * quadratic - log / (s * s),
        }
    }

    /// `tan θ = s u′`.
    pub fn tan_theta(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { theta } => math::tan(theta),
            SlopeProfile::PolyLog { linear, quadratic, log } => linear * s + 2.0 * quadratic * s * s + log,
        }
    }

    pub fn theta(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { theta } => theta,
            _ => math::atan(self.tan_theta(s)),
        }
    }

    /// `θ′(s) = (u′ + s u″) / (1 + (s u′)²)`.
    pub fn dtheta(&self, s: f64) -> f64 {
        match *self {
            SlopeProfile::ConstantTheta { .. } => 0.0,
            _ => {
                let tt = self.tan_theta(s);
                (self.du(s) + s * self.d2u(s)) / (1.0 + tt * tt)
            }
        }
    }

    /// Solves `u(s) = target` for `s` in `[lo, hi]` by bisection; `u` must be monotone there.
    pub fn inverse_u(&self, target: f64, lo: f64, hi: f64) -> Option<f64> {
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (self.u(a) - target, self.u(b) - target);
        if fa * fb > 0.0 {
            return None;
        }
        let increasing = fb > fa;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = self.u(m) - target;
            if (fm < 0.0) == increasing {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 * b.abs().max(1.0) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }
}

/// `x(s, t) = s cos u φ₀ + s sin u ψ(t)` with analytic jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcrFamily {
    pub profile: SlopeProfile,
    pub phi0: Vec4,
    pub psi: SphereCurve,
}

impl GcrFamily {
    /// The unit normal `e₃ = sin(θ + u) φ₀ − cos(θ + u) ψ(t)` along which `x^⊥` points.
    pub fn parallel_normal(&self, s: f64, t: f64) -> Vec4 {
        let lifted = self.profile.theta(s) + self.profile.u(s);
        self.phi0 * math::sin(lifted) - self.psi.point(t) * math::cos(lifted)
    }
}

impl Surface for GcrFamily {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        let u = self.profile.u(s);
        self.phi0 * (s * math::cos(u)) + self.psi.point(t) * (s * math::sin(u))
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        let p = &self.profile;
        let (u, du, d2u) = (p.u(s), p.du(s), p.d2u(s));
        let (su, cu) = (math::sin(u), math::cos(u));
        let (psi, dpsi, d2psi) = self.psi.eval(t);
        let w = self.phi0 * cu + psi * su;
        let w_perp = psi * cu - self.phi0 * su;
        Some(Jet2 {
            x: w * s,
            x_s: w + w_perp * (s * du),
            x_t: dpsi * (s * su),
            x_ss: w_perp * (2.0 * du + s * d2u) - w * (s * du * du),
            x_st: dpsi * (su + s * cu * du),
            x_tt: d2psi * (s * su),
        })
    }

    fn has_analytic_jets(&self) -> bool {
        true
    }
}

fn check_family_inputs(phi0: Vec4, curve: &SphereCurve) -> Result<()> {
    let unit = (phi0.norm() - 1.0).abs() < ORTHO_TOL;
    let aligned = (phi0.dot(curve.plane_normal).abs() - 1.0).abs() < ORTHO_TOL;
    if !(unit && aligned) {
        return Err(GeomError::NonOrthonormalInputs);
    }
    Ok(())
}

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Constant slope surface `x = s cos(tan θ ln s) c₀ + s sin(tan θ ln s) c₂(t)`,
/// on `s ∈ [1/2, 2]`, `t ∈ [0, 2π]`.
pub fn css_example(theta: f64, c0: Vec4, c2: SphereCurve) -> Result<ImmersionPatch> {
    if !(theta > 0.0 && theta < core::f64::consts::FRAC_PI_2) {
        return Err(GeomError::InvalidAngle(theta));
    }
    check_family_inputs(c0, &c2)?;
    let family = GcrFamily { profile: SlopeProfile::constant_theta(theta), phi0: c0, psi: c2 };
    let domain = Domain::new(0.5, 2.0, 0.0, TWO_PI)?;
    Ok(ImmersionPatch::new(Arc::new(family), domain, format!("css(theta={theta})"))
        .with_profile(family.profile))
}

/// [`css_example`] with the default placement and a great circle.
pub fn css_example_default(theta: f64) -> Result<ImmersionPatch> {
    let curve = circle_on_s2(default_normal(), default_axis(), 1.0)?;
    css_example(theta, default_normal(), curve)
}

/// GCR surface `x = s cos u φ₀ + s sin u ψ(t)` on `s ∈ [1/2, 2]`, `t ∈ [0, 2π]`.
pub fn gcr_example(profile: SlopeProfile, phi0: Vec4, psi: SphereCurve) -> Result<ImmersionPatch> {
    gcr_example_on(profile, phi0, psi, Domain::new(0.5, 2.0, 0.0, TWO_PI)?)
}

/// [`gcr_example`] on an explicit domain.
pub fn gcr_example_on(profile: SlopeProfile, phi0: Vec4, psi: SphereCurve, domain: Domain) -> Result<ImmersionPatch> {
    check_family_inputs(phi0, &psi)?;
    if domain.s0 <= 0.0 {
        return Err(GeomError::SingularProfile { s: domain.s0 });
    }
    // cos θ = 1/√(1 + (s u′)²) only vanishes where u′ blows up.
    for i in 0..=64 {
        let s = domain.s0 + (domain.s1 - domain.s0) * (i as f64) / 64.0;
        if !profile.tan_theta(s).is_finite() {
            return Err(GeomError::SingularProfile { s });
        }
    }
    let family = GcrFamily { profile, phi0, psi };
    let label = match profile {
        SlopeProfile::ConstantTheta { theta } => format!("css(theta={theta})"),
        SlopeProfile::PolyLog { linear, quadratic, log } => format!("gcr(u={linear}*s+{quadratic}*s^2+{log}*ln s)"),
    };
    Ok(ImmersionPatch::new(Arc::new(family), domain, label).with_profile(profile))
}

/// [`gcr_example`] with the default placement and a great circle.
pub fn gcr_example_default(profile: SlopeProfile) -> Result<ImmersionPatch> {
    let curve = circle_on_s2(default_normal(), default_axis(), 1.0)?;
    gcr_example(profile, default_normal(), curve)
}

/// The degenerate classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrivialKind {
    /// Cone `s·γ(t)` over a latitude circle of radius `radius` inside the
    /// hyperplane through the origin orthogonal to `plane_normal`; `radius = 1` is a plane.
    Hyperplane { plane_normal: Vec4, radius: f64 },
    /// Clifford torus on the centered 3-sphere of radius `radius`.
    CenteredSphere { radius: f64 },
}

struct Cone {
    curve: SphereCurve,
}

impl Surface for Cone {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        self.curve.point(t) * s
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        let (g, g1, g2) = self.curve.eval(t);
        Some(Jet2 { x: g * s, x_s: g, x_t: g1 * s, x_ss: Vec4::ZERO, x_st: g1, x_tt: g2 * s })
    }

    fn has_analytic_jets(&self) -> bool {
        true
    }
}

struct CliffordTorus {
    radius: f64,
}

impl Surface for CliffordTorus {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        let a = self.radius * core::f64::consts::FRAC_1_SQRT_2;
        Vec4::new(a * math::cos(s), a * math::sin(s), a * math::cos(t), a * math::sin(t))
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        let a = self.radius * core::f64::consts::FRAC_1_SQRT_2;
        let (ss, cs, st, ct) = (math::sin(s), math::cos(s), math::sin(t), math::cos(t));
        Some(Jet2 {
            x: Vec4::new(a * cs, a * ss, a * ct, a * st),
            x_s: Vec4::new(-a * ss, a * cs, 0.0, 0.0),
            x_t: Vec4::new(0.0, 0.0, -a * st, a * ct),
            x_ss: Vec4::new(-a * cs, -a * ss, 0.0, 0.0),
            x_st: Vec4::ZERO,
            x_tt: Vec4::new(0.0, 0.0, -a * ct, -a * st),
        })
    }

    fn has_analytic_jets(&self) -> bool {
        true
    }
}

/// Patches for the degenerate classes: a cone in a hyperplane through the
/// origin (`θ ≡ 0`) or a patch of a centered 3-sphere (`θ ≡ π/2`).
pub fn trivial_cases(kind: TrivialKind) -> Result<ImmersionPatch> {
    match kind {
        TrivialKind::Hyperplane { plane_normal, radius } => {
            let axis = gram_schmidt(&[plane_normal, Vec4::basis(1), Vec4::basis(2), Vec4::basis(0)], 1e-6)
                .or_else(|_| gram_schmidt(&[plane_normal, Vec4::basis(0)], 1e-6))
                .map_err(|_| GeomError::NonOrthonormalInputs)?[1];
            let curve = circle_on_s2(plane_normal, axis, radius)?;
            let domain = Domain::new(0.5, 2.0, 0.0, TWO_PI)?;
            Ok(ImmersionPatch::new(Arc::new(Cone { curve }), domain, format!("hyperplane_cone(r={radius})")))
        }
        TrivialKind::CenteredSphere { radius } => {
            if radius.is_nan() || radius <= 0.0 {
                return Err(GeomError::InvalidRadius(radius));
            }
            let domain = Domain::new(0.0, TWO_PI, 0.0, TWO_PI)?;
            Ok(ImmersionPatch::new(Arc::new(CliffordTorus { radius }), domain, format!("clifford_torus(R={radius})")))
        }
    }
}

struct Cylinder;

impl Surface for Cylinder {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        Vec4::new(2.0 + math::cos(t), math::sin(t), s, 0.0)
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        let (st, ct) = (math::sin(t), math::cos(t));
        Some(Jet2 {
            x: Vec4::new(2.0 + ct, st, s, 0.0),
            x_s: Vec4::new(0.0, 0.0, 1.0, 0.0),
            x_t: Vec4::new(-st, ct, 0.0, 0.0),
            x_ss: Vec4::ZERO,
            x_st: Vec4::ZERO,
            x_tt: Vec4::new(-ct, -st, 0.0, 0.0),
        })
    }

    fn has_analytic_jets(&self) -> bool {
        true
    }
}

/// Cylinder `(2 + cos t, sin t, s, 0)` whose axis misses the origin; not GCR.
pub fn off_origin_cylinder() -> ImmersionPatch {
    let domain = Domain { s0: 0.25, s1: 1.5, t0: 0.25, t1: 1.5 };
    ImmersionPatch::new(Arc::new(Cylinder), domain, "off_origin_cylinder")
}

struct Bumped {
    inner: Arc<dyn Surface>,
    amplitude: f64,
}

fn bump_jet(s: f64, t: f64) -> Jet2 {
    let (s2, c2) = (math::sin(2.0 * s), math::cos(2.0 * s));
    let (st, ct) = (math::sin(t), math::cos(t));
    let (ss, cs) = (math::sin(s), math::cos(s));
    let (s2t, c2t) = (math::sin(2.0 * t), math::cos(2.0 * t));
    let (sp, cp) = (math::sin(s + t), math::cos(s + t));
    let (sm, cm) = (math::sin(3.0 * s - t), math::cos(3.0 * s - t));
    Jet2 {
        x: Vec4::new(s2 * ct, cs * s2t, sp, cm),
        x_s: Vec4::new(2.0 * c2 * ct, -ss * s2t, cp, -3.0 * sm),
        x_t: Vec4::new(-s2 * st, 2.0 * cs * c2t, cp, sm),
        x_ss: Vec4::new(-4.0 * s2 * ct, -cs * s2t, -sp, -9.0 * cm),
        x_st: Vec4::new(-2.0 * c2 * st, -2.0 * ss * c2t, -sp, 3.0 * cm),
        x_tt: Vec4::new(-s2 * ct, -4.0 * cs * s2t, -sp, -cm),
    }
}

impl Surface for Bumped {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        self.inner.position(s, t) + bump_jet(s, t).x * self.amplitude
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        let j = self.inner.analytic_jet(s, t)?;
        let b = bump_jet(s, t);
        let a = self.amplitude;
        Some(Jet2 {
            x: j.x + b.x * a,
            x_s: j.x_s + b.x_s * a,
            x_t: j.x_t + b.x_t * a,
            x_ss: j.x_ss + b.x_ss * a,
            x_st: j.x_st + b.x_st * a,
            x_tt: j.x_tt + b.x_tt * a,
        })
    }

    fn has_analytic_jets(&self) -> bool {
        self.inner.has_analytic_jets()
    }
}

/// `x + amplitude·b(s, t)` for a fixed smooth bump `b`; negative control for the verifiers.
/// The slope profile is dropped since the result no longer belongs to a family.
pub fn perturbed(patch: &ImmersionPatch, amplitude: f64) -> ImmersionPatch {
    let inner = patch.surface().clone();
    ImmersionPatch::new(Arc::new(Bumped { inner, amplitude }), patch.domain, format!("{}+bump({amplitude})", patch.label))
}
