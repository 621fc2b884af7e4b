//! Immersion patches and their second-order jets.
//!
//! A patch is a smooth map `(s, t) → E⁴` on a closed rectangle. Jets come
//! either from analytic callbacks supplied by the surface, or from central /
//! Richardson-extrapolated finite differences. Higher-order information
//! (derivatives of frames and of second fundamental form coefficients) is
//! obtained by differencing fields with [`partial`], never by third-order
//! stencils on the position.

use alloc::string::String;
use alloc::sync::Arc;

use crate::euclid4::{Mat4, Vec4};
use crate::families::SlopeProfile;
use crate::{GeomError, Result};

/// Relative Gram-determinant threshold below which `{x_s, x_t}` counts as dependent.
pub const REGULARITY_TOL: f64 = 1e-14;

/// A smooth parametrized surface in E⁴.
pub trait Surface: Send + Sync {
    fn position(&self, s: f64, t: f64) -> Vec4;

    /// Exact jet at `(s, t)`, when the surface knows its derivatives.
    fn analytic_jet(&self, _s: f64, _t: f64) -> Option<Jet2> {
        None
    }

    fn has_analytic_jets(&self) -> bool {
        false
    }
}

/// Closed parameter rectangle `[s0, s1] × [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Domain {
    pub fn new(s0: f64, s1: f64, t0: f64, t1: f64) -> Result<Self> {
        if !(s0 < s1 && t0 < t1) || ![s0, s1, t0, t1].iter().all(|v| v.is_finite()) {
            return Err(GeomError::InvalidParameter("domain bounds must be finite and increasing"));
        }
        Ok(Domain { s0, s1, t0, t1 })
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        s >= self.s0 && s <= self.s1 && t >= self.t0 && t <= self.t1
    }
}

/// Position and first and second partial derivatives at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub x: Vec4,
    pub x_s: Vec4,
    pub x_t: Vec4,
    pub x_ss: Vec4,
    pub x_st: Vec4,
    pub x_tt: Vec4,
}

impl Jet2 {
    /// `EG − F²` of the coordinate fields.
    pub fn gram_det(&self) -> f64 {
        let e = self.x_s.norm_squared();
        let f = self.x_s.dot(self.x_t);
        let g = self.x_t.norm_squared();
        e * g - f * f
    }

    pub fn is_regular(&self) -> bool {
        let e = self.x_s.norm_squared();
        let g = self.x_t.norm_squared();
        self.gram_det() > REGULARITY_TOL * e * g && e > 0.0 && g > 0.0
    }

    /// Applies the similarity `v ↦ scale·R v` to every entry.
    pub fn transformed(&self, rot: &Mat4, scale: f64) -> Jet2 {
        let m = |v: Vec4| rot.apply(v) * scale;
        Jet2 {
            x: m(self.x),
            x_s: m(self.x_s),
            x_t: m(self.x_t),
            x_ss: m(self.x_ss),
            x_st: m(self.x_st),
            x_tt: m(self.x_tt),
        }
    }
}

/// How jets are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffScheme {
    /// Use the patch's derivative callbacks.
    Analytic,
    /// Second-order central differences with base step `h`.
    Central(f64),
    /// Richardson extrapolation of central differences at `h` and `h/2`.
    Richardson(f64),
}

impl DiffScheme {
    /// Central differences with the default base step `1e-4`.
    pub fn central_default() -> Self {
        DiffScheme::Central(1e-4)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, DiffScheme::Analytic)
    }
}

/// Finite-difference stencil used when differencing fields (frames, `h`-coefficients, `μ`, `ω`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stencil {
    Central(f64),
    Richardson(f64),
}

impl Stencil {
    pub fn base_step(&self) -> f64 {
        match *self {
            Stencil::Central(h) | Stencil::Richardson(h) => h,
        }
    }

    /// Leading truncation order of the stencil.
    pub fn order(&self) -> u32 {
        match self {
            Stencil::Central(_) => 2,
            Stencil::Richardson(_) => 4,
        }
    }
}

/// Numerical settings shared by every geometric computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub jets: DiffScheme,
    pub fields: Stencil,
    /// Lengths at or below this count as vanishing (position components, residual norms).
    pub tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { jets: DiffScheme::Analytic, fields: Stencil::Richardson(1e-3), tol: 1e-9 }
    }
}

impl Numerics {
    /// Analytic jets when the patch provides them, otherwise Richardson differences.
    pub fn for_patch(patch: &ImmersionPatch) -> Self {
        let mut n = Numerics::default();
        if !patch.has_analytic_jets() {
            n.jets = DiffScheme::Richardson(1e-3);
        }
        n
    }

    pub fn with_jets(mut self, jets: DiffScheme) -> Self {
        self.jets = jets;
        self
    }

    pub fn with_fields(mut self, fields: Stencil) -> Self {
        self.fields = fields;
        self
    }
}

/// Actual step along a coordinate whose value is `coord`.
#[inline]
pub fn step_for(base: f64, coord: f64) -> f64 {
    base * coord.abs().max(1.0)
}

/// A smooth map `(s, t) → E⁴` over a rectangle, shareable across threads.
#[derive(Clone)]
pub struct ImmersionPatch {
    surface: Arc<dyn Surface>,
    pub domain: Domain,
    pub label: String,
    profile: Option<SlopeProfile>,
}

impl core::fmt::Debug for ImmersionPatch {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ImmersionPatch")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("analytic", &self.has_analytic_jets())
            .finish()
    }
}

impl ImmersionPatch {
    pub fn new(surface: Arc<dyn Surface>, domain: Domain, label: impl Into<String>) -> Self {
        ImmersionPatch { surface, domain, label: label.into(), profile: None }
    }

    /// Patch from a bare map; jets come from finite differences only.
    pub fn from_fn<F>(map: F, domain: Domain, label: impl Into<String>) -> Self
    where
        F: Fn(f64, f64) -> Vec4 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnSurface { map, jets: None::<fn(f64, f64) -> Jet2> }), domain, label)
    }

    /// Patch from a map plus an analytic jet callback.
    pub fn from_fns<F, J>(map: F, jets: J, domain: Domain, label: impl Into<String>) -> Self
    where
        F: Fn(f64, f64) -> Vec4 + Send + Sync + 'static,
        J: Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnSurface { map, jets: Some(jets) }), domain, label)
    }

    /// Attaches the slope profile `u(s)` the patch was built from.
    pub fn with_profile(mut self, profile: SlopeProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn profile(&self) -> Option<&SlopeProfile> {
        self.profile.as_ref()
    }

    pub fn position(&self, s: f64, t: f64) -> Vec4 {
        self.surface.position(s, t)
    }

    pub fn has_analytic_jets(&self) -> bool {
        self.surface.has_analytic_jets()
    }

    pub fn surface(&self) -> &Arc<dyn Surface> {
        &self.surface
    }

    /// The image under `v ↦ scale·R v`. The slope profile survives (it is
    /// invariant under rotations and dilations of the ambient space).
    pub fn transformed(&self, rot: Mat4, scale: f64) -> ImmersionPatch {
        let inner = self.surface.clone();
        ImmersionPatch {
            surface: Arc::new(Similarity { inner, rot, scale }),
            domain: self.domain,
            label: self.label.clone(),
            profile: self.profile,
        }
    }
}

struct FnSurface<F, J> {
    map: F,
    jets: Option<J>,
}

impl<F, J> Surface for FnSurface<F, J>
where
    F: Fn(f64, f64) -> Vec4 + Send + Sync,
    J: Fn(f64, f64) -> Jet2 + Send + Sync,
{
    fn position(&self, s: f64, t: f64) -> Vec4 {
        (self.map)(s, t)
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        self.jets.as_ref().map(|j| j(s, t))
    }

    fn has_analytic_jets(&self) -> bool {
        self.jets.is_some()
    }
}

struct Similarity {
    inner: Arc<dyn Surface>,
    rot: Mat4,
    scale: f64,
}

impl Surface for Similarity {
    fn position(&self, s: f64, t: f64) -> Vec4 {
        self.rot.apply(self.inner.position(s, t)) * self.scale
    }

    fn analytic_jet(&self, s: f64, t: f64) -> Option<Jet2> {
        self.inner.analytic_jet(s, t).map(|j| j.transformed(&self.rot, self.scale))
    }

    fn has_analytic_jets(&self) -> bool {
        self.inner.has_analytic_jets()
    }
}

/// Jet of `patch` at `(s, t)` with a regularity check.
pub fn jet2(patch: &ImmersionPatch, s: f64, t: f64, scheme: DiffScheme) -> Result<Jet2> {
    let jet = jet2_raw(patch, s, t, scheme)?;
    if !jet.is_regular() {
        return Err(GeomError::DegenerateImmersion { s, t, gram: jet.gram_det() });
    }
    Ok(jet)
}

/// Jet of `patch` at `(s, t)` without the regularity check.
pub fn jet2_raw(patch: &ImmersionPatch, s: f64, t: f64, scheme: DiffScheme) -> Result<Jet2> {
    if !patch.domain.contains(s, t) {
        return Err(GeomError::StencilOutOfDomain { s, t });
    }
    match scheme {
        DiffScheme::Analytic => patch.surface.analytic_jet(s, t).ok_or(GeomError::NoAnalyticJets),
        DiffScheme::Central(h) => central_jet(patch, s, t, h, 1.0),
        DiffScheme::Richardson(h) => {
            let coarse = central_jet(patch, s, t, h, 1.0)?;
            let fine = central_jet(patch, s, t, h, 0.5)?;
            let r = |f: Vec4, c: Vec4| (f * 4.0 - c) / 3.0;
            Ok(Jet2 {
                x: fine.x,
                x_s: r(fine.x_s, coarse.x_s),
                x_t: r(fine.x_t, coarse.x_t),
                x_ss: r(fine.x_ss, coarse.x_ss),
                x_st: r(fine.x_st, coarse.x_st),
                x_tt: r(fine.x_tt, coarse.x_tt),
            })
        }
    }
}

fn central_jet(patch: &ImmersionPatch, s: f64, t: f64, base: f64, fraction: f64) -> Result<Jet2> {
    let hs = step_for(base, s) * fraction;
    let ht = step_for(base, t) * fraction;
    let d = &patch.domain;
    if !(d.contains(s - hs, t - ht) && d.contains(s + hs, t + ht)) {
        return Err(GeomError::StencilOutOfDomain { s, t });
    }
    let x = |ds: f64, dt: f64| patch.position(s + ds, t + dt);
    let c = x(0.0, 0.0);
    let (sp, sm) = (x(hs, 0.0), x(-hs, 0.0));
    let (tp, tm) = (x(0.0, ht), x(0.0, -ht));
    let (pp, pm, mp, mm) = (x(hs, ht), x(hs, -ht), x(-hs, ht), x(-hs, -ht));
    Ok(Jet2 {
        x: c,
        x_s: (sp - sm) / (2.0 * hs),
        x_t: (tp - tm) / (2.0 * ht),
        x_ss: (sp - c * 2.0 + sm) / (hs * hs),
        x_st: (pp - pm - mp + mm) / (4.0 * hs * ht),
        x_tt: (tp - c * 2.0 + tm) / (ht * ht),
    })
}

/// Values that finite differences can combine linearly.
pub trait Linear: Copy {
    /// `a·self + b·other`
    fn lin(self, a: f64, other: Self, b: f64) -> Self;
}

impl Linear for f64 {
    fn lin(self, a: f64, other: f64, b: f64) -> f64 {
        a * self + b * other
    }
}

impl Linear for Vec4 {
    fn lin(self, a: f64, other: Vec4, b: f64) -> Vec4 {
        self * a + other * b
    }
}

impl<T: Linear, const N: usize> Linear for [T; N] {
    fn lin(self, a: f64, other: Self, b: f64) -> Self {
        core::array::from_fn(|i| self[i].lin(a, other[i], b))
    }
}

/// Parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    T,
}

/// Partial derivative of a field `f(s, t)` along `axis`, by the given stencil.
pub fn partial<T, F>(f: F, s: f64, t: f64, axis: Axis, stencil: Stencil, domain: &Domain) -> Result<T>
where
    T: Linear,
    F: Fn(f64, f64) -> Result<T>,
{
    let coord = match axis {
        Axis::S => s,
        Axis::T => t,
    };
    let central = |h: f64| -> Result<T> {
        let (ds, dt) = match axis {
            Axis::S => (h, 0.0),
            Axis::T => (0.0, h),
        };
        if !(domain.contains(s - ds, t - dt) && domain.contains(s + ds, t + dt)) {
            return Err(GeomError::StencilOutOfDomain { s, t });
        }
        let plus = f(s + ds, t + dt)?;
        let minus = f(s - ds, t - dt)?;
        Ok(plus.lin(0.5 / h, minus, -0.5 / h))
    };
    match stencil {
        Stencil::Central(base) => central(step_for(base, coord)),
        Stencil::Richardson(base) => {
            let h = step_for(base, coord);
            let coarse = central(h)?;
            let fine = central(0.5 * h)?;
            Ok(fine.lin(4.0 / 3.0, coarse, -1.0 / 3.0))
        }
    }
}

/// Flips each vector of `frame` that points against the matching vector of `reference`.
pub fn align_frame(frame: [Vec4; 4], reference: &[Vec4; 4]) -> [Vec4; 4] {
    core::array::from_fn(|i| if frame[i].dot(reference[i]) < 0.0 { -frame[i] } else { frame[i] })
}

/// Ambient derivative of a frame field along a coordinate direction.
///
/// `provider` returns the frame `{e₁, e₂, e₃, e₄}` at a parameter point. A
/// stencil frame vector whose dot with the center frame is negative signals an
/// orientation discontinuity and yields [`GeomError::FrameFlip`].
pub fn frame_field_derivative<F>(
    provider: F,
    s: f64,
    t: f64,
    axis: Axis,
    stencil: Stencil,
    domain: &Domain,
) -> Result<[Vec4; 4]>
where
    F: Fn(f64, f64) -> Result<[Vec4; 4]>,
{
    let center = provider(s, t)?;
    let checked = |ss: f64, tt: f64| -> Result<[Vec4; 4]> {
        let frame = provider(ss, tt)?;
        for (i, (v, c)) in frame.iter().zip(center.iter()).enumerate() {
            let correlation = v.dot(*c);
            if correlation < 0.0 {
                return Err(GeomError::FrameFlip { vector: i, correlation });
            }
        }
        Ok(frame)
    };
    partial(checked, s, t, axis, stencil, domain)
}

/// Defect `‖∂_t(x_s) − ∂_s(x_t)‖` of the mixed partial computed both ways,
/// with first derivatives from `scheme` and the outer derivative from `stencil`.
pub fn schwarz_defect(patch: &ImmersionPatch, s: f64, t: f64, scheme: DiffScheme, stencil: Stencil) -> Result<f64> {
    let xs_t = partial(|a, b| Ok(jet2_raw(patch, a, b, scheme)?.x_s), s, t, Axis::T, stencil, &patch.domain)?;
    let xt_s = partial(|a, b| Ok(jet2_raw(patch, a, b, scheme)?.x_t), s, t, Axis::S, stencil, &patch.domain)?;
    Ok((xs_t - xt_s).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{self, SlopeProfile};

    fn plane() -> ImmersionPatch {
        ImmersionPatch::from_fn(|s, t| Vec4::new(s, t, 0.0, 0.0), Domain::new(-2.0, 2.0, -2.0, 2.0).unwrap(), "plane")
    }

    #[test]
    fn plane_jet_is_affine() {
        for scheme in [DiffScheme::Central(1e-3), DiffScheme::Richardson(1e-3)] {
            let j = jet2(&plane(), 0.3, -0.7, scheme).unwrap();
            assert!(j.x_s.distance(Vec4::new(1.0, 0.0, 0.0, 0.0)) < 1e-10);
            assert!(j.x_t.distance(Vec4::new(0.0, 1.0, 0.0, 0.0)) < 1e-10);
            assert!(j.x_ss.norm() < 1e-6 && j.x_st.norm() < 1e-6 && j.x_tt.norm() < 1e-6);
        }
    }

    #[test]
    fn analytic_requires_callbacks() {
        assert_eq!(jet2(&plane(), 0.0, 0.0, DiffScheme::Analytic), Err(GeomError::NoAnalyticJets));
    }

    #[test]
    fn stencil_out_of_domain() {
        let err = jet2(&plane(), 2.0, 0.0, DiffScheme::Central(1e-3)).unwrap_err();
        assert!(matches!(err, GeomError::StencilOutOfDomain { .. }));
    }

    #[test]
    fn degenerate_immersion_flagged() {
        let p = ImmersionPatch::from_fn(|s, _t| Vec4::new(s, 0.0, 0.0, 0.0), Domain::new(-1.0, 1.0, -1.0, 1.0).unwrap(), "line");
        let err = jet2(&p, 0.0, 0.0, DiffScheme::Central(1e-3)).unwrap_err();
        assert!(matches!(err, GeomError::DegenerateImmersion { .. }));
    }

    #[test]
    fn css_speed_along_s() {
        let p = families::css_example_default(core::f64::consts::FRAC_PI_3).unwrap();
        let j = jet2(&p, 1.0, 0.4, DiffScheme::Analytic).unwrap_or_else(|_| jet2_raw(&p, 1.0, 0.4, DiffScheme::Analytic).unwrap());
        // ‖x_s‖ = 1/cos θ
        assert!((j.x_s.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn central_matches_analytic_on_gcr() {
        let p = families::gcr_example_default(SlopeProfile::polylog(1.0, 0.0, 0.0)).unwrap();
        let mut worst = 0.0_f64;
        for &(s, t) in &[(1.0, 0.3), (0.8, 1.1), (1.6, 2.5), (1.9, 4.0)] {
            let a = jet2(&p, s, t, DiffScheme::Analytic).unwrap();
            let c = jet2(&p, s, t, DiffScheme::Central(1e-3)).unwrap();
            for (u, v) in [(a.x_s, c.x_s), (a.x_t, c.x_t), (a.x_ss, c.x_ss), (a.x_st, c.x_st), (a.x_tt, c.x_tt)] {
                worst = worst.max((u - v).max_abs());
            }
        }
        assert!(worst < 1e-5, "max component error {worst:e}");
    }

    #[test]
    fn central_is_second_order() {
        let p = families::gcr_example_default(SlopeProfile::polylog(1.0, 0.0, 0.0)).unwrap();
        let exact = jet2(&p, 1.3, 0.7, DiffScheme::Analytic).unwrap();
        let err = |h: f64| {
            let j = jet2(&p, 1.3, 0.7, DiffScheme::Central(h)).unwrap();
            (j.x_ss - exact.x_ss).norm() + (j.x_s - exact.x_s).norm()
        };
        let order = libm::log2(err(1e-2) / err(5e-3));
        assert!((1.8..=2.2).contains(&order), "measured order {order}");
    }

    #[test]
    fn richardson_is_fourth_order() {
        let p = families::gcr_example_default(SlopeProfile::polylog(1.0, 0.0, 0.0)).unwrap();
        let exact = jet2(&p, 1.3, 0.7, DiffScheme::Analytic).unwrap();
        let err = |h: f64| {
            let j = jet2(&p, 1.3, 0.7, DiffScheme::Richardson(h)).unwrap();
            (j.x_s - exact.x_s).norm()
        };
        let order = libm::log2(err(4e-2) / err(2e-2));
        assert!((3.7..=4.3).contains(&order), "measured order {order}");
    }

    #[test]
    fn schwarz_symmetry() {
        let p = families::gcr_example_default(SlopeProfile::polylog(0.0, 1.0, 0.0)).unwrap();
        let d = schwarz_defect(&p, 1.2, 0.5, DiffScheme::Analytic, Stencil::Richardson(1e-3)).unwrap();
        assert!(d < 1e-9, "{d:e}");
        let d = schwarz_defect(&p, 1.2, 0.5, DiffScheme::Central(1e-3), Stencil::Central(1e-2)).unwrap();
        // central truncation bound ~ h² with O(1) derivatives
        assert!(d < 10.0 * 1e-4, "{d:e}");
    }

    #[test]
    fn constant_frame_has_zero_derivative() {
        let d = Domain::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let frame = [Vec4::basis(0), Vec4::basis(1), Vec4::basis(2), Vec4::basis(3)];
        let df = frame_field_derivative(|_, _| Ok(frame), 0.1, 0.2, Axis::S, Stencil::Richardson(1e-3), &d).unwrap();
        assert!(df.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn frame_flip_detected() {
        let d = Domain::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let provider = |s: f64, _t: f64| {
            let sign = if s > 0.1 { -1.0 } else { 1.0 };
            Ok([Vec4::basis(0) * sign, Vec4::basis(1), Vec4::basis(2), Vec4::basis(3)])
        };
        let err = frame_field_derivative(provider, 0.1, 0.0, Axis::S, Stencil::Central(1e-3), &d).unwrap_err();
        assert!(matches!(err, GeomError::FrameFlip { vector: 0, .. }));
        let aligned = align_frame([-Vec4::basis(0), Vec4::basis(1), Vec4::basis(2), Vec4::basis(3)], &[Vec4::basis(0); 4]);
        assert_eq!(aligned[0], Vec4::basis(0));
    }

    #[test]
    fn similarity_transforms_jets() {
        let p = families::css_example_default(0.7).unwrap();
        let rot = Mat4::rotation_from_seeds(
            [Vec4::new(1.0, 2.0, 0.5, -1.0), Vec4::new(0.3, -1.0, 2.0, 0.1), Vec4::new(-0.4, 0.2, 0.3, 1.5), Vec4::new(0.0, 0.0, 1.0, 1.0)],
            1e-12,
        )
        .unwrap();
        let q = p.transformed(rot, 2.5);
        let a = jet2(&q, 1.4, 0.3, DiffScheme::Analytic).unwrap();
        let b = jet2(&q, 1.4, 0.3, DiffScheme::Richardson(1e-3)).unwrap();
        assert!((a.x_ss - b.x_ss).norm() < 1e-7);
        assert!((a.x.norm() - 2.5 * 1.4).abs() < 1e-12);
    }
}
