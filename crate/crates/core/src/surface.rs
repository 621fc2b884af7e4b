//! Pointwise extrinsic geometry: adapted frames, the second fundamental form,
//! shape operators, curvatures, the normal connection and the residuals of
//! the Gauss, Codazzi and Ricci equations.
//!
//! Frame vectors are expanded in coordinate fields as `eᵢ = aᵢ ∂s + bᵢ ∂t`;
//! every directional derivative along `eᵢ` is assembled from coordinate
//! partials with those coefficients.

use crate::euclid4::{cross3, SymOp2, Vec4};
use crate::jets::{frame_field_derivative, jet2, partial, Axis, ImmersionPatch, Jet2, Numerics};
use crate::{math, GeomError, Result};

/// Orthonormal frame `{e₁, e₂}` tangent and `{e₃, e₄}` normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame {
    pub e1: Vec4,
    pub e2: Vec4,
    pub e3: Vec4,
    pub e4: Vec4,
}

impl AdaptedFrame {
    pub fn as_array(&self) -> [Vec4; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }

    pub fn from_array(v: [Vec4; 4]) -> Self {
        AdaptedFrame { e1: v[0], e2: v[1], e3: v[2], e4: v[3] }
    }

    /// Largest entry of `Gram − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = self.as_array();
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v[i].dot(v[j]) - target).abs());
            }
        }
        worst
    }
}

/// How the frame is oriented relative to the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FramePolicy {
    /// `e₁ ∥ x^T`, `e₃ ∥ x^⊥`.
    PositionAdapted,
    /// `e₁ ∥ x_s`; `e₃` from the ambient basis vector with the largest normal projection.
    CoordinateAdapted,
    /// `e₁ ∥ x_s`; `e₃` along the normal projection of a fixed seed vector.
    /// Continuous wherever the seed stays transverse to the tangent plane.
    Seeded(Vec4),
}

/// First and second fundamental forms at a point, in an orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(non_snake_case)]
pub struct FundamentalData {
    pub E: f64,
    pub F: f64,
    pub G: f64,
    pub h3_11: f64,
    pub h3_12: f64,
    pub h3_22: f64,
    pub h4_11: f64,
    pub h4_12: f64,
    pub h4_22: f64,
    pub S3: SymOp2,
    pub S4: SymOp2,
    /// Mean curvature vector `½ tr h`.
    pub H: Vec4,
    /// Gaussian curvature from the Gauss equation.
    pub K: f64,
    /// `√G`, the length of `∂t`.
    pub m: f64,
}

impl FundamentalData {
    /// `h^β_ij` with `beta ∈ {3, 4}` and `i, j ∈ {1, 2}`.
    pub fn h(&self, beta: usize, i: usize, j: usize) -> f64 {
        let op = if beta == 3 { &self.S3 } else { &self.S4 };
        match (i, j) {
            (1, 1) => op.a11,
            (2, 2) => op.a22,
            _ => op.a12,
        }
    }

    /// Largest `|h^β_ij|`.
    pub fn max_abs_h(&self) -> f64 {
        self.S3.max_abs().max(self.S4.max_abs())
    }
}

/// Connection coefficients of the tangent and normal bundles in a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionData {
    /// `gamma[i][j][l] = ⟨∇_{e_{i+1}} e_{j+1}, e_{l+1}⟩`.
    pub gamma: [[[f64; 2]; 2]; 2],
    /// `ω(eᵢ) = ⟨D_{eᵢ} e₃, e₄⟩`.
    pub omega: [f64; 2],
    /// Normal curvature `⟨R^D(e₁, e₂)e₃, e₄⟩` from the Ricci equation.
    pub rd: f64,
    /// The same quantity from `dω(e₁, e₂)`.
    pub rd_exterior: f64,
}

impl ConnectionData {
    /// Largest `|⟨∇_X e₁, e₂⟩ + ⟨∇_X e₂, e₁⟩|` over `X ∈ {e₁, e₂}`.
    pub fn skew_defect(&self) -> f64 {
        (0..2).map(|i| (self.gamma[i][0][1] + self.gamma[i][1][0]).abs()).fold(0.0, f64::max)
    }
}

/// `(E, F, G)`.
pub fn first_form(jet: &Jet2) -> (f64, f64, f64) {
    (jet.x_s.norm_squared(), jet.x_s.dot(jet.x_t), jet.x_t.norm_squared())
}

/// Coefficients `(a, b)` with `proj_T v = a x_s + b x_t`.
pub fn tangent_coefficients(jet: &Jet2, v: Vec4) -> (f64, f64) {
    let (e, f, g) = first_form(jet);
    let det = e * g - f * f;
    let (p, q) = (v.dot(jet.x_s), v.dot(jet.x_t));
    ((g * p - f * q) / det, (e * q - f * p) / det)
}

/// Orthogonal projection of `v` onto the tangent plane.
pub fn tangent_projection(jet: &Jet2, v: Vec4) -> Vec4 {
    let (a, b) = tangent_coefficients(jet, v);
    jet.x_s * a + jet.x_t * b
}

/// Unit tangent orthogonal to `e1`, oriented so that `(e₁, e₂)` and `(x_s, x_t)` agree.
fn complete_tangent(jet: &Jet2, e1: Vec4) -> Vec4 {
    let rs = jet.x_s.reject(e1);
    let rt = jet.x_t.reject(e1);
    let mut e2 = if rt.norm_squared() >= rs.norm_squared() { rt } else { rs };
    e2 = e2 / e2.norm();
    let orientation = e1.dot(jet.x_s) * e2.dot(jet.x_t) - e1.dot(jet.x_t) * e2.dot(jet.x_s);
    if orientation < 0.0 {
        -e2
    } else {
        e2
    }
}

fn normal_part(jet: &Jet2, v: Vec4) -> Vec4 {
    let n = v - tangent_projection(jet, v);
    // one correction pass against cancellation
    n - tangent_projection(jet, n)
}

/// Orthonormal frame at a jet according to `policy`; `e₄ = e₁ × e₂ × e₃`.
pub fn adapted_frame(jet: &Jet2, policy: FramePolicy, tol: f64) -> Result<AdaptedFrame> {
    let (e1, e3) = match policy {
        FramePolicy::PositionAdapted => {
            let scale = tol * (1.0 + jet.x.norm());
            let xt = tangent_projection(jet, jet.x);
            let xp = normal_part(jet, jet.x);
            // report with the parameter values unknown at this level
            if xt.norm() <= scale {
                return Err(GeomError::TangentialComponentVanishes { s: f64::NAN, t: f64::NAN });
            }
            if xp.norm() <= scale {
                return Err(GeomError::NormalComponentVanishes { s: f64::NAN, t: f64::NAN });
            }
            (xt / xt.norm(), xp / xp.norm())
        }
        FramePolicy::CoordinateAdapted => {
            let mut best = Vec4::ZERO;
            for i in 0..4 {
                let n = normal_part(jet, Vec4::basis(i));
                if n.norm_squared() > best.norm_squared() * (1.0 + 1e-12) {
                    best = n;
                }
            }
            (jet.x_s / jet.x_s.norm(), best / best.norm())
        }
        FramePolicy::Seeded(seed) => {
            let n = normal_part(jet, seed);
            if n.norm() <= tol * (1.0 + seed.norm()) {
                return Err(GeomError::DegenerateSpan { index: 2, residual: n.norm() });
            }
            (jet.x_s / jet.x_s.norm(), n / n.norm())
        }
    };
    let e2 = complete_tangent(jet, e1);
    let e4 = cross3(e1, e2, e3);
    Ok(AdaptedFrame { e1, e2, e3, e4 })
}

/// Frame with prescribed unit tangent `e1` and unit normal `e3`.
pub fn frame_with_tangent(jet: &Jet2, e1: Vec4, e3: Vec4) -> AdaptedFrame {
    let e2 = complete_tangent(jet, e1);
    AdaptedFrame { e1, e2, e3, e4: cross3(e1, e2, e3) }
}

/// Coordinate coefficients `(aᵢ, bᵢ)` of `e₁` and `e₂`.
pub fn frame_coefficients(jet: &Jet2, frame: &AdaptedFrame) -> [(f64, f64); 2] {
    [tangent_coefficients(jet, frame.e1), tangent_coefficients(jet, frame.e2)]
}

/// Second fundamental form and curvatures from a jet and an orthonormal frame.
pub fn second_form(jet: &Jet2, frame: &AdaptedFrame) -> FundamentalData {
    let (e, f, g) = first_form(jet);
    let [(a1, b1), (a2, b2)] = frame_coefficients(jet, frame);
    let d2 = |ai: f64, bi: f64, aj: f64, bj: f64| jet.x_ss * (ai * aj) + jet.x_st * (ai * bj + bi * aj) + jet.x_tt * (bi * bj);
    let (v11, v12, v22) = (d2(a1, b1, a1, b1), d2(a1, b1, a2, b2), d2(a2, b2, a2, b2));
    let s3 = SymOp2::new(v11.dot(frame.e3), v12.dot(frame.e3), v22.dot(frame.e3));
    let s4 = SymOp2::new(v11.dot(frame.e4), v12.dot(frame.e4), v22.dot(frame.e4));
    let mean = frame.e3 * (0.5 * s3.trace()) + frame.e4 * (0.5 * s4.trace());
    let k = s3.det() + s4.det();
    FundamentalData {
        E: e,
        F: f,
        G: g,
        h3_11: s3.a11,
        h3_12: s3.a12,
        h3_22: s3.a22,
        h4_11: s4.a11,
        h4_12: s4.a12,
        h4_22: s4.a22,
        S3: s3,
        S4: s4,
        H: mean,
        K: k,
        m: math::sqrt(g),
    }
}

/// `(h³₁₂, h⁴₁₂)`, the mixed coefficients whose vanishing makes `e₁` principal.
pub fn shape_operator_offdiagonals(jet: &Jet2, frame: &AdaptedFrame) -> (f64, f64) {
    let d = second_form(jet, frame);
    (d.h3_12, d.h4_12)
}

/// Jet and frame at `(s, t)`; parameter values are filled into vanishing-component errors.
pub fn frame_at(patch: &ImmersionPatch, s: f64, t: f64, policy: FramePolicy, numerics: &Numerics) -> Result<(Jet2, AdaptedFrame)> {
    let jet = jet2(patch, s, t, numerics.jets)?;
    let frame = adapted_frame(&jet, policy, numerics.tol).map_err(|e| match e {
        GeomError::TangentialComponentVanishes { .. } => GeomError::TangentialComponentVanishes { s, t },
        GeomError::NormalComponentVanishes { .. } => GeomError::NormalComponentVanishes { s, t },
        other => other,
    })?;
    Ok((jet, frame))
}

/// Full pointwise package: jet, frame and fundamental data.
pub fn fundamental_at(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    policy: FramePolicy,
    numerics: &Numerics,
) -> Result<(Jet2, AdaptedFrame, FundamentalData)> {
    let (jet, frame) = frame_at(patch, s, t, policy, numerics)?;
    Ok((jet, frame, second_form(&jet, &frame)))
}

/// Ambient derivatives `(∂_s e_k, ∂_t e_k)` of the frame field.
fn frame_partials(patch: &ImmersionPatch, s: f64, t: f64, policy: FramePolicy, numerics: &Numerics) -> Result<([Vec4; 4], [Vec4; 4])> {
    let provider = |a: f64, b: f64| frame_at(patch, a, b, policy, numerics).map(|(_, f)| f.as_array());
    let ds = frame_field_derivative(provider, s, t, Axis::S, numerics.fields, &patch.domain)?;
    let dt = frame_field_derivative(provider, s, t, Axis::T, numerics.fields, &patch.domain)?;
    Ok((ds, dt))
}

type FrameTable = [[[f64; 4]; 4]; 2];

/// `⟨∂_{eᵢ} e_k, e_l⟩` for all `i ∈ {1,2}`, `k, l ∈ {1..4}` (zero-based indices).
fn frame_derivative_table(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    policy: FramePolicy,
    numerics: &Numerics,
) -> Result<(Jet2, AdaptedFrame, FrameTable)> {
    let (jet, frame) = frame_at(patch, s, t, policy, numerics)?;
    let (ds, dt) = frame_partials(patch, s, t, policy, numerics)?;
    let coeffs = frame_coefficients(&jet, &frame);
    let basis = frame.as_array();
    let mut table = [[[0.0; 4]; 4]; 2];
    for (i, &(a, b)) in coeffs.iter().enumerate() {
        for k in 0..4 {
            let d = ds[k] * a + dt[k] * b;
            for l in 0..4 {
                table[i][k][l] = d.dot(basis[l]);
            }
        }
    }
    Ok((jet, frame, table))
}

/// `ω(∂s), ω(∂t)` at a point.
fn omega_coordinate(patch: &ImmersionPatch, s: f64, t: f64, policy: FramePolicy, numerics: &Numerics) -> Result<[f64; 2]> {
    let (_, frame) = frame_at(patch, s, t, policy, numerics)?;
    let (ds, dt) = frame_partials(patch, s, t, policy, numerics)?;
    Ok([ds[2].dot(frame.e4), dt[2].dot(frame.e4)])
}

/// Tangent and normal connection at `(s, t)` by frame differencing.
pub fn normal_connection(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    policy: FramePolicy,
    numerics: &Numerics,
) -> Result<ConnectionData> {
    let (jet, frame, table) = frame_derivative_table(patch, s, t, policy, numerics)?;
    let data = second_form(&jet, &frame);
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for (i, gi) in gamma.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            for (l, g) in gij.iter_mut().enumerate() {
                *g = table[i][j][l];
            }
        }
    }
    let omega = [table[0][2][3], table[1][2][3]];
    let rd = data.S3.commutator_21(&data.S4);
    let f = |a: f64, b: f64| omega_coordinate(patch, a, b, policy, numerics);
    let d_s = partial(f, s, t, Axis::S, numerics.fields, &patch.domain)?;
    let d_t = partial(f, s, t, Axis::T, numerics.fields, &patch.domain)?;
    let curl = d_s[1] - d_t[0];
    let [(a1, b1), (a2, b2)] = frame_coefficients(&jet, &frame);
    let rd_exterior = (a1 * b2 - a2 * b1) * curl;
    Ok(ConnectionData { gamma, omega, rd, rd_exterior })
}

/// Largest component of `(∇_X h)(Y, Z) − (∇_Y h)(X, Z)` over frame vectors.
///
/// The coordinate tensor `h(∂_j, ∂_k) = (x_jk)^⊥` is differenced along the
/// coordinate directions; it stays smooth where the frame coefficients of `h`
/// blow up (near a degenerate coordinate line). The antisymmetric result is
/// then expressed in the adapted frame.
pub fn codazzi_residual(patch: &ImmersionPatch, s: f64, t: f64, policy: FramePolicy, numerics: &Numerics) -> Result<f64> {
    let (jet, frame) = frame_at(patch, s, t, policy, numerics)?;
    let normal = |j: &Jet2, v: Vec4| v - tangent_projection(j, v);
    let field = |a: f64, b: f64| -> Result<[Vec4; 3]> {
        let j = jet2(patch, a, b, numerics.jets)?;
        Ok([normal(&j, j.x_ss), normal(&j, j.x_st), normal(&j, j.x_tt)])
    };
    let d_s = partial(field, s, t, Axis::S, numerics.fields, &patch.domain)?;
    let d_t = partial(field, s, t, Axis::T, numerics.fields, &patch.domain)?;
    let second = [[jet.x_ss, jet.x_st], [jet.x_st, jet.x_tt]];
    let h = |j: usize, k: usize| normal(&jet, second[j][k]);
    let dh = |i: usize, j: usize, k: usize| [d_s, d_t][i][j + k];
    // (∇_i h)(∂_j, ∂_k) = D_i h(∂_j, ∂_k) − h(∇_i ∂_j, ∂_k) − h(∂_j, ∇_i ∂_k)
    let nabla_h = |i: usize, j: usize, k: usize| -> Vec4 {
        let (g_ij_s, g_ij_t) = tangent_coefficients(&jet, second[i][j]);
        let (g_ik_s, g_ik_t) = tangent_coefficients(&jet, second[i][k]);
        dh(i, j, k) - h(0, k) * g_ij_s - h(1, k) * g_ij_t - h(j, 0) * g_ik_s - h(j, 1) * g_ik_t
    };
    // C(∂_s, ∂_t, ∂_k), projected to the normal plane
    let c = [0, 1].map(|k| normal(&jet, nabla_h(0, 1, k) - nabla_h(1, 0, k)));
    let [(a1, b1), (a2, b2)] = frame_coefficients(&jet, &frame);
    let det = a1 * b2 - a2 * b1;
    let mut worst = 0.0_f64;
    for (a, b) in [(a1, b1), (a2, b2)] {
        let v = (c[0] * a + c[1] * b) * det;
        worst = worst.max(v.dot(frame.e3).abs()).max(v.dot(frame.e4).abs());
    }
    Ok(worst)
}

/// Gaussian curvature of the induced metric alone, by the Brioschi formula on
/// differenced `E`, `F`, `G`.
pub fn intrinsic_curvature(patch: &ImmersionPatch, s: f64, t: f64, numerics: &Numerics) -> Result<f64> {
    let stencil = numerics.fields;
    let d = &patch.domain;
    let efg = |a: f64, b: f64| -> Result<[f64; 3]> {
        let (e, f, g) = first_form(&jet2(patch, a, b, numerics.jets)?);
        Ok([e, f, g])
    };
    let ds = |a: f64, b: f64| partial(efg, a, b, Axis::S, stencil, d);
    let dt = |a: f64, b: f64| partial(efg, a, b, Axis::T, stencil, d);
    let [e, f, g] = efg(s, t)?;
    let [e_s, f_s, g_s] = ds(s, t)?;
    let [e_t, f_t, g_t] = dt(s, t)?;
    let [_, f_st, _] = partial(dt, s, t, Axis::S, stencil, d)?;
    let [e_tt, _, _] = partial(dt, s, t, Axis::T, stencil, d)?;
    let [_, _, g_ss] = partial(ds, s, t, Axis::S, stencil, d)?;

    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [
        [-0.5 * e_tt + f_st - 0.5 * g_ss, 0.5 * e_s, f_s - 0.5 * e_t],
        [f_t - 0.5 * g_s, e, f],
        [0.5 * g_t, f, g],
    ];
    let b = [[0.0, 0.5 * e_t, 0.5 * g_s], [0.5 * e_t, e, f], [0.5 * g_s, f, g]];
    let w = e * g - f * f;
    Ok((det3(a) - det3(b)) / (w * w))
}

/// `(K from the Gauss equation, K from the metric)`.
pub fn gauss_curvatures(patch: &ImmersionPatch, s: f64, t: f64, policy: FramePolicy, numerics: &Numerics) -> Result<(f64, f64)> {
    let (_, _, data) = fundamental_at(patch, s, t, policy, numerics)?;
    Ok((data.K, intrinsic_curvature(patch, s, t, numerics)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid4::Mat4;
    use crate::families::{self, SlopeProfile};
    use crate::jets::{DiffScheme, Domain, Stencil};
    use core::f64::consts::{FRAC_PI_3, PI};

    fn plane() -> ImmersionPatch {
        ImmersionPatch::from_fns(
            |s, t| Vec4::new(s, t, 0.0, 0.0),
            |s, t| Jet2 {
                x: Vec4::new(s, t, 0.0, 0.0),
                x_s: Vec4::basis(0),
                x_t: Vec4::basis(1),
                x_ss: Vec4::ZERO,
                x_st: Vec4::ZERO,
                x_tt: Vec4::ZERO,
            },
            Domain::new(-2.0, 2.0, -2.0, 2.0).unwrap(),
            "plane",
        )
    }

    fn flat_torus() -> ImmersionPatch {
        families::trivial_cases(families::TrivialKind::CenteredSphere { radius: 1.0 }).unwrap()
    }

    /// Generic graph `(s, t, s²t/2 + sin t, st² − s³/3)` with nonzero normal curvature.
    fn generic_graph() -> ImmersionPatch {
        let jet = |s: f64, t: f64| Jet2 {
            x: Vec4::new(s, t, 0.5 * s * s * t + math::sin(t), s * t * t - s * s * s / 3.0),
            x_s: Vec4::new(1.0, 0.0, s * t, t * t - s * s),
            x_t: Vec4::new(0.0, 1.0, 0.5 * s * s + math::cos(t), 2.0 * s * t),
            x_ss: Vec4::new(0.0, 0.0, t, -2.0 * s),
            x_st: Vec4::new(0.0, 0.0, s, 2.0 * t),
            x_tt: Vec4::new(0.0, 0.0, -math::sin(t), 2.0 * s),
        };
        ImmersionPatch::from_fns(move |s, t| jet(s, t).x, jet, Domain::new(-1.0, 1.0, -1.0, 1.0).unwrap(), "graph")
    }

    #[test]
    fn first_form_examples() {
        let j = jet2(&plane(), 0.2, 0.3, DiffScheme::Analytic).unwrap();
        assert_eq!(first_form(&j), (1.0, 0.0, 1.0));
        let p = families::css_example_default(FRAC_PI_3).unwrap();
        let (e, f, _) = first_form(&jet2(&p, 1.5, 0.4, DiffScheme::Analytic).unwrap());
        assert!((e - 4.0).abs() < 1e-12 && f.abs() < 1e-12);
        let q = families::gcr_example_default(SlopeProfile::polylog(1.0, 0.0, 0.0)).unwrap();
        let (e, _, _) = first_form(&jet2(&q, 1.0, 0.3, DiffScheme::Central(1e-4)).unwrap());
        assert!((e - 2.0).abs() < 1e-7);
    }

    #[test]
    fn position_frame_on_css() {
        let p = families::css_example_default(FRAC_PI_3).unwrap();
        let (jet, fr) = frame_at(&p, 2.0, 0.7, FramePolicy::PositionAdapted, &Numerics::default()).unwrap();
        assert!(fr.orthonormality_defect() < 1e-12);
        assert!((jet.x.dot(fr.e1) - 1.0).abs() < 1e-12);
        assert!((jet.x.dot(fr.e3) - 2.0 * math::sin(FRAC_PI_3)).abs() < 1e-12);
        let d = second_form(&jet, &fr);
        assert!((d.h3_11 + 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_has_no_tangential_component() {
        let err = frame_at(&flat_torus(), 1.0, 1.0, FramePolicy::PositionAdapted, &Numerics::default()).unwrap_err();
        assert_eq!(err, GeomError::TangentialComponentVanishes { s: 1.0, t: 1.0 });
    }

    #[test]
    fn plane_is_totally_geodesic() {
        let j = jet2(&plane(), 0.5, -0.5, DiffScheme::Analytic).unwrap();
        let fr = adapted_frame(&j, FramePolicy::CoordinateAdapted, 1e-9).unwrap();
        let d = second_form(&j, &fr);
        assert_eq!(d.max_abs_h(), 0.0);
        assert_eq!(d.K, 0.0);
        assert_eq!(d.H, Vec4::ZERO);
        let c = normal_connection(&plane(), 0.5, -0.5, FramePolicy::CoordinateAdapted, &Numerics::default()).unwrap();
        assert!(c.omega[0].abs() < 1e-12 && c.omega[1].abs() < 1e-12);
        let r = codazzi_residual(&plane(), 0.5, -0.5, FramePolicy::CoordinateAdapted, &Numerics::default()).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn flat_torus_has_zero_curvature() {
        let n = Numerics::default();
        let (_, _, d) = fundamental_at(&flat_torus(), 1.0, 2.0, FramePolicy::CoordinateAdapted, &n).unwrap();
        assert!(d.K.abs() < 1e-12);
        assert!(intrinsic_curvature(&flat_torus(), 1.0, 2.0, &n).unwrap().abs() < 1e-8);
    }

    #[test]
    fn h_and_s_duality() {
        let p = families::gcr_example_default(SlopeProfile::polylog(0.3, 0.2, 0.1)).unwrap();
        let (jet, fr, d) = fundamental_at(&p, 1.3, 2.0, FramePolicy::CoordinateAdapted, &Numerics::default()).unwrap();
        let [(a1, b1), (a2, b2)] = frame_coefficients(&jet, &fr);
        let dir = [(a1, b1), (a2, b2)];
        for i in 0..2 {
            for j in 0..2 {
                let (ai, bi) = dir[i];
                let (aj, bj) = dir[j];
                let v = jet.x_ss * (ai * aj) + jet.x_st * (ai * bj + bi * aj) + jet.x_tt * (bi * bj);
                let ei = if j == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                let s3 = d.S3.apply(ei);
                let s4 = d.S4.apply(ei);
                assert!((v.dot(fr.e3) - s3[i]).abs() < 1e-10);
                assert!((v.dot(fr.e4) - s4[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn css_connection_is_normal_flat_and_parallel() {
        let p = families::css_example_default(FRAC_PI_3).unwrap();
        let c = normal_connection(&p, 1.5, 1.0, FramePolicy::PositionAdapted, &Numerics::default()).unwrap();
        assert!(c.omega[0].abs() < 1e-8 && c.omega[1].abs() < 1e-8, "{:?}", c.omega);
        assert!(c.rd.abs() < 1e-10);
        assert!(c.skew_defect() < 1e-8);
    }

    #[test]
    fn ricci_matches_exterior_derivative() {
        let g = generic_graph();
        let n = Numerics::default();
        for &(s, t) in &[(0.2, 0.3), (-0.4, 0.5), (0.5, -0.3)] {
            let c = normal_connection(&g, s, t, FramePolicy::Seeded(Vec4::new(0.0, 0.0, 1.0, 0.2)), &n).unwrap();
            assert!(c.rd.abs() > 1e-3, "test surface should have curved normal bundle");
            assert!((c.rd - c.rd_exterior).abs() < 1e-6, "{} vs {}", c.rd, c.rd_exterior);
        }
        let q = families::gcr_example_default(SlopeProfile::polylog(0.0, 1.0, 0.0)).unwrap();
        let c = normal_connection(&q, 1.3, 0.8, FramePolicy::PositionAdapted, &n).unwrap();
        assert!((c.rd - c.rd_exterior).abs() < 1e-4);
    }

    #[test]
    fn codazzi_on_generic_graph() {
        let g = generic_graph();
        let r = codazzi_residual(&g, 0.1, 0.2, FramePolicy::Seeded(Vec4::new(0.0, 0.0, 1.0, 0.2)), &Numerics::default()).unwrap();
        assert!(r < 1e-8, "{r:e}");
    }

    #[test]
    fn codazzi_converges_at_second_order() {
        let g = generic_graph();
        let pol = FramePolicy::Seeded(Vec4::new(0.0, 0.0, 1.0, 0.2));
        let base = Numerics::default().with_jets(DiffScheme::Analytic);
        let r = |h: f64| codazzi_residual(&g, 0.1, 0.2, pol, &base.with_fields(Stencil::Central(h))).unwrap();
        let ratio = r(2e-2) / r(1e-2);
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gauss_equation_on_generic_graph() {
        let g = generic_graph();
        let (ext, int) = gauss_curvatures(&g, 0.3, -0.2, FramePolicy::CoordinateAdapted, &Numerics::default()).unwrap();
        assert!((ext - int).abs() < 1e-6, "{ext} vs {int}");
    }

    #[test]
    fn cylinder_off_diagonal_nonzero() {
        let c = families::off_origin_cylinder();
        let (jet, fr) = frame_at(&c, 0.5, 1.0, FramePolicy::PositionAdapted, &Numerics::default()).unwrap();
        let (a, b) = shape_operator_offdiagonals(&jet, &fr);
        assert!(a.abs().max(b.abs()) > 1e-3);
    }

    #[test]
    fn frame_is_rotation_covariant() {
        let p = families::gcr_example_default(SlopeProfile::polylog(1.0, 0.0, 0.0)).unwrap();
        let rot = Mat4::rotation_from_seeds(
            [Vec4::new(0.3, 1.0, -0.2, 0.5), Vec4::new(1.0, -0.4, 0.1, 0.2), Vec4::new(0.0, 0.3, 1.0, -0.7), Vec4::new(0.2, 0.2, 0.2, 1.0)],
            1e-12,
        )
        .unwrap();
        let q = p.transformed(rot, 1.0);
        let n = Numerics::default();
        let (_, f) = frame_at(&p, 1.2, 0.4, FramePolicy::PositionAdapted, &n).unwrap();
        let (_, g) = frame_at(&q, 1.2, 0.4, FramePolicy::PositionAdapted, &n).unwrap();
        for (u, v) in f.as_array().iter().zip(g.as_array().iter()) {
            assert!(rot.apply(*u).distance(*v) < 1e-10);
        }
    }

    #[test]
    fn hyperplane_patch_has_zero_omega() {
        let p = families::trivial_cases(families::TrivialKind::Hyperplane { plane_normal: Vec4::basis(3), radius: 0.6 }).unwrap();
        let c = normal_connection(&p, 1.0, PI, FramePolicy::Seeded(Vec4::basis(3)), &Numerics::default()).unwrap();
        assert!(c.omega[0].abs() < 1e-10 && c.omega[1].abs() < 1e-10);
    }
}
