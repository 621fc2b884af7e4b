//! Property tests over random family parameters, sample points and rigid motions.

use std::f64::consts::PI;

use e4surf_core::families::{self, SlopeProfile};
use e4surf_core::position::{self, Grid};
use e4surf_core::surface::{self, FramePolicy};
use e4surf_core::{Domain, ImmersionPatch, Mat4, Numerics, Vec4};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-1.0..1.0_f64).prop_map(|[a, b, c, d]| Vec4::new(a, b, c, d))
}

fn rotation() -> impl Strategy<Value = Mat4> {
    prop::array::uniform4(vec4()).prop_filter_map("degenerate seeds", |seeds| Mat4::rotation_from_seeds(seeds, 1e-3).ok())
}

/// CSS over a wobbly latitude, or GCR with a small polynomial-log profile.
fn family_patch() -> impl Strategy<Value = ImmersionPatch> {
    let curve = (0.3..0.9_f64, 0.0..0.07_f64);
    prop_oneof![
        (0.2..1.3_f64, curve.clone()).prop_map(|(theta, (r, a))| {
            let c = families::wobbly_on_s2(families::default_normal(), families::default_axis(), r, a).unwrap();
            families::css_example(theta, families::default_normal(), c).unwrap()
        }),
        (0.2..1.0_f64, 0.0..0.3_f64, 0.0..0.5_f64, curve).prop_map(|(l, q, g, (r, a))| {
            let c = families::wobbly_on_s2(families::default_normal(), families::default_axis(), r, a).unwrap();
            let domain = Domain::new(0.5, 2.0, 0.0, 2.0 * PI).unwrap();
            families::gcr_example_on(SlopeProfile::polylog(l, q, g), families::default_normal(), c, domain).unwrap()
        }),
    ]
}

/// Points away from the lines where the family degenerates.
fn sample_point() -> impl Strategy<Value = (f64, f64)> {
    (1.15..1.45_f64, 0.1..6.1_f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adapted_frame_is_orthonormal(patch in family_patch(), (s, t) in sample_point()) {
        let n = Numerics::default();
        for policy in [FramePolicy::PositionAdapted, FramePolicy::CoordinateAdapted] {
            let (_, frame) = surface::frame_at(&patch, s, t, policy, &n).unwrap();
            prop_assert!(frame.orthonormality_defect() < 1e-10);
        }
    }

    #[test]
    fn shape_operators_match_second_form(patch in family_patch(), (s, t) in sample_point()) {
        let (jet, frame, d) = surface::fundamental_at(&patch, s, t, FramePolicy::PositionAdapted, &Numerics::default()).unwrap();
        let e = frame.as_array();
        // ⟨S_β eᵢ, eⱼ⟩ = ⟨x_ij-part along e_β⟩ recomputed from the coordinate hessian
        let [(a1, b1), (a2, b2)] = surface::frame_coefficients(&jet, &frame);
        let hess = |(ai, bi): (f64, f64), (aj, bj): (f64, f64)| {
            jet.x_ss * (ai * aj) + jet.x_st * (ai * bj + bi * aj) + jet.x_tt * (bi * bj)
        };
        for (beta, op) in [(2usize, d.S3), (3, d.S4)] {
            prop_assert!((hess((a1, b1), (a1, b1)).dot(e[beta]) - op.a11).abs() < 1e-9 * (1.0 + op.a11.abs()));
            prop_assert!((hess((a1, b1), (a2, b2)).dot(e[beta]) - op.a12).abs() < 1e-9 * (1.0 + op.a12.abs()));
            prop_assert!((hess((a2, b2), (a2, b2)).dot(e[beta]) - op.a22).abs() < 1e-9 * (1.0 + op.a22.abs()));
        }
    }

    #[test]
    fn position_frame_diagonalizes_both_shape_operators(patch in family_patch(), (s, t) in sample_point()) {
        let (_, _, d) = surface::fundamental_at(&patch, s, t, FramePolicy::PositionAdapted, &Numerics::default()).unwrap();
        prop_assert!(d.h3_12.abs() < 1e-9 * (1.0 + d.max_abs_h()));
        prop_assert!(d.h4_12.abs() < 1e-9 * (1.0 + d.max_abs_h()));
    }

    #[test]
    fn structure_equations_hold(patch in family_patch(), (s, t) in sample_point()) {
        let n = Numerics::default();
        let conn = surface::normal_connection(&patch, s, t, FramePolicy::PositionAdapted, &n).unwrap();
        prop_assert!((conn.rd - conn.rd_exterior).abs() < 1e-6);
        prop_assert!(surface::codazzi_residual(&patch, s, t, FramePolicy::PositionAdapted, &n).unwrap() < 1e-7);
        let (ext, int) = surface::gauss_curvatures(&patch, s, t, FramePolicy::PositionAdapted, &n).unwrap();
        prop_assert!((ext - int).abs() < 1e-5 * (1.0 + ext.abs()));
    }

    #[test]
    fn angle_function_follows_profile(patch in family_patch(), (s, t) in sample_point()) {
        let d = position::decompose_at(&patch, s, t, &Numerics::default()).unwrap();
        let profile = patch.profile().unwrap();
        prop_assert!((d.mu - s).abs() < 1e-12);
        prop_assert!((d.theta - profile.theta(s)).abs() < 1e-9);
        prop_assert!((d.x_t.norm() - d.mu * d.theta.cos()).abs() < 1e-12);
        prop_assert!((d.x_perp.norm() - d.mu * d.theta.sin()).abs() < 1e-12);
    }

    #[test]
    fn invariants_survive_rigid_motions_and_dilations(
        patch in family_patch(),
        (s, t) in sample_point(),
        rot in rotation(),
        scale in 0.2..5.0_f64,
    ) {
        let n = Numerics::default();
        let moved = patch.transformed(rot, scale);
        let (_, _, a) = surface::fundamental_at(&patch, s, t, FramePolicy::PositionAdapted, &n).unwrap();
        let (_, _, b) = surface::fundamental_at(&moved, s, t, FramePolicy::PositionAdapted, &n).unwrap();
        prop_assert!((b.K * scale * scale - a.K).abs() < 1e-9 * (1.0 + a.K.abs()));
        prop_assert!((b.H.norm() * scale - a.H.norm()).abs() < 1e-9 * (1.0 + a.H.norm()));
        let (da, db) = (position::decompose_at(&patch, s, t, &n).unwrap(), position::decompose_at(&moved, s, t, &n).unwrap());
        prop_assert!((da.theta - db.theta).abs() < 1e-10);
        prop_assert!((db.mu - scale * da.mu).abs() < 1e-10 * scale * da.mu);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn wobbly_css_is_recognized(theta in 0.3..1.2_f64, r in 0.4..0.9_f64, a in 0.0..0.07_f64) {
        let c = families::wobbly_on_s2(families::default_normal(), families::default_axis(), r, a).unwrap();
        let patch = families::css_example(theta, families::default_normal(), c).unwrap();
        let n = Numerics::default();
        let grid = Grid::new(Domain::new(1.0, 2.0, 0.0, 2.0 * PI).unwrap(), 9, 9).unwrap();
        let v = position::is_css(&patch, &grid, position::default_class_tol(&n), &n).unwrap();
        prop_assert!(v.holds);
        prop_assert!((v.witness.unwrap().angle - theta).abs() < 1e-6);
        prop_assert!(position::is_gcr(&patch, &grid, position::default_class_tol(&n), &n).unwrap().holds);
    }
}
