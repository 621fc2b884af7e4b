//! Builds patches, grids and numerics from a [`RunConfig`].

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use e4surf_core::families::{self, SlopeProfile, SphereCurve, TrivialKind};
use e4surf_core::position::Grid;
use e4surf_core::{Domain, GeomError, ImmersionPatch, Mat4, Numerics, Vec4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{Builtin, RunConfig, SurfaceSpec};
use crate::error::ConfigError;

/// Amplitude of the bump in the perturbed builtin.
pub const PERTURBED_AMPLITUDE: f64 = 0.01;

const TWO_PI: f64 = 2.0 * PI;

/// A patch ready for analysis, with the grid and numerics it is evaluated with.
pub struct Setup {
    pub patch: ImmersionPatch,
    pub grid: Grid,
    pub numerics: Numerics,
}

fn surface_err(e: GeomError) -> ConfigError {
    ConfigError::Surface(format!("cannot build surface: {e}"))
}

fn curve(radius: f64, amplitude: f64) -> Result<SphereCurve, GeomError> {
    if amplitude > 0.0 {
        families::wobbly_on_s2(families::default_normal(), families::default_axis(), radius, amplitude)
    } else {
        families::circle_on_s2(families::default_normal(), families::default_axis(), radius)
    }
}

fn gcr(profile: SlopeProfile, radius: f64, amplitude: f64) -> Result<ImmersionPatch, GeomError> {
    let domain = Domain::new(0.5, 2.0, 0.0, TWO_PI)?;
    families::gcr_example_on(profile, families::default_normal(), curve(radius, amplitude)?, domain)
}

/// The untransformed patch and the parameter rectangle of its default grid.
fn base_patch(spec: SurfaceSpec) -> Result<(ImmersionPatch, Domain), GeomError> {
    let unit_s = Domain::new(1.0, 2.0, 0.0, TWO_PI)?;
    let short_s = Domain::new(1.0, 1.5, 0.0, TWO_PI)?;
    Ok(match spec {
        SurfaceSpec::Builtin(b) => match b {
            Builtin::CssPi3 => (families::css_example_default(FRAC_PI_3)?, unit_s),
            Builtin::CssPi4 => (families::css_example_default(FRAC_PI_4)?, unit_s),
            Builtin::CssPi6 => (families::css_example_default(FRAC_PI_6)?, unit_s),
            Builtin::GcrUEqS => (gcr(SlopeProfile::polylog(1.0, 0.0, 0.0), 0.5, 0.0)?, short_s),
            Builtin::GcrUEqS2 => (gcr(SlopeProfile::polylog(0.0, 1.0, 0.0), 0.5, 0.0)?, short_s),
            Builtin::GcrLog => (gcr(SlopeProfile::polylog(1.0, 0.0, 2.0), 0.5, 0.0)?, short_s),
            Builtin::Sphere => base_patch(SurfaceSpec::Sphere { radius: 1.0 })?,
            Builtin::Hyperplane => base_patch(SurfaceSpec::Hyperplane { radius: 0.5 })?,
            Builtin::Cylinder => base_patch(SurfaceSpec::Cylinder)?,
            Builtin::CssPi3Perturbed => {
                let p = families::perturbed(&families::css_example_default(FRAC_PI_3)?, PERTURBED_AMPLITUDE);
                (p, unit_s)
            }
        },
        SurfaceSpec::Css { theta, curve_radius, curve_amplitude } => {
            (families::css_example(theta, families::default_normal(), curve(curve_radius, curve_amplitude)?)?, unit_s)
        }
        SurfaceSpec::Gcr { linear, quadratic, log, curve_radius, curve_amplitude } => {
            (gcr(SlopeProfile::polylog(linear, quadratic, log), curve_radius, curve_amplitude)?, unit_s)
        }
        SurfaceSpec::Sphere { radius } => {
            let p = families::trivial_cases(TrivialKind::CenteredSphere { radius })?;
            let d = p.domain;
            (p, d)
        }
        SurfaceSpec::Hyperplane { radius } => {
            let p = families::trivial_cases(TrivialKind::Hyperplane { plane_normal: Vec4::basis(3), radius })?;
            (p, unit_s)
        }
        SurfaceSpec::Cylinder => {
            let p = families::off_origin_cylinder();
            let d = p.domain;
            (p, d)
        }
    })
}

/// Random rotation of E⁴ drawn from Gaussian seeds.
pub fn seeded_rotation(seed: u64) -> Mat4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut draw = || Vec4::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let seeds = [draw(), draw(), draw(), draw()];
        if let Ok(rot) = Mat4::rotation_from_seeds(seeds, 1e-8) {
            return rot;
        }
    }
}

pub fn build(cfg: &RunConfig) -> Result<Setup, ConfigError> {
    let (mut patch, default_grid) = base_patch(cfg.surface).map_err(surface_err)?;
    if cfg.perturbation > 0.0 {
        patch = families::perturbed(&patch, cfg.perturbation);
    }
    if cfg.rotation_seed.is_some() || cfg.scale != 1.0 {
        let rot = cfg.rotation_seed.map_or(Mat4::IDENTITY, seeded_rotation);
        patch = patch.transformed(rot, cfg.scale);
    }

    let g = &cfg.grid;
    let domain = Domain::new(
        g.s_min.unwrap_or(default_grid.s0),
        g.s_max.unwrap_or(default_grid.s1),
        g.t_min.unwrap_or(default_grid.t0),
        g.t_max.unwrap_or(default_grid.t1),
    )
    .map_err(|e| ConfigError::Surface(format!("invalid grid range: {e}")))?;
    let inside = domain.s0 >= patch.domain.s0 && domain.s1 <= patch.domain.s1 && domain.t0 >= patch.domain.t0 && domain.t1 <= patch.domain.t1;
    if !inside {
        let d = patch.domain;
        return Err(ConfigError::Surface(format!(
            "grid range [{}, {}] x [{}, {}] leaves the surface domain [{}, {}] x [{}, {}]",
            domain.s0, domain.s1, domain.t0, domain.t1, d.s0, d.s1, d.t0, d.t1
        )));
    }
    let grid = Grid::new(domain, g.n_s.unwrap_or(33), g.n_t.unwrap_or(33)).map_err(surface_err)?;

    let mut numerics = Numerics::for_patch(&patch).with_fields(cfg.fields);
    if let Some(j) = cfg.jets {
        if j.is_analytic() && !patch.has_analytic_jets() {
            return Err(ConfigError::Surface("scheme.jets = analytic but the surface has no analytic derivatives".into()));
        }
        numerics = numerics.with_jets(j);
    }
    numerics.tol = cfg.numeric_tol;
    Ok(Setup { patch, grid, numerics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for b in Builtin::ALL {
            let s = build(&RunConfig::new(SurfaceSpec::Builtin(b))).unwrap();
            assert_eq!(s.grid.len(), 33 * 33);
            assert!(s.patch.has_analytic_jets(), "{}", b.as_str());
        }
    }

    #[test]
    fn perturbed_builtin_has_no_profile() {
        let s = build(&RunConfig::new(SurfaceSpec::Builtin(Builtin::CssPi3Perturbed))).unwrap();
        assert!(s.patch.profile().is_none());
    }

    #[test]
    fn seeded_rotation_is_deterministic_and_special_orthogonal() {
        let r = seeded_rotation(7);
        assert_eq!(r, seeded_rotation(7));
        assert!(r.orthogonality_defect() < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_outside_domain_rejected() {
        let mut cfg = RunConfig::new(SurfaceSpec::Builtin(Builtin::CssPi3));
        cfg.grid.s_min = Some(0.1);
        assert!(matches!(build(&cfg), Err(ConfigError::Surface(_))));
    }

    #[test]
    fn invalid_family_parameters_are_config_errors() {
        let cfg = RunConfig::new(SurfaceSpec::Css { theta: 2.0, curve_radius: 1.0, curve_amplitude: 0.0 });
        assert!(matches!(build(&cfg), Err(ConfigError::Surface(_))));
        let cfg = RunConfig::new(SurfaceSpec::Css { theta: 0.5, curve_radius: 1.5, curve_amplitude: 0.0 });
        assert!(matches!(build(&cfg), Err(ConfigError::Surface(_))));
    }

    #[test]
    fn forced_numerical_jets() {
        let mut cfg = RunConfig::new(SurfaceSpec::Builtin(Builtin::GcrUEqS));
        cfg.jets = Some(e4surf_core::DiffScheme::Central(1e-4));
        assert_eq!(build(&cfg).unwrap().numerics.jets, e4surf_core::DiffScheme::Central(1e-4));
    }
}
