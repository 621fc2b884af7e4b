use core::fmt;

/// Everything that can go wrong while evaluating surface geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// A residual norm dropped below tolerance during orthogonalization.
    DegenerateSpan { index: usize, residual: f64 },
    /// The Gram determinant of `{x_s, x_t}` fell below tolerance.
    DegenerateImmersion { s: f64, t: f64, gram: f64 },
    /// A finite-difference stencil leaves the patch domain.
    StencilOutOfDomain { s: f64, t: f64 },
    /// Analytic jets were requested from a patch without derivative callbacks.
    NoAnalyticJets,
    /// A stencil frame points against the center frame.
    FrameFlip { vector: usize, correlation: f64 },
    TangentialComponentVanishes { s: f64, t: f64 },
    NormalComponentVanishes { s: f64, t: f64 },
    /// `‖x‖` below tolerance: the angle function is undefined.
    OriginPoint { s: f64, t: f64 },
    /// A grid point failed decomposition or hit a vanishing component.
    DegenerateGrid { s: f64, t: f64, reason: &'static str },
    /// Normal curvature does not vanish on the grid.
    NonFlatNormalBundle { max_normal_curvature: f64 },
    /// Integrating the normal connection along the two edge paths disagrees.
    PathDependence { discrepancy: f64 },
    InvalidRadius(f64),
    NonOrthonormalInputs,
    InvalidAngle(f64),
    /// `cos θ(s)` vanishes for a slope profile inside the domain.
    SingularProfile { s: f64 },
    /// A closed form is evaluated too close to a pole of `sec(Φ − u)`.
    NearSingularClosedForm { s: f64, t: f64 },
    CosThetaVanishes { s: f64 },
    /// Step-doubling local error estimate above the configured threshold.
    StepSizeTooLarge { s: f64, estimate: f64 },
    /// The closed-form fit deviates from the measured geometry.
    UnfitModel { residual: f64, threshold: f64 },
    InvalidGrid(&'static str),
    DegenerateProjection,
    InvalidParameter(&'static str),
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeomError::*;
        match self {
            DegenerateSpan { index, residual } => {
                write!(f, "degenerate span at vector {index} (residual norm {residual:e})")
            }
            DegenerateImmersion { s, t, gram } => {
                write!(f, "immersion is not regular at ({s}, {t}): Gram determinant {gram:e}")
            }
            StencilOutOfDomain { s, t } => write!(f, "stencil at ({s}, {t}) leaves the domain"),
            NoAnalyticJets => f.write_str("patch has no analytic derivative callbacks"),
            FrameFlip { vector, correlation } => {
                write!(f, "frame vector e{} flips across the stencil (correlation {correlation})", vector + 1)
            }
            TangentialComponentVanishes { s, t } => {
                write!(f, "tangential position component vanishes at ({s}, {t})")
            }
            NormalComponentVanishes { s, t } => {
                write!(f, "normal position component vanishes at ({s}, {t})")
            }
            OriginPoint { s, t } => write!(f, "patch passes through the origin at ({s}, {t})"),
            DegenerateGrid { s, t, reason } => write!(f, "degenerate grid point ({s}, {t}): {reason}"),
            NonFlatNormalBundle { max_normal_curvature } => {
                write!(f, "normal bundle is not flat (max |R^D| = {max_normal_curvature:e})")
            }
            PathDependence { discrepancy } => {
                write!(f, "normal frame transport is path dependent (discrepancy {discrepancy:e})")
            }
            InvalidRadius(r) => write!(f, "radius {r} outside (0, 1]"),
            NonOrthonormalInputs => f.write_str("input vectors are not orthonormal"),
            InvalidAngle(a) => write!(f, "angle {a} outside (0, pi/2)"),
            SingularProfile { s } => write!(f, "slope profile has cos(theta) = 0 at s = {s}"),
            NearSingularClosedForm { s, t } => {
                write!(f, "closed form evaluated near a pole of sec(Phi - u) at ({s}, {t})")
            }
            CosThetaVanishes { s } => write!(f, "cos(theta) vanishes at s = {s}"),
            StepSizeTooLarge { s, estimate } => {
                write!(f, "local error estimate {estimate:e} too large at s = {s}")
            }
            UnfitModel { residual, threshold } => {
                write!(f, "closed-form fit residual {residual:e} exceeds {threshold:e}")
            }
            InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            DegenerateProjection => f.write_str("projected mesh is degenerate"),
            InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for GeomError {}
