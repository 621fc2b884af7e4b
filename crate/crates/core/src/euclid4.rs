//! Fixed-size linear algebra for E⁴ and for symmetric operators on a tangent plane.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::math;
use crate::GeomError;

/// A point or vector of Euclidean 4-space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec4(pub [f64; 4]);

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0.0; 4]);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4([x1, x2, x3, x4])
    }

    /// The `i`-th canonical basis vector (zero-based).
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Vec4(v)
    }

    #[inline]
    pub fn dot(self, other: Vec4) -> f64 {
        dot(self, other)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    /// Unit vector along `self`, or `None` when the norm is at most `tol`.
    pub fn normalized(self, tol: f64) -> Option<Vec4> {
        let n = self.norm();
        (n > tol).then(|| self / n)
    }

    /// Component of `self` orthogonal to the unit vector `unit`.
    pub fn reject(self, unit: Vec4) -> Vec4 {
        self - unit * self.dot(unit)
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn distance(self, other: Vec4) -> f64 {
        (self - other).norm()
    }
}

/// Canonical inner product `Σ vᵢwᵢ`.
#[inline]
pub fn dot(v: Vec4, w: Vec4) -> f64 {
    v.0[0] * w.0[0] + v.0[1] * w.0[1] + v.0[2] * w.0[2] + v.0[3] * w.0[3]
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4(core::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        *self = *self + o;
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4(core::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl SubAssign for Vec4 {
    fn sub_assign(&mut self, o: Vec4) {
        *self = *self - o;
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4(self.0.map(|v| -v))
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, k: f64) -> Vec4 {
        Vec4(self.0.map(|v| v * k))
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

impl Div<f64> for Vec4 {
    type Output = Vec4;
    fn div(self, k: f64) -> Vec4 {
        Vec4(self.0.map(|v| v / k))
    }
}

/// Orthonormalizes `vectors` in order with modified Gram–Schmidt and one
/// reorthogonalization pass. The first output is parallel to the first input.
pub fn gram_schmidt(vectors: &[Vec4], tol: f64) -> Result<Vec<Vec4>, GeomError> {
    let mut out: Vec<Vec4> = Vec::with_capacity(vectors.len());
    for (index, &v) in vectors.iter().enumerate() {
        let mut w = v;
        for _pass in 0..2 {
            for q in &out {
                w = w - *q * w.dot(*q);
            }
        }
        let residual = w.norm();
        if residual < tol {
            return Err(GeomError::DegenerateSpan { index, residual });
        }
        out.push(w / residual);
    }
    Ok(out)
}

/// Determinant of the 4×4 matrix with the given columns.
pub fn det4(a: Vec4, b: Vec4, c: Vec4, d: Vec4) -> f64 {
    Mat4::from_columns([a, b, c, d]).det()
}

/// The vector `n` with `⟨n, v⟩ = det[a, b, c, v]` for every `v`.
///
/// For orthonormal `a, b, c` this is the unit vector completing them to a
/// positively oriented basis, and it commutes with rotations.
pub fn cross3(a: Vec4, b: Vec4, c: Vec4) -> Vec4 {
    Vec4(core::array::from_fn(|i| det4(a, b, c, Vec4::basis(i))))
}

/// A 4×4 matrix stored by rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub fn from_columns(cols: [Vec4; 4]) -> Mat4 {
        Mat4(core::array::from_fn(|r| core::array::from_fn(|c| cols[c].0[r])))
    }

    pub fn from_rows(rows: [Vec4; 4]) -> Mat4 {
        Mat4(rows.map(|r| r.0))
    }

    pub fn column(&self, c: usize) -> Vec4 {
        Vec4(core::array::from_fn(|r| self.0[r][c]))
    }

    pub fn transpose(&self) -> Mat4 {
        Mat4(core::array::from_fn(|r| core::array::from_fn(|c| self.0[c][r])))
    }

    pub fn apply(&self, v: Vec4) -> Vec4 {
        Vec4(core::array::from_fn(|r| dot(Vec4(self.0[r]), v)))
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        Mat4(core::array::from_fn(|r| {
            core::array::from_fn(|c| (0..4).map(|k| self.0[r][k] * other.0[k][c]).sum())
        }))
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        let minor = |r0: usize, r1: usize, r2: usize, c0: usize, c1: usize, c2: usize| {
            m[r0][c0] * (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1])
                - m[r0][c1] * (m[r1][c0] * m[r2][c2] - m[r1][c2] * m[r2][c0])
                + m[r0][c2] * (m[r1][c0] * m[r2][c1] - m[r1][c1] * m[r2][c0])
        };
        m[0][0] * minor(1, 2, 3, 1, 2, 3) - m[0][1] * minor(1, 2, 3, 0, 2, 3)
            + m[0][2] * minor(1, 2, 3, 0, 1, 3)
            - m[0][3] * minor(1, 2, 3, 0, 1, 2)
    }

    /// Max-abs deviation of `MᵀM` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.transpose().mul(self);
        let mut worst = 0.0_f64;
        for r in 0..4 {
            for c in 0..4 {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g.0[r][c] - target).abs());
            }
        }
        worst
    }

    /// Rotation in SO(4) obtained by orthonormalizing four seed columns and
    /// flipping the last column if needed to make the determinant positive.
    pub fn rotation_from_seeds(seeds: [Vec4; 4], tol: f64) -> Result<Mat4, GeomError> {
        let q = gram_schmidt(&seeds, tol)?;
        let mut cols = [q[0], q[1], q[2], q[3]];
        if det4(cols[0], cols[1], cols[2], cols[3]) < 0.0 {
            cols[3] = -cols[3];
        }
        Ok(Mat4::from_columns(cols))
    }
}

/// Symmetric operator on a 2-dimensional tangent plane, written in an
/// orthonormal frame `{e₁, e₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymOp2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

/// Eigen-decomposition of a [`SymOp2`]: ascending eigenvalues and the matching
/// orthonormal eigenvectors (components in the frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

impl SymOp2 {
    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        SymOp2 { a11, a12, a22 }
    }

    pub fn diag(a11: f64, a22: f64) -> Self {
        SymOp2 { a11, a12: 0.0, a22 }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.a11 * self.a11 + 2.0 * self.a12 * self.a12 + self.a22 * self.a22)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a22.abs())
    }

    pub fn scaled(&self, k: f64) -> SymOp2 {
        SymOp2::new(self.a11 * k, self.a12 * k, self.a22 * k)
    }

    pub fn plus(&self, o: &SymOp2) -> SymOp2 {
        SymOp2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    /// `⟨[A, B] e₁, e₂⟩`, the only independent entry of the (skew) commutator.
    pub fn commutator_21(&self, other: &SymOp2) -> f64 {
        // (AB - BA)_{21}
        let ab21 = self.a12 * other.a11 + self.a22 * other.a12;
        let ba21 = other.a12 * self.a11 + other.a22 * self.a12;
        ab21 - ba21
    }

    /// True when the eigenvalues coincide to `1e-9·(1 + |λ₁| + |λ₂|)`.
    pub fn is_umbilic(&self) -> bool {
        let e = eig_sym2(*self);
        (e.values[1] - e.values[0]).abs()
            < 1e-9 * (1.0 + e.values[0].abs() + e.values[1].abs())
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric 2×2
/// operator. Eigenvalue gaps below `1e-12` return the frame axes.
pub fn eig_sym2(op: SymOp2) -> SymEigen {
    let mean = 0.5 * (op.a11 + op.a22);
    let half_diff = 0.5 * (op.a11 - op.a22);
    let radius = math::hypot(half_diff, op.a12);
    let values = [mean - radius, mean + radius];
    if 2.0 * radius < 1e-12 {
        return SymEigen { values, vectors: [[1.0, 0.0], [0.0, 1.0]] };
    }
    if op.a12 == 0.0 {
        let vectors = if op.a11 <= op.a22 { [[1.0, 0.0], [0.0, 1.0]] } else { [[0.0, 1.0], [1.0, 0.0]] };
        return SymEigen { values, vectors };
    }
    // Direction of the larger eigenvalue.
    let phi = 0.5 * math::atan2(op.a12, half_diff);
    let upper = canonical_sign([math::cos(phi), math::sin(phi)]);
    let lower = canonical_sign([-upper[1], upper[0]]);
    SymEigen { values, vectors: [lower, upper] }
}

fn canonical_sign(v: [f64; 2]) -> [f64; 2] {
    let flip = if v[0].abs() > 1e-15 { v[0] < 0.0 } else { v[1] < 0.0 };
    if flip {
        [-v[0], -v[1]]
    } else {
        v
    }
}
