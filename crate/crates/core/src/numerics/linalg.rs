//! Fixed-size real 3-vectors, 3×3 real matrices and 2×2 complex matrices.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real 3-vector. Velocities, displacements and Bloch vectors all live here.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Constructor that rejects NaN and infinite components.
    pub fn checked(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3 { x, y, z };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("vector ({x}, {y}, {z})")))
        }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = [self.x.abs(), self.y.abs(), self.z.abs()];
        let probe = if a[0] <= a[1] && a[0] <= a[2] {
            Vec3::X
        } else if a[1] <= a[2] {
            Vec3::Y
        } else {
            Vec3::Z
        };
        self.cross(probe).normalized().unwrap_or(Vec3::X)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v.scale(self)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3×3 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn diag(d: [f64; 3]) -> Mat3 {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let a = a.to_array();
        let b = b.to_array();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * b[j];
            }
        }
        Mat3(m)
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|e| *e *= s);
        Mat3(out)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|e| e.is_finite())
    }

    /// Frobenius norm of `RᵀR − I`.
    pub fn orthogonality_residual(&self) -> f64 {
        (self.transpose() * *self - Mat3::IDENTITY).frobenius()
    }

    /// Proper rotation check: `RᵀR = I` within 1e-12 and `det R = +1` within 1e-10.
    pub fn is_rotation(&self) -> bool {
        self.orthogonality_residual() < 1e-12 && (self.det() - 1.0).abs() < 1e-10
    }

    /// Right-handed rotation by `angle` about the unit `axis` (Rodrigues).
    pub fn rotation(axis: Vec3, angle: f64) -> Mat3 {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let Vec3 { x, y, z } = axis;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn rot_z(angle: f64) -> Mat3 {
        Mat3::rotation(Vec3::Z, angle)
    }

    pub fn rot_y(angle: f64) -> Mat3 {
        Mat3::rotation(Vec3::Y, angle)
    }

    /// Z(α)·Y(β)·Z(γ), composed as a plain left-to-right matrix product.
    pub fn euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Mat3 {
        Mat3::rot_z(alpha) * Mat3::rot_y(beta) * Mat3::rot_z(gamma)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += o.0[i][j];
            }
        }
        Mat3(out)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2c(pub [[Complex64; 2]; 2]);

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

impl Default for Mat2c {
    fn default() -> Self {
        Mat2c::IDENTITY
    }
}

impl Mat2c {
    pub const IDENTITY: Mat2c = Mat2c([[C1, C0], [C0, C1]]);
    pub const ZERO: Mat2c = Mat2c([[C0, C0], [C0, C0]]);

    /// Pauli matrices σ_x, σ_y, σ_z.
    pub const PAULI: [Mat2c; 3] = [
        Mat2c([[C0, C1], [C1, C0]]),
        Mat2c([[C0, Complex64::new(0.0, -1.0)], [CI, C0]]),
        Mat2c([[C1, C0], [C0, Complex64::new(-1.0, 0.0)]]),
    ];

    /// `v·σ`.
    pub fn pauli_dot(v: Vec3) -> Mat2c {
        Mat2c([
            [Complex64::new(v.z, 0.0), Complex64::new(v.x, -v.y)],
            [Complex64::new(v.x, v.y), Complex64::new(-v.z, 0.0)],
        ])
    }

    pub fn dagger(&self) -> Mat2c {
        let m = &self.0;
        Mat2c([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Mat2c {
        let m = &self.0;
        Mat2c([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `U†U − I`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.dagger() * *self - Mat2c::IDENTITY).frobenius()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() < 1e-12
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Mul for Mat2c {
    type Output = Mat2c;
    #[inline]
    fn mul(self, o: Mat2c) -> Mat2c {
        let a = &self.0;
        let b = &o.0;
        Mat2c([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Add for Mat2c {
    type Output = Mat2c;
    fn add(self, o: Mat2c) -> Mat2c {
        let a = &self.0;
        let b = &o.0;
        Mat2c([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2c {
    type Output = Mat2c;
    fn sub(self, o: Mat2c) -> Mat2c {
        self + o.scale(Complex64::new(-1.0, 0.0))
    }
}
