//! Small fixed-size vector types.
//!
//! `Vec3` is a real position/direction in cm, `CVec3` a complex 3-vector
//! carrying field quantities (E, J, Q, A_m), and `CMat3` a complex 3×3
//! matrix used for kernel Hessians and the Γ/τ matrices.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unit vector along axis `p` (0, 1 or 2).
    pub fn axis(p: usize) -> Self {
        let mut v = Self::ZERO;
        v[p] = 1.0;
        v
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_complex(self) -> CVec3 {
        CVec3::new(self.x.into(), self.y.into(), self.z.into())
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

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

/// Complex-valued 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CVec3 {
    pub x: C64,
    pub y: C64,
    pub z: C64,
}

impl CVec3 {
    pub const ZERO: CVec3 = CVec3 { x: ZERO, y: ZERO, z: ZERO };

    pub const fn new(x: C64, y: C64, z: C64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [C64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [C64; 3] {
        [self.x, self.y, self.z]
    }

    /// Bilinear dot product (no conjugation).
    pub fn dot(self, o: CVec3) -> C64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn dot_real(self, o: Vec3) -> C64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: CVec3) -> CVec3 {
        CVec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    /// Euclidean (Hermitian) norm, safe against underflow.
    pub fn norm(self) -> f64 {
        self.x.norm().hypot(self.y.norm()).hypot(self.z.norm())
    }

    pub fn norm_sqr(self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn scale(self, s: C64) -> CVec3 {
        CVec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Index<usize> for CVec3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("CVec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for CVec3 {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("CVec3 index {i} out of range"),
        }
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, o: CVec3) {
        *self = *self + o;
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        CVec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: f64) -> CVec3 {
        CVec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<C64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: C64) -> CVec3 {
        self.scale(s)
    }
}

/// Complex 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CMat3(pub [[C64; 3]; 3]);

impl CMat3 {
    pub fn zeros() -> Self {
        CMat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 3])
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::zeros();
        for p in 0..3 {
            m.0[p][p] = d[p];
        }
        m
    }

    pub fn from_real(r: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zeros();
        for p in 0..3 {
            for q in 0..3 {
                m.0[p][q] = r[p][q].into();
            }
        }
        m
    }

    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.0[p][q]
    }

    pub fn mul_vec(&self, v: CVec3) -> CVec3 {
        let m = &self.0;
        CVec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &CMat3) -> CMat3 {
        let mut r = Self::zeros();
        for p in 0..3 {
            for q in 0..3 {
                r.0[p][q] = (0..3).map(|s| self.0[p][s] * o.0[s][q]).sum();
            }
        }
        r
    }

    pub fn add(&self, o: &CMat3) -> CMat3 {
        let mut r = *self;
        for p in 0..3 {
            for q in 0..3 {
                r.0[p][q] += o.0[p][q];
            }
        }
        r
    }

    pub fn scale(&self, s: C64) -> CMat3 {
        let mut r = *self;
        for row in r.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        r
    }

    pub fn transpose(&self) -> CMat3 {
        let mut r = Self::zeros();
        for p in 0..3 {
            for q in 0..3 {
                r.0[q][p] = self.0[p][q];
            }
        }
        r
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by the adjugate; `None` when the determinant is negligible
    /// relative to the entry scale.
    pub fn inverse(&self) -> Option<CMat3> {
        let m = &self.0;
        let det = self.determinant();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if det.norm() <= 1e-13 * scale.powi(3) {
            return None;
        }
        let cof = |a: usize, b: usize, c: usize, d: usize| m[a][c] * m[b][d] - m[a][d] * m[b][c];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let inv_det = ONE / det;
        let mut r = Self::zeros();
        for p in 0..3 {
            for q in 0..3 {
                r.0[p][q] = adj[p][q] * inv_det;
            }
        }
        Some(r)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> [C64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }
}
