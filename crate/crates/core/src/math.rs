//! Small 3-D math layer: vectors, rotation matrices and the axis-angle /
//! rotation-vector conversions used by the attitude controller.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Angles closer than this to pi use the symmetric-part axis extraction.
const NEAR_PI: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
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

    /// Element-wise product.
    pub fn hadamard(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    /// Element-wise quotient.
    pub fn div_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x / o.x, self.y / o.y, self.z / o.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Scales the vector down so its norm does not exceed `max`.
    pub fn clamp_norm(self, max: f64) -> Vec3 {
        let n = self.norm();
        if n > max && n > 0.0 {
            self * (max / n)
        } else {
            self
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
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

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 rotation matrix (body to world when used as an attitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.0[r][c]
    }

    pub fn column(&self, c: usize) -> Vec3 {
        Vec3::new(self.0[0][c], self.0[1][c], self.0[2][c])
    }

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (r, row) in t.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[c][r];
            }
        }
        RotationMatrix(t)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max-abs entry of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = mat_mul(&self.transpose().0, &self.0);
        let mut worst: f64 = 0.0;
        for (r, row) in p.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Pulls the matrix back onto SO(3) with two Newton-Schulz polar
    /// iterations `R <- R (3I - RᵀR) / 2`.
    pub fn orthonormalized(&self) -> RotationMatrix {
        let mut m = self.0;
        for _ in 0..2 {
            let p = mat_mul(&transpose(&m), &m);
            let mut corr = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    let id = if r == c { 3.0 } else { 0.0 };
                    corr[r][c] = 0.5 * (id - p[r][c]);
                }
            }
            m = mat_mul(&m, &corr);
        }
        RotationMatrix(m)
    }

    /// Rotation about world z by `yaw` radians.
    pub fn yaw(yaw: f64) -> RotationMatrix {
        let (s, c) = yaw.sin_cos();
        RotationMatrix([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation about world y by `angle` radians.
    pub fn about_y(angle: f64) -> RotationMatrix {
        let (s, c) = angle.sin_cos();
        RotationMatrix([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Heading of the body x axis projected on the world xy plane.
    pub fn heading(&self) -> f64 {
        self.0[1][0].atan2(self.0[0][0])
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(mat_mul(&self.0, &o.0))
    }
}

impl Mul<Vec3> for RotationMatrix {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    RotationMatrix(*m).transpose().0
}

/// Unit axis plus an angle in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    axis: Vec3,
    angle: f64,
}

impl AxisAngle {
    /// Normalizes `axis` and folds `angle` into `[0, pi]` (flipping the
    /// axis where needed).
    pub fn new(axis: Vec3, angle: f64) -> Result<Self, Error> {
        let n = axis.norm();
        if !axis.is_finite() || !angle.is_finite() || n < 1e-12 {
            return Err(Error::InvalidAxisAngle);
        }
        Ok(Self::folded(axis / n, angle))
    }

    fn folded(mut axis: Vec3, angle: f64) -> Self {
        let mut angle = angle.rem_euclid(2.0 * PI);
        if angle > PI {
            angle = 2.0 * PI - angle;
            axis = -axis;
        }
        Self { axis, angle }
    }

    /// Interprets `v` as axis times angle. The zero vector maps to a zero
    /// rotation about z; tiny vectors keep their direction.
    pub fn from_rotation_vector(v: Vec3) -> Result<Self, Error> {
        if !v.is_finite() {
            return Err(Error::InvalidAxisAngle);
        }
        let n = v.norm();
        if n == 0.0 {
            return Ok(Self {
                axis: Vec3::Z,
                angle: 0.0,
            });
        }
        Ok(Self::folded(v / n, n))
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn rotation_vector(&self) -> Vec3 {
        self.axis * self.angle
    }
}

/// Rodrigues' formula.
pub fn axis_angle_to_matrix(aa: AxisAngle) -> RotationMatrix {
    let Vec3 { x, y, z } = aa.axis;
    let (s, c) = aa.angle.sin_cos();
    let t = 1.0 - c;
    RotationMatrix([
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ])
}

/// Log map: returns axis times angle with angle in `[0, pi]`.
pub fn matrix_to_rotvec(r: &RotationMatrix) -> Vec3 {
    let m = &r.0;
    // 2 sin(angle) * axis
    let v = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
    let sin = 0.5 * v.norm();
    let cos = 0.5 * (r.trace() - 1.0);
    let angle = sin.atan2(cos);
    if angle == 0.0 {
        return Vec3::ZERO;
    }
    if PI - angle > NEAR_PI {
        return v * (angle / (2.0 * sin));
    }
    // Near pi: the symmetric part is cos*I + (1 - cos) a aᵀ. Take the
    // column of a aᵀ with the largest diagonal entry.
    let one_minus_cos = 1.0 - cos;
    let mut outer = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let sym = 0.5 * (m[i][j] + m[j][i]) - if i == j { cos } else { 0.0 };
            outer[i][j] = sym / one_minus_cos;
        }
    }
    let j = (0..3)
        .max_by(|&a, &b| outer[a][a].total_cmp(&outer[b][b]))
        .unwrap_or(0);
    let col = Vec3::new(outer[0][j], outer[1][j], outer[2][j]);
    let mut axis = col / col.norm();
    if axis.dot(v) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

/// Rotation about world z by `yaw` radians.
pub fn yaw_matrix(yaw: f64) -> RotationMatrix {
    RotationMatrix::yaw(yaw)
}
