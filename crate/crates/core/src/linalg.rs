//! Small dense matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, Vector2};

use crate::error::{LabError, Result};

pub type Matrix = DMatrix<f64>;

/// Planar rotation by the angle `2πθ`.
pub fn rotation(theta: f64) -> Matrix {
    let (s, c) = (std::f64::consts::TAU * theta).sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// Inverse via LU; `t` only labels the error.
pub fn invert(m: &Matrix, t: f64) -> Result<Matrix> {
    let det = m.determinant();
    if !det.is_finite() || det == 0.0 {
        return Err(LabError::NonInvertible { t, det });
    }
    m.clone().try_inverse().ok_or(LabError::NonInvertible { t, det })
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &Matrix) -> f64 {
    if m.nrows() == 2 && m.ncols() == 2 {
        let (s1, _) = singular_values_2x2(m);
        return s1;
    }
    m.clone().singular_values().max()
}

/// Singular values `(σ₁, σ₂)` of a 2×2 matrix, `σ₁ ≥ σ₂`.
pub fn singular_values_2x2(m: &Matrix) -> (f64, f64) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let frob2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = ((a - d).powi(2) + (b + c).powi(2)).sqrt() * ((a + d).powi(2) + (b - c).powi(2)).sqrt();
    let s1 = (0.5 * (frob2 + disc)).sqrt();
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    (s1, s2)
}

/// Unit direction of the major axis of the symmetric form `MᵀM`, i.e. the
/// most expanded right singular direction of a 2×2 matrix.
pub fn top_right_singular_direction(m: &Matrix) -> Vector2<f64> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let p = a * a + c * c;
    let q = a * b + c * d;
    let r = b * b + d * d;
    let phi = 0.5 * (2.0 * q).atan2(p - r);
    Vector2::new(phi.cos(), phi.sin())
}

/// `|sin ∠(u, v)|`, the distance between the lines spanned by `u` and `v`.
pub fn projective_distance(u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    ((u.x * v.y - u.y * v.x) / (nu * nv)).abs().min(1.0)
}

/// Angle of the line spanned by `v`, in `[0, π)`.
pub fn line_angle(v: &Vector2<f64>) -> f64 {
    let a = v.y.atan2(v.x);
    let a = a.rem_euclid(std::f64::consts::PI);
    if a >= std::f64::consts::PI {
        0.0
    } else {
        a
    }
}

pub fn apply2(m: &Matrix, v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(m[(0, 0)] * v.x + m[(0, 1)] * v.y, m[(1, 0)] * v.x + m[(1, 1)] * v.y)
}
