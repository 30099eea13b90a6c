//! The circle S¹ = ℝ/ℤ (coordinates in full turns), the base skew product
//! over the Bernoulli shift, and the base holonomy of the fixed homoclinic
//! pair.
//!
//! Two bi-infinite sequences are distinguished throughout the crate: the
//! fixed point `p = …000…` and the homoclinic point `z` with `z_0 = 1` and
//! `z_i = 0` otherwise. Their finite tails are exposed as constants.

use crate::error::{LabError, Result};

/// Conjugate golden mean, the default badly approximable rotation angle.
pub const GOLDEN_ANGLE: f64 = 0.618_033_988_749_894_8;

/// Forward tail `(p_0, p_1)` of the fixed point.
pub const P_FORWARD: [usize; 2] = [0, 0];
/// Forward tail `(z_0, z_1)` of the homoclinic point.
pub const Z_FORWARD: [usize; 2] = [1, 0];
/// Backward tail `(p_{-1})`; the backward tail of `z` is identical.
pub const PZ_BACKWARD: [usize; 1] = [0];

/// Reduces `x` modulo 1 into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of S¹ in units of full turns, always in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(t: f64) -> Self {
        CirclePoint(wrap(t))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn rotate(self, theta: f64) -> Self {
        rotate(self, theta)
    }
}

impl From<f64> for CirclePoint {
    fn from(t: f64) -> Self {
        CirclePoint::new(t)
    }
}

/// `f_θ(t) = t + θ (mod 1)`.
#[inline]
pub fn rotate(t: CirclePoint, theta: f64) -> CirclePoint {
    CirclePoint(wrap(t.0 + theta))
}

/// A finite word over the alphabet `{0, …, k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    symbols: Vec<usize>,
    k: usize,
}

impl Word {
    pub fn new(symbols: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((position, &symbol)) = symbols.iter().enumerate().find(|(_, &s)| s > k) {
            return Err(LabError::InvalidWord { symbol, position, k });
        }
        Ok(Word { symbols, k })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Concatenation `self · other` (self read first).
    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Word {
            symbols,
            k: self.k.max(other.k),
        }
    }

    pub fn reversed(&self) -> Word {
        Word {
            symbols: self.symbols.iter().rev().copied().collect(),
            k: self.k,
        }
    }
}

pub(crate) fn check_angles(w: &Word, angles: &[f64]) -> Result<()> {
    if angles.len() != w.k + 1 {
        return Err(LabError::AngleCount {
            expected: w.k + 1,
            got: angles.len(),
        });
    }
    Ok(())
}

/// Orbit `t_0 = t, t_{j+1} = f_{w_j}(t_j)` of length `|w| + 1`.
pub fn base_orbit(w: &Word, t: CirclePoint, angles: &[f64]) -> Result<Vec<CirclePoint>> {
    check_angles(w, angles)?;
    let mut orbit = Vec::with_capacity(w.len() + 1);
    let mut cur = t;
    orbit.push(cur);
    for &s in w.symbols() {
        cur = rotate(cur, angles[s]);
        orbit.push(cur);
    }
    Ok(orbit)
}

/// Offset `δ = θ₁ − θ₀ (mod 1)` of `h = h^s_{z,p} ∘ h^u_{p,z}`, so that
/// `h(t) = t + δ`.
pub fn homoclinic_base_holonomy(theta0: f64, theta1: f64) -> f64 {
    wrap(theta1 - theta0)
}
