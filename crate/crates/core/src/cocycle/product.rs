use crate::circle::{self, CirclePoint, Word};
use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};

use super::map::TrigMatrixMap;

/// Tolerance on `|Σ νᵢ − 1|` held by a constructed product.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The random product of `(θᵢ, Aᵢ)_{i=0..k}` with Bernoulli weights `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProduct {
    angles: Vec<f64>,
    maps: Vec<TrigMatrixMap>,
    weights: Vec<f64>,
}

impl RandomProduct {
    pub fn new(angles: Vec<f64>, maps: Vec<TrigMatrixMap>, weights: Vec<f64>) -> Result<Self> {
        if maps.is_empty() {
            return Err(LabError::InvalidProduct("at least one map is required".into()));
        }
        if angles.len() != maps.len() || weights.len() != maps.len() {
            return Err(LabError::InvalidProduct(format!(
                "{} maps, {} angles, {} weights",
                maps.len(),
                angles.len(),
                weights.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(LabError::InvalidProduct("non-finite rotation angle".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(LabError::InvalidProduct("weights must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(LabError::InvalidProduct(format!("weights sum to {sum}, not 1")));
        }
        let d = maps[0].dim();
        if let Some(m) = maps.iter().find(|m| m.dim() != d) {
            return Err(LabError::Dimension {
                expected: d,
                got: m.dim(),
            });
        }
        Ok(RandomProduct { angles, maps, weights })
    }

    /// Uniform weights over `(θᵢ, Aᵢ)`.
    pub fn uniform(angles: Vec<f64>, maps: Vec<TrigMatrixMap>) -> Result<Self> {
        let n = maps.len().max(1);
        Self::new(angles, maps, vec![1.0 / n as f64; n])
    }

    /// The single quasi-periodic cocycle `(θ, A)`.
    pub fn single(theta: f64, map: TrigMatrixMap) -> Self {
        RandomProduct {
            angles: vec![theta],
            maps: vec![map],
            weights: vec![1.0],
        }
    }

    /// The cocycle `(θᵢ, Aᵢ)` alone.
    pub fn restrict(&self, i: usize) -> Self {
        Self::single(self.angles[i], self.maps[i].clone())
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    /// Largest symbol `k`.
    pub fn k(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn maps(&self) -> &[TrigMatrixMap] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_sl2(&self) -> bool {
        self.maps.iter().all(TrigMatrixMap::is_sl2)
    }

    pub fn with_map(&self, i: usize, map: TrigMatrixMap) -> Result<Self> {
        let mut maps = self.maps.clone();
        maps[i] = map;
        Self::new(self.angles.clone(), maps, self.weights.clone())
    }

    pub fn with_maps(&self, maps: Vec<TrigMatrixMap>) -> Result<Self> {
        Self::new(self.angles.clone(), maps, self.weights.clone())
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if let Some((position, &symbol)) = w.symbols().iter().enumerate().find(|(_, &s)| s > self.k()) {
            return Err(LabError::InvalidWord {
                symbol,
                position,
                k: self.k(),
            });
        }
        Ok(())
    }

    /// `Â^n(x, t) = A_{w_{n−1}}(t_{n−1}) ⋯ A_{w_0}(t_0)` along the base orbit.
    pub fn word_product(&self, w: &Word, t: CirclePoint) -> Result<Matrix> {
        self.check_word(w)?;
        let d = self.dim();
        let mut acc = Matrix::identity(d, d);
        let mut cur = t;
        for &s in w.symbols() {
            acc = self.maps[s].eval(cur.value()) * acc;
            cur = circle::rotate(cur, self.angles[s]);
        }
        Ok(acc)
    }

    /// Backward branch `A_{x_{−n}}(t_{−n})⁻¹ ⋯ A_{x_{−1}}(t_{−1})⁻¹` where
    /// `w = (x_{−1}, x_{−2}, …, x_{−n})` and `t_{−j−1} = t_{−j} − θ_{x_{−j−1}}`.
    pub fn inverse_word_product(&self, w: &Word, t: CirclePoint) -> Result<Matrix> {
        self.check_word(w)?;
        let d = self.dim();
        let mut acc = Matrix::identity(d, d);
        let mut cur = t;
        for &s in w.symbols() {
            cur = circle::rotate(cur, -self.angles[s]);
            let inv = linalg::invert(&self.maps[s].eval(cur.value()), cur.value())?;
            acc = inv * acc;
        }
        Ok(acc)
    }
}
