use serde::{Deserialize, Serialize};

use super::trig::{FourierBasis, ScalarPotential, TrigPoly};
use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};

/// Number of points of the invertibility certification grid.
pub const CERT_GRID: usize = 1 << 10;
/// Minimal `|det|` accepted on the certification grid.
pub const DET_FLOOR: f64 = 1e-10;
/// Tolerance on `|det − 1|` for SL₂ maps.
pub const SL2_DET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupTag {
    General,
    Sl2,
    Diagonal,
    Schrodinger,
}

/// A matrix-valued trigonometric polynomial `S¹ → GL_d(ℝ)`, entries stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMatrixMap {
    d: usize,
    degree: usize,
    entries: Vec<TrigPoly>,
    tag: GroupTag,
}

impl TrigMatrixMap {
    /// Builds a map and checks every invariant of its group tag.
    pub fn new(d: usize, entries: Vec<TrigPoly>, tag: GroupTag) -> Result<Self> {
        let map = Self::assemble(d, entries, tag)?;
        map.validate()?;
        Ok(map)
    }

    fn assemble(d: usize, mut entries: Vec<TrigPoly>, tag: GroupTag) -> Result<Self> {
        if d == 0 {
            return Err(LabError::InvalidMap("dimension must be positive".into()));
        }
        if entries.len() != d * d {
            return Err(LabError::InvalidMap(format!(
                "expected {} entries for d = {d}, got {}",
                d * d,
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|e| !e.is_finite()) {
            return Err(LabError::InvalidMap(format!("entry {i} has non-finite coefficients")));
        }
        let degree = entries.iter().map(TrigPoly::degree).max().unwrap_or(0);
        for e in &mut entries {
            e.cos.resize(degree, 0.0);
            e.sin.resize(degree, 0.0);
        }
        Ok(TrigMatrixMap {
            d,
            degree,
            entries,
            tag,
        })
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        match self.tag {
            GroupTag::Diagonal => {
                for i in 0..d {
                    for j in 0..d {
                        if i != j && !self.entry(i, j).is_zero() {
                            return Err(LabError::InvalidMap(format!(
                                "DIAGONAL map has non-zero off-diagonal entry ({i},{j})"
                            )));
                        }
                    }
                }
            }
            GroupTag::Sl2 if d != 2 => {
                return Err(LabError::InvalidMap("SL2 map must have d = 2".into()));
            }
            GroupTag::Schrodinger => {
                let ok = d == 2
                    && self.entry(0, 1) == &TrigPoly::new(-1.0, vec![0.0; self.degree], vec![0.0; self.degree])
                    && self.entry(1, 0) == &TrigPoly::new(1.0, vec![0.0; self.degree], vec![0.0; self.degree])
                    && self.entry(1, 1).is_zero();
                if !ok {
                    return Err(LabError::InvalidMap(
                        "SCHRODINGER map must have the form [[φ, -1], [1, 0]]".into(),
                    ));
                }
            }
            _ => {}
        }
        for i in 0..CERT_GRID {
            let t = i as f64 / CERT_GRID as f64;
            let det = self.eval(t).determinant();
            if !(det.abs() > DET_FLOOR) {
                return Err(LabError::NonInvertible { t, det });
            }
            if self.tag == GroupTag::Sl2 && (det - 1.0).abs() >= SL2_DET_TOL {
                return Err(LabError::InvalidMap(format!("SL2 map has det = {det} at t = {t}")));
            }
        }
        Ok(())
    }

    /// Constant map `t ↦ m`.
    pub fn constant(m: &Matrix, tag: GroupTag) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LabError::InvalidMap("constant map must be square".into()));
        }
        let d = m.nrows();
        let entries = (0..d * d).map(|k| TrigPoly::constant(m[(k / d, k % d)])).collect();
        Self::new(d, entries, tag)
    }

    pub fn identity(d: usize) -> Self {
        Self::constant(&Matrix::identity(d, d), GroupTag::Diagonal).expect("identity is valid")
    }

    /// Diagonal map with the given diagonal entries.
    pub fn diagonal(entries: Vec<TrigPoly>) -> Result<Self> {
        let d = entries.len();
        let mut all = vec![TrigPoly::constant(0.0); d * d];
        for (i, e) in entries.into_iter().enumerate() {
            all[i * d + i] = e;
        }
        Self::new(d, all, GroupTag::Diagonal)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn entries(&self) -> &[TrigPoly] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &TrigPoly {
        &self.entries[i * self.d + j]
    }

    /// True for SL2 and Schrödinger maps.
    pub fn is_sl2(&self) -> bool {
        matches!(self.tag, GroupTag::Sl2 | GroupTag::Schrodinger)
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(TrigPoly::is_constant)
    }

    /// The potential `φ` of a Schrödinger map.
    pub fn potential(&self) -> Option<&ScalarPotential> {
        (self.tag == GroupTag::Schrodinger).then(|| self.entry(0, 0))
    }

    pub fn eval(&self, t: f64) -> Matrix {
        let d = self.d;
        if self.degree == 0 {
            return Matrix::from_fn(d, d, |i, j| self.entries[i * d + j].c0);
        }
        let basis = FourierBasis::at(t, self.degree);
        Matrix::from_fn(d, d, |i, j| self.entries[i * d + j].eval_basis(&basis))
    }

    /// `t ↦ L · A(t) · R` computed on coefficients.
    pub fn sandwich(&self, left: &Matrix, right: &Matrix, tag: GroupTag) -> Result<Self> {
        let d = self.d;
        if left.shape() != (d, d) || right.shape() != (d, d) {
            return Err(LabError::Dimension {
                expected: d,
                got: left.nrows().max(right.nrows()),
            });
        }
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut terms = Vec::with_capacity(d * d);
                for a in 0..d {
                    for b in 0..d {
                        let w = left[(i, a)] * right[(b, j)];
                        if w != 0.0 {
                            terms.push((w, self.entry(a, b)));
                        }
                    }
                }
                entries.push(TrigPoly::linear_combination(&terms));
            }
        }
        Self::new(d, entries, tag)
    }

    /// `t ↦ c · A(t)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let tag = match self.tag {
            GroupTag::Diagonal => GroupTag::Diagonal,
            _ => GroupTag::General,
        };
        Self::new(self.d, self.entries.iter().map(|e| e.scaled(c)).collect(), tag)
    }

    /// `t ↦ C⁻¹ A(t) C` for a constant invertible `C`.
    pub fn conjugated(&self, c: &Matrix) -> Result<Self> {
        let inv = linalg::invert(c, 0.0)?;
        let tag = if self.is_sl2() {
            GroupTag::Sl2
        } else {
            GroupTag::General
        };
        self.sandwich(&inv, c, tag)
    }

    /// `t ↦ A(t) + ε B(t)`, tagged GENERAL. `B` is given by its row-major
    /// entries and need not be invertible.
    pub fn perturbed(&self, direction: &[TrigPoly], eps: f64) -> Result<Self> {
        if direction.len() != self.d * self.d {
            return Err(LabError::Dimension {
                expected: self.d * self.d,
                got: direction.len(),
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(direction)
            .map(|(a, b)| a.add(&b.scaled(eps)))
            .collect();
        Self::new(self.d, entries, GroupTag::General)
    }

    /// Replaces the potential of a Schrödinger map.
    pub fn with_potential(&self, phi: &ScalarPotential) -> Result<Self> {
        if self.tag != GroupTag::Schrodinger {
            return Err(LabError::InvalidMap("not a SCHRODINGER map".into()));
        }
        make_schrodinger(phi)
    }

    /// `max_t ‖A(t) − B(t)‖₂` over `grid` equally spaced points.
    pub fn c0_distance(&self, other: &TrigMatrixMap, grid: usize) -> f64 {
        (0..grid)
            .map(|i| {
                let t = i as f64 / grid as f64;
                linalg::op_norm(&(self.eval(t) - other.eval(t)))
            })
            .fold(0.0, f64::max)
    }

    /// `max_t ‖A(t)‖₂` over `grid` points.
    pub fn sup_norm(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|i| linalg::op_norm(&self.eval(i as f64 / grid as f64)))
            .fold(0.0, f64::max)
    }

    /// `max_t ‖A(t)⁻¹‖₂` over `grid` points.
    pub fn sup_inverse_norm(&self, grid: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for i in 0..grid {
            let t = i as f64 / grid as f64;
            best = best.max(linalg::op_norm(&linalg::invert(&self.eval(t), t)?));
        }
        Ok(best)
    }
}

/// `t ↦ [[φ(t), −1], [1, 0]]`.
pub fn make_schrodinger(phi: &ScalarPotential) -> Result<TrigMatrixMap> {
    let entries = vec![
        phi.clone(),
        TrigPoly::constant(-1.0),
        TrigPoly::constant(1.0),
        TrigPoly::constant(0.0),
    ];
    TrigMatrixMap::new(2, entries, GroupTag::Schrodinger)
}

/// `ãᵢ = bᵢ aᵢ` for a diagonal map.
pub fn rescale_diagonal(a: &TrigMatrixMap, b: &[f64]) -> Result<TrigMatrixMap> {
    if a.tag() != GroupTag::Diagonal {
        return Err(LabError::InvalidMap("rescale_diagonal needs a DIAGONAL map".into()));
    }
    if b.len() != a.dim() {
        return Err(LabError::Dimension {
            expected: a.dim(),
            got: b.len(),
        });
    }
    if let Some(bad) = b.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "rescaling factors must be positive, got {bad}"
        )));
    }
    a.sandwich(
        &linalg::diag(b),
        &Matrix::identity(a.dim(), a.dim()),
        GroupTag::Diagonal,
    )
}

/// `t ↦ A(t) · R_θ` where `R_θ` rotates the plane by `2πθ`.
pub fn right_rotate(a: &TrigMatrixMap, theta: f64) -> Result<TrigMatrixMap> {
    if a.dim() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: a.dim(),
        });
    }
    let tag = if a.is_sl2() { GroupTag::Sl2 } else { GroupTag::General };
    a.sandwich(&Matrix::identity(2, 2), &linalg::rotation(theta), tag)
}
