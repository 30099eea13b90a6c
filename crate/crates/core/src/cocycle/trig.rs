use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Real trigonometric polynomial `c₀ + Σ_{m=1}^K a_m cos(2πmt) + b_m sin(2πmt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// The scalar potential `φ = E − u` of a Schrödinger cocycle.
pub type ScalarPotential = TrigPoly;

/// `cos(2πmt), sin(2πmt)` for `m = 1..=K`.
#[derive(Debug, Clone)]
pub(crate) struct FourierBasis {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierBasis {
    pub fn at(t: f64, degree: usize) -> Self {
        let mut cos = Vec::with_capacity(degree);
        let mut sin = Vec::with_capacity(degree);
        for m in 1..=degree {
            let (s, c) = (TAU * m as f64 * t).sin_cos();
            cos.push(c);
            sin.push(s);
        }
        FourierBasis { cos, sin }
    }
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            c0: c,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// `a cos(2πmt) + b sin(2πmt)` for a single mode `m ≥ 1`.
    pub fn mode(m: usize, a: f64, b: f64) -> Self {
        assert!(m >= 1);
        let mut p = TrigPoly::constant(0.0);
        p.cos = vec![0.0; m];
        p.sin = vec![0.0; m];
        p.cos[m - 1] = a;
        p.sin[m - 1] = b;
        p
    }

    pub fn new(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let mut p = TrigPoly { c0, cos, sin };
        let k = p.cos.len().max(p.sin.len());
        p.cos.resize(k, 0.0);
        p.sin.resize(k, 0.0);
        p
    }

    /// Interleaved layout `[c₀, a₁, b₁, a₂, b₂, …]` used by cocycle files.
    pub fn from_interleaved(coeffs: &[f64]) -> Option<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return None;
        }
        let k = (coeffs.len() - 1) / 2;
        let cos = (0..k).map(|m| coeffs[1 + 2 * m]).collect();
        let sin = (0..k).map(|m| coeffs[2 + 2 * m]).collect();
        Some(TrigPoly {
            c0: coeffs[0],
            cos,
            sin,
        })
    }

    pub fn to_interleaved(&self, degree: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * degree + 1);
        out.push(self.c0);
        for m in 0..degree {
            out.push(self.cos.get(m).copied().unwrap_or(0.0));
            out.push(self.sin.get(m).copied().unwrap_or(0.0));
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.is_constant() {
            return self.c0;
        }
        self.eval_basis(&FourierBasis::at(t, self.degree()))
    }

    pub(crate) fn eval_basis(&self, basis: &FourierBasis) -> f64 {
        let mut acc = self.c0;
        for m in 0..self.degree() {
            acc += self.cos[m] * basis.cos[m] + self.sin[m] * basis.sin[m];
        }
        acc
    }

    /// Upper bound `|c₀| + Σ |a_m| + |b_m|` on the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.c0.abs() + self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TrigPoly {
            c0: self.c0 * s,
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &TrigPoly) -> Self {
        let k = self.degree().max(other.degree());
        let get = |v: &[f64], m: usize| v.get(m).copied().unwrap_or(0.0);
        TrigPoly {
            c0: self.c0 + other.c0,
            cos: (0..k).map(|m| get(&self.cos, m) + get(&other.cos, m)).collect(),
            sin: (0..k).map(|m| get(&self.sin, m) + get(&other.sin, m)).collect(),
        }
    }

    /// `Σ wᵢ pᵢ`.
    pub fn linear_combination(terms: &[(f64, &TrigPoly)]) -> Self {
        terms
            .iter()
            .fold(TrigPoly::constant(0.0), |acc, (w, p)| acc.add(&p.scaled(*w)))
    }

    /// `t ↦ p(t + δ)`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut cos = Vec::with_capacity(self.degree());
        let mut sin = Vec::with_capacity(self.degree());
        for m in 0..self.degree() {
            let (s, c) = (TAU * (m + 1) as f64 * delta).sin_cos();
            // a cos(x+y) + b sin(x+y) = (a c + b s) cos x + (b c − a s) sin x
            cos.push(self.cos[m] * c + self.sin[m] * s);
            sin.push(self.sin[m] * c - self.cos[m] * s);
        }
        TrigPoly { c0: self.c0, cos, sin }
    }
}

/// `φ + c`.
pub fn shift_potential(phi: &ScalarPotential, c: f64) -> ScalarPotential {
    let mut out = phi.clone();
    out.c0 += c;
    out
}

/// Normalized Fejér kernel of degree `degree` centred at `center`: a
/// non-negative trigonometric polynomial with value 1 at `center`.
pub fn fejer_bump(center: f64, degree: usize) -> TrigPoly {
    let n = degree as f64 + 1.0;
    let mut cos = Vec::with_capacity(degree);
    let mut sin = Vec::with_capacity(degree);
    for m in 1..=degree {
        let w = 2.0 * (1.0 - m as f64 / n) / n;
        let (s, c) = (TAU * m as f64 * center).sin_cos();
        cos.push(w * c);
        sin.push(w * s);
    }
    TrigPoly { c0: 1.0 / n, cos, sin }
}
