//! Linear stable/unstable holonomies, the homoclinic holonomy `H_t` of the
//! pair `p = 0^ℤ`, `z = …0 1 0…`, and numerical Oseledets directions of a
//! planar quasi-periodic cocycle.

use std::io::Write;

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::circle::{self, CirclePoint, Word, PZ_BACKWARD, P_FORWARD, Z_FORWARD};
use crate::cocycle::{RandomProduct, TrigMatrixMap};
use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};

pub const DEFAULT_N_PULLBACK: usize = 200;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Base-point agreement tolerance (turns) for the holonomy precondition.
const BASE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Stable,
    Unstable,
}

/// Index after which two tails agree: one past the last disagreement.
fn agreement_index(x: &[usize], y: &[usize]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(LabError::NotHomoclinic(format!(
            "tails have different lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if let (Some(a), Some(b)) = (x.last(), y.last()) {
        if a != b {
            return Err(LabError::NotHomoclinic(
                "tails do not agree within the provided length".into(),
            ));
        }
    }
    Ok(x.iter().zip(y).rposition(|(a, b)| a != b).map_or(0, |i| i + 1))
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = circle::wrap(a - b);
    d.min(1.0 - d)
}

/// `H^{s}_{(x,t)(y,t')} = Â^{n₀}(y,t')⁻¹ Â^{n₀}(x,t)` (stable side, forward
/// tails `x_0, x_1, …`) or `H^{u}_{(x,t)(y,t')} = Â^{−n₀}(y,t')⁻¹ Â^{−n₀}(x,t)`
/// (unstable side, backward tails `x_{−1}, x_{−2}, …`). Beyond the provided
/// symbols the two sequences are taken to coincide.
pub fn linear_holonomy(
    rp: &RandomProduct,
    x_tail: &Word,
    y_tail: &Word,
    t: CirclePoint,
    t_prime: CirclePoint,
    side: Side,
) -> Result<Matrix> {
    let n0 = agreement_index(x_tail.symbols(), y_tail.symbols())?;
    let x = Word::new(x_tail.symbols()[..n0].to_vec(), rp.k())?;
    let y = Word::new(y_tail.symbols()[..n0].to_vec(), rp.k())?;
    let angles = rp.angles();
    let shift = |w: &Word| w.symbols().iter().map(|&s| angles[s]).sum::<f64>();

    match side {
        Side::Stable => {
            if circle_gap(t.value() + shift(&x), t_prime.value() + shift(&y)) > BASE_MATCH_TOL {
                return Err(LabError::NotHomoclinic(
                    "base points are not on a common stable set".into(),
                ));
            }
            let ax = rp.word_product(&x, t)?;
            let ay = rp.word_product(&y, t_prime)?;
            Ok(linalg::invert(&ay, t_prime.value())? * ax)
        }
        Side::Unstable => {
            if circle_gap(t.value() - shift(&x), t_prime.value() - shift(&y)) > BASE_MATCH_TOL {
                return Err(LabError::NotHomoclinic(
                    "base points are not on a common unstable set".into(),
                ));
            }
            let bx = rp.inverse_word_product(&x, t)?;
            // (Â^{−n}(y,t'))⁻¹ is the forward product from t'_{−n} along reversed y.
            let start = CirclePoint::new(t_prime.value() - shift(&y));
            let ay = rp.word_product(&y.reversed(), start)?;
            Ok(ay * bx)
        }
    }
}

fn require_pair(rp: &RandomProduct) -> Result<()> {
    if rp.k() < 1 {
        return Err(LabError::InvalidProduct(
            "the homoclinic holonomy needs at least two symbols".into(),
        ));
    }
    Ok(())
}

/// `h(t) = t + (θ₁ − θ₀)`.
pub fn base_holonomy(rp: &RandomProduct, t: CirclePoint) -> CirclePoint {
    circle::rotate(t, circle::homoclinic_base_holonomy(rp.angles()[0], rp.angles()[1]))
}

/// `H_t = H^s_{(z,t')(p,h(t))} ∘ H^u_{(p,t)(z,t')}` through the general
/// holonomy code path.
pub fn composed_ht(rp: &RandomProduct, t: CirclePoint) -> Result<Matrix> {
    require_pair(rp)?;
    let k = rp.k();
    let back = Word::new(PZ_BACKWARD.to_vec(), k)?;
    // backward tails of p and z coincide, so h^u_{p,z} is the identity on S¹
    let t_prime = t;
    let unstable = linear_holonomy(rp, &back, &back, t, t_prime, Side::Unstable)?;
    let z = Word::new(Z_FORWARD.to_vec(), k)?;
    let p = Word::new(P_FORWARD.to_vec(), k)?;
    let stable = linear_holonomy(rp, &z, &p, t_prime, base_holonomy(rp, t), Side::Stable)?;
    Ok(stable * unstable)
}

/// `H_t = A₀(h(t))⁻¹ A₁(t)`.
pub fn closed_form_ht(rp: &RandomProduct, t: CirclePoint) -> Result<Matrix> {
    require_pair(rp)?;
    let ht = base_holonomy(rp, t).value();
    let a0 = rp.maps()[0].eval(ht);
    Ok(linalg::invert(&a0, ht)? * rp.maps()[1].eval(t.value()))
}

/// `A(t_{n−1}) ⋯ A(t_0)` from `start`, kept normalized: returns the scaled
/// product, `log` of the scale removed, and `Σ log|det A(t_j)|`.
fn normalized_product(theta: f64, a: &TrigMatrixMap, start: f64, n: usize) -> (Matrix, f64, f64) {
    let mut p = Matrix::identity(2, 2);
    let mut log_scale = 0.0;
    let mut log_det = 0.0;
    let mut t = CirclePoint::new(start);
    for _ in 0..n {
        let m = a.eval(t.value());
        log_det += m.determinant().abs().ln();
        p = m * p;
        let s = p.amax();
        if s > 0.0 && s.is_finite() {
            p /= s;
            log_scale += s.ln();
        }
        t = circle::rotate(t, theta);
    }
    (p, log_scale, log_det)
}

/// `log(σ₁/σ₂)` of the product represented by `(p, log_scale, log_det)`.
fn log_singular_gap(p: &Matrix, log_scale: f64, log_det: f64) -> f64 {
    let (s1, _) = linalg::singular_values_2x2(p);
    let log_s1 = s1.ln() + log_scale;
    2.0 * log_s1 - log_det
}

const START: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
const FALLBACK: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
/// Below this `‖Pv‖/‖P‖` the start vector is treated as aligned with the contracting direction.
const ANOMALY_RATIO: f64 = 1e-8;

struct Directions {
    e_plus: Vector2<f64>,
    e_minus: Vector2<f64>,
    gap: f64,
}

fn directions_at(theta0: f64, a0: &TrigMatrixMap, t: f64, n: usize) -> Directions {
    let (p, ls_p, ld_p) = normalized_product(theta0, a0, t - n as f64 * theta0, n);
    let mut v = linalg::apply2(&p, &Vector2::from(START));
    let (s1, _) = linalg::singular_values_2x2(&p);
    if v.norm() < ANOMALY_RATIO * s1 {
        v = linalg::apply2(&p, &Vector2::from(FALLBACK));
    }
    let e_plus = v.normalize();

    let (q, ls_q, ld_q) = normalized_product(theta0, a0, t, n);
    let top = linalg::top_right_singular_direction(&q);
    let e_minus = Vector2::new(-top.y, top.x);

    let gap = log_singular_gap(&p, ls_p, ld_p).min(log_singular_gap(&q, ls_q, ld_q));
    Directions { e_plus, e_minus, gap }
}

/// One sample of the Oseledets direction field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OseledetsSample {
    pub t: f64,
    pub e_plus: Vector2<f64>,
    pub e_minus: Vector2<f64>,
    /// Projective distance between the `n` and `2n` iterate approximations.
    pub residual: f64,
    pub converged: bool,
}

/// `e₊(t)` as the pushed-forward expanding direction and `e₋(t)` as the most
/// contracted singular direction of `A₀ⁿ(t)`. A sample is converged when
/// the doubling residual is within `tolerance` and the singular-value gap of
/// the `n`-step products resolves directions to that tolerance.
pub fn oseledets_directions(
    theta0: f64,
    a0: &TrigMatrixMap,
    t: CirclePoint,
    n_pullback: usize,
    tolerance: f64,
) -> Result<OseledetsSample> {
    if a0.dim() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: a0.dim(),
        });
    }
    if n_pullback == 0 {
        return Err(LabError::InvalidArgument("n_pullback must be positive".into()));
    }
    let short = directions_at(theta0, a0, t.value(), n_pullback);
    let long = directions_at(theta0, a0, t.value(), 2 * n_pullback);
    let residual = linalg::projective_distance(&short.e_plus, &long.e_plus)
        .max(linalg::projective_distance(&short.e_minus, &long.e_minus));
    let converged = residual <= tolerance && short.gap >= -tolerance.ln();
    Ok(OseledetsSample {
        t: t.value(),
        e_plus: long.e_plus,
        e_minus: long.e_minus,
        residual,
        converged,
    })
}

/// Sampled direction field `t ↦ (e₊(t), e₋(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct OseledetsField {
    pub samples: Vec<OseledetsSample>,
    pub n_pullback: usize,
    pub tolerance: f64,
}

impl OseledetsField {
    pub fn sample(theta0: f64, a0: &TrigMatrixMap, ts: &[f64], n_pullback: usize, tolerance: f64) -> Result<Self> {
        let samples = ts
            .par_iter()
            .map(|&t| oseledets_directions(theta0, a0, CirclePoint::new(t), n_pullback, tolerance))
            .collect::<Result<Vec<_>>>()?;
        Ok(OseledetsField {
            samples,
            n_pullback,
            tolerance,
        })
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| s.converged).count() as f64 / self.samples.len() as f64
    }

    /// CSV with columns `t, e_plus_angle, e_minus_angle, residual, converged`;
    /// angles are line angles in `[0, π)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "e_plus_angle", "e_minus_angle", "residual", "converged"])?;
        for s in &self.samples {
            w.write_record([
                s.t.to_string(),
                linalg::line_angle(&s.e_plus).to_string(),
                linalg::line_angle(&s.e_minus).to_string(),
                s.residual.to_string(),
                s.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
