//! Monte Carlo and quadrature estimators of Lyapunov exponents.
//!
//! Each replicate draws its own starting point `t ~ Leb` and an i.i.d. word
//! from `ν` out of an independent ChaCha stream (`seed`, stream = replicate
//! index), so results do not depend on how replicates are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{self, CirclePoint};
use crate::cocycle::{GroupTag, RandomProduct, TrigMatrixMap, CERT_GRID, DET_FLOOR};
use crate::error::{LabError, Result};
use crate::linalg::Matrix;
use crate::quadrature::circle_integral;

pub const DEFAULT_QR_PERIOD: usize = 20;
/// Early re-orthonormalization once the frame's condition bound exceeds this.
const MAX_LOG_CONDITION: f64 = 13.8; // ln 1e6

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub n_iter: usize,
    pub n_rep: usize,
    pub seed: u64,
    /// Iterates between re-orthonormalizations.
    pub qr_period: usize,
}

impl EstimatorOptions {
    pub fn new(n_iter: usize, n_rep: usize, seed: u64) -> Self {
        EstimatorOptions {
            n_iter,
            n_rep,
            seed,
            qr_period: DEFAULT_QR_PERIOD,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_iter == 0 || self.n_rep == 0 || self.qr_period == 0 {
            return Err(LabError::InvalidArgument(
                "n_iter, n_rep and qr_period must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Sorted exponent estimates (nats per iterate) with replicate standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Standard error of `Σ λᵢ` across replicates.
    pub sum_stderr: f64,
    pub n_iter: usize,
    pub n_rep: usize,
    pub seed: u64,
}

impl LyapunovEstimate {
    pub fn top(&self) -> f64 {
        self.values[0]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Top exponent estimate `λ₊` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopExponent {
    pub value: f64,
    pub stderr: f64,
}

/// Symbol sampler by inversion of the cumulative weights.
struct SymbolSampler {
    cumulative: Vec<f64>,
}

impl SymbolSampler {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        SymbolSampler { cumulative }
    }

    fn draw(&self, u: f64) -> usize {
        let last = self.cumulative.len() - 1;
        self.cumulative.iter().position(|&c| u < c).unwrap_or(last)
    }
}

fn replicate_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn one_replicate(rp: &RandomProduct, opts: &EstimatorOptions, rep: usize) -> Result<Vec<f64>> {
    let d = rp.dim();
    let sampler = SymbolSampler::new(rp.weights());
    let mut rng = replicate_rng(opts.seed, rep);
    let mut t = CirclePoint::new(rng.gen::<f64>());
    let mut frame = Matrix::identity(d, d);
    let mut scratch = Matrix::zeros(d, d);
    let mut log_r = vec![0.0; d];

    // log|det frame| since the last QR, for the bound cond ≤ ‖F‖_F^d / |det F|
    let mut log_det = 0.0;
    for step in 1..=opts.n_iter {
        let s = sampler.draw(rng.gen::<f64>());
        let m = rp.maps()[s].eval(t.value());
        scratch.gemm(1.0, &m, &frame, 0.0);
        std::mem::swap(&mut frame, &mut scratch);
        t = circle::rotate(t, rp.angles()[s]);
        log_det += m.determinant().abs().ln();
        let ill_conditioned = d as f64 * frame.norm().ln() - log_det > MAX_LOG_CONDITION;

        if step % opts.qr_period == 0 || step == opts.n_iter || ill_conditioned {
            log_det = 0.0;
            if frame.iter().any(|x| !x.is_finite()) {
                return Err(LabError::RenormalizationPeriodTooLarge {
                    step,
                    period: opts.qr_period,
                });
            }
            let qr = frame.clone().qr();
            let r = qr.r();
            for (i, acc) in log_r.iter_mut().enumerate() {
                let rii = r[(i, i)].abs();
                if !(rii > 0.0) || !rii.is_finite() {
                    return Err(LabError::RenormalizationPeriodTooLarge {
                        step,
                        period: opts.qr_period,
                    });
                }
                *acc += rii.ln();
            }
            frame = qr.q();
        }
    }

    let n = opts.n_iter as f64;
    let mut values: Vec<f64> = log_r.into_iter().map(|x| x / n).collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite exponents"));
    Ok(values)
}

/// Full spectrum by QR re-orthonormalization of an evolving frame.
pub fn estimate_spectrum(rp: &RandomProduct, opts: &EstimatorOptions) -> Result<LyapunovEstimate> {
    opts.check()?;
    let reps: Vec<Vec<f64>> = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| one_replicate(rp, opts, rep))
        .collect::<Result<_>>()?;
    let d = rp.dim();
    let mut values = Vec::with_capacity(d);
    let mut stderr = Vec::with_capacity(d);
    for i in 0..d {
        let column: Vec<f64> = reps.iter().map(|r| r[i]).collect();
        let (m, s) = mean_and_stderr(&column);
        values.push(m);
        stderr.push(s);
    }
    let sums: Vec<f64> = reps.iter().map(|r| r.iter().sum()).collect();
    Ok(LyapunovEstimate {
        values,
        stderr,
        sum_stderr: mean_and_stderr(&sums).1,
        n_iter: opts.n_iter,
        n_rep: opts.n_rep,
        seed: opts.seed,
    })
}

fn one_top_replicate(rp: &RandomProduct, opts: &EstimatorOptions, rep: usize) -> Result<f64> {
    let sampler = SymbolSampler::new(rp.weights());
    let mut rng = replicate_rng(opts.seed, rep);
    let mut t = CirclePoint::new(rng.gen::<f64>());
    let (mut x, mut y) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    // Warm-up iterates align the vector with the expanding direction; they are not counted.
    let warmup = opts.n_iter / 16;
    let mut log_growth = 0.0;

    for step in 1..=(warmup + opts.n_iter) {
        let s = sampler.draw(rng.gen::<f64>());
        let m = rp.maps()[s].eval(t.value());
        let nx = m[(0, 0)] * x + m[(0, 1)] * y;
        let ny = m[(1, 0)] * x + m[(1, 1)] * y;
        x = nx;
        y = ny;
        t = circle::rotate(t, rp.angles()[s]);

        if step % opts.qr_period == 0 || step == warmup || step == warmup + opts.n_iter {
            let norm = x.hypot(y);
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(LabError::RenormalizationPeriodTooLarge {
                    step,
                    period: opts.qr_period,
                });
            }
            if step > warmup {
                log_growth += norm.ln();
            }
            x /= norm;
            y /= norm;
        }
    }
    Ok(log_growth / opts.n_iter as f64)
}

/// Norm growth of a single vector; the `d = 2` specialization for `λ₊`.
pub fn estimate_top_exponent(rp: &RandomProduct, opts: &EstimatorOptions) -> Result<TopExponent> {
    opts.check()?;
    if rp.dim() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: rp.dim(),
        });
    }
    let reps: Vec<f64> = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| one_top_replicate(rp, opts, rep))
        .collect::<Result<_>>()?;
    let (value, stderr) = mean_and_stderr(&reps);
    Ok(TopExponent { value, stderr })
}

/// `∫₀¹ log|aᵢ(t)| dt` for each diagonal entry, in index order.
pub fn diagonal_spectrum(a: &TrigMatrixMap) -> Result<Vec<f64>> {
    if a.tag() != GroupTag::Diagonal {
        return Err(LabError::InvalidMap("diagonal_spectrum needs a DIAGONAL map".into()));
    }
    (0..a.dim())
        .map(|i| {
            let entry = a.entry(i, i);
            let mut prev = entry.eval(0.0);
            for j in 0..=CERT_GRID {
                let t = j as f64 / CERT_GRID as f64;
                let v = entry.eval(t);
                if !(v.abs() > DET_FLOOR) || v.signum() != prev.signum() {
                    return Err(LabError::NonInvertible { t, det: v });
                }
                prev = v;
            }
            Ok(circle_integral(|t| entry.eval(t).abs().ln()))
        })
        .collect()
}

/// `∫₀¹ log|det A(t)| dt`.
pub fn log_det_integral(a: &TrigMatrixMap) -> f64 {
    circle_integral(|t| a.eval(t).determinant().abs().ln())
}

/// `Σᵢ νᵢ ∫ log|det Aᵢ|`, the sum of all exponents of the random product.
pub fn exponent_sum(rp: &RandomProduct) -> f64 {
    rp.maps()
        .iter()
        .zip(rp.weights())
        .map(|(m, w)| w * log_det_integral(m))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{make_schrodinger, rescale_diagonal, right_rotate, TrigPoly};
    use crate::linalg::{diag, rotation};

    fn golden(map: TrigMatrixMap) -> RandomProduct {
        RandomProduct::single(circle::GOLDEN_ANGLE, map)
    }

    #[test]
    fn constant_diagonal_is_exact() {
        let a = TrigMatrixMap::constant(&diag(&[2.0, 1.0, 0.5]), GroupTag::Diagonal).unwrap();
        let est = estimate_spectrum(&golden(a), &EstimatorOptions::new(10_000, 4, 1)).unwrap();
        let ln2 = 2f64.ln();
        for (v, e) in est.values.iter().zip([ln2, 0.0, -ln2]) {
            assert!((v - e).abs() < 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn reversed_diagonal_is_sorted() {
        let a = TrigMatrixMap::constant(&diag(&[0.5, 2.0]), GroupTag::Diagonal).unwrap();
        let est = estimate_spectrum(&golden(a), &EstimatorOptions::new(1000, 2, 1)).unwrap();
        assert!(est.values[0] > est.values[1]);
        assert!((est.values[0] - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn schrodinger_constant_energy_three() {
        let a = make_schrodinger(&TrigPoly::constant(3.0)).unwrap();
        let est = estimate_spectrum(&golden(a), &EstimatorOptions::new(100_000, 4, 3)).unwrap();
        let exact = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((est.values[0] - exact).abs() < 1e-3);
        assert!(est.sum().abs() <= 3.0 * est.sum_stderr + 1e-9, "{}", est.sum());
    }

    #[test]
    fn top_exponent_examples() {
        let a = TrigMatrixMap::constant(&diag(&[2.0, 0.5]), GroupTag::Sl2).unwrap();
        let top = estimate_top_exponent(&golden(a), &EstimatorOptions::new(10_000, 4, 9)).unwrap();
        assert!((top.value - 2f64.ln()).abs() < 1e-6);

        let r = TrigMatrixMap::constant(&rotation(0.1234), GroupTag::Sl2).unwrap();
        let top = estimate_top_exponent(&golden(r), &EstimatorOptions::new(10_000, 8, 9)).unwrap();
        assert!(top.value.abs() <= 3.0 * top.stderr + 1e-12, "{top:?}");
    }

    #[test]
    fn top_exponent_needs_planar_maps() {
        let a = TrigMatrixMap::identity(3);
        assert!(estimate_top_exponent(&golden(a), &EstimatorOptions::new(10, 1, 0)).is_err());
    }

    #[test]
    fn steep_gap_renormalizes_early() {
        // 20 steps of this map would overflow; the condition guard re-orthonormalizes first
        let a = TrigMatrixMap::constant(&diag(&[1e30, 1e-30]), GroupTag::Diagonal).unwrap();
        let est = estimate_spectrum(&golden(a), &EstimatorOptions::new(100, 1, 0)).unwrap();
        let l = 1e30f64.ln();
        assert!((est.values[0] - l).abs() < 1e-12 && (est.values[1] + l).abs() < 1e-12);
    }

    #[test]
    fn sl2_sum_is_numerically_zero() {
        let a = make_schrodinger(&TrigPoly::new(2.5, vec![1.0], vec![0.4])).unwrap();
        let est = estimate_spectrum(&golden(a), &EstimatorOptions::new(50_000, 4, 11)).unwrap();
        assert!(est.sum().abs() < 1e-9, "{}", est.sum());
    }

    #[test]
    fn diagonal_spectrum_examples() {
        let a = TrigMatrixMap::constant(&diag(&[4.0, 2.0, 1.0]), GroupTag::Diagonal).unwrap();
        let s = diagonal_spectrum(&a).unwrap();
        assert!((s[0] - 4f64.ln()).abs() < 1e-14 && (s[1] - 2f64.ln()).abs() < 1e-14 && s[2].abs() < 1e-14);

        let b = TrigMatrixMap::diagonal(vec![TrigPoly::new(2.0, vec![1.0], vec![0.0])]).unwrap();
        let s = diagonal_spectrum(&b).unwrap();
        assert!((s[0] - ((2.0 + 3f64.sqrt()) / 2.0).ln()).abs() < 1e-12);

        let r = rescale_diagonal(&a, &[std::f64::consts::E, 3.0, 0.25]).unwrap();
        let sr = diagonal_spectrum(&r).unwrap();
        let base = diagonal_spectrum(&a).unwrap();
        for (i, b) in [1.0, 3f64.ln(), 0.25f64.ln()].iter().enumerate() {
            assert!((sr[i] - base[i] - b).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_spectrum_detects_sign_change() {
        // 0.5 + cos has zeros strictly between grid points of the certification grid
        let entries = vec![TrigPoly::new(0.5, vec![1.0], vec![0.0]), TrigPoly::constant(1.0)];
        // map construction itself may pass the det floor, but the spectrum must refuse
        if let Ok(a) = TrigMatrixMap::diagonal(entries) {
            assert!(matches!(diagonal_spectrum(&a), Err(LabError::NonInvertible { .. })));
        }
        let general = TrigMatrixMap::constant(&Matrix::identity(2, 2), GroupTag::General).unwrap();
        assert!(diagonal_spectrum(&general).is_err());
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let a = make_schrodinger(&TrigPoly::new(1.0, vec![1.5], vec![0.3])).unwrap();
        let b = right_rotate(&a, 0.1).unwrap();
        let rp = RandomProduct::uniform(vec![circle::GOLDEN_ANGLE, 0.3], vec![a, b]).unwrap();
        let opts = EstimatorOptions::new(5_000, 6, 77);
        let e1 = estimate_spectrum(&rp, &opts).unwrap();
        let e2 = estimate_spectrum(&rp, &opts).unwrap();
        assert_eq!(e1, e2);
        let t1 = estimate_top_exponent(&rp, &opts).unwrap();
        let t2 = estimate_top_exponent(&rp, &opts).unwrap();
        assert_eq!(t1.value.to_bits(), t2.value.to_bits());
    }

    #[test]
    fn symbol_sampler_inverts_cdf() {
        let s = SymbolSampler::new(&[0.25, 0.25, 0.5]);
        assert_eq!(s.draw(0.0), 0);
        assert_eq!(s.draw(0.3), 1);
        assert_eq!(s.draw(0.9999), 2);
    }
}
