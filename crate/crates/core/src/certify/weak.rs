use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Certificate, CertificateKind, Verdict};
use crate::circle::CirclePoint;
use crate::cocycle::RandomProduct;
use crate::error::{LabError, Result};
use crate::holonomy::{self, DEFAULT_N_PULLBACK, DEFAULT_RESIDUAL_TOL};
use crate::linalg;
use crate::lyapunov::{self, EstimatorOptions};
use crate::quadrature::circle_integral;

pub const DEFAULT_SEP_TOL: f64 = 1e-3;
pub const DEFAULT_FRAC_THRESHOLD: f64 = 0.05;
/// Minimal fraction of converged direction samples.
const MIN_CONVERGED: f64 = 0.5;

/// Weak pinching: `λ₊(θ₀, A₀) > 0`.
///
/// For GL₂ data the exponent is taken for `A₀/√|det A₀|`, which is `λ₊`
/// itself on SL₂. The uncertainty is `σ = max(stderr, 1/n_iter)`; the last
/// term bounds the finite-time transient. FAIL is witnessed either by the
/// subadditive bound `λ₊ ≤ ∫ log‖A₀‖ ≤ 0` or by an estimate below `−3σ`.
pub fn weakly_pinching(rp: &RandomProduct, opts: &EstimatorOptions) -> Result<Certificate> {
    if rp.dim() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: rp.dim(),
        });
    }
    let single = rp.restrict(0);
    let a0 = &rp.maps()[0];
    let half_log_det = 0.5 * lyapunov::log_det_integral(a0);
    let norm_bound = circle_integral(|t| linalg::op_norm(&a0.eval(t)).ln()) - half_log_det;

    let top = lyapunov::estimate_top_exponent(&single, opts)?;
    let lambda = top.value - half_log_det;
    let sigma = top.stderr.max(1.0 / opts.n_iter as f64);
    let margin = lambda - 3.0 * sigma;

    let (verdict, witness) = if margin > 0.0 {
        (Verdict::Pass, None)
    } else if norm_bound <= 1e-12 {
        (
            Verdict::Fail,
            Some(format!("subadditive bound on the top exponent is {norm_bound:e} <= 0")),
        )
    } else if lambda < -3.0 * sigma {
        (
            Verdict::Fail,
            Some(format!("top exponent estimate {lambda:e} is negative")),
        )
    } else {
        (Verdict::Inconclusive, None)
    };
    let mut cert = Certificate::new(CertificateKind::WeakPinch, verdict, margin)
        .with("lambda_plus", lambda)
        .with("stderr", top.stderr)
        .with("sigma", sigma)
        .with("norm_bound", norm_bound)
        .with("n_iter", opts.n_iter as f64)
        .with("n_rep", opts.n_rep as f64);
    if let Some(w) = witness {
        cert = cert.witnessed(w);
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistOptions {
    pub n_samples: usize,
    /// Minimal projective distance for a sample to count as separated.
    pub sep_tol: f64,
    /// Minimal fraction of separated samples.
    pub frac_threshold: f64,
    pub seed: u64,
    pub n_pullback: usize,
    pub residual_tol: f64,
}

impl Default for TwistOptions {
    fn default() -> Self {
        TwistOptions {
            n_samples: 1000,
            sep_tol: DEFAULT_SEP_TOL,
            frac_threshold: DEFAULT_FRAC_THRESHOLD,
            seed: 0,
            n_pullback: DEFAULT_N_PULLBACK,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

/// Minimal distance between `H_t{e₊(t), e₋(t)}` and `{e₊(h(t)), e₋(h(t))}`,
/// or `None` when either direction pair failed to converge.
fn separation(rp: &RandomProduct, t: f64, opts: &TwistOptions) -> Result<Option<f64>> {
    let theta0 = rp.angles()[0];
    let a0 = &rp.maps()[0];
    let here = holonomy::oseledets_directions(theta0, a0, CirclePoint::new(t), opts.n_pullback, opts.residual_tol)?;
    let ht = holonomy::base_holonomy(rp, CirclePoint::new(t));
    let there = holonomy::oseledets_directions(theta0, a0, ht, opts.n_pullback, opts.residual_tol)?;
    if !(here.converged && there.converged) {
        return Ok(None);
    }
    let h = holonomy::closed_form_ht(rp, CirclePoint::new(t))?;
    let images = [linalg::apply2(&h, &here.e_plus), linalg::apply2(&h, &here.e_minus)];
    let targets = [there.e_plus, there.e_minus];
    let mut best = f64::INFINITY;
    for u in &images {
        for v in &targets {
            best = best.min(linalg::projective_distance(u, v));
        }
    }
    Ok(Some(best))
}

/// Weak twisting: the holonomy image of the Oseledets pair at `t` misses the
/// pair at `h(t)` (all four distances at least `sep_tol`) on more than a
/// `frac_threshold` fraction of uniformly drawn `t`.
pub fn weakly_twisting(rp: &RandomProduct, opts: &TwistOptions) -> Result<Certificate> {
    if rp.dim() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: rp.dim(),
        });
    }
    if opts.n_samples == 0 || !(opts.sep_tol > 0.0) || !(opts.frac_threshold >= 0.0) {
        return Err(LabError::InvalidArgument(
            "n_samples and sep_tol must be positive, frac_threshold non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ts: Vec<f64> = (0..opts.n_samples).map(|_| rng.gen::<f64>()).collect();
    let seps = ts
        .par_iter()
        .map(|&t| separation(rp, t, opts))
        .collect::<Result<Vec<_>>>()?;

    let n = opts.n_samples as f64;
    let converged: Vec<(f64, f64)> = ts.iter().zip(&seps).filter_map(|(&t, s)| s.map(|s| (t, s))).collect();
    let converged_fraction = converged.len() as f64 / n;
    let separated = converged.iter().filter(|(_, s)| *s >= opts.sep_tol).count() as f64;
    let separated_fraction = separated / n;
    let min_sep = converged.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
    let max_sep = converged.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    let margin = separated_fraction - opts.frac_threshold;

    let witness = converged.iter().find(|(_, s)| *s < opts.sep_tol);
    let verdict = if converged_fraction < MIN_CONVERGED {
        Verdict::Inconclusive
    } else if margin > 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut cert = Certificate::new(CertificateKind::WeakTwist, verdict, margin)
        .with("converged_fraction", converged_fraction)
        .with("separated_fraction", separated_fraction)
        .with("min_separation", if converged.is_empty() { 0.0 } else { min_sep })
        .with("max_separation", max_sep)
        .with("sep_tol", opts.sep_tol)
        .with("frac_threshold", opts.frac_threshold)
        .with("n_samples", n);
    if let Some(&(t, s)) = witness {
        cert = cert.with("witness_t", t);
        if verdict == Verdict::Fail {
            cert = cert.witnessed(format!("t = {t}: holonomy image within {s:e} of the target pair"));
        }
    }
    Ok(cert)
}
