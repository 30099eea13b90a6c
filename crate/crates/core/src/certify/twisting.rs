use rayon::prelude::*;

use super::logint::{log_integrability, LogIntegrabilityReport};
use super::minor::{minor, MinorIndex};
use super::{Certificate, CertificateKind, Verdict};
use crate::circle::CirclePoint;
use crate::cocycle::RandomProduct;
use crate::error::{LabError, Result};
use crate::holonomy::closed_form_ht;

pub const DEFAULT_GRID_N: usize = 1 << 14;
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinorReport {
    pub index: MinorIndex,
    pub report: LogIntegrabilityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistingReport {
    pub certificate: Certificate,
    pub minors: Vec<MinorReport>,
}

/// Runs the log-integrability estimator on `t ↦ P_{I,J}(H_t)` for every
/// minor and assembles the TWIST_D certificate.
///
/// On PASS the margin is `1 / (1 + m)` where `m` is the largest number of
/// non-transversal zeros of a single minor; on FAIL it is minus the number
/// of non-integrable minors.
pub fn twisting_report(rp: &RandomProduct, grid_n: usize, zero_tol: f64) -> Result<TwistingReport> {
    let d = rp.dim();
    if d < 2 {
        return Err(LabError::InvalidArgument("twisting needs d >= 2".into()));
    }
    if rp.k() < 1 {
        return Err(LabError::InvalidProduct("twisting needs at least two symbols".into()));
    }
    // Evaluating H_t can only fail on a singular A₀, which map construction rules out.
    closed_form_ht(rp, CirclePoint::new(0.0))?;
    let minors = MinorIndex::all(d)
        .into_par_iter()
        .map(|index| {
            let g = |t: f64| {
                closed_form_ht(rp, CirclePoint::new(t))
                    .map(|h| minor(&h, &index))
                    .unwrap_or(f64::NAN)
            };
            let report = log_integrability(g, grid_n, zero_tol)?;
            Ok(MinorReport { index, report })
        })
        .collect::<Result<Vec<_>>>()?;

    let failing: Vec<&MinorReport> = minors.iter().filter(|m| !m.report.estimate.is_finite()).collect();
    let worst = minors
        .iter()
        .map(|m| m.report.non_transversal_count())
        .max()
        .unwrap_or(0);
    let mut cert = if failing.is_empty() {
        Certificate::new(CertificateKind::TwistD, Verdict::Pass, 1.0 / (1.0 + worst as f64))
    } else {
        let names: Vec<String> = failing.iter().map(|m| m.index.to_string()).collect();
        Certificate::new(CertificateKind::TwistD, Verdict::Fail, -(failing.len() as f64))
            .witnessed(format!("non-integrable minor {}", names.join("; ")))
    };
    cert = cert
        .with("max_nontransversal_zeros", worst as f64)
        .with("minors", minors.len() as f64)
        .with("grid_n", grid_n as f64);
    for m in &minors {
        cert = cert
            .with(&format!("integral[{}]", m.index), m.report.estimate.value())
            .with(&format!("zeros[{}]", m.index), m.report.zeros.len() as f64);
    }
    Ok(TwistingReport {
        certificate: cert,
        minors,
    })
}

/// TWIST_D certificate: every minor of `H_t` has integrable `|log|·||`.
pub fn twisting_d(rp: &RandomProduct, grid_n: usize, zero_tol: f64) -> Result<Certificate> {
    twisting_report(rp, grid_n, zero_tol).map(|r| r.certificate)
}
