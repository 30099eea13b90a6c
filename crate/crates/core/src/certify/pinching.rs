use super::minor::subsets;
use super::{Certificate, CertificateKind, Verdict};
use crate::error::{LabError, Result};

/// Default relative subset-sum separation, as a fraction of the exponent spread.
pub const DEFAULT_REL_GAP: f64 = 1e-6;

fn format_subset(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Checks that for every `j = 1..d−1` the `C(d, j)` sums of `j` distinct
/// exponents are pairwise separated by more than `rel_gap · (λ_max − λ_min)`.
///
/// The margin is the smallest normalized gap minus `rel_gap`; a failure
/// reports the closest pair of index sets (1-based).
pub fn pinching_d(exponents: &[f64], rel_gap: f64) -> Result<Certificate> {
    let d = exponents.len();
    if d < 2 {
        return Err(LabError::InvalidArgument(
            "pinching needs at least two exponents".into(),
        ));
    }
    if exponents.iter().any(|x| !x.is_finite()) {
        return Err(LabError::InvalidArgument("exponents must be finite".into()));
    }
    if !(rel_gap >= 0.0) {
        return Err(LabError::InvalidArgument("rel_gap must be non-negative".into()));
    }
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = exponents.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;

    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for j in 1..d {
        let mut sums: Vec<(f64, Vec<usize>)> = subsets(d, j)
            .into_iter()
            .map(|s| (s.iter().map(|&i| exponents[i]).sum(), s))
            .collect();
        sums.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite sums"));
        for w in sums.windows(2) {
            let gap = if spread > 0.0 { (w[1].0 - w[0].0) / spread } else { 0.0 };
            if best.as_ref().is_none_or(|(g, _, _)| gap < *g) {
                let (mut a, mut b) = (w[0].1.clone(), w[1].1.clone());
                if b < a {
                    std::mem::swap(&mut a, &mut b);
                }
                best = Some((gap, a, b));
            }
        }
    }
    let (min_gap, a, b) = best.expect("d ≥ 2 gives at least one pair");
    let margin = min_gap - rel_gap;
    let cert = Certificate::new(
        CertificateKind::PinchD,
        if margin > 0.0 { Verdict::Pass } else { Verdict::Fail },
        margin,
    )
    .with("min_normalized_gap", min_gap)
    .with("spread", spread)
    .with("rel_gap", rel_gap);
    Ok(if margin > 0.0 {
        cert
    } else {
        cert.witnessed(format!("{} vs {}", format_subset(&a), format_subset(&b)))
    })
}
