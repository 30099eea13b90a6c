//! Numerical certificates for weak pinching/twisting (`d = 2`) and for
//! pinching/twisting (`d > 2`).

mod logint;
mod minor;
mod pinching;
mod twisting;
mod weak;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use logint::{log_integrability, LogIntegrabilityReport, LogIntegral, ZeroInfo, TRANSVERSALITY_REL};
pub use minor::{minor, MinorIndex};
pub use pinching::{pinching_d, DEFAULT_REL_GAP};
pub use twisting::{twisting_d, twisting_report, MinorReport, TwistingReport, DEFAULT_GRID_N, DEFAULT_ZERO_TOL};
pub use weak::{weakly_pinching, weakly_twisting, TwistOptions, DEFAULT_FRAC_THRESHOLD, DEFAULT_SEP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateKind {
    WeakPinch,
    WeakTwist,
    PinchD,
    TwistD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::WeakPinch => "WEAK_PINCH",
            CertificateKind::WeakTwist => "WEAK_TWIST",
            CertificateKind::PinchD => "PINCH_D",
            CertificateKind::TwistD => "TWIST_D",
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Verdict of one condition with its numeric margin.
///
/// `Pass` always carries a positive margin; `Fail` carries a `witness`
/// describing the observed violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    pub margin: f64,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Certificate {
    fn new(kind: CertificateKind, verdict: Verdict, margin: f64) -> Self {
        debug_assert!(verdict != Verdict::Pass || margin > 0.0, "PASS with margin {margin}");
        Certificate {
            kind,
            verdict,
            margin,
            diagnostics: BTreeMap::new(),
            witness: None,
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    fn witnessed(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }
}
