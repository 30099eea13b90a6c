//! Experiment driver behind the `cocycle-lab` binary: JSON configs, CSV
//! result tables with a provenance header, and JSON certificates.

mod commands;
mod config;
mod table;

use std::path::{Path, PathBuf};

pub use commands::{
    certify_product, cmd_certify, cmd_continuity_probe, cmd_lyapunov, cmd_perturb_search, cmd_sweep_energy,
    constant_schrodinger_exponent, sha256_hex, CertifyOutput, Experiment,
};
pub use config::{Direction, EnergyRange, ExperimentConfig, ExperimentKind};
pub use table::{Cell, ResultTable};

use crate::error::{LabError, Result};

/// Files written by one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub table: PathBuf,
    pub certificates: Option<PathBuf>,
}

/// `out.csv` → `out.json`.
pub fn certificates_path(table: &Path) -> PathBuf {
    table.with_extension("json")
}

/// Runs `kind` on a loaded experiment and writes the table to `out`, plus
/// the certificate JSON next to it for `certify`. With `threads` set the
/// work runs on a dedicated pool of that size.
pub fn run(kind: ExperimentKind, exp: &Experiment, out: &Path, threads: Option<usize>) -> Result<RunOutput> {
    let work = || -> Result<(ResultTable, Option<String>)> {
        Ok(match kind {
            ExperimentKind::Lyapunov => (cmd_lyapunov(exp)?, None),
            ExperimentKind::Certify => {
                let o = cmd_certify(exp)?;
                let json = o.certificates_json(exp)?;
                (o.table, Some(json))
            }
            ExperimentKind::SweepEnergy => (cmd_sweep_energy(exp)?, None),
            ExperimentKind::Continuity => (cmd_continuity_probe(exp)?, None),
            ExperimentKind::PerturbSearch => (cmd_perturb_search(exp)?, None),
        })
    };
    let (table, json) = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| LabError::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, table.to_csv_string())?;
    let certificates = match json {
        Some(text) => {
            let path = certificates_path(out);
            std::fs::write(&path, text)?;
            Some(path)
        }
        None => None,
    };
    Ok(RunOutput {
        table: out.to_path_buf(),
        certificates,
    })
}
