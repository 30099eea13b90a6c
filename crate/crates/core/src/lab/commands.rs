use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::{Cell, ResultTable};
use crate::certify::{self, Certificate, CertificateKind, TwistOptions};
use crate::cocycle::{
    fejer_bump, make_schrodinger, potential_at_energy, rescale_diagonal, right_rotate, shift_potential,
    CocycleDefinition, CocycleFile, GroupTag, RandomProduct, TrigMatrixMap, CERT_GRID,
};
use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};
use crate::lyapunov::{self, EstimatorOptions};

/// Numerical floor added to statistical tolerances on exponent sums.
const SUM_FLOOR: f64 = 1e-9;
/// Agreement required between a sweep estimate and the closed form.
const SWEEP_TOL: f64 = 2e-3;
/// Number of halvings in the perturbation ladders.
const LADDER_STEPS: i32 = 10;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated config together with its cocycle and resolved seed.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub definition: CocycleDefinition,
    pub seed: u64,
    pub config_digest: String,
    pub cocycle_digest: String,
}

impl Experiment {
    /// Reads the config file, then the cocycle file it points to.
    pub fn load(config_path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(config_path)?;
        let config = ExperimentConfig::parse(&text).map_err(|e| LabError::Parse {
            path: config_path.display().to_string(),
            message: e.to_string(),
        })?;
        let dir = config_path.parent().unwrap_or_else(|| Path::new("."));
        let cocycle_path = config.cocycle_path(dir);
        let cocycle_bytes = std::fs::read(&cocycle_path)?;
        let definition = CocycleFile::load(&cocycle_path)?;
        let seed = config.resolve_seed(seed)?;
        Ok(Experiment {
            config,
            definition,
            seed,
            config_digest: sha256_hex(text.as_bytes()),
            cocycle_digest: sha256_hex(&cocycle_bytes),
        })
    }

    /// An experiment on an in-memory product; digests are taken of the
    /// serialized config and cocycle.
    pub fn in_memory(config: ExperimentConfig, definition: CocycleDefinition, seed: u64) -> Result<Self> {
        config.validate()?;
        let config_text = serde_json::to_string(&config)?;
        let cocycle_text = CocycleFile::from_product(&definition.product).to_json();
        Ok(Experiment {
            config_digest: sha256_hex(config_text.as_bytes()),
            cocycle_digest: sha256_hex(cocycle_text.as_bytes()),
            config,
            definition,
            seed,
        })
    }

    pub fn product(&self) -> &RandomProduct {
        &self.definition.product
    }

    pub fn estimator(&self) -> EstimatorOptions {
        EstimatorOptions {
            n_iter: self.config.n_iter,
            n_rep: self.config.n_rep,
            seed: self.seed,
            qr_period: self.config.qr_period,
        }
    }

    pub fn twist_options(&self) -> TwistOptions {
        TwistOptions {
            n_samples: self.config.n_samples,
            sep_tol: self.config.sep_tol,
            frac_threshold: self.config.frac_threshold,
            seed: self.seed,
            n_pullback: self.config.n_pullback,
            residual_tol: self.config.residual_tol,
        }
    }

    fn check_kind(&self, kind: ExperimentKind) -> Result<()> {
        match self.config.experiment {
            Some(k) if k != kind => Err(LabError::Config(format!(
                "config is for {}, not {}",
                k.name(),
                kind.name()
            ))),
            _ => Ok(()),
        }
    }

    fn table<S: Into<String>>(&self, kind: ExperimentKind, columns: impl IntoIterator<Item = S>) -> ResultTable {
        let mut t = ResultTable::new(columns);
        t.annotate("tool", concat!("cocycle-lab ", env!("CARGO_PKG_VERSION")));
        t.annotate("experiment", kind.name());
        t.annotate("config_sha256", &self.config_digest);
        t.annotate("cocycle_sha256", &self.cocycle_digest);
        t.annotate("seed", self.seed.to_string());
        t
    }
}

fn indexed(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect()
}

fn check_cell(ok: bool) -> Cell {
    Cell::text(if ok { "ok" } else { "violated" })
}

/// Spectrum estimates with a sum-rule check: `Σ λᵢ = Σ νᵢ ∫ log|det Aᵢ|`,
/// which is zero for SL₂ data. Products of diagonal maps get an extra
/// quadrature row.
pub fn cmd_lyapunov(exp: &Experiment) -> Result<ResultTable> {
    exp.check_kind(ExperimentKind::Lyapunov)?;
    let rp = exp.product();
    let d = rp.dim();
    let mut columns = vec!["method".to_string()];
    columns.extend(indexed("lambda", d));
    columns.extend(indexed("stderr", d));
    columns.extend(["n_iter", "n_rep", "sum", "expected_sum", "sum_check"].map(String::from));
    let mut table = exp.table(ExperimentKind::Lyapunov, columns);

    let expected = if rp.is_sl2() { 0.0 } else { lyapunov::exponent_sum(rp) };
    let est = lyapunov::estimate_spectrum(rp, &exp.estimator())?;
    let mut row: Vec<Cell> = vec!["monte-carlo".into()];
    row.extend(est.values.iter().map(|&x| Cell::Num(x)));
    row.extend(est.stderr.iter().map(|&x| Cell::Num(x)));
    row.extend([est.n_iter.into(), est.n_rep.into(), est.sum().into(), expected.into()]);
    row.push(check_cell(
        (est.sum() - expected).abs() <= 3.0 * est.sum_stderr + SUM_FLOOR,
    ));
    table.push(row)?;

    if rp.maps().iter().all(|m| m.tag() == GroupTag::Diagonal) {
        let mut values = vec![0.0; d];
        for (m, w) in rp.maps().iter().zip(rp.weights()) {
            for (v, x) in values.iter_mut().zip(lyapunov::diagonal_spectrum(m)?) {
                *v += w * x;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let sum: f64 = values.iter().sum();
        let mut row: Vec<Cell> = vec!["quadrature".into()];
        row.extend(values.iter().map(|&x| Cell::Num(x)));
        row.extend((0..d).map(|_| Cell::Num(0.0)));
        row.extend([0usize.into(), 0usize.into(), sum.into(), expected.into()]);
        row.push(check_cell((sum - expected).abs() <= SUM_FLOOR));
        table.push(row)?;
    }
    Ok(table)
}

/// Runs the certification pipeline for the dimension of `rp`; with
/// `stop_on_failure` the pipeline ends at the first certificate that does
/// not pass.
pub fn certify_product(rp: &RandomProduct, exp: &Experiment, stop_on_failure: bool) -> Result<Vec<Certificate>> {
    let d = rp.dim();
    if rp.k() < 1 {
        return Err(LabError::InvalidProduct(
            "certification needs at least two symbols".into(),
        ));
    }
    let mut out = Vec::new();
    if d == 2 {
        let pinch = certify::weakly_pinching(rp, &exp.estimator())?;
        let stop = stop_on_failure && !pinch.passed();
        out.push(pinch);
        if !stop {
            out.push(certify::weakly_twisting(rp, &exp.twist_options())?);
        }
    } else if d > 2 {
        let a0 = &rp.maps()[0];
        if a0.tag() != GroupTag::Diagonal {
            return Err(LabError::UnsupportedPipeline(format!(
                "d = {d} needs a DIAGONAL first map, got {:?}",
                a0.tag()
            )));
        }
        let exponents = lyapunov::diagonal_spectrum(a0)?;
        let pinch = certify::pinching_d(&exponents, exp.config.rel_gap)?;
        let stop = stop_on_failure && !pinch.passed();
        out.push(pinch);
        if !stop {
            out.push(certify::twisting_d(rp, exp.config.grid_n, exp.config.zero_tol)?);
        }
    } else {
        return Err(LabError::Dimension { expected: 2, got: d });
    }
    Ok(out)
}

fn summary(certs: &[Certificate]) -> String {
    certs
        .iter()
        .map(|c| format!("{}={}", c.kind, c.verdict))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone)]
pub struct CertifyOutput {
    pub table: ResultTable,
    pub certificates: Vec<Certificate>,
}

impl CertifyOutput {
    /// Certificates with the input digest and seed, as pretty JSON.
    pub fn certificates_json(&self, exp: &Experiment) -> Result<String> {
        let doc = serde_json::json!({
            "input_sha256": exp.cocycle_digest,
            "config_sha256": exp.config_digest,
            "seed": exp.seed,
            "certificates": self.certificates,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// One row per certificate of the pipeline for the input dimension.
pub fn cmd_certify(exp: &Experiment) -> Result<CertifyOutput> {
    exp.check_kind(ExperimentKind::Certify)?;
    let certificates = certify_product(exp.product(), exp, false)?;
    let mut table = exp.table(ExperimentKind::Certify, ["certificate", "verdict", "margin", "witness"]);
    for c in &certificates {
        table.push(vec![
            c.kind.to_string().into(),
            c.verdict.to_string().into(),
            c.margin.into(),
            c.witness.clone().unwrap_or_default().into(),
        ])?;
    }
    Ok(CertifyOutput { table, certificates })
}

/// `log((|E| + √(E² − 4)) / 2)` for `|E| > 2`, zero otherwise.
pub fn constant_schrodinger_exponent(e: f64) -> f64 {
    let a = e.abs();
    if a > 2.0 {
        ((a + (a * a - 4.0).sqrt()) / 2.0).ln()
    } else {
        0.0
    }
}

/// `λ₊` of the Schrödinger product with `φᵢ = E − uᵢ` over the energy grid.
/// When all `uᵢ` equal one constant `c` the closed form at `E − c` is
/// reported alongside.
pub fn cmd_sweep_energy(exp: &Experiment) -> Result<ResultTable> {
    exp.check_kind(ExperimentKind::SweepEnergy)?;
    let potentials = exp
        .definition
        .potentials
        .as_ref()
        .ok_or_else(|| LabError::Config("sweep-energy needs a cocycle given by potentials".into()))?;
    let range = exp
        .config
        .energy
        .ok_or_else(|| LabError::Config("sweep-energy needs an energy range".into()))?;
    let c = potentials[0].1.c0;
    let constant = potentials.iter().all(|(_, u)| u.is_constant() && u.c0 == c);
    let mut columns = vec!["E", "lambda_plus", "stderr"];
    if constant {
        columns.extend(["closed_form", "abs_err", "check"]);
    }
    let mut table = exp.table(ExperimentKind::SweepEnergy, columns);

    let rows = range
        .points()
        .into_par_iter()
        .map(|e| {
            let maps = potentials
                .iter()
                .map(|(_, u)| make_schrodinger(&potential_at_energy(e, u)))
                .collect::<Result<Vec<_>>>()?;
            let rp = exp.product().with_maps(maps)?;
            let top = lyapunov::estimate_top_exponent(&rp, &exp.estimator())?;
            let mut row: Vec<Cell> = vec![e.into(), top.value.into(), top.stderr.into()];
            if constant {
                let exact = constant_schrodinger_exponent(e - c);
                let err = (top.value - exact).abs();
                row.extend([
                    exact.into(),
                    err.into(),
                    check_cell(err <= SWEEP_TOL.max(3.0 * top.stderr)),
                ]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}

/// Spectrum along `A_s + εB` for the configured ladder, with common random
/// numbers across rungs.
///
/// `deviation` is `maxᵢ |λᵢ(ε) − λᵢ(0)|` and `lipschitz` is that over
/// `ε · sup‖B‖`. Rows are flagged `certified` only when the unperturbed
/// tuple passes every certificate of its pipeline.
pub fn cmd_continuity_probe(exp: &Experiment) -> Result<ResultTable> {
    exp.check_kind(ExperimentKind::Continuity)?;
    let rp = exp.product();
    let d = rp.dim();
    let direction = exp
        .config
        .direction
        .as_ref()
        .ok_or_else(|| LabError::Config("continuity needs a perturbation direction".into()))?;
    let ladder = exp
        .config
        .epsilons
        .as_ref()
        .ok_or_else(|| LabError::Config("continuity needs an epsilon ladder".into()))?;
    if direction.symbol > rp.k() {
        return Err(LabError::Config(format!(
            "direction symbol {} out of range for k = {}",
            direction.symbol,
            rp.k()
        )));
    }
    let b = direction.entries(d)?;
    let b_sup = (0..CERT_GRID)
        .map(|i| {
            let t = i as f64 / CERT_GRID as f64;
            linalg::op_norm(&Matrix::from_fn(d, d, |r, c| b[r * d + c].eval(t)))
        })
        .fold(0.0, f64::max);

    let guarantee = match certify_product(rp, exp, true) {
        Ok(certs) if certs.iter().all(Certificate::passed) => "certified",
        Ok(_) | Err(LabError::UnsupportedPipeline(_)) | Err(LabError::InvalidProduct(_)) => "no-guarantee",
        Err(e) => return Err(e),
    };

    let mut columns = vec!["epsilon".to_string()];
    columns.extend(indexed("lambda", d));
    columns.extend(["deviation", "lipschitz", "guarantee", "nonincreasing"].map(String::from));
    let mut table = exp.table(ExperimentKind::Continuity, columns);

    let opts = exp.estimator();
    let base = lyapunov::estimate_spectrum(rp, &opts)?;
    let mut row: Vec<Cell> = vec![0.0.into()];
    row.extend(base.values.iter().map(|&x| Cell::Num(x)));
    row.extend([0.0.into(), 0.0.into(), guarantee.into(), "yes".into()]);
    table.push(row)?;

    let estimates = ladder
        .par_iter()
        .map(|&eps| {
            let map = rp.maps()[direction.symbol].perturbed(&b, eps)?;
            lyapunov::estimate_spectrum(&rp.with_map(direction.symbol, map)?, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut previous = f64::INFINITY;
    for (&eps, est) in ladder.iter().zip(&estimates) {
        let deviation = est
            .values
            .iter()
            .zip(&base.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut row: Vec<Cell> = vec![eps.into()];
        row.extend(est.values.iter().map(|&x| Cell::Num(x)));
        row.extend([
            deviation.into(),
            (deviation / (eps * b_sup)).into(),
            guarantee.into(),
            Cell::text(if deviation <= previous { "yes" } else { "no" }),
        ]);
        table.push(row)?;
        previous = deviation;
    }
    Ok(table)
}

/// A perturbation family: the candidate parameters in search order and a
/// way to apply one.
struct Family {
    name: &'static str,
    symbol: usize,
    detail: String,
    candidates: Vec<Vec<f64>>,
    apply: Box<ApplyFn>,
}

type ApplyFn = dyn Fn(&TrigMatrixMap, &[f64]) -> Result<TrigMatrixMap> + Sync;

/// `budget · 2^{−j}` for `j = LADDER_STEPS, …, 0`, optionally with both signs.
fn ladder(budget: f64, signed: bool) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for j in (0..=LADDER_STEPS).rev() {
        let x = budget * 0.5f64.powi(j);
        out.push(vec![x]);
        if signed {
            out.push(vec![-x]);
        }
    }
    out
}

fn choose_family(rp: &RandomProduct, exp: &Experiment, failing: &Certificate) -> Option<Family> {
    let budget = exp.config.budget;
    match failing.kind {
        CertificateKind::WeakPinch => {
            let a0 = &rp.maps()[0];
            a0.potential()?;
            Some(Family {
                name: "potential-shift",
                symbol: 0,
                detail: String::new(),
                candidates: ladder(budget, true),
                apply: Box::new(|m, p| m.with_potential(&shift_potential(m.potential().expect("Schrödinger"), p[0]))),
            })
        }
        CertificateKind::WeakTwist => {
            let a1 = &rp.maps()[1];
            if a1.potential().is_some() {
                let t = failing.diagnostic("witness_t").unwrap_or(0.0);
                let bump = fejer_bump(t, a1.degree() + 8);
                Some(Family {
                    name: "potential-bump",
                    symbol: 1,
                    detail: format!("t={t}"),
                    candidates: ladder(budget, true),
                    apply: Box::new(move |m, p| {
                        let phi = m.potential().expect("Schrödinger").add(&bump.scaled(p[0]));
                        m.with_potential(&phi)
                    }),
                })
            } else {
                Some(Family {
                    name: "rotation",
                    symbol: 1,
                    detail: String::new(),
                    candidates: ladder(budget, false),
                    apply: Box::new(|m, p| right_rotate(m, p[0])),
                })
            }
        }
        CertificateKind::PinchD | CertificateKind::TwistD => {
            let d = rp.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            let candidates = (0..exp.config.max_trials)
                .map(|_| (0..d).map(|_| rng.gen_range(-budget..=budget)).collect())
                .collect();
            Some(Family {
                name: "diagonal-rescale",
                symbol: 0,
                detail: String::new(),
                candidates,
                apply: Box::new(|m, p| {
                    let b: Vec<f64> = p.iter().map(|x| x.exp()).collect();
                    rescale_diagonal(m, &b)
                }),
            })
        }
    }
}

/// Searches a perturbation family matched to the first failing certificate
/// for a tuple passing the whole pipeline, with parameters bounded by the
/// budget. For the rescale family the parameters are `log bᵢ`.
pub fn cmd_perturb_search(exp: &Experiment) -> Result<ResultTable> {
    exp.check_kind(ExperimentKind::PerturbSearch)?;
    let rp = exp.product();
    let mut table = exp.table(
        ExperimentKind::PerturbSearch,
        [
            "outcome",
            "family",
            "parameter",
            "c0_distance",
            "trials",
            "certificates",
            "detail",
        ],
    );
    let base = certify_product(rp, exp, true)?;
    let Some(failing) = base.iter().find(|c| !c.passed()) else {
        table.push(vec![
            "already-pass".into(),
            "none".into(),
            0.0.into(),
            0.0.into(),
            0usize.into(),
            summary(&base).into(),
            "".into(),
        ])?;
        return Ok(table);
    };
    let Some(family) = choose_family(rp, exp, failing) else {
        table.push(vec![
            "not-found".into(),
            "none".into(),
            0.0.into(),
            0.0.into(),
            0usize.into(),
            summary(&base).into(),
            format!("no perturbation family for {}", failing.kind).into(),
        ])?;
        return Ok(table);
    };

    let original = &rp.maps()[family.symbol];
    let mut trials = 0;
    let mut last = base.clone();
    for params in family.candidates.iter().take(exp.config.max_trials) {
        trials += 1;
        let map = (family.apply)(original, params)?;
        let candidate = rp.with_map(family.symbol, map.clone())?;
        let certs = certify_product(&candidate, exp, true)?;
        let passed = certs.len() == 2 && certs.iter().all(Certificate::passed);
        last = certs;
        if passed {
            let magnitude = params.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut detail = family.detail.clone();
            if params.len() > 1 {
                let logs: Vec<String> = params.iter().map(|x| Cell::Num(*x).to_string()).collect();
                detail = format!("log_b=[{}]", logs.join(" "));
            }
            table.push(vec![
                "found".into(),
                family.name.into(),
                (if params.len() == 1 { params[0] } else { magnitude }).into(),
                map.c0_distance(original, CERT_GRID).into(),
                trials.into(),
                summary(&last).into(),
                detail.into(),
            ])?;
            return Ok(table);
        }
    }
    table.push(vec![
        "not-found".into(),
        family.name.into(),
        exp.config.budget.into(),
        0.0.into(),
        trials.into(),
        summary(&last).into(),
        "budget exhausted".into(),
    ])?;
    Ok(table)
}
