use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cocycle_lab::lab::{sha256_hex, ResultTable};
use serde_json::{json, Value};

const GOLDEN: f64 = 0.6180339887498948;

fn constant_map(tag: &str, m: &[&[f64]]) -> Value {
    let coeffs: Vec<Vec<f64>> = m.iter().flat_map(|row| row.iter().map(|&x| vec![x])).collect();
    json!({ "group_tag": tag, "degree": 0, "coeffs": coeffs })
}

fn hyperbolic_pair(theta: f64) -> Value {
    let (s, c) = (std::f64::consts::TAU * theta).sin_cos();
    json!({
        "d": 2, "k": 1, "angles": [GOLDEN, 0.3], "weights": [0.5, 0.5],
        "maps": [
            constant_map("SL2", &[&[2.0, 0.0], &[0.0, 0.5]]),
            constant_map("SL2", &[&[2.0 * c, -2.0 * s], &[0.5 * s, 0.5 * c]]),
        ]
    })
}

struct Lab {
    dir: tempfile::TempDir,
}

impl Lab {
    fn new() -> Self {
        Lab {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, value: &Value) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
        p
    }

    fn run(&self, sub: &str, config: &Path, out: &str, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_cocycle-lab"))
            .arg(sub)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(self.path(out))
            .args(extra)
            .output()
            .unwrap()
    }

    fn table(&self, out: &str) -> ResultTable {
        let text = std::fs::read_to_string(self.path(out)).unwrap();
        ResultTable::read_csv(text.as_bytes()).unwrap()
    }
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn num(t: &ResultTable, row: usize, col: &str) -> f64 {
    t.cell(row, col)
        .and_then(|c| c.as_num())
        .unwrap_or_else(|| panic!("{col}"))
}

fn text<'a>(t: &'a ResultTable, row: usize, col: &str) -> &'a str {
    t.cell(row, col)
        .and_then(|c| c.as_text())
        .unwrap_or_else(|| panic!("{col}"))
}

#[test]
fn lyapunov_on_constant_diagonal() {
    let lab = Lab::new();
    lab.write(
        "diag.json",
        &json!({ "d": 3, "k": 0, "angles": [GOLDEN], "weights": [1.0],
                 "maps": [constant_map("DIAGONAL", &[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.5]])] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "diag.json", "seed": 1, "n_iter": 5000, "n_rep": 3 }),
    );
    ok(&lab.run("lyapunov", &cfg, "out.csv", &[]));
    let t = lab.table("out.csv");
    assert_eq!(t.rows.len(), 2);
    let ln2 = 2f64.ln();
    for row in 0..2 {
        assert!((num(&t, row, "lambda_1") - ln2).abs() < 1e-10);
        assert!(num(&t, row, "lambda_2").abs() < 1e-10);
        assert!((num(&t, row, "lambda_3") + ln2).abs() < 1e-10);
        assert_eq!(text(&t, row, "sum_check"), "ok");
    }
    assert_eq!(text(&t, 1, "method"), "quadrature");
    assert_eq!(t.provenance_value("seed"), Some("1"));
    assert_eq!(t.provenance_value("experiment"), Some("lyapunov"));
    let cfg_text = std::fs::read(&cfg).unwrap();
    assert_eq!(
        t.provenance_value("config_sha256"),
        Some(sha256_hex(&cfg_text).as_str())
    );
}

#[test]
fn schrodinger_energy_three_and_sl2_check() {
    let lab = Lab::new();
    lab.write(
        "s.json",
        &json!({ "d": 2, "k": 0, "angles": [GOLDEN], "weights": [1.0],
                 "potentials": [{ "energy": 3.0, "degree": 0, "u": [0.0] }] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "s.json", "seed": 2, "n_iter": 20000, "n_rep": 4 }),
    );
    ok(&lab.run("lyapunov", &cfg, "out.csv", &[]));
    let t = lab.table("out.csv");
    assert!((num(&t, 0, "lambda_1") - 0.9624236501192069).abs() < 1e-3);
    assert_eq!(num(&t, 0, "expected_sum"), 0.0);
    assert_eq!(text(&t, 0, "sum_check"), "ok");
}

#[test]
fn seed_is_required_and_overridable() {
    let lab = Lab::new();
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "pair.json", "n_iter": 1000, "n_rep": 2 }),
    );
    let o = lab.run("lyapunov", &cfg, "a.csv", &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    ok(&lab.run("lyapunov", &cfg, "a.csv", &["--seed", "9"]));
    assert_eq!(lab.table("a.csv").provenance_value("seed"), Some("9"));
}

#[test]
fn certify_pair_writes_table_and_certificates() {
    let lab = Lab::new();
    let cocycle = lab.write("pair.json", &hyperbolic_pair(0.125));
    let cfg = lab.write(
        "cfg.json",
        &json!({ "experiment": "certify", "cocycle": "pair.json", "seed": 3, "n_iter": 20000, "n_samples": 200 }),
    );
    ok(&lab.run("certify", &cfg, "cert.csv", &[]));
    let t = lab.table("cert.csv");
    assert_eq!(text(&t, 0, "certificate"), "WEAK_PINCH");
    assert_eq!(text(&t, 0, "verdict"), "PASS");
    assert_eq!(text(&t, 1, "certificate"), "WEAK_TWIST");
    assert_eq!(text(&t, 1, "verdict"), "PASS");

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(lab.path("cert.json")).unwrap()).unwrap();
    assert_eq!(doc["seed"], 3);
    assert_eq!(doc["input_sha256"], sha256_hex(&std::fs::read(cocycle).unwrap()));
    let certs = doc["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 2);
    assert_eq!(certs[1]["kind"], "WEAK_TWIST");
    assert_eq!(certs[1]["verdict"], "PASS");
    assert!(certs[1]["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn progression_exponents_fail_pinching_with_collision() {
    let lab = Lab::new();
    let e = std::f64::consts::E;
    let cauchy: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| 1.0 / (i + j + 1) as f64).collect())
        .collect();
    let rows: Vec<&[f64]> = cauchy.iter().map(Vec::as_slice).collect();
    lab.write(
        "ap.json",
        &json!({ "d": 4, "k": 1, "angles": [GOLDEN, 0.35], "weights": [0.5, 0.5],
                 "maps": [
                     constant_map("DIAGONAL", &[&[e.powi(3), 0.0, 0.0, 0.0], &[0.0, e * e, 0.0, 0.0], &[0.0, 0.0, e, 0.0], &[0.0, 0.0, 0.0, 1.0]]),
                     constant_map("GENERAL", &rows),
                 ] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "ap.json", "seed": 4, "grid_n": 1024, "budget": 0.05 }),
    );
    ok(&lab.run("certify", &cfg, "c.csv", &[]));
    let t = lab.table("c.csv");
    assert_eq!(text(&t, 0, "certificate"), "PINCH_D");
    assert_eq!(text(&t, 0, "verdict"), "FAIL");
    assert_eq!(text(&t, 0, "witness"), "{1,4} vs {2,3}");
    assert_eq!(text(&t, 1, "verdict"), "PASS");

    ok(&lab.run("perturb-search", &cfg, "p.csv", &[]));
    let p = lab.table("p.csv");
    assert_eq!(text(&p, 0, "outcome"), "found");
    assert_eq!(text(&p, 0, "family"), "diagonal-rescale");
    assert!(num(&p, 0, "parameter") <= 0.05);
    assert_eq!(text(&p, 0, "certificates"), "PINCH_D=PASS;TWIST_D=PASS");
}

#[test]
fn non_diagonal_first_map_is_unsupported_for_d_above_two() {
    let lab = Lab::new();
    let m: &[&[f64]] = &[&[2.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]];
    lab.write(
        "g.json",
        &json!({ "d": 3, "k": 1, "angles": [GOLDEN, 0.3], "weights": [0.5, 0.5],
                 "maps": [constant_map("GENERAL", m), constant_map("GENERAL", m)] }),
    );
    let cfg = lab.write("cfg.json", &json!({ "cocycle": "g.json", "seed": 1 }));
    let o = lab.run("certify", &cfg, "x.csv", &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("DIAGONAL"));
}

#[test]
fn experiment_kind_must_match_subcommand() {
    let lab = Lab::new();
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let cfg = lab.write(
        "cfg.json",
        &json!({ "experiment": "certify", "cocycle": "pair.json", "seed": 1 }),
    );
    assert!(!lab.run("lyapunov", &cfg, "x.csv", &[]).status.success());
}

#[test]
fn malformed_inputs_exit_nonzero() {
    let lab = Lab::new();
    let bad = lab.path("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let cfg = lab.write("cfg.json", &json!({ "cocycle": "bad.json", "seed": 1 }));
    assert!(!lab.run("lyapunov", &cfg, "x.csv", &[]).status.success());
    let missing = lab.write("cfg2.json", &json!({ "cocycle": "nowhere.json", "seed": 1 }));
    assert!(!lab.run("lyapunov", &missing, "x.csv", &[]).status.success());
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let zero = lab.write("cfg3.json", &json!({ "cocycle": "pair.json", "seed": 1, "n_rep": 0 }));
    assert!(!lab.run("lyapunov", &zero, "x.csv", &[]).status.success());
}

#[test]
fn sweep_energy_matches_closed_form() {
    let lab = Lab::new();
    lab.write(
        "free.json",
        &json!({ "d": 2, "k": 1, "angles": [GOLDEN, 0.2], "weights": [0.5, 0.5],
                 "potentials": [{ "energy": 0.0, "degree": 0, "u": [0.0] }, { "energy": 0.0, "degree": 0, "u": [0.0] }] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "free.json", "seed": 5, "n_iter": 20000, "n_rep": 4,
                 "energy": { "min": -5.0, "max": 5.0, "steps": 11 } }),
    );
    ok(&lab.run("sweep-energy", &cfg, "s.csv", &[]));
    let t = lab.table("s.csv");
    assert_eq!(t.rows.len(), 11);
    for row in 0..11 {
        assert_eq!(text(&t, row, "check"), "ok");
        assert!(num(&t, row, "abs_err") < 2e-3);
    }
    let at = |e: f64| (0..11).find(|&r| num(&t, r, "E") == e).unwrap();
    assert!(num(&t, at(0.0), "lambda_plus").abs() <= 3.0 * num(&t, at(0.0), "stderr") + 1e-12);
    assert!((num(&t, at(3.0), "lambda_plus") - 0.9624236501192069).abs() < 2e-3);
}

#[test]
fn continuity_base_row_equals_lyapunov_estimate() {
    let lab = Lab::new();
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let knobs = json!({ "cocycle": "pair.json", "seed": 6, "n_iter": 10000, "n_rep": 4, "n_samples": 200,
                        "epsilons": [0.1, 0.01, 0.001],
                        "direction": { "symbol": 1, "degree": 1,
                                       "coeffs": [[0.0, 1.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.0, 1.0]] } });
    let cfg = lab.write("cfg.json", &knobs);
    ok(&lab.run("continuity", &cfg, "c.csv", &[]));
    ok(&lab.run("lyapunov", &cfg, "l.csv", &[]));
    let c = lab.table("c.csv");
    let l = lab.table("l.csv");
    assert_eq!(num(&c, 0, "epsilon"), 0.0);
    assert_eq!(num(&c, 0, "lambda_1").to_bits(), num(&l, 0, "lambda_1").to_bits());
    assert_eq!(num(&c, 0, "lambda_2").to_bits(), num(&l, 0, "lambda_2").to_bits());
    assert_eq!(text(&c, 1, "guarantee"), "certified");
    for row in 1..4 {
        assert_eq!(text(&c, row, "nonincreasing"), "yes");
    }
}

#[test]
fn continuity_near_rotation_has_no_guarantee() {
    let lab = Lab::new();
    let r: &[&[f64]] = &[&[0.0, -1.0], &[1.0, 0.0]];
    lab.write(
        "rot.json",
        &json!({ "d": 2, "k": 1, "angles": [GOLDEN, 0.3], "weights": [0.5, 0.5],
                 "maps": [constant_map("SL2", r), constant_map("SL2", r)] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "rot.json", "seed": 7, "n_iter": 5000, "n_rep": 4, "n_samples": 50,
                 "epsilons": [0.1, 0.01],
                 "direction": { "degree": 0, "coeffs": [[1.0], [0.0], [0.0], [0.0]] } }),
    );
    ok(&lab.run("continuity", &cfg, "c.csv", &[]));
    let c = lab.table("c.csv");
    assert!((0..3).all(|r| text(&c, r, "guarantee") == "no-guarantee"));
}

#[test]
fn perturb_search_on_sl2_pair() {
    let lab = Lab::new();
    lab.write("same.json", &hyperbolic_pair(0.0));
    lab.write("twisted.json", &hyperbolic_pair(0.125));
    let knobs = |f: &str| json!({ "cocycle": f, "seed": 8, "n_iter": 20000, "n_samples": 200, "budget": 0.1 });
    let cfg = lab.write("cfg.json", &knobs("same.json"));
    ok(&lab.run("perturb-search", &cfg, "p.csv", &[]));
    let p = lab.table("p.csv");
    assert_eq!(text(&p, 0, "outcome"), "found");
    assert_eq!(text(&p, 0, "family"), "rotation");
    let theta = num(&p, 0, "parameter");
    assert!(theta > 0.0 && theta <= 0.1);
    assert_eq!(text(&p, 0, "certificates"), "WEAK_PINCH=PASS;WEAK_TWIST=PASS");

    let cfg = lab.write("cfg2.json", &knobs("twisted.json"));
    ok(&lab.run("perturb-search", &cfg, "q.csv", &[]));
    let q = lab.table("q.csv");
    assert_eq!(text(&q, 0, "outcome"), "already-pass");
    assert_eq!(num(&q, 0, "parameter"), 0.0);
    assert_eq!(num(&q, 0, "c0_distance"), 0.0);
}

#[test]
fn perturb_search_reports_exhausted_budget() {
    let lab = Lab::new();
    // elliptic A₀: no Schrödinger shift available, so pinching cannot be repaired
    let r: &[&[f64]] = &[&[0.0, -1.0], &[1.0, 0.0]];
    lab.write(
        "rot.json",
        &json!({ "d": 2, "k": 1, "angles": [GOLDEN, 0.3], "weights": [0.5, 0.5],
                 "maps": [constant_map("SL2", r), constant_map("SL2", r)] }),
    );
    let cfg = lab.write("cfg.json", &json!({ "cocycle": "rot.json", "seed": 9, "n_iter": 5000 }));
    ok(&lab.run("perturb-search", &cfg, "p.csv", &[]));
    assert_eq!(text(&lab.table("p.csv"), 0, "outcome"), "not-found");

    // Schrödinger at E = 0 needs a shift of about 2; a budget of 0.1 is not enough
    lab.write(
        "s.json",
        &json!({ "d": 2, "k": 1, "angles": [GOLDEN, 0.3], "weights": [0.5, 0.5],
                 "potentials": [{ "energy": 0.0, "degree": 0, "u": [0.0] }, { "energy": 0.5, "degree": 0, "u": [0.0] }] }),
    );
    let cfg = lab.write("cfg2.json", &json!({ "cocycle": "s.json", "seed": 9, "n_iter": 5000 }));
    ok(&lab.run("perturb-search", &cfg, "s.csv", &[]));
    let s = lab.table("s.csv");
    assert_eq!(text(&s, 0, "outcome"), "not-found");
    assert_eq!(text(&s, 0, "family"), "potential-shift");
}

#[test]
fn parallel_runs_are_byte_identical() {
    let lab = Lab::new();
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "pair.json", "seed": 10, "n_iter": 5000, "n_rep": 6, "n_samples": 100 }),
    );
    ok(&lab.run("certify", &cfg, "one.csv", &["--parallel", "1"]));
    ok(&lab.run("certify", &cfg, "four.csv", &["--parallel", "4"]));
    let read = |n: &str| std::fs::read(lab.path(n)).unwrap();
    assert_eq!(read("one.csv"), read("four.csv"));
    assert_eq!(read("one.json"), read("four.json"));
}

#[test]
fn emitted_tables_round_trip() {
    let lab = Lab::new();
    lab.write("pair.json", &hyperbolic_pair(0.125));
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "pair.json", "seed": 11, "n_iter": 2000, "n_rep": 3 }),
    );
    ok(&lab.run("lyapunov", &cfg, "l.csv", &[]));
    let text = std::fs::read_to_string(lab.path("l.csv")).unwrap();
    let t = ResultTable::read_csv(text.as_bytes()).unwrap();
    assert_eq!(t.to_csv_string(), text);
}

#[test]
fn perturb_search_bumps_a_schrodinger_potential() {
    let lab = Lab::new();
    // identical constant potentials and angles: H_t = I, so WEAK_TWIST fails
    lab.write(
        "s.json",
        &json!({ "d": 2, "k": 1, "angles": [GOLDEN, GOLDEN], "weights": [0.5, 0.5],
                 "potentials": [{ "energy": 3.0, "degree": 0, "u": [0.0] }, { "energy": 3.0, "degree": 0, "u": [0.0] }] }),
    );
    let cfg = lab.write(
        "cfg.json",
        &json!({ "cocycle": "s.json", "seed": 3, "n_iter": 20000, "n_samples": 200 }),
    );
    ok(&lab.run("perturb-search", &cfg, "p.csv", &[]));
    let p = lab.table("p.csv");
    assert_eq!(text(&p, 0, "outcome"), "found");
    assert_eq!(text(&p, 0, "family"), "potential-bump");
    let amp = num(&p, 0, "parameter").abs();
    assert!(amp <= 0.1);
    // the bump peaks at 1, so the C⁰ distance is the amplitude
    assert!((num(&p, 0, "c0_distance") - amp).abs() < 1e-3 * amp);
}
