use std::path::Path;
use std::process::{Command, Output};

use cvtomo::reconstruct::ReconstructionResult;
use cvtomo::statesim::MeasurementRecord;
use serde_json::Value;
use tempfile::TempDir;

fn cvtomo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvtomo"))
        .args(args)
        .current_dir(dir)
        .env("CVTOMO_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn design_radius_scan_writes_csv_and_best_radius() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["design", "--basis", "fock:4", "--family", "hrc", "--scan-radius", "0.5:12:0.25", "--csv", "scan.csv", "--out", "d.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("radius,kappa,merit\n"));
    assert_eq!(csv.lines().count(), 48);
    let d = json(t.path(), "d.json");
    assert_eq!(d["schema_version"], 1);
    assert_eq!(d["mode"], "radius-scan");
    let best = d["radius"].as_f64().unwrap();
    let kappas: Vec<f64> = d["radius_scan"].as_array().unwrap().iter().map(|p| p["kappa"].as_f64().unwrap()).collect();
    let kmin = kappas.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((d["design"]["condition"]["kappa"].as_f64().unwrap() - kmin).abs() < 1e-9 * kmin);
    assert!(best > 0.5 && best < 12.0);
    assert_eq!(d["design"]["settings"].as_array().unwrap().len(), 5);
}

#[test]
fn design_greedy_reports_history() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["design", "--basis", "cat", "--alphas", "2+0i,-2+0i", "--greedy", "--target-mc", "1", "--threshold", "50", "--out", "g.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = json(t.path(), "g.json");
    assert_eq!(g["mode"], "greedy");
    assert_eq!(g["basis"]["kind"], "displaced_fock");
    assert_eq!(g["basis"]["m_c"], 1);
    let hist = g["design"]["history"].as_array().unwrap();
    assert!(!hist.is_empty());
    assert!(g["design"]["condition"]["kappa"].as_f64().unwrap() < 50.0);
}

#[test]
fn design_errors_map_to_exit_codes() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["design", "--basis", "cat", "--greedy", "--target-mc", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--alphas"));
    assert_eq!(code(&cvtomo(t.path(), &["design", "--basis", "fock:2"])), 2);
    assert_eq!(code(&cvtomo(t.path(), &["design", "--bogus"])), 2);
    // a budget of one displacement cannot reach m_c = 2: optimizer-class failure, partial report kept
    let o = cvtomo(t.path(), &["design", "--basis", "cat", "--alphas", "2,-2", "--greedy", "--target-mc", "2", "--budget", "1", "--out", "p.json"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("budget"));
    assert!(json(t.path(), "p.json")["incomplete"].is_string());
}

#[test]
fn noiseless_pipeline_round_trip() {
    let t = TempDir::new().unwrap();
    let p = t.path();
    assert_eq!(code(&cvtomo(p, &["design", "--basis", "fock:3", "--family", "hrc", "--radius", "1.5", "--out", "h.json"])), 0);
    let o = cvtomo(p, &["simulate", "--design", "h.json", "--state", "random:3:0.5:4", "--n-rep", "0", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rec: MeasurementRecord = cvtomo::io::read_json(&p.join("r.json")).unwrap();
    assert_eq!(rec.metadata["state"], "random:3:0.5:4");
    assert_eq!(rec.metadata["n_rep"], 0);
    assert!(rec.metadata["truth"].is_object());
    for method in ["ls", "fit", "imle"] {
        let out = format!("{method}.json");
        let o = cvtomo(p, &["reconstruct", "--record", "r.json", "--method", method, "--truth", "embedded", "--out", &out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let r: ReconstructionResult = cvtomo::io::read_json(&p.join(&out)).unwrap();
        let f = r.fidelity.unwrap();
        let tol = if method == "ls" { 1e-9 } else { 1e-6 };
        assert!(f > 1.0 - tol, "{method}: fidelity {f}");
        assert!(f >= r.bound - tol, "bound {} above fidelity {f}", r.bound);
    }
}

#[test]
fn simulate_is_deterministic_and_schema_valid() {
    let t = TempDir::new().unwrap();
    let p = t.path();
    let args = |out: &'static str| ["simulate", "--betas", "1+0i,0+1i,-1+0.5i,0.3-1.2i", "--state", "random:3:0.2:9", "--n-rep", "10000", "--seed", "5", "--out", out];
    assert_eq!(code(&cvtomo(p, &args("a.json"))), 0);
    assert_eq!(code(&cvtomo(p, &args("b.json"))), 0);
    let a = std::fs::read(p.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(p.join("b.json")).unwrap());
    let rec: MeasurementRecord = cvtomo::io::read_json(&p.join("a.json")).unwrap();
    rec.validate().unwrap();
    let v = json(p, "a.json");
    for key in ["schema_version", "basis", "settings", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for s in v["settings"].as_array().unwrap() {
        assert!(s["beta"].is_array() && s["n_c"].is_u64() && s["overflow"].is_u64());
        let total: u64 = s["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>() + s["overflow"].as_u64().unwrap();
        assert_eq!(total, 10_000);
    }
}

#[test]
fn invalid_state_and_incomplete_record() {
    let t = TempDir::new().unwrap();
    let p = t.path();
    assert_eq!(code(&cvtomo(p, &["simulate", "--betas", "1", "--state", "squeezed:2"])), 2);
    assert_eq!(code(&cvtomo(p, &["simulate", "--betas", "1", "--state", "cat"])), 2);
    assert_eq!(code(&cvtomo(p, &["simulate", "--betas", "1+0i,0+1i", "--state", "random:3", "--n-rep", "0", "--out", "u.json"])), 0);
    let o = cvtomo(p, &["reconstruct", "--record", "u.json", "--method", "ls"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("rank 12"), "{}", stderr(&o));
}

#[test]
fn cat_pipeline_recovers_components() {
    let t = TempDir::new().unwrap();
    let p = t.path();
    let o = cvtomo(p, &["simulate", "--betas", "1.5+0i,-1.5+0i,0+1.5i,0.2+0.3i,-1-1i", "--state", "cat", "--alphas", "2+0i,-2+0i", "--n-rep", "0", "--out", "c.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = cvtomo(p, &["reconstruct", "--record", "c.json", "--method", "cat-pipeline", "--p-max", "2", "--out", "x.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let x = json(p, "x.json");
    let mut re: Vec<f64> = x["alphas"].as_array().unwrap().iter().map(|a| a[0].as_f64().unwrap()).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 2.0).abs() < 0.05 && (re[1] - 2.0).abs() < 0.05, "{re:?}");
    assert_eq!(x["rho_phys"]["basis"]["kind"], "coherent");
    assert_eq!(x["rho_phys"]["entries"].as_array().unwrap().len(), 2);
}

#[test]
fn benchmark_writes_scatter_csv() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["benchmark", "--m-c", "1", "--n-tot", "1e4,1e6", "--trials", "3", "--csv", "b.csv", "--out", "b.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.path().join("b.csv")).unwrap();
    assert!(csv.starts_with("scheme,n_tot,trial,infidelity\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 3);
    assert_eq!(json(t.path(), "b.json")["schema_version"], 1);
    assert_eq!(code(&cvtomo(t.path(), &["benchmark", "--schemes", "homodyne"])), 2);
}

#[test]
fn verify_exit_status_follows_checks() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["verify", "--quick", "--checks", "6,7", "--out", "v.json"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let v = json(t.path(), "v.json");
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    // the necessity half of the completeness criterion fails (see the decisions ledger)
    assert_eq!(code(&cvtomo(t.path(), &["verify", "--quick", "--checks", "9"])), 1);
    assert_eq!(code(&cvtomo(t.path(), &["verify", "--checks", "15"])), 2);
}

#[test]
fn scan_writes_maps() {
    let t = TempDir::new().unwrap();
    let o = cvtomo(t.path(), &["scan", "--alphas", "2,-2", "--grid", "21", "--fisher", "mixed", "--out-dir", "maps"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = t.path().join("maps");
    let kappa = std::fs::read_to_string(dir.join("kappa_map.csv")).unwrap();
    assert!(kappa.starts_with("beta_re,beta_im,kappa,rank_deficient,capped\n"));
    assert_eq!(kappa.lines().count(), 442);
    // bisector Re β = 0 is flagged everywhere
    for line in kappa.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0].parse::<f64>().unwrap().abs() < 1e-12 {
            assert_eq!(f[3], "1", "{line}");
        }
    }
    assert!(std::fs::read_to_string(dir.join("estimate_map.csv")).unwrap().starts_with("beta_re,beta_im,estimate\n"));
    assert!(std::fs::read_to_string(dir.join("fisher_map.csv")).unwrap().starts_with("beta_re,beta_im,det_fisher\n"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("scan.json")).unwrap()).unwrap();
    assert!(s["spearman"].as_f64().unwrap() > 0.8);
}

#[test]
fn config_file_matches_flags() {
    let t = TempDir::new().unwrap();
    let p = t.path();
    std::fs::write(
        p.join("run.json"),
        r#"{"schema_version": 1, "command": "design", "args": {"basis": "fock:2", "family": "frc", "radius": 1.2, "out": "viaconfig.json"}}"#,
    )
    .unwrap();
    assert_eq!(code(&cvtomo(p, &["--config", "run.json"])), 0);
    assert_eq!(code(&cvtomo(p, &["design", "--basis", "fock:2", "--family", "frc", "--radius", "1.2", "--out", "viaflags.json"])), 0);
    assert_eq!(std::fs::read(p.join("viaconfig.json")).unwrap(), std::fs::read(p.join("viaflags.json")).unwrap());
    std::fs::write(p.join("bad.json"), r#"{"schema_version": 9, "command": "design"}"#).unwrap();
    assert_eq!(code(&cvtomo(p, &["--config", "bad.json"])), 2);
    assert_eq!(code(&cvtomo(p, &["--config", "run.json", "verify"])), 2);
}
