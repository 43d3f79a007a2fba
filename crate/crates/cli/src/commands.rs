use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cvtomo::benchmark::{run_benchmark, BenchmarkConfig, Scheme};
use cvtomo::design::{
    greedy_select, mfrc_compare, optimal_radius, optimize_multistart, radius_scan, radius_scan_csv, ring_phases,
    DesignReport, GreedyOptions, MfrcComparison, OptimizeOptions, RadiusPoint, RingFamily, RING_SCAN_CUTOFF,
};
use cvtomo::reconstruct::{reconstruct_record, Method, ReconstructOptions};
use cvtomo::scan::{scan_cat, FisherState, ScanOptions};
use cvtomo::statesim::{simulate_record, DensityMatrix, MeasurementRecord};
use cvtomo::verify::{run_verify, VerifyOptions, CHECK_NAMES};
use cvtomo::{BasisSpec, Error, MeasurementSetting, Result, C64};

use crate::parse;

pub const DESIGN_SCHEMA_VERSION: u32 = 1;

/// Writes `text` to `path`, or stdout without one.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    emit(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

// ---------------------------------------------------------------- design

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// fock:M, cat, coherent or displaced-fock:M
    #[arg(long)]
    pub basis: String,
    /// Coherent centres for the cat bases, e.g. "2+0i,-2+0i"
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Ring family: hrc, frc or mfrc
    #[arg(long)]
    pub family: Option<String>,
    /// Ring radius (comma-separated radii for mfrc)
    #[arg(long)]
    pub radius: Option<String>,
    /// Radius grid start:stop:step
    #[arg(long)]
    pub scan_radius: Option<String>,
    /// Fixed excitation-count cap; ring scans default to 200
    #[arg(long)]
    pub n_cut: Option<usize>,
    /// Gradient descent from random starts
    #[arg(long)]
    pub optimize: bool,
    #[arg(long)]
    pub n_beta: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Greedy displacement selection (cat bases)
    #[arg(long)]
    pub greedy: bool,
    #[arg(long, default_value_t = 1)]
    pub target_mc: usize,
    #[arg(long, default_value_t = 50.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 40)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the radius scan
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignOutput {
    pub schema_version: u32,
    /// ring, radius-scan, optimal-ring, optimize, greedy, mfrc-scan
    pub mode: String,
    pub basis: BasisSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<RingFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cut: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_scan: Option<Vec<RadiusPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mfrc: Option<MfrcComparison>,
    /// Set when the greedy budget ran out; `design` then holds the partial set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incomplete: Option<String>,
}

fn ring_design(basis: &BasisSpec, family: RingFamily, radii: &[f64], n_cut: Option<usize>) -> DesignReport {
    let phases = ring_phases(family, basis.m_c());
    let settings = radii
        .iter()
        .flat_map(|&r| phases.iter().map(move |&p| C64::from_polar(r, p)))
        .map(|b| match n_cut {
            Some(n) => MeasurementSetting::new(b, n),
            None => MeasurementSetting::for_basis(b, basis),
        })
        .collect();
    DesignReport::evaluate(settings, basis, Vec::new())
}

/// Returns the report and, for an exhausted greedy budget, the error to exit with.
pub fn design(a: &DesignArgs) -> Result<(DesignOutput, Option<Error>)> {
    let basis = parse::basis(&a.basis, a.alphas.as_deref())?;
    let family = a.family.as_deref().map(str::parse::<RingFamily>).transpose()?;
    let mut out = DesignOutput {
        schema_version: DESIGN_SCHEMA_VERSION,
        mode: String::new(),
        basis: basis.clone(),
        family,
        radius: None,
        n_cut: a.n_cut,
        design: None,
        radius_scan: None,
        mfrc: None,
        incomplete: None,
    };
    let modes = [a.greedy, a.optimize, family.is_some()].iter().filter(|&&x| x).count();
    if modes != 1 {
        return Err(Error::Config("choose exactly one of --family, --optimize or --greedy".into()));
    }
    if a.greedy {
        out.mode = "greedy".into();
        let opts = GreedyOptions { kappa_threshold: a.threshold, budget: a.budget, ..Default::default() };
        return match greedy_select(&basis, a.target_mc, opts) {
            Ok(r) => {
                out.basis = r.basis.clone();
                out.design = Some(r);
                Ok((out, None))
            }
            Err(Error::BudgetExceeded { budget, reached_mc, partial }) => {
                out.basis = partial.basis.clone();
                out.design = Some((*partial).clone());
                out.incomplete = Some(format!("budget of {budget} displacements exhausted at m_c = {reached_mc}"));
                Ok((out, Some(Error::BudgetExceeded { budget, reached_mc, partial })))
            }
            Err(e) => Err(e),
        };
    }
    if a.optimize {
        out.mode = "optimize".into();
        let n = a.n_beta.unwrap_or_else(|| basis.dimension().isqrt());
        let opts = OptimizeOptions { max_iters: a.max_iters, seed: a.seed, ..Default::default() };
        out.design = Some(optimize_multistart(n, &basis, a.starts.max(1), a.seed, opts)?);
        return Ok((out, None));
    }
    let family = family.expect("one mode selected");
    let fock_only = || -> Result<usize> {
        match basis {
            BasisSpec::Fock { m_c } => Ok(m_c),
            _ => Err(Error::Config("ring radius scans use the Fock basis".into())),
        }
    };
    match (&a.radius, &a.scan_radius) {
        (Some(_), Some(_)) => Err(Error::Config("give --radius or --scan-radius, not both".into())),
        (Some(r), None) => {
            let radii: Vec<f64> = parse::list(r, "radius")?;
            if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::Config(format!("radii must be positive, got {r:?}")));
            }
            if family != RingFamily::Mfrc && radii.len() != 1 {
                return Err(Error::Config("FRC and HRC take exactly one radius".into()));
            }
            out.mode = "ring".into();
            out.radius = (radii.len() == 1).then_some(radii[0]);
            out.design = Some(ring_design(&basis, family, &radii, a.n_cut));
            Ok((out, None))
        }
        (None, Some(grid)) => {
            let m_c = fock_only()?;
            let radii = parse::range(grid)?;
            let n_cut = a.n_cut.unwrap_or(RING_SCAN_CUTOFF);
            out.n_cut = Some(n_cut);
            if family == RingFamily::Mfrc {
                out.mode = "mfrc-scan".into();
                let c = mfrc_compare(m_c, &radii, Some(n_cut))?;
                out.design = Some(ring_design(&basis, family, &[c.double_radii.0, c.double_radii.1], Some(n_cut)));
                out.mfrc = Some(c);
                return Ok((out, None));
            }
            out.mode = "radius-scan".into();
            let points = radius_scan(family, m_c, &radii, Some(n_cut))?;
            if let Some(p) = &a.csv {
                emit(Some(p), &radius_scan_csv(&points))?;
            }
            let best = points
                .iter()
                .filter(|p| p.kappa.is_finite())
                .min_by(|x, y| x.kappa.total_cmp(&y.kappa))
                .ok_or_else(|| Error::Optimizer("every radius on the grid gives an incomplete ring".into()))?;
            out.radius = Some(best.radius);
            out.design = Some(ring_design(&basis, family, &[best.radius], Some(n_cut)));
            out.radius_scan = Some(points);
            Ok((out, None))
        }
        (None, None) => {
            let m_c = fock_only()?;
            if family == RingFamily::Mfrc {
                return Err(Error::Config("mfrc needs --radius or --scan-radius".into()));
            }
            out.mode = "optimal-ring".into();
            let n_cut = a.n_cut.unwrap_or(RING_SCAN_CUTOFF);
            out.n_cut = Some(n_cut);
            let (r, _) = optimal_radius(family, m_c, Some(n_cut))?;
            out.radius = Some(r);
            out.design = Some(ring_design(&basis, family, &[r], Some(n_cut)));
            Ok((out, None))
        }
    }
}

pub fn run_design(a: &DesignArgs) -> Result<()> {
    let (out, err) = design(a)?;
    emit_json(a.out.as_deref(), &out)?;
    if let Some(d) = &out.design {
        eprintln!("{}: {} settings, κ = {:.6}", out.mode, d.settings.len(), d.condition.kappa);
    }
    err.map_or(Ok(()), Err)
}

// -------------------------------------------------------------- simulate

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Design report JSON whose settings are measured
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Explicit displacements, e.g. "1+0i,0+1i"
    #[arg(long, allow_hyphen_values = true)]
    pub betas: Option<String>,
    /// Fixed excitation-count cap for --betas
    #[arg(long)]
    pub n_cut: Option<usize>,
    /// random:M[:knob[:seed]], fock:N[:M], cat, cat-mixed or file:PATH
    #[arg(long)]
    pub state: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Superposition weights for a cat state
    #[arg(long, allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
    /// Shots per setting; 0 stores exact probabilities
    #[arg(long, default_value_t = 10_000)]
    pub n_rep: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn design_settings(path: &Path) -> Result<Vec<MeasurementSetting<f64>>> {
    let v: Value = cvtomo::io::read_json(path)?;
    let settings = v.get("design").and_then(|d| d.get("settings")).or_else(|| v.get("settings"));
    let settings = settings.ok_or_else(|| Error::Config(format!("{} holds no measurement settings", path.display())))?;
    Ok(serde_json::from_value(settings.clone())?)
}

pub fn simulate(a: &SimulateArgs) -> Result<MeasurementRecord> {
    let rho = parse::state(&a.state, a.alphas.as_deref(), a.amplitudes.as_deref())?;
    let settings = match (&a.design, &a.betas) {
        (Some(p), None) => design_settings(p)?,
        (None, Some(b)) => parse::complex_list(b)?
            .into_iter()
            .map(|beta| match a.n_cut {
                Some(n) => MeasurementSetting::new(beta, n),
                None => MeasurementSetting::for_basis(beta, &rho.basis),
            })
            .collect(),
        _ => return Err(Error::Config("give exactly one of --design or --betas".into())),
    };
    let mut record = simulate_record(&rho, &settings, a.n_rep, a.seed)?;
    record.metadata = json!({
        "state": a.state,
        "alphas": a.alphas,
        "amplitudes": a.amplitudes,
        "seed": a.seed,
        "n_rep": a.n_rep,
        "truth": rho,
    });
    Ok(record)
}

pub fn run_simulate(a: &SimulateArgs) -> Result<()> {
    let r = simulate(a)?;
    emit_json(a.out.as_deref(), &r)?;
    eprintln!("{} settings, N_tot = {}", r.settings.len(), r.n_tot());
    Ok(())
}

// ----------------------------------------------------------- reconstruct

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub record: PathBuf,
    /// ls, fit, imle or cat-pipeline
    #[arg(long, default_value = "ls")]
    pub method: String,
    /// Density-matrix JSON, or "embedded" for the truth stored by simulate
    #[arg(long)]
    pub truth: Option<String>,
    /// Number of coherent components the cat pipeline looks for
    #[arg(long, default_value_t = 4)]
    pub p_max: usize,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<cvtomo::reconstruct::ReconstructionResult> {
    let record: MeasurementRecord = cvtomo::io::read_json(&a.record)?;
    let method: Method = a.method.parse()?;
    let truth: Option<DensityMatrix> = match a.truth.as_deref() {
        None => None,
        Some("embedded") => {
            let t = record
                .metadata
                .get("truth")
                .ok_or_else(|| Error::Config("record carries no embedded truth".into()))?;
            Some(serde_json::from_value(t.clone())?)
        }
        Some(p) => Some(cvtomo::io::read_json(Path::new(p))?),
    };
    let opts = ReconstructOptions { max_iters: a.max_iters, tol: a.tol, p_max: a.p_max, ..Default::default() };
    reconstruct_record(&record, method, truth.as_ref(), &opts)
}

pub fn run_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let r = reconstruct(a)?;
    emit_json(a.out.as_deref(), &r)?;
    let fid = r.fidelity.map_or(String::new(), |f| format!(", fidelity {f:.9} (bound {:.9})", r.bound));
    eprintln!("{:?}: residual {:.3e}{fid}", r.method, r.residual);
    Ok(())
}

// ------------------------------------------------------------- benchmark

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 5)]
    pub m_c: usize,
    /// Shot totals, e.g. "1e4,1e5,1e6"
    #[arg(long, default_value = "1e4,1e5,1e6,1e7,1e8,1e9")]
    pub n_tot: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value = "wigner-lattice,wigner-optimized,qn-optimized")]
    pub schemes: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub purity_knob: f64,
    /// Lattice half-width; default √m_c + 1
    #[arg(long)]
    pub lattice_half_width: Option<f64>,
    /// Report JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scatter CSV (stdout if omitted)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn run_benchmark_cmd(a: &BenchmarkArgs) -> Result<()> {
    let config = BenchmarkConfig {
        m_c: a.m_c,
        n_tots: parse::totals(&a.n_tot)?,
        trials: a.trials,
        schemes: parse::list::<Scheme>(&a.schemes, "scheme")?,
        seed: a.seed,
        purity_knob: a.purity_knob,
        lattice_half_width: a.lattice_half_width,
    };
    let report = run_benchmark(&config)?;
    if let Some(p) = &a.out {
        emit_json(Some(p), &report)?;
    }
    emit(a.csv.as_deref(), &report.to_csv())?;
    for d in &report.designs {
        eprintln!("{}: {} settings, κ = {:.4}", d.scheme.name(), d.settings.len(), d.kappa);
    }
    for (s, slope) in &report.slopes {
        let adv = report.advantage(*s).map_or(String::new(), |x| format!(", median ratio to qn-optimized {x:.3e}"));
        eprintln!("{}: slope {slope:.3}{adv}", s.name());
    }
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Smaller grids and trial counts
    #[arg(long)]
    pub quick: bool,
    /// Comma-separated check numbers (default all)
    #[arg(long)]
    pub checks: Option<String>,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Returns whether every check passed.
pub fn run_verify_cmd(a: &VerifyArgs) -> Result<bool> {
    let ids: Vec<usize> = match &a.checks {
        Some(s) => parse::list(s, "check number")?,
        None => (1..=CHECK_NAMES.len()).collect(),
    };
    let report = run_verify(&ids, &VerifyOptions { quick: a.quick, seed: a.seed })?;
    for c in &report.checks {
        println!("[{}] {:>2} {}: {} ({:.1}s)", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.summary, c.seconds);
    }
    if let Some(p) = &a.out {
        emit_json(Some(p), &report)?;
    }
    Ok(report.passed)
}

// ------------------------------------------------------------------ scan

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: String,
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
    /// Points per axis
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// κ above this is flagged
    #[arg(long, default_value_t = 100.0)]
    pub display_cap: f64,
    /// Also map det I(β) for the mixed or pure cat
    #[arg(long)]
    pub fisher: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run_scan(a: &ScanArgs) -> Result<()> {
    let fisher = match a.fisher.as_deref() {
        None => None,
        Some("mixed") => Some(FisherState::Mixed),
        Some("pure") => Some(FisherState::Pure),
        Some(s) => return Err(Error::Config(format!("unknown Fisher state {s:?} (mixed, pure)"))),
    };
    let alphas = parse::complex_list(&a.alphas)?;
    let opts = ScanOptions { half_width: a.half_width, grid: a.grid, display_cap: a.display_cap, fisher };
    let r = scan_cat(&alphas, opts)?;
    let dir = &a.out_dir;
    fs::create_dir_all(dir)?;
    let kappa = cvtomo::io::csv_string(
        &["beta_re", "beta_im", "kappa", "rank_deficient", "capped"],
        r.cells.iter().map(|c| {
            vec![c.beta.re.to_string(), c.beta.im.to_string(), c.kappa.to_string(), u8::from(c.rank_deficient).to_string(), u8::from(c.capped).to_string()]
        }),
    );
    emit(Some(&dir.join("kappa_map.csv")), &kappa)?;
    let estimate = cvtomo::io::csv_string(
        &["beta_re", "beta_im", "estimate"],
        r.cells.iter().map(|c| vec![c.beta.re, c.beta.im, c.estimate]),
    );
    emit(Some(&dir.join("estimate_map.csv")), &estimate)?;
    if let Some(f) = &r.fisher {
        emit(Some(&dir.join("fisher_map.csv")), &f.to_csv())?;
    }
    emit_json(Some(&dir.join("scan.json")), &r)?;
    let (missed, stray) = r.locus_mismatches();
    eprintln!(
        "{} cells, {} rank deficient ({missed} on-locus cells not flagged, {stray} off-locus flags), Spearman {:.4}",
        r.cells.len(),
        r.cells.iter().filter(|c| c.rank_deficient).count(),
        r.spearman
    );
    Ok(())
}
