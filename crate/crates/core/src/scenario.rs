//! Scenario runner: declarative TOML configs dispatched to the analysis
//! modules, emitting deterministic CSV artifacts plus an auditable manifest.
//!
//! A scenario file names a `kind`, an optional `seed` (mandatory when the
//! kind draws randomness), an optional `output_dir`, and a `[params]` table
//! whose schema depends on the kind. Every float is printed with 12
//! significant digits, so identical configs and seeds reproduce artifacts
//! byte for byte; the `manifest` file records input and output hashes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::Error;
use crate::aroc::aroc_curve_gaussian;
use crate::chain::{graph_document_from_value, multistage_investigate};
use crate::econ::{
    BuyerEconomics, ContractInstance, CoverageBounds, RiskModel, coverage_bounds,
    feasible_penalty_region, max_premium_full_coverage, optimal_test_count,
};
use crate::emit::{csv_document, fmt_float};
use crate::platoon::{
    GaussianScenario, accountability_vs_n, accountability_vs_tau, monte_carlo_accountability,
};

/// Failure modes of the runner, mapped onto the CLI exit codes.
#[derive(Debug)]
pub enum ScenarioError {
    /// The config file is not readable or not valid TOML (exit code 2).
    Parse(String),
    /// The config is well-formed but semantically invalid (exit code 3).
    Invalid(String),
    /// The scenario failed while running (exit code 4).
    Runtime(Error),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) => 2,
            Self::Invalid(_) => 3,
            Self::Runtime(_) => 4,
        }
    }
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parse(msg) => write!(f, "config parse error: {msg}"),
            Self::Invalid(msg) => write!(f, "config validation error: {msg}"),
            Self::Runtime(err) => write!(f, "scenario runtime error: {err}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<Error> for ScenarioError {
    fn from(err: Error) -> Self {
        Self::Runtime(err)
    }
}

type RunResult<T> = std::result::Result<T, ScenarioError>;

/// The scenario kinds the runner understands.
pub const KINDS: [&str; 6] = ["aroc", "platoon", "chain", "contract", "insure", "tradeoff"];

#[derive(Debug, Deserialize)]
struct RawConfig {
    kind: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    params: toml::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArocParams {
    d: f64,
    grid_size: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatoonParams {
    sensor_bias: f64,
    noise_sigma: f64,
    tau: f64,
    /// Grid for the accountability-vs-N table.
    n_min: u64,
    n_max: u64,
    /// Test count for the tau sweep and the Monte Carlo check.
    n_tests: u64,
    tau_min: f64,
    tau_max: f64,
    tau_points: usize,
    /// Monte Carlo trials; zero disables the empirical check.
    #[serde(default)]
    trials: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContractParams {
    profits: [[f64; 2]; 2],
    purchase: [f64; 2],
    accountability: [f64; 2],
    /// Template penalties; the scanned type's pair is overridden.
    fixed_penalties: [[f64; 2]; 2],
    theta: usize,
    truth_max: f64,
    lie_max: f64,
    resolution: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InsureParams {
    risk: RiskModel,
    premium: f64,
    /// Premium curve grid over the performance gap.
    p_a: f64,
    delta_u_min: f64,
    delta_u_max: f64,
    delta_u_points: usize,
    /// Coverage-bound grid over accountability at a fixed gap.
    delta_u: f64,
    p_a_min: f64,
    p_a_max: f64,
    p_a_points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TradeoffParams {
    sensor_bias: f64,
    noise_sigma: f64,
    tau: f64,
    cost_per_test: f64,
    procurement_cost: f64,
    delta_u: f64,
    /// CARA risk-aversion coefficient.
    beta: f64,
    n_max: u64,
}

/// Run the scenario described by `config_path`.
///
/// `seed_override` and `out_override` take precedence over the config file.
/// Returns the emitted artifact paths (CSV files plus the manifest).
pub fn run_scenario(
    config_path: &Path,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
) -> RunResult<Vec<PathBuf>> {
    let raw_text = fs::read_to_string(config_path)
        .map_err(|e| ScenarioError::Parse(format!("cannot read {}: {e}", config_path.display())))?;
    let raw: RawConfig =
        toml::from_str(&raw_text).map_err(|e| ScenarioError::Parse(e.to_string()))?;

    if !KINDS.contains(&raw.kind.as_str()) {
        return Err(ScenarioError::Invalid(format!(
            "field `kind`: unknown scenario kind `{}`; expected one of {}",
            raw.kind,
            KINDS.join(", ")
        )));
    }
    let seed = seed_override.or(raw.seed);
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or(raw.output_dir)
        .unwrap_or_else(|| PathBuf::from("out"));

    let artifacts = match raw.kind.as_str() {
        "aroc" => run_aroc(raw.params)?,
        "platoon" => run_platoon(raw.params, seed)?,
        "chain" => run_chain(raw.params)?,
        "contract" => run_contract(raw.params)?,
        "insure" => run_insure(raw.params)?,
        "tradeoff" => run_tradeoff(raw.params)?,
        _ => unreachable!("kind validated above"),
    };

    write_artifacts(config_path, &raw_text, &raw.kind, seed, &out_dir, artifacts)
}

fn parse_params<T: serde::de::DeserializeOwned>(params: toml::Value) -> RunResult<T> {
    params
        .try_into()
        .map_err(|e| ScenarioError::Invalid(format!("params: {e}")))
}

fn invalid(name: &str, why: &str) -> ScenarioError {
    ScenarioError::Invalid(format!("field `{name}`: {why}"))
}

fn run_aroc(params: toml::Value) -> RunResult<Vec<(String, String)>> {
    let p: ArocParams = parse_params(params)?;
    let curve = aroc_curve_gaussian(p.d, p.grid_size).map_err(runtime_as_invalid)?;
    Ok(vec![("aroc_curve.csv".into(), curve.to_csv())])
}

fn run_platoon(params: toml::Value, seed: Option<u64>) -> RunResult<Vec<(String, String)>> {
    let p: PlatoonParams = parse_params(params)?;
    if p.n_min == 0 || p.n_min > p.n_max {
        return Err(invalid("n_min", "need 1 <= n_min <= n_max"));
    }
    if p.n_max - p.n_min > 100_000 {
        return Err(invalid("n_max", "N grid is limited to 100000 points"));
    }
    if p.tau_points < 2 || p.tau_min <= 0.0 || p.tau_min.is_nan() || p.tau_max <= p.tau_min {
        return Err(invalid(
            "tau_points",
            "need tau_points >= 2 and 0 < tau_min < tau_max",
        ));
    }
    if p.trials > 0 && seed.is_none() {
        return Err(invalid(
            "seed",
            "a seed is mandatory when Monte Carlo trials are requested",
        ));
    }
    let sc = GaussianScenario::new(p.sensor_bias, p.noise_sigma, p.n_tests, p.tau)
        .map_err(runtime_as_invalid)?;

    let n_grid: Vec<u64> = (p.n_min..=p.n_max).collect();
    let by_n = accountability_vs_n(&sc, &n_grid).map_err(runtime_as_invalid)?;
    let n_rows = by_n.iter().map(|(n, out)| {
        format!(
            "{n},{},{}",
            fmt_float(out.accountability),
            fmt_float(out.wronged)
        )
    });

    let log_step = (p.tau_max / p.tau_min).ln() / (p.tau_points - 1) as f64;
    let tau_grid: Vec<f64> = (0..p.tau_points)
        .map(|i| p.tau_min * (log_step * i as f64).exp())
        .collect();
    let by_tau = accountability_vs_tau(&sc, &tau_grid).map_err(runtime_as_invalid)?;
    let tau_rows = by_tau.iter().map(|(tau, out)| {
        format!(
            "{},{},{}",
            fmt_float(*tau),
            fmt_float(out.accountability),
            fmt_float(out.wronged)
        )
    });

    let mut artifacts = vec![
        (
            "accountability_vs_n.csv".into(),
            csv_document("n,p_a,p_u", n_rows),
        ),
        (
            "accountability_vs_tau.csv".into(),
            csv_document("tau,p_a,p_u", tau_rows),
        ),
    ];
    if p.trials > 0 {
        let est = monte_carlo_accountability(&sc, p.trials, seed.expect("validated above"))
            .map_err(runtime_as_invalid)?;
        let row = format!(
            "{},{},{},{},{}",
            est.trials,
            fmt_float(est.p_a_hat),
            fmt_float(est.p_a_se),
            fmt_float(est.p_u_hat),
            fmt_float(est.p_u_se)
        );
        artifacts.push((
            "monte_carlo.csv".into(),
            csv_document("trials,p_a_hat,p_a_se,p_u_hat,p_u_se", vec![row]),
        ));
    }
    Ok(artifacts)
}

fn run_chain(params: toml::Value) -> RunResult<Vec<(String, String)>> {
    let doc = graph_document_from_value(params).map_err(runtime_as_invalid)?;
    let trace = multistage_investigate(&doc.graph, &doc.evidence, &doc.policy)
        .map_err(runtime_as_invalid)?;
    Ok(vec![("trace.csv".into(), trace.to_csv())])
}

fn run_contract(params: toml::Value) -> RunResult<Vec<(String, String)>> {
    let p: ContractParams = parse_params(params)?;
    let template = ContractInstance {
        profits: p.profits,
        penalties: p.fixed_penalties,
        purchase: p.purchase,
        accountability: p.accountability,
    };
    let region = feasible_penalty_region(&template, p.theta, p.truth_max, p.lie_max, p.resolution)
        .map_err(runtime_as_invalid)?;
    Ok(vec![("penalty_region.csv".into(), region.to_csv())])
}

fn run_insure(params: toml::Value) -> RunResult<Vec<(String, String)>> {
    let p: InsureParams = parse_params(params)?;
    p.risk.validate().map_err(runtime_as_invalid)?;
    if !(2..=100_000).contains(&p.delta_u_points) || !(2..=100_000).contains(&p.p_a_points) {
        return Err(invalid(
            "delta_u_points",
            "grids need between 2 and 100000 points",
        ));
    }
    if !(p.delta_u_min >= 0.0 && p.delta_u_max > p.delta_u_min) {
        return Err(invalid(
            "delta_u_min",
            "need 0 <= delta_u_min < delta_u_max",
        ));
    }
    if !(0.0..=1.0).contains(&p.p_a_min)
        || p.p_a_max <= p.p_a_min
        || p.p_a_max.is_nan()
        || p.p_a_max > 1.0
    {
        return Err(invalid("p_a_min", "need 0 <= p_a_min < p_a_max <= 1"));
    }

    let du_step = (p.delta_u_max - p.delta_u_min) / (p.delta_u_points - 1) as f64;
    let mut premium_rows = Vec::with_capacity(p.delta_u_points);
    for i in 0..p.delta_u_points {
        let du = p.delta_u_min + du_step * i as f64;
        let be = BuyerEconomics::new(0.0, du, p.p_a).map_err(runtime_as_invalid)?;
        let (_, c_star) = max_premium_full_coverage(&be, &p.risk).map_err(runtime_as_invalid)?;
        premium_rows.push(format!("{},{}", fmt_float(du), fmt_float(c_star)));
    }

    let pa_step = (p.p_a_max - p.p_a_min) / (p.p_a_points - 1) as f64;
    let mut coverage_rows = Vec::with_capacity(p.p_a_points);
    for i in 0..p.p_a_points {
        let p_a = p.p_a_min + pa_step * i as f64;
        let be = BuyerEconomics::new(0.0, p.delta_u, p_a).map_err(runtime_as_invalid)?;
        let (lo, hi) = match coverage_bounds(p.premium, &be, &p.risk).map_err(runtime_as_invalid)? {
            CoverageBounds::Interval { lo, hi } => (lo, hi),
            CoverageBounds::Empty | CoverageBounds::NoRisk => (f64::NAN, f64::NAN),
        };
        coverage_rows.push(format!(
            "{},{},{}",
            fmt_float(p_a),
            fmt_float(lo),
            fmt_float(hi)
        ));
    }

    Ok(vec![
        (
            "premium_curve.csv".into(),
            csv_document("delta_u,c_i_star", premium_rows),
        ),
        (
            "coverage_bounds.csv".into(),
            csv_document("p_a,r_lo,r_hi", coverage_rows),
        ),
    ])
}

fn run_tradeoff(params: toml::Value) -> RunResult<Vec<(String, String)>> {
    let p: TradeoffParams = parse_params(params)?;
    let sc = GaussianScenario::new(p.sensor_bias, p.noise_sigma, 1, p.tau)
        .map_err(runtime_as_invalid)?;
    let be = BuyerEconomics::new(p.procurement_cost, p.delta_u, 0.0).map_err(runtime_as_invalid)?;
    let rm = RiskModel::cara(p.beta).map_err(runtime_as_invalid)?;
    let curve =
        optimal_test_count(p.cost_per_test, &sc, &be, &rm, p.n_max).map_err(runtime_as_invalid)?;
    Ok(vec![("tradeoff_curve.csv".into(), curve.to_csv())])
}

/// Parameter-range failures surfaced while *constructing* inputs are config
/// validation problems, not runtime faults.
fn runtime_as_invalid(err: Error) -> ScenarioError {
    match err {
        Error::Io(e) => ScenarioError::Runtime(Error::Io(e)),
        other => ScenarioError::Invalid(other.to_string()),
    }
}

fn write_artifacts(
    config_path: &Path,
    raw_text: &str,
    kind: &str,
    seed: Option<u64>,
    out_dir: &Path,
    artifacts: Vec<(String, String)>,
) -> RunResult<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| ScenarioError::Runtime(Error::Io(e)))?;
    let mut paths = Vec::with_capacity(artifacts.len() + 1);
    let mut manifest = String::new();
    let _ = writeln!(manifest, "kind = {kind}");
    let config_name = config_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| config_path.display().to_string());
    let _ = writeln!(manifest, "config = {config_name}");
    let _ = writeln!(
        manifest,
        "config_sha256 = {}",
        sha256_hex(raw_text.as_bytes())
    );
    match seed {
        Some(s) => {
            let _ = writeln!(manifest, "seed = {s}");
        }
        None => {
            let _ = writeln!(manifest, "seed = none");
        }
    }
    for (name, contents) in &artifacts {
        let path = out_dir.join(name);
        fs::write(&path, contents).map_err(|e| ScenarioError::Runtime(Error::Io(e)))?;
        let _ = writeln!(
            manifest,
            "artifact {name} sha256 = {}",
            sha256_hex(contents.as_bytes())
        );
        paths.push(path);
    }
    let manifest_path = out_dir.join("manifest");
    fs::write(&manifest_path, &manifest).map_err(|e| ScenarioError::Runtime(Error::Io(e)))?;
    paths.push(manifest_path);
    Ok(paths)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Human-readable catalog of the scenario kinds, their required parameters,
/// and the CSV artifacts (with headers) each one emits.
pub fn list_kinds() -> String {
    let entries = [
        ("aroc", "d, grid_size", "aroc_curve.csv (tau,p_u,p_a)"),
        (
            "platoon",
            "sensor_bias, noise_sigma, tau, n_min, n_max, n_tests, tau_min, tau_max, tau_points, [trials]",
            "accountability_vs_n.csv (n,p_a,p_u); accountability_vs_tau.csv (tau,p_a,p_u); monte_carlo.csv (trials,p_a_hat,p_a_se,p_u_hat,p_u_se)",
        ),
        (
            "chain",
            "policy { epsilon, budget }, nodes [{ id, parents, cost, test, evidence }]",
            "trace.csv (node_id,p_a,verdict,cumulative_cost)",
        ),
        (
            "contract",
            "profits, purchase, accountability, fixed_penalties, theta, truth_max, lie_max, resolution",
            "penalty_region.csv (c_truth,c_lie,feasible)",
        ),
        (
            "insure",
            "risk { kind, ... }, premium, p_a, delta_u_min, delta_u_max, delta_u_points, delta_u, p_a_min, p_a_max, p_a_points",
            "premium_curve.csv (delta_u,c_i_star); coverage_bounds.csv (p_a,r_lo,r_hi)",
        ),
        (
            "tradeoff",
            "sensor_bias, noise_sigma, tau, cost_per_test, procurement_cost, delta_u, beta, n_max",
            "tradeoff_curve.csv (n,payoff)",
        ),
    ];
    let mut out = String::from("scenario kinds:\n");
    for (kind, params, outputs) in entries {
        let _ = writeln!(out, "  {kind}\n    params: {params}\n    emits:  {outputs}");
    }
    out.push_str("\ncommon fields: kind (required), seed (required for stochastic runs), output_dir, [params]\n");
    out
}
