//! Experiment orchestration: every node runs its own δ-GLMB filter on its
//! own scans; fusion methods strip labels, approximate (SO or FO),
//! fuse sequentially in node order and extract a MAP estimate. Results
//! are scored with OSPA and written as CSV.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::approx::{strip_labels, to_fogmb, to_sogmb, ApproxConfig};
use crate::error::{Error, Result};
use crate::fusion::{fuse_sequential, FusionConfig, FusionWeights};
use crate::glmb::{FilterConfig, GlmbFilter, MeasurementScan};
use crate::metrics::{
    monte_carlo, ospa, positions, summary_rows, write_summary_csv, MonteCarloResult, OspaParams,
    RunSeries,
};
use crate::rfs::SoGmbDensity;
use crate::scenario::{builtin, generate_scans, generate_truth, ScenarioConfig, TruthStep};

/// Something whose estimates are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Local filter of node `i` (1-based).
    LocalNode(usize),
    FoGmbFusion,
    SoGmbFusion,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::LocalNode(i) => write!(f, "local-node-{i}"),
            Method::FoGmbFusion => f.write_str("fogmb-fusion"),
            Method::SoGmbFusion => f.write_str("sogmb-fusion"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fogmb-fusion" => Ok(Method::FoGmbFusion),
            "sogmb-fusion" => Ok(Method::SoGmbFusion),
            _ => s
                .strip_prefix("local-node-")
                .and_then(|i| i.parse::<usize>().ok())
                .filter(|i| *i >= 1)
                .map(Method::LocalNode)
                .ok_or_else(|| Error::Config(format!("unknown method `{s}`"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Filter, approximation and fusion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    pub filter: FilterConfig,
    pub approx: ApproxConfig,
    pub fusion: FusionConfig,
    /// Weight of the running fused result for two nodes; with more nodes
    /// every node gets the same weight.
    pub omega: f64,
    pub ospa_cutoff: f64,
    pub ospa_order: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            approx: ApproxConfig::default(),
            fusion: FusionConfig::default(),
            omega: 0.5,
            ospa_cutoff: 200.0,
            ospa_order: 2.0,
        }
    }
}

impl Tuning {
    pub fn schedule(&self, nodes: usize) -> Result<Vec<FusionWeights>> {
        if nodes == 2 {
            Ok(vec![FusionWeights::new(self.omega, 1.0 - self.omega)?])
        } else {
            Ok(FusionWeights::equal_schedule(nodes))
        }
    }

    pub fn ospa(&self) -> Result<OspaParams> {
        OspaParams::new(self.ospa_cutoff, self.ospa_order)
    }
}

/// A full Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Scenario file, relative to the spec file, or `builtin:<name>`.
    pub scenario: String,
    pub methods: Vec<Method>,
    pub n_runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub tuning: Tuning,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if !spec.scenario.starts_with("builtin:") && Path::new(&spec.scenario).is_relative() {
            spec.scenario = base.join(&spec.scenario).to_string_lossy().into_owned();
        }
        if spec.output_dir.is_relative() {
            spec.output_dir = base.join(&spec.output_dir);
        }
        Ok(spec)
    }
}

/// Resolves a scenario reference: `builtin:<name>` or a TOML file.
pub fn load_scenario(reference: &str) -> Result<ScenarioConfig> {
    match reference.strip_prefix("builtin:") {
        Some(name) => builtin(name).ok_or_else(|| Error::Config(format!("no built-in scenario `{name}`"))),
        None => ScenarioConfig::load(Path::new(reference)),
    }
}

/// Per-step point estimates of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodEstimates {
    pub method: Method,
    pub estimates: Vec<Vec<DVector<f64>>>,
}

fn check_methods(methods: &[Method], nodes: usize) -> Result<()> {
    for m in methods {
        if let Method::LocalNode(i) = m {
            if *i > nodes {
                return Err(Error::Config(format!("{m} but the scenario has {nodes} sensors")));
            }
        }
        if matches!(m, Method::FoGmbFusion | Method::SoGmbFusion) && nodes < 2 {
            return Err(Error::Config(format!("{m} needs at least two sensors")));
        }
    }
    Ok(())
}

/// Runs filters and fusion over given scans, `scans[node][k]` being step
/// `k + 1`. Nodes whose output no method needs are not filtered.
pub fn run_with_scans(
    config: &ScenarioConfig,
    tuning: &Tuning,
    methods: &[Method],
    scans: &[Vec<MeasurementScan>],
) -> Result<Vec<MethodEstimates>> {
    let nodes = scans.len();
    check_methods(methods, nodes)?;
    let fusing = methods
        .iter()
        .any(|m| matches!(m, Method::FoGmbFusion | Method::SoGmbFusion));
    let motion = config.motion_model()?;
    let sensors = config.sensor_models()?;
    let birth = config.birth_model()?;
    let mut filters: Vec<Option<GlmbFilter>> = (0..nodes)
        .map(|s| {
            let needed = fusing || methods.contains(&Method::LocalNode(s + 1));
            needed.then(|| GlmbFilter::new(motion.clone(), sensors[s].clone(), birth.clone(), tuning.filter))
        })
        .collect();
    let schedule = if fusing { tuning.schedule(nodes)? } else { Vec::new() };
    let steps = scans.iter().map(|s| s.len()).min().unwrap_or(0);
    let mut out: Vec<MethodEstimates> = methods
        .iter()
        .map(|m| MethodEstimates {
            method: *m,
            estimates: Vec::with_capacity(steps),
        })
        .collect();
    for k in 0..steps {
        for (s, f) in filters.iter_mut().enumerate() {
            if let Some(f) = f {
                f.step(&scans[s][k])?;
            }
        }
        let gmbs = if fusing {
            filters
                .iter()
                .map(|f| strip_labels(f.as_ref().expect("every node filters when fusing").density()))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        for m in out.iter_mut() {
            let estimate = match m.method {
                Method::LocalNode(i) => filters[i - 1].as_ref().expect("node is filtered").estimate().states,
                Method::SoGmbFusion | Method::FoGmbFusion => {
                    let approx: Vec<SoGmbDensity> = gmbs
                        .iter()
                        .map(|g| match m.method {
                            Method::SoGmbFusion => to_sogmb(g, &tuning.approx),
                            _ => to_fogmb(g, &tuning.approx),
                        })
                        .collect::<Result<_>>()?;
                    fuse_sequential(&approx, &schedule, &tuning.fusion, &tuning.approx)?.map_estimate()
                }
            };
            m.estimates.push(estimate);
        }
    }
    Ok(out)
}

/// Simulates one run with `seed` and scores every method.
pub fn run_single(
    config: &ScenarioConfig,
    tuning: &Tuning,
    methods: &[Method],
    seed: u64,
) -> Result<Vec<RunSeries>> {
    let truth = generate_truth(config, seed);
    let scans = generate_scans(config, &truth, seed)?;
    let estimates = run_with_scans(config, tuning, methods, &scans)?;
    score(&estimates, &truth, &tuning.ospa()?)
}

/// OSPA and cardinality per step of every method.
pub fn score(estimates: &[MethodEstimates], truth: &[TruthStep], params: &OspaParams) -> Result<Vec<RunSeries>> {
    Ok(estimates
        .iter()
        .map(|m| {
            let (o, c) = m
                .estimates
                .iter()
                .zip(truth)
                .map(|(est, t)| (ospa(&positions(est), &t.positions(), params), est.len() as f64))
                .unzip();
            RunSeries {
                method: m.method.to_string(),
                ospa: o,
                cardinality: c,
            }
        })
        .collect())
}

/// Monte Carlo over `n_runs` seeds derived from `seed`.
pub fn monte_carlo_experiment(
    config: &ScenarioConfig,
    tuning: &Tuning,
    methods: &[Method],
    n_runs: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    check_methods(methods, config.sensors.len())?;
    monte_carlo(n_runs, seed, |_, s| run_single(config, tuning, methods, s))
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: PathBuf,
    pub truth: PathBuf,
    pub scans: PathBuf,
    pub errors: PathBuf,
    pub result: MonteCarloResult,
}

#[derive(Serialize)]
struct TruthRow {
    step: u32,
    id: u32,
    px: f64,
    py: f64,
    vx: f64,
    vy: f64,
}

#[derive(Serialize)]
struct ScanRow {
    step: u32,
    sensor: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct ErrorRow<'a> {
    run: usize,
    seed: u64,
    message: &'a str,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the experiment and writes `summary.csv`, `truth.csv`, `scans.csv`
/// (first run) and `errors.csv` into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let config = load_scenario(&spec.scenario)?;
    let run = || monte_carlo_experiment(&config, &spec.tuning, &spec.methods, spec.n_runs, spec.seed);
    let result = if spec.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    std::fs::create_dir_all(&spec.output_dir)?;
    let dir = &spec.output_dir;

    let first_seed = crate::metrics::run_seed(spec.seed, 0);
    let truth = generate_truth(&config, first_seed);
    let true_card: Vec<usize> = truth.iter().map(|t| t.targets.len()).collect();

    let summary = dir.join("summary.csv");
    write_summary_csv(&summary_rows(&result, &true_card), std::fs::File::create(&summary)?)?;

    let truth_path = dir.join("truth.csv");
    write_rows(
        &truth_path,
        truth.iter().flat_map(|t| {
            t.targets.iter().map(move |(id, x)| TruthRow {
                step: t.step,
                id: *id,
                px: x[0],
                py: x[1],
                vx: x[2],
                vy: x[3],
            })
        }),
    )?;

    let scans_path = dir.join("scans.csv");
    let scans = generate_scans(&config, &truth, first_seed)?;
    write_rows(
        &scans_path,
        scans.iter().enumerate().flat_map(|(sensor, seq)| {
            seq.iter().flat_map(move |scan| {
                scan.points.iter().map(move |z| ScanRow {
                    step: scan.step,
                    sensor: sensor + 1,
                    x: z[0],
                    y: z[1],
                })
            })
        }),
    )?;

    let errors = dir.join("errors.csv");
    write_rows(
        &errors,
        result.failures.iter().map(|f| ErrorRow {
            run: f.run,
            seed: f.seed,
            message: &f.message,
        }),
    )?;
    Ok(ExperimentOutput {
        summary,
        truth: truth_path,
        scans: scans_path,
        errors,
        result,
    })
}

/// Plot-ready files written by [`emit_plotdata`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub cardinality: PathBuf,
    pub ospa: PathBuf,
    pub cardinality_bands: PathBuf,
}

const SUMMARY_COLUMNS: [&str; 7] = [
    "step",
    "method",
    "mean_ospa",
    "std_ospa",
    "mean_card",
    "std_card",
    "true_card",
];

/// Turns a summary CSV into one series file per figure:
/// `fig_cardinality.csv` (step, true_card, one mean-cardinality column per
/// method), `fig_ospa.csv` (step, one mean-OSPA column per method) and
/// `fig_cardinality_bands.csv` (step, method, mean_card, lower, upper,
/// true_card with a one-standard-deviation band).
pub fn emit_plotdata(summary: &Path, out_dir: &Path) -> Result<PlotFiles> {
    let mut reader = csv::Reader::from_path(summary)?;
    let headers = reader.headers()?.clone();
    let missing: Vec<&str> = SUMMARY_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "{} is missing column(s) {}",
            summary.display(),
            missing.join(", ")
        )));
    }
    let rows: Vec<crate::metrics::SummaryRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Schema(e.to_string()))?;

    let mut methods: Vec<String> = Vec::new();
    let mut steps: Vec<u32> = Vec::new();
    for r in &rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !steps.contains(&r.step) {
            steps.push(r.step);
        }
    }
    let lookup = |step: u32, method: &str| rows.iter().find(|r| r.step == step && r.method == method);
    std::fs::create_dir_all(out_dir)?;

    let cardinality = out_dir.join("fig_cardinality.csv");
    let mut w = csv::Writer::from_path(&cardinality)?;
    let mut header = vec!["step".to_string(), "true_card".to_string()];
    header.extend(methods.iter().cloned());
    w.write_record(&header)?;
    for s in &steps {
        let truth = rows.iter().find(|r| r.step == *s).map(|r| r.true_card).unwrap_or(0);
        let mut rec = vec![s.to_string(), truth.to_string()];
        rec.extend(methods.iter().map(|m| lookup(*s, m).map(|r| r.mean_card.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let ospa_path = out_dir.join("fig_ospa.csv");
    let mut w = csv::Writer::from_path(&ospa_path)?;
    let mut header = vec!["step".to_string()];
    header.extend(methods.iter().cloned());
    w.write_record(&header)?;
    for s in &steps {
        let mut rec = vec![s.to_string()];
        rec.extend(methods.iter().map(|m| lookup(*s, m).map(|r| r.mean_ospa.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let bands = out_dir.join("fig_cardinality_bands.csv");
    let mut w = csv::Writer::from_path(&bands)?;
    w.write_record(["step", "method", "mean_card", "lower", "upper", "true_card"])?;
    for r in &rows {
        w.write_record(&[
            r.step.to_string(),
            r.method.clone(),
            r.mean_card.to_string(),
            (r.mean_card - r.std_card).to_string(),
            (r.mean_card + r.std_card).to_string(),
            r.true_card.to_string(),
        ])?;
    }
    w.flush()?;

    Ok(PlotFiles {
        cardinality,
        ospa: ospa_path,
        cardinality_bands: bands,
    })
}
