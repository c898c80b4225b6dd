//! OSPA distance, sample statistics and the Monte Carlo harness.

use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve, CostMatrix};
use crate::error::{Error, Result};

/// OSPA cutoff `c` (metres) and order `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaParams {
    cutoff: f64,
    order: f64,
}

impl OspaParams {
    pub fn new(cutoff: f64, order: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) || !(order >= 1.0 && order.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "OSPA needs c > 0 and p >= 1, got c = {cutoff}, p = {order}"
            )));
        }
        Ok(Self { cutoff, order })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn order(&self) -> f64 {
        self.order
    }
}

impl Default for OspaParams {
    fn default() -> Self {
        Self {
            cutoff: 200.0,
            order: 2.0,
        }
    }
}

/// Position part `[px, py]` of each state.
pub fn positions(states: &[DVector<f64>]) -> Vec<[f64; 2]> {
    states.iter().map(|x| [x[0], x[1]]).collect()
}

pub(crate) fn cut_distance(a: [f64; 2], b: [f64; 2], params: &OspaParams) -> f64 {
    let d = (a[0] - b[0]).hypot(a[1] - b[1]);
    d.min(params.cutoff).powf(params.order)
}

/// OSPA distance between two planar point sets; `0` when both are empty.
pub fn ospa(x: &[[f64; 2]], y: &[[f64; 2]], params: &OspaParams) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return 0.0;
    }
    let c_p = params.cutoff.powf(params.order);
    let matched = if m == 0 {
        0.0
    } else {
        let mut costs = CostMatrix::filled(m, n, 0.0);
        for (i, a) in small.iter().enumerate() {
            for (j, b) in large.iter().enumerate() {
                costs.set(i, j, cut_distance(*a, *b, params));
            }
        }
        solve(&costs).expect("complete bipartite graph").cost
    };
    let d = ((matched + c_p * (n - m) as f64) / n as f64).powf(1.0 / params.order);
    d.min(params.cutoff)
}

/// Sample mean and `(n − 1)`-normalized standard deviation; a single
/// sample has deviation 0, no samples give `(NaN, NaN)`.
pub fn sample_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-step OSPA and estimated cardinality of one method in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub method: String,
    pub ospa: Vec<f64>,
    pub cardinality: Vec<f64>,
}

/// Per-step statistics of one method across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    pub method: String,
    pub mean_ospa: Vec<f64>,
    pub std_ospa: Vec<f64>,
    pub mean_card: Vec<f64>,
    pub std_card: Vec<f64>,
}

impl MethodStats {
    /// Mean OSPA over all steps.
    pub fn time_averaged_ospa(&self) -> f64 {
        self.mean_ospa.iter().sum::<f64>() / self.mean_ospa.len().max(1) as f64
    }
}

/// A failed run: its index, seed and error message.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub run: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub methods: Vec<MethodStats>,
    pub successful_runs: usize,
    pub failures: Vec<RunFailure>,
}

impl MonteCarloResult {
    pub fn method(&self, name: &str) -> Option<&MethodStats> {
        self.methods.iter().find(|m| m.method == name)
    }
}

/// Seed of run `run` derived from `base`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs `experiment(run, seed)` for `n_runs` independent seeds in parallel
/// and aggregates per-step statistics per method. Failed runs are excluded
/// from the statistics and reported.
pub fn monte_carlo<F>(n_runs: usize, base_seed: u64, experiment: F) -> Result<MonteCarloResult>
where
    F: Fn(usize, u64) -> Result<Vec<RunSeries>> + Sync,
{
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    let outcomes: Vec<(usize, u64, Result<Vec<RunSeries>>)> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(base_seed, run);
            (run, seed, experiment(run, seed))
        })
        .collect();
    let mut ok: Vec<Vec<RunSeries>> = Vec::new();
    let mut failures = Vec::new();
    for (run, seed, outcome) in outcomes {
        match outcome {
            Ok(series) => ok.push(series),
            Err(e) => failures.push(RunFailure {
                run,
                seed,
                message: e.to_string(),
            }),
        }
    }
    let Some(first) = ok.first() else {
        return Ok(MonteCarloResult {
            methods: Vec::new(),
            successful_runs: 0,
            failures,
        });
    };
    let mut methods = Vec::new();
    for (k, template) in first.iter().enumerate() {
        let steps = template.ospa.len();
        let mut stats = MethodStats {
            method: template.method.clone(),
            mean_ospa: Vec::with_capacity(steps),
            std_ospa: Vec::with_capacity(steps),
            mean_card: Vec::with_capacity(steps),
            std_card: Vec::with_capacity(steps),
        };
        for step in 0..steps {
            let o: Vec<f64> = ok.iter().map(|r| r[k].ospa[step]).collect();
            let c: Vec<f64> = ok.iter().map(|r| r[k].cardinality[step]).collect();
            let (mo, so) = sample_stats(&o);
            let (mc, sc) = sample_stats(&c);
            stats.mean_ospa.push(mo);
            stats.std_ospa.push(so);
            stats.mean_card.push(mc);
            stats.std_card.push(sc);
        }
        methods.push(stats);
    }
    Ok(MonteCarloResult {
        methods,
        successful_runs: ok.len(),
        failures,
    })
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub step: u32,
    pub method: String,
    pub mean_ospa: f64,
    pub std_ospa: f64,
    pub mean_card: f64,
    pub std_card: f64,
    pub true_card: usize,
}

/// Rows ordered by step, then by method order.
pub fn summary_rows(result: &MonteCarloResult, true_card: &[usize]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (k, truth) in true_card.iter().enumerate() {
        for m in &result.methods {
            rows.push(SummaryRow {
                step: k as u32 + 1,
                method: m.method.clone(),
                mean_ospa: m.mean_ospa[k],
                std_ospa: m.std_ospa[k],
                mean_card: m.mean_card[k],
                std_card: m.std_card[k],
                true_card: *truth,
            });
        }
    }
    rows
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
