//! Monte Carlo comparison of local filters and both fusion methods, written
//! as CSV files plus plot-ready series.
//!
//! ```text
//! cargo run --release --example monte_carlo -- [runs] [output dir]
//! ```

use std::path::PathBuf;

use gmb_fusion::experiment::{emit_plotdata, run_experiment, ExperimentSpec, Method, Tuning};

fn main() -> gmb_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_runs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let output_dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("gmb-fusion-mc"));

    let spec = ExperimentSpec {
        scenario: "builtin:scenario1".into(),
        methods: vec![Method::LocalNode(1), Method::LocalNode(2), Method::FoGmbFusion, Method::SoGmbFusion],
        n_runs,
        seed: 1,
        output_dir: output_dir.clone(),
        threads: 0,
        tuning: Tuning::default(),
    };
    let out = run_experiment(&spec)?;
    println!("{} of {n_runs} runs succeeded", out.result.successful_runs);
    for m in &out.result.methods {
        let steady = &m.mean_card[10..];
        println!(
            "{:<14} time-averaged OSPA {:6.2} m, mean cardinality (steps 11+) {:.2}",
            m.method,
            m.time_averaged_ospa(),
            steady.iter().sum::<f64>() / steady.len() as f64
        );
    }
    let plots = emit_plotdata(&out.summary, &output_dir.join("plots"))?;
    println!("summary: {}", out.summary.display());
    println!("plots:   {}", plots.ospa.parent().unwrap().display());
    Ok(())
}
