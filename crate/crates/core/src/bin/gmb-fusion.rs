use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gmb_fusion::experiment::{emit_plotdata, load_scenario, run_experiment, ExperimentSpec, Method};

/// Distributed GLMB tracking with GCI fusion of GMB densities.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV results.
    Run {
        /// Experiment spec (TOML).
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        spec: Option<PathBuf>,
        /// Run a scenario with default tuning instead of a spec
        /// (a TOML file or `builtin:scenario1` / `builtin:scenario2`).
        #[arg(long)]
        scenario: Option<String>,
        /// Output directory (overrides the spec).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated methods, e.g. `local-node-1,sogmb-fusion`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Worker threads, 0 for all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Turn a summary CSV into per-figure series files.
    EmitPlotdata {
        summary: PathBuf,
        #[arg(long, short, default_value = "plots")]
        output: PathBuf,
    },
    /// Parse and check a scenario file.
    ValidateScenario {
        /// A TOML file or `builtin:<name>`.
        scenario: String,
    },
}

fn run(command: Command) -> gmb_fusion::Result<()> {
    match command {
        Command::Run {
            spec,
            scenario,
            output,
            runs,
            seed,
            methods,
            threads,
        } => {
            let mut spec = match (spec, scenario) {
                (Some(path), _) => ExperimentSpec::load(&path)?,
                (None, Some(scenario)) => ExperimentSpec {
                    scenario,
                    methods: vec![
                        Method::LocalNode(1),
                        Method::LocalNode(2),
                        Method::FoGmbFusion,
                        Method::SoGmbFusion,
                    ],
                    n_runs: 1,
                    seed: 0,
                    output_dir: PathBuf::from("results"),
                    threads: 0,
                    tuning: Default::default(),
                },
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let Some(o) = output {
                spec.output_dir = o;
            }
            if let Some(r) = runs {
                spec.n_runs = r;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(m) = methods {
                spec.methods = m;
            }
            if let Some(t) = threads {
                spec.threads = t;
            }
            let out = run_experiment(&spec)?;
            for m in &out.result.methods {
                println!("{:<14} time-averaged OSPA {:8.2} m", m.method, m.time_averaged_ospa());
            }
            if !out.result.failures.is_empty() {
                eprintln!(
                    "{} of {} runs failed, see {}",
                    out.result.failures.len(),
                    spec.n_runs,
                    out.errors.display()
                );
            }
            println!("wrote {}", out.summary.display());
            Ok(())
        }
        Command::EmitPlotdata { summary, output } => {
            let files = emit_plotdata(&summary, &output)?;
            for p in [files.cardinality, files.ospa, files.cardinality_bands] {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::ValidateScenario { scenario } => {
            let config = load_scenario(&scenario)?;
            config.validate()?;
            println!(
                "{}: {} steps, {} tracks, {} sensors, {} birth terms",
                config.name,
                config.duration,
                config.tracks.len(),
                config.sensors.len(),
                config.births.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
