//! Prints a built-in scenario as TOML, reads it back and checks it.
//!
//! ```text
//! cargo run --example scenario_config -- scenario2 > my_scenario.toml
//! ```

use gmb_fusion::scenario::{builtin, generate_scans, generate_truth, ScenarioConfig};

fn main() -> gmb_fusion::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "scenario1".into());
    let Some(config) = builtin(&name) else {
        eprintln!("unknown scenario `{name}` (try scenario1 or scenario2)");
        std::process::exit(1);
    };
    let text = config.to_toml_string()?;
    let parsed = ScenarioConfig::from_toml_str(&text)?;
    assert_eq!(parsed, config);
    print!("{text}");

    let truth = generate_truth(&config, config.seed);
    let scans = generate_scans(&config, &truth, config.seed)?;
    let peak = truth.iter().map(|t| t.targets.len()).max().unwrap_or(0);
    let points: usize = scans.iter().flatten().map(|s| s.points.len()).sum();
    eprintln!(
        "{}: {} steps, up to {peak} targets, {points} measurements over {} sensors",
        config.name,
        config.duration,
        scans.len()
    );
    Ok(())
}
