//! A single node running the δ-GLMB filter on a simulated scenario.
//!
//! ```text
//! cargo run --release --example glmb_tracking -- [scenario1|scenario2] [seed]
//! ```

use gmb_fusion::glmb::{FilterConfig, GlmbFilter};
use gmb_fusion::metrics::{ospa, positions, OspaParams};
use gmb_fusion::scenario::{builtin, generate_scans, generate_truth};

fn main() -> gmb_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "scenario1".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let config = builtin(&name).ok_or_else(|| gmb_fusion::Error::Config(format!("unknown scenario {name}")))?;

    let truth = generate_truth(&config, seed);
    let scans = generate_scans(&config, &truth, seed)?;
    let mut filter = GlmbFilter::new(
        config.motion_model()?,
        config.sensor_models()?.remove(0),
        config.birth_model()?,
        FilterConfig::default(),
    );
    let params = OspaParams::default();
    let mut total = 0.0;
    println!("step  true  est  hyps  OSPA [m]");
    for (scan, t) in scans[0].iter().zip(&truth) {
        filter.step(scan)?;
        let est = filter.estimate();
        let d = ospa(&positions(&est.states), &t.positions(), &params);
        total += d;
        println!(
            "{:4}  {:4}  {:3}  {:4}  {d:8.2}",
            scan.step,
            t.targets.len(),
            est.states.len(),
            filter.density().len()
        );
    }
    println!("time-averaged OSPA {:.2} m", total / truth.len() as f64);
    let est = filter.estimate();
    for (label, x) in est.labels.iter().zip(&est.states) {
        println!("track born at step {} (slot {}): position ({:.0}, {:.0})", label.birth, label.index, x[0], x[1]);
    }
    Ok(())
}
