//! Fusion along a chain of three nodes. Each step fuses the running result
//! with the next node, giving every node the same overall weight.

use gmb_fusion::approx::{strip_labels, to_sogmb, ApproxConfig};
use gmb_fusion::fusion::{fuse_sequential, FusionConfig, FusionWeights};
use gmb_fusion::glmb::{FilterConfig, GlmbFilter};
use gmb_fusion::metrics::{ospa, positions, OspaParams};
use gmb_fusion::scenario::{generate_scans, generate_truth, scenario1};

fn main() -> gmb_fusion::Result<()> {
    let mut config = scenario1();
    config.sensors.push(config.sensors[0].clone());
    config.duration = 15;
    let seed = 11;
    let truth = generate_truth(&config, seed);
    let scans = generate_scans(&config, &truth, seed)?;
    let sensors = config.sensor_models()?;
    let mut filters: Vec<GlmbFilter> = sensors
        .into_iter()
        .map(|s| -> gmb_fusion::Result<_> {
            Ok(GlmbFilter::new(config.motion_model()?, s, config.birth_model()?, FilterConfig::default()))
        })
        .collect::<gmb_fusion::Result<_>>()?;

    let schedule = FusionWeights::equal_schedule(filters.len());
    for w in &schedule {
        println!("step weights ({:.3}, {:.3})", w.omega1(), w.omega2());
    }
    let approx = ApproxConfig::default();
    let params = OspaParams::default();
    println!("\nstep  true  node1  node2  node3  fused   OSPA node1 / fused");
    for (k, t) in truth.iter().enumerate() {
        let mut posteriors = Vec::new();
        let mut local = Vec::new();
        for (f, s) in filters.iter_mut().zip(&scans) {
            f.step(&s[k])?;
            local.push(f.estimate().states.len());
            posteriors.push(to_sogmb(&strip_labels(f.density())?, &approx)?);
        }
        let fused = fuse_sequential(&posteriors, &schedule, &FusionConfig::default(), &approx)?;
        let est = fused.map_estimate();
        println!(
            "{:4}  {:4}  {:5}  {:5}  {:5}  {:5}   {:6.1} / {:6.1}",
            t.step,
            t.targets.len(),
            local[0],
            local[1],
            local[2],
            est.len(),
            ospa(&positions(&filters[0].estimate().states), &t.positions(), &params),
            ospa(&positions(&est), &t.positions(), &params)
        );
    }
    Ok(())
}
