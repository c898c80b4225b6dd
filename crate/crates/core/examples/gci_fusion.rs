//! Pairwise GCI fusion of two second-order GMB densities.
//!
//! Node 1 is fairly sure of two targets. Node 2 sees the same two targets
//! but is unsure whether the second exists and uses different indices.
//! Fusion matches the indices through ranked fusion maps.

use std::sync::Arc;

use gmb_fusion::fusion::{fuse_pair, k_best_fusion_maps, FusionConfig, FusionWeights};
use gmb_fusion::gaussian::{Gaussian, GaussianMixture};
use gmb_fusion::rfs::{SoGmbDensity, SoGmbHypothesis};

fn track(m: f64, v: f64) -> gmb_fusion::Result<Arc<GaussianMixture>> {
    Ok(Arc::new(GaussianMixture::single(Gaussian::scalar(m, v)?)))
}

fn main() -> gmb_fusion::Result<()> {
    let node1 = SoGmbDensity::new(
        vec![0, 1],
        vec![
            SoGmbHypothesis { indices: vec![0, 1], weight: 0.8, densities: vec![track(0.0, 1.0)?, track(10.0, 1.0)?] },
            SoGmbHypothesis { indices: vec![0], weight: 0.2, densities: vec![track(0.0, 1.0)?] },
        ],
    )?;
    let node2 = SoGmbDensity::new(
        vec![5, 6],
        vec![
            SoGmbHypothesis { indices: vec![5, 6], weight: 0.5, densities: vec![track(10.5, 2.0)?, track(0.4, 0.5)?] },
            SoGmbHypothesis { indices: vec![6], weight: 0.5, densities: vec![track(0.4, 0.5)?] },
        ],
    )?;

    let w = FusionWeights::equal();
    println!("fusion maps for {{0, 1}}:");
    for m in k_best_fusion_maps(&[0, 1], &node1, &node2, w, 10)? {
        println!("  {:?} -> {:?}  log weight {:.3}", m.map.domain, m.map.image, m.log_weight);
    }

    let fused = fuse_pair(&node1, &node2, w, &FusionConfig::default())?;
    println!("\nfused hypotheses:");
    for h in fused.hypotheses() {
        let means: Vec<String> = h.densities.iter().map(|p| format!("{:.2}", p.mean()[0])).collect();
        println!("  {:?} (map #{}) w = {:.4}  means [{}]", h.indices, h.history, h.weight, means.join(", "));
    }
    println!("cardinality node 1 {:?}", node1.cardinality().probabilities());
    println!("cardinality node 2 {:?}", node2.cardinality().probabilities());
    println!("cardinality fused  {:?}", fused.cardinality().probabilities());

    // fusing a density with itself gives it back when its tracks are apart
    let same = fuse_pair(&node1, &node1, w, &FusionConfig::default())?;
    println!("\nself-fusion cardinality {:?}", same.cardinality().probabilities());
    Ok(())
}
