//! First- versus second-order approximation of an unlabeled GMB density.
//!
//! Half the mass says "two targets", half says "nobody". A multi-Bernoulli
//! with the same PHD spreads that over 0, 1 and 2 targets; the second-order
//! form keeps the cardinality distribution.

use std::sync::Arc;

use gmb_fusion::approx::{first_moment_multi_bernoulli, to_fogmb, to_sogmb, ApproxConfig};
use gmb_fusion::gaussian::{Gaussian, GaussianMixture};
use gmb_fusion::rfs::{GmbDensity, GmbHypothesis};
use nalgebra::DVector;

fn main() -> gmb_fusion::Result<()> {
    let track = |m: f64| -> gmb_fusion::Result<_> { Ok(Arc::new(GaussianMixture::single(Gaussian::scalar(m, 1.0)?))) };
    let g = GmbDensity::new(
        vec![1, 2],
        vec![
            GmbHypothesis {
                indices: vec![1, 2],
                history: 0,
                weight: 0.5,
                densities: vec![track(0.0)?, track(5.0)?],
            },
            GmbHypothesis {
                indices: vec![],
                history: 0,
                weight: 0.5,
                densities: vec![],
            },
        ],
    )?;

    let cfg = ApproxConfig::exact();
    let mb = first_moment_multi_bernoulli(&g, &cfg)?;
    for b in mb.components() {
        println!("Bernoulli {}: r = {}", b.index, b.existence);
    }
    let fo = to_fogmb(&g, &cfg)?;
    let so = to_sogmb(&g, &cfg)?;
    println!("exact cardinality  {:?}", g.cardinality().probabilities());
    println!("first order        {:?}", fo.cardinality().probabilities());
    println!("second order       {:?}", so.cardinality().probabilities());

    println!("\n   x    PHD exact    first order  second order");
    for x in [-1.0, 0.0, 2.5, 5.0] {
        let v = DVector::from_element(1, x);
        println!("{x:5.1}  {:.9}  {:.9}  {:.9}", g.phd(&v)?, fo.phd(&v)?, so.phd(&v)?);
    }
    println!(
        "\nMAP estimate: first order {} target(s), second order {} target(s)",
        fo.map_estimate().len(),
        so.map_estimate().len()
    );
    Ok(())
}
