//! Closed-form Gaussian operations behind GCI fusion: powers, products and
//! the cross term `η = ∫ p1^ω1 p2^ω2 dx` with its normalized fused density.

use gmb_fusion::gaussian::{fusion_cross_term, Gaussian, GaussianMixture, WeightedGaussian};
use nalgebra::{DMatrix, DVector};

fn main() -> gmb_fusion::Result<()> {
    let g = Gaussian::scalar(0.0, 1.0)?;
    let (scale, p) = g.power(0.5)?;
    println!("N(0,1)^0.5 = {scale:.6} * N(0, {:.1})", p.cov()[(0, 0)]);

    let a = GaussianMixture::single(Gaussian::scalar(0.0, 1.0)?);
    let b = GaussianMixture::single(Gaussian::scalar(2.0, 1.0)?);
    let (eta, fused) = fusion_cross_term(&a, &b, 0.5, 0.5)?;
    let f = &fused.components()[0].gaussian;
    println!(
        "GCI of N(0,1) and N(2,1): eta = {eta:.6} (exp(-1/2) = {:.6}), fused N({:.3}, {:.3})",
        (-0.5f64).exp(),
        f.mean()[0],
        f.cov()[(0, 0)]
    );

    // more weight on the first density pulls the result towards it
    for w1 in [0.2, 0.5, 0.8] {
        let (eta, fused) = fusion_cross_term(&a, &b, w1, 1.0 - w1)?;
        println!("  omega1 = {w1}: eta = {eta:.4}, fused mean = {:.3}", fused.mean()[0]);
    }

    // 2-D: position-only fusion of two tracks with different uncertainty
    let track1 = Gaussian::new(
        DVector::from_vec(vec![100.0, 50.0]),
        DMatrix::from_row_slice(2, 2, &[400.0, 0.0, 0.0, 100.0]),
    )?;
    let track2 = Gaussian::new(
        DVector::from_vec(vec![110.0, 40.0]),
        DMatrix::from_row_slice(2, 2, &[100.0, 0.0, 0.0, 400.0]),
    )?;
    let (eta, fused) = fusion_cross_term(
        &GaussianMixture::single(track1),
        &GaussianMixture::single(track2),
        0.5,
        0.5,
    )?;
    let f = &fused.components()[0].gaussian;
    println!(
        "2-D fusion: eta = {eta:.4}, mean = ({:.1}, {:.1}), variances = ({:.0}, {:.0})",
        f.mean()[0],
        f.mean()[1],
        f.cov()[(0, 0)],
        f.cov()[(1, 1)]
    );

    // mixtures are powered component by component, and then reduced
    let bimodal = GaussianMixture::new(vec![
        WeightedGaussian::new(0.5, Gaussian::scalar(-3.0, 1.0)?)?,
        WeightedGaussian::new(0.5, Gaussian::scalar(3.0, 1.0)?)?,
    ])?;
    let (eta, fused) = fusion_cross_term(&bimodal, &b, 0.5, 0.5)?;
    println!("bimodal x N(2,1): eta = {eta:.4}, {} components", fused.len());
    for c in fused.components() {
        println!("  w = {:.4}  N({:.2}, {:.2})", c.weight, c.gaussian.mean()[0], c.gaussian.cov()[(0, 0)]);
    }
    Ok(())
}
