//! Brute-force reference computations for tests.
//!
//! Everything here is deliberately naive: assignments by exhaustive
//! enumeration, OSPA by trying every permutation, and multi-object
//! densities evaluated literally on a 1-D grid (including the sum over
//! permutations) so that fusion can be checked against the exact
//! geometric mean with set integrals done by quadrature.

use crate::assignment::CostMatrix;
use crate::error::{Error, Result};
use crate::gaussian::GaussianMixture;
use crate::metrics::OspaParams;
use crate::rfs::{GmbDensity, SoGmbDensity};

/// Every injective row → column assignment with finite cost, cheapest
/// first.
pub fn enumerate_assignments(costs: &CostMatrix) -> Vec<(Vec<usize>, f64)> {
    fn rec(
        costs: &CostMatrix,
        row: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        acc: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if row == costs.rows() {
            out.push((current.clone(), acc));
            return;
        }
        for c in 0..costs.cols() {
            let v = costs.get(row, c);
            if !used[c] && v.is_finite() {
                used[c] = true;
                current.push(c);
                rec(costs, row + 1, used, current, acc + v, out);
                current.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(costs, 0, &mut vec![false; costs.cols()], &mut Vec::new(), 0.0, &mut out);
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// OSPA by trying every assignment of the smaller set.
pub fn brute_ospa(x: &[[f64; 2]], y: &[[f64; 2]], params: &OspaParams) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return 0.0;
    }
    let (c, p) = (params.cutoff(), params.order());
    let mut costs = CostMatrix::filled(m, n, 0.0);
    for (i, a) in small.iter().enumerate() {
        for (j, b) in large.iter().enumerate() {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            costs.set(i, j, d.min(c).powf(p));
        }
    }
    let best = enumerate_assignments(&costs)
        .first()
        .map(|a| a.1)
        .unwrap_or(0.0);
    ((best + c.powf(p) * (n - m) as f64) / n as f64).powf(1.0 / p)
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// 1-D mixture value computed from its raw parameters.
pub fn mixture_pdf_1d(p: &GaussianMixture, x: f64) -> f64 {
    p.components()
        .iter()
        .map(|c| c.weight * normal_pdf(x, c.mean()[0], c.cov()[(0, 0)]))
        .sum()
}

/// PHD by literal expansion over hypotheses and indices, 1-D.
pub fn expand_phd(hypotheses: &[(f64, Vec<&GaussianMixture>)], x: f64) -> f64 {
    hypotheses
        .iter()
        .map(|(w, ps)| w * ps.iter().map(|p| mixture_pdf_1d(p, x)).sum::<f64>())
        .sum()
}

/// Cardinality distribution by grouping hypothesis weights.
pub fn expand_cardinality(hypotheses: &[(f64, usize)]) -> Vec<f64> {
    let n = hypotheses.iter().map(|h| h.1).max().unwrap_or(0);
    let mut rho = vec![0.0; n + 1];
    for (w, k) in hypotheses {
        rho[*k] += w;
    }
    rho
}

/// Uniform 1-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub spacing: f64,
}

impl Grid {
    /// `count` midpoints of equal cells covering `[lo, hi]`.
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        let spacing = (hi - lo) / count as f64;
        Self {
            points: (0..count).map(|i| lo + (i as f64 + 0.5) * spacing).collect(),
            spacing,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Set density on a grid: `layers[n]` holds `π({x₁,…,x_n})` on the
/// `n`-fold product grid in row-major order (`layers[0]` has one value).
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub grid: Grid,
    pub layers: Vec<Vec<f64>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl GridDensity {
    pub fn zeros(grid: Grid, n_max: usize) -> Self {
        let layers = (0..=n_max).map(|n| vec![0.0; grid.len().pow(n as u32)]).collect();
        Self { grid, layers }
    }

    pub fn n_max(&self) -> usize {
        self.layers.len() - 1
    }

    /// `(1/n!) ∫ π_n dx₁…dx_n` by the midpoint rule.
    pub fn cardinality(&self) -> Vec<f64> {
        self.layers
            .iter()
            .enumerate()
            .map(|(n, layer)| layer.iter().sum::<f64>() * self.grid.spacing.powi(n as i32) / factorial(n))
            .collect()
    }

    /// `∫ π(X) δX = Σ_n (1/n!) ∫ π_n`.
    pub fn set_integral(&self) -> f64 {
        self.cardinality().iter().sum()
    }

    /// PHD on the grid: `v(x) = Σ_n 1/(n−1)! ∫ π_n(x, x₂, …, x_n) dx₂…dx_n`.
    pub fn phd(&self) -> Vec<f64> {
        let g = self.grid.len();
        let mut v = vec![0.0; g];
        for (n, layer) in self.layers.iter().enumerate().skip(1) {
            let block = g.pow(n as u32 - 1);
            let scale = self.grid.spacing.powi(n as i32 - 1) / factorial(n - 1);
            for (i, vi) in v.iter_mut().enumerate() {
                *vi += layer[i * block..(i + 1) * block].iter().sum::<f64>() * scale;
            }
        }
        v
    }

    /// Mass, mean and variance of the single-target marginal of layer `n`
    /// (the layer is symmetric, so the first coordinate is used).
    pub fn layer_marginal(&self, n: usize) -> (f64, f64, f64) {
        let g = self.grid.len();
        let block = g.pow(n as u32 - 1);
        let layer = &self.layers[n];
        let marginal: Vec<f64> = (0..g)
            .map(|i| layer[i * block..(i + 1) * block].iter().sum::<f64>())
            .collect();
        let mass: f64 = marginal.iter().sum();
        let mean = marginal.iter().zip(&self.grid.points).map(|(m, x)| m * x).sum::<f64>() / mass;
        let var = marginal
            .iter()
            .zip(&self.grid.points)
            .map(|(m, x)| m * (x - mean).powi(2))
            .sum::<f64>()
            / mass;
        let mass = mass * self.grid.spacing.powi(n as i32) / factorial(n);
        (mass, mean, var)
    }

    /// Largest absolute pointwise difference, scaled by the largest
    /// absolute value of `other`, over all layers.
    pub fn relative_gap(&self, other: &GridDensity) -> f64 {
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in self.layers.iter().zip(&other.layers) {
            for (x, y) in a.iter().zip(b) {
                diff = diff.max((x - y).abs());
                scale = scale.max(y.abs());
            }
        }
        diff / scale
    }
}

/// Adds `w Σ_σ Π_k p_σ(k)(x_k)` to the layer of cardinality `densities.len()`.
fn add_hypothesis(out: &mut GridDensity, weight: f64, densities: &[&GaussianMixture]) -> Result<()> {
    let n = densities.len();
    if n > out.n_max() {
        return Err(Error::Truncation {
            cardinality: n,
            n_max: out.n_max(),
        });
    }
    let g = out.grid.len();
    let values: Vec<Vec<f64>> = densities
        .iter()
        .map(|p| out.grid.points.iter().map(|x| mixture_pdf_1d(p, *x)).collect())
        .collect();
    let perms = permutations(n);
    let layer = &mut out.layers[n];
    for (flat, cell) in layer.iter_mut().enumerate() {
        let mut coords = vec![0usize; n];
        let mut rest = flat;
        for k in (0..n).rev() {
            coords[k] = rest % g;
            rest /= g;
        }
        let mut sum = 0.0;
        for perm in &perms {
            sum += perm
                .iter()
                .zip(&coords)
                .map(|(s, c)| values[*s][*c])
                .product::<f64>();
        }
        *cell += weight * sum;
    }
    Ok(())
}

/// Literal grid evaluation of a GMB density, 1-D densities only.
pub fn gridize_gmb(d: &GmbDensity, grid: &Grid, n_max: usize) -> Result<GridDensity> {
    let mut out = GridDensity::zeros(grid.clone(), n_max);
    for h in d.hypotheses() {
        let ps: Vec<&GaussianMixture> = h.densities.iter().map(|p| p.as_ref()).collect();
        add_hypothesis(&mut out, h.weight, &ps)?;
    }
    Ok(out)
}

/// Literal grid evaluation of an SO-GMB density, 1-D densities only.
pub fn gridize_sogmb(d: &SoGmbDensity, grid: &Grid, n_max: usize) -> Result<GridDensity> {
    let mut out = GridDensity::zeros(grid.clone(), n_max);
    for h in d.hypotheses() {
        let ps: Vec<&GaussianMixture> = h.densities.iter().map(|p| p.as_ref()).collect();
        add_hypothesis(&mut out, h.weight, &ps)?;
    }
    Ok(out)
}

/// Exact GCI on the grid: `π₁^ω₁ π₂^ω₂` normalized by its set integral.
/// `ω₂ = 0` is allowed here (and only here) for boundary checks.
pub fn exact_gci(g1: &GridDensity, g2: &GridDensity, omega1: f64, omega2: f64) -> Result<GridDensity> {
    if g1.grid != g2.grid || g1.layers.len() != g2.layers.len() {
        return Err(Error::InvalidParameter("grid densities do not share a grid".into()));
    }
    if !(0.0..=1.0).contains(&omega1) || !(0.0..=1.0).contains(&omega2) || (omega1 + omega2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("weights {omega1}, {omega2}")));
    }
    let mut out = g1.clone();
    for (a, b) in out.layers.iter_mut().zip(&g2.layers) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.powf(omega1) * y.powf(omega2);
        }
    }
    let z = out.set_integral();
    if !(z > 0.0) {
        return Err(Error::DegenerateFusion {
            hypothesis: "grid".into(),
        });
    }
    for layer in &mut out.layers {
        for x in layer.iter_mut() {
            *x /= z;
        }
    }
    Ok(out)
}
