//! Local δ-GLMB filter.
//!
//! Prediction and update are separate steps. Both are truncated:
//! prediction keeps the most probable survival/birth subsets of each prior
//! component, the update keeps the best association maps found by Murty's
//! algorithm. Weight bookkeeping is done in the log domain.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::assignment::{k_best_subsets, murty, CostMatrix};
use crate::error::{Error, Result};
use crate::gaussian::{
    checked_cholesky, log_sum_exp, symmetrize, Gaussian, GaussianMixture, WeightedGaussian,
};
use crate::rfs::{GlmbComponent, GlmbDensity, Label};

/// Axis-aligned rectangular surveillance region.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Region {
    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.y[1] - self.y[0])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x[0]..=self.x[1]).contains(&x) && (self.y[0]..=self.y[1]).contains(&y)
    }
}

/// Linear Gaussian transition with constant survival probability.
#[derive(Debug, Clone)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
    pub survival: f64,
}

impl MotionModel {
    pub fn new(transition: DMatrix<f64>, process_noise: DMatrix<f64>, survival: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&survival) {
            return Err(Error::InvalidParameter(format!("survival probability {survival}")));
        }
        let d = transition.nrows();
        if transition.ncols() != d || process_noise.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: process_noise.nrows(),
            });
        }
        let min = process_noise.clone().symmetric_eigen().eigenvalues.min();
        if min < -1e-9 * process_noise.amax().max(1.0) {
            return Err(Error::InvalidParameter(
                "process noise is not positive semi-definite".into(),
            ));
        }
        Ok(Self {
            transition,
            process_noise: symmetrize(process_noise),
            survival,
        })
    }

    /// Planar nearly-constant-velocity model on `[px, py, vx, vy]`.
    pub fn constant_velocity(dt: f64, sigma_v: f64, survival: f64) -> Result<Self> {
        let mut f = DMatrix::identity(4, 4);
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let (a, b, c) = (dt.powi(4) / 4.0, dt.powi(3) / 2.0, dt * dt);
        let s2 = sigma_v * sigma_v;
        #[rustfmt::skip]
        let q = DMatrix::from_row_slice(4, 4, &[
            a, 0.0, b, 0.0,
            0.0, a, 0.0, b,
            b, 0.0, c, 0.0,
            0.0, b, 0.0, c,
        ]) * s2;
        Self::new(f, q, survival)
    }

    /// Kalman prediction of every mixture component.
    pub fn predict_density(&self, p: &GaussianMixture) -> GaussianMixture {
        let f = &self.transition;
        let comps = p
            .components()
            .iter()
            .map(|c| WeightedGaussian {
                weight: c.weight,
                gaussian: Gaussian::from_moments(
                    f * c.mean(),
                    f * c.cov() * f.transpose() + &self.process_noise,
                ),
            })
            .collect();
        GaussianMixture::from_components_unchecked(comps)
    }
}

/// Linear Gaussian point sensor with Poisson clutter, uniform over `region`.
#[derive(Debug, Clone)]
pub struct SensorModel {
    pub detection: f64,
    pub clutter_rate: f64,
    pub region: Region,
    pub observation: DMatrix<f64>,
    pub noise: DMatrix<f64>,
}

impl SensorModel {
    pub fn new(
        detection: f64,
        clutter_rate: f64,
        region: Region,
        observation: DMatrix<f64>,
        noise: DMatrix<f64>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&detection) {
            return Err(Error::InvalidParameter(format!("detection probability {detection}")));
        }
        if !(clutter_rate >= 0.0 && clutter_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("clutter rate {clutter_rate}")));
        }
        if !(region.area() > 0.0) {
            return Err(Error::InvalidParameter("surveillance region has no area".into()));
        }
        let zdim = observation.nrows();
        if noise.shape() != (zdim, zdim) {
            return Err(Error::DimensionMismatch {
                expected: zdim,
                got: noise.nrows(),
            });
        }
        checked_cholesky(&noise)?;
        Ok(Self {
            detection,
            clutter_rate,
            region,
            observation,
            noise,
        })
    }

    /// Position-only sensor for the `[px, py, vx, vy]` state, `R = σ² I₂`.
    pub fn position(detection: f64, clutter_rate: f64, region: Region, sigma: f64) -> Result<Self> {
        let mut h = DMatrix::zeros(2, 4);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0;
        Self::new(detection, clutter_rate, region, h, DMatrix::identity(2, 2) * sigma * sigma)
    }

    /// `ln κ` with `κ = λ_c / |region|`. A clutter-free sensor is floored at
    /// the smallest positive double so that every measurement must be
    /// explained by a target.
    pub fn log_clutter_intensity(&self) -> f64 {
        (self.clutter_rate / self.region.area()).max(f64::MIN_POSITIVE).ln()
    }
}

/// One labeled Bernoulli birth term.
#[derive(Debug, Clone)]
pub struct BirthComponent {
    pub label: Label,
    pub existence: f64,
    pub density: Arc<GaussianMixture>,
}

/// Labeled multi-Bernoulli birth model.
#[derive(Debug, Clone, Default)]
pub struct BirthModel {
    pub components: Vec<BirthComponent>,
}

impl BirthModel {
    pub fn new(components: Vec<BirthComponent>) -> Result<Self> {
        for c in &components {
            if !(0.0..=1.0).contains(&c.existence) {
                return Err(Error::InvalidParameter(format!(
                    "birth existence {} for {}",
                    c.existence, c.label
                )));
            }
            if !c.density.is_normalized(1e-9) {
                return Err(Error::InvalidDensity("birth density is not normalized".into()));
            }
        }
        Ok(Self { components })
    }

    /// Same terms labeled `(step, i)`.
    pub fn at_step(&self, step: u32) -> BirthModel {
        BirthModel {
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| BirthComponent {
                    label: Label::new(step, i as u32),
                    ..c.clone()
                })
                .collect(),
        }
    }
}

/// Truncation and gating parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Posterior components retained after the update.
    pub k_best: usize,
    /// Predicted components retained after prediction.
    pub max_predicted: usize,
    pub prune_threshold: f64,
    pub max_components: usize,
    /// Mahalanobis gate, in standard deviations.
    pub gate: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            k_best: 100,
            max_predicted: 300,
            prune_threshold: 1e-5,
            max_components: 100,
            gate: 6.0,
        }
    }
}

/// Point measurements collected by one sensor at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementScan {
    pub step: u32,
    pub points: Vec<DVector<f64>>,
}

/// Multi-object state estimate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Estimate {
    pub states: Vec<DVector<f64>>,
    pub labels: Vec<Label>,
}

impl Estimate {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

fn arc_key(p: &Arc<GaussianMixture>) -> usize {
    Arc::as_ptr(p) as usize
}

fn normalize_log(mut entries: Vec<(f64, Vec<(Label, Arc<GaussianMixture>)>)>, limit: usize) -> Result<GlmbDensity> {
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    entries.truncate(limit.max(1));
    let total = log_sum_exp(&entries.iter().map(|e| e.0).collect::<Vec<_>>());
    if !total.is_finite() {
        return Err(Error::DegenerateUpdate);
    }
    let components = entries
        .into_iter()
        .enumerate()
        .map(|(i, (lw, tracks))| GlmbComponent::new(tracks, i as u64, (lw - total).exp()))
        .collect();
    Ok(GlmbDensity::sorted(components))
}

/// δ-GLMB prediction keeping at most `limit` components.
///
/// Every label of a prior component survives independently with the
/// survival probability and every birth term appears independently with
/// its existence probability; each prior component contributes its most
/// probable subsets, allotted in proportion to the square root of its
/// weight.
pub fn predict(
    prior: &GlmbDensity,
    motion: &MotionModel,
    birth: &BirthModel,
    limit: usize,
) -> Result<GlmbDensity> {
    let limit = limit.max(1);
    let mut predicted_tracks: HashMap<usize, Arc<GaussianMixture>> = HashMap::new();
    let root_total: f64 = prior.components().iter().map(|c| c.weight.sqrt()).sum();
    let mut entries = Vec::new();
    for comp in prior.components() {
        if comp.weight <= 0.0 {
            continue;
        }
        let share = (limit as f64 * comp.weight.sqrt() / root_total).ceil() as usize;
        let mut probs: Vec<f64> = vec![motion.survival; comp.tracks.len()];
        probs.extend(birth.components.iter().map(|b| b.existence));
        for (members, log_p) in k_best_subsets(&probs, share.max(1)) {
            let mut tracks = Vec::with_capacity(members.len());
            for m in members {
                if m < comp.tracks.len() {
                    let (label, density) = &comp.tracks[m];
                    let pred = predicted_tracks
                        .entry(arc_key(density))
                        .or_insert_with(|| Arc::new(motion.predict_density(density)))
                        .clone();
                    tracks.push((*label, pred));
                } else {
                    let b = &birth.components[m - comp.tracks.len()];
                    tracks.push((b.label, b.density.clone()));
                }
            }
            entries.push((comp.weight.ln() + log_p, tracks));
        }
    }
    normalize_log(entries, limit)
}

/// Measurement-independent Kalman quantities for one predicted track.
struct TrackInnovation {
    parts: Vec<InnovationPart>,
}

struct InnovationPart {
    log_weight: f64,
    predicted_z: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    log_norm: f64,
    gain: DMatrix<f64>,
    updated_cov: DMatrix<f64>,
    mean: DVector<f64>,
}

impl TrackInnovation {
    fn new(p: &GaussianMixture, sensor: &SensorModel) -> Result<Self> {
        let h = &sensor.observation;
        let zdim = h.nrows() as f64;
        let parts = p
            .components()
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| {
                let s = symmetrize(h * c.cov() * h.transpose() + &sensor.noise);
                let chol = checked_cholesky(&s)?;
                let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let pht = c.cov() * h.transpose();
                let gain = chol.solve(&pht.transpose()).transpose();
                let ikh = DMatrix::identity(c.cov().nrows(), c.cov().nrows()) - &gain * h;
                // Joseph form
                let updated_cov =
                    &ikh * c.cov() * ikh.transpose() + &gain * &sensor.noise * gain.transpose();
                Ok(InnovationPart {
                    log_weight: c.weight.ln(),
                    predicted_z: h * c.mean(),
                    chol,
                    log_norm: -0.5 * (zdim * (2.0 * std::f64::consts::PI).ln() + log_det),
                    gain,
                    updated_cov,
                    mean: c.mean().clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts })
    }

    /// Smallest squared Mahalanobis distance of `z` over the components.
    fn gate_distance(&self, z: &DVector<f64>) -> f64 {
        self.parts
            .iter()
            .map(|p| {
                let nu = z - &p.predicted_z;
                nu.dot(&p.chol.solve(&nu))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `(ln q(z), updated density)`, collapsed to one Gaussian.
    fn update(&self, z: &DVector<f64>) -> (f64, GaussianMixture) {
        let mut logs = Vec::with_capacity(self.parts.len());
        let mut comps = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            let nu = z - &p.predicted_z;
            let maha = nu.dot(&p.chol.solve(&nu));
            logs.push(p.log_weight + p.log_norm - 0.5 * maha);
            comps.push(WeightedGaussian {
                weight: 0.0,
                gaussian: Gaussian::from_moments(&p.mean + &p.gain * nu, p.updated_cov.clone()),
            });
        }
        let log_q = log_sum_exp(&logs);
        for (c, l) in comps.iter_mut().zip(&logs) {
            c.weight = (l - log_q).exp();
        }
        let mixture = GaussianMixture::from_components_unchecked(comps);
        let collapsed = GaussianMixture::single(mixture.collapse());
        (log_q, collapsed)
    }
}

/// δ-GLMB measurement update.
///
/// For every predicted component the best association maps (each track
/// missed or assigned a distinct gated measurement) are ranked with
/// Murty's algorithm; the `k_best` best posterior components overall are
/// kept and renormalized.
pub fn update(
    predicted: &GlmbDensity,
    scan: &MeasurementScan,
    sensor: &SensorModel,
    k_best: usize,
    gate: f64,
) -> Result<GlmbDensity> {
    let k_best = k_best.max(1);
    let gate2 = gate * gate;
    let log_pd = sensor.detection.ln();
    let log_miss = (1.0 - sensor.detection).ln();
    let log_kappa = sensor.log_clutter_intensity();
    let m = scan.points.len();

    // Per distinct predicted track: innovation data, then per gated
    // measurement the association cost and updated density.
    let mut innovations: HashMap<usize, TrackInnovation> = HashMap::new();
    let mut assoc: HashMap<(usize, usize), (f64, Arc<GaussianMixture>)> = HashMap::new();
    for comp in predicted.components() {
        for (_, density) in &comp.tracks {
            let key = arc_key(density);
            if innovations.contains_key(&key) {
                continue;
            }
            let innov = TrackInnovation::new(density, sensor)?;
            if sensor.detection > 0.0 {
                for (j, z) in scan.points.iter().enumerate() {
                    if innov.gate_distance(z) <= gate2 {
                        let (log_q, post) = innov.update(z);
                        let cost = -(log_pd + log_q - log_kappa);
                        assoc.insert((key, j), (cost, Arc::new(post)));
                    }
                }
            }
            innovations.insert(key, innov);
        }
    }

    let root_total: f64 = predicted.components().iter().map(|c| c.weight.sqrt()).sum();
    let mut entries = Vec::new();
    for comp in predicted.components() {
        if comp.weight <= 0.0 {
            continue;
        }
        let log_w = comp.weight.ln();
        let n = comp.tracks.len();
        if n == 0 {
            entries.push((log_w, Vec::new()));
            continue;
        }
        let keys: Vec<usize> = comp.tracks.iter().map(|(_, d)| arc_key(d)).collect();
        let cols: Vec<usize> = (0..m)
            .filter(|j| keys.iter().any(|k| assoc.contains_key(&(*k, *j))))
            .collect();
        let mut costs = CostMatrix::filled(n, cols.len() + n, f64::INFINITY);
        for (r, key) in keys.iter().enumerate() {
            for (c, j) in cols.iter().enumerate() {
                if let Some((cost, _)) = assoc.get(&(*key, *j)) {
                    costs.set(r, c, *cost);
                }
            }
            costs.set(r, cols.len() + r, -log_miss);
        }
        let share = (k_best as f64 * comp.weight.sqrt() / root_total).ceil() as usize;
        for a in murty(&costs, share.max(1)) {
            let tracks = a
                .columns
                .iter()
                .enumerate()
                .map(|(r, &c)| {
                    let (label, density) = &comp.tracks[r];
                    if c < cols.len() {
                        (*label, assoc[&(keys[r], cols[c])].1.clone())
                    } else {
                        (*label, density.clone())
                    }
                })
                .collect();
            entries.push((log_w - a.cost, tracks));
        }
    }
    normalize_log(entries, k_best)
}

/// MAP estimate: most probable cardinality, then the best component of
/// that cardinality; one mean per track.
pub fn extract_map(posterior: &GlmbDensity) -> Estimate {
    if posterior.is_empty() {
        return Estimate::default();
    }
    let n = posterior.cardinality().map();
    posterior
        .components()
        .iter()
        .find(|c| c.cardinality() == n)
        .map(|c| Estimate {
            states: c.tracks.iter().map(|(_, d)| d.mean()).collect(),
            labels: c.labels().collect(),
        })
        .unwrap_or_default()
}

/// Drops components below `weight_threshold` (the best one is always
/// kept), caps the count at `max_components`, renormalizes.
pub fn prune(d: &GlmbDensity, weight_threshold: f64, max_components: usize) -> Result<GlmbDensity> {
    if max_components < 1 {
        return Err(Error::InvalidParameter("max_components must be at least 1".into()));
    }
    let mut kept: Vec<GlmbComponent> = d
        .components()
        .iter()
        .enumerate()
        .filter(|(i, c)| *i == 0 || c.weight >= weight_threshold)
        .map(|(_, c)| c.clone())
        .take(max_components)
        .collect();
    let total: f64 = kept.iter().map(|c| c.weight).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidGlmb("no weight left after pruning".into()));
    }
    for c in &mut kept {
        c.weight /= total;
    }
    Ok(GlmbDensity::sorted(kept))
}

/// A δ-GLMB filter running at one sensor node.
#[derive(Debug, Clone)]
pub struct GlmbFilter {
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    pub config: FilterConfig,
    density: GlmbDensity,
}

impl GlmbFilter {
    pub fn new(motion: MotionModel, sensor: SensorModel, birth: BirthModel, config: FilterConfig) -> Self {
        Self {
            motion,
            sensor,
            birth,
            config,
            density: GlmbDensity::empty(),
        }
    }

    pub fn density(&self) -> &GlmbDensity {
        &self.density
    }

    /// Predict, update with `scan` and prune; births are labeled with the
    /// scan's step.
    pub fn step(&mut self, scan: &MeasurementScan) -> Result<&GlmbDensity> {
        let birth = self.birth.at_step(scan.step);
        let predicted = predict(&self.density, &self.motion, &birth, self.config.max_predicted)?;
        let posterior = update(&predicted, scan, &self.sensor, self.config.k_best, self.config.gate)?;
        self.density = prune(
            &posterior,
            self.config.prune_threshold,
            self.config.max_components,
        )?;
        Ok(&self.density)
    }

    pub fn estimate(&self) -> Estimate {
        extract_map(&self.density)
    }
}
