//! GCI fusion of SO-GMB densities.
//!
//! Node 1 is the reference: every hypothesis `𝓘` of node 1 is paired with
//! each node-2 hypothesis `𝓙` of the same cardinality through bijections
//! `τ: 𝓘 → 𝓙` (fusion maps). A map's unnormalized weight is
//!
//! ```text
//! w̄(𝓘, τ) = ŵ₁(𝓘)^ω₁ ŵ₂(𝓙)^ω₂ Π_ı ∫ p̂₁^ı(x)^ω₁ p̂₂^τ(ı)(x)^ω₂ dx
//! ```
//!
//! and its fused track densities are the normalized geometric means.
//! Mixture powers use the per-component approximation
//! `(Σ a_i N_i)^ω ≈ Σ a_i^ω N_i^ω`, exact for single Gaussians.
//! All weights are handled in the log domain.

use std::collections::HashMap;
use std::sync::Arc;

use crate::approx::{to_sogmb, ApproxConfig};
use crate::assignment::{murty, CostMatrix};
use crate::error::{Error, Result};
use crate::gaussian::{log_cross_integral, log_fused_density, log_sum_exp, GaussianMixture, PoweredMixture};
use crate::rfs::{GmbDensity, GmbHypothesis, SoGmbDensity, SoGmbHypothesis};

/// GCI exponents `ω₁ + ω₂ = 1`, both in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    omega1: f64,
    omega2: f64,
}

impl FusionWeights {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        let open = |w: f64| w > 0.0 && w < 1.0;
        if !open(omega1) || !open(omega2) || (omega1 + omega2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "fusion weights ({omega1}, {omega2}) must lie in (0, 1) and sum to 1"
            )));
        }
        Ok(Self { omega1, omega2 })
    }

    pub fn equal() -> Self {
        Self {
            omega1: 0.5,
            omega2: 0.5,
        }
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn swapped(&self) -> Self {
        Self {
            omega1: self.omega2,
            omega2: self.omega1,
        }
    }

    /// Weights for a left fold over `nodes` posteriors that gives every
    /// node the same final exponent `1/nodes`.
    pub fn equal_schedule(nodes: usize) -> Vec<FusionWeights> {
        (1..nodes)
            .map(|k| {
                let w2 = 1.0 / (k + 1) as f64;
                Self {
                    omega1: 1.0 - w2,
                    omega2: w2,
                }
            })
            .collect()
    }
}

/// Injective map from a node-1 index set into node-2 indices:
/// `domain[k] ↦ image[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FusionMap {
    pub domain: Vec<usize>,
    pub image: Vec<usize>,
}

impl FusionMap {
    pub fn apply(&self, i: usize) -> Option<usize> {
        self.domain.iter().position(|d| *d == i).map(|k| self.image[k])
    }
}

/// Every injective map from `domain` into `targets`,
/// `|targets|! / (|targets| − |domain|)!` of them.
pub fn enumerate_fusion_maps(domain: &[usize], targets: &[usize]) -> Vec<FusionMap> {
    fn rec(
        domain: &[usize],
        targets: &[usize],
        used: &mut Vec<bool>,
        image: &mut Vec<usize>,
        out: &mut Vec<FusionMap>,
    ) {
        if image.len() == domain.len() {
            out.push(FusionMap {
                domain: domain.to_vec(),
                image: image.clone(),
            });
            return;
        }
        for (j, t) in targets.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                image.push(*t);
                rec(domain, targets, used, image, out);
                image.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    if domain.len() <= targets.len() {
        rec(domain, targets, &mut vec![false; targets.len()], &mut Vec::new(), &mut out);
    }
    out
}

/// A fusion map with its log unnormalized weight `ln w̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedMap {
    pub map: FusionMap,
    pub log_weight: f64,
}

/// Truncation parameters of pairwise fusion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Fusion maps kept per node-1 hypothesis.
    pub k_maps: usize,
    /// Fused hypotheses kept overall.
    pub max_hypotheses: usize,
    /// Fused hypotheses below this normalized weight are dropped.
    pub weight_threshold: f64,
    /// Cap on Gaussians per fused density; `None` keeps them exact.
    pub max_mixture_components: Option<usize>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            k_maps: 10,
            max_hypotheses: 100,
            weight_threshold: 1e-6,
            max_mixture_components: Some(8),
        }
    }
}

impl FusionConfig {
    /// No truncation: every feasible map is kept.
    pub fn exhaustive() -> Self {
        Self {
            k_maps: usize::MAX,
            max_hypotheses: usize::MAX,
            weight_threshold: 0.0,
            max_mixture_components: None,
        }
    }
}

fn key(p: &Arc<GaussianMixture>) -> usize {
    Arc::as_ptr(p) as usize
}

/// Caches powered mixtures and cross terms for one fusion.
struct Cache {
    weights: FusionWeights,
    powered1: HashMap<usize, PoweredMixture>,
    powered2: HashMap<usize, PoweredMixture>,
    log_eta: HashMap<(usize, usize), f64>,
}

impl Cache {
    fn new(weights: FusionWeights) -> Self {
        Self {
            weights,
            powered1: HashMap::new(),
            powered2: HashMap::new(),
            log_eta: HashMap::new(),
        }
    }

    fn powered(&mut self, p1: &Arc<GaussianMixture>, p2: &Arc<GaussianMixture>) -> Result<(&PoweredMixture, &PoweredMixture)> {
        let (k1, k2) = (key(p1), key(p2));
        if !self.powered1.contains_key(&k1) {
            self.powered1.insert(k1, PoweredMixture::new(p1, self.weights.omega1)?);
        }
        if !self.powered2.contains_key(&k2) {
            self.powered2.insert(k2, PoweredMixture::new(p2, self.weights.omega2)?);
        }
        Ok((&self.powered1[&k1], &self.powered2[&k2]))
    }

    fn log_eta(&mut self, p1: &Arc<GaussianMixture>, p2: &Arc<GaussianMixture>) -> Result<f64> {
        let k = (key(p1), key(p2));
        if let Some(v) = self.log_eta.get(&k) {
            return Ok(*v);
        }
        let (a, b) = self.powered(p1, p2)?;
        let v = log_cross_integral(a, b)?;
        self.log_eta.insert(k, v);
        Ok(v)
    }

    fn fused(&mut self, p1: &Arc<GaussianMixture>, p2: &Arc<GaussianMixture>) -> Result<GaussianMixture> {
        let (a, b) = self.powered(p1, p2)?;
        Ok(log_fused_density(a, b)?.1)
    }
}

/// Best maps from `h1` onto the single node-2 hypothesis `h2`
/// (equal cardinalities), ranked by weight.
fn rank_against(
    h1: &SoGmbHypothesis,
    h2: &SoGmbHypothesis,
    k: usize,
    cache: &mut Cache,
) -> Result<Vec<RankedMap>> {
    let n = h1.cardinality();
    if n != h2.cardinality() || h1.weight <= 0.0 || h2.weight <= 0.0 {
        return Ok(Vec::new());
    }
    let w = cache.weights;
    let base = w.omega1 * h1.weight.ln() + w.omega2 * h2.weight.ln();
    if n == 0 {
        return Ok(vec![RankedMap {
            map: FusionMap {
                domain: Vec::new(),
                image: Vec::new(),
            },
            log_weight: base,
        }]);
    }
    let mut costs = CostMatrix::filled(n, n, f64::INFINITY);
    for r in 0..n {
        for c in 0..n {
            let l = cache.log_eta(&h1.densities[r], &h2.densities[c])?;
            if l.is_finite() {
                costs.set(r, c, -l);
            }
        }
    }
    Ok(murty(&costs, k)
        .into_iter()
        .map(|a| RankedMap {
            map: FusionMap {
                domain: h1.indices.clone(),
                image: a.columns.iter().map(|c| h2.indices[*c]).collect(),
            },
            log_weight: base - a.cost,
        })
        .collect())
}

fn by_log_weight_desc(maps: &mut [RankedMap]) {
    maps.sort_by(|a, b| {
        b.log_weight
            .total_cmp(&a.log_weight)
            .then_with(|| a.map.image.cmp(&b.map.image))
    });
}

/// The `k` fusion maps of largest weight whose domain is the node-1
/// hypothesis with index set `domain`. Each node-2 hypothesis of matching
/// cardinality is searched with Murty's algorithm on `C = −ln η`, and the
/// candidates are merged.
pub fn k_best_fusion_maps(
    domain: &[usize],
    a: &SoGmbDensity,
    b: &SoGmbDensity,
    weights: FusionWeights,
    k: usize,
) -> Result<Vec<RankedMap>> {
    let Some(h1) = a.hypotheses().iter().find(|h| h.indices == domain) else {
        return Ok(Vec::new());
    };
    let mut cache = Cache::new(weights);
    best_maps_for(h1, b, k, &mut cache)
}

fn best_maps_for(
    h1: &SoGmbHypothesis,
    b: &SoGmbDensity,
    k: usize,
    cache: &mut Cache,
) -> Result<Vec<RankedMap>> {
    let k = k.max(1);
    let mut all = Vec::new();
    for h2 in b.hypotheses() {
        all.extend(rank_against(h1, h2, k, cache)?);
    }
    by_log_weight_desc(&mut all);
    all.truncate(k);
    Ok(all)
}

/// Pairwise GCI fusion with node `a` as reference.
///
/// The output is a GMB density over `a`'s index set whose hypotheses are
/// the retained `(𝓘, τ)` pairs; `history` numbers the maps.
pub fn fuse_pair(
    a: &SoGmbDensity,
    b: &SoGmbDensity,
    weights: FusionWeights,
    config: &FusionConfig,
) -> Result<GmbDensity> {
    let mut cache = Cache::new(weights);
    let mut ranked: Vec<(usize, RankedMap)> = Vec::new();
    for (i, h1) in a.hypotheses().iter().enumerate() {
        for m in best_maps_for(h1, b, config.k_maps, &mut cache)? {
            ranked.push((i, m));
        }
    }
    let logs: Vec<f64> = ranked.iter().map(|(_, m)| m.log_weight).collect();
    let total = log_sum_exp(&logs);
    if !total.is_finite() {
        let hypothesis = a
            .hypotheses()
            .first()
            .map(|h| format!("{:?}", h.indices))
            .unwrap_or_default();
        return Err(Error::DegenerateFusion { hypothesis });
    }
    ranked.sort_by(|x, y| y.1.log_weight.total_cmp(&x.1.log_weight));
    let threshold = config.weight_threshold.max(0.0).ln();
    let kept: Vec<(usize, RankedMap)> = ranked
        .into_iter()
        .enumerate()
        .filter(|(n, (_, m))| *n == 0 || m.log_weight - total >= threshold)
        .map(|(_, x)| x)
        .take(config.max_hypotheses.max(1))
        .collect();
    let kept_total = log_sum_exp(&kept.iter().map(|(_, m)| m.log_weight).collect::<Vec<_>>());

    let mut fused_cache: HashMap<(usize, usize), Arc<GaussianMixture>> = HashMap::new();
    let mut hypotheses = Vec::with_capacity(kept.len());
    for (history, (i, m)) in kept.into_iter().enumerate() {
        let h1 = &a.hypotheses()[i];
        let h2 = b
            .hypotheses()
            .iter()
            .find(|h| {
                let mut image = m.map.image.clone();
                image.sort_unstable();
                h.indices == image
            })
            .expect("map image is a node-2 hypothesis");
        let mut densities = Vec::with_capacity(h1.cardinality());
        for (p1, j) in h1.densities.iter().zip(&m.map.image) {
            let p2 = &h2.densities[h2.indices.binary_search(j).expect("image index")];
            let k = (key(p1), key(p2));
            let fused = match fused_cache.get(&k) {
                Some(f) => f.clone(),
                None => {
                    let mut f = cache.fused(p1, p2)?;
                    if let Some(cap) = config.max_mixture_components {
                        if f.len() > cap {
                            f = f.reduce(cap)?;
                        }
                    }
                    let f = Arc::new(f);
                    fused_cache.insert(k, f.clone());
                    f
                }
            };
            densities.push(fused);
        }
        hypotheses.push(GmbHypothesis {
            indices: h1.indices.clone(),
            history: history as u64,
            weight: (m.log_weight - kept_total).exp(),
            densities,
        });
    }
    Ok(GmbDensity::sorted(a.index_set().to_vec(), hypotheses))
}

/// Left fold of [`fuse_pair`] over `posteriors`; every intermediate result
/// is brought back to SO-GMB form before the next fusion. `schedule[k]`
/// weighs the running result against `posteriors[k + 1]`.
pub fn fuse_sequential(
    posteriors: &[SoGmbDensity],
    schedule: &[FusionWeights],
    config: &FusionConfig,
    approx: &ApproxConfig,
) -> Result<GmbDensity> {
    if posteriors.len() < 2 {
        return Err(Error::InvalidParameter(
            "sequential fusion needs at least two posteriors".into(),
        ));
    }
    if schedule.len() != posteriors.len() - 1 {
        return Err(Error::InvalidParameter(format!(
            "{} posteriors need {} fusion weights, got {}",
            posteriors.len(),
            posteriors.len() - 1,
            schedule.len()
        )));
    }
    let wrap = |node: usize| move |e: Error| Error::FusionAtNode { node, source: Box::new(e) };
    let mut fused = fuse_pair(&posteriors[0], &posteriors[1], schedule[0], config).map_err(wrap(1))?;
    for node in 2..posteriors.len() {
        let running = to_sogmb(&fused, approx).map_err(wrap(node))?;
        fused = fuse_pair(&running, &posteriors[node], schedule[node - 1], config)
            .map_err(wrap(node))?;
    }
    Ok(fused)
}
