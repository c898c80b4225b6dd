//! Multi-object density representations.
//!
//! * [`GlmbDensity`]: labeled δ-GLMB posterior, one explicit label set per
//!   component.
//! * [`GmbDensity`]: unlabeled generalized multi-Bernoulli density, a mixture
//!   over `(index set, history)` hypotheses.
//! * [`SoGmbDensity`]: the same family with histories marginalized out; one
//!   spatial density per `(hypothesis, index)`.
//! * [`MultiBernoulli`]: independent Bernoulli components.
//!
//! Track densities are shared through `Arc` since many hypotheses refer to
//! the same single-target density. Hypothesis lists are kept sorted by
//! descending weight.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussian::GaussianMixture;

/// Tolerance on normalization invariants.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Generalized Kronecker delta: `1` when `x == y`.
pub fn kronecker<T: PartialEq + ?Sized>(y: &T, x: &T) -> f64 {
    if x == y {
        1.0
    } else {
        0.0
    }
}

/// Inclusion function: `1` when every element of `x` is in `y`.
pub fn inclusion<T: Ord>(y: &[T], x: &[T]) -> f64 {
    let y: BTreeSet<&T> = y.iter().collect();
    if x.iter().all(|v| y.contains(v)) {
        1.0
    } else {
        0.0
    }
}

/// Track label: birth step and index within that step's birth model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub birth: u32,
    pub index: u32,
}

impl Label {
    pub fn new(birth: u32, index: u32) -> Self {
        Self { birth, index }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.birth, self.index)
    }
}

/// Probability mass function of the number of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityDistribution {
    probabilities: Vec<f64>,
}

impl CardinalityDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDensity("negative cardinality probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "cardinality distribution sums to {total}"
            )));
        }
        Ok(Self { probabilities })
    }

    /// Accumulates `(n, weight)` pairs; trailing zeros are trimmed.
    pub(crate) fn from_counts(counts: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut probabilities = vec![0.0];
        for (n, w) in counts {
            if probabilities.len() <= n {
                probabilities.resize(n + 1, 0.0);
            }
            probabilities[n] += w;
        }
        while probabilities.len() > 1 && *probabilities.last().unwrap() == 0.0 {
            probabilities.pop();
        }
        Self { probabilities }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probabilities.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - m).powi(2) * p)
            .sum()
    }

    /// Most probable cardinality; the smallest one on ties.
    pub fn map(&self) -> usize {
        let mut best = 0;
        for (n, p) in self.probabilities.iter().enumerate() {
            if *p > self.probabilities[best] {
                best = n;
            }
        }
        best
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w >= 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDensity(format!("invalid hypothesis weight {w}")))
    }
}

fn check_normalized(total: f64, what: &str) -> Result<()> {
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDensity(format!(
            "{what} weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn check_density(p: &GaussianMixture) -> Result<()> {
    if !p.is_normalized(NORMALIZATION_TOL) {
        return Err(Error::InvalidDensity(format!(
            "spatial density integrates to {}",
            p.total_weight()
        )));
    }
    Ok(())
}

fn by_weight_desc<T>(items: &mut [T], weight: impl Fn(&T) -> f64) {
    items.sort_by(|a, b| weight(b).total_cmp(&weight(a)));
}

// ---------------------------------------------------------------------------
// GLMB
// ---------------------------------------------------------------------------

/// One δ-GLMB component: label set, association history, weight and the
/// per-label spatial densities.
#[derive(Debug, Clone)]
pub struct GlmbComponent {
    /// Sorted by label.
    pub tracks: Vec<(Label, Arc<GaussianMixture>)>,
    pub history: u64,
    pub weight: f64,
}

impl GlmbComponent {
    pub fn new(mut tracks: Vec<(Label, Arc<GaussianMixture>)>, history: u64, weight: f64) -> Self {
        tracks.sort_by_key(|(l, _)| *l);
        Self {
            tracks,
            history,
            weight,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.tracks.iter().map(|(l, _)| *l)
    }

    pub fn cardinality(&self) -> usize {
        self.tracks.len()
    }

    pub fn density(&self, label: Label) -> Option<&GaussianMixture> {
        self.tracks
            .binary_search_by_key(&label, |(l, _)| *l)
            .ok()
            .map(|i| self.tracks[i].1.as_ref())
    }

    fn has_distinct_labels(&self) -> bool {
        self.tracks.windows(2).all(|w| w[0].0 < w[1].0)
    }
}

/// Labeled multi-object density in δ-GLMB form.
#[derive(Debug, Clone)]
pub struct GlmbDensity {
    components: Vec<GlmbComponent>,
}

impl GlmbDensity {
    /// Validates normalization, per-track densities and distinct labels.
    pub fn new(components: Vec<GlmbComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidGlmb("no components".into()));
        }
        for c in &components {
            check_weight(c.weight)?;
            if !c.has_distinct_labels() {
                return Err(Error::InvalidGlmb(format!(
                    "duplicate labels in component with history {}",
                    c.history
                )));
            }
            for (_, p) in &c.tracks {
                check_density(p)?;
            }
        }
        check_normalized(components.iter().map(|c| c.weight).sum(), "GLMB")?;
        Ok(Self::sorted(components))
    }

    /// The empty multi-object state with probability one.
    pub fn empty() -> Self {
        Self {
            components: vec![GlmbComponent::new(Vec::new(), 0, 1.0)],
        }
    }

    pub(crate) fn sorted(mut components: Vec<GlmbComponent>) -> Self {
        by_weight_desc(&mut components, |c| c.weight);
        Self { components }
    }

    /// Skips validation; for exercising error paths of downstream consumers.
    #[doc(hidden)]
    pub fn from_components_unchecked(components: Vec<GlmbComponent>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[GlmbComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn cardinality(&self) -> CardinalityDistribution {
        CardinalityDistribution::from_counts(
            self.components.iter().map(|c| (c.cardinality(), c.weight)),
        )
    }

    /// All labels appearing in any component, sorted.
    pub fn labels(&self) -> Vec<Label> {
        let set: BTreeSet<Label> = self.components.iter().flat_map(|c| c.labels()).collect();
        set.into_iter().collect()
    }

    /// Probability that each label exists.
    pub fn existence(&self, label: Label) -> f64 {
        self.components
            .iter()
            .filter(|c| c.density(label).is_some())
            .map(|c| c.weight)
            .sum()
    }
}

// ---------------------------------------------------------------------------
// GMB
// ---------------------------------------------------------------------------

/// One GMB hypothesis `(𝓘, φ)` with weight `w^(𝓘,φ)` and densities
/// `p^(φ),ı` for `ı ∈ 𝓘`, aligned with `indices`.
#[derive(Debug, Clone)]
pub struct GmbHypothesis {
    /// Sorted, distinct.
    pub indices: Vec<usize>,
    pub history: u64,
    pub weight: f64,
    pub densities: Vec<Arc<GaussianMixture>>,
}

impl GmbHypothesis {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn density(&self, index: usize) -> Option<&GaussianMixture> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|i| self.densities[i].as_ref())
    }
}

/// Unlabeled generalized multi-Bernoulli density.
#[derive(Debug, Clone)]
pub struct GmbDensity {
    index_set: Vec<usize>,
    hypotheses: Vec<GmbHypothesis>,
}

fn check_hypothesis_shape(
    index_set: &BTreeSet<usize>,
    indices: &[usize],
    densities: &[Arc<GaussianMixture>],
) -> Result<()> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDensity(format!(
            "hypothesis index set {indices:?} is not sorted and distinct"
        )));
    }
    if let Some(i) = indices.iter().find(|i| !index_set.contains(i)) {
        return Err(Error::InvalidDensity(format!(
            "index {i} is not in the index set"
        )));
    }
    if indices.len() != densities.len() {
        return Err(Error::InvalidDensity(format!(
            "{} indices but {} densities",
            indices.len(),
            densities.len()
        )));
    }
    for p in densities {
        check_density(p)?;
    }
    Ok(())
}

impl GmbDensity {
    pub fn new(index_set: Vec<usize>, hypotheses: Vec<GmbHypothesis>) -> Result<Self> {
        let set: BTreeSet<usize> = index_set.iter().copied().collect();
        if hypotheses.is_empty() {
            return Err(Error::InvalidDensity("GMB density has no hypotheses".into()));
        }
        for h in &hypotheses {
            check_weight(h.weight)?;
            check_hypothesis_shape(&set, &h.indices, &h.densities)?;
        }
        check_normalized(hypotheses.iter().map(|h| h.weight).sum(), "GMB")?;
        Ok(Self::sorted(set.into_iter().collect(), hypotheses))
    }

    pub(crate) fn sorted(index_set: Vec<usize>, mut hypotheses: Vec<GmbHypothesis>) -> Self {
        by_weight_desc(&mut hypotheses, |h| h.weight);
        Self {
            index_set,
            hypotheses,
        }
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn hypotheses(&self) -> &[GmbHypothesis] {
        &self.hypotheses
    }

    /// `ρ(n) = Σ_{|𝓘| = n} w^(𝓘,φ)`.
    pub fn cardinality(&self) -> CardinalityDistribution {
        CardinalityDistribution::from_counts(
            self.hypotheses.iter().map(|h| (h.cardinality(), h.weight)),
        )
    }

    /// `v(x) = Σ_(𝓘,φ) w^(𝓘,φ) Σ_{ı∈𝓘} p^(φ),ı(x)`.
    pub fn phd(&self, x: &DVector<f64>) -> Result<f64> {
        let mut v = 0.0;
        for h in &self.hypotheses {
            for p in &h.densities {
                v += h.weight * p.evaluate(x)?;
            }
        }
        Ok(v)
    }

    /// MAP estimate: most probable cardinality, then the best hypothesis of
    /// that cardinality; one mean per index.
    pub fn map_estimate(&self) -> Vec<DVector<f64>> {
        let n = self.cardinality().map();
        self.hypotheses
            .iter()
            .find(|h| h.cardinality() == n)
            .map(|h| h.densities.iter().map(|p| p.mean()).collect())
            .unwrap_or_default()
    }
}

/// Cardinality distribution of a GMB density.
pub fn gmb_cardinality(d: &GmbDensity) -> CardinalityDistribution {
    d.cardinality()
}

/// PHD of a GMB density evaluated at `x`.
pub fn gmb_phd(d: &GmbDensity, x: &DVector<f64>) -> Result<f64> {
    d.phd(x)
}

// ---------------------------------------------------------------------------
// SO-GMB
// ---------------------------------------------------------------------------

/// One SO-GMB hypothesis `𝓘` with weight `ŵ^(𝓘)` and hypothesis-conditional
/// densities `p̂^ı`, aligned with `indices`.
#[derive(Debug, Clone)]
pub struct SoGmbHypothesis {
    pub indices: Vec<usize>,
    pub weight: f64,
    pub densities: Vec<Arc<GaussianMixture>>,
}

impl SoGmbHypothesis {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn density(&self, index: usize) -> Option<&GaussianMixture> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|i| self.densities[i].as_ref())
    }
}

/// History-marginalized GMB density.
#[derive(Debug, Clone)]
pub struct SoGmbDensity {
    index_set: Vec<usize>,
    hypotheses: Vec<SoGmbHypothesis>,
}

impl SoGmbDensity {
    pub fn new(index_set: Vec<usize>, hypotheses: Vec<SoGmbHypothesis>) -> Result<Self> {
        let set: BTreeSet<usize> = index_set.iter().copied().collect();
        if hypotheses.is_empty() {
            return Err(Error::InvalidDensity("SO-GMB density has no hypotheses".into()));
        }
        let mut seen = BTreeSet::new();
        for h in &hypotheses {
            check_weight(h.weight)?;
            check_hypothesis_shape(&set, &h.indices, &h.densities)?;
            if !seen.insert(h.indices.clone()) {
                return Err(Error::InvalidDensity(format!(
                    "index set {:?} appears twice",
                    h.indices
                )));
            }
        }
        check_normalized(hypotheses.iter().map(|h| h.weight).sum(), "SO-GMB")?;
        Ok(Self::sorted(set.into_iter().collect(), hypotheses))
    }

    pub(crate) fn sorted(index_set: Vec<usize>, mut hypotheses: Vec<SoGmbHypothesis>) -> Self {
        by_weight_desc(&mut hypotheses, |h| h.weight);
        Self {
            index_set,
            hypotheses,
        }
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn hypotheses(&self) -> &[SoGmbHypothesis] {
        &self.hypotheses
    }

    pub fn cardinality(&self) -> CardinalityDistribution {
        CardinalityDistribution::from_counts(
            self.hypotheses.iter().map(|h| (h.cardinality(), h.weight)),
        )
    }

    /// `v̂(x) = Σ_𝓘 ŵ^(𝓘) Σ_{ı∈𝓘} p̂^ı(x)`.
    pub fn phd(&self, x: &DVector<f64>) -> Result<f64> {
        let mut v = 0.0;
        for h in &self.hypotheses {
            for p in &h.densities {
                v += h.weight * p.evaluate(x)?;
            }
        }
        Ok(v)
    }

    /// Number of stored `(weight, density)` records.
    pub fn record_count(&self) -> usize {
        self.hypotheses.iter().map(|h| 1 + h.densities.len()).sum()
    }

    pub fn map_estimate(&self) -> Vec<DVector<f64>> {
        let n = self.cardinality().map();
        self.hypotheses
            .iter()
            .find(|h| h.cardinality() == n)
            .map(|h| h.densities.iter().map(|p| p.mean()).collect())
            .unwrap_or_default()
    }
}

pub fn sogmb_cardinality(d: &SoGmbDensity) -> CardinalityDistribution {
    d.cardinality()
}

pub fn sogmb_phd(d: &SoGmbDensity, x: &DVector<f64>) -> Result<f64> {
    d.phd(x)
}

// ---------------------------------------------------------------------------
// Multi-Bernoulli
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Bernoulli {
    pub index: usize,
    pub existence: f64,
    pub density: Arc<GaussianMixture>,
}

/// Independent Bernoulli components, sorted by index.
#[derive(Debug, Clone)]
pub struct MultiBernoulli {
    components: Vec<Bernoulli>,
}

impl MultiBernoulli {
    pub fn new(mut components: Vec<Bernoulli>) -> Result<Self> {
        components.sort_by_key(|b| b.index);
        if components.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::InvalidDensity("duplicate Bernoulli index".into()));
        }
        for b in &components {
            if !(0.0..=1.0).contains(&b.existence) {
                return Err(Error::InvalidDensity(format!(
                    "existence {} outside [0, 1]",
                    b.existence
                )));
            }
            check_density(&b.density)?;
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Bernoulli] {
        &self.components
    }

    /// Poisson-binomial convolution of the existence probabilities.
    pub fn cardinality(&self) -> CardinalityDistribution {
        let mut rho = vec![1.0];
        for b in &self.components {
            let mut next = vec![0.0; rho.len() + 1];
            for (n, p) in rho.iter().enumerate() {
                next[n] += p * (1.0 - b.existence);
                next[n + 1] += p * b.existence;
            }
            rho = next;
        }
        CardinalityDistribution::from_counts(rho.into_iter().enumerate())
    }

    pub fn phd(&self, x: &DVector<f64>) -> Result<f64> {
        self.components
            .iter()
            .map(|b| Ok(b.existence * b.density.evaluate(x)?))
            .sum()
    }

    /// Expands into SO-GMB hypothesis form keeping the `max_hypotheses` most
    /// probable index sets, renormalized. Exact when `2^n ≤ max_hypotheses`.
    pub fn expand(&self, max_hypotheses: usize) -> Result<SoGmbDensity> {
        let probs: Vec<f64> = self.components.iter().map(|b| b.existence).collect();
        let subsets = crate::assignment::k_best_subsets(&probs, max_hypotheses.max(1));
        let total = crate::gaussian::log_sum_exp(
            &subsets.iter().map(|(_, l)| *l).collect::<Vec<_>>(),
        );
        if total == f64::NEG_INFINITY {
            return Err(Error::InvalidDensity("multi-Bernoulli has no mass".into()));
        }
        let hypotheses = subsets
            .into_iter()
            .map(|(chosen, log_w)| {
                let members: Vec<&Bernoulli> = chosen.iter().map(|&i| &self.components[i]).collect();
                SoGmbHypothesis {
                    indices: members.iter().map(|b| b.index).collect(),
                    weight: (log_w - total).exp(),
                    densities: members.iter().map(|b| b.density.clone()).collect(),
                }
            })
            .collect();
        Ok(SoGmbDensity::sorted(
            self.components.iter().map(|b| b.index).collect(),
            hypotheses,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Gaussian;

    fn n(m: f64) -> Arc<GaussianMixture> {
        Arc::new(GaussianMixture::single(Gaussian::scalar(m, 1.0).unwrap()))
    }

    fn gmb(hyps: &[(&[usize], u64, f64)]) -> GmbDensity {
        let hypotheses = hyps
            .iter()
            .map(|&(idx, phi, w)| GmbHypothesis {
                indices: idx.to_vec(),
                history: phi,
                weight: w,
                densities: idx.iter().map(|_| n(0.0)).collect(),
            })
            .collect();
        GmbDensity::new(vec![1, 2], hypotheses).unwrap()
    }

    fn x(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    const PEAK: f64 = 0.398_942_280_401_432_7;

    #[test]
    fn delta_and_inclusion() {
        assert_eq!(kronecker(&[1, 2][..], &[1, 2][..]), 1.0);
        assert_eq!(kronecker(&3, &4), 0.0);
        assert_eq!(inclusion(&[1, 2, 3], &[1, 3]), 1.0);
        assert_eq!(inclusion(&[1, 2, 3], &[4]), 0.0);
        assert_eq!(inclusion::<u8>(&[], &[]), 1.0);
    }

    #[test]
    fn gmb_cardinality_examples() {
        assert_eq!(gmb(&[(&[1, 2], 0, 1.0)]).cardinality().probabilities(), &[0.0, 0.0, 1.0]);
        let rho = gmb(&[(&[], 0, 0.4), (&[1], 0, 0.35), (&[1], 1, 0.25)]).cardinality();
        assert!((rho.get(0) - 0.4).abs() < 1e-15 && (rho.get(1) - 0.6).abs() < 1e-15);
        assert_eq!(rho.probabilities().len(), 2);
        assert_eq!(gmb(&[(&[], 0, 1.0)]).cardinality().probabilities(), &[1.0]);
    }

    #[test]
    fn gmb_phd_examples() {
        assert!((gmb(&[(&[1], 0, 1.0)]).phd(&x(0.0)).unwrap() - PEAK).abs() < 1e-15);
        let d = gmb(&[(&[1], 0, 0.5), (&[2], 0, 0.5)]);
        for v in [-1.0, 0.0, 2.5] {
            let p = n(0.0).evaluate(&x(v)).unwrap();
            assert!((d.phd(&x(v)).unwrap() - p).abs() < 1e-15);
        }
        assert!((gmb(&[(&[1, 2], 0, 1.0)]).phd(&x(0.0)).unwrap() - 2.0 * PEAK).abs() < 1e-15);
    }

    #[test]
    fn sogmb_examples() {
        let so = |hyps: &[(&[usize], f64)]| {
            SoGmbDensity::new(
                vec![1, 2],
                hyps.iter()
                    .map(|&(idx, w)| SoGmbHypothesis {
                        indices: idx.to_vec(),
                        weight: w,
                        densities: idx.iter().map(|_| n(0.0)).collect(),
                    })
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(so(&[(&[1], 1.0)]).cardinality().probabilities(), &[0.0, 1.0]);
        assert_eq!(
            so(&[(&[], 0.25), (&[1], 0.25), (&[1, 2], 0.5)]).cardinality().probabilities(),
            &[0.25, 0.25, 0.5]
        );
        assert!((so(&[(&[1], 1.0)]).phd(&x(0.0)).unwrap() - PEAK).abs() < 1e-15);
        assert!((so(&[(&[1], 0.5), (&[2], 0.5)]).phd(&x(0.0)).unwrap() - PEAK).abs() < 1e-15);
        assert!((so(&[(&[1, 2], 1.0)]).phd(&x(0.0)).unwrap() - 2.0 * PEAK).abs() < 1e-15);
        assert!(SoGmbDensity::new(
            vec![1],
            vec![
                SoGmbHypothesis { indices: vec![1], weight: 0.5, densities: vec![n(0.0)] },
                SoGmbHypothesis { indices: vec![1], weight: 0.5, densities: vec![n(0.0)] },
            ]
        )
        .is_err());
    }

    #[test]
    fn normalization_enforced() {
        let bad = GmbDensity::new(
            vec![1],
            vec![GmbHypothesis { indices: vec![1], history: 0, weight: 0.9, densities: vec![n(0.0)] }],
        );
        assert!(bad.is_err());
        let unsorted = GmbDensity::new(
            vec![1, 2],
            vec![GmbHypothesis { indices: vec![2, 1], history: 0, weight: 1.0, densities: vec![n(0.0), n(0.0)] }],
        );
        assert!(unsorted.is_err());
        let outside = GmbDensity::new(
            vec![1],
            vec![GmbHypothesis { indices: vec![3], history: 0, weight: 1.0, densities: vec![n(0.0)] }],
        );
        assert!(outside.is_err());
    }

    #[test]
    fn glmb_rejects_duplicate_labels_and_sorts() {
        let l = Label::new(1, 0);
        let dup = GlmbComponent {
            tracks: vec![(l, n(0.0)), (l, n(1.0))],
            history: 0,
            weight: 1.0,
        };
        assert!(matches!(GlmbDensity::new(vec![dup]), Err(Error::InvalidGlmb(_))));

        let d = GlmbDensity::new(vec![
            GlmbComponent::new(vec![], 0, 0.3),
            GlmbComponent::new(vec![(l, n(0.0))], 1, 0.7),
        ])
        .unwrap();
        assert_eq!(d.components()[0].history, 1);
        assert!((d.existence(l) - 0.7).abs() < 1e-15);
        assert_eq!(d.cardinality().map(), 1);
    }

    #[test]
    fn cardinality_stats() {
        let c = CardinalityDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!((c.mean() - 1.3).abs() < 1e-15);
        assert!((c.variance() - (0.2 * 1.69 + 0.3 * 0.09 + 0.5 * 0.49)).abs() < 1e-15);
        assert_eq!(c.map(), 2);
        assert!(CardinalityDistribution::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn multi_bernoulli_cardinality_and_expansion() {
        let mb = MultiBernoulli::new(vec![
            Bernoulli { index: 1, existence: 0.5, density: n(0.0) },
            Bernoulli { index: 2, existence: 0.5, density: n(3.0) },
        ])
        .unwrap();
        assert_eq!(mb.cardinality().probabilities(), &[0.25, 0.5, 0.25]);
        let so = mb.expand(100).unwrap();
        assert_eq!(so.hypotheses().len(), 4);
        assert_eq!(so.cardinality().probabilities(), &[0.25, 0.5, 0.25]);
        for v in [-1.0, 0.0, 1.5, 3.0] {
            assert!((so.phd(&x(v)).unwrap() - mb.phd(&x(v)).unwrap()).abs() < 1e-15);
        }
    }
}
