//! Conversions between density families: label marginalization, the
//! second-order (history-marginalized) approximation and the
//! PHD-matching multi-Bernoulli baseline.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMixture, WeightedGaussian};
use crate::rfs::{
    Bernoulli, GlmbDensity, GmbDensity, GmbHypothesis, Label, MultiBernoulli, SoGmbDensity,
    SoGmbHypothesis,
};

/// Mixture-size and expansion limits for the approximations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ApproxConfig {
    /// Cap on Gaussians per marginalized density; `None` keeps mixtures exact.
    pub max_mixture_components: Option<usize>,
    /// Cap on hypotheses when a multi-Bernoulli is expanded.
    pub max_hypotheses: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            max_mixture_components: Some(8),
            max_hypotheses: 100,
        }
    }
}

impl ApproxConfig {
    /// No mixture reduction at all.
    pub fn exact() -> Self {
        Self {
            max_mixture_components: None,
            ..Self::default()
        }
    }
}

/// Counters describing what a conversion had to discard.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApproxDiagnostics {
    /// Hypotheses dropped because their marginal weight was zero.
    pub dropped_hypotheses: usize,
    /// Densities whose mixture was reduced to respect the cap.
    pub reduced_mixtures: usize,
}

/// Label → index bijection in sorted label order: index `i` is `labels[i]`.
pub fn label_indices(g: &GlmbDensity) -> Vec<Label> {
    g.labels()
}

/// Drops the labels of a δ-GLMB density. Each component becomes a GMB
/// hypothesis whose index set is the image of its label set under
/// [`label_indices`] and whose history is the component's history.
pub fn strip_labels(g: &GlmbDensity) -> Result<GmbDensity> {
    let labels = label_indices(g);
    let index_of: HashMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut hypotheses = Vec::with_capacity(g.len());
    for c in g.components() {
        if c.tracks.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidGlmb(format!(
                "component {} repeats a label",
                c.history
            )));
        }
        // tracks are label-sorted, so indices come out sorted too
        hypotheses.push(GmbHypothesis {
            indices: c.tracks.iter().map(|(l, _)| index_of[l]).collect(),
            history: c.history,
            weight: c.weight,
            densities: c.tracks.iter().map(|(_, p)| p.clone()).collect(),
        });
    }
    GmbDensity::new((0..labels.len()).collect(), hypotheses)
}

/// Weighted sum of mixtures, merging repeated inputs and optionally capping
/// the number of Gaussians.
fn mix(
    parts: &[(f64, &Arc<GaussianMixture>)],
    cap: Option<usize>,
    diag: &mut ApproxDiagnostics,
) -> Result<Arc<GaussianMixture>> {
    let mut by_ptr: Vec<(f64, &Arc<GaussianMixture>)> = Vec::with_capacity(parts.len());
    for (w, p) in parts {
        match by_ptr.iter_mut().find(|(_, q)| Arc::ptr_eq(p, q)) {
            Some(entry) => entry.0 += w,
            None => by_ptr.push((*w, p)),
        }
    }
    if by_ptr.len() == 1 {
        return Ok(by_ptr[0].1.clone());
    }
    let total: f64 = by_ptr.iter().map(|(w, _)| w).sum();
    let components = by_ptr
        .iter()
        .flat_map(|(w, p)| {
            p.components().iter().map(move |c| WeightedGaussian {
                weight: w / total * c.weight,
                gaussian: c.gaussian.clone(),
            })
        })
        .filter(|c| c.weight > 0.0)
        .collect();
    let mixture = GaussianMixture::from_components_unchecked(components);
    match cap {
        Some(cap) if mixture.len() > cap => {
            diag.reduced_mixtures += 1;
            Ok(Arc::new(mixture.reduce(cap)?))
        }
        _ => Ok(Arc::new(mixture)),
    }
}

/// Second-order approximation: hypothesis weights are summed over
/// association histories, and each per-index density becomes the
/// weight-averaged mixture over those histories.
pub fn to_sogmb(g: &GmbDensity, config: &ApproxConfig) -> Result<SoGmbDensity> {
    to_sogmb_with_diagnostics(g, config).map(|(d, _)| d)
}

pub fn to_sogmb_with_diagnostics(
    g: &GmbDensity,
    config: &ApproxConfig,
) -> Result<(SoGmbDensity, ApproxDiagnostics)> {
    let mut diag = ApproxDiagnostics::default();
    let mut groups: BTreeMap<&[usize], Vec<&GmbHypothesis>> = BTreeMap::new();
    for h in g.hypotheses() {
        groups.entry(h.indices.as_slice()).or_default().push(h);
    }
    let mut hypotheses = Vec::with_capacity(groups.len());
    for (indices, members) in groups {
        let weight: f64 = members.iter().map(|h| h.weight).sum();
        if !(weight > 0.0) {
            diag.dropped_hypotheses += 1;
            continue;
        }
        let densities = (0..indices.len())
            .map(|k| {
                let parts: Vec<(f64, &Arc<GaussianMixture>)> = members
                    .iter()
                    .filter(|h| h.weight > 0.0)
                    .map(|h| (h.weight, &h.densities[k]))
                    .collect();
                mix(&parts, config.max_mixture_components, &mut diag)
            })
            .collect::<Result<Vec<_>>>()?;
        hypotheses.push(SoGmbHypothesis {
            indices: indices.to_vec(),
            weight,
            densities,
        });
    }
    if hypotheses.is_empty() {
        return Err(Error::InvalidDensity("every hypothesis has zero weight".into()));
    }
    let total: f64 = hypotheses.iter().map(|h| h.weight).sum();
    for h in &mut hypotheses {
        h.weight /= total;
    }
    Ok((SoGmbDensity::sorted(g.index_set().to_vec(), hypotheses), diag))
}

/// The multi-Bernoulli whose PHD equals the PHD of `g`.
pub fn first_moment_multi_bernoulli(g: &GmbDensity, config: &ApproxConfig) -> Result<MultiBernoulli> {
    let mut diag = ApproxDiagnostics::default();
    let mut per_index: BTreeMap<usize, Vec<(f64, &Arc<GaussianMixture>)>> = BTreeMap::new();
    for h in g.hypotheses() {
        if h.weight <= 0.0 {
            continue;
        }
        for (i, p) in h.indices.iter().zip(&h.densities) {
            per_index.entry(*i).or_default().push((h.weight, p));
        }
    }
    let mut components = Vec::with_capacity(per_index.len());
    for (index, parts) in per_index {
        let r: f64 = parts.iter().map(|(w, _)| w).sum();
        if r > 1.0 + 1e-9 {
            return Err(Error::InvalidMoment {
                index,
                existence: r,
            });
        }
        components.push(Bernoulli {
            index,
            existence: r.min(1.0),
            density: mix(&parts, config.max_mixture_components, &mut diag)?,
        });
    }
    MultiBernoulli::new(components)
}

/// First-order approximation, expanded into hypothesis form so the same
/// fusion code applies. Indices with zero existence do not appear.
pub fn to_fogmb(g: &GmbDensity, config: &ApproxConfig) -> Result<SoGmbDensity> {
    let mb = first_moment_multi_bernoulli(g, config)?;
    let expanded = mb.expand(config.max_hypotheses)?;
    // keep the full index set of the input
    SoGmbDensity::new(g.index_set().to_vec(), expanded.hypotheses().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Gaussian;
    use crate::rfs::GlmbComponent;
    use nalgebra::DVector;

    fn n(m: f64) -> Arc<GaussianMixture> {
        Arc::new(GaussianMixture::single(Gaussian::scalar(m, 1.0).unwrap()))
    }

    fn gmb(hyps: Vec<(Vec<usize>, u64, f64, Vec<Arc<GaussianMixture>>)>) -> GmbDensity {
        let set: std::collections::BTreeSet<usize> = hyps.iter().flat_map(|h| h.0.clone()).collect();
        GmbDensity::new(
            set.into_iter().collect(),
            hyps.into_iter()
                .map(|(indices, history, weight, densities)| GmbHypothesis {
                    indices,
                    history,
                    weight,
                    densities,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn strip_labels_keeps_structure() {
        let l1 = Label::new(1, 0);
        let l2 = Label::new(3, 1);
        let p = n(0.0);
        let g = GlmbDensity::new(vec![GlmbComponent::new(vec![(l1, p.clone())], 7, 1.0)]).unwrap();
        let s = strip_labels(&g).unwrap();
        assert_eq!(s.hypotheses().len(), 1);
        let h = &s.hypotheses()[0];
        assert_eq!((h.indices.clone(), h.history, h.weight), (vec![0], 7, 1.0));
        assert!(Arc::ptr_eq(&h.densities[0], &p));

        let g = GlmbDensity::new(vec![
            GlmbComponent::new(vec![(l2, n(1.0)), (l1, n(0.0))], 0, 0.6),
            GlmbComponent::new(vec![(l1, n(0.5)), (l2, n(1.5))], 1, 0.4),
        ])
        .unwrap();
        let s = strip_labels(&g).unwrap();
        assert_eq!(label_indices(&g), vec![l1, l2]);
        assert!(s.hypotheses().iter().all(|h| h.indices == vec![0, 1]));
        let histories: Vec<u64> = s.hypotheses().iter().map(|h| h.history).collect();
        assert_eq!(histories, vec![0, 1]);
        assert!((s.hypotheses().iter().map(|h| h.weight).sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(s.hypotheses()[0].densities[1].mean()[0], 1.0);
    }

    #[test]
    fn strip_labels_rejects_repeated_labels() {
        let l = Label::new(1, 0);
        let bad = GlmbDensity::from_components_unchecked(vec![GlmbComponent::new(
            vec![(l, n(0.0)), (l, n(1.0))],
            0,
            1.0,
        )]);
        assert!(matches!(strip_labels(&bad), Err(Error::InvalidGlmb(_))));
    }

    #[test]
    fn sogmb_marginalizes_histories() {
        let (a, b, c) = (n(0.0), n(4.0), n(10.0));
        let g = gmb(vec![
            (vec![1], 1, 0.3, vec![a.clone()]),
            (vec![1], 2, 0.2, vec![b.clone()]),
            (vec![2], 1, 0.5, vec![c.clone()]),
        ]);
        let s = to_sogmb(&g, &ApproxConfig::exact()).unwrap();
        let h1 = s.hypotheses().iter().find(|h| h.indices == vec![1]).unwrap();
        let h2 = s.hypotheses().iter().find(|h| h.indices == vec![2]).unwrap();
        assert!((h1.weight - 0.5).abs() < 1e-15 && (h2.weight - 0.5).abs() < 1e-15);
        for x in [-1.0, 0.0, 2.0, 4.5] {
            let x = DVector::from_vec(vec![x]);
            let expect = 0.6 * a.evaluate(&x).unwrap() + 0.4 * b.evaluate(&x).unwrap();
            assert!((h1.densities[0].evaluate(&x).unwrap() - expect).abs() < 1e-15);
        }
        assert!(Arc::ptr_eq(&h2.densities[0], &c));
    }

    #[test]
    fn sogmb_of_single_history_is_identity() {
        let g = gmb(vec![
            (vec![], 0, 0.25, vec![]),
            (vec![0, 1], 0, 0.75, vec![n(1.0), n(2.0)]),
        ]);
        let s = to_sogmb(&g, &ApproxConfig::default()).unwrap();
        for (h, o) in s.hypotheses().iter().zip(g.hypotheses()) {
            assert_eq!(h.indices, o.indices);
            assert_eq!(h.weight, o.weight);
            for (p, q) in h.densities.iter().zip(&o.densities) {
                assert!(Arc::ptr_eq(p, q));
            }
        }
    }

    #[test]
    fn sogmb_drops_zero_weight_hypotheses() {
        let g = gmb(vec![
            (vec![0], 0, 1.0, vec![n(0.0)]),
            (vec![1], 0, 0.0, vec![n(1.0)]),
        ]);
        let (s, diag) = to_sogmb_with_diagnostics(&g, &ApproxConfig::exact()).unwrap();
        assert_eq!(s.hypotheses().len(), 1);
        assert_eq!(diag.dropped_hypotheses, 1);
    }

    #[test]
    fn sogmb_respects_mixture_cap() {
        let hyps = (0..6)
            .map(|k| (vec![0], k, 1.0 / 6.0, vec![n(k as f64)]))
            .collect();
        let g = gmb(hyps);
        let cfg = ApproxConfig {
            max_mixture_components: Some(2),
            ..ApproxConfig::default()
        };
        let (s, diag) = to_sogmb_with_diagnostics(&g, &cfg).unwrap();
        assert_eq!(s.hypotheses()[0].densities[0].len(), 2);
        assert_eq!(diag.reduced_mixtures, 1);
        assert!((s.hypotheses()[0].densities[0].mean()[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn fogmb_examples() {
        let p = n(3.0);
        let g = gmb(vec![(vec![], 0, 0.4, vec![]), (vec![1], 0, 0.6, vec![p.clone()])]);
        let mb = first_moment_multi_bernoulli(&g, &ApproxConfig::exact()).unwrap();
        assert_eq!(mb.components().len(), 1);
        assert!((mb.components()[0].existence - 0.6).abs() < 1e-15);
        let fo = to_fogmb(&g, &ApproxConfig::exact()).unwrap();
        let rho = fo.cardinality();
        assert!((rho.get(0) - 0.4).abs() < 1e-15 && (rho.get(1) - 0.6).abs() < 1e-15);

        let g = gmb(vec![(vec![], 0, 0.5, vec![]), (vec![1, 2], 0, 0.5, vec![n(0.0), n(5.0)])]);
        let mb = first_moment_multi_bernoulli(&g, &ApproxConfig::exact()).unwrap();
        assert!(mb.components().iter().all(|b| (b.existence - 0.5).abs() < 1e-15));
        let fo = to_fogmb(&g, &ApproxConfig::exact()).unwrap();
        let so = to_sogmb(&g, &ApproxConfig::exact()).unwrap();
        // hand computation: independent r = 1/2 gives [1/4, 1/2, 1/4]
        assert_eq!(fo.cardinality().probabilities(), &[0.25, 0.5, 0.25]);
        assert_eq!(so.cardinality().probabilities(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn fogmb_of_multi_bernoulli_is_fixed_point() {
        let (p, q) = (n(0.0), n(7.0));
        let (r1, r2) = (0.3, 0.8);
        let g = gmb(vec![
            (vec![], 0, (1.0 - r1) * (1.0 - r2), vec![]),
            (vec![0], 0, r1 * (1.0 - r2), vec![p.clone()]),
            (vec![1], 0, (1.0 - r1) * r2, vec![q.clone()]),
            (vec![0, 1], 0, r1 * r2, vec![p.clone(), q.clone()]),
        ]);
        let mb = first_moment_multi_bernoulli(&g, &ApproxConfig::exact()).unwrap();
        assert!((mb.components()[0].existence - r1).abs() < 1e-15);
        assert!((mb.components()[1].existence - r2).abs() < 1e-15);
        assert!(Arc::ptr_eq(&mb.components()[0].density, &p));
        let fo = to_fogmb(&g, &ApproxConfig::exact()).unwrap();
        for (a, b) in fo.cardinality().probabilities().iter().zip(g.cardinality().probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fogmb_rejects_excess_existence() {
        let bad = GmbDensity::sorted(
            vec![0],
            vec![
                GmbHypothesis { indices: vec![0], history: 0, weight: 0.7, densities: vec![n(0.0)] },
                GmbHypothesis { indices: vec![0], history: 1, weight: 0.7, densities: vec![n(1.0)] },
            ],
        );
        assert!(matches!(
            first_moment_multi_bernoulli(&bad, &ApproxConfig::exact()),
            Err(Error::InvalidMoment { index: 0, .. })
        ));
    }
}
