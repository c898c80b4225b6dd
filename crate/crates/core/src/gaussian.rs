//! Gaussian and Gaussian-mixture algebra.
//!
//! Everything the filter and the GCI fusion rule need from single-target
//! densities: evaluation, exponentiation, products and the closed-form
//! cross integral `∫ p1(x)^ω1 p2(x)^ω2 dx` between two mixtures.
//!
//! Mixture powers are taken component-wise, `(Σ a_i N_i)^ω ≈ Σ a_i^ω N_i^ω`.
//! For single-Gaussian densities this is exact.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Largest accepted covariance condition number.
pub const MAX_CONDITION: f64 = 1e12;

const SYMMETRY_TOL: f64 = 1e-9;

/// A normalized Gaussian density `N(x; m, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    /// Validates symmetry, positive definiteness and conditioning.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidDensity("zero-dimensional Gaussian".into()));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite Gaussian parameter".into()));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidDensity(format!(
                "covariance not symmetric (max asymmetry {asym:e})"
            )));
        }
        let cov = symmetrize(cov);
        let eig = cov.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if min <= 0.0 {
            return Err(Error::DegenerateCovariance(format!(
                "smallest eigenvalue {min:e} is not positive"
            )));
        }
        if max / min > MAX_CONDITION {
            return Err(Error::DegenerateCovariance(format!(
                "condition number {:e} exceeds {MAX_CONDITION:e}",
                max / min
            )));
        }
        Ok(Self { mean, cov })
    }

    /// Builds from moments produced internally; only symmetrizes.
    pub(crate) fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self {
            mean,
            cov: symmetrize(cov),
        }
    }

    /// Convenience constructor for a 1-D Gaussian.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        log_normal(x, &self.mean, &self.cov)
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        self.log_evaluate(x).map(f64::exp)
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis2(&self, x: &DVector<f64>) -> Result<f64> {
        let chol = checked_cholesky(&self.cov)?;
        let diff = x - &self.mean;
        let sol = chol.solve(&diff);
        Ok(diff.dot(&sol))
    }

    /// `N(x; m, P)^ω = scale · N(x; m, P/ω)`, returned as `(scale, N(m, P/ω))`.
    pub fn power(&self, omega: f64) -> Result<(f64, Gaussian)> {
        let (log_scale, g) = self.log_power(omega)?;
        Ok((log_scale.exp(), g))
    }

    /// Log-domain variant of [`Gaussian::power`].
    pub fn log_power(&self, omega: f64) -> Result<(f64, Gaussian)> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidExponent(omega));
        }
        let d = self.dim() as f64;
        let chol = checked_cholesky(&self.cov)?;
        let log_det = log_det_from_cholesky(&chol);
        let log_scale = 0.5 * (1.0 - omega) * (d * (2.0 * PI).ln() + log_det) - 0.5 * d * omega.ln();
        Ok((
            log_scale,
            Gaussian {
                mean: self.mean.clone(),
                cov: &self.cov / omega,
            },
        ))
    }

    /// Product identity `N(x;a,A) N(x;b,B) = N(a; b, A+B) · N(x; c, C)`.
    ///
    /// Returns `(ln N(a; b, A+B), N(c, C))`.
    pub fn product(&self, other: &Gaussian) -> Result<(f64, Gaussian)> {
        product_moments(&self.mean, &self.cov, &other.mean, &other.cov)
    }
}

/// A mixture component with a nonnegative weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGaussian {
    pub weight: f64,
    pub gaussian: Gaussian,
}

impl WeightedGaussian {
    pub fn new(weight: f64, gaussian: Gaussian) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidDensity(format!("invalid component weight {weight}")));
        }
        Ok(Self { weight, gaussian })
    }

    /// `weight · N(x; m, P)`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.weight * self.gaussian.evaluate(x)?)
    }

    pub fn mean(&self) -> &DVector<f64> {
        self.gaussian.mean()
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        self.gaussian.cov()
    }
}

/// An ordered list of weighted Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<WeightedGaussian>,
}

impl GaussianMixture {
    /// A mixture whose weights must already sum to one.
    pub fn new(components: Vec<WeightedGaussian>) -> Result<Self> {
        let m = Self::unnormalized(components)?;
        let total = m.total_weight();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(m)
    }

    /// A mixture with arbitrary nonnegative weights (used for intensities).
    pub fn unnormalized(components: Vec<WeightedGaussian>) -> Result<Self> {
        let first = components
            .first()
            .ok_or(Error::EmptyDensity("mixture has no components"))?;
        let d = first.gaussian.dim();
        if let Some(bad) = components.iter().find(|c| c.gaussian.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.gaussian.dim(),
            });
        }
        Ok(Self { components })
    }

    /// Rescales the weights to sum to one.
    pub fn normalized(components: Vec<WeightedGaussian>) -> Result<Self> {
        let mut m = Self::unnormalized(components)?;
        let total = m.total_weight();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDensity(format!("cannot normalize total weight {total}")));
        }
        for c in &mut m.components {
            c.weight /= total;
        }
        Ok(m)
    }

    pub fn single(g: Gaussian) -> Self {
        Self {
            components: vec![WeightedGaussian {
                weight: 1.0,
                gaussian: g,
            }],
        }
    }

    pub(crate) fn from_components_unchecked(components: Vec<WeightedGaussian>) -> Self {
        debug_assert!(!components.is_empty());
        Self { components }
    }

    pub fn components(&self) -> &[WeightedGaussian] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].gaussian.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total_weight() - 1.0).abs() <= tol
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        self.components
            .iter()
            .map(|c| c.evaluate(x))
            .sum::<Result<f64>>()
    }

    /// Weighted mean of the component means.
    pub fn mean(&self) -> DVector<f64> {
        let total = self.total_weight();
        let mut m = DVector::zeros(self.dim());
        for c in &self.components {
            m.axpy(c.weight / total, c.mean(), 1.0);
        }
        m
    }

    /// Moment-matched single Gaussian.
    pub fn collapse(&self) -> Gaussian {
        if self.components.len() == 1 {
            return self.components[0].gaussian.clone();
        }
        let refs: Vec<&WeightedGaussian> = self.components.iter().collect();
        moment_match(&refs).gaussian
    }

    /// Merges nearest pairs until at most `cap` components remain.
    ///
    /// Pair distance is `(m_i - m_j)ᵀ (P_i + P_j)⁻¹ (m_i - m_j)`; merges
    /// preserve the first two moments of the merged pair.
    pub fn reduce(&self, cap: usize) -> Result<GaussianMixture> {
        let cap = cap.max(1);
        if self.components.len() <= cap {
            return Ok(self.clone());
        }
        if self.components.iter().any(|c| c.weight <= 0.0) {
            let kept: Vec<WeightedGaussian> =
                self.components.iter().filter(|c| c.weight > 0.0).cloned().collect();
            if !kept.is_empty() {
                return Self::from_components_unchecked(kept).reduce(cap);
            }
        }
        if cap == 1 {
            let total = self.total_weight();
            return Ok(Self::from_components_unchecked(vec![WeightedGaussian {
                weight: total,
                gaussian: self.collapse(),
            }]));
        }
        let mut live: Vec<Option<WeightedGaussian>> =
            self.components.iter().cloned().map(Some).collect();
        let n = live.len();
        let mut dist = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pair_distance(live[i].as_ref().unwrap(), live[j].as_ref().unwrap())?;
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut remaining = n;
        while remaining > cap {
            let mut best = (f64::INFINITY, 0, 0);
            for i in 0..n {
                if live[i].is_none() {
                    continue;
                }
                for j in (i + 1)..n {
                    if live[j].is_some() && dist[i * n + j] < best.0 {
                        best = (dist[i * n + j], i, j);
                    }
                }
            }
            let (_, i, j) = best;
            if i == j {
                break;
            }
            let a = live[i].take().unwrap();
            let b = live[j].take().unwrap();
            live[i] = Some(moment_match(&[&a, &b]));
            remaining -= 1;
            for k in 0..n {
                dist[j * n + k] = f64::INFINITY;
                dist[k * n + j] = f64::INFINITY;
                if k != i {
                    if let Some(other) = live[k].as_ref() {
                        let d = pair_distance(live[i].as_ref().unwrap(), other)?;
                        dist[i * n + k] = d;
                        dist[k * n + i] = d;
                    }
                }
            }
        }
        Ok(Self::from_components_unchecked(
            live.into_iter().flatten().collect(),
        ))
    }
}

/// `weight · N(x; m, P)` evaluated at `x`.
pub fn evaluate(g: &WeightedGaussian, x: &DVector<f64>) -> Result<f64> {
    g.evaluate(x)
}

/// Exponentiation of a normalized Gaussian; see [`Gaussian::power`].
pub fn power(g: &Gaussian, omega: f64) -> Result<(f64, Gaussian)> {
    g.power(omega)
}

/// A mixture raised component-wise to a power, kept in log-coefficient form.
///
/// Component `i` represents `exp(log_coeff_i) · N(x; m_i, P_i/ω)`.
#[derive(Debug, Clone)]
pub struct PoweredMixture {
    components: Vec<(f64, Gaussian)>,
}

impl PoweredMixture {
    pub fn new(p: &GaussianMixture, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidExponent(omega));
        }
        if p.is_empty() {
            return Err(Error::EmptyDensity("mixture has no components"));
        }
        let components = p
            .components()
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| {
                let (log_scale, g) = c.gaussian.log_power(omega)?;
                Ok((omega * c.weight.ln() + log_scale, g))
            })
            .collect::<Result<Vec<_>>>()?;
        if components.is_empty() {
            return Err(Error::EmptyDensity("mixture has zero total weight"));
        }
        Ok(Self { components })
    }
}

/// `ln ∫ p1^ω1 p2^ω2 dx` for two powered mixtures.
pub fn log_cross_integral(p1: &PoweredMixture, p2: &PoweredMixture) -> Result<f64> {
    let mut terms = Vec::with_capacity(p1.components.len() * p2.components.len());
    for (c1, g1) in &p1.components {
        for (c2, g2) in &p2.components {
            let s = g1.cov() + g2.cov();
            terms.push(c1 + c2 + log_normal(g1.mean(), g2.mean(), &s)?);
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Closed-form `ln η` and the normalized fused mixture `p1^ω1 p2^ω2 / η`.
pub fn log_fused_density(
    p1: &PoweredMixture,
    p2: &PoweredMixture,
) -> Result<(f64, GaussianMixture)> {
    let mut logs = Vec::with_capacity(p1.components.len() * p2.components.len());
    let mut gaussians = Vec::with_capacity(logs.capacity());
    for (c1, g1) in &p1.components {
        for (c2, g2) in &p2.components {
            let (log_norm, g) = g1.product(g2)?;
            logs.push(c1 + c2 + log_norm);
            gaussians.push(g);
        }
    }
    let log_eta = log_sum_exp(&logs);
    if log_eta == f64::NEG_INFINITY {
        return Err(Error::InvalidDensity("fused density has zero mass".into()));
    }
    let components = logs
        .iter()
        .zip(gaussians)
        .map(|(l, g)| WeightedGaussian {
            weight: (l - log_eta).exp(),
            gaussian: g,
        })
        .collect();
    Ok((log_eta, GaussianMixture::from_components_unchecked(components)))
}

/// `η = ∫ p1^ω1 p2^ω2 dx` and the normalized fused density `p1^ω1 p2^ω2 / η`.
pub fn fusion_cross_term(
    p1: &GaussianMixture,
    p2: &GaussianMixture,
    omega1: f64,
    omega2: f64,
) -> Result<(f64, GaussianMixture)> {
    if p1.is_empty() || p2.is_empty() {
        return Err(Error::EmptyDensity("fusion of an empty mixture"));
    }
    if ((omega1 + omega2) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "fusion weights {omega1} + {omega2} do not sum to 1"
        )));
    }
    let a = PoweredMixture::new(p1, omega1)?;
    let b = PoweredMixture::new(p2, omega2)?;
    let (log_eta, fused) = log_fused_density(&a, &b)?;
    Ok((log_eta.exp(), fused))
}

/// `ln N(x; m, S)`.
pub fn log_normal(x: &DVector<f64>, m: &DVector<f64>, s: &DMatrix<f64>) -> Result<f64> {
    if x.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            got: x.len(),
        });
    }
    let chol = checked_cholesky(s)?;
    let diff = x - m;
    let maha = diff.dot(&chol.solve(&diff));
    let d = m.len() as f64;
    Ok(-0.5 * (d * (2.0 * PI).ln() + log_det_from_cholesky(&chol) + maha))
}

/// Numerically stable `ln Σ exp(v_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Cholesky factorization that rejects ill-conditioned matrices.
///
/// The squared ratio of the extreme diagonal entries of the factor bounds
/// the condition number from below.
pub(crate) fn checked_cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| Error::DegenerateCovariance("matrix is not positive definite".into()))?;
    let diag = chol.l_dirty().diagonal();
    let (min, max) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let ratio = (max / min).powi(2);
    if !ratio.is_finite() || ratio > MAX_CONDITION {
        return Err(Error::DegenerateCovariance(format!(
            "condition number at least {ratio:e}"
        )));
    }
    Ok(chol)
}

fn log_det_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

pub(crate) fn product_moments(
    a: &DVector<f64>,
    a_cov: &DMatrix<f64>,
    b: &DVector<f64>,
    b_cov: &DMatrix<f64>,
) -> Result<(f64, Gaussian)> {
    let s = a_cov + b_cov;
    let chol = checked_cholesky(&s)?;
    let diff = b - a;
    let sol = chol.solve(&diff);
    let d = a.len() as f64;
    let log_norm = -0.5 * (d * (2.0 * PI).ln() + log_det_from_cholesky(&chol) + diff.dot(&sol));
    // C = A - A S⁻¹ A,  c = a + A S⁻¹ (b - a)
    let gain = chol.solve(a_cov);
    let mean = a + a_cov * &sol;
    let cov = a_cov - a_cov * gain;
    Ok((log_norm, Gaussian::from_moments(mean, cov)))
}

fn moment_match(parts: &[&WeightedGaussian]) -> WeightedGaussian {
    let total: f64 = parts.iter().map(|c| c.weight).sum();
    if !(total > 0.0) {
        let equal: Vec<WeightedGaussian> = parts
            .iter()
            .map(|c| WeightedGaussian { weight: 1.0, gaussian: c.gaussian.clone() })
            .collect();
        let mut merged = moment_match(&equal.iter().collect::<Vec<_>>());
        merged.weight = 0.0;
        return merged;
    }
    let d = parts[0].gaussian.dim();
    let mut mean = DVector::zeros(d);
    for c in parts {
        mean.axpy(c.weight / total, c.mean(), 1.0);
    }
    let mut cov = DMatrix::zeros(d, d);
    for c in parts {
        let diff = c.mean() - &mean;
        cov += (c.cov() + &diff * diff.transpose()) * (c.weight / total);
    }
    WeightedGaussian {
        weight: total,
        gaussian: Gaussian::from_moments(mean, cov),
    }
}

fn pair_distance(a: &WeightedGaussian, b: &WeightedGaussian) -> Result<f64> {
    let s = a.cov() + b.cov();
    let chol = checked_cholesky(&s)?;
    let diff = a.mean() - b.mean();
    Ok(diff.dot(&chol.solve(&diff)))
}
