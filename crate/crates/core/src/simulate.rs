//! Synthetic utility data.
//!
//! PH families are sampled by inverse transform: with `S(u | x) = S0(u)^exp(eta)`
//! and `v ~ U(0, 1)`, `u = S0^{-1}(v^exp(-eta))`. Non-PH regimes use a
//! log-normal location-scale law or a mixture, optionally switched by a binary
//! feature so that two covariate groups follow different shapes.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::data::{Covariates, RankingInstance, SurvivalDataset};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::plackett_luce::RankingDataset;
use crate::rng::{seeded_rng, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityLaw {
    /// Baseline survival `exp(-(u / scale)^shape)`.
    WeibullPh { shape: f64, scale: f64 },
    /// Baseline survival `exp(-rate u)`.
    ExponentialPh { rate: f64 },
    /// `log u ~ Normal(mu - eta, sigma^2)`.
    LogNormal { mu: f64, sigma: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub law: UtilityLaw,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl UtilityLaw {
    pub fn is_ph(&self) -> bool {
        matches!(self, UtilityLaw::WeibullPh { .. } | UtilityLaw::ExponentialPh { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UtilityLaw::WeibullPh { shape, scale } => {
                positive("weibull shape", *shape)?;
                positive("weibull scale", *scale)
            }
            UtilityLaw::ExponentialPh { rate } => positive("exponential rate", *rate),
            UtilityLaw::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter("lognormal mu must be finite".into()));
                }
                positive("lognormal sigma", *sigma)
            }
            UtilityLaw::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("mixture needs at least one component".into()));
                }
                let mut total = 0.0;
                for (i, c) in components.iter().enumerate() {
                    if !(c.weight > 0.0 && c.weight <= 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "mixture weights must lie in (0, 1]; component {i} has {}",
                            c.weight
                        )));
                    }
                    total += c.weight;
                    c.law.validate()?;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// One draw at linear predictor `eta`.
    pub fn sample(&self, eta: f64, rng: &mut RandomStream) -> f64 {
        match self {
            UtilityLaw::WeibullPh { shape, scale } => {
                let v = rng.uniform_open();
                scale * (-v.ln() * (-eta).exp()).powf(1.0 / shape)
            }
            UtilityLaw::ExponentialPh { rate } => {
                let v = rng.uniform_open();
                -v.ln() * (-eta).exp() / rate
            }
            UtilityLaw::LogNormal { mu, sigma } => (mu - eta + sigma * rng.standard_normal()).exp(),
            UtilityLaw::Mixture { components } => {
                let v = rng.uniform();
                let mut acc = 0.0;
                let last = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if v < acc || i == last {
                        return c.law.sample(eta, rng);
                    }
                }
                unreachable!("mixture has at least one component")
            }
        }
    }

    /// `P(U <= u)` at linear predictor `eta`.
    pub fn cdf(&self, u: f64, eta: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            UtilityLaw::WeibullPh { shape, scale } => {
                -(-(u / scale).powf(*shape) * eta.exp()).exp_m1()
            }
            UtilityLaw::ExponentialPh { rate } => -(-rate * u * eta.exp()).exp_m1(),
            UtilityLaw::LogNormal { mu, sigma } => normal_cdf((u.ln() - mu + eta) / sigma),
            UtilityLaw::Mixture { components } => {
                components.iter().map(|c| c.weight * c.law.cdf(u, eta)).sum()
            }
        }
    }

    /// Median at linear predictor `eta` (closed form where available, bisection otherwise).
    pub fn median(&self, eta: f64) -> f64 {
        match self {
            UtilityLaw::WeibullPh { shape, scale } => {
                scale * (std::f64::consts::LN_2 * (-eta).exp()).powf(1.0 / shape)
            }
            UtilityLaw::ExponentialPh { rate } => std::f64::consts::LN_2 * (-eta).exp() / rate,
            UtilityLaw::LogNormal { mu, .. } => (mu - eta).exp(),
            UtilityLaw::Mixture { .. } => {
                let (mut lo, mut hi) = (-60.0f64, 60.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid.exp(), eta) < 0.5 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovariateSampler {
    Bernoulli { p: f64 },
    UniformBox { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl CovariateSampler {
    fn validate(&self) -> Result<()> {
        match *self {
            CovariateSampler::Bernoulli { p } if (0.0..=1.0).contains(&p) => Ok(()),
            CovariateSampler::UniformBox { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            CovariateSampler::Gaussian { mean, sd } if mean.is_finite() && sd > 0.0 && sd.is_finite() => Ok(()),
            ref other => Err(Error::InvalidParameter(format!("invalid covariate sampler {other:?}"))),
        }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            CovariateSampler::Bernoulli { p } => f64::from(u8::from(rng.bernoulli(p))),
            CovariateSampler::UniformBox { lo, hi } => lo + (hi - lo) * rng.uniform(),
            CovariateSampler::Gaussian { mean, sd } => mean + sd * rng.standard_normal(),
        }
    }
}

/// A second law used for records whose `feature` value is at least 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltLaw {
    pub feature: usize,
    pub law: UtilityLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub n: usize,
    pub beta_true: Vec<f64>,
    pub covariates: Vec<CovariateSampler>,
    pub law: UtilityLaw,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_law: Option<AltLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likert_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {}", self.n)));
        }
        if self.covariates.is_empty() {
            return Err(Error::Dimension("at least one covariate sampler is required".into()));
        }
        if self.beta_true.len() != self.covariates.len() {
            return Err(Error::Dimension(format!(
                "beta_true has {} entries but {} covariate samplers are given",
                self.beta_true.len(),
                self.covariates.len()
            )));
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("beta_true".into()));
        }
        for c in &self.covariates {
            c.validate()?;
        }
        self.law.validate()?;
        if let Some(alt) = &self.alt_law {
            if alt.feature >= self.covariates.len() {
                return Err(Error::Dimension(format!(
                    "alt_law feature {} out of range for {} features",
                    alt.feature,
                    self.covariates.len()
                )));
            }
            alt.law.validate()?;
        }
        if matches!(self.likert_levels, Some(l) if l < 2) {
            return Err(Error::Edge("likert_levels must be >= 2".into()));
        }
        if matches!(self.group_size, Some(g) if g < 2 || g > self.n) {
            return Err(Error::InvalidParameter("group_size must lie in 2..=n".into()));
        }
        Ok(())
    }

    /// Whether every record follows one PH family (so hazards are proportional).
    pub fn is_ph(&self) -> bool {
        self.law.is_ph() && self.alt_law.is_none()
    }

    /// The law governing a record with covariates `x`.
    pub fn law_for(&self, x: &[f64]) -> &UtilityLaw {
        match &self.alt_law {
            Some(alt) if x[alt.feature] >= 0.5 => &alt.law,
            _ => &self.law,
        }
    }

    fn draw(&self) -> Result<SurvivalDataset<f64>> {
        let mut rng = seeded_rng(self.seed);
        let mut rows = Vec::with_capacity(self.n);
        let mut utilities = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let x: Vec<f64> = self.covariates.iter().map(|c| c.sample(&mut rng)).collect();
            let eta = dot(&self.beta_true, &x);
            let u = self.law_for(&x).sample(eta, &mut rng);
            // Extreme draws can underflow; clamp to the smallest positive normal.
            utilities.push(if u > 0.0 { u } else { f64::MIN_POSITIVE });
            rows.push(x);
        }
        SurvivalDataset::new(rows, utilities)
    }
}

/// Draws from a proportional-hazards family.
pub fn sample_ph(spec: &SimSpec) -> Result<SurvivalDataset<f64>> {
    spec.validate()?;
    if !spec.is_ph() {
        return Err(Error::LawMismatch(
            "sample_ph needs a weibull_ph or exponential_ph law and no alt_law".into(),
        ));
    }
    spec.draw()
}

/// Draws from a regime that is not proportional hazards: a log-normal or
/// mixture law, or two different laws switched by a binary feature.
pub fn sample_nonph(spec: &SimSpec) -> Result<SurvivalDataset<f64>> {
    spec.validate()?;
    if spec.is_ph() {
        return Err(Error::LawMismatch(
            "sample_nonph needs a lognormal or mixture law, or an alt_law".into(),
        ));
    }
    spec.draw()
}

/// Dispatches to [`sample_ph`] or [`sample_nonph`] by law, then applies the
/// spec's Likert quantization if any.
pub fn simulate(spec: &SimSpec) -> Result<SurvivalDataset<f64>> {
    let data = if spec.is_ph() { sample_ph(spec)? } else { sample_nonph(spec)? };
    match spec.likert_levels {
        Some(levels) => quantize_likert(&data, levels, &LikertScheme::EqualQuantile),
        None => Ok(data),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikertScheme {
    /// Rank-based bins of (as nearly as ties allow) equal size.
    EqualQuantile,
    /// `levels - 1` strictly increasing interior cut points; level = 1 + #{edges <= u}.
    FixedEdges(Vec<f64>),
}

/// Replace utilities by rating levels `1..=levels`, preserving order.
pub fn quantize_likert(
    data: &SurvivalDataset<f64>,
    levels: usize,
    scheme: &LikertScheme,
) -> Result<SurvivalDataset<f64>> {
    if levels < 2 {
        return Err(Error::Edge(format!("a rating scale needs at least 2 levels, got {levels}")));
    }
    let u = data.utilities();
    let n = u.len();
    let level_of: Vec<usize> = match scheme {
        LikertScheme::EqualQuantile => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
            let mut out = vec![0; n];
            let mut first_rank = 0;
            for r in 0..n {
                if r > 0 && u[idx[r]] != u[idx[r - 1]] {
                    first_rank = r;
                }
                // tied values take the level of their first rank
                out[idx[r]] = first_rank * levels / n + 1;
            }
            out
        }
        LikertScheme::FixedEdges(edges) => {
            if edges.len() != levels - 1 {
                return Err(Error::Edge(format!(
                    "{levels} levels need {} interior edges, got {}",
                    levels - 1,
                    edges.len()
                )));
            }
            if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Edge("edges must be finite and strictly increasing".into()));
            }
            u.iter().map(|&v| 1 + edges.partition_point(|&e| e <= v)).collect()
        }
    };
    data.with_utilities(level_of.into_iter().map(|l| l as f64).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingExtraction {
    pub instances: Vec<RankingInstance<f64>>,
    /// Groups discarded because two members shared a utility.
    pub dropped_tied: usize,
    /// Records left over after forming `n / g` full groups.
    pub leftover: usize,
}

impl RankingExtraction {
    pub fn dataset(&self) -> Result<RankingDataset<f64>> {
        RankingDataset::new(self.instances.clone())
    }
}

/// Random partition into groups of `g`; each group is ordered by descending
/// utility (the highest utility is the most preferred item).
pub fn utilities_to_rankings(
    data: &SurvivalDataset<f64>,
    group_size: usize,
    seed: u64,
) -> Result<RankingExtraction> {
    if group_size < 2 {
        return Err(Error::InvalidParameter(format!("group size must be >= 2, got {group_size}")));
    }
    if data.len() < group_size {
        return Err(Error::InsufficientData(format!(
            "{} records cannot fill a group of {group_size}",
            data.len()
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    seeded_rng(seed).shuffle(&mut idx);
    let u = data.utilities();
    let mut instances = Vec::new();
    let mut dropped_tied = 0;
    for chunk in idx.chunks_exact(group_size) {
        let mut local: Vec<usize> = (0..group_size).collect();
        local.sort_by(|&a, &b| u[chunk[b]].total_cmp(&u[chunk[a]]));
        if local.windows(2).any(|w| u[chunk[w[0]]] == u[chunk[w[1]]]) {
            dropped_tied += 1;
            continue;
        }
        let cov: Covariates<f64> = data.covariates().select(chunk);
        instances.push(RankingInstance::from_covariates(cov, local)?);
    }
    Ok(RankingExtraction { instances, dropped_tied, leftover: data.len() % group_size })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(law: UtilityLaw, n: usize, beta: f64) -> SimSpec {
        SimSpec {
            n,
            beta_true: vec![beta],
            covariates: vec![CovariateSampler::Bernoulli { p: 0.5 }],
            law,
            seed: 11,
            alt_law: None,
            likert_levels: None,
            group_size: None,
        }
    }

    #[test]
    fn exponential_mean_is_one() {
        let d = sample_ph(&spec(UtilityLaw::ExponentialPh { rate: 1.0 }, 100_000, 0.0)).unwrap();
        let mean = d.utilities().iter().sum::<f64>() / d.len() as f64;
        assert!((0.99..=1.01).contains(&mean), "{mean}");
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let s = spec(UtilityLaw::WeibullPh { shape: 1.5, scale: 2.0 }, 500, 1.0);
        assert_eq!(sample_ph(&s).unwrap(), sample_ph(&s).unwrap());
        let mut other = s.clone();
        other.seed = 12;
        assert_ne!(sample_ph(&s).unwrap(), sample_ph(&other).unwrap());
    }

    #[test]
    fn law_mismatch() {
        let ln = spec(UtilityLaw::LogNormal { mu: 0.0, sigma: 1.0 }, 10, 0.0);
        assert!(matches!(sample_ph(&ln), Err(Error::LawMismatch(_))));
        let ph = spec(UtilityLaw::ExponentialPh { rate: 1.0 }, 10, 0.0);
        assert!(matches!(sample_nonph(&ph), Err(Error::LawMismatch(_))));
    }

    #[test]
    fn mixture_weights_validated() {
        let bad = UtilityLaw::Mixture {
            components: vec![
                MixtureComponent { weight: 0.5, law: UtilityLaw::ExponentialPh { rate: 1.0 } },
                MixtureComponent { weight: 0.4, law: UtilityLaw::ExponentialPh { rate: 2.0 } },
            ],
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("weights"), "{err}");
    }

    #[test]
    fn likert_equal_quantile_balanced() {
        let d = sample_ph(&spec(UtilityLaw::ExponentialPh { rate: 1.0 }, 1000, 0.5)).unwrap();
        let q = quantize_likert(&d, 5, &LikertScheme::EqualQuantile).unwrap();
        for level in 1..=5 {
            let c = q.utilities().iter().filter(|&&v| v == level as f64).count();
            assert!((199..=201).contains(&c), "level {level}: {c}");
        }
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d.utilities()[i] <= d.utilities()[j] {
                    assert!(q.utilities()[i] <= q.utilities()[j]);
                }
            }
        }
        assert!(matches!(quantize_likert(&d, 1, &LikertScheme::EqualQuantile), Err(Error::Edge(_))));
    }

    #[test]
    fn likert_fixed_edges() {
        let d = SurvivalDataset::new(vec![vec![0.0]; 4], vec![0.5, 1.0, 2.5, 9.0]).unwrap();
        let q = quantize_likert(&d, 3, &LikertScheme::FixedEdges(vec![1.0, 3.0])).unwrap();
        assert_eq!(q.utilities(), &[1.0, 2.0, 2.0, 3.0]);
        assert!(matches!(
            quantize_likert(&d, 3, &LikertScheme::FixedEdges(vec![3.0, 1.0])),
            Err(Error::Edge(_))
        ));
        assert!(matches!(
            quantize_likert(&d, 3, &LikertScheme::FixedEdges(vec![1.0])),
            Err(Error::Edge(_))
        ));
    }

    #[test]
    fn rankings_follow_descending_utility() {
        let d = SurvivalDataset::new(vec![vec![0.0], vec![1.0]], vec![3.2, 1.1]).unwrap();
        let r = utilities_to_rankings(&d, 2, 0).unwrap();
        assert_eq!(r.instances.len(), 1);
        let inst = &r.instances[0];
        let best = inst.order()[0];
        assert_eq!(inst.covariates().row(best), &[0.0]);
    }

    #[test]
    fn distinct_utilities_no_drops() {
        let d = sample_ph(&spec(UtilityLaw::ExponentialPh { rate: 1.0 }, 100, 0.0)).unwrap();
        let r = utilities_to_rankings(&d, 2, 5).unwrap();
        assert_eq!((r.instances.len(), r.dropped_tied, r.leftover), (50, 0, 0));
    }

    #[test]
    fn likert_ties_drop_groups() {
        let d = sample_ph(&spec(UtilityLaw::ExponentialPh { rate: 1.0 }, 400, 0.0)).unwrap();
        let q = quantize_likert(&d, 5, &LikertScheme::EqualQuantile).unwrap();
        let r = utilities_to_rankings(&q, 3, 5).unwrap();
        assert!(r.dropped_tied > 0);
        assert_eq!(r.leftover, 1);
    }

    #[test]
    fn medians() {
        let w = UtilityLaw::WeibullPh { shape: 2.0, scale: 1.5 };
        assert!((w.cdf(w.median(0.3), 0.3) - 0.5).abs() < 1e-14);
        let m = UtilityLaw::Mixture {
            components: vec![
                MixtureComponent { weight: 0.3, law: UtilityLaw::LogNormal { mu: 2.0, sigma: 0.25 } },
                MixtureComponent { weight: 0.7, law: UtilityLaw::LogNormal { mu: -0.1, sigma: 0.05 } },
            ],
        };
        let med = m.median(0.0);
        assert!((m.cdf(med, 0.0) - 0.5).abs() < 1e-12);
        assert!(med < 1.0);
    }
}
