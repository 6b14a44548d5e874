//! Proportional-hazards diagnostics: empirical-CDF dominance/crossing checks,
//! a Schoenfeld-residual trend test, and a probe of how often a pairwise
//! Plackett-Luce fit ranks two covariate groups against their median utilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cox::build_risk_sets;
use crate::data::{FitResult, SurvivalDataset};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::optimizer::FitConfig;
use crate::plackett_luce::pl_fit;
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::simulate::{simulate, utilities_to_rankings, SimSpec};
use crate::step::StepFunction;
use crate::suffix::{mean_and_cov, SuffixMoments};

/// Empirical CDF together with the number of samples behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf<T> {
    pub curve: StepFunction<T>,
    pub n: usize,
}

impl<T: Scalar> Ecdf<T> {
    pub fn eval(&self, u: T) -> T {
        self.curve.eval(u)
    }
}

pub fn empirical_cdf<T: Scalar>(samples: &[T]) -> Result<Ecdf<T>> {
    if samples.is_empty() {
        return Err(Error::Empty("empirical CDF of no samples".into()));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = T::from_count(sorted.len());
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (i, &s) in sorted.iter().enumerate() {
        if i + 1 == sorted.len() || sorted[i + 1] != s {
            knots.push(s);
            values.push(T::from_count(i + 1) / n);
        }
    }
    Ok(Ecdf { curve: StepFunction::new(knots, values, T::zero())?, n: sorted.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceVerdict {
    /// `F1 >= F2` everywhere (beyond epsilon somewhere): the first sample is
    /// stochastically smaller.
    FirstDominates,
    /// `F2 >= F1` everywhere (beyond epsilon somewhere).
    SecondDominates,
    Crossing,
    Indistinguishable,
}

impl DominanceVerdict {
    pub fn swapped(self) -> Self {
        match self {
            Self::FirstDominates => Self::SecondDominates,
            Self::SecondDominates => Self::FirstDominates,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingConfig {
    pub epsilon: f64,
    pub min_n: usize,
}

impl Default for CrossingConfig {
    fn default() -> Self {
        Self { epsilon: 0.01, min_n: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub crossing_count: usize,
    pub crossing_locations: Vec<f64>,
    /// `F1(u) - F2(u)` at the grid point where its magnitude is largest.
    pub max_signed_gap: f64,
    pub dominance_verdict: DominanceVerdict,
}

/// Compare two ECDFs on their merged knot grid. A crossing is a change of sign
/// of `D = F1 - F2` between grid points where `|D| > epsilon`.
pub fn crossing_detect<T: Scalar>(
    f1: &Ecdf<T>,
    f2: &Ecdf<T>,
    config: &CrossingConfig,
) -> Result<CrossingReport> {
    if f1.n < config.min_n || f2.n < config.min_n {
        return Err(Error::InsufficientData(format!(
            "crossing detection needs {} samples per curve, got {} and {}",
            config.min_n, f1.n, f2.n
        )));
    }
    let mut grid: Vec<T> = f1.curve.knots().iter().chain(f2.curve.knots()).copied().collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    grid.dedup();

    let eps = config.epsilon;
    let mut last_sign = 0i8;
    let mut crossing_locations = Vec::new();
    let mut max_signed_gap = 0.0f64;
    for &u in &grid {
        let d = (f1.eval(u) - f2.eval(u)).as_f64();
        if d.abs() > max_signed_gap.abs() {
            max_signed_gap = d;
        }
        if d.abs() > eps {
            let sign = if d > 0.0 { 1 } else { -1 };
            if last_sign != 0 && sign != last_sign {
                crossing_locations.push(u.as_f64());
            }
            last_sign = sign;
        }
    }
    let dominance_verdict = if !crossing_locations.is_empty() {
        DominanceVerdict::Crossing
    } else if max_signed_gap.abs() <= eps {
        DominanceVerdict::Indistinguishable
    } else if max_signed_gap > 0.0 {
        DominanceVerdict::FirstDominates
    } else {
        DominanceVerdict::SecondDominates
    };
    Ok(CrossingReport {
        crossing_count: crossing_locations.len(),
        crossing_locations,
        max_signed_gap,
        dominance_verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenfeldResidual<T> {
    pub record: usize,
    pub utility: T,
    /// 1-based position in the event sequence; tied events share their average rank.
    pub event_rank: T,
    pub residual: Vec<T>,
}

/// `x_i` minus the score-weighted risk-set mean, one residual per event in
/// ascending utility order. Tied events use the shared (Breslow) risk set, so
/// the residuals sum to the Breslow score vector.
pub fn schoenfeld_residuals<T: Scalar>(
    data: &SurvivalDataset<T>,
    fit: &FitResult<T>,
) -> Result<Vec<SchoenfeldResidual<T>>> {
    let beta = fit.beta();
    let cov = data.covariates();
    if beta.len() != cov.n_features() {
        return Err(Error::Dimension(format!(
            "fit has {} coefficients, data has {} features",
            beta.len(),
            cov.n_features()
        )));
    }
    let risk = build_risk_sets(data);
    let mut acc = SuffixMoments::new(beta.len(), false);
    let mut out = Vec::with_capacity(data.len());
    for g in risk.groups.iter().rev() {
        let events = &risk.sorted[g.start..g.end];
        for &i in events {
            acc.push(dot(beta, cov.row(i)), cov.row(i));
        }
        let (mean, _) = mean_and_cov(acc.s0(), acc.s1(), None);
        let rank = T::from_count(g.start + 1 + g.end) / T::lit(2.0);
        for &i in events.iter().rev() {
            out.push(SchoenfeldResidual {
                record: i,
                utility: g.utility,
                event_rank: rank,
                residual: cov.row(i).iter().zip(&mean).map(|(&x, &m)| x - m).collect(),
            });
        }
    }
    out.reverse();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTrend {
    pub feature: String,
    /// Pearson correlation between residuals and event rank.
    pub rho: f64,
    pub z: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhTestReport {
    pub events: usize,
    pub z_crit: f64,
    pub features: Vec<FeatureTrend>,
}

impl PhTestReport {
    pub fn any_violated(&self) -> bool {
        self.features.iter().any(|f| f.violated)
    }
}

/// Minimum number of events [`ph_test`] accepts.
pub const PH_TEST_MIN_EVENTS: usize = 20;

pub const DEFAULT_Z_CRIT: f64 = 2.58;

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Correlation of each feature's Schoenfeld residuals with event rank;
/// `z = rho sqrt(m - 2) / sqrt(1 - rho^2)`, flagged when `|z| > z_crit`.
pub fn ph_test<T: Scalar>(
    data: &SurvivalDataset<T>,
    fit: &FitResult<T>,
    z_crit: f64,
) -> Result<PhTestReport> {
    let residuals = schoenfeld_residuals(data, fit)?;
    let m = residuals.len();
    if m < PH_TEST_MIN_EVENTS {
        return Err(Error::InsufficientData(format!(
            "the PH test needs at least {PH_TEST_MIN_EVENTS} events, got {m}"
        )));
    }
    let ranks: Vec<f64> = residuals.iter().map(|r| r.event_rank.as_f64()).collect();
    let features = data
        .covariates()
        .feature_names()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let res: Vec<f64> = residuals.iter().map(|r| r.residual[k].as_f64()).collect();
            let rho = pearson(&res, &ranks);
            let rho2 = (rho * rho).min(1.0 - f64::EPSILON);
            let z = rho * ((m - 2) as f64).sqrt() / (1.0 - rho2).sqrt();
            FeatureTrend { feature: name.clone(), rho, z, violated: z.abs() > z_crit }
        })
        .collect();
    Ok(PhTestReport { events: m, z_crit, features })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeOutcome {
    /// Population median utility with the group feature at 0 and at 1.
    pub median_without: f64,
    pub median_with: f64,
    /// Fitted coefficient of the group feature, per seed.
    pub fitted: Vec<f64>,
    pub agreements: usize,
    pub disagreements: usize,
    pub dropped_tied: usize,
}

impl RegimeOutcome {
    pub fn agreement_rate(&self) -> f64 {
        self.agreements as f64 / (self.agreements + self.disagreements) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub feature: usize,
    pub seeds: Vec<u64>,
    pub first: RegimeOutcome,
    pub second: RegimeOutcome,
}

/// Monte-Carlo medians of the utilities of records whose `feature` is 0 and 1.
pub fn group_medians(spec: &SimSpec, feature: usize, n: usize) -> Result<(f64, f64)> {
    let mut big = spec.clone();
    big.n = n;
    big.likert_levels = None;
    big.seed = derive_seed(spec.seed, u64::MAX);
    let data = simulate(&big)?;
    let mut without = Vec::new();
    let mut with = Vec::new();
    for (x, &u) in data.covariates().rows().zip(data.utilities()) {
        if x[feature] >= 0.5 {
            with.push(u);
        } else {
            without.push(u);
        }
    }
    if without.is_empty() || with.is_empty() {
        return Err(Error::InsufficientData(format!("feature {feature} does not split the population")));
    }
    Ok((median(&mut without), median(&mut with)))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const PROBE_MEDIAN_SAMPLES: usize = 200_000;

fn probe_regime(spec: &SimSpec, feature: usize, seeds: &[u64]) -> Result<RegimeOutcome> {
    if feature >= spec.covariates.len() {
        return Err(Error::Dimension(format!("group feature {feature} out of range")));
    }
    let (median_without, median_with) = group_medians(spec, feature, PROBE_MEDIAN_SAMPLES)?;
    let truth = (median_with - median_without).signum();
    let per_seed: Vec<Result<(f64, usize)>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut s = spec.clone();
            s.seed = seed;
            let data = simulate(&s)?;
            let pairs = utilities_to_rankings(&data, 2, derive_seed(seed, 1))?;
            let fit = pl_fit(&pairs.dataset()?, &FitConfig::default())?;
            Ok((fit.beta()[feature], pairs.dropped_tied))
        })
        .collect();
    let mut fitted = Vec::with_capacity(seeds.len());
    let mut dropped_tied = 0;
    for r in per_seed {
        let (b, dropped) = r?;
        fitted.push(b);
        dropped_tied += dropped;
    }
    let agreements = fitted.iter().filter(|&&b| b.signum() == truth && b != 0.0).count();
    Ok(RegimeOutcome {
        median_without,
        median_with,
        disagreements: fitted.len() - agreements,
        agreements,
        fitted,
        dropped_tied,
    })
}

/// For each regime and seed: simulate, split into random pairs, fit Plackett-Luce,
/// and check whether the sign of the group coefficient matches the ordering of
/// the groups' median utilities. Seeds run in parallel; results keep seed order.
pub fn misestimation_probe(
    first: &SimSpec,
    second: &SimSpec,
    feature: usize,
    seeds: &[u64],
) -> Result<ProbeReport> {
    if seeds.is_empty() {
        return Err(Error::Empty("no seeds".into()));
    }
    if first.covariates != second.covariates {
        return Err(Error::InvalidParameter("probe regimes must share covariate samplers".into()));
    }
    Ok(ProbeReport {
        feature,
        seeds: seeds.to_vec(),
        first: probe_regime(first, feature, seeds)?,
        second: probe_regime(second, feature, seeds)?,
    })
}
