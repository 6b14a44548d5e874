//! Cox partial likelihood over risk sets `{j : u_j >= u_i}`, its derivatives,
//! fitting, and the bridge that turns a ranking into pseudo-times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Covariates, FitResult, RankingInstance, SurvivalDataset};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::optimizer::{newton_maximize, Evaluation, FitConfig, Objective};
use crate::plackett_luce::RankingDataset;
use crate::scalar::Scalar;
use crate::suffix::{mean_and_cov, SuffixMoments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMethod {
    /// Every tied event shares the full risk-set denominator.
    #[default]
    Breslow,
    /// Tied events progressively remove their averaged weight from the denominator.
    Efron,
}

/// Items with exactly one utility value, and where their risk set begins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventGroup<T> {
    pub utility: T,
    /// Positions `start..end` of `RiskSetIndex::sorted` share this utility;
    /// the risk set is `sorted[start..]`.
    pub start: usize,
    pub end: usize,
}

impl<T> EventGroup<T> {
    pub fn event_count(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSetIndex<T> {
    /// Record indices sorted by ascending utility (ties keep input order).
    pub sorted: Vec<usize>,
    pub groups: Vec<EventGroup<T>>,
}

impl<T: Scalar> RiskSetIndex<T> {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn risk_set_size(&self, group: usize) -> usize {
        self.sorted.len() - self.groups[group].start
    }

    pub fn event_indices(&self, group: usize) -> &[usize] {
        let g = &self.groups[group];
        &self.sorted[g.start..g.end]
    }

    pub fn risk_set(&self, group: usize) -> &[usize] {
        &self.sorted[self.groups[group].start..]
    }
}

pub fn build_risk_sets<T: Scalar>(data: &SurvivalDataset<T>) -> RiskSetIndex<T> {
    risk_sets_from_utilities(data.utilities())
}

pub(crate) fn risk_sets_from_utilities<T: Scalar>(utilities: &[T]) -> RiskSetIndex<T> {
    let mut sorted: Vec<usize> = (0..utilities.len()).collect();
    sorted.sort_by(|&a, &b| utilities[a].partial_cmp(&utilities[b]).expect("finite utilities"));
    let mut groups = Vec::new();
    let mut start = 0;
    for pos in 1..=sorted.len() {
        if pos == sorted.len() || utilities[sorted[pos]] != utilities[sorted[start]] {
            groups.push(EventGroup { utility: utilities[sorted[start]], start, end: pos });
            start = pos;
        }
    }
    RiskSetIndex { sorted, groups }
}

fn check_inputs<T: Scalar>(covariates: &Covariates<T>, beta: &[T], risk: &RiskSetIndex<T>) -> Result<()> {
    if covariates.n_features() != beta.len() {
        return Err(Error::Dimension(format!(
            "beta has {} coefficients, covariates have {} features",
            beta.len(),
            covariates.n_features()
        )));
    }
    if covariates.n_items() != risk.len() {
        return Err(Error::Dimension(format!(
            "risk index covers {} records, covariates have {}",
            risk.len(),
            covariates.n_items()
        )));
    }
    Ok(())
}

/// One backward sweep over event groups: log partial likelihood with
/// gradient and, if requested, Hessian.
pub(crate) fn cox_evaluation<T: Scalar>(
    covariates: &Covariates<T>,
    scores: &[T],
    risk: &RiskSetIndex<T>,
    ties: TieMethod,
    with_hessian: bool,
) -> Evaluation<T> {
    let d = covariates.n_features();
    let mut acc = SuffixMoments::new(d, with_hessian);
    let mut ev = Evaluation::zero(d);
    for g in risk.groups.iter().rev() {
        let events = &risk.sorted[g.start..g.end];
        for &i in events {
            acc.push(scores[i], covariates.row(i));
        }
        for &i in events {
            ev.value = ev.value + scores[i];
            for (a, &x) in ev.gradient.iter_mut().zip(covariates.row(i)) {
                *a = *a + x;
            }
        }
        let count = T::from_count(events.len());
        if ties == TieMethod::Breslow || events.len() == 1 {
            ev.value = ev.value - count * acc.log_total();
            let (mean, cov) = mean_and_cov(acc.s0(), acc.s1(), acc.s2());
            for (a, m) in ev.gradient.iter_mut().zip(mean) {
                *a = *a - count * m;
            }
            if let Some(cov) = cov {
                ev.hessian.add_scaled(-count, &cov);
            }
            continue;
        }
        // Efron: weights of the tied set on the accumulator's scale.
        let mut e0 = T::zero();
        let mut e1 = vec![T::zero(); d];
        let mut e2 = with_hessian.then(|| Matrix::zeros(d, d));
        for &i in events {
            let w = (scores[i] - acc.max()).exp();
            let x = covariates.row(i);
            e0 = e0 + w;
            for (a, &xk) in e1.iter_mut().zip(x) {
                *a = *a + w * xk;
            }
            if let Some(e2) = e2.as_mut() {
                e2.add_outer(w, x);
            }
        }
        for l in 0..events.len() {
            let frac = T::from_count(l) / count;
            let den0 = acc.s0() - frac * e0;
            let den1: Vec<T> = acc.s1().iter().zip(&e1).map(|(&a, &b)| a - frac * b).collect();
            let den2 = acc.s2().map(|s2| {
                let mut m = s2.clone();
                m.add_scaled(-frac, e2.as_ref().expect("second moments"));
                m
            });
            ev.value = ev.value - (acc.max() + den0.ln());
            let (mean, cov) = mean_and_cov(den0, &den1, den2.as_ref());
            for (a, m) in ev.gradient.iter_mut().zip(mean) {
                *a = *a - m;
            }
            if let Some(cov) = cov {
                ev.hessian.add_scaled(-T::one(), &cov);
            }
        }
    }
    ev
}

/// Log partial likelihood from precomputed scores `f(x_i)`.
pub fn cox_partial_loglik_scores<T: Scalar>(
    covariates: &Covariates<T>,
    scores: &[T],
    risk: &RiskSetIndex<T>,
    ties: TieMethod,
) -> Result<T> {
    if scores.len() != risk.len() || covariates.n_items() != risk.len() {
        return Err(Error::Dimension(format!(
            "{} scores for a risk index of {} records",
            scores.len(),
            risk.len()
        )));
    }
    if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score[{k}] = {}", scores[k])));
    }
    Ok(cox_evaluation(covariates, scores, risk, ties, false).value)
}

pub fn cox_partial_loglik<T: Scalar>(
    covariates: &Covariates<T>,
    beta: &[T],
    risk: &RiskSetIndex<T>,
    ties: TieMethod,
) -> Result<T> {
    check_inputs(covariates, beta, risk)?;
    let scores: Vec<T> = covariates.rows().map(|x| dot(beta, x)).collect();
    cox_partial_loglik_scores(covariates, &scores, risk, ties)
}

pub fn cox_grad_hessian<T: Scalar>(
    covariates: &Covariates<T>,
    beta: &[T],
    risk: &RiskSetIndex<T>,
    ties: TieMethod,
) -> Result<(Vec<T>, Matrix<T>)> {
    check_inputs(covariates, beta, risk)?;
    let scores: Vec<T> = covariates.rows().map(|x| dot(beta, x)).collect();
    let ev = cox_evaluation(covariates, &scores, risk, ties, true);
    Ok((ev.gradient, ev.hessian))
}

/// Sum of partial log-likelihoods over independent datasets, each with its own
/// risk sets. A single dataset is the ordinary Cox objective.
pub struct CoxObjective<'a, T> {
    strata: Vec<(&'a Covariates<T>, RiskSetIndex<T>)>,
    ties: TieMethod,
}

impl<'a, T: Scalar> CoxObjective<'a, T> {
    pub fn new(data: &'a SurvivalDataset<T>, ties: TieMethod) -> Self {
        Self::grouped(std::slice::from_ref(data), ties)
    }

    pub fn grouped(data: &'a [SurvivalDataset<T>], ties: TieMethod) -> Self {
        Self {
            strata: data.iter().map(|d| (d.covariates(), build_risk_sets(d))).collect(),
            ties,
        }
    }
}

impl<T: Scalar> Objective<T> for CoxObjective<'_, T> {
    fn dim(&self) -> usize {
        self.strata.first().map_or(0, |(c, _)| c.n_features())
    }

    fn evaluate(&self, beta: &[T]) -> Result<Evaluation<T>> {
        let ties = self.ties;
        let terms: Vec<Evaluation<T>> = self
            .strata
            .par_iter()
            .map(|(cov, risk)| {
                let scores: Vec<T> = cov.rows().map(|x| dot(beta, x)).collect();
                cox_evaluation(cov, &scores, risk, ties, true)
            })
            .collect();
        Ok(Evaluation::tree_sum(terms, beta.len()))
    }
}

/// Newton maximization of the log partial likelihood from `beta = 0`.
pub fn cox_fit<T: Scalar>(
    data: &SurvivalDataset<T>,
    ties: TieMethod,
    config: &FitConfig<T>,
) -> Result<FitResult<T>> {
    newton_maximize(&CoxObjective::new(data, ties), &vec![T::zero(); data.n_features()], config)
}

/// Fit over several datasets whose risk sets never mix (one per ranking list).
pub fn cox_fit_grouped<T: Scalar>(
    data: &[SurvivalDataset<T>],
    ties: TieMethod,
    config: &FitConfig<T>,
) -> Result<FitResult<T>> {
    let Some(first) = data.first() else {
        return Err(Error::Empty("no datasets to fit".into()));
    };
    let d = first.n_features();
    if data.iter().any(|s| s.n_features() != d) {
        return Err(Error::Dimension("datasets disagree on feature count".into()));
    }
    newton_maximize(&CoxObjective::grouped(data, ties), &vec![T::zero(); d], config)
}

/// The item at rank position `k` (0 = most preferred) receives pseudo-time
/// `k + 1`, so the most preferred item faces the full risk set first.
pub fn ranking_to_pseudotimes<T: Scalar>(instance: &RankingInstance<T>) -> SurvivalDataset<T> {
    let mut times = vec![T::zero(); instance.n_items()];
    for (k, &item) in instance.order().iter().enumerate() {
        times[item] = T::from_count(k + 1);
    }
    SurvivalDataset::from_covariates(instance.covariates().clone(), times)
        .expect("a valid ranking yields valid pseudo-times")
}

pub fn rankings_to_pseudotimes<T: Scalar>(data: &RankingDataset<T>) -> Vec<SurvivalDataset<T>> {
    data.instances().iter().map(ranking_to_pseudotimes).collect()
}
