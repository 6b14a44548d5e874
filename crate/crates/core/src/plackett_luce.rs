//! Plackett-Luce listwise likelihood.
//!
//! For an order `sigma` (most preferred first) and scores `s`,
//! `log P = sum_i [ s_sigma(i) - log sum_{j >= i} exp(s_sigma(j)) ]`.
//! The suffix normalizers are accumulated back to front, so an instance costs
//! `O(n d)` for the gradient and `O(n d^2)` with the Hessian.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{check_permutation, Covariates, FitResult, RankingInstance};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::optimizer::{newton_maximize, Evaluation, FitConfig, Objective};
use crate::scalar::Scalar;
use crate::suffix::{mean_and_cov, SuffixMoments};

/// Largest list size [`pl_enumerate`] accepts.
pub const MAX_ENUMERATE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset<T> {
    instances: Vec<RankingInstance<T>>,
}

impl<T: Scalar> RankingDataset<T> {
    pub fn new(instances: Vec<RankingInstance<T>>) -> Result<Self> {
        let Some(first) = instances.first() else {
            return Err(Error::Empty("ranking dataset has no instances".into()));
        };
        let d = first.n_features();
        if let Some(i) = instances.iter().position(|r| r.n_features() != d) {
            return Err(Error::Dimension(format!(
                "instance {i} has {} features, expected {d}",
                instances[i].n_features()
            )));
        }
        Ok(Self { instances })
    }

    pub fn instances(&self) -> &[RankingInstance<T>] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.instances[0].n_features()
    }
}

fn check_scores<T: Scalar>(scores: &[T], order: &[usize]) -> Result<()> {
    if scores.len() < 2 {
        return Err(Error::Dimension(format!("need at least 2 scores, got {}", scores.len())));
    }
    if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score[{k}] = {}", scores[k])));
    }
    check_permutation(order, scores.len())
}

/// Log-probability of `order` under Plackett-Luce with the given item scores.
pub fn pl_log_likelihood<T: Scalar>(scores: &[T], order: &[usize]) -> Result<T> {
    check_scores(scores, order)?;
    let mut ll = T::zero();
    let mut max = T::neg_infinity();
    let mut sum = T::zero();
    for &item in order.iter().rev() {
        let s = scores[item];
        if s > max {
            sum = sum * (max - s).exp();
            max = s;
        }
        sum = sum + (s - max).exp();
        ll = ll + (s - max - sum.ln());
    }
    Ok(ll)
}

/// Value, gradient and (optionally) Hessian of one instance's log-likelihood
/// under the linear score `<beta, x>`.
pub(crate) fn instance_evaluation<T: Scalar>(
    covariates: &Covariates<T>,
    beta: &[T],
    order: &[usize],
    with_hessian: bool,
) -> Evaluation<T> {
    let d = beta.len();
    let mut acc = SuffixMoments::new(d, with_hessian);
    let mut ev = Evaluation::zero(d);
    for &item in order.iter().rev() {
        let x = covariates.row(item);
        let s = dot(beta, x);
        acc.push(s, x);
        ev.value = ev.value + (s - acc.log_total());
        let (mean, cov) = mean_and_cov(acc.s0(), acc.s1(), acc.s2());
        for ((g, &xk), mk) in ev.gradient.iter_mut().zip(x).zip(mean) {
            *g = *g + (xk - mk);
        }
        if let Some(cov) = cov {
            ev.hessian.add_scaled(-T::one(), &cov);
        }
    }
    ev
}

fn check_dims<T: Scalar>(covariates: &Covariates<T>, beta: &[T], order: &[usize]) -> Result<()> {
    if covariates.n_features() != beta.len() {
        return Err(Error::Dimension(format!(
            "beta has {} coefficients, covariates have {} features",
            beta.len(),
            covariates.n_features()
        )));
    }
    if covariates.n_items() < 2 {
        return Err(Error::Dimension("a ranking needs at least 2 items".into()));
    }
    check_permutation(order, covariates.n_items())
}

/// Gradient and Hessian of [`pl_log_likelihood`] with respect to `beta`.
pub fn pl_grad_hessian<T: Scalar>(
    covariates: &Covariates<T>,
    beta: &[T],
    order: &[usize],
) -> Result<(Vec<T>, Matrix<T>)> {
    check_dims(covariates, beta, order)?;
    let ev = instance_evaluation(covariates, beta, order, true);
    Ok((ev.gradient, ev.hessian))
}

/// Probability of every permutation of `scores.len() <= 8` items, by direct
/// products of ratios. Intended as a test oracle.
pub fn pl_enumerate<T: Scalar>(scores: &[T]) -> Result<BTreeMap<Vec<usize>, T>> {
    let n = scores.len();
    if n > MAX_ENUMERATE {
        return Err(Error::Size { size: n, limit: MAX_ENUMERATE });
    }
    if n == 0 {
        return Err(Error::Empty("no scores".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score".into()));
    }
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let w: Vec<T> = scores.iter().map(|&s| (s - max).exp()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = BTreeMap::new();
    loop {
        let mut p = T::one();
        for i in 0..n {
            let denom: T = perm[i..].iter().map(|&j| w[j]).sum();
            p = p * w[perm[i]] / denom;
        }
        out.insert(perm.clone(), p);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Summed log-likelihood over a dataset; instances are evaluated in parallel and
/// combined with a fixed pairwise tree.
pub struct PlObjective<'a, T> {
    data: &'a RankingDataset<T>,
}

impl<'a, T: Scalar> PlObjective<'a, T> {
    pub fn new(data: &'a RankingDataset<T>) -> Self {
        Self { data }
    }
}

impl<T: Scalar> Objective<T> for PlObjective<'_, T> {
    fn dim(&self) -> usize {
        self.data.n_features()
    }

    fn evaluate(&self, beta: &[T]) -> Result<Evaluation<T>> {
        let terms: Vec<Evaluation<T>> = self
            .data
            .instances
            .par_iter()
            .map(|inst| instance_evaluation(inst.covariates(), beta, inst.order(), true))
            .collect();
        Ok(Evaluation::tree_sum(terms, beta.len()))
    }
}

/// Maximum-likelihood fit of the linear Plackett-Luce model, starting at zero.
pub fn pl_fit<T: Scalar>(data: &RankingDataset<T>, config: &FitConfig<T>) -> Result<FitResult<T>> {
    let init = vec![T::zero(); data.n_features()];
    newton_maximize(&PlObjective::new(data), &init, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FitWarning;
    use crate::rng::seeded_rng;
    use crate::scalar::logistic;
    use proptest::prelude::*;

    #[test]
    fn two_identical_items() {
        let ll = pl_log_likelihood(&[0.0, 0.0], &[0, 1]).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn three_to_one_odds() {
        let ll = pl_log_likelihood(&[3f64.ln(), 0.0], &[0, 1]).unwrap();
        assert!((ll - 0.75f64.ln()).abs() < 1e-15);
        assert!((ll + 0.287682).abs() < 1e-6);
    }

    #[test]
    fn matches_enumeration_oracle() {
        let scores = [1.0f64, 0.5, -0.2];
        let probs = pl_enumerate(&scores).unwrap();
        let ll = pl_log_likelihood(&scores, &[2, 0, 1]).unwrap();
        assert!((ll - probs[&vec![2, 0, 1]].ln()).abs() < 1e-14);
        // term by term: e^-0.2/(e^1+e^0.5+e^-0.2) * e^1/(e^1+e^0.5)
        let e = f64::exp;
        let direct = e(-0.2) / (e(1.0) + e(0.5) + e(-0.2)) * e(1.0) / (e(1.0) + e(0.5));
        assert!((ll - direct.ln()).abs() < 1e-14);
    }

    #[test]
    fn enumerate_examples() {
        let p = pl_enumerate(&[0.0f64, 0.0, 0.0]).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.values().all(|v| (v - 1.0 / 6.0).abs() < 1e-15));
        let p = pl_enumerate(&[2f64.ln(), 0.0]).unwrap();
        assert!((p[&vec![0, 1]] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[&vec![1, 0]] - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(pl_enumerate(&[0.0f64; 9]), Err(Error::Size { size: 9, limit: 8 })));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(pl_log_likelihood(&[0.0], &[0]), Err(Error::Dimension(_))));
        assert!(matches!(pl_log_likelihood(&[0.0, f64::NAN], &[0, 1]), Err(Error::NonFinite(_))));
        assert!(matches!(pl_log_likelihood(&[0.0, 1.0], &[1, 1]), Err(Error::Permutation(_))));
        let cov = Covariates::new(vec![vec![1.0], vec![0.0]]).unwrap();
        assert!(matches!(pl_grad_hessian(&cov, &[0.0, 1.0], &[0, 1]), Err(Error::Dimension(_))));
    }

    #[test]
    fn huge_scores_stay_finite() {
        let ll = pl_log_likelihood(&[1e4f64, -1e4, 5e3], &[1, 2, 0]).unwrap();
        assert!(ll.is_finite() && ll < -1e4);
    }

    #[test]
    fn gradient_at_zero_two_items() {
        let cov = Covariates::new(vec![vec![1.0f64], vec![0.0]]).unwrap();
        let (g, h) = pl_grad_hessian(&cov, &[0.0], &[0, 1]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15);
        assert!((h[(0, 0)] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn f32_instantiation() {
        let ll = pl_log_likelihood(&[3f32.ln(), 0.0], &[0, 1]).unwrap();
        assert!((ll - 0.75f32.ln()).abs() < 1e-6);
    }

    fn pair(x_winner: f64, x_loser: f64) -> RankingInstance<f64> {
        RankingInstance::new(vec![vec![x_winner], vec![x_loser]], vec![0, 1]).unwrap()
    }

    #[test]
    fn perfect_separation_is_flagged() {
        let data = RankingDataset::new((0..10).map(|_| pair(1.0, 0.0)).collect()).unwrap();
        let fit = pl_fit(&data, &FitConfig::default()).unwrap();
        assert!(!fit.converged);
        assert!(fit.has_separation(), "{:?}", fit.warnings);
        assert!(fit.beta()[0] > 30.0);
    }

    #[test]
    fn ridge_tames_separation() {
        let data = RankingDataset::new((0..10).map(|_| pair(1.0, 0.0)).collect()).unwrap();
        let cfg = FitConfig { ridge_lambda: 0.1, ..FitConfig::default() };
        let fit = pl_fit(&data, &cfg).unwrap();
        assert!(fit.converged && !fit.has_separation());
        assert!(fit.beta()[0] > 0.0);
    }

    #[test]
    fn identical_covariates_give_zero() {
        let inst = RankingInstance::new(vec![vec![0.7f64, -1.0]; 4], vec![3, 1, 0, 2]).unwrap();
        let (g, _) = pl_grad_hessian(inst.covariates(), &[0.0, 0.0], inst.order()).unwrap();
        assert!(g.iter().all(|v| v.abs() <= 1e-15));
        let data = RankingDataset::new(vec![inst]).unwrap();
        let fit = pl_fit(&data, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.beta().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn recovers_bradley_terry_coefficient() {
        // Pairs drawn directly from BT with beta = 1 on a Gaussian feature.
        let mut rng = seeded_rng(2024);
        let insts: Vec<_> = (0..2000)
            .map(|_| {
                let a = rng.standard_normal();
                let b = rng.standard_normal();
                let order = if rng.uniform() < logistic(a - b) { vec![0, 1] } else { vec![1, 0] };
                RankingInstance::new(vec![vec![a], vec![b]], order).unwrap()
            })
            .collect();
        let data = RankingDataset::new(insts).unwrap();
        let fit = pl_fit(&data, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        let se = fit.standard_errors().unwrap()[0];
        assert!((fit.beta()[0] - 1.0).abs() <= 3.0 * se, "beta {} se {se}", fit.beta()[0]);
        assert!(fit.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(fit.information.max_asymmetry() <= 1e-10);
        assert!(!fit.warnings.iter().any(|w| matches!(w, FitWarning::Separation { .. })));
    }

    proptest! {
        #[test]
        fn normalization(scores in prop::collection::vec(-5.0f64..5.0, 1..=6)) {
            let total: f64 = pl_enumerate(&scores).unwrap().values().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn translation_invariance(scores in prop::collection::vec(-20.0f64..20.0, 2..12), c in -100.0f64..100.0, seed in 0u64..1000) {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            seeded_rng(seed).shuffle(&mut order);
            let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
            let a = pl_log_likelihood(&scores, &order).unwrap();
            let b = pl_log_likelihood(&shifted, &order).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!(a <= 0.0);
        }

        #[test]
        fn bradley_terry_reduction(s0 in -10.0f64..10.0, s1 in -10.0f64..10.0) {
            let p = pl_log_likelihood(&[s0, s1], &[0, 1]).unwrap().exp();
            prop_assert!((p - logistic(s0 - s1)).abs() <= 1e-14);
        }
    }
}
