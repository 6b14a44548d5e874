//! Preference objectives whose item score is a scaled policy/reference
//! log-probability ratio, `s_k = beta_temp * (log pi(k) - log pi_ref(k))`.
//!
//! Policies are explicit distributions over a finite candidate set. The pairwise
//! loss is the two-item Plackett-Luce (Bradley-Terry) negative log-likelihood;
//! the listwise loss feeds the same scores to [`pl_log_likelihood`].

use serde::{Deserialize, Serialize};

use crate::data::FitResult;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optimizer::{newton_maximize, Evaluation, FitConfig, FnObjective};
use crate::plackett_luce::{pl_log_likelihood};
use crate::scalar::{log_sum_exp, logistic, softplus, Scalar};

/// Policy and reference log-probabilities over the same `m` candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyLogProbs<T> {
    logp_policy: Vec<T>,
    logp_ref: Vec<T>,
}

fn check_log_distribution<T: Scalar>(name: &str, lp: &[T]) -> Result<()> {
    if let Some(k) = lp.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name}[{k}] = {}", lp[k])));
    }
    let total: T = lp.iter().map(|v| v.exp()).sum();
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
    if (total - T::one()).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "{name} is not a log-distribution (probabilities sum to {total})"
        )));
    }
    Ok(())
}

impl<T: Scalar> PolicyLogProbs<T> {
    pub fn new(logp_policy: Vec<T>, logp_ref: Vec<T>) -> Result<Self> {
        if logp_policy.len() != logp_ref.len() {
            return Err(Error::Dimension(format!(
                "policy has {} candidates, reference has {}",
                logp_policy.len(),
                logp_ref.len()
            )));
        }
        if logp_policy.len() < 2 {
            return Err(Error::Dimension("need at least 2 candidates".into()));
        }
        check_log_distribution("logp_policy", &logp_policy)?;
        check_log_distribution("logp_ref", &logp_ref)?;
        Ok(Self { logp_policy, logp_ref })
    }

    pub fn from_policies(policy: &TabularPolicy<T>, reference: &TabularPolicy<T>) -> Result<Self> {
        Self::new(policy.log_probs(), reference.log_probs())
    }

    pub fn len(&self) -> usize {
        self.logp_policy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logp_policy.is_empty()
    }

    pub fn logp_policy(&self) -> &[T] {
        &self.logp_policy
    }

    pub fn logp_ref(&self) -> &[T] {
        &self.logp_ref
    }

    fn probs(&self) -> Vec<T> {
        self.logp_policy.iter().map(|v| v.exp()).collect()
    }
}

/// Distribution over `m` responses parameterized by unnormalized logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy<T> {
    logits: Vec<T>,
}

impl<T: Scalar> TabularPolicy<T> {
    pub fn new(logits: Vec<T>) -> Result<Self> {
        if logits.len() < 2 {
            return Err(Error::Dimension("a policy needs at least 2 responses".into()));
        }
        if let Some(k) = logits.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("logit[{k}]")));
        }
        Ok(Self { logits })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![T::zero(); m])
    }

    pub fn logits(&self) -> &[T] {
        &self.logits
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn log_probs(&self) -> Vec<T> {
        let z = log_sum_exp(&self.logits);
        self.logits.iter().map(|&l| l - z).collect()
    }
}

pub fn dpo_scores<T: Scalar>(lp: &PolicyLogProbs<T>, beta_temp: T) -> Result<Vec<T>> {
    if !(beta_temp > T::zero()) || !beta_temp.is_finite() {
        return Err(Error::InvalidParameter(format!("beta_temp must be > 0, got {beta_temp}")));
    }
    Ok(lp
        .logp_policy
        .iter()
        .zip(&lp.logp_ref)
        .map(|(&p, &r)| beta_temp * (p - r))
        .collect())
}

fn check_index(i: usize, m: usize) -> Result<()> {
    if i >= m {
        return Err(Error::Index { index: i, len: m });
    }
    Ok(())
}

/// Chain rule through `log p = z - logsumexp(z)`: given `dL/d log p`, returns `dL/dz`.
fn through_normalization<T: Scalar>(d_logp: &[T], probs: &[T]) -> Vec<T> {
    let total: T = d_logp.iter().copied().sum();
    d_logp.iter().zip(probs).map(|(&g, &p)| g - p * total).collect()
}

/// `-log logistic(s_chosen - s_rejected)` and its gradient with respect to the
/// policy logits.
pub fn dpo_pair_loss<T: Scalar>(
    lp: &PolicyLogProbs<T>,
    chosen: usize,
    rejected: usize,
    beta_temp: T,
) -> Result<(T, Vec<T>)> {
    let m = lp.len();
    check_index(chosen, m)?;
    check_index(rejected, m)?;
    if chosen == rejected {
        return Err(Error::InvalidParameter("chosen and rejected must differ".into()));
    }
    let s = dpo_scores(lp, beta_temp)?;
    let gap = s[chosen] - s[rejected];
    let loss = softplus(-gap);
    let slope = -beta_temp * logistic(-gap);
    let mut d_logp = vec![T::zero(); m];
    d_logp[chosen] = slope;
    d_logp[rejected] = -slope;
    Ok((loss, through_normalization(&d_logp, &lp.probs())))
}

/// Hessian of [`dpo_pair_loss`] with respect to the policy logits.
pub fn dpo_pair_loss_hessian<T: Scalar>(
    lp: &PolicyLogProbs<T>,
    chosen: usize,
    rejected: usize,
    beta_temp: T,
) -> Result<Matrix<T>> {
    let m = lp.len();
    check_index(chosen, m)?;
    check_index(rejected, m)?;
    let s = dpo_scores(lp, beta_temp)?;
    let gap = s[chosen] - s[rejected];
    // The loss depends on the logits only through z_c - z_r.
    let curvature = beta_temp * beta_temp * logistic(gap) * logistic(-gap);
    let mut v = vec![T::zero(); m];
    v[chosen] = T::one();
    v[rejected] = -T::one();
    let mut h = Matrix::zeros(m, m);
    h.add_outer(curvature, &v);
    Ok(h)
}

/// Listwise loss: negative Plackett-Luce log-likelihood of `order` (a ranking of
/// some of the candidates, best first) under the log-ratio scores.
pub fn dpo_listwise_loss<T: Scalar>(
    lp: &PolicyLogProbs<T>,
    order: &[usize],
    beta_temp: T,
) -> Result<T> {
    let s = dpo_scores(lp, beta_temp)?;
    for &i in order {
        check_index(i, s.len())?;
    }
    let group: Vec<T> = order.iter().map(|&i| s[i]).collect();
    let local: Vec<usize> = (0..order.len()).collect();
    Ok(-pl_log_likelihood(&group, &local)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpoFit<T> {
    pub policy: TabularPolicy<T>,
    /// Optimizer output; coefficients are the free logit offsets from the
    /// reference (one anchored response per connected comparison component).
    pub fit: FitResult<T>,
}

/// Fit a tabular policy to `(chosen, rejected)` pairs by maximizing the summed
/// negative pairwise loss, starting from the reference.
///
/// The loss only sees logit differences within a connected set of compared
/// responses, so one response per component stays pinned at its reference
/// logit and uncompared responses are left untouched.
pub fn dpo_fit_tabular<T: Scalar>(
    prefs: &[(usize, usize)],
    reference: &TabularPolicy<T>,
    beta_temp: T,
    config: &FitConfig<T>,
) -> Result<DpoFit<T>> {
    let m = reference.len();
    if prefs.is_empty() {
        return Err(Error::Empty("no preference pairs".into()));
    }
    for &(c, r) in prefs {
        check_index(c, m)?;
        check_index(r, m)?;
        if c == r {
            return Err(Error::InvalidParameter(format!("pair ({c}, {r}) compares a response with itself")));
        }
    }
    if !(beta_temp > T::zero()) {
        return Err(Error::InvalidParameter("beta_temp must be > 0".into()));
    }

    // Union-find over compared responses; the smallest index anchors each component.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    let mut compared = vec![false; m];
    for &(c, r) in prefs {
        compared[c] = true;
        compared[r] = true;
        let (a, b) = (find(&mut parent, c), find(&mut parent, r));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let free: Vec<usize> =
        (0..m).filter(|&k| compared[k] && find(&mut parent, k) != k).collect();
    let mut slot = vec![None; m];
    for (j, &k) in free.iter().enumerate() {
        slot[k] = Some(j);
    }

    let nfree = free.len();
    let objective = FnObjective::new(nfree, |theta: &[T]| {
        let mut ev = Evaluation::zero(nfree);
        for &(c, r) in prefs {
            let off = |k: usize| slot[k].map_or(T::zero(), |j| theta[j]);
            let gap = beta_temp * (off(c) - off(r));
            ev.value = ev.value - softplus(-gap);
            let g = beta_temp * logistic(-gap);
            let curv = beta_temp * beta_temp * logistic(gap) * logistic(-gap);
            let mut v = vec![T::zero(); nfree];
            if let Some(j) = slot[c] {
                ev.gradient[j] = ev.gradient[j] + g;
                v[j] = T::one();
            }
            if let Some(j) = slot[r] {
                ev.gradient[j] = ev.gradient[j] - g;
                v[j] = -T::one();
            }
            ev.hessian.add_outer(-curv, &v);
        }
        Ok(ev)
    });
    let fit = newton_maximize(&objective, &vec![T::zero(); nfree], config)?;

    let mut logits = reference.logits().to_vec();
    for (j, &k) in free.iter().enumerate() {
        logits[k] = logits[k] + fit.model.beta[j];
    }
    Ok(DpoFit { policy: TabularPolicy::new(logits)?, fit })
}
