//! Breslow estimate of the baseline cumulative hazard and survival, and the
//! conditional utility CDF `1 - S0(u)^exp(f(x))` it implies.
//!
//! Knots sit at the distinct observed utilities. The stored step functions are
//! right-continuous, so `eval(u)` includes events at `u` itself; the sum over
//! events strictly below `u` is the left limit, see
//! [`BaselineEstimate::cumulative_hazard_below`]. The two agree everywhere
//! except exactly at a knot.

use serde::{Deserialize, Serialize};

use crate::cox::build_risk_sets;
use crate::data::{ScoreModel, SurvivalDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::step::StepFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEstimate<T> {
    pub cumulative_hazard: StepFunction<T>,
    pub survival: StepFunction<T>,
    pub event_utilities: Vec<T>,
}

impl<T: Scalar> BaselineEstimate<T> {
    /// `sum_{i: u_i < u} 1 / sum_{j: u_j >= u_i} exp(f(x_j))`.
    pub fn cumulative_hazard_below(&self, u: T) -> T {
        self.cumulative_hazard.left_limit(u)
    }

    pub fn survival_below(&self, u: T) -> T {
        self.survival.left_limit(u)
    }

    /// Estimated `P(U < u | score)` with the strict inequality taken literally.
    pub fn conditional_cdf_below(&self, u: T, score: T) -> T {
        T::one() - self.survival_below(u).powf(score.exp())
    }
}

pub fn breslow_baseline<T: Scalar>(
    data: &SurvivalDataset<T>,
    fitted: &ScoreModel<T>,
) -> Result<BaselineEstimate<T>> {
    let scores = fitted.scores(data.covariates())?;
    if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("fitted score of record {k}")));
    }
    let risk = build_risk_sets(data);

    // Hazard increments, computed back to front with a running max.
    let mut increments = vec![T::zero(); risk.groups.len()];
    let mut max = T::neg_infinity();
    let mut sum = T::zero();
    for (gi, g) in risk.groups.iter().enumerate().rev() {
        for &i in &risk.sorted[g.start..g.end] {
            let s = scores[i];
            if s > max {
                sum = sum * (max - s).exp();
                max = s;
            }
            sum = sum + (s - max).exp();
        }
        increments[gi] = T::from_count(g.event_count()) / sum * (-max).exp();
    }

    let mut cum = T::zero();
    let hazard: Vec<T> = increments
        .iter()
        .map(|&h| {
            cum = cum + h;
            cum
        })
        .collect();
    let knots: Vec<T> = risk.groups.iter().map(|g| g.utility).collect();
    let survival: Vec<T> = hazard.iter().map(|&h| (-h).exp()).collect();
    Ok(BaselineEstimate {
        cumulative_hazard: StepFunction::new(knots.clone(), hazard, T::zero())?,
        survival: StepFunction::new(knots.clone(), survival, T::one())?,
        event_utilities: knots,
    })
}

/// `1 - S0(u)^exp(score)` on the baseline's knots.
pub fn conditional_cdf<T: Scalar>(base: &BaselineEstimate<T>, score: T) -> StepFunction<T> {
    let e = score.exp();
    base.survival.map(|s| T::one() - s.powf(e))
}
