//! Plackett-Luce ranking likelihoods and Cox proportional-hazards partial
//! likelihoods under one estimation framework.
//!
//! A ranking `sigma(1) > ... > sigma(n)` scored by `f` has the same likelihood as
//! a Cox model on pseudo-times `u_sigma(k) = k` (see [`cox::ranking_to_pseudotimes`]),
//! so both are fitted by the same Newton driver. On top of that the crate
//! provides the Breslow baseline estimator, a tabular preference-optimization
//! objective built on log-probability ratios, PH and non-PH simulators, and
//! diagnostics for proportional-hazards violations.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); simulation and
//! the diagnostics that consume simulated data work in `f64`. Concrete aliases
//! for both precisions are exported at the crate root.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cox;
pub mod data;
pub mod diagnose;
pub mod dpo;
pub mod error;
pub mod figure;
pub mod fixtures;
pub mod linalg;
pub mod optimizer;
pub mod plackett_luce;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod step;
mod suffix;

pub use baseline::{breslow_baseline, conditional_cdf, BaselineEstimate};
pub use cox::{
    build_risk_sets, cox_fit, cox_fit_grouped, cox_grad_hessian, cox_partial_loglik,
    cox_partial_loglik_scores, ranking_to_pseudotimes, rankings_to_pseudotimes, RiskSetIndex,
    TieMethod,
};
pub use data::{
    validate_ranking_instance, Covariates, FitResult, FitWarning, RankingInstance, ScoreModel,
    SurvivalDataset, UtilityRecord,
};
pub use diagnose::{
    crossing_detect, empirical_cdf, misestimation_probe, ph_test, schoenfeld_residuals,
    CrossingConfig, CrossingReport, DominanceVerdict, PhTestReport,
};
pub use dpo::{
    dpo_fit_tabular, dpo_listwise_loss, dpo_pair_loss, dpo_pair_loss_hessian, dpo_scores,
    PolicyLogProbs, TabularPolicy,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use optimizer::{newton_maximize, Evaluation, FitConfig, Objective};
pub use plackett_luce::{pl_enumerate, pl_fit, pl_grad_hessian, pl_log_likelihood, RankingDataset};
pub use rng::{derive_seed, seeded_rng, RandomStream};
pub use scalar::Scalar;
pub use simulate::{
    quantize_likert, sample_nonph, sample_ph, simulate, utilities_to_rankings, LikertScheme,
    SimSpec, UtilityLaw,
};
pub use step::StepFunction;

pub type Covariates64 = Covariates<f64>;
pub type RankingInstance64 = RankingInstance<f64>;
pub type RankingDataset64 = RankingDataset<f64>;
pub type SurvivalDataset64 = SurvivalDataset<f64>;
pub type ScoreModel64 = ScoreModel<f64>;
pub type FitResult64 = FitResult<f64>;
pub type FitConfig64 = FitConfig<f64>;
pub type StepFunction64 = StepFunction<f64>;
pub type BaselineEstimate64 = BaselineEstimate<f64>;

pub type Covariates32 = Covariates<f32>;
pub type RankingInstance32 = RankingInstance<f32>;
pub type RankingDataset32 = RankingDataset<f32>;
pub type SurvivalDataset32 = SurvivalDataset<f32>;
pub type ScoreModel32 = ScoreModel<f32>;
pub type FitResult32 = FitResult<f32>;
pub type FitConfig32 = FitConfig<f32>;
pub type StepFunction32 = StepFunction<f32>;
pub type BaselineEstimate32 = BaselineEstimate<f32>;
