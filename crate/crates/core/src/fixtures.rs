//! Committed simulation regimes used by the diagnostics, the figure and the
//! test suites. Group membership is always the binary feature `x0`.

use crate::figure::{FigureGroup, FigureSpec};
use crate::diagnose::CrossingConfig;
use crate::simulate::{AltLaw, CovariateSampler, MixtureComponent, SimSpec, UtilityLaw};

/// Weibull baseline shared by the PH regimes.
pub const BASE_WEIBULL: UtilityLaw = UtilityLaw::WeibullPh { shape: 1.5, scale: 1.0 };

/// Log-normal with the same median as [`BASE_WEIBULL`] but a much wider spread,
/// so its CDF crosses the Weibull CDF near the common median.
pub fn wide_lognormal() -> UtilityLaw {
    let log_median = std::f64::consts::LN_2.ln() / 1.5;
    UtilityLaw::LogNormal { mu: log_median, sigma: 1.2 }
}

fn binary_group(n: usize, seed: u64, beta: f64, law: UtilityLaw, alt: Option<UtilityLaw>) -> SimSpec {
    SimSpec {
        n,
        beta_true: vec![beta],
        covariates: vec![CovariateSampler::Bernoulli { p: 0.5 }],
        law,
        seed,
        alt_law: alt.map(|law| AltLaw { feature: 0, law }),
        likert_levels: None,
        group_size: None,
    }
}

/// Three groups: `i` and `j` differ by a constant hazard ratio `e`; `k` crosses `i`.
pub fn figure_default() -> FigureSpec {
    FigureSpec {
        n_per_group: 10_000,
        seed: 2024,
        grid_points: 200,
        groups: vec![
            FigureGroup { name: "i".into(), law: BASE_WEIBULL, eta: 0.0 },
            FigureGroup { name: "j".into(), law: BASE_WEIBULL, eta: 1.0 },
            FigureGroup { name: "k".into(), law: wide_lognormal(), eta: 0.0 },
        ],
        crossing: CrossingConfig::default(),
    }
}

/// The `i`/`j` pair as one dataset: Weibull PH with a hazard ratio of `e` for `x0 = 1`.
pub fn ph_true_regime(n: usize, seed: u64) -> SimSpec {
    binary_group(n, seed, 1.0, BASE_WEIBULL, None)
}

/// The `i`/`k` pair as one dataset: Weibull for `x0 = 0`, wide log-normal for `x0 = 1`.
pub fn ph_violating_regime(n: usize, seed: u64) -> SimSpec {
    binary_group(n, seed, 0.0, BASE_WEIBULL, Some(wide_lognormal()))
}

/// Log-normal groups `(mu 0, sigma 0.25)` and `(mu 0.1, sigma 1.0)`.
pub fn lognormal_crossing_regime(n: usize, seed: u64) -> SimSpec {
    binary_group(
        n,
        seed,
        0.0,
        UtilityLaw::LogNormal { mu: 0.0, sigma: 0.25 },
        Some(UtilityLaw::LogNormal { mu: 0.1, sigma: 1.0 }),
    )
}

/// PH regime for the mis-estimation probe: `x0 = 1` lowers the hazard, so that
/// group has the higher median and wins most comparisons.
pub fn probe_ph_regime(n: usize, seed: u64) -> SimSpec {
    binary_group(n, seed, -0.5, BASE_WEIBULL, None)
}

/// Polarized regime for the mis-estimation probe. `x0 = 0` rates around 1 with a
/// wide spread; `x0 = 1` is a mixture of a 30% enthusiastic minority (around
/// e^2) and a 70% majority tightly just below 1. The `x0 = 1` group wins about
/// 61% of cross-group comparisons yet has the lower median utility.
pub fn probe_crossing_regime(n: usize, seed: u64) -> SimSpec {
    binary_group(
        n,
        seed,
        0.0,
        UtilityLaw::LogNormal { mu: 0.0, sigma: 1.0 },
        Some(UtilityLaw::Mixture {
            components: vec![
                MixtureComponent { weight: 0.3, law: UtilityLaw::LogNormal { mu: 2.0, sigma: 0.25 } },
                MixtureComponent { weight: 0.7, law: UtilityLaw::LogNormal { mu: -0.1, sigma: 0.05 } },
            ],
        }),
    )
}

/// Weibull PH with one standard-normal feature and `beta = 1.5`.
pub fn recovery_regime(n: usize, seed: u64) -> SimSpec {
    SimSpec {
        n,
        beta_true: vec![1.5],
        covariates: vec![CovariateSampler::Gaussian { mean: 0.0, sd: 1.0 }],
        law: BASE_WEIBULL,
        seed,
        alt_law: None,
        likert_levels: None,
        group_size: None,
    }
}
