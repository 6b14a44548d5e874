//! Shared domain types. Everything here is validated on construction and
//! immutable afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, spd_inverse, Matrix};
use crate::scalar::Scalar;

/// Item covariates, `n_items × d_features`, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates<T> {
    values: Matrix<T>,
    feature_names: Vec<String>,
}

pub fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|k| format!("x{k}")).collect()
}

fn check_rows<T: Scalar>(rows: &[Vec<T>]) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Err(Error::Dimension("covariates need at least one row".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::Dimension("covariates need at least one feature".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::Dimension(format!("row {i} has {} features, expected {d}", r.len())));
        }
        if let Some(k) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("covariate [{i}, {k}] = {}", r[k])));
        }
    }
    Ok(d)
}

impl<T: Scalar> Covariates<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let d = check_rows(&rows)?;
        Self::with_names(rows, default_feature_names(d))
    }

    pub fn with_names(rows: Vec<Vec<T>>, feature_names: Vec<String>) -> Result<Self> {
        let d = check_rows(&rows)?;
        if feature_names.len() != d {
            return Err(Error::Dimension(format!(
                "{} feature names for {d} features",
                feature_names.len()
            )));
        }
        Ok(Self { values: Matrix::from_rows(&rows), feature_names })
    }

    pub fn n_items(&self) -> usize {
        self.values.rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.values.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.n_items()).map(move |i| self.row(i))
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.values
    }

    /// Rows reordered (or subset) by `idx`.
    pub fn select(&self, idx: &[usize]) -> Self {
        let rows: Vec<Vec<T>> = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        Self { values: Matrix::from_rows(&rows), feature_names: self.feature_names.clone() }
    }
}

/// Checks every invariant of a ranking instance: rectangular finite covariates,
/// `n_items >= 2`, and `order` a bijection on `0..n_items`.
pub fn validate_ranking_instance<T: Scalar>(rows: &[Vec<T>], order: &[usize]) -> Result<()> {
    check_rows(rows)?;
    let n = rows.len();
    if n < 2 {
        return Err(Error::Dimension(format!("a ranking needs at least 2 items, got {n}")));
    }
    check_permutation(order, n)
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Permutation(format!("order has {} entries for {n} items", order.len())));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(Error::Permutation(format!("index {i} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Permutation(format!("index {i} appears twice")));
        }
    }
    Ok(())
}

/// One annotated list: item covariates plus the observed total order,
/// `order[0]` being the most-preferred item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingInstance<T> {
    covariates: Covariates<T>,
    order: Vec<usize>,
}

impl<T: Scalar> RankingInstance<T> {
    pub fn new(rows: Vec<Vec<T>>, order: Vec<usize>) -> Result<Self> {
        validate_ranking_instance(&rows, &order)?;
        Ok(Self { covariates: Covariates::new(rows)?, order })
    }

    pub fn from_covariates(covariates: Covariates<T>, order: Vec<usize>) -> Result<Self> {
        if covariates.n_items() < 2 {
            return Err(Error::Dimension("a ranking needs at least 2 items".into()));
        }
        check_permutation(&order, covariates.n_items())?;
        Ok(Self { covariates, order })
    }

    pub fn covariates(&self) -> &Covariates<T> {
        &self.covariates
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_items(&self) -> usize {
        self.order.len()
    }

    pub fn n_features(&self) -> usize {
        self.covariates.n_features()
    }
}

/// Pointwise observation: covariates and a strictly positive utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRecord<T> {
    pub covariates: Vec<T>,
    pub utility: T,
}

impl<T: Scalar> UtilityRecord<T> {
    pub fn new(covariates: Vec<T>, utility: T) -> Result<Self> {
        check_utility(utility, 0)?;
        Ok(Self { covariates, utility })
    }
}

fn check_utility<T: Scalar>(u: T, i: usize) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::NonFinite(format!("utility of record {i} is {u}")));
    }
    if u <= T::zero() {
        return Err(Error::InvalidParameter(format!("utility of record {i} must be > 0, got {u}")));
    }
    Ok(())
}

/// Records sharing one feature dimension; at least two of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDataset<T> {
    covariates: Covariates<T>,
    utilities: Vec<T>,
}

impl<T: Scalar> SurvivalDataset<T> {
    pub fn new(rows: Vec<Vec<T>>, utilities: Vec<T>) -> Result<Self> {
        Self::from_covariates(Covariates::new(rows)?, utilities)
    }

    pub fn from_covariates(covariates: Covariates<T>, utilities: Vec<T>) -> Result<Self> {
        if utilities.len() != covariates.n_items() {
            return Err(Error::Dimension(format!(
                "{} utilities for {} covariate rows",
                utilities.len(),
                covariates.n_items()
            )));
        }
        if utilities.len() < 2 {
            return Err(Error::Dimension("a survival dataset needs at least 2 records".into()));
        }
        for (i, &u) in utilities.iter().enumerate() {
            check_utility(u, i)?;
        }
        Ok(Self { covariates, utilities })
    }

    pub fn from_records(records: Vec<UtilityRecord<T>>) -> Result<Self> {
        let (rows, utilities): (Vec<_>, Vec<_>) =
            records.into_iter().map(|r| (r.covariates, r.utility)).unzip();
        Self::new(rows, utilities)
    }

    pub fn len(&self) -> usize {
        self.utilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utilities.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.covariates.n_features()
    }

    pub fn covariates(&self) -> &Covariates<T> {
        &self.covariates
    }

    pub fn utilities(&self) -> &[T] {
        &self.utilities
    }

    pub fn record(&self, i: usize) -> UtilityRecord<T> {
        UtilityRecord { covariates: self.covariates.row(i).to_vec(), utility: self.utilities[i] }
    }

    /// Same covariates, new utilities (validated).
    pub fn with_utilities(&self, utilities: Vec<T>) -> Result<Self> {
        Self::from_covariates(self.covariates.clone(), utilities)
    }

    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::from_covariates(
            self.covariates.select(idx),
            idx.iter().map(|&i| self.utilities[i]).collect(),
        )
    }
}

/// Linear score `f(x) = <beta, x>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreModel<T> {
    pub beta: Vec<T>,
}

impl<T: Scalar> ScoreModel<T> {
    pub fn new(beta: Vec<T>) -> Result<Self> {
        if let Some(k) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::NonFinite(format!("beta[{k}] = {}", beta[k])));
        }
        Ok(Self { beta })
    }

    pub fn zeros(d: usize) -> Self {
        Self { beta: vec![T::zero(); d] }
    }

    pub fn score(&self, x: &[T]) -> T {
        dot(&self.beta, x)
    }

    pub fn scores(&self, covariates: &Covariates<T>) -> Result<Vec<T>> {
        if covariates.n_features() != self.beta.len() {
            return Err(Error::Dimension(format!(
                "beta has {} coefficients, covariates have {} features",
                self.beta.len(),
                covariates.n_features()
            )));
        }
        Ok(covariates.rows().map(|x| self.score(x)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// `max |beta_k|` exceeded the cap: the likelihood is monotone along some direction.
    Separation { max_abs_beta: f64, cap: f64 },
    NotConverged { iterations: usize, gradient_norm: f64 },
    LineSearchStalled { gradient_norm: f64 },
    HessianRegularized { jitter: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::Separation { max_abs_beta, cap } => write!(
                f,
                "separation: max |beta| = {max_abs_beta:.3} exceeds cap {cap}; the MLE diverges"
            ),
            FitWarning::NotConverged { iterations, gradient_norm } => write!(
                f,
                "not converged after {iterations} iterations (gradient norm {gradient_norm:.3e})"
            ),
            FitWarning::LineSearchStalled { gradient_norm } => write!(
                f,
                "line search could not increase the objective (gradient norm {gradient_norm:.3e})"
            ),
            FitWarning::HessianRegularized { jitter } => {
                write!(f, "hessian regularized with {jitter:e} * I")
            }
        }
    }
}

/// Outcome of a Newton fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub model: ScoreModel<T>,
    /// Unpenalized log-likelihood at `model`.
    pub log_likelihood: T,
    /// Infinity norm of the (penalized) gradient at `model`.
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Negative (penalized) Hessian at `model`.
    pub information: Matrix<T>,
    pub warnings: Vec<FitWarning>,
    /// Penalized objective after each accepted step, starting at the initial point.
    pub trace: Vec<T>,
}

impl<T: Scalar> FitResult<T> {
    pub fn beta(&self) -> &[T] {
        &self.model.beta
    }

    /// Square roots of the diagonal of the inverse information, when it is invertible.
    pub fn standard_errors(&self) -> Option<Vec<T>> {
        let inv = spd_inverse(&self.information)?;
        Some(inv.diagonal().into_iter().map(T::sqrt).collect())
    }

    pub fn has_separation(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, FitWarning::Separation { .. }))
    }
}
