//! Newton maximizer with step-halving line search.
//!
//! The driver works on a penalized objective `value - ridge * |beta|^2`; the
//! oracle supplies the unpenalized log-likelihood with its exact gradient and
//! Hessian. A step is taken only if it does not decrease the penalized value,
//! so the recorded trace is nondecreasing. The one exception is a full Newton
//! step whose predicted gain is below the value's rounding floor
//! (`1e3 * eps * (1 + |value|)`): it is accepted when it shrinks the gradient and
//! loses no more than that floor.

use serde::{Deserialize, Serialize};

use crate::data::{FitResult, FitWarning, ScoreModel};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, inf_norm, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig<T> {
    /// Gradient infinity-norm threshold.
    pub tol: T,
    /// Newton step infinity-norm threshold; both must hold to declare convergence.
    pub step_tol: T,
    pub max_iter: usize,
    /// L2 penalty weight on `|beta|^2`.
    pub ridge_lambda: T,
    /// Separation is reported once `max |beta_k|` exceeds this.
    pub beta_cap: T,
    pub line_search_shrink: T,
    pub min_step: T,
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::default_tolerance(),
            step_tol: T::lit(1e-6).max(T::epsilon().sqrt()),
            max_iter: 100,
            ridge_lambda: T::zero(),
            beta_cap: T::lit(30.0),
            line_search_shrink: T::lit(0.5),
            min_step: T::lit(1e-10),
        }
    }
}

impl<T: Scalar> FitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tol", self.tol)?;
        positive("step_tol", self.step_tol)?;
        positive("beta_cap", self.beta_cap)?;
        positive("min_step", self.min_step)?;
        if !(self.ridge_lambda >= T::zero()) {
            return Err(Error::InvalidParameter("ridge_lambda must be >= 0".into()));
        }
        if !(self.line_search_shrink > T::zero() && self.line_search_shrink < T::one()) {
            return Err(Error::InvalidParameter("line_search_shrink must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Value, gradient and Hessian of an objective at one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub gradient: Vec<T>,
    pub hessian: Matrix<T>,
}

impl<T: Scalar> Evaluation<T> {
    pub fn zero(d: usize) -> Self {
        Self { value: T::zero(), gradient: vec![T::zero(); d], hessian: Matrix::zeros(d, d) }
    }

    fn add(mut self, other: &Self) -> Self {
        self.value = self.value + other.value;
        for (a, &b) in self.gradient.iter_mut().zip(&other.gradient) {
            *a = *a + b;
        }
        self.hessian.add_scaled(T::one(), &other.hessian);
        self
    }

    /// Pairwise tree sum. The reduction shape depends only on the number of
    /// terms, so the result is bit-identical however the terms were produced.
    pub fn tree_sum(mut terms: Vec<Self>, d: usize) -> Self {
        if terms.is_empty() {
            return Self::zero(d);
        }
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                next.push(match it.next() {
                    Some(b) => a.add(&b),
                    None => a,
                });
            }
            terms = next;
        }
        terms.pop().expect("non-empty")
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.is_finite()
    }
}

/// Objective oracle: log-likelihood plus exact derivatives.
pub trait Objective<T: Scalar> {
    fn dim(&self) -> usize;
    fn evaluate(&self, beta: &[T]) -> Result<Evaluation<T>>;
}

/// Adapter turning a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Scalar, F: Fn(&[T]) -> Result<Evaluation<T>>> Objective<T> for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&self, beta: &[T]) -> Result<Evaluation<T>> {
        (self.f)(beta)
    }
}

struct Penalized<'a, T, O: ?Sized> {
    inner: &'a O,
    ridge: T,
}

impl<T: Scalar, O: Objective<T> + ?Sized> Penalized<'_, T, O> {
    /// Returns (raw log-likelihood, penalized evaluation).
    fn evaluate(&self, beta: &[T]) -> Result<(T, Evaluation<T>)> {
        let mut ev = self.inner.evaluate(beta)?;
        if ev.gradient.len() != beta.len()
            || ev.hessian.rows() != beta.len()
            || ev.hessian.cols() != beta.len()
        {
            return Err(Error::Dimension("oracle output does not match parameter length".into()));
        }
        let raw = ev.value;
        if self.ridge > T::zero() {
            let two = T::lit(2.0);
            let sq: T = beta.iter().map(|&b| b * b).sum();
            ev.value = ev.value - self.ridge * sq;
            for (g, &b) in ev.gradient.iter_mut().zip(beta) {
                *g = *g - two * self.ridge * b;
            }
            for k in 0..beta.len() {
                ev.hessian[(k, k)] = ev.hessian[(k, k)] - two * self.ridge;
            }
        }
        if !ev.is_finite() {
            return Err(Error::NonFinite(format!("objective evaluated to {}", ev.value)));
        }
        Ok((raw, ev))
    }
}

/// Solve `(-H) delta = g`, adding `1e-8 * I`, then `1e-7`, `1e-6` on failure.
fn newton_direction<T: Scalar>(
    ev: &Evaluation<T>,
    warnings: &mut Vec<FitWarning>,
) -> Option<Vec<T>> {
    let info = ev.hessian.neg();
    if let Some(l) = info.cholesky() {
        return Some(cholesky_solve(&l, &ev.gradient));
    }
    let mut jitter = T::lit(1e-8);
    for _ in 0..3 {
        let mut reg = info.clone();
        for k in 0..reg.rows() {
            reg[(k, k)] = reg[(k, k)] + jitter;
        }
        if let Some(l) = reg.cholesky() {
            let jw = FitWarning::HessianRegularized { jitter: jitter.as_f64() };
            if !warnings.contains(&jw) {
                warnings.push(jw);
            }
            return Some(cholesky_solve(&l, &ev.gradient));
        }
        jitter = jitter * T::lit(10.0);
    }
    None
}

pub fn newton_maximize<T, O>(oracle: &O, init: &[T], config: &FitConfig<T>) -> Result<FitResult<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    config.validate()?;
    if init.len() != oracle.dim() {
        return Err(Error::Dimension(format!(
            "initial point has {} entries, objective expects {}",
            init.len(),
            oracle.dim()
        )));
    }
    if init.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite("initial point".into()));
    }

    let objective = Penalized { inner: oracle, ridge: config.ridge_lambda };
    let mut beta = init.to_vec();
    let (mut raw, mut ev) = objective.evaluate(&beta)?;
    let mut trace = vec![ev.value];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let converged;

    loop {
        let grad_norm = inf_norm(&ev.gradient);
        let delta = if grad_norm == T::zero() {
            Some(vec![T::zero(); beta.len()])
        } else {
            newton_direction(&ev, &mut warnings)
        };
        let Some(delta) = delta else {
            if grad_norm <= config.tol {
                converged = true;
                break;
            }
            return Err(Error::SingularHessian);
        };
        if grad_norm <= config.tol && inf_norm(&delta) <= config.step_tol {
            converged = true;
            break;
        }
        let max_beta = inf_norm(&beta);
        if max_beta > config.beta_cap {
            warnings.push(FitWarning::Separation {
                max_abs_beta: max_beta.as_f64(),
                cap: config.beta_cap.as_f64(),
            });
            converged = false;
            break;
        }
        if iterations >= config.max_iter {
            warnings.push(FitWarning::NotConverged {
                iterations,
                gradient_norm: grad_norm.as_f64(),
            });
            converged = false;
            break;
        }

        // Below this gain the value comparison is rounding noise; the full step
        // is then judged by the gradient instead.
        let floor = T::lit(1e3) * T::epsilon() * (T::one() + ev.value.abs());
        let in_noise = dot(&ev.gradient, &delta) * T::lit(0.5) <= floor;
        let mut t = T::one();
        let mut accepted = None;
        while t >= config.min_step {
            let cand: Vec<T> = beta.iter().zip(&delta).map(|(&b, &d)| b + t * d).collect();
            match objective.evaluate(&cand) {
                Ok((r, e)) if e.value >= ev.value => {
                    accepted = Some((cand, r, e));
                    break;
                }
                Ok((r, e))
                    if in_noise
                        && t == T::one()
                        && e.value >= ev.value - floor
                        && inf_norm(&e.gradient) < grad_norm =>
                {
                    accepted = Some((cand, r, e));
                    break;
                }
                Ok(_) | Err(Error::NonFinite(_)) => t = t * config.line_search_shrink,
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some((b, r, e)) => {
                beta = b;
                raw = r;
                ev = e;
                trace.push(ev.value);
                iterations += 1;
            }
            None => {
                warnings.push(FitWarning::LineSearchStalled { gradient_norm: grad_norm.as_f64() });
                converged = false;
                break;
            }
        }
    }

    let information = ev.hessian.neg();
    Ok(FitResult {
        model: ScoreModel { beta },
        log_likelihood: raw,
        gradient_norm: inf_norm(&ev.gradient),
        iterations,
        converged,
        information,
        warnings,
        trace,
    })
}
