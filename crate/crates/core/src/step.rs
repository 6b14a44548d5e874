use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Right-continuous piecewise-constant curve.
///
/// `eval(u)` is `values[k]` for the largest knot `knots[k] <= u`, or
/// `value_before_first_knot` when `u` precedes every knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction<T> {
    knots: Vec<T>,
    values: Vec<T>,
    value_before_first_knot: T,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>, value_before_first_knot: T) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("step function knot".into()));
        }
        if let Some(w) = knots.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(format!(
                "knots must be strictly increasing (position {})",
                w + 1
            )));
        }
        Ok(Self { knots, values, value_before_first_knot })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value_before_first_knot(&self) -> T {
        self.value_before_first_knot
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Number of knots `<= u`.
    fn count_at_or_below(&self, u: T) -> usize {
        self.knots.partition_point(|&k| k <= u)
    }

    pub fn eval(&self, u: T) -> T {
        match self.count_at_or_below(u) {
            0 => self.value_before_first_knot,
            k => self.values[k - 1],
        }
    }

    /// Limit from the left, `lim_{v -> u-} eval(v)`.
    pub fn left_limit(&self, u: T) -> T {
        match self.knots.partition_point(|&k| k < u) {
            0 => self.value_before_first_knot,
            k => self.values[k - 1],
        }
    }

    /// Same knots, values transformed pointwise.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            value_before_first_knot: f(self.value_before_first_knot),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        let mut prev = self.value_before_first_knot;
        self.values.iter().all(|&v| {
            let ok = v >= prev;
            prev = v;
            ok
        })
    }

    pub fn is_nonincreasing(&self) -> bool {
        let mut prev = self.value_before_first_knot;
        self.values.iter().all(|&v| {
            let ok = v <= prev;
            prev = v;
            ok
        })
    }
}
