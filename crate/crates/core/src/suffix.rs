//! Running softmax moments over a growing suffix of items.
//!
//! Items are pushed in reverse preference (or descending utility) order. The
//! accumulator keeps `sum w`, `sum w x` and `sum w x xᵀ` with `w = exp(s - max)`,
//! rescaling whenever a new maximum score arrives, so suffix log-normalizers,
//! softmax means and covariances come out in one backward pass.

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct SuffixMoments<T> {
    max: T,
    s0: T,
    s1: Vec<T>,
    s2: Option<Matrix<T>>,
}

impl<T: Scalar> SuffixMoments<T> {
    pub fn new(d: usize, with_second: bool) -> Self {
        Self {
            max: T::neg_infinity(),
            s0: T::zero(),
            s1: vec![T::zero(); d],
            s2: with_second.then(|| Matrix::zeros(d, d)),
        }
    }

    pub fn push(&mut self, score: T, x: &[T]) {
        if score > self.max {
            if self.max > T::neg_infinity() {
                let f = (self.max - score).exp();
                self.s0 = self.s0 * f;
                self.s1.iter_mut().for_each(|v| *v = *v * f);
                if let Some(s2) = self.s2.as_mut() {
                    s2.scale(f);
                }
            }
            self.max = score;
        }
        let w = (score - self.max).exp();
        self.s0 = self.s0 + w;
        for (a, &b) in self.s1.iter_mut().zip(x) {
            *a = *a + w * b;
        }
        if let Some(s2) = self.s2.as_mut() {
            s2.add_outer(w, x);
        }
    }

    /// Current reference maximum; weights are relative to `exp(max)`.
    pub fn max(&self) -> T {
        self.max
    }

    /// `log sum_j exp(s_j)` over everything pushed so far.
    pub fn log_total(&self) -> T {
        self.max + self.s0.ln()
    }

    pub fn s0(&self) -> T {
        self.s0
    }

    pub fn s1(&self) -> &[T] {
        &self.s1
    }

    pub fn s2(&self) -> Option<&Matrix<T>> {
        self.s2.as_ref()
    }
}

/// Softmax-weighted mean and covariance from raw moments `(s0, s1, s2)`.
pub(crate) fn mean_and_cov<T: Scalar>(s0: T, s1: &[T], s2: Option<&Matrix<T>>) -> (Vec<T>, Option<Matrix<T>>) {
    let mean: Vec<T> = s1.iter().map(|&v| v / s0).collect();
    let cov = s2.map(|s2| {
        let mut c = s2.clone();
        c.scale(T::one() / s0);
        c.add_outer(-T::one(), &mean);
        c
    });
    (mean, cov)
}
