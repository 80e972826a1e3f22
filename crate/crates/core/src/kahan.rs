//! Compensated floating-point accumulation.
//!
//! Naive f64 accumulation over ~2e9 terms loses around 1e-7 relative
//! accuracy, which is too close to the small margins some of the sweep
//! checks run at. The Kahan–Babuška (Neumaier) accumulator below keeps the
//! error near one ulp of the result independent of term count, and exposes
//! its two words so sweep state can be checkpointed and restored exactly.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild an accumulator from checkpointed words.
    pub fn from_parts(sum: f64, comp: f64) -> Self {
        KahanSum { sum, comp }
    }

    /// The two accumulator words `(sum, compensation)`.
    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.comp)
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator in. Not associative in general; callers that
    /// need reproducibility must merge in a fixed order.
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
