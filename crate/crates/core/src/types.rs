//! Value types shared by every layer and re-exported at the crate root.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real-valued Monte Carlo or quadrature estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, samples: 0 }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.std_error / self.value.abs()
        }
    }
}

/// Monte Carlo value of a Feynman graph together with its sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeynmanValue {
    pub estimate: Complex64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl FeynmanValue {
    pub fn rel_error(&self) -> f64 {
        let m = self.estimate.norm();
        if m == 0.0 {
            f64::INFINITY
        } else {
            self.std_error / m
        }
    }
}

/// Outcome of a numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported without a hard threshold, e.g. because a variance cap tripped.
    Qualitative,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}
