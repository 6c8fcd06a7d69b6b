//! Scalar abstraction for scores and metrics.
//!
//! Similarity scores, alignment thresholds and evaluation metrics are written
//! against [`Real`] so the same code runs in `f32` or `f64`. Offsets and
//! counts stay integral.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used for scores and metrics.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossless-enough conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    /// Conversion from an `f64` literal or config value.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn hundred() -> Self {
        Self::lit(100.0)
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

/// Round to two decimals, the precision used in printed reports.
pub fn round2<F: Real>(x: F) -> F {
    (x * F::hundred()).round() / F::hundred()
}
