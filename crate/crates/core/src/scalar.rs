use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the engine is generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static {
    /// Converts an `f64` literal. Out-of-range values saturate to +-inf.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}
