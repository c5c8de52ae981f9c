//! Floating-point scalar abstraction shared by the Hamiltonian, the
//! determinant-space engine and the QPE emulator.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the emulator can run in (`f32` or `f64`).
///
/// Probabilities and autocorrelation sums are always accumulated in `f64`
/// regardless of the amplitude precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Negative probabilities down to `-PROB_CLAMP` are rounding noise and get clamped to 0.
    const PROB_CLAMP: f64;
    /// Maximum |sum - 1| that is silently renormalized.
    const RENORM_TOL: f64;

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("float converts to f64")
    }
}

impl Real for f64 {
    const PROB_CLAMP: f64 = 1e-12;
    const RENORM_TOL: f64 = 1e-6;
}

impl Real for f32 {
    const PROB_CLAMP: f64 = 1e-5;
    const RENORM_TOL: f64 = 1e-3;
}
