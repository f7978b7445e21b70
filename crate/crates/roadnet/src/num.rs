//! Scalar abstraction for the floating-point parts of the crate.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the fitness and solver math is generic over.
///
/// Blanket-implemented for anything float-like, so `f32` and `f64` work
/// out of the box.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` constant or RNG draw, panicking only for types
    /// that cannot represent ordinary finite values.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 must convert to scalar")
    }

    /// Converts a count into the scalar domain.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count must convert to scalar")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Send + Sync + 'static {}
