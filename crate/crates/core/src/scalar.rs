//! Scalar abstraction for the clock-fit math.
//!
//! Fits, composition and reconstruction are written once against [`Scalar`]
//! and instantiated for `f64` (the default everywhere in the pipeline) and
//! `f32` (useful for checking how much precision the reconstruction needs).

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable for clock regression and fit composition.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Value used for the goodness-of-fit of an unreconstructed segment.
    /// Every real fit compares strictly below it.
    fn chi_max() -> Self {
        Self::max_value()
    }

    /// Lossy conversion from `f64`. Panics only for types that cannot
    /// represent ordinary finite doubles, which no implementor does.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 is representable")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
