//! Scalar traits the DSP and statistics kernels are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Anything that can be stored in an [`AudioBuffer`](crate::signal::AudioBuffer).
///
/// Only field arithmetic is required, so exact types (rationals) can be used
/// with the purely algebraic stereo operations.
pub trait Sample: Clone + Num {
    fn is_finite_sample(&self) -> bool;
}

/// Floating point sample type used by every transform and filter.
pub trait Real:
    Sample
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + rustfft::FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite float converts to f64")
    }
}

macro_rules! impl_float_sample {
    ($($t:ty),*) => {$(
        impl Sample for $t {
            #[inline]
            fn is_finite_sample(&self) -> bool {
                self.is_finite()
            }
        }
        impl Real for $t {}
    )*};
}

impl_float_sample!(f32, f64);
