use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type for pixel intensities, prototypes and metrics.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Sum + Debug + Send + Sync + 'static {
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable constant")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
