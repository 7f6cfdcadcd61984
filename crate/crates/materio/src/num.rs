//! Scalar abstraction for the numeric core.
//!
//! Everything that does arithmetic (nodal solves, spectra, surrogate
//! training, configuration search) is generic over [`Real`]; the concrete
//! aliases at the crate root pin `f64` for the CLI and the experiment
//! pipeline. Seeded random draws are always made in `f64` and converted,
//! so `Real` carries no sampling bounds.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to Real")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_float_widths_implement_real() {
        fn takes_real<F: Real>(x: F) -> F {
            x + F::one()
        }
        assert_eq!(takes_real(1.0f32), 2.0f32);
        assert_eq!(takes_real(1.0f64), 2.0f64);
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let x = 0.1f64;
        assert_eq!(f64::from_f64_lossy(x), x);
        assert_eq!(x.to_f64_lossy(), x);
    }
}
