//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 always converts to a float scalar")
    }

    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize always converts to a float scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Numerically stable softmax of `logits` into `out`.
pub fn softmax_into<F: Real>(logits: &[F], out: &mut [F]) {
    debug_assert_eq!(logits.len(), out.len());
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let mut total = F::zero();
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total = total + *o;
    }
    for o in out.iter_mut() {
        *o = *o / total;
    }
}

pub fn softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); logits.len()];
    softmax_into(logits, &mut out);
    out
}
