//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same solvers run on `f32` or `f64`. Concrete aliases for the common `f64`
//! instantiation live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the solvers: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Default + 'static {
    /// Lossless-enough conversion from `f64` literals and tolerances.
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert into the scalar type")
    }

    /// Conversion to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Index of the largest entry, first index winning ties.
///
/// Tie-breaking by lowest index is a crate-wide convention: best responses,
/// initial compliance, and the canonical policies all rely on it.
pub fn argmax_first<R: Real>(values: &[R]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest entry, first index winning ties.
pub fn argmin_first<R: Real>(values: &[R]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// All indices whose entry is within `tol` of the maximum.
pub fn argmax_set<R: Real>(values: &[R], tol: R) -> Vec<usize> {
    let best = values[argmax_first(values)];
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| best - **v <= tol)
        .map(|(i, _)| i)
        .collect()
}
