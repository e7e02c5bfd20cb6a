//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the pipeline can run on: `f32` or `f64`.
///
/// Tolerances are carried by the type because a residual bound that is
/// meaningful for `f64` cannot be met in single precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Relative bound on `|Av - lambda v|_inf / max(1, |lambda|)`.
    const RESIDUAL_TOL: f64;
    /// Absolute gap under which two eigenvalues count as equal.
    const MULTIPLICITY_TOL: f64;
    /// Correlations closer to zero than this cannot fix an eigenvector sign.
    const SIGN_TOL: f64;

    /// Converts an `f64` constant. Finite constants always fit.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in a float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const RESIDUAL_TOL: f64 = 1e-8;
    const MULTIPLICITY_TOL: f64 = 1e-10;
    const SIGN_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const RESIDUAL_TOL: f64 = 1e-3;
    const MULTIPLICITY_TOL: f64 = 1e-5;
    const SIGN_TOL: f64 = 1e-6;
}
