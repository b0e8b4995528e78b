use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Number type the simplex runs on. `f64` works with tolerances, exact
/// rationals with none.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    /// Feasibility / optimality tolerance of the pivoting rules.
    fn tolerance() -> Self;

    /// Smallest magnitude accepted as a pivot element.
    fn pivot_tolerance() -> Self;

    fn from_f64_checked(x: f64) -> Result<Self>;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    fn render(&self) -> String;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-9
    }

    fn pivot_tolerance() -> Self {
        1e-11
    }

    fn from_f64_checked(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            invalid(format!("non-finite coefficient {x}"))
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

/// Maximum number of significant decimal digits accepted when converting a
/// float to an exact rational. Every decimal with at most 15 significant
/// digits survives a round trip through `f64`; longer shortest
/// representations (`sqrt(2)`, `1/3`, ...) are not exact decimals of the
/// value the caller meant.
pub const EXACT_MAX_DIGITS: usize = 15;

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }

    fn from_f64_checked(x: f64) -> Result<Self> {
        decimal_to_rational(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Reads the shortest round-trip decimal of `x` as an exact rational.
fn decimal_to_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return invalid(format!("non-finite value {x} has no exact representation"));
    }
    // `Display` for f64 never uses exponent notation.
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let digits = format!("{int_part}{frac_part}");
    let significant = digits.trim_start_matches('0').trim_end_matches('0').len();
    if significant > EXACT_MAX_DIGITS {
        return invalid(format!(
            "{x} is not an exact decimal (needs more than {EXACT_MAX_DIGITS} significant digits); \
             exact mode requires rational input"
        ));
    }
    let numer: BigInt = digits.parse().expect("decimal digits");
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if x < 0.0 { -value } else { value })
}

pub(crate) fn is_positive<S: Scalar>(x: &S, tol: &S) -> bool {
    x > tol
}

pub(crate) fn is_negative<S: Scalar>(x: &S, tol: &S) -> bool {
    *x < -tol.clone()
}
