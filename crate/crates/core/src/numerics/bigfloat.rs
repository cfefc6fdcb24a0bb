use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu::base::{Abs, BitTest, Sign, UnsignedAbs};
use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::IBig;
use dashu::rational::RBig;

type Inner = FBig<HalfEven>;

/// Binary floating-point value carried at an explicit precision.
///
/// Every arithmetic result is rounded to the smaller precision of its two
/// operands.
#[derive(Clone)]
pub struct BigFloat {
    value: Inner,
    precision: usize,
}

impl BigFloat {
    fn wrap(value: Inner, precision: usize) -> Self {
        debug_assert!(precision > 0);
        let value = if value.precision() == precision {
            value
        } else {
            value.with_precision(precision).value()
        };
        BigFloat { value, precision }
    }

    pub fn zero(precision: usize) -> Self {
        Self::wrap(Inner::ZERO, precision)
    }

    pub fn one(precision: usize) -> Self {
        Self::wrap(Inner::ONE, precision)
    }

    pub fn from_int(n: impl Into<IBig>, precision: usize) -> Self {
        Self::wrap(Inner::from(n.into()), precision)
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(r: &RBig, precision: usize) -> Self {
        let value: Inner = r.to_float(precision).value();
        Self::wrap(value, precision)
    }

    /// Exact conversion of a binary64 value, then rounding to `precision`.
    pub fn from_f64(x: f64, precision: usize) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 on non-finite value");
        let value = Inner::try_from(x).expect("finite f64 converts exactly");
        Self::wrap(value, precision)
    }

    /// `significand * 2^exponent`, rounded to `precision`.
    pub fn from_parts(significand: IBig, exponent: isize, precision: usize) -> Self {
        Self::wrap(Inner::from_parts(significand, exponent), precision)
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Rounds to a new precision (may be higher, in which case the value is
    /// unchanged).
    pub fn with_precision(&self, precision: usize) -> Self {
        Self::wrap(self.value.clone(), precision)
    }

    pub fn is_zero(&self) -> bool {
        self.value.repr().significand() == &IBig::ZERO
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.value.sign() == Sign::Negative {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            value: self.value.clone().abs(),
            precision: self.precision,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Integer power by repeated squaring at this value's precision.
    pub fn powi(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = BigFloat::one(self.precision);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn recip(&self) -> Self {
        &BigFloat::one(self.precision) / self
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.value.sqrt(), self.precision)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().value()
    }

    /// `log2 |self|` to about f64 accuracy, without overflow or underflow
    /// for any exponent. `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (significand, exponent) = self.value.repr().clone().into_parts();
        let mag = significand.unsigned_abs();
        let drop = mag.bit_len().saturating_sub(60);
        let top: f64 = (mag >> drop).to_f64().value();
        top.log2() + drop as f64 + exponent as f64
    }

    /// The exact rational value of this binary float.
    pub fn to_rational(&self) -> RBig {
        let (significand, exponent) = self.value.repr().clone().into_parts();
        if exponent >= 0 {
            RBig::from(significand << exponent as usize)
        } else {
            let den = dashu::integer::UBig::ONE << exponent.unsigned_abs();
            RBig::from_parts(significand, den)
        }
    }

    /// Positional decimal rendering with `digits` significant digits
    /// (round-half-even), trailing zeros trimmed. Output is a pure function of
    /// the value: no locale, no platform float formatting.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        assert!(digits > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        let dec = self
            .value
            .clone()
            .with_base_and_precision::<10>(digits)
            .value();
        let (significand, exponent) = dec.repr().clone().into_parts();
        format_decimal(&significand, exponent)
    }

    /// Compact scientific rendering, used for residual reports.
    pub fn to_scientific_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let dec = self
            .value
            .clone()
            .with_base_and_precision::<10>(digits)
            .value();
        let (significand, exponent) = dec.repr().clone().into_parts();
        let negative = significand.sign() == Sign::Negative;
        let mut text = significand.unsigned_abs().to_string();
        let mut exp10 = exponent + text.len() as isize - 1;
        while text.len() > 1 && text.ends_with('0') {
            text.pop();
        }
        if text.is_empty() {
            text.push('0');
            exp10 = 0;
        }
        let (head, tail) = text.split_at(1);
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        out.push_str(&format!("e{exp10}"));
        out
    }
}

fn format_decimal(significand: &IBig, exponent: isize) -> String {
    let negative = significand.sign() == Sign::Negative;
    let mut digits = significand.unsigned_abs().to_string();
    let mut exponent = exponent;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        exponent += 1;
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent >= 0 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', exponent as usize));
    } else {
        let shift = exponent.unsigned_abs();
        if shift >= digits.len() {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', shift - digits.len()));
            out.push_str(&digits);
        } else {
            let (int_part, frac_part) = digits.split_at(digits.len() - shift);
            out.push_str(int_part);
            out.push('.');
            out.push_str(frac_part);
        }
    }
    out
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.to_scientific_string(20), self.precision)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(40))
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.value.cmp(&other.value))
    }
}

fn binary(lhs: &BigFloat, rhs: &BigFloat, op: impl FnOnce(&Inner, &Inner) -> Inner) -> BigFloat {
    let precision = lhs.precision.min(rhs.precision);
    let value = match lhs.precision.cmp(&rhs.precision) {
        Ordering::Equal => op(&lhs.value, &rhs.value),
        Ordering::Less => op(&lhs.value, &rhs.with_precision(precision).value),
        Ordering::Greater => op(&lhs.with_precision(precision).value, &rhs.value),
    };
    BigFloat::wrap(value, precision)
}

macro_rules! impl_binary {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                binary(self, rhs, |a, b| a $op b)
            }
        }
        impl $trait<BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                binary(&self, &rhs, |a, b| a $op b)
            }
        }
        impl $trait<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                binary(&self, rhs, |a, b| a $op b)
            }
        }
        impl $trait<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                binary(self, &rhs, |a, b| a $op b)
            }
        }
    };
}

impl_binary!(Add, add, +);
impl_binary!(Sub, sub, -);
impl_binary!(Mul, mul, *);
impl_binary!(Div, div, /);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat {
            value: -self.value,
            precision: self.precision,
        }
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        -self.clone()
    }
}
