//! Exact integer/rational kernels: factorials, binomials, Bernoulli numbers,
//! differences of powers at zero, and the two power-sum identities the weight
//! formulas are built from.

mod bigfloat;
mod sums;

pub use bigfloat::BigFloat;
pub use sums::{geometric_power_series, geometric_power_sum, power_sum};

use dashu::integer::{IBig, UBig};

/// Exact rational in lowest terms with a positive denominator.
pub use dashu::rational::RBig as Rational;

/// Working precision (bits) used when the caller does not choose one.
pub const DEFAULT_PRECISION: usize = 256;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rational(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::from_parts_signed(IBig::from(num), IBig::from(den))
}

pub fn factorial(n: usize) -> UBig {
    (1..=n as u64).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

pub fn binomial(n: usize, k: usize) -> UBig {
    if k > n {
        return UBig::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = UBig::ONE;
    for i in 0..k {
        acc = acc * UBig::from((n - i) as u64) / UBig::from((i + 1) as u64);
    }
    acc
}

/// Field operations shared by [`Rational`] and [`BigFloat`], so the
/// summation identities can run in either arithmetic.
pub trait Scalar: Clone + PartialEq {
    /// The integer `n` in the same arithmetic (and precision) as `self`.
    fn int_like(&self, n: &IBig) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn over(&self, rhs: &Self) -> Self;

    fn powu(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.int_like(&IBig::ONE);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.times(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.times(&base);
            }
        }
        acc
    }
}

impl Scalar for Rational {
    fn int_like(&self, n: &IBig) -> Self {
        Rational::from(n.clone())
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl Scalar for BigFloat {
    fn int_like(&self, n: &IBig) -> Self {
        BigFloat::from_int(n.clone(), self.precision())
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn powu(&self, exp: u64) -> Self {
        self.powi(exp)
    }
}

/// Bernoulli numbers `B_0..=B_n` from `sum_{j=0}^{n} C(n+1, j) B_j = 0`.
/// This recurrence yields `B_1 = -1/2`, the convention under which
/// [`power_sum`] is an identity.
#[derive(Clone, Debug)]
pub struct BernoulliTable {
    values: Vec<Rational>,
}

impl BernoulliTable {
    pub fn new(n: usize) -> Self {
        let mut values: Vec<Rational> = Vec::with_capacity(n + 1);
        values.push(Rational::ONE);
        for k in 1..=n {
            let mut acc = Rational::ZERO;
            for (j, b) in values.iter().enumerate() {
                if b == &Rational::ZERO {
                    continue;
                }
                acc += Rational::from(binomial(k + 1, j)) * b;
            }
            values.push(-acc / Rational::from(k as u64 + 1));
        }
        BernoulliTable { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `B_n`; panics if the table was built too small.
    pub fn get(&self, n: usize) -> &Rational {
        &self.values[n]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.values
    }
}

pub fn bernoulli(n: usize) -> Rational {
    BernoulliTable::new(n).values.pop().unwrap()
}

/// `Δ^i 0^j = sum_{a=0}^{i} (-1)^{i-a} C(i, a) a^j`, with `0^0 = 1`.
pub fn delta_power(i: usize, j: usize) -> Rational {
    Rational::from(delta_power_int(i, j))
}

pub(crate) fn delta_power_int(i: usize, j: usize) -> IBig {
    let mut acc = IBig::ZERO;
    for a in 0..=i {
        let term = IBig::from(binomial(i, a)) * IBig::from(a as u64).pow(j);
        if (i - a).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `Δ^i 0^j` for `0 <= i, j <= n`, filled by
/// `Δ^i 0^j = i (Δ^{i-1} 0^{j-1} + Δ^i 0^{j-1})`.
#[derive(Clone, Debug)]
pub struct FiniteDifferenceTable {
    size: usize,
    entries: Vec<IBig>,
}

impl FiniteDifferenceTable {
    pub fn new(n: usize) -> Self {
        let size = n + 1;
        let mut entries = vec![IBig::ZERO; size * size];
        entries[0] = IBig::ONE;
        for j in 1..size {
            for i in 1..=j {
                let prev = &entries[(i - 1) * size + (j - 1)] + &entries[i * size + (j - 1)];
                entries[i * size + j] = IBig::from(i as u64) * prev;
            }
        }
        FiniteDifferenceTable { size, entries }
    }

    /// Largest index stored.
    pub fn max_index(&self) -> usize {
        self.size - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &IBig {
        assert!(i < self.size && j < self.size, "Δ^{i}0^{j} outside table");
        &self.entries[i * self.size + j]
    }
}
