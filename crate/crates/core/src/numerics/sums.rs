use dashu::integer::IBig;

use super::{binomial, delta_power_int, factorial, BernoulliTable, Rational, Scalar};
use crate::error::{Error, Result};

/// `sum_{g=0}^{n-1} g^k` through the Bernoulli expansion
/// `sum_{j=1}^{k+1} k! B_{k+1-j} / (j! (k+1-j)!) n^j`.
pub fn power_sum(k: usize, n: u64) -> Rational {
    let bernoulli = BernoulliTable::new(k);
    power_sum_with(&bernoulli, k, n)
}

pub(crate) fn power_sum_with(bernoulli: &BernoulliTable, k: usize, n: u64) -> Rational {
    let k_fact = Rational::from(factorial(k));
    let n = Rational::from(n);
    let mut acc = Rational::ZERO;
    let mut n_pow = Rational::ONE;
    for j in 1..=k + 1 {
        n_pow = &n_pow * &n;
        let b = bernoulli.get(k + 1 - j);
        if b == &Rational::ZERO {
            continue;
        }
        let denom = Rational::from(factorial(j) * factorial(k + 1 - j));
        acc += &k_fact * b / denom * &n_pow;
    }
    acc
}

/// `sum_{g=0}^{n-1} q^g g^k` via the two-term finite-difference expansion
///
/// `1/(1-q) sum_i r^i Δ^i 0^k  -  q^n/(1-q) sum_i r^i Δ^i g^k |_{g=n}`,
/// with `r = q/(1-q)` and `i = 0..=k`. Singular at `q = 1`.
pub fn geometric_power_sum<T: Scalar>(q: &T, k: usize, n: u64) -> Result<T> {
    let one = q.int_like(&IBig::ONE);
    if *q == one {
        return Err(Error::InvalidArgument(
            "geometric_power_sum is singular at q = 1; use power_sum".into(),
        ));
    }
    let one_minus_q = one.minus(q);
    let ratio = q.over(&one_minus_q);
    let mut head = q.int_like(&IBig::ZERO);
    let mut tail = q.int_like(&IBig::ZERO);
    let mut ratio_pow = one.clone();
    for i in 0..=k {
        let at_zero = delta_power_int(i, k);
        let at_n = delta_power_at(i, k, n);
        head = head.plus(&ratio_pow.times(&q.int_like(&at_zero)));
        tail = tail.plus(&ratio_pow.times(&q.int_like(&at_n)));
        ratio_pow = ratio_pow.times(&ratio);
    }
    let q_n = q.powu(n);
    Ok(head.minus(&q_n.times(&tail)).over(&one_minus_q))
}

/// `sum_{g=0}^{inf} q^g g^k = 1/(1-q) sum_{i=0}^{k} (q/(1-q))^i Δ^i 0^k`,
/// the `n -> inf` limit of [`geometric_power_sum`]; valid for `|q| < 1`.
pub fn geometric_power_series<T: Scalar>(q: &T, k: usize) -> T {
    let one = q.int_like(&IBig::ONE);
    let one_minus_q = one.minus(q);
    let ratio = q.over(&one_minus_q);
    let mut acc = q.int_like(&IBig::ZERO);
    let mut ratio_pow = one;
    for i in 0..=k {
        acc = acc.plus(&ratio_pow.times(&q.int_like(&delta_power_int(i, k))));
        ratio_pow = ratio_pow.times(&ratio);
    }
    acc.over(&one_minus_q)
}

/// `Δ^i g^k` evaluated at `g = n`.
fn delta_power_at(i: usize, k: usize, n: u64) -> IBig {
    let mut acc = IBig::ZERO;
    for a in 0..=i {
        let term = IBig::from(binomial(i, a)) * IBig::from(n + a as u64).pow(k);
        if (i - a).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}
