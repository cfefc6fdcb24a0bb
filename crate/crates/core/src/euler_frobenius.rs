//! Euler–Frobenius polynomials `E_k` and the roots of `E_{2m-2}` in `(-1, 0)`.
//!
//! `E_k` is built three ways (recurrence, Euler's coefficient formula, and
//! the expansion in differences of powers) so that each construction can
//! serve as an oracle for the others. Roots are isolated with a Sturm
//! sequence and refined by bisection; every sign decision is made in exact
//! integer arithmetic.

use std::cmp::Ordering;

use dashu::integer::{IBig, UBig};

use crate::error::{Error, Result};
use crate::numerics::{binomial, delta_power_int, BigFloat, Rational};

/// Integer-coefficient polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EFPolynomial {
    coeffs: Vec<IBig>,
}

impl EFPolynomial {
    pub fn from_coeffs(coeffs: Vec<IBig>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        EFPolynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[IBig] {
        &self.coeffs
    }

    pub fn is_palindromic(&self) -> bool {
        let k = self.degree();
        (0..=k).all(|s| self.coeffs[s] == self.coeffs[k - s])
    }

    /// `E(1)`, which equals `(k+1)!` for a genuine Euler–Frobenius polynomial.
    pub fn coefficient_sum(&self) -> IBig {
        self.coeffs.iter().fold(IBig::ZERO, |acc, c| acc + c)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::ZERO, |acc, c| acc * x + Rational::from(c.clone()))
    }

    pub fn eval(&self, x: &BigFloat) -> BigFloat {
        let precision = x.precision();
        self.coeffs
            .iter()
            .rev()
            .fold(BigFloat::zero(precision), |acc, c| {
                &(&acc * x) + &BigFloat::from_int(c.clone(), precision)
            })
    }

    /// Sign of `E(num / 2^shift)`, computed without rounding.
    pub fn sign_at_dyadic(&self, num: &IBig, shift: usize) -> Ordering {
        // 2^{shift*k} E(num/2^shift) = sum_i c_i num^i 2^{shift (k - i)}
        let k = self.degree();
        let mut total = IBig::ZERO;
        let mut num_pow = IBig::ONE;
        for (i, c) in self.coeffs.iter().enumerate() {
            total += (c * &num_pow) << (shift * (k - i));
            num_pow *= num;
        }
        total.cmp(&IBig::ZERO)
    }

    pub fn sign_at(&self, x: &Rational) -> Ordering {
        self.eval_rational(x).cmp(&Rational::ZERO)
    }

    fn to_rational_poly(&self) -> Vec<Rational> {
        self.coeffs
            .iter()
            .map(|c| Rational::from(c.clone()))
            .collect()
    }
}

/// `E_k` from `E_0 = 1` and `E_k = (kx + 1) E_{k-1} + x(1 - x) E'_{k-1}`,
/// i.e. `a_s^(k) = (s+1) a_s^(k-1) + (k-s+1) a_{s-1}^(k-1)`.
pub fn ef_by_recurrence(k: usize) -> EFPolynomial {
    let mut coeffs = vec![IBig::ONE];
    for kk in 1..=k {
        let mut next = vec![IBig::ZERO; kk + 1];
        for (s, slot) in next.iter_mut().enumerate() {
            if s < kk {
                *slot += IBig::from((s + 1) as u64) * &coeffs[s];
            }
            if s > 0 {
                *slot += IBig::from((kk - s + 1) as u64) * &coeffs[s - 1];
            }
        }
        coeffs = next;
    }
    EFPolynomial { coeffs }
}

/// Euler's closed form `a_s = sum_{j=0}^{s} (-1)^j C(k+2, j) (s+1-j)^{k+1}`.
pub fn ef_by_euler_formula(k: usize) -> EFPolynomial {
    let coeffs = (0..=k)
        .map(|s| {
            let mut acc = IBig::ZERO;
            for j in 0..=s {
                let term =
                    IBig::from(binomial(k + 2, j)) * IBig::from((s + 1 - j) as u64).pow(k + 1);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        })
        .collect();
    EFPolynomial { coeffs }
}

/// Expands `(x-1)^{k+1} sum_{i=1}^{k+1} Δ^i 0^{k+1} / (x-1)^i`.
pub fn ef_by_finite_differences(k: usize) -> EFPolynomial {
    let mut coeffs = vec![IBig::ZERO; k + 1];
    for i in 1..=k + 1 {
        let weight = delta_power_int(i, k + 1);
        let power = k + 1 - i;
        // (x - 1)^power
        for (t, slot) in coeffs.iter_mut().enumerate().take(power + 1) {
            let term = &weight * IBig::from(binomial(power, t));
            if (power - t).is_multiple_of(2) {
                *slot += term;
            } else {
                *slot -= term;
            }
        }
    }
    EFPolynomial { coeffs }
}

/// The `m - 1` roots of `E_{2m-2}` inside `(-1, 0)`, ascending.
#[derive(Clone, Debug)]
pub struct RootSet {
    m: usize,
    precision: usize,
    polynomial: EFPolynomial,
    roots: Vec<BigFloat>,
    enclosures: Vec<(Rational, Rational)>,
}

impl RootSet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> &[BigFloat] {
        &self.roots
    }

    /// Rational brackets `(lo, hi)` with `E_{2m-2}(lo)`, `E_{2m-2}(hi)` of
    /// opposite sign.
    pub fn enclosures(&self) -> &[(Rational, Rational)] {
        &self.enclosures
    }

    /// `E_{2m-2}`.
    pub fn polynomial(&self) -> &EFPolynomial {
        &self.polynomial
    }

    /// Upper bound on every enclosure width, `2^-precision`.
    pub fn enclosure_width(&self) -> BigFloat {
        BigFloat::from_parts(IBig::ONE, -(self.precision as isize), self.precision)
    }

    /// `max_k |q_k|`, or zero when there are no roots.
    pub fn spectral_radius(&self) -> BigFloat {
        self.roots
            .iter()
            .map(BigFloat::abs)
            .fold(BigFloat::zero(self.precision), BigFloat::max)
    }

    /// Re-checks every enclosure: ordered, inside `(-1, 0)`, sign change.
    pub fn certify(&self) -> bool {
        let minus_one = -Rational::ONE;
        let mut previous = minus_one.clone();
        for (lo, hi) in &self.enclosures {
            if lo <= &previous || hi <= lo || hi >= &Rational::ZERO || lo <= &minus_one {
                return false;
            }
            let a = self.polynomial.sign_at(lo);
            let b = self.polynomial.sign_at(hi);
            if a == Ordering::Equal || b == Ordering::Equal || a == b {
                return false;
            }
            previous = hi.clone();
        }
        self.enclosures.len() + 1 == self.m
    }

    /// `|E(1/q)| / |1/q|^d` for each root: the reciprocal partner `1/q` must be
    /// a root too, so this is ~`2^-precision`.
    pub fn reciprocal_residuals(&self) -> Vec<BigFloat> {
        let degree = self.polynomial.degree() as u64;
        self.roots
            .iter()
            .map(|q| {
                let inv = q.recip();
                let value = self.polynomial.eval(&inv);
                (&value / &inv.powi(degree)).abs()
            })
            .collect()
    }
}

/// Isolates the roots of `E_{2m-2}` in `(-1, 0)` to width `2^-precision`.
pub fn isolate_roots(m: usize, precision: usize) -> Result<RootSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be ≥ 1".into()));
    }
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let polynomial = ef_by_recurrence(2 * m - 2);
    let (roots, enclosures) = roots_in_unit_interval(&polynomial, precision);
    if roots.len() != m - 1 {
        return Err(Error::RootCount {
            degree: polynomial.degree(),
            expected: m - 1,
            found: roots.len(),
        });
    }
    Ok(RootSet {
        m,
        precision,
        polynomial,
        roots,
        enclosures,
    })
}

/// All roots of `poly` in `(-1, 0)`, each bracketed to width `2^-precision`.
/// Assumes the roots there are simple and `poly(-1) != 0`, `poly(0) != 0`.
pub fn roots_in_unit_interval(
    poly: &EFPolynomial,
    precision: usize,
) -> (Vec<BigFloat>, Vec<(Rational, Rational)>) {
    if poly.degree() == 0 {
        return (Vec::new(), Vec::new());
    }
    let sturm = SturmSequence::new(poly);
    // Intervals are (a / 2^s, b / 2^s) with b = a + 1.
    let mut pending = vec![(IBig::from(-1), 0usize)];
    let mut isolated = Vec::new();
    while let Some((a, shift)) = pending.pop() {
        let lo = dyadic(&a, shift);
        let hi = dyadic(&(&a + IBig::ONE), shift);
        let count = sturm.count_roots(&lo, &hi);
        match count {
            0 => {}
            1 => isolated.push((a, shift)),
            _ => {
                pending.push((&a * IBig::from(2) + IBig::ONE, shift + 1));
                pending.push((a * IBig::from(2), shift + 1));
            }
        }
    }
    isolated.sort_by_key(|x| dyadic(&x.0, x.1));

    let mut roots = Vec::with_capacity(isolated.len());
    let mut enclosures = Vec::with_capacity(isolated.len());
    for (mut a, mut shift) in isolated {
        let lo_sign = poly.sign_at_dyadic(&a, shift);
        while shift < precision {
            let mid = &a * IBig::from(2) + IBig::ONE;
            let mid_shift = shift + 1;
            let mid_sign = poly.sign_at_dyadic(&mid, mid_shift);
            if mid_sign == Ordering::Equal {
                // An exact dyadic root; collapse onto it.
                a = mid * IBig::from(2) - IBig::ONE;
                shift = mid_shift + 1;
                continue;
            }
            if mid_sign == lo_sign {
                a = mid;
            } else {
                a *= IBig::from(2);
            }
            shift = mid_shift;
        }
        let lo = dyadic(&a, shift);
        let hi = dyadic(&(&a + IBig::ONE), shift);
        // Midpoint (2a + 1) / 2^{shift+1}.
        let mid = BigFloat::from_parts(
            &a * IBig::from(2) + IBig::ONE,
            -((shift + 1) as isize),
            precision,
        );
        roots.push(mid);
        enclosures.push((lo, hi));
    }
    (roots, enclosures)
}

fn dyadic(num: &IBig, shift: usize) -> Rational {
    Rational::from_parts(num.clone(), UBig::ONE << shift)
}

/// Classical Sturm chain `p0 = p, p1 = p', p_{i+1} = -rem(p_{i-1}, p_i)`.
struct SturmSequence {
    chain: Vec<Vec<Rational>>,
}

impl SturmSequence {
    fn new(poly: &EFPolynomial) -> Self {
        let p0 = poly.to_rational_poly();
        let p1: Vec<Rational> = p0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from(i as u64))
            .collect();
        let mut chain = vec![p0, p1];
        loop {
            let n = chain.len();
            let rem = poly_rem(&chain[n - 2], &chain[n - 1]);
            if rem.is_empty() {
                break;
            }
            chain.push(rem.into_iter().map(|c| -c).collect());
        }
        SturmSequence { chain }
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = Ordering::Equal;
        for p in &self.chain {
            let v = p
                .iter()
                .rev()
                .fold(Rational::ZERO, |acc, c| acc * x + c)
                .cmp(&Rational::ZERO);
            if v == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && v != last {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Distinct roots in `(lo, hi]`.
    fn count_roots(&self, lo: &Rational, hi: &Rational) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// Remainder of `a / b` (ascending coefficients); empty means zero.
fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut rem: Vec<Rational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while rem.len() > db && !rem.is_empty() {
        let top = rem.len() - 1;
        let factor = &rem[top] / lead;
        let offset = top - db;
        for (i, c) in b.iter().enumerate() {
            rem[offset + i] -= &factor * c;
        }
        rem.pop();
    }
    while rem.last().is_some_and(|c| c == &Rational::ZERO) {
        rem.pop();
    }
    rem
}
