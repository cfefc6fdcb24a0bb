//! The discrete analogue `D_m[b]` of `d^{2m}/dx^{2m}` on the grid `h b`,
//! the kernel `G_{m,1}`, the right-hand side `f_m`, and discrete convolution.
//!
//! `D_m` is evaluated from its closed form in the roots `q_k` of `E_{2m-2}`:
//!
//! ```text
//!                  | sum_k c_k q_k^{|b|}            |b| >= 2
//! D_m[b] = s   *   | 1 + sum_k c_k q_k              |b| == 1
//!                  | -2^{2m-1} + sum_k c_k          b == 0
//! ```
//!
//! with `s = (2m-1)!/h^{2m}` and `c_k = (1-q_k)^{2m+1} / (q_k E_{2m-1}(q_k))`.
//! Identities over all of `Z` are checked on a finite window whose length is
//! chosen from a geometric tail bound; the bound is reported next to every
//! residual.

use dashu::integer::IBig;

use crate::error::{Error, Result};
use crate::euler_frobenius::{ef_by_recurrence, isolate_roots, RootSet};
use crate::numerics::{bernoulli, factorial, geometric_power_series, BigFloat, Rational, Scalar};

/// `|x|^{2m-1} / (2 (2m-1)!)`, i.e. `x^{2m-1} sign(x) / (2 (2m-1)!)`.
pub fn g_kernel(m: usize, x: &Rational) -> Rational {
    assert!(m >= 1, "kernel needs m >= 1");
    let magnitude = if x < &Rational::ZERO {
        -x.clone()
    } else {
        x.clone()
    };
    magnitude.pow((2 * m - 1) as isize)
        / Rational::from(IBig::from(2) * IBig::from(factorial(2 * m - 1)))
}

/// `(x^{2m} + (1-x)^{2m}) / (2 (2m)!)` for `x` in `[0, 1]`.
pub fn f_rhs(m: usize, x: &Rational) -> Result<Rational> {
    if x < &Rational::ZERO || x > &Rational::ONE {
        return Err(Error::InvalidArgument(format!(
            "f_m is defined on [0, 1], got {x}"
        )));
    }
    let one_minus = Rational::ONE - x;
    Ok((x.pow((2 * m) as isize) + one_minus.pow((2 * m) as isize))
        / Rational::from(IBig::from(2) * IBig::from(factorial(2 * m))))
}

/// A finitely supported function of a discrete argument; zero outside
/// `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSignal<T> {
    lo: i64,
    values: Vec<T>,
}

impl<T: Scalar> DiscreteSignal<T> {
    pub fn new(lo: i64, values: Vec<T>) -> Self {
        assert!(!values.is_empty(), "signal needs a non-empty support");
        DiscreteSignal { lo, values }
    }

    /// The discrete delta `δ[b]`, built from a unit value of the right kind.
    pub fn delta(one: T) -> Self {
        DiscreteSignal {
            lo: 0,
            values: vec![one],
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at `b`, or `None` outside the support (where it is zero).
    pub fn get(&self, b: i64) -> Option<&T> {
        if b < self.lo || b > self.hi() {
            None
        } else {
            Some(&self.values[(b - self.lo) as usize])
        }
    }

    /// `(a * b)[t] = sum_g a[g] b[t - g]` on the Minkowski sum of supports.
    pub fn convolve(&self, other: &Self) -> Self {
        let zero = self.values[0].int_like(&IBig::ZERO);
        let len = self.values.len() + other.values.len() - 1;
        let mut out = vec![zero; len];
        for (i, a) in self.values.iter().enumerate() {
            for (j, b) in other.values.iter().enumerate() {
                out[i + j] = out[i + j].plus(&a.times(b));
            }
        }
        DiscreteSignal {
            lo: self.lo + other.lo,
            values: out,
        }
    }
}

/// `D_m` on the grid with step `h`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    m: usize,
    h: Rational,
    precision: usize,
    roots: RootSet,
    scale: BigFloat,
    /// `(1 - q_k)^{2m+1}`.
    numerators: Vec<BigFloat>,
    /// `E_{2m-1}(q_k)`.
    odd_values: Vec<BigFloat>,
    /// `c_k = (1-q_k)^{2m+1} / (q_k E_{2m-1}(q_k))`.
    residues: Vec<BigFloat>,
}

impl DiscreteOperator {
    pub fn new(m: usize, h: Rational, roots: RootSet) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be ≥ 1".into()));
        }
        if roots.m() != m {
            return Err(Error::InvalidArgument(format!(
                "root set is for m = {}, operator needs m = {m}",
                roots.m()
            )));
        }
        if h <= Rational::ZERO {
            return Err(Error::InvalidArgument("h must be positive".into()));
        }
        let precision = roots.precision();
        let odd = ef_by_recurrence(2 * m - 1);
        let one = BigFloat::one(precision);
        let mut numerators = Vec::with_capacity(roots.len());
        let mut odd_values = Vec::with_capacity(roots.len());
        let mut residues = Vec::with_capacity(roots.len());
        for q in roots.roots() {
            let num = (&one - q).powi(2 * m as u64 + 1);
            let e = odd.eval(q);
            residues.push(&num / &(q * &e));
            numerators.push(num);
            odd_values.push(e);
        }
        let scale_exact = Rational::from(factorial(2 * m - 1)) / h.pow((2 * m) as isize);
        Ok(DiscreteOperator {
            m,
            scale: BigFloat::from_rational(&scale_exact, precision),
            h,
            precision,
            roots,
            numerators,
            odd_values,
            residues,
        })
    }

    /// Isolates the roots for `m` and builds `D_m` with `h = 1/n`.
    pub fn for_grid(m: usize, n: u64, precision: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be ≥ 1".into()));
        }
        let roots = isolate_roots(m, precision)?;
        DiscreteOperator::new(m, Rational::from_parts(IBig::ONE, n.into()), roots)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    /// `(1 - q_k)^{2m+1}` per root.
    pub fn root_numerators(&self) -> &[BigFloat] {
        &self.numerators
    }

    /// `E_{2m-1}(q_k)` per root.
    pub fn odd_polynomial_values(&self) -> &[BigFloat] {
        &self.odd_values
    }

    pub fn residues(&self) -> &[BigFloat] {
        &self.residues
    }

    /// `D_m[b]`.
    pub fn value(&self, b: i64) -> BigFloat {
        let n = b.unsigned_abs();
        let p = self.precision;
        let bracket = match n {
            0 => {
                let lead = -BigFloat::from_int(IBig::ONE << (2 * self.m - 1), p);
                self.residues.iter().fold(lead, |acc, c| &acc + c)
            }
            1 => self
                .residues
                .iter()
                .zip(self.roots.roots())
                .fold(BigFloat::one(p), |acc, (c, q)| &acc + &(c * q)),
            _ => self
                .residues
                .iter()
                .zip(self.roots.roots())
                .fold(BigFloat::zero(p), |acc, (c, q)| &acc + &(c * &q.powi(n))),
        };
        &self.scale * &bracket
    }

    /// `D_m[b]` for `|b| <= radius`, index `b + radius`. Powers of `q_k` are
    /// accumulated by repeated multiplication.
    fn values_up_to(&self, radius: u64) -> Vec<BigFloat> {
        let p = self.precision;
        let mut half = Vec::with_capacity(radius as usize + 1);
        half.push(self.value(0));
        if radius >= 1 {
            half.push(self.value(1));
        }
        let mut powers: Vec<BigFloat> = self.roots.roots().to_vec();
        for _ in 2..=radius {
            let mut bracket = BigFloat::zero(p);
            for ((pw, q), c) in powers
                .iter_mut()
                .zip(self.roots.roots())
                .zip(&self.residues)
            {
                *pw = &*pw * q;
                bracket = &bracket + &(c * &*pw);
            }
            half.push(&self.scale * &bracket);
        }
        let mut full: Vec<BigFloat> = half.iter().skip(1).rev().cloned().collect();
        full.extend(half);
        full
    }

    /// Exact rational values; only available for `m = 1`, where `D_1` is the
    /// `(1, -2, 1) / h^2` stencil.
    pub fn exact_value(&self, b: i64) -> Option<Rational> {
        if self.m != 1 {
            return None;
        }
        let inv_h2 = Rational::ONE / self.h.pow(2);
        Some(match b.unsigned_abs() {
            0 => Rational::from(-2) * inv_h2,
            1 => inv_h2,
            _ => Rational::ZERO,
        })
    }

    /// `D_m[b]` on `[-w, w]`.
    pub fn stencil(&self, w: u64) -> DiscreteSignal<BigFloat> {
        DiscreteSignal::new(-(w as i64), self.values_up_to(w))
    }

    /// `max_k |q_k|`.
    pub fn decay_ratio(&self) -> BigFloat {
        self.roots.spectral_radius()
    }

    /// `log2` of an upper bound on `sum_{|b| > t} |D_m[b]| |h b|^power`,
    /// or `None` if the bound is not yet geometric at `t`.
    fn moment_tail_log2(&self, power: usize, t: u64) -> Option<f64> {
        let geo = geometric_tail_log2(self.decay_ratio().to_f64(), power, t)?;
        let residue_sum: f64 = self.residues.iter().map(|c| c.to_f64().abs()).sum();
        let h = self.h.to_f64().value();
        // two sides, scale s, sum |c_k|, h^power, one bit of slack for the
        // f64 evaluation of the bound itself
        Some(1.0 + 1.0 + log2_big(&self.scale) + residue_sum.log2() + power as f64 * h.log2() + geo)
    }

    /// Smallest `t` for which the tail of the `power`-th moment is below
    /// `2^-precision`.
    pub fn truncation_length(&self, power: usize) -> u64 {
        if self.roots.is_empty() {
            return 1;
        }
        let target = -(self.precision as f64);
        let mut t = 2u64;
        loop {
            if let Some(bound) = self.moment_tail_log2(power, t) {
                if bound < target {
                    return t;
                }
            }
            t += 1;
        }
    }

    /// `sum_b D_m[b] (h b)^k` over the certified truncation window.
    pub fn moment(&self, k: usize) -> MomentCheck {
        let t = self.truncation_length(k);
        let values = self.values_up_to(t);
        self.moment_from_values(k, t, &values)
    }

    /// Checks every moment `0..=4m` against its closed form, sharing one
    /// window of operator values.
    pub fn moments(&self) -> Vec<MomentCheck> {
        let max_k = 4 * self.m;
        let t = self.truncation_length(max_k);
        let values = self.values_up_to(t);
        (0..=max_k)
            .map(|k| self.moment_from_values(k, t, &values))
            .collect()
    }

    fn moment_from_values(&self, k: usize, t: u64, values: &[BigFloat]) -> MomentCheck {
        let p = self.precision;
        let mut sum = BigFloat::zero(p);
        for (idx, d) in values.iter().enumerate() {
            let b = idx as i64 - t as i64;
            if b == 0 && k > 0 {
                continue;
            }
            let x = (&self.h * Rational::from(b)).pow((k) as isize);
            sum = &sum + &(d * &BigFloat::from_rational(&x, p));
        }
        let expected = expected_moment(self.m, k, &self.h).unwrap_or(Rational::ZERO);
        let residual = (&sum - &BigFloat::from_rational(&expected, p)).abs();
        let tail_bound = if self.roots.is_empty() {
            BigFloat::zero(p)
        } else {
            bound_from_log2(self.moment_tail_log2(k, t).unwrap_or(f64::INFINITY), p)
        };
        MomentCheck {
            k,
            terms: t,
            computed: sum,
            expected,
            residual,
            tail_bound,
        }
    }

    /// `[D_m, (h b)^{2m}]` through the non-truncated closed form used for
    /// `D_m`'s even moment:
    /// `2 (2m-1)! (1 + sum_k c_k sum_{b>=1} q_k^b b^{2m})`, the inner series
    /// summed exactly by the finite-difference formula. Independent of `h`.
    pub fn even_moment_closed_form(&self) -> BigFloat {
        let p = self.precision;
        let mut acc = BigFloat::one(p);
        for (c, q) in self.residues.iter().zip(self.roots.roots()) {
            acc = &acc + &(c * &geometric_power_series(q, 2 * self.m));
        }
        &BigFloat::from_int(IBig::from(2) * IBig::from(factorial(2 * self.m - 1)), p) * &acc
    }
}

/// Expected `sum_b D_m[b] (h b)^k` for `0 <= k <= 4m`: zero except
/// `(2m)!` at `k = 2m` and `h^{2m} (4m)! B_{2m} / (2m)!` at `k = 4m`.
pub fn expected_moment(m: usize, k: usize, h: &Rational) -> Option<Rational> {
    if k > 4 * m {
        return None;
    }
    Some(if k == 2 * m {
        Rational::from(factorial(2 * m))
    } else if k == 4 * m {
        h.pow((2 * m) as isize) * Rational::from(factorial(4 * m)) * bernoulli(2 * m)
            / Rational::from(factorial(2 * m))
    } else {
        Rational::ZERO
    })
}

#[derive(Clone, Debug)]
pub struct MomentCheck {
    pub k: usize,
    /// Truncation half-width: the sum runs over `|b| <= terms`.
    pub terms: u64,
    pub computed: BigFloat,
    pub expected: Rational,
    pub residual: BigFloat,
    pub tail_bound: BigFloat,
}

impl MomentCheck {
    /// `|computed - expected|` plus the truncation tail bound.
    pub fn certified_residual(&self) -> BigFloat {
        &self.residual + &self.tail_bound
    }
}

#[derive(Clone, Debug)]
pub struct InverseCheck {
    pub window: u64,
    /// Convolution terms run over `|g| <= gamma_range`.
    pub gamma_range: u64,
    pub max_residual: BigFloat,
    pub tail_bound: BigFloat,
}

impl InverseCheck {
    pub fn certified_residual(&self) -> BigFloat {
        &self.max_residual + &self.tail_bound
    }
}

/// Residual of `h D_m * G_{m,1} = δ` on `|b| <= window`. The convolution
/// runs over `|g| <= window + T`, where `T` makes the neglected tail smaller
/// than `2^-precision`; for `m = 1` the computation is exact.
pub fn verify_inverse(op: &DiscreteOperator, window: u64) -> Result<InverseCheck> {
    let m = op.m as u64;
    if window < 2 * m {
        return Err(Error::InvalidArgument(format!(
            "inverse check needs window ≥ 2m = {}, got {window}",
            2 * m
        )));
    }
    if op.m == 1 {
        return Ok(verify_inverse_exact(op, window));
    }
    let target = -(op.precision as f64);
    let mut extra = 2 * m;
    let tail = loop {
        if let Some(bound) = inverse_tail_log2(op, window + extra) {
            if bound < target {
                break bound;
            }
        }
        extra += 1;
    };
    let mut check = verify_inverse_with_range(op, window, window + extra);
    check.tail_bound = bound_from_log2(tail, op.precision);
    Ok(check)
}

/// Same residual with the convolution cut at `|g| <= gamma_range`; no tail
/// bound is attached. Useful for watching the truncation error itself.
pub fn verify_inverse_with_range(
    op: &DiscreteOperator,
    window: u64,
    gamma_range: u64,
) -> InverseCheck {
    let p = op.precision;
    let d = op.values_up_to(gamma_range);
    let max_lag = window + gamma_range;
    let g: Vec<BigFloat> = (0..=max_lag)
        .map(|lag| {
            let x = &op.h * Rational::from(lag);
            BigFloat::from_rational(&g_kernel(op.m, &x), p)
        })
        .collect();
    let h = BigFloat::from_rational(&op.h, p);
    let one = BigFloat::one(p);
    let mut worst = BigFloat::zero(p);
    for b in -(window as i64)..=(window as i64) {
        let mut acc = BigFloat::zero(p);
        for (idx, dv) in d.iter().enumerate() {
            let gamma = idx as i64 - gamma_range as i64;
            let lag = (b - gamma).unsigned_abs() as usize;
            acc = &acc + &(dv * &g[lag]);
        }
        let mut r = &h * &acc;
        if b == 0 {
            r = &r - &one;
        }
        worst = worst.max(r.abs());
    }
    InverseCheck {
        window,
        gamma_range,
        max_residual: worst,
        tail_bound: BigFloat::zero(p),
    }
}

fn verify_inverse_exact(op: &DiscreteOperator, window: u64) -> InverseCheck {
    let reach = window as i64 + 2;
    let stencil = DiscreteSignal::new(
        -1,
        (-1..=1)
            .map(|b| op.exact_value(b).expect("m = 1"))
            .collect(),
    );
    let kernel = DiscreteSignal::new(
        -reach,
        (-reach..=reach)
            .map(|b| g_kernel(1, &(&op.h * Rational::from(b))))
            .collect(),
    );
    let conv = stencil.convolve(&kernel);
    let mut worst = Rational::ZERO;
    for b in -(window as i64)..=(window as i64) {
        let mut r = &op.h * conv.get(b).expect("inside support");
        if b == 0 {
            r -= Rational::ONE;
        }
        let r = if r < Rational::ZERO { -r } else { r };
        if r > worst {
            worst = r;
        }
    }
    InverseCheck {
        window,
        gamma_range: 1,
        max_residual: BigFloat::from_rational(&worst, op.precision),
        tail_bound: BigFloat::zero(op.precision),
    }
}

/// `log2` bound on `h sum_{|g| > range} |D_m[g]| |G(h (b - g))|`, `|b| <= window`.
fn inverse_tail_log2(op: &DiscreteOperator, range: u64) -> Option<f64> {
    let deg = 2 * op.m - 1;
    // |b - g| <= g + window <= 2g for g > range >= window
    let geo = geometric_tail_log2(op.decay_ratio().to_f64(), deg, range)?;
    let residue_sum: f64 = op.residues.iter().map(|c| c.to_f64().abs()).sum();
    let h = op.h.to_f64().value();
    let kernel_coeff = (deg as f64) + (deg as f64) * h.log2()
        - 1.0
        - log2_big(&BigFloat::from_int(IBig::from(factorial(deg)), 64));
    Some(1.0 + 1.0 + h.log2() + log2_big(&op.scale) + residue_sum.log2() + kernel_coeff + geo)
}

/// `log2` of an upper bound on `sum_{b > t} rho^b b^k`, valid once the term
/// ratio `rho (1 + 1/(t+1))^k` is below one.
fn geometric_tail_log2(rho: f64, k: usize, t: u64) -> Option<f64> {
    if rho <= 0.0 {
        return Some(f64::NEG_INFINITY);
    }
    let first = (t + 1) as f64;
    let ratio = rho * (1.0 + 1.0 / first).powi(k as i32);
    if ratio >= 1.0 {
        return None;
    }
    Some((first * rho.log2()) + (k as f64) * first.log2() - (1.0 - ratio).log2())
}

fn log2_big(x: &BigFloat) -> f64 {
    x.log2_abs()
}

/// `2^ceil(log2)` as a BigFloat: an upper bound that survives f64 underflow.
fn bound_from_log2(log2: f64, precision: usize) -> BigFloat {
    if log2 == f64::NEG_INFINITY {
        return BigFloat::zero(precision);
    }
    assert!(log2.is_finite(), "tail bound is not finite");
    BigFloat::from_parts(IBig::ONE, log2.ceil() as isize, precision)
}
