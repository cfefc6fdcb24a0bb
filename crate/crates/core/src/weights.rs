//! Optimal weights `C[0..=N]` of the closed rule `sum_b C[b] f(h b)` in
//! `L_2^(m)(0, 1)`.
//!
//! The weights are `h` in the interior, deformed near both ends by a boundary
//! layer `d_k q_k^b` built from the roots `q_k` of `E_{2m-2}`:
//!
//! ```text
//! C[0] = C[N] = h (1/2 - sum_k d_k (q_k - q_k^N) / (1 - q_k))
//! C[b]        = h (1 + sum_k d_k (q_k^b + q_k^{N-b})),      0 < b < N
//! ```
//!
//! The `d_k` solve an `(m-1) x (m-1)` system whose rows are the moment
//! conditions `j = 1..m-1`.

use dashu::integer::IBig;

use crate::error::{Error, Result};
use crate::euler_frobenius::{isolate_roots, RootSet};
use crate::numerics::{BernoulliTable, BigFloat, FiniteDifferenceTable, Rational};
use crate::operator::{f_rhs, g_kernel};

/// Highest precision the automatic retry in [`build_rule`] will reach.
pub const MAX_PRECISION: usize = 4096;

#[derive(Clone, Debug)]
pub struct BoundaryLayerSolution {
    pub m: usize,
    pub n: u64,
    pub d: Vec<BigFloat>,
    /// Infinity-norm condition number of the system; one for `m = 1`.
    pub condition: BigFloat,
}

fn check_args(m: usize, n: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be ≥ 1".into()));
    }
    if n < m as u64 {
        return Err(Error::InvalidArgument(format!(
            "N must be ≥ m = {m}, got {n}"
        )));
    }
    Ok(())
}

/// Solves for `d_1..d_{m-1}`:
///
/// ```text
/// sum_k d_k sum_{i=1}^{j} (q_k + (-1)^{i+1} q_k^{N+i}) / (q_k - 1)^{i+1} Δ^i 0^j
///     = B_{j+1} / (j+1),        j = 1..m-1
/// ```
pub fn solve_boundary_layer(
    m: usize,
    n: u64,
    roots: &RootSet,
    precision: usize,
) -> Result<BoundaryLayerSolution> {
    check_args(m, n)?;
    if roots.m() != m {
        return Err(Error::InvalidArgument(format!(
            "root set is for m = {}, need m = {m}",
            roots.m()
        )));
    }
    let p = precision;
    let size = m - 1;
    if size == 0 {
        return Ok(BoundaryLayerSolution {
            m,
            n,
            d: Vec::new(),
            condition: BigFloat::one(p),
        });
    }
    let deltas = FiniteDifferenceTable::new(size);
    let bern = BernoulliTable::new(m);
    let one = BigFloat::one(p);
    let mut a = vec![vec![BigFloat::zero(p); size]; size];
    for (k, q) in roots.roots().iter().enumerate() {
        let q = q.with_precision(p);
        let q_minus_1 = &q - &one;
        let mut q_pow = q.powi(n);
        let mut denom = q_minus_1.clone();
        // term_i = (q + (-1)^{i+1} q^{N+i}) / (q-1)^{i+1}
        let mut terms = Vec::with_capacity(size);
        for i in 1..=size {
            q_pow = &q_pow * &q;
            denom = &denom * &q_minus_1;
            let top = if i % 2 == 1 { &q + &q_pow } else { &q - &q_pow };
            terms.push(&top / &denom);
        }
        for j in 1..=size {
            let mut entry = BigFloat::zero(p);
            for i in 1..=j {
                let dp = deltas.get(i, j);
                if dp != &IBig::ZERO {
                    entry = &entry + &(&terms[i - 1] * &BigFloat::from_int(dp.clone(), p));
                }
            }
            a[j - 1][k] = entry;
        }
    }
    let rhs: Vec<BigFloat> = (1..=size)
        .map(|j| {
            let v = bern.get(j + 1) / Rational::from(j as u64 + 1);
            BigFloat::from_rational(&v, p)
        })
        .collect();
    let lu = FullPivotLu::factor(a.clone(), p)?;
    let d = lu.solve(&rhs);
    let condition = &inf_norm(&a) * &inf_norm(&lu.inverse());
    Ok(BoundaryLayerSolution { m, n, d, condition })
}

fn inf_norm(a: &[Vec<BigFloat>]) -> BigFloat {
    let p = a[0][0].precision();
    a.iter()
        .map(|row| row.iter().fold(BigFloat::zero(p), |acc, x| &acc + &x.abs()))
        .fold(BigFloat::zero(p), BigFloat::max)
}

/// `P A Q = L U` with complete pivoting.
struct FullPivotLu {
    lu: Vec<Vec<BigFloat>>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl FullPivotLu {
    fn factor(mut a: Vec<Vec<BigFloat>>, precision: usize) -> Result<Self> {
        let n = a.len();
        let scale = inf_norm(&a);
        // a pivot this far below the matrix scale means the working
        // precision cannot separate it from zero
        let tiny = &scale * &BigFloat::from_parts(IBig::ONE, -(precision as isize / 2), precision);
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut pi, mut pj) = (k, k);
            let mut best = a[k][k].abs();
            for (i, row) in a.iter().enumerate().skip(k) {
                for (j, v) in row.iter().enumerate().skip(k) {
                    let v = v.abs();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if best.is_zero() || best <= tiny {
                return Err(Error::SingularSystem { precision });
            }
            a.swap(k, pi);
            rows.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            cols.swap(k, pj);
            for i in k + 1..n {
                let factor = &a[i][k] / &a[k][k];
                for j in k + 1..n {
                    let v = &a[i][j] - &(&factor * &a[k][j]);
                    a[i][j] = v;
                }
                a[i][k] = factor;
            }
        }
        Ok(FullPivotLu { lu: a, rows, cols })
    }

    fn solve(&self, b: &[BigFloat]) -> Vec<BigFloat> {
        let n = self.lu.len();
        let mut y: Vec<BigFloat> = self.rows.iter().map(|&r| b[r].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = &y[i] - &(&self.lu[i][j] * &y[j]);
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = &y[i] - &(&self.lu[i][j] * &y[j]);
            }
            y[i] = &y[i] / &self.lu[i][i];
        }
        let mut x = y.clone();
        for (k, &c) in self.cols.iter().enumerate() {
            x[c] = y[k].clone();
        }
        x
    }

    fn inverse(&self) -> Vec<Vec<BigFloat>> {
        let n = self.lu.len();
        let p = self.lu[0][0].precision();
        let mut inv = vec![vec![BigFloat::zero(p); n]; n];
        for c in 0..n {
            let mut e = vec![BigFloat::zero(p); n];
            e[c] = BigFloat::one(p);
            for (r, v) in self.solve(&e).into_iter().enumerate() {
                inv[r][c] = v;
            }
        }
        inv
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    m: usize,
    n: u64,
    h: Rational,
    weights: Vec<BigFloat>,
    roots: RootSet,
    boundary: BoundaryLayerSolution,
}

impl QuadratureRule {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    pub fn precision(&self) -> usize {
        self.roots.precision()
    }

    pub fn weights(&self) -> &[BigFloat] {
        &self.weights
    }

    /// `C[b]`, zero outside `[0, N]`.
    pub fn weight(&self, b: i64) -> BigFloat {
        if b < 0 || b as u64 > self.n {
            BigFloat::zero(self.precision())
        } else {
            self.weights[b as usize].clone()
        }
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(BigFloat::to_f64).collect()
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn boundary(&self) -> &BoundaryLayerSolution {
        &self.boundary
    }

    pub fn d(&self) -> &[BigFloat] {
        &self.boundary.d
    }

    /// Same rule with one weight replaced; for sensitivity experiments.
    pub fn with_weight(&self, b: usize, value: BigFloat) -> Self {
        let mut out = self.clone();
        out.weights[b] = value;
        out
    }
}

/// Assembles the weights from a boundary-layer solution. Only `b <= N/2` is
/// evaluated; the other half is its mirror image.
pub fn assemble_rule(
    roots: RootSet,
    boundary: BoundaryLayerSolution,
    precision: usize,
) -> QuadratureRule {
    let m = boundary.m;
    let n = boundary.n;
    let p = precision;
    let h = Rational::from_parts(IBig::ONE, n.into());
    let h_big = BigFloat::from_rational(&h, p);
    let one = BigFloat::one(p);
    let qs: Vec<BigFloat> = roots.roots().iter().map(|q| q.with_precision(p)).collect();
    let half = (n / 2) as usize;
    let mut weights = Vec::with_capacity(n as usize + 1);

    let mut end = BigFloat::from_rational(&Rational::from_parts(IBig::ONE, 2u8.into()), p);
    for (q, d) in qs.iter().zip(&boundary.d) {
        let frac = &(q - &q.powi(n)) / &(&one - q);
        end = &end - &(d * &frac);
    }
    weights.push(&h_big * &end);
    for b in 1..=half as u64 {
        let mut bracket = one.clone();
        for (q, d) in qs.iter().zip(&boundary.d) {
            bracket = &bracket + &(d * &(&q.powi(b) + &q.powi(n - b)));
        }
        weights.push(&h_big * &bracket);
    }
    while weights.len() <= n as usize {
        let mirror = n as usize - weights.len();
        weights.push(weights[mirror].clone());
    }
    QuadratureRule {
        m,
        n,
        h,
        weights,
        roots,
        boundary,
    }
}

/// The optimal rule for `(m, N)`. A boundary-layer system that is singular at
/// the working precision is retried at doubled precision up to
/// [`MAX_PRECISION`].
pub fn build_rule(m: usize, n: u64, precision: usize) -> Result<QuadratureRule> {
    check_args(m, n)?;
    if precision < 2 {
        return Err(Error::InvalidArgument(
            "precision must be at least 2 bits".into(),
        ));
    }
    let mut p = precision;
    loop {
        let roots = isolate_roots(m, p)?;
        match solve_boundary_layer(m, n, &roots, p) {
            Ok(boundary) => return Ok(assemble_rule(roots, boundary, p)),
            Err(Error::SingularSystem { .. }) if p < MAX_PRECISION => {
                p = (2 * p).min(MAX_PRECISION)
            }
            Err(e) => return Err(e),
        }
    }
}

/// `|sum_b C[b] (h b)^a - 1/(a+1)|` for `a = 0..m-1`.
pub fn validate_moments(rule: &QuadratureRule) -> Vec<BigFloat> {
    let p = rule.precision();
    (0..rule.m)
        .map(|a| {
            let mut sum = BigFloat::zero(p);
            for (b, c) in rule.weights.iter().enumerate() {
                let x = (&rule.h * Rational::from(b)).pow(a as isize);
                sum = &sum + &(c * &BigFloat::from_rational(&x, p));
            }
            let exact = Rational::from_parts(IBig::ONE, (a as u64 + 1).into());
            (&sum - &BigFloat::from_rational(&exact, p)).abs()
        })
        .collect()
}

/// `max_b |Δ^m r[b]| / h^{2m-1}` with `r[b] = f_m(h b) - sum_g C[g] G(h b - h g)`.
///
/// `r` is a polynomial of degree `< m` on the grid exactly when the rule is
/// optimal, so the m-th differences vanish. Dividing by `h^{2m-1}` measures
/// them in units of the kernel at integer lags, which keeps the quantity
/// comparable across `N`.
pub fn optimality_residual(rule: &QuadratureRule) -> Result<BigFloat> {
    let m = rule.m;
    let n = rule.n;
    if n < 2 * m as u64 {
        return Err(Error::InvalidArgument(format!(
            "optimality residual needs N ≥ 2m = {}, got N = {n}",
            2 * m
        )));
    }
    let p = rule.precision();
    let kernel: Vec<BigFloat> = (0..=n)
        .map(|lag| BigFloat::from_rational(&g_kernel(m, &(&rule.h * Rational::from(lag))), p))
        .collect();
    let mut r = Vec::with_capacity(n as usize + 1);
    for b in 0..=n {
        let mut g = BigFloat::zero(p);
        for (gamma, c) in rule.weights.iter().enumerate() {
            g = &g + &(c * &kernel[b.abs_diff(gamma as u64) as usize]);
        }
        let f = f_rhs(m, &(&rule.h * Rational::from(b)))?;
        r.push(&BigFloat::from_rational(&f, p) - &g);
    }
    for _ in 0..m {
        r = r.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    let worst = r
        .into_iter()
        .map(|x| x.abs())
        .fold(BigFloat::zero(p), BigFloat::max);
    let unit = BigFloat::from_rational(&rule.h.pow((2 * m - 1) as isize), p);
    Ok(&worst / &unit)
}
