//! Exact solution of the full Sobolev system for the optimal weights:
//!
//! ```text
//! sum_g C[g] G(h b - h g) + sum_a l_a (h b)^a = f_m(h b),   b = 0..N
//! sum_g C[g] (h g)^a = 1/(a+1),                             a = 0..m-1
//! ```
//!
//! solved in rational arithmetic by fraction-free (Bareiss) elimination. The
//! weights it returns are the reference every floating-point rule is judged
//! against.

use std::path::Path;
use std::str::FromStr;

use dashu::integer::{IBig, UBig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{BigFloat, Rational};
use crate::operator::{f_rhs, g_kernel};
use crate::weights::QuadratureRule;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub m: usize,
    pub n: u64,
    pub weights: Vec<Rational>,
    /// Coefficients `l_0..l_{m-1}` of the polynomial part.
    pub multipliers: Vec<Rational>,
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

/// Rows of the system as `(coefficients, right-hand side)`, unknowns ordered
/// `C[0..=N]` then `l_0..l_{m-1}`.
fn assemble(m: usize, n: u64) -> Result<Vec<(Vec<Rational>, Rational)>> {
    let h = Rational::from_parts(IBig::ONE, UBig::from(n));
    let size = n as usize + 1 + m;
    let mut rows = Vec::with_capacity(size);
    let kernel: Vec<Rational> = (0..=n)
        .map(|lag| g_kernel(m, &(&h * Rational::from(lag))))
        .collect();
    for b in 0..=n {
        let x = &h * Rational::from(b);
        let mut row = Vec::with_capacity(size);
        for g in 0..=n {
            row.push(kernel[b.abs_diff(g) as usize].clone());
        }
        for a in 0..m {
            row.push(x.pow(a as isize));
        }
        let rhs = f_rhs(m, &x).map_err(|e| Error::OracleAssembly(e.to_string()))?;
        rows.push((row, rhs));
    }
    for a in 0..m {
        let mut row = Vec::with_capacity(size);
        for g in 0..=n {
            row.push((&h * Rational::from(g)).pow(a as isize));
        }
        row.extend(std::iter::repeat_n(Rational::ZERO, m));
        rows.push((
            row,
            Rational::from_parts(IBig::ONE, UBig::from(a as u64 + 1)),
        ));
    }
    Ok(rows)
}

fn lcm(a: &UBig, b: &UBig) -> UBig {
    use dashu::base::Gcd;
    a / a.gcd(b) * b
}

/// Clears denominators: each row times the lcm of its denominators.
fn integer_row(coeffs: &[Rational], rhs: &Rational) -> Vec<IBig> {
    let mut scale = UBig::ONE;
    for r in coeffs.iter().chain(std::iter::once(rhs)) {
        scale = lcm(&scale, r.denominator());
    }
    let scale = IBig::from(scale);
    coeffs
        .iter()
        .chain(std::iter::once(rhs))
        .map(|r| {
            let (num, den) = r.clone().into_parts();
            num * (&scale / IBig::from(den))
        })
        .collect()
}

/// Solves a square integer system (last column is the right-hand side) by
/// Bareiss elimination with row pivoting and rational back-substitution.
fn bareiss_solve(mut a: Vec<Vec<IBig>>) -> Result<Vec<Rational>> {
    let n = a.len();
    let mut prev = IBig::ONE;
    for k in 0..n {
        let pivot = (k..n)
            .find(|&i| a[i][k] != IBig::ZERO)
            .ok_or_else(|| Error::OracleAssembly(format!("system is singular at column {k}")))?;
        a.swap(k, pivot);
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..=n {
                let v = &row[j] * &pivot_row[k] - &lead * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = IBig::ZERO;
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![Rational::ZERO; n];
    for i in (0..n).rev() {
        let mut acc = Rational::from(a[i][n].clone());
        for j in i + 1..n {
            if a[i][j] != IBig::ZERO {
                acc -= Rational::from(a[i][j].clone()) * &x[j];
            }
        }
        x[i] = acc / Rational::from(a[i][i].clone());
    }
    Ok(x)
}

/// Solves the system exactly and verifies the solution by substitution.
pub fn solve_sobolev_system(m: usize, n: u64) -> Result<OracleSolution> {
    check_args(m, n)?;
    let rows = assemble(m, n)?;
    let matrix: Vec<Vec<IBig>> = rows.iter().map(|(c, r)| integer_row(c, r)).collect();
    let x = bareiss_solve(matrix)?;
    for (i, (coeffs, rhs)) in rows.iter().enumerate() {
        let lhs = coeffs
            .iter()
            .zip(&x)
            .fold(Rational::ZERO, |acc, (c, v)| acc + c * v);
        if &lhs != rhs {
            return Err(Error::OracleAssembly(format!(
                "substitution check failed in row {i}"
            )));
        }
    }
    let split = n as usize + 1;
    Ok(OracleSolution {
        m,
        n,
        weights: x[..split].to_vec(),
        multipliers: x[split..].to_vec(),
    })
}

impl OracleSolution {
    /// Exact residuals of every equation; all zero for a valid solution.
    pub fn residuals(&self) -> Result<Vec<Rational>> {
        let rows = assemble(self.m, self.n)?;
        let x: Vec<&Rational> = self.weights.iter().chain(&self.multipliers).collect();
        if x.len() != rows[0].0.len() {
            return Err(Error::DimensionMismatch {
                expected: rows[0].0.len(),
                found: x.len(),
            });
        }
        Ok(rows
            .iter()
            .map(|(coeffs, rhs)| {
                coeffs
                    .iter()
                    .zip(&x)
                    .fold(-rhs.clone(), |acc, (c, v)| acc + c * *v)
            })
            .collect())
    }

    pub fn to_golden(&self) -> GoldenFile {
        GoldenFile {
            m: self.m,
            n: self.n,
            weights: self.weights.iter().map(format_rational).collect(),
            multipliers: self.multipliers.iter().map(format_rational).collect(),
        }
    }

    pub fn from_golden(golden: &GoldenFile) -> Result<Self> {
        let parse = |v: &[String]| -> Result<Vec<Rational>> {
            v.iter().map(|s| parse_rational(s)).collect()
        };
        let weights = parse(&golden.weights)?;
        if weights.len() as u64 != golden.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: golden.n as usize + 1,
                found: weights.len(),
            });
        }
        Ok(OracleSolution {
            m: golden.m,
            n: golden.n,
            weights,
            multipliers: parse(&golden.multipliers)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_golden()).expect("golden file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let golden: GoldenFile =
            serde_json::from_str(text).map_err(|e| Error::Golden(e.to_string()))?;
        Self::from_golden(&golden)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Golden(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// On-disk form of an oracle solution; every rational is `"num/den"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub weights: Vec<String>,
    pub multipliers: Vec<String>,
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numerator(), r.denominator())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Golden(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num = IBig::from_str(num).map_err(|_| bad())?;
    let den = UBig::from_str(den).map_err(|_| bad())?;
    if den == UBig::ZERO {
        return Err(bad());
    }
    Ok(Rational::from_parts(num, den))
}

/// `max_b |C_rule[b] - C_oracle[b]| / h`.
pub fn compare(rule: &QuadratureRule, oracle: &OracleSolution) -> Result<BigFloat> {
    if rule.m() != oracle.m || rule.n() != oracle.n {
        return Err(Error::DimensionMismatch {
            expected: oracle.weights.len(),
            found: rule.weights().len(),
        });
    }
    let p = rule.precision();
    let inv_h = BigFloat::from_int(rule.n(), p);
    let mut worst = BigFloat::zero(p);
    for (c, exact) in rule.weights().iter().zip(&oracle.weights) {
        let diff = (c - &BigFloat::from_rational(exact, p)).abs();
        worst = worst.max(diff);
    }
    Ok(&worst * &inv_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational;

    #[test]
    fn trapezoid_for_m_one() {
        let sol = solve_sobolev_system(1, 2).unwrap();
        assert_eq!(
            sol.weights,
            vec![rational(1, 4), rational(1, 2), rational(1, 4)]
        );
        let sol = solve_sobolev_system(1, 5).unwrap();
        assert_eq!(sol.weights[0], rational(1, 10));
        assert_eq!(sol.weights[3], rational(1, 5));
    }

    #[test]
    fn solutions_are_symmetric_and_exact() {
        for m in 1..=4 {
            for n in [m as u64, m as u64 + 1, 2 * m as u64 + 3] {
                let sol = solve_sobolev_system(m, n).unwrap();
                let w = &sol.weights;
                for b in 0..w.len() {
                    assert_eq!(w[b], w[w.len() - 1 - b], "m={m} n={n} b={b}");
                }
                assert!(sol
                    .residuals()
                    .unwrap()
                    .iter()
                    .all(|r| r == &Rational::ZERO));
                let h = rational(1, n as i64);
                for a in 0..m {
                    let moment = w.iter().enumerate().fold(Rational::ZERO, |acc, (g, c)| {
                        acc + c * (&h * Rational::from(g)).pow(a as isize)
                    });
                    assert_eq!(moment, rational(1, a as i64 + 1));
                }
            }
        }
    }

    #[test]
    fn argument_checks() {
        assert!(matches!(
            solve_sobolev_system(0, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            solve_sobolev_system(3, 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn golden_roundtrip() {
        let sol = solve_sobolev_system(2, 5).unwrap();
        let text = sol.to_json();
        assert!(text.contains("\"N\": 5"));
        assert_eq!(OracleSolution::from_json(&text).unwrap(), sol);
        assert!(OracleSolution::from_json("{\"m\":1}").is_err());
    }

    #[test]
    fn rational_text_format() {
        assert_eq!(format_rational(&rational(-3, 6)), "-1/2");
        assert_eq!(format_rational(&Rational::from(4)), "4/1");
        assert_eq!(parse_rational("-1/2").unwrap(), rational(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), Rational::from(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
