//! Applying rules to integrands: single integrals, convergence studies and
//! comparison with the trapezoid and Simpson rules.
//!
//! Integrands are evaluated in `f64`; the weighted sum is accumulated in
//! `BigFloat` at the rule's precision.

use std::fmt;
use std::sync::Arc;

use dashu::integer::IBig;

use crate::error::{Error, Result};
use crate::numerics::{BigFloat, Rational};
use crate::weights::{build_rule, QuadratureRule};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function on `[0, 1]` with its exact integral.
#[derive(Clone)]
pub struct Integrand {
    id: String,
    evaluator: Evaluator,
    exact: f64,
    exact_rational: Option<Rational>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("id", &self.id)
            .field("exact", &self.exact)
            .finish()
    }
}

impl Integrand {
    pub fn new(
        id: impl Into<String>,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exact: f64,
    ) -> Self {
        Integrand {
            id: id.into(),
            evaluator: Arc::new(evaluator),
            exact,
            exact_rational: None,
        }
    }

    /// An integrand whose integral is a known rational.
    pub fn with_rational(
        id: impl Into<String>,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exact: Rational,
    ) -> Self {
        Integrand {
            id: id.into(),
            evaluator: Arc::new(evaluator),
            exact: exact.to_f64().value(),
            exact_rational: Some(exact),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn exact(&self) -> f64 {
        self.exact
    }

    pub fn exact_rational(&self) -> Option<&Rational> {
        self.exact_rational.as_ref()
    }

    fn exact_big(&self, precision: usize) -> BigFloat {
        match &self.exact_rational {
            Some(r) => BigFloat::from_rational(r, precision),
            None => BigFloat::from_f64(self.exact, precision),
        }
    }

    /// `a f + b g`.
    pub fn combine(a: f64, f: &Integrand, b: f64, g: &Integrand) -> Integrand {
        let (ff, gg) = (f.evaluator.clone(), g.evaluator.clone());
        Integrand::new(
            format!("{a}*{}+{b}*{}", f.id, g.id),
            move |x| a * ff(x) + b * gg(x),
            a * f.exact + b * g.exact,
        )
    }
}

fn monomial(k: u32) -> Integrand {
    Integrand::with_rational(
        format!("poly{k}"),
        move |x| x.powi(k as i32),
        Rational::from_parts(IBig::ONE, (k as u64 + 1).into()),
    )
}

/// The built-in corpus: `x^k` (`poly0`..`poly8`) and eleven smooth
/// transcendental functions.
pub fn corpus() -> Vec<Integrand> {
    use std::f64::consts::{E, PI};
    let mut out: Vec<Integrand> = (0..=8).map(monomial).collect();
    out.extend([
        Integrand::new("exp", f64::exp, E - 1.0),
        Integrand::new("sin_pi", |x: f64| (PI * x).sin(), 2.0 / PI),
        Integrand::new("inv1p", |x: f64| 1.0 / (1.0 + x), std::f64::consts::LN_2),
        Integrand::new("cos_pi2", |x: f64| (PI * x / 2.0).cos(), 2.0 / PI),
        Integrand::new("exp_neg", |x: f64| (-x).exp(), 1.0 - 1.0 / E),
        Integrand::new("exp2x", |x: f64| (2.0 * x).exp(), (E * E - 1.0) / 2.0),
        Integrand::new(
            "sqrt1p",
            |x: f64| (1.0 + x).sqrt(),
            (2.0 / 3.0) * (2f64.powf(1.5) - 1.0),
        ),
        Integrand::new("inv1px2", |x: f64| 1.0 / (1.0 + x * x), PI / 4.0),
        Integrand::new("xexp", |x: f64| x * x.exp(), 1.0),
        Integrand::new("sin", f64::sin, 1.0 - 1f64.cos()),
        Integrand::new("cos", f64::cos, 1f64.sin()),
    ]);
    out
}

pub fn integrand_by_id(id: &str) -> Option<Integrand> {
    corpus().into_iter().find(|f| f.id == id)
}

fn weighted_sum(weights: &[BigFloat], n: u64, f: &Integrand) -> BigFloat {
    let p = weights[0].precision();
    weights
        .iter()
        .enumerate()
        .fold(BigFloat::zero(p), |acc, (b, c)| {
            let x = b as f64 / n as f64;
            &acc + &(c * &BigFloat::from_f64(f.eval(x), p))
        })
}

/// `sum_b C[b] f(h b)`.
pub fn integrate(rule: &QuadratureRule, f: &Integrand) -> BigFloat {
    weighted_sum(rule.weights(), rule.n(), f)
}

pub fn integration_error(rule: &QuadratureRule, f: &Integrand) -> f64 {
    let p = rule.precision();
    (&integrate(rule, f) - &f.exact_big(p)).abs().to_f64()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub error: f64,
    /// `log(e_prev / e) / log(N / N_prev)` against the previous row;
    /// `log2(e_N / e_2N)` when N doubles.
    pub observed_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub m: usize,
    pub integrand: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Header `N,error,observed_order`; the order cell is empty on the first
    /// row and whenever an error is zero.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,error,observed_order\n");
        for row in &self.rows {
            let order = row
                .observed_order
                .map(|o| format!("{o:.6}"))
                .unwrap_or_default();
            out.push_str(&format!("{},{:.12e},{}\n", row.n, row.error, order));
        }
        out
    }

    pub fn errors_strictly_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

pub fn convergence_study(
    m: usize,
    f: &Integrand,
    ns: &[u64],
    precision: usize,
) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("need at least one N".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "N values must be strictly increasing".into(),
        ));
    }
    let floor = (m as u64).max(2);
    if let Some(bad) = ns.iter().find(|&&n| n < floor) {
        return Err(Error::InvalidArgument(format!(
            "N must be ≥ max(m, 2) = {floor}, got {bad}"
        )));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let rule = build_rule(m, n, precision)?;
        let error = integration_error(&rule, f);
        let observed_order = rows.last().and_then(|prev| {
            if prev.error > 0.0 && error > 0.0 {
                Some((prev.error / error).ln() / (n as f64 / prev.n as f64).ln())
            } else {
                None
            }
        });
        rows.push(ConvergenceRow {
            n,
            error,
            observed_order,
        });
    }
    Ok(ConvergenceReport {
        m,
        integrand: f.id.clone(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineRow {
    pub rule: String,
    pub error: f64,
}

fn classical_weights(n: u64, pattern: impl Fn(u64) -> Rational, precision: usize) -> Vec<BigFloat> {
    (0..=n)
        .map(|b| BigFloat::from_rational(&pattern(b), precision))
        .collect()
}

pub fn trapezoid_weights(n: u64, precision: usize) -> Vec<BigFloat> {
    let h = Rational::from_parts(IBig::ONE, n.into());
    classical_weights(
        n,
        |b| {
            if b == 0 || b == n {
                &h / Rational::from(2)
            } else {
                h.clone()
            }
        },
        precision,
    )
}

pub fn simpson_weights(n: u64, precision: usize) -> Result<Vec<BigFloat>> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "Simpson's rule needs even N, got {n}"
        )));
    }
    let third = Rational::from_parts(IBig::ONE, (3 * n).into());
    Ok(classical_weights(
        n,
        |b| {
            let c = if b == 0 || b == n {
                1
            } else if b % 2 == 1 {
                4
            } else {
                2
            };
            &third * Rational::from(c)
        },
        precision,
    ))
}

/// Errors of the optimal, trapezoid and Simpson rules on the same grid.
pub fn baseline_compare(
    m: usize,
    f: &Integrand,
    n: u64,
    precision: usize,
) -> Result<Vec<BaselineRow>> {
    let simpson = simpson_weights(n, precision)?;
    let rule = build_rule(m, n, precision)?;
    let exact = f.exact_big(precision);
    let err = |w: &[BigFloat]| (&weighted_sum(w, n, f) - &exact).abs().to_f64();
    Ok(vec![
        BaselineRow {
            rule: "optimal".into(),
            error: err(rule.weights()),
        },
        BaselineRow {
            rule: "trapezoid".into(),
            error: err(&trapezoid_weights(n, precision)),
        },
        BaselineRow {
            rule: "simpson".into(),
            error: err(&simpson),
        },
    ])
}
