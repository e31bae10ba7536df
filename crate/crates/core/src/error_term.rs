//! The Mertens error term by definition and by integral representation.
//!
//! The remainder `R(t) = sum of ln p / p over p <= t, minus ln t` is a step
//! function minus a log, so every integral against it splits over prime gaps
//! into closed-form pieces. That gives an exact integration route to the
//! error term and to Mertens's constant, each wrapped in an interval whose
//! radius covers the un-integrated tail.

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};
use crate::prime_engine::{primes_up_to, DEFAULT_HARD_CAP};
use crate::prime_zeta::MERTENS_B;
use crate::quad::adaptive_simpson;
use crate::summatory::{prime_reciprocal_sum, CompensatedSum};

/// Empirical bound on `sup |R(t)|` over the tested range, used as the tail
/// envelope for integrals truncated at `X`. The scan checks it holds at
/// every checkpoint; it is an observation, not a proved bound.
pub const R_ENVELOPE: f64 = 1.645;

/// `R(t)` as a piecewise object: between consecutive primes `R(t)` is
/// exactly `partials[k] - ln t`, so integrals over `[a, b]` reduce to sums
/// of antiderivative differences over the gaps.
#[derive(Debug, Clone)]
pub struct StepIntegrand {
    breakpoints: Vec<u64>,
    partials: Vec<f64>,
    limit: f64,
}

impl StepIntegrand {
    /// Sieve primes to `limit` and record the running `sum of ln p / p` at
    /// each of them.
    pub fn build(limit: f64) -> Result<Self> {
        if !limit.is_finite() || limit < 2.0 {
            return Err(Error::Domain(format!(
                "StepIntegrand needs limit >= 2, got {limit}"
            )));
        }
        if limit > DEFAULT_HARD_CAP as f64 {
            return Err(Error::Range(format!(
                "StepIntegrand limit {limit} is beyond the sieve hard cap"
            )));
        }
        let mut breakpoints = Vec::new();
        let mut partials = Vec::new();
        let mut acc = CompensatedSum::new();
        for p in primes_up_to(limit.floor() as u64)? {
            let pf = p as f64;
            acc.add(pf.ln() / pf);
            breakpoints.push(p);
            partials.push(acc.value());
        }
        Ok(Self {
            breakpoints,
            partials,
            limit,
        })
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// `sum of ln p / p` over primes `p <= t`.
    pub fn a_at(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&p| p as f64 <= t);
        if idx == 0 {
            0.0
        } else {
            self.partials[idx - 1]
        }
    }

    /// `R(t) = a_at(t) - ln t`.
    pub fn r_at(&self, t: f64) -> f64 {
        self.a_at(t) - t.ln()
    }

    /// `integral of R(t) / (t ln^2 t) over [a, b]`, exact per gap: with
    /// `A` constant, the antiderivative of `(A - ln t)/(t ln^2 t)` is
    /// `-A/ln t - ln ln t`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) || a < 2.0 || b < 2.0 {
            return Err(Error::Range(format!(
                "integral bounds must sit in [2, limit], got [{a}, {b}]"
            )));
        }
        if a > self.limit || b > self.limit {
            return Err(Error::Range(format!(
                "integral bounds [{a}, {b}] exceed the built limit {}",
                self.limit
            )));
        }
        if b < a {
            return Err(Error::Domain(format!(
                "integral needs a <= b, got [{a}, {b}]"
            )));
        }
        if a == b {
            return Ok(0.0);
        }
        let antideriv = |coef: f64, t: f64| -> f64 {
            let lt = t.ln();
            -coef / lt - lt.ln()
        };
        let start = self.breakpoints.partition_point(|&p| (p as f64) <= a);
        let end = self.breakpoints.partition_point(|&p| (p as f64) < b);
        let mut sum = CompensatedSum::new();
        let mut lo = a;
        let mut coef = self.a_at(a);
        for k in start..end {
            let hi = self.breakpoints[k] as f64;
            if hi > lo {
                sum.add(antideriv(coef, hi) - antideriv(coef, lo));
                lo = hi;
            }
            coef = self.partials[k];
        }
        if b > lo {
            sum.add(antideriv(coef, b) - antideriv(coef, lo));
        }
        Ok(sum.value())
    }
}

fn guard_x(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!("{what} needs x >= 2, got {x}")));
    }
    Ok(())
}

/// The Mertens error term by definition:
/// `sum of 1/p over p <= x, minus ln ln x, minus b`.
pub fn e(x: f64) -> Result<f64> {
    guard_x(x, "e")?;
    Ok(prime_reciprocal_sum(x)? - x.ln().ln() - MERTENS_B)
}

/// Convenience wrapper building a fresh integrand; prefer the `_with`
/// variant when evaluating many points against one `X`.
pub fn bigo_via_integral(x: f64, big_x: f64) -> Result<BoundedReal> {
    if !(big_x.is_finite() && x.is_finite()) || big_x <= x {
        return Err(Error::Domain(format!(
            "bigo_via_integral needs x < X, got x = {x}, X = {big_x}"
        )));
    }
    guard_x(x, "bigo_via_integral")?;
    let integrand = StepIntegrand::build(big_x)?;
    bigo_via_integral_with(&integrand, x)
}

/// `R(x)/ln x - integral of R/(t ln^2 t) over [x, X]`, which equals the
/// error term up to the tail past `X`; the radius `R_ENVELOPE / ln X`
/// covers that tail under the observed envelope.
pub fn bigo_via_integral_with(integrand: &StepIntegrand, x: f64) -> Result<BoundedReal> {
    let big_x = integrand.limit();
    if big_x <= x {
        return Err(Error::Domain(format!(
            "bigo_via_integral needs x < X, got x = {x}, X = {big_x}"
        )));
    }
    guard_x(x, "bigo_via_integral")?;
    let value = integrand.r_at(x) / x.ln() - integrand.integral(x, big_x)?;
    Ok(BoundedReal::new(value, R_ENVELOPE / big_x.ln()))
}

/// Mertens's constant from the integral route:
/// `integral of R/(t ln^2 t) over [2, X], plus 1 - ln ln 2`, with the same
/// truncation radius as above. `ln ln 2` is negative; the signed value is
/// required.
pub fn b_via_integral(big_x: f64) -> Result<BoundedReal> {
    if !big_x.is_finite() || big_x < 1e4 {
        return Err(Error::Domain(format!(
            "b_via_integral needs X >= 10^4, got {big_x}"
        )));
    }
    let integrand = StepIntegrand::build(big_x)?;
    b_via_integral_with(&integrand)
}

pub fn b_via_integral_with(integrand: &StepIntegrand) -> Result<BoundedReal> {
    let big_x = integrand.limit();
    if big_x < 1e4 {
        return Err(Error::Domain(format!(
            "b_via_integral needs X >= 10^4, got {big_x}"
        )));
    }
    let value = integrand.integral(2.0, big_x)? + 1.0 - 2f64.ln().ln();
    Ok(BoundedReal::new(value, R_ENVELOPE / big_x.ln()))
}

/// Residual of an integration-by-parts chain that does not close: the left
/// side is `integral of R/(t ln^2 t) over [2, x]`; the right side expands
/// it through a Stieltjes step whose prime-sum term appears once too often.
/// The residual is returned as evidence, not asserted small; algebra says
/// it equals `1/2 - sum of 1/p over p <= x`, which the tests pin.
pub fn stieltjes_decomposition_check(integrand: &StepIntegrand, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 3.0 {
        return Err(Error::Domain(format!(
            "stieltjes_decomposition_check needs x >= 3, got {x}"
        )));
    }
    let lhs = integrand.integral(2.0, x)?;
    let s = prime_reciprocal_sum(x)?;
    let stieltjes_tail = (s - 0.5) - (x.ln().ln() - 2f64.ln().ln());
    let rhs = -1.0 - integrand.r_at(x) / x.ln() + s + stieltjes_tail;
    Ok(lhs - rhs)
}

/// `integral of ln u / (u (u - 1)) over [1, upper]` as an interval whose
/// radius covers both the quadrature tolerance and the tail past `upper`.
/// Substituting `u = e^w` turns the integrand into `w / (e^w - 1)`, finite
/// at `w = 0`, and the tail past `W = ln upper` is below
/// `(W + 1) e^{-W} / (1 - e^{-W})`. The full integral is pi^2 / 6.
pub fn zeta2_integral(upper: f64) -> Result<BoundedReal> {
    if !upper.is_finite() || upper < 2.0 {
        return Err(Error::Domain(format!(
            "zeta2_integral needs upper >= 2, got {upper}"
        )));
    }
    let w_max = upper.ln();
    let f = |w: f64| -> f64 {
        if w == 0.0 {
            1.0
        } else {
            w / w.exp_m1()
        }
    };
    let quad_eps = 1e-9;
    let value = adaptive_simpson(&f, 0.0, w_max, 0.1 * quad_eps);
    let tail = (w_max + 1.0) * (-w_max).exp() / (1.0 - (-w_max).exp());
    Ok(BoundedReal::new(value, tail + quad_eps))
}
