//! The primorial inequality in log domain.
//!
//! With `N` the product of primes up to `x` and `phi` its totient, the
//! inequality `e^gamma * ln ln N < N / phi` never needs `N` materialized:
//! `ln(N/phi)` is the sum of `-ln(1 - 1/p)` and `ln N` is theta. Everything
//! here works on those sums, with an exact big-integer route kept alongside
//! as a small-x cross-check.

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};
use crate::prime_engine::{primes_up_to, DEFAULT_HARD_CAP};
use crate::prime_zeta::{series_prime_tail_radius, zeta_series_auto, GAMMA, MERTENS_B};
use crate::summatory::CompensatedSum;

/// What the two-branch sign argument concludes at one abscissa: branch I
/// applies when `theta(x) > x` with a negative error term and predicts the
/// inequality fails; branch II applies when `theta(x) <= x` with a
/// nonnegative error term and predicts it holds; anything else concludes
/// nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryBranch {
    IAppliesFails,
    IIAppliesHolds,
    NoConclusion,
}

impl CorollaryBranch {
    /// Fixed strings used by the CSV and JSON writers.
    pub fn as_str(self) -> &'static str {
        match self {
            CorollaryBranch::IAppliesFails => "I_applies_fails",
            CorollaryBranch::IIAppliesHolds => "II_applies_holds",
            CorollaryBranch::NoConclusion => "no_conclusion",
        }
    }

    /// Branch prediction, if any, about whether the inequality holds.
    pub fn prediction(self) -> Option<bool> {
        match self {
            CorollaryBranch::IAppliesFails => Some(false),
            CorollaryBranch::IIAppliesHolds => Some(true),
            CorollaryBranch::NoConclusion => None,
        }
    }
}

/// Everything evaluated about the inequality at one abscissa.
#[derive(Debug, Clone, Copy)]
pub struct NicolasVerdict {
    pub x: u64,
    /// `ln(N/(phi * ln ln N)) - gamma`; positive iff the inequality holds.
    pub margin: f64,
    pub holds: bool,
    /// `ln(N/(phi * ln x))`.
    pub c_x_log: f64,
    /// `exp(c_x_log) - e^gamma`.
    pub epsilon_x: f64,
    pub theta_side: i8,
    pub e_value: f64,
    pub b_interval: BoundedReal,
}

struct Pass {
    theta: f64,
    s: f64,
    l: f64,
    tail: f64,
}

/// One sieve pass accumulating both the head sums at `x` and the tail of
/// `sum(ln(1 - 1/p) + 1/p)` over `x < p <= prime_limit`.
fn pass(x: f64, prime_limit: f64) -> Result<Pass> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!("needs x >= 2, got {x}")));
    }
    if !prime_limit.is_finite() || prime_limit < x {
        return Err(Error::Domain(format!(
            "needs prime_limit >= x, got {prime_limit} < {x}"
        )));
    }
    if prime_limit > DEFAULT_HARD_CAP as f64 {
        return Err(Error::Range(format!(
            "prime_limit {prime_limit} is beyond the sieve hard cap"
        )));
    }
    let x_floor = x.floor() as u64;
    let mut theta = CompensatedSum::new();
    let mut s = CompensatedSum::new();
    let mut l = CompensatedSum::new();
    let mut tail = CompensatedSum::new();
    for p in primes_up_to(prime_limit.floor() as u64)? {
        let pf = p as f64;
        let inv = 1.0 / pf;
        let l1p = (-inv).ln_1p();
        if p <= x_floor {
            theta.add(pf.ln());
            s.add(inv);
            l.add(-l1p);
        } else {
            tail.add(l1p + inv);
        }
    }
    Ok(Pass {
        theta: theta.value(),
        s: s.value(),
        l: l.value(),
        tail: tail.value(),
    })
}

fn margin_from(l: f64, theta: f64, x: f64) -> Result<f64> {
    if theta <= 1.0 {
        return Err(Error::Domain(format!(
            "margin undefined while theta(x) <= 1 (x = {x})"
        )));
    }
    Ok(l - theta.ln().ln() - GAMMA)
}

/// `ln(N/(phi * ln ln N)) - gamma` via the converged per-prime logs.
/// Positive iff the inequality holds at `x`. Needs `theta(x) > 1`, which
/// excludes x = 2.
pub fn nicolas_margin(x: f64) -> Result<f64> {
    let p = pass(x, x)?;
    margin_from(p.l, p.theta, x)
}

/// Same margin with `ln(N/phi)` assembled from the reciprocal sum plus the
/// truncated double series; agreement with `nicolas_margin` to 1e-10 is the
/// standing cross-check between the two routes.
pub fn nicolas_margin_series(x: f64) -> Result<f64> {
    let p = pass(x, x)?;
    let series = zeta_series_auto(x)?;
    margin_from(p.s + series.value, p.theta, x)
}

/// Default sieve reach for tail enclosures at abscissa `x`.
pub fn default_tail_limit(x: f64) -> f64 {
    (10.0 * x).max(1e7).min(DEFAULT_HARD_CAP as f64)
}

/// Full verdict with the tail interval cut at `prime_limit`.
pub fn nicolas_holds_with(x: f64, prime_limit: f64) -> Result<NicolasVerdict> {
    if !x.is_finite() || x < 3.0 {
        return Err(Error::Domain(format!(
            "nicolas_holds needs x >= 3, got {x}"
        )));
    }
    let p = pass(x, prime_limit)?;
    let margin = margin_from(p.l, p.theta, x)?;
    let c_x_log = p.l - x.ln().ln();
    let theta_delta = p.theta - x;
    Ok(NicolasVerdict {
        x: x.floor() as u64,
        margin,
        holds: margin > 0.0,
        c_x_log,
        epsilon_x: c_x_log.exp() - GAMMA.exp(),
        theta_side: if theta_delta > 0.0 {
            1
        } else if theta_delta < 0.0 {
            -1
        } else {
            0
        },
        e_value: p.s - x.ln().ln() - MERTENS_B,
        b_interval: BoundedReal::new(p.tail, series_prime_tail_radius(prime_limit)),
    })
}

/// Full verdict with the default tail reach.
pub fn nicolas_holds(x: f64) -> Result<NicolasVerdict> {
    nicolas_holds_with(x, default_tail_limit(x))
}

/// Both sides of `ln C_x = gamma + E(x) + B(x)`.
#[derive(Debug, Clone, Copy)]
pub struct CxDecomposition {
    /// `ln C_x` evaluated directly.
    pub lhs: f64,
    /// `gamma + E(x) + B(x)` with the tail radius.
    pub rhs: BoundedReal,
    pub epsilon_x: f64,
}

/// Evaluate the identity `C_x = e^gamma exp(E(x) + B(x))` in log form; the
/// returned interval must contain the direct evaluation.
pub fn c_x_decomposition(x: f64, prime_limit: f64) -> Result<CxDecomposition> {
    if !x.is_finite() || x < 3.0 {
        return Err(Error::Domain(format!(
            "c_x_decomposition needs x >= 3, got {x}"
        )));
    }
    let p = pass(x, prime_limit)?;
    let lhs = p.l - x.ln().ln();
    let e_value = p.s - x.ln().ln() - MERTENS_B;
    let rhs = BoundedReal::new(
        GAMMA + e_value + p.tail,
        series_prime_tail_radius(prime_limit),
    );
    Ok(CxDecomposition {
        lhs,
        rhs,
        epsilon_x: lhs.exp() - GAMMA.exp(),
    })
}

/// The two-branch classification from the signs alone; injected inputs let
/// tests exercise the `theta(x) > x` branch that no desk-scale abscissa
/// reaches.
pub fn classify(theta_minus_x_sign: i8, e_value: f64) -> CorollaryBranch {
    if theta_minus_x_sign > 0 && e_value < 0.0 {
        CorollaryBranch::IAppliesFails
    } else if theta_minus_x_sign <= 0 && e_value >= 0.0 {
        CorollaryBranch::IIAppliesHolds
    } else {
        CorollaryBranch::NoConclusion
    }
}

/// Classify the live signs at `x`.
pub fn corollary_check(x: f64) -> Result<CorollaryBranch> {
    if !x.is_finite() || x < 3.0 {
        return Err(Error::Domain(format!(
            "corollary_check needs x >= 3, got {x}"
        )));
    }
    let p = pass(x, x)?;
    let theta_delta = p.theta - x;
    let sign = if theta_delta > 0.0 {
        1
    } else if theta_delta < 0.0 {
        -1
    } else {
        0
    };
    Ok(classify(sign, p.s - x.ln().ln() - MERTENS_B))
}

/// Outcome of "if `E(x) > -B(x)` then the inequality holds at `x`".
#[derive(Debug, Clone, Copy)]
pub struct ImplicationReport {
    pub x: u64,
    pub e_value: f64,
    /// `-B(x)` as an interval; positive.
    pub neg_b: BoundedReal,
    /// Premise truth, `None` when `e_value` falls inside the `-B` interval
    /// and neither strict comparison is certified.
    pub premise: Option<bool>,
    pub holds: bool,
    /// False only on a certified premise with a failing conclusion.
    pub satisfied: bool,
}

/// Check the sign implication at `x` with tails cut at `prime_limit`.
pub fn implication_check_with(x: f64, prime_limit: f64) -> Result<ImplicationReport> {
    let verdict = nicolas_holds_with(x, prime_limit)?;
    let neg_b = verdict.b_interval.neg();
    let premise = if verdict.e_value > neg_b.upper() {
        Some(true)
    } else if verdict.e_value < neg_b.lower() {
        Some(false)
    } else {
        None
    };
    Ok(ImplicationReport {
        x: verdict.x,
        e_value: verdict.e_value,
        neg_b,
        premise,
        holds: verdict.holds,
        satisfied: premise != Some(true) || verdict.holds,
    })
}

/// Same check with the default tail reach.
pub fn implication_check(x: f64) -> Result<ImplicationReport> {
    implication_check_with(x, default_tail_limit(x))
}

/// Range evidence for the two asymptotic hypotheses: the extremes of
/// `E(x) * ln x`, and whether `theta(x) < x (1 + 1/(2 ln x))` held
/// everywhere.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeReport {
    pub x_min: u64,
    pub x_max: u64,
    pub inf_e_log: f64,
    pub inf_at: u64,
    pub sup_e_log: f64,
    pub sup_at: u64,
    pub theta_bound_ok: bool,
    pub theta_bound_first_violation: Option<u64>,
    pub rows: u64,
}

/// Walk every prime in `[x_min, x_max]` with running sums. `E(x) ln x` is
/// evaluated at each prime and again in the limit from the left of the next
/// one; between primes it is monotone, so those two families bracket the
/// extremes. The theta bound is tested at each prime, where the constant
/// theta sits closest to the growing right side.
pub fn error_envelope_scan(x_min: u64, x_max: u64) -> Result<EnvelopeReport> {
    if x_min < 3 || x_min > x_max {
        return Err(Error::Domain(format!(
            "error_envelope_scan needs 3 <= x_min <= x_max, got [{x_min}, {x_max}]"
        )));
    }
    if x_max > DEFAULT_HARD_CAP {
        return Err(Error::Range(format!(
            "error_envelope_scan upper end {x_max} is beyond the sieve hard cap"
        )));
    }
    let mut s = CompensatedSum::new();
    let mut theta = CompensatedSum::new();
    let mut report = EnvelopeReport {
        x_min,
        x_max,
        inf_e_log: f64::INFINITY,
        inf_at: 0,
        sup_e_log: f64::NEG_INFINITY,
        sup_at: 0,
        theta_bound_ok: true,
        theta_bound_first_violation: None,
        rows: 0,
    };
    let consider = |report: &mut EnvelopeReport, x: u64, e_log: f64| {
        if e_log < report.inf_e_log {
            report.inf_e_log = e_log;
            report.inf_at = x;
        }
        if e_log > report.sup_e_log {
            report.sup_e_log = e_log;
            report.sup_at = x;
        }
    };
    let e_log_at = |s_val: f64, x: u64| -> f64 {
        let xf = x as f64;
        (s_val - xf.ln().ln() - MERTENS_B) * xf.ln()
    };
    let theta_check = |report: &mut EnvelopeReport, x: u64, theta_val: f64| {
        let xf = x as f64;
        let bound = xf * (1.0 + 1.0 / (2.0 * xf.ln()));
        if theta_val >= bound && report.theta_bound_first_violation.is_none() {
            report.theta_bound_ok = false;
            report.theta_bound_first_violation = Some(x);
        }
    };
    let mut entered = false;
    for p in primes_up_to(x_max)? {
        let pf = p as f64;
        if p > x_min && !entered {
            // Left edge of the range falls strictly inside a prime gap.
            entered = true;
            consider(&mut report, x_min, e_log_at(s.value(), x_min));
            theta_check(&mut report, x_min, theta.value());
            report.rows += 1;
        }
        if entered {
            // Limit from the left at p: theta and S still exclude p.
            consider(&mut report, p, e_log_at(s.value(), p));
        }
        theta.add(pf.ln());
        s.add(1.0 / pf);
        if p >= x_min {
            entered = true;
            consider(&mut report, p, e_log_at(s.value(), p));
            theta_check(&mut report, p, theta.value());
            report.rows += 1;
        }
    }
    if !entered {
        // No prime in the range at all: one row at the left edge.
        consider(&mut report, x_min, e_log_at(s.value(), x_min));
        theta_check(&mut report, x_min, theta.value());
        report.rows += 1;
    }
    consider(&mut report, x_max, e_log_at(s.value(), x_max));
    Ok(report)
}

/// Exact product route for small `x`: the primorial and its totient both
/// fit in `u128` through `x = 100`, and the margin follows from their logs.
/// Needs `ln ln N > 0`, which excludes x = 2.
pub fn exact_margin(x: u64) -> Result<f64> {
    if !(3..=100).contains(&x) {
        return Err(Error::Domain(format!(
            "exact_margin covers 3 <= x <= 100, got {x}"
        )));
    }
    let (n, phi) = primorial_parts(x)?;
    let ln_n = u128_ln(n);
    let ln_phi = u128_ln(phi);
    Ok(ln_n - ln_phi - ln_n.ln().ln() - GAMMA)
}

/// The inequality itself for small `x`, evaluated from the exact products;
/// covers x = 2, where the margin form is undefined but the inequality is
/// trivially true because `ln ln 2 < 0`.
pub fn exact_holds(x: u64) -> Result<bool> {
    if x == 2 {
        return Ok(true);
    }
    Ok(exact_margin(x)? > 0.0)
}

fn primorial_parts(x: u64) -> Result<(u128, u128)> {
    let mut n: u128 = 1;
    let mut phi: u128 = 1;
    for p in primes_up_to(x)? {
        n = n
            .checked_mul(p as u128)
            .ok_or_else(|| Error::Range(format!("primorial overflows u128 before {x}")))?;
        phi *= (p - 1) as u128;
    }
    Ok((n, phi))
}

fn u128_ln(v: u128) -> f64 {
    // Split so the conversion never exceeds f64's exact-integer window.
    if v < (1u128 << 53) {
        (v as f64).ln()
    } else {
        let shift = 128 - v.leading_zeros() - 53;
        let top = (v >> shift) as f64;
        top.ln() + shift as f64 * 2f64.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_small_cases_match_exact_products() {
        for x in [3u64, 4, 5, 10, 30, 47, 50] {
            let log_route = nicolas_margin(x as f64).unwrap();
            let exact = exact_margin(x).unwrap();
            assert!(
                (log_route - exact).abs() < 1e-9,
                "x = {x}: {log_route} vs {exact}"
            );
        }
    }

    #[test]
    fn exact_margin_at_three() {
        // N = 6, phi = 2: ln(6 / (2 ln ln 6)) - gamma.
        let expect = (6.0 / (2.0 * 6f64.ln().ln())).ln() - GAMMA;
        assert!((exact_margin(3).unwrap() - expect).abs() < 1e-12);
        assert!(expect > 1.0 && expect < 1.1);
    }

    #[test]
    fn two_margin_routes_agree() {
        for x in [10.0, 100.0, 1000.0] {
            let a = nicolas_margin(x).unwrap();
            let b = nicolas_margin_series(x).unwrap();
            assert!((a - b).abs() < 1e-10, "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn margin_rejects_two() {
        assert!(nicolas_margin(2.0).is_err());
        assert!(exact_margin(2).is_err());
        assert!(exact_holds(2).unwrap());
    }

    #[test]
    fn classification_branches() {
        assert_eq!(classify(-1, 0.5), CorollaryBranch::IIAppliesHolds);
        assert_eq!(classify(-1, -0.5), CorollaryBranch::NoConclusion);
        assert_eq!(classify(1, -0.5), CorollaryBranch::IAppliesFails);
        assert_eq!(classify(1, 0.5), CorollaryBranch::NoConclusion);
        assert_eq!(classify(0, 0.0), CorollaryBranch::IIAppliesHolds);
    }

    #[test]
    fn u128_ln_handles_wide_values() {
        let v: u128 = 614_889_782_588_491_410; // product of primes to 47
        assert!((u128_ln(v) - 6.148_897_825_884_914e17f64.ln()).abs() < 1e-12);
        assert_eq!(u128_ln(8), 8f64.ln());
    }

    #[test]
    fn envelope_single_point() {
        let r = error_envelope_scan(100, 100).unwrap();
        assert_eq!(r.rows, 1);
        assert!(r.theta_bound_ok);
        assert!(r.inf_e_log > 0.0);
    }
}
