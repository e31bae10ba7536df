//! Single-pass summatory functions over primes and prime powers: theta, psi,
//! the reciprocal sum, the log-weighted remainder R, factorial logs, and the
//! Mangoldt-weighted sums, all with compensated accumulation.

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};
use crate::prime_engine::{primes_up_to, DEFAULT_HARD_CAP};

/// Neumaier-compensated accumulator.
///
/// After adding any finite sequence, `|value() - exact|` stays within
/// `2 * EPSILON * sum(|terms|)`, which the tests check against a
/// double-double oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    primary: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.primary + x;
        if self.primary.abs() >= x.abs() {
            self.compensation += (self.primary - t) + x;
        } else {
            self.compensation += (x - t) + self.primary;
        }
        self.primary = t;
    }

    pub fn value(&self) -> f64 {
        self.primary + self.compensation
    }

    /// Merge a partial sum computed over a disjoint range: both of the
    /// partial's components are added exactly as ordinary terms, which is
    /// "exact addition of the partials followed by one compensation fold".
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.primary);
        self.add(other.compensation);
    }
}

/// Every per-prime running sum one forward pass maintains.
///
/// `u2` is `sum(-ln(1 - 1/p) - 1/p)`, the fully converged tail of the
/// reciprocal prime powers; `l` is `sum(-ln(1 - 1/p))` kept separately so the
/// two routes to the Nicolas margin stay independent.
#[derive(Debug, Clone, Default)]
pub struct PrimeAccumulator {
    pub theta: CompensatedSum,
    pub s: CompensatedSum,
    pub a: CompensatedSum,
    pub u2: CompensatedSum,
    pub l: CompensatedSum,
    pub count: u64,
}

impl PrimeAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn absorb(&mut self, p: u64) {
        let pf = p as f64;
        let lp = pf.ln();
        let inv = 1.0 / pf;
        let l1p = (-inv).ln_1p(); // ln(1 - 1/p), exact argument
        self.theta.add(lp);
        self.s.add(inv);
        self.a.add(lp * inv);
        self.u2.add(-l1p - inv);
        self.l.add(-l1p);
        self.count += 1;
    }

    /// Merge partials from a disjoint, higher prime range.
    pub fn merge(&mut self, other: &PrimeAccumulator) {
        self.theta.merge(&other.theta);
        self.s.merge(&other.s);
        self.a.merge(&other.a);
        self.u2.merge(&other.u2);
        self.l.merge(&other.l);
        self.count += other.count;
    }
}

/// All quantities evaluated at one abscissa.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint {
    pub x: u64,
    pub theta: f64,
    pub psi: f64,
    pub s: f64,
    pub r: f64,
    pub e: BoundedReal,
    pub margin: f64,
    pub theta_minus_x_sign: i8,
    pub nicolas_holds: bool,
}

fn range_guard(x: f64, what: &str) -> Result<u64> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!("{what} needs x >= 2, got {x}")));
    }
    if x > DEFAULT_HARD_CAP as f64 {
        return Err(Error::Range(format!(
            "{what} at x = {x} is beyond the sieve hard cap"
        )));
    }
    Ok(x.floor() as u64)
}

/// `sum of ln p` over primes `p <= x`.
pub fn theta(x: f64) -> Result<f64> {
    let limit = range_guard(x, "theta")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        sum.add((p as f64).ln());
    }
    Ok(sum.value())
}

/// `sum of ln p` over prime powers `p^k <= x`.
pub fn psi(x: f64) -> Result<f64> {
    let limit = range_guard(x, "psi")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        let lp = (p as f64).ln();
        let mut power = p;
        loop {
            sum.add(lp);
            match power.checked_mul(p) {
                Some(next) if next <= limit => power = next,
                _ => break,
            }
        }
    }
    Ok(sum.value())
}

/// `sum of 1/p` over primes `p <= x`.
pub fn prime_reciprocal_sum(x: f64) -> Result<f64> {
    let limit = range_guard(x, "prime_reciprocal_sum")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        sum.add(1.0 / p as f64);
    }
    Ok(sum.value())
}

/// `sum of ln p / p` over primes `p <= x`, minus `ln x`.
pub fn r(x: f64) -> Result<f64> {
    let limit = range_guard(x, "r")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        let pf = p as f64;
        sum.add(pf.ln() / pf);
    }
    Ok(sum.value() - x.ln())
}

/// `sum of ln n` for `n <= x`; zero for `x <= 1`.
pub fn sum_log_n(x: u64) -> f64 {
    let mut sum = CompensatedSum::new();
    for n in 2..=x {
        sum.add((n as f64).ln());
    }
    sum.value()
}

/// `sum_log_n(x) - (x ln x - x)`. Stays within `2 ln x` in magnitude for
/// `x >= 2` (Stirling-type envelope, checked over the scan range).
pub fn o1(x: u64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let xf = x as f64;
    sum_log_n(x) - (xf * xf.ln() - xf)
}

/// `ln p` when `n` is a prime power `p^k`, zero otherwise.
pub fn mangoldt(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("mangoldt needs n >= 1".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut m = n;
    let mut p = 0u64;
    for candidate in std::iter::once(2).chain((3..).step_by(2)) {
        if candidate * candidate > m {
            break;
        }
        if m % candidate == 0 {
            p = candidate;
            break;
        }
    }
    if p == 0 {
        return Ok((n as f64).ln()); // n itself is prime
    }
    while m % p == 0 {
        m /= p;
    }
    if m == 1 {
        Ok((p as f64).ln())
    } else {
        Ok(0.0)
    }
}

fn integer_guard(x: u64, what: &str) -> Result<()> {
    if x < 2 {
        return Err(Error::Domain(format!("{what} needs x >= 2, got {x}")));
    }
    if x > DEFAULT_HARD_CAP {
        return Err(Error::Range(format!(
            "{what} at x = {x} is beyond the sieve hard cap"
        )));
    }
    Ok(())
}

/// `sum of mangoldt(d)/d` for `d <= x`, iterating primes and their powers.
pub fn mangoldt_over_d_sum(x: u64) -> Result<f64> {
    integer_guard(x, "mangoldt_over_d_sum")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(x)? {
        let lp = (p as f64).ln();
        let mut power = p;
        loop {
            sum.add(lp / power as f64);
            match power.checked_mul(p) {
                Some(next) if next <= x => power = next,
                _ => break,
            }
        }
    }
    Ok(sum.value())
}

/// `sum of mangoldt(d) * floor(x/d)` for `d <= x`.
pub fn mangoldt_floor_sum(x: u64) -> Result<f64> {
    integer_guard(x, "mangoldt_floor_sum")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(x)? {
        let lp = (p as f64).ln();
        let mut power = p;
        loop {
            sum.add(lp * (x / power) as f64);
            match power.checked_mul(p) {
                Some(next) if next <= x => power = next,
                _ => break,
            }
        }
    }
    Ok(sum.value())
}

/// `(sum of {x/d} * mangoldt(d)) / x` with the fractional parts taken in
/// exact integer arithmetic: `{x/d} = (x mod d) / d`. In particular the
/// `d = x` term vanishes. Values stay inside `[0, 1.7)` over the tested
/// range.
pub fn frac_mangoldt_ratio(x: u64) -> Result<f64> {
    integer_guard(x, "frac_mangoldt_ratio")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(x)? {
        let lp = (p as f64).ln();
        let mut power = p;
        loop {
            let rem = x % power;
            if rem != 0 {
                sum.add(lp * rem as f64 / power as f64);
            }
            match power.checked_mul(p) {
                Some(next) if next <= x => power = next,
                _ => break,
            }
        }
    }
    Ok(sum.value() / x as f64)
}

/// Variant of `frac_mangoldt_ratio` whose inner cut counts primes by index:
/// `(1/k) sum_{n=1..n_max} sum_{j <= floor(pi(k)^(1/n))} {k / p_j^n} ln p_j`.
/// Prime powers beyond `k` contribute their full fractional value `k / p^n`,
/// so the outer depth matters; powers at or below `k` use exact integer
/// remainders.
pub fn frac_mangoldt_ratio_indexed(k: u64, n_max: u32) -> Result<f64> {
    integer_guard(k, "frac_mangoldt_ratio_indexed")?;
    if n_max < 1 {
        return Err(Error::Domain("frac_mangoldt_ratio_indexed needs n_max >= 1".into()));
    }
    let primes: Vec<u64> = primes_up_to(k)?.collect();
    let pi_k = primes.len() as u64;
    let kf = k as f64;
    let mut sum = CompensatedSum::new();
    for n in 1..=n_max {
        let j_max = crate::prime_zeta::integer_nth_root(pi_k, n) as usize;
        for &p in primes.iter().take(j_max) {
            let lp = (p as f64).ln();
            let mut d: u128 = 1;
            let mut overflow = false;
            for _ in 0..n {
                d = match d.checked_mul(p as u128) {
                    Some(v) => v,
                    None => {
                        overflow = true;
                        break;
                    }
                };
            }
            if !overflow && d <= k as u128 {
                let rem = k % d as u64;
                if rem != 0 {
                    sum.add(lp * rem as f64 / d as f64);
                }
            } else {
                // p^n exceeds k: the fractional part is the ratio itself.
                // powi overflowing to infinity sends the term to the zero it
                // would round to anyway.
                let t = kf / (p as f64).powi(n as i32);
                if t > 0.0 {
                    sum.add(lp * t);
                }
            }
        }
    }
    Ok(sum.value() / kf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive_on_cancellation() {
        let terms = [1e16, 3.14159, -1e16, 2.71828];
        let mut c = CompensatedSum::new();
        let mut naive = 0.0f64;
        for &t in &terms {
            c.add(t);
            naive += t;
        }
        let exact = 3.14159 + 2.71828;
        assert!((c.value() - exact).abs() < 1e-12);
        assert!((naive - exact).abs() > 1e-4);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..2000).map(|i| 1.0 / i as f64).collect();
        let mut whole = CompensatedSum::new();
        for &v in &xs {
            whole.add(v);
        }
        let (lo, hi) = xs.split_at(700);
        let mut left = CompensatedSum::new();
        let mut right = CompensatedSum::new();
        for &v in lo {
            left.add(v);
        }
        for &v in hi {
            right.add(v);
        }
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() <= 1e-15 * whole.value());
    }

    #[test]
    fn mangoldt_small_values() {
        assert_eq!(mangoldt(1).unwrap(), 0.0);
        assert!((mangoldt(8).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(mangoldt(12).unwrap(), 0.0);
        assert!((mangoldt(9).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((mangoldt(97).unwrap() - 97f64.ln()).abs() < 1e-15);
        assert_eq!(mangoldt(1000).unwrap(), 0.0);
        assert!(mangoldt(0).is_err());
    }

    #[test]
    fn theta_and_psi_smallest_cases() {
        assert!((theta(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((psi(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(theta(1.9).is_err());
        // theta(10) = ln(2*3*5*7)
        assert!((theta(10.0).unwrap() - 210f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn o1_smallest_case() {
        assert_eq!(sum_log_n(1), 0.0);
        assert!((o1(1) - 1.0).abs() < 1e-15);
    }
}
