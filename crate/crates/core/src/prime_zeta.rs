//! Prime zeta partial sums, the tail-exchanged series for the Mertens
//! constant, and the conversion between the reciprocal-prime sum and its
//! converged double-series correction.

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};
use crate::prime_engine::{prime_count, primes_up_to, DEFAULT_HARD_CAP};
use crate::summatory::CompensatedSum;

/// Euler's constant.
pub const GAMMA: f64 = 0.577215664901532860606512090082;

/// Mertens's constant, reference value the series routes must recover.
pub const MERTENS_B: f64 = 0.261497212847642783755426838609;

fn domain_guard(x: f64, what: &str) -> Result<u64> {
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

/// `sum of p^(-n)` over primes `p <= x`.
pub fn prime_zeta_partial(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "prime_zeta_partial needs n >= 2, got {n}"
        )));
    }
    let limit = domain_guard(x, "prime_zeta_partial")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        sum.add((p as f64).powi(-(n as i32)));
    }
    Ok(sum.value())
}

/// Upper bound on `sum of p^(-n)` over primes `p > x`, valid for `n >= 2`:
/// the tail is below `sum_{m > floor(x)} m^(-n) <= floor(x)^(1-n) / (n-1)`.
pub fn prime_zeta_tail_bound(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "prime_zeta_tail_bound needs n >= 2, got {n}"
        )));
    }
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!(
            "prime_zeta_tail_bound needs x >= 2, got {x}"
        )));
    }
    let floor_x = x.floor();
    Ok(floor_x.powi(1 - n as i32) / (n as f64 - 1.0))
}

/// Smallest series depth at which the truncation radius of
/// `zeta_series_partial` drops below `1e-13`: the first `n` with
/// `pi(x) * 2^(-n) / n < 1e-13`.
pub fn default_n_max(x: f64) -> Result<u32> {
    let pi_x = prime_count(x)? as f64;
    let mut n = 2u32;
    while pi_x * 2f64.powi(-(n as i32)) / n as f64 >= 1e-13 {
        n += 1;
        if n > 200 {
            return Err(Error::Precision(
                "series depth for the requested x exceeds 200".into(),
            ));
        }
    }
    Ok(n)
}

/// Truncated double series `sum_{n=2..n_max} sum_{p <= x} 1 / (n p^n)`,
/// summed per prime so each geometric column telescopes in one cache pass.
/// The radius covers only the `n > n_max` truncation: each dropped layer is
/// below `pi(x) * 2^(-n) / n`, and the sum of those is below twice the first.
pub fn zeta_series_partial(x: f64, n_max: u32) -> Result<BoundedReal> {
    if n_max < 2 {
        return Err(Error::Domain(format!(
            "zeta_series_partial needs n_max >= 2, got {n_max}"
        )));
    }
    let limit = domain_guard(x, "zeta_series_partial")?;
    let mut sum = CompensatedSum::new();
    let mut count = 0u64;
    for p in primes_up_to(limit)? {
        count += 1;
        let inv = 1.0 / p as f64;
        let mut t = inv * inv;
        for n in 2..=n_max {
            if t == 0.0 {
                break;
            }
            sum.add(t / n as f64);
            t *= inv;
        }
    }
    let tail_first = count as f64 * 2f64.powi(-(n_max as i32 + 1)) / (n_max as f64 + 1.0);
    Ok(BoundedReal::new(sum.value(), 2.0 * tail_first))
}

/// Same series with the depth chosen by `default_n_max`.
pub fn zeta_series_auto(x: f64) -> Result<BoundedReal> {
    zeta_series_partial(x, default_n_max(x)?)
}

/// Radius of the prime tail of the converged double series beyond `x`:
/// `sum_{p > x} sum_{n >= 2} 1/(n p^n) < sum_{p > x} 1/(2 p (p - 1))`,
/// and extending that to all integers `m > floor(x)` telescopes to
/// `1 / (2 floor(x))`.
pub fn series_prime_tail_radius(x: f64) -> f64 {
    0.5 / x.floor()
}

/// Mertens's constant through the series route: `gamma - limit of the double
/// series`, with the series cut at `prime_limit` and the enclosure widened by
/// the prime tail beyond it.
pub fn mertens_b_via_zeta(prime_limit: f64, n_max: u32) -> Result<BoundedReal> {
    let series = zeta_series_partial(prime_limit, n_max)?;
    let radius = series.radius + series_prime_tail_radius(prime_limit);
    Ok(BoundedReal::new(GAMMA - series.value, radius))
}

/// `u2(x) - u2(prime_limit)` where `u2` is the converged correction
/// `sum(-ln(1 - 1/p) - 1/p)`: computed as minus the sum over primes in
/// `(x, prime_limit]`, with the unseen tail past `prime_limit` inside the
/// radius. Negative for `x` well inside the range; the enclosure only
/// certifies the sign while `1/(2 floor(prime_limit))` stays smaller than
/// the partial sum.
pub fn b_tail(x: f64, prime_limit: f64) -> Result<BoundedReal> {
    let x_floor = domain_guard(x, "b_tail")?;
    let limit = domain_guard(prime_limit, "b_tail")?;
    if limit < x_floor {
        return Err(Error::Domain(format!(
            "b_tail needs prime_limit >= x, got {prime_limit} < {x}"
        )));
    }
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        if p <= x_floor {
            continue;
        }
        let inv = 1.0 / p as f64;
        sum.add(-((-inv).ln_1p()) - inv);
    }
    Ok(BoundedReal::new(
        -sum.value(),
        series_prime_tail_radius(prime_limit),
    ))
}

/// `sum_{n=2..n_max} sum_{p^n <= x} ln p / p^n`, the log-weighted tail the
/// prime-power count adds beyond the primes themselves. The inner cut
/// `p <= x^(1/n)` is decided in exact integer arithmetic on `p^n`, and the
/// terms vanish on their own once `2^n > x`, so any `n_max` at or past
/// `ceil(log2 x)` gives the exhausted sum.
pub fn prime_power_log_sum(x: f64, n_max: u32) -> Result<f64> {
    if n_max < 2 {
        return Err(Error::Domain(format!(
            "prime_power_log_sum needs n_max >= 2, got {n_max}"
        )));
    }
    if !x.is_finite() || x < 4.0 {
        return Err(Error::Domain(format!(
            "prime_power_log_sum needs x >= 4, got {x}"
        )));
    }
    if x > DEFAULT_HARD_CAP as f64 {
        return Err(Error::Range(format!(
            "prime_power_log_sum at x = {x} is beyond the sieve hard cap"
        )));
    }
    let limit = x.floor() as u64;
    let sqrt_limit = integer_nth_root(limit, 2);
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(sqrt_limit.max(2))? {
        let lp = (p as f64).ln();
        let mut d: u128 = (p as u128) * (p as u128);
        let mut n = 2u32;
        while n <= n_max && d <= limit as u128 {
            sum.add(lp / d as f64);
            d *= p as u128;
            n += 1;
        }
    }
    Ok(sum.value())
}

/// `sum of ln p / (p (p - 1))` over primes `p <= x`: the closed form of the
/// inner geometric series, which the double sum above approaches from below
/// as `x` grows.
pub fn prime_power_log_closed(x: f64) -> Result<f64> {
    let limit = domain_guard(x, "prime_power_log_closed")?;
    let mut sum = CompensatedSum::new();
    for p in primes_up_to(limit)? {
        let pf = p as f64;
        sum.add(pf.ln() / (pf * (pf - 1.0)));
    }
    Ok(sum.value())
}

/// Largest integer `r` with `r^n <= value`.
pub fn integer_nth_root(value: u64, n: u32) -> u64 {
    if n == 0 || value == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    if n == 1 {
        return value;
    }
    if n >= 64 {
        return 1;
    }
    let mut r = (value as f64).powf(1.0 / n as f64).round() as u64;
    let pow = |r: u64| -> Option<u64> {
        let mut acc: u128 = 1;
        for _ in 0..n {
            acc = acc.checked_mul(r as u128)?;
            if acc > u64::MAX as u128 {
                return None;
            }
        }
        Some(acc as u64)
    };
    while r > 0 && pow(r).map_or(true, |v| v > value) {
        r -= 1;
    }
    while pow(r + 1).map_or(false, |v| v <= value) {
        r += 1;
    }
    r
}

/// `sum_{n=2..n_max} sum_{j <= floor(pi(x)^(1/n))} ln p_j / p_j^n` where
/// `p_j` is the j-th prime: the inner cut counts primes by index rather
/// than by the size of `p^n`, so at n = 2 it reaches far larger primes than
/// the `p^2 <= x` cut does. Approaches the same limit as `n_max` and `x`
/// grow.
pub fn prime_power_log_sum_indexed(x: f64, n_max: u32) -> Result<f64> {
    if n_max < 2 {
        return Err(Error::Domain(format!(
            "prime_power_log_sum_indexed needs n_max >= 2, got {n_max}"
        )));
    }
    let limit = domain_guard(x, "prime_power_log_sum_indexed")?;
    let primes: Vec<u64> = primes_up_to(limit)?.collect();
    let pi_x = primes.len() as u64;
    let mut sum = CompensatedSum::new();
    for n in 2..=n_max {
        let j_max = integer_nth_root(pi_x, n) as usize;
        for &p in primes.iter().take(j_max) {
            let pf = p as f64;
            sum.add(pf.ln() * pf.powi(-(n as i32)));
        }
    }
    Ok(sum.value())
}
