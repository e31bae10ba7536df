use nicolas_lab::prime_engine::primes_up_to;
use nicolas_lab::prime_zeta::{
    b_tail, default_n_max, mertens_b_via_zeta, prime_power_log_closed, prime_power_log_sum,
    prime_power_log_sum_indexed, prime_zeta_partial, prime_zeta_tail_bound, zeta_series_auto,
    zeta_series_partial, GAMMA, MERTENS_B,
};
use nicolas_lab::summatory::prime_reciprocal_sum;

#[test]
fn series_at_two_has_closed_form() {
    // With 2 as the only prime the series telescopes to ln 2 - 1/2.
    let series = zeta_series_auto(2.0).unwrap();
    let closed = 2f64.ln() - 0.5;
    assert!((series.value - closed).abs() <= series.radius + 1e-15);
}

#[test]
fn partial_sums_increase_toward_enclosed_limit() {
    let deep = zeta_series_partial(100.0, 60).unwrap();
    let mut prev = 0.0;
    for n_max in 2..=20u32 {
        let s = zeta_series_partial(100.0, n_max).unwrap();
        assert!(s.value >= prev, "series decreased at depth {n_max}");
        prev = s.value;
        assert!(
            deep.value - s.value <= s.radius,
            "depth {n_max}: radius {:e} misses the deep value",
            s.radius
        );
    }
}

#[test]
fn prime_zeta_partial_matches_direct_sum() {
    let direct: f64 = primes_up_to(100)
        .unwrap()
        .map(|p| (p as f64).powi(-2))
        .sum();
    let got = prime_zeta_partial(2, 100.0).unwrap();
    assert!((got - direct).abs() < 1e-15);

    let tail = prime_zeta_tail_bound(2, 100.0).unwrap();
    // The true P(2) limit sits within the tail bound of the partial.
    let p2 = 0.45224742004106549;
    assert!(p2 - got > 0.0 && p2 - got < tail);
}

#[test]
fn product_identity_links_reciprocals_and_series() {
    let x = 10_000.0;
    let mut l = 0.0f64;
    for p in primes_up_to(10_000).unwrap() {
        l -= (-1.0 / p as f64).ln_1p();
    }
    let s = prime_reciprocal_sum(x).unwrap();
    let series = zeta_series_auto(x).unwrap();
    assert!(
        (l - (s + series.value)).abs() <= series.radius + 1e-12,
        "product form {l} vs split {s} + {}",
        series.value
    );
}

#[test]
fn mertens_constant_from_series_route() {
    let b = mertens_b_via_zeta(1e6, default_n_max(1e6).unwrap()).unwrap();
    assert!(b.contains(MERTENS_B), "enclosure missed the constant");
    assert!(b.radius <= 1.1e-6, "radius {:e} too wide", b.radius);
    assert!((b.value - MERTENS_B).abs() < 1e-6);
}

#[test]
fn bridge_from_series_to_tail() {
    // The series partial equals (gamma - b) plus the negative tail sum.
    for x in [10.0f64, 100.0, 1_000.0, 10_000.0] {
        let series = zeta_series_auto(x).unwrap();
        let tail = b_tail(x, 1e7).unwrap();
        let lhs = series.value;
        let rhs = (GAMMA - MERTENS_B) + tail.value;
        let combined = series.radius + tail.radius;
        assert!(
            (lhs - rhs).abs() <= combined,
            "x = {x}: gap {:e} exceeds {combined:e}",
            (lhs - rhs).abs()
        );
        assert!((lhs - rhs).abs() <= 1e-8, "x = {x}");
    }
}

#[test]
fn tail_is_certifiably_negative_well_inside_the_reach() {
    let tail = b_tail(1e5, 1e7).unwrap();
    assert!(
        tail.upper() < 0.0,
        "tail upper bound {:e} not negative",
        tail.upper()
    );
    // Close to the reach the enclosure is wider than the value and the sign
    // is honestly indeterminate.
    let near = b_tail(1e6, 1e7).unwrap();
    assert!(near.value < 0.0);
    assert!(near.straddles_zero());
}

#[test]
fn frozen_double_sum_values() {
    let a = prime_power_log_sum(1e5, 40).unwrap();
    assert!((a - 0.7519672010270345).abs() < 1e-13, "got {a}");
    let b = prime_power_log_sum_indexed(1e5, 40).unwrap();
    assert!((b - 0.7533651322709482).abs() < 1e-13, "got {b}");
    let lower = prime_power_log_sum_indexed(100.0, 40).unwrap();
    assert!((lower - 0.646801365876256175).abs() < 1e-13, "got {lower}");
    assert!(lower > 0.633);
}

#[test]
fn closed_form_absorbs_the_double_sum() {
    // Sum of ln p / (p(p-1)) is the n -> infinity limit of the double sum.
    let closed = prime_power_log_closed(1e5).unwrap();
    let truncated = prime_power_log_sum(1e5, 40).unwrap();
    assert!(closed > truncated);
    // The gap is the part with p^n > x, dominated by the n = 2 terms of the
    // primes above sqrt(x).
    assert!(closed - truncated < 4e-3);

    let wide = prime_power_log_closed(1e8).unwrap();
    assert!((wide - 0.75536660083183183).abs() < 1e-12, "got {wide}");
}

#[test]
fn depth_choice_suppresses_truncation() {
    let n6 = default_n_max(1e6).unwrap();
    let n7 = default_n_max(1e7).unwrap();
    assert!(n6 >= 50, "depth {n6} too shallow");
    assert!(n7 >= n6);
    assert!(n7 <= 80, "depth {n7} implausibly deep");
}

#[test]
fn domain_errors_are_reported() {
    assert!(prime_zeta_partial(1, 100.0).is_err());
    assert!(prime_zeta_partial(2, 1.0).is_err());
    assert!(zeta_series_partial(1.5, 10).is_err());
    assert!(prime_power_log_sum(3.0, 10).is_err());
    assert!(prime_power_log_sum(100.0, 1).is_err());
    assert!(b_tail(1e6, 1e5).is_err());
}
