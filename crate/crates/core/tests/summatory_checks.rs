use nicolas_lab::prime_engine::primes_up_to;
use nicolas_lab::prime_zeta::integer_nth_root;
use nicolas_lab::summatory::{
    frac_mangoldt_ratio, frac_mangoldt_ratio_indexed, mangoldt, mangoldt_floor_sum,
    mangoldt_over_d_sum, o1, prime_reciprocal_sum, psi, r, sum_log_n, theta, CompensatedSum,
};

use proptest::prelude::*;

/// Double-double accumulator used as a higher-precision reference; exact
/// error-free transformations keep ~32 significant digits.
#[derive(Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = quick_two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[test]
fn frozen_theta_values() {
    assert!((theta(10.0).unwrap() - 5.3471075307174687).abs() < 1e-12);
    assert!((theta(1e6).unwrap() - 998484.17502563429).abs() < 1e-6);
    assert!((theta(1e7).unwrap() - 9995179.3178563119).abs() < 1e-5);
}

#[test]
fn frozen_psi_values() {
    assert!((psi(10.0).unwrap() - 7.8320141805054690).abs() < 1e-12);
    assert!((psi(100.0).unwrap() - 94.045311229357392).abs() < 1e-11);
    assert!((psi(1e6).unwrap() - 999586.59749563292).abs() < 1e-6);
}

#[test]
fn frozen_reciprocal_and_remainder_values() {
    assert!((prime_reciprocal_sum(10.0).unwrap() - 247.0 / 210.0).abs() < 1e-15);
    assert!((prime_reciprocal_sum(1e4).unwrap() - 2.4830599472335606).abs() < 1e-13);
    assert!((prime_reciprocal_sum(1e7).unwrap() - 3.0414493812797105).abs() < 1e-13);
    assert!((r(10.0).unwrap() - -0.98993265985379068).abs() < 1e-13);
    assert!((r(1e7).unwrap() - -1.3323952451572479).abs() < 1e-12);
    assert!((r(2.0).unwrap() + 2f64.ln() / 2.0).abs() < 1e-16);
}

#[test]
fn log_factorial_and_weighted_divisor_sums() {
    assert!((sum_log_n(10) - 15.104412573075515).abs() < 1e-13);
    assert!((mangoldt_over_d_sum(10).unwrap() - 1.6946506579244689).abs() < 1e-13);
}

#[test]
fn chebyshev_identity_holds_exactly() {
    for x in [1_000u64, 10_000, 100_000] {
        let lhs = sum_log_n(x);
        let rhs = mangoldt_floor_sum(x).unwrap();
        let rel = (lhs - rhs).abs() / lhs;
        assert!(rel <= 1e-12, "x = {x}: relative gap {rel:e}");
    }
}

#[test]
fn psi_is_theta_summed_over_roots() {
    for x in [100u64, 1_000, 10_000, 65_536] {
        let direct = psi(x as f64).unwrap();
        let mut via_roots = 0.0;
        for k in 1..64 {
            let root = integer_nth_root(x, k);
            if root < 2 {
                break;
            }
            via_roots += theta(root as f64).unwrap();
        }
        assert!(
            (direct - via_roots).abs() < 1e-9,
            "x = {x}: psi {direct} vs root sum {via_roots}"
        );
    }
}

#[test]
fn frozen_fractional_ratio_values() {
    let cases = [
        (10_000u64, 0.423746524243987846),
        (20_000, 0.421393035770696931),
        (50_000, 0.422388904667278544),
        (99_991, 0.423359934444571896),
    ];
    for (k, expected) in cases {
        let got = frac_mangoldt_ratio(k).unwrap();
        assert!((got - expected).abs() < 1e-12, "k = {k}: got {got}");
    }
    let tiny = frac_mangoldt_ratio(4).unwrap();
    assert!((tiny - 3f64.ln() / 12.0).abs() < 1e-16);
}

#[test]
fn frozen_fractional_ratio_indexed_values() {
    let cases = [
        (10_000u64, 0.428073752343012124),
        (20_000, 0.424142887823988571),
        (50_000, 0.424472405675905576),
        (99_991, 0.424757865689115932),
    ];
    for (k, expected) in cases {
        let got = frac_mangoldt_ratio_indexed(k, 800).unwrap();
        assert!((got - expected).abs() < 1e-11, "k = {k}: got {got}");
    }
}

#[test]
fn stirling_remainder_tracks_half_log() {
    for x in [10u64, 100, 1_000, 10_000, 100_000] {
        let expected = 0.5 * (2.0 * std::f64::consts::PI * x as f64).ln();
        assert!(
            (o1(x) - expected).abs() < 0.01,
            "x = {x}: o1 {} vs {expected}",
            o1(x)
        );
    }
}

#[test]
fn compensated_sum_tracks_double_double_at_scale() {
    let mut comp = CompensatedSum::new();
    let mut dd = DoubleDouble::default();
    let mut abs_sum = 0.0f64;
    for p in primes_up_to(1_000_000).unwrap() {
        let term = (p as f64).ln();
        comp.add(term);
        dd.add(term);
        abs_sum += term;
    }
    let budget = 2.0 * f64::EPSILON * abs_sum;
    assert!(
        (comp.value() - dd.value()).abs() <= budget,
        "compensated {} vs double-double {} exceeds {budget:e}",
        comp.value(),
        dd.value()
    );
}

#[test]
fn domain_errors_are_reported() {
    assert!(theta(1.9).is_err());
    assert!(psi(f64::NAN).is_err());
    assert!(r(1.0).is_err());
    assert!(mangoldt(0).is_err());
    assert!(frac_mangoldt_ratio(1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mangoldt_vanishes_off_prime_powers(a in 2u64..200, b in 2u64..200) {
        // a*b with two distinct prime factors unless both share one base.
        let n = a * b;
        let lambda = mangoldt(n).unwrap();
        let mut m = n;
        let mut base = 0u64;
        let mut d = 2u64;
        let mut distinct = 0;
        while d * d <= m {
            if m % d == 0 {
                distinct += 1;
                base = d;
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            distinct += 1;
            base = m;
        }
        if distinct == 1 {
            prop_assert!((lambda - (base as f64).ln()).abs() < 1e-15);
        } else {
            prop_assert_eq!(lambda, 0.0);
        }
    }

    #[test]
    fn compensated_matches_double_double(values in prop::collection::vec(-1e6f64..1e6, 1..400)) {
        let mut comp = CompensatedSum::new();
        let mut dd = DoubleDouble::default();
        let mut abs_sum = 0.0f64;
        for &v in &values {
            comp.add(v);
            dd.add(v);
            abs_sum += v.abs();
        }
        let budget = 2.0 * f64::EPSILON * abs_sum + f64::MIN_POSITIVE;
        prop_assert!((comp.value() - dd.value()).abs() <= budget);
    }

    #[test]
    fn theta_monotone_and_below_psi(x in 3.0f64..5_000.0) {
        let t = theta(x).unwrap();
        let t_prev = theta(x - 1.0).unwrap();
        let p = psi(x).unwrap();
        prop_assert!(t >= t_prev);
        prop_assert!(p >= t);
    }
}
