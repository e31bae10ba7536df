//! Desk-scale acceptance gate. Thirteen criteria, each printing one
//! pass/fail line (visible with `--nocapture`) and asserting. The heavy
//! shared work is one every-prime scan of [5, 10^7] with tail sums cut at
//! 10^8, built once.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use nicolas_lab::error_term::{b_via_integral_with, bigo_via_integral_with, e, zeta2_integral, StepIntegrand};
use nicolas_lab::nicolas::exact_margin;
use nicolas_lab::prime_zeta::{
    b_tail, default_n_max, mertens_b_via_zeta, prime_power_log_sum, prime_power_log_sum_indexed,
    zeta_series_auto, GAMMA, MERTENS_B,
};
use nicolas_lab::scanner::{
    scan_segment, scan_with_options, write_csv, ScanConfig, ScanOptions, ScanReport,
};
use nicolas_lab::summatory::{frac_mangoldt_ratio, mangoldt_floor_sum, sum_log_n};

struct Fixture {
    report: ScanReport,
    integrand: StepIntegrand,
    scan_secs: f64,
}

static FIXTURE: OnceLock<Fixture> = OnceLock::new();

fn fixture() -> &'static Fixture {
    FIXTURE.get_or_init(|| {
        let mut cfg = ScanConfig::new(5, 10_000_000);
        cfg.prime_limit_for_tails = 100_000_000;
        let opts = ScanOptions { threads: 4, cache: None };
        let t0 = Instant::now();
        let report = scan_with_options(&cfg, &opts).expect("desk-scale scan");
        let scan_secs = t0.elapsed().as_secs_f64();
        let integrand = StepIntegrand::build(1e7).expect("step integrand to 10^7");
        Fixture { report, integrand, scan_secs }
    })
}

fn verdict(number: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number:02} [{tag}] {name}: {detail}");
    assert!(pass, "criterion {number:02} {name}: {detail}");
}

#[test]
fn criterion_01_fractional_ratio_window() {
    let t0 = Instant::now();
    let mut inside = true;
    let mut values = Vec::new();
    for k in [10_000u64, 20_000, 50_000, 99_991] {
        let f = frac_mangoldt_ratio(k).unwrap();
        inside &= 0.41 < f && f < 0.43;
        values.push(format!("F({k}) = {f:.6}"));
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = inside && secs < 30.0;
    verdict(
        1,
        "fractional-part ratio inside (0.41, 0.43)",
        pass,
        &format!("{} in {secs:.2}s", values.join(", ")),
    );
}

#[test]
fn criterion_02_double_sum_reading() {
    let t0 = Instant::now();
    let target = 0.753365132271f64;
    let value_cut = prime_power_log_sum(1e5, 40).unwrap();
    let index_cut = prime_power_log_sum_indexed(1e5, 40).unwrap();
    let dv = (value_cut - target).abs();
    let di = (index_cut - target).abs();
    let secs = t0.elapsed().as_secs_f64();
    let matched = di <= 1e-9;
    let pass = dv.min(di) <= 1e-6 && matched && secs < 5.0;
    verdict(
        2,
        "double prime-power log sum at 10^5, depth 40",
        pass,
        &format!(
            "index-cut reading matches the quoted value to {di:.1e}; value-cut differs by {dv:.1e}; {secs:.2}s"
        ),
    );
}

#[test]
fn criterion_03_r_window() {
    let fx = fixture();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut inside = true;
    for row in fx.report.checkpoints.iter().filter(|r| r.x >= 100) {
        inside &= -1.645 < row.r && row.r < -0.048;
        lo = lo.min(row.r);
        hi = hi.max(row.r);
    }
    let pass = inside && fx.scan_secs < 120.0;
    verdict(
        3,
        "R(x) inside (-1.645, -0.048) on [100, 10^7]",
        pass,
        &format!("range [{lo:.6}, {hi:.6}], scan took {:.1}s", fx.scan_secs),
    );
}

#[test]
fn criterion_04_e_log_window() {
    let fx = fixture();
    let mut worst = 0.0f64;
    let mut inside = true;
    for row in fx.report.checkpoints.iter().filter(|r| r.x >= 100) {
        let product = row.e.value.abs() * (row.x as f64).ln();
        inside &= product < 1.597;
        worst = worst.max(product);
    }
    verdict(
        4,
        "|E(x)| ln x below 1.597 on [100, 10^7]",
        inside,
        &format!("largest product {worst:.6}"),
    );
}

#[test]
fn criterion_05_mertens_constant_two_routes() {
    let fx = fixture();
    let series = mertens_b_via_zeta(1e6, default_n_max(1e6).unwrap()).unwrap();
    let series_ok = series.contains(MERTENS_B) && series.radius <= 1.1e-6;
    let integral = b_via_integral_with(&fx.integrand).unwrap();
    let integral_ok = integral.contains(MERTENS_B);
    verdict(
        5,
        "Mertens constant enclosed by both routes",
        series_ok && integral_ok,
        &format!(
            "series {:.12} radius {:.2e}; integral {:.4} radius {:.2e}",
            series.value, series.radius, integral.value, integral.radius
        ),
    );
}

#[test]
fn criterion_06_bridge_identity() {
    let mut worst = 0.0f64;
    let mut pass = true;
    for x in [10.0f64, 1e2, 1e3, 1e4] {
        let series = zeta_series_auto(x).unwrap();
        let tail = b_tail(x, 1e7).unwrap();
        let diff = (series.value - (GAMMA - MERTENS_B) - tail.value).abs();
        pass &= diff <= series.radius + tail.radius && diff <= 1e-8;
        worst = worst.max(diff);
    }
    verdict(
        6,
        "series partial equals (gamma - b) + B(x) within radii",
        pass,
        &format!("largest gap {worst:.2e} over x in {{10, 10^2, 10^3, 10^4}}"),
    );
}

#[test]
fn criterion_07_integral_error_route() {
    let fx = fixture();
    let mut worst = 0.0f64;
    let mut pass = true;
    for x in [10.0f64, 1e2, 1e3, 1e4, 1e5] {
        let interval = bigo_via_integral_with(&fx.integrand, x).unwrap();
        let direct = e(x).unwrap();
        pass &= interval.contains(direct);
        worst = worst.max((interval.value - direct).abs());
    }
    verdict(
        7,
        "integral route encloses E(x)",
        pass,
        &format!("largest centre gap {worst:.2e} over x in {{10, ..., 10^5}}"),
    );
}

#[test]
fn criterion_08_inequality_at_every_prime() {
    let fx = fixture();
    let all_hold = fx.report.checkpoints.iter().all(|r| r.nicolas_holds);
    let mut exact_gap = 0.0f64;
    for row in fx.report.checkpoints.iter().filter(|r| r.x <= 50) {
        let exact = exact_margin(row.x).unwrap();
        exact_gap = exact_gap.max((row.margin - exact).abs());
    }
    let pass = all_hold && exact_gap <= 1e-9;
    verdict(
        8,
        "inequality margin positive at every prime in [5, 10^7]",
        pass,
        &format!(
            "{} rows all hold; float vs big-integer margin gap {exact_gap:.2e} for x <= 50",
            fx.report.checkpoints.len()
        ),
    );
}

#[test]
fn criterion_09_corollary_consistency() {
    let fx = fixture();
    let contradictions = fx
        .report
        .checkpoints
        .iter()
        .filter(|r| r.corollary.prediction().is_some_and(|p| p != r.nicolas_holds))
        .count();
    verdict(
        9,
        "zero corollary contradictions",
        contradictions == 0,
        &format!("{contradictions} contradictions across {} rows", fx.report.checkpoints.len()),
    );
}

#[test]
fn criterion_10_theta_bounds() {
    let fx = fixture();
    let mut below = true;
    let mut refined = true;
    let mut worst_ratio = 0.0f64;
    for row in &fx.report.checkpoints {
        let x = row.x as f64;
        below &= row.theta < x;
        if row.x >= 100 {
            refined &= row.theta < x * (1.0 + 1.0 / (2.0 * x.ln()));
        }
        worst_ratio = worst_ratio.max(row.theta / x);
    }
    verdict(
        10,
        "theta(x) < x, and < x(1 + 1/(2 ln x)) past 100",
        below && refined,
        &format!("largest theta(x)/x ratio {worst_ratio:.6}"),
    );
}

#[test]
fn criterion_11_chebyshev_identity() {
    let mut worst = 0.0f64;
    for x in [1_000u64, 100_000, 1_000_000] {
        let lhs = sum_log_n(x);
        let rhs = mangoldt_floor_sum(x).unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    verdict(
        11,
        "log factorial equals the weighted divisor sum",
        worst <= 1e-9,
        &format!("largest relative gap {worst:.2e} at x in {{10^3, 10^5, 10^6}}"),
    );
}

#[test]
fn criterion_12_zeta2_integral() {
    let pi2_6 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let z = zeta2_integral(1e8).unwrap();
    let diff = (z.value - pi2_6).abs();
    verdict(
        12,
        "Bose integral recovers pi^2/6",
        diff <= 1e-6,
        &format!("off by {diff:.2e}, enclosure radius {:.2e}", z.radius),
    );
}

#[test]
fn criterion_13_shard_and_thread_invariance() {
    let opts = ScanOptions::default();

    let mut full_cfg = ScanConfig::new(1_000, 1_000_000);
    full_cfg.prime_limit_for_tails = 10_000_000;
    let full = scan_with_options(&full_cfg, &opts).unwrap();
    let mut full_csv = Vec::new();
    write_csv(&full.checkpoints, 17, &mut full_csv).unwrap();

    let bounds = [1_000u64, 250_000, 500_000, 750_000, 1_000_000];
    let mut carry = None;
    let mut sharded_csv = Vec::new();
    let mut header_done = false;
    for w in bounds.windows(2) {
        let mut cfg = ScanConfig::new(w[0], w[1]);
        cfg.prime_limit_for_tails = 10_000_000;
        let (part, next) = scan_segment(&cfg, carry.as_ref(), &opts).unwrap();
        let mut piece = Vec::new();
        write_csv(&part.checkpoints, 17, &mut piece).unwrap();
        if header_done {
            let body = piece.splitn(2, |&b| b == b'\n').nth(1).unwrap();
            sharded_csv.extend_from_slice(body);
        } else {
            sharded_csv.extend_from_slice(&piece);
            header_done = true;
        }
        carry = Some(next);
    }
    let shards_match = sharded_csv == full_csv;

    let cli = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nicolas-lab"))
            .args(["scan", "--from", "1000", "--to", "1000000", "--threads", threads])
            .output()
            .unwrap()
    };
    let one = cli("1");
    let four = cli("4");
    let cli_match = one.status.success()
        && four.status.success()
        && one.stdout == four.stdout
        && one.stdout == full_csv;

    verdict(
        13,
        "sharded, sequential, and multithreaded scans agree byte for byte",
        shards_match && cli_match,
        &format!(
            "{} bytes over {} rows of [10^3, 10^6]",
            full_csv.len(),
            full.checkpoints.len()
        ),
    );
}
