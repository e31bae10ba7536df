//! Prime summatory functions, prime-zeta partials, the Mertens error term,
//! and the Nicolas inequality, evaluated at desk scale with explicit
//! truncation radii.
//!
//! The crate is organized as a stack: a segmented sieve streams primes in
//! order, compensated accumulators turn them into the classical sums, and
//! the higher modules combine those sums into error terms, inequality
//! margins, and full scan reports. Everything truncated carries a
//! [`BoundedReal`] enclosure instead of a bare float.

pub mod bounded;
pub mod error;
pub mod error_term;
pub mod nicolas;
pub mod prime_engine;
pub mod prime_zeta;
pub mod quad;
pub mod scanner;
pub mod summatory;

pub use bounded::BoundedReal;
pub use error::{Error, Result};
pub use error_term::{
    b_via_integral, b_via_integral_with, bigo_via_integral, bigo_via_integral_with, e,
    stieltjes_decomposition_check, zeta2_integral, StepIntegrand, R_ENVELOPE,
};
pub use nicolas::{
    c_x_decomposition, classify, corollary_check, error_envelope_scan, exact_holds, exact_margin,
    implication_check, implication_check_with, nicolas_holds, nicolas_holds_with, nicolas_margin,
    nicolas_margin_series, CorollaryBranch, CxDecomposition, EnvelopeReport, ImplicationReport,
    NicolasVerdict,
};
pub use prime_engine::{
    nth_prime, prime_count, primes_up_to, PrimeStream, SieveConfig, DEFAULT_HARD_CAP,
};
pub use prime_zeta::{
    b_tail, default_n_max, mertens_b_via_zeta, prime_power_log_closed, prime_power_log_sum,
    prime_power_log_sum_indexed, prime_zeta_partial, prime_zeta_tail_bound, zeta_series_auto,
    zeta_series_partial, GAMMA, MERTENS_B,
};
pub use quad::adaptive_simpson;
pub use scanner::{
    reproduce, row_at, scan, scan_segment, scan_with_options, write_csv, write_json,
    CheckpointMode, OutputFormat, Row, ScanCarry, ScanConfig, ScanOptions, ScanReport, SignEvent,
    Threshold, Verdict,
};
pub use summatory::{
    frac_mangoldt_ratio, frac_mangoldt_ratio_indexed, mangoldt, mangoldt_floor_sum,
    mangoldt_over_d_sum, o1, prime_reciprocal_sum, psi, r, sum_log_n, theta, Checkpoint,
    CompensatedSum, PrimeAccumulator,
};
