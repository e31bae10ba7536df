//! Segmented prime sieve with an ordered stream facade and an optional
//! on-disk cache.
//!
//! Memory stays at O(segment_size + primes below sqrt(limit)); the stream
//! never materializes the full prime list. Segments may be sieved on worker
//! threads, but delivery is always in increasing order, so downstream
//! accumulation is identical for any thread count.

use std::collections::VecDeque;
use std::fs;
use std::io::{BufReader, Read};
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default inclusive ceiling for any sieve limit. Desk-scale work lives well
/// below this; raise it explicitly if you mean to.
pub const DEFAULT_HARD_CAP: u64 = 1 << 31;

/// Default number of odd candidates per segment (128 KiB span).
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 16;

const CACHE_MAGIC: [u8; 4] = *b"PRIM";
const CACHE_VERSION: u8 = 1;

/// How many primes a cache-backed stream decodes per refill.
const CACHE_CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// Inclusive upper bound for emitted primes.
    pub limit: u64,
    /// Odd candidates per segment.
    pub segment_size: usize,
    /// Optional gap-encoded prime cache. Purely an optimization; a missing,
    /// stale, or damaged file is ignored and rewritten.
    pub cache_path: Option<PathBuf>,
    /// Resource ceiling for `limit`.
    pub hard_cap: u64,
}

impl SieveConfig {
    pub fn new(limit: u64) -> Self {
        SieveConfig {
            limit,
            segment_size: DEFAULT_SEGMENT_SIZE,
            cache_path: None,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }

    pub fn with_segment_size(mut self, segment_size: usize) -> Self {
        self.segment_size = segment_size;
        self
    }

    pub fn with_cache(mut self, path: impl Into<PathBuf>) -> Self {
        self.cache_path = Some(path.into());
        self
    }

    pub fn with_hard_cap(mut self, hard_cap: u64) -> Self {
        self.hard_cap = hard_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.limit < 2 {
            return Err(Error::Domain(format!(
                "sieve limit must be at least 2, got {}",
                self.limit
            )));
        }
        if self.segment_size < 1024 {
            return Err(Error::Domain(format!(
                "segment_size must be at least 1024, got {}",
                self.segment_size
            )));
        }
        if self.limit > self.hard_cap {
            return Err(Error::Resource(format!(
                "sieve limit {} exceeds the hard cap {}",
                self.limit, self.hard_cap
            )));
        }
        Ok(())
    }
}

/// Ordered, gap-free stream of every prime `<= limit`, starting at 2.
pub struct PrimeStream {
    limit: u64,
    current: Vec<u64>,
    pos: usize,
    source: Source,
    recorder: Option<GapRecorder>,
}

enum Source {
    Sieve(SieveState),
    Cache(CacheState),
    Done,
}

struct SieveState {
    base: Vec<u64>,
    next_lo: u64,
    seg_odds: usize,
    threads: usize,
    pending: VecDeque<Vec<u64>>,
}

struct CacheState {
    reader: BufReader<fs::File>,
    last: u64,
    /// Set once a decoded prime exceeds the requested limit; later gaps are
    /// relative to primes this stream never emitted and must not be decoded.
    finished: bool,
}

struct GapRecorder {
    path: PathBuf,
    limit: u64,
    buf: Vec<u8>,
    last: u64,
}

impl PrimeStream {
    pub fn new(config: SieveConfig) -> Result<Self> {
        Self::with_threads(config, 1)
    }

    /// Like `new`, but sieves `threads` segments concurrently per refill.
    /// The emitted sequence is identical for every thread count.
    pub fn with_threads(config: SieveConfig, threads: usize) -> Result<Self> {
        config.validate()?;
        let threads = threads.max(1);

        if let Some(path) = &config.cache_path {
            if let Some(reader) = open_valid_cache(path, config.limit) {
                return Ok(PrimeStream {
                    limit: config.limit,
                    current: Vec::new(),
                    pos: 0,
                    source: Source::Cache(CacheState {
                        reader,
                        last: 0,
                        finished: false,
                    }),
                    recorder: None,
                });
            }
        }

        let recorder = config.cache_path.as_ref().map(|path| GapRecorder {
            path: path.clone(),
            limit: config.limit,
            buf: Vec::new(),
            last: 0,
        });

        let base = small_odd_primes(config.limit.isqrt());
        Ok(PrimeStream {
            limit: config.limit,
            current: vec![2],
            pos: 0,
            source: Source::Sieve(SieveState {
                base,
                next_lo: 3,
                seg_odds: config.segment_size,
                threads,
                pending: VecDeque::new(),
            }),
            recorder,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn refill(&mut self) -> bool {
        loop {
            match &mut self.source {
                Source::Done => return false,
                Source::Sieve(state) => {
                    if let Some(seg) = state.pending.pop_front() {
                        if seg.is_empty() {
                            continue;
                        }
                        self.current = seg;
                        self.pos = 0;
                        return true;
                    }
                    if state.next_lo > self.limit {
                        if let Some(rec) = self.recorder.take() {
                            rec.flush();
                        }
                        self.source = Source::Done;
                        return false;
                    }
                    let span = 2 * state.seg_odds as u64;
                    let starts: Vec<u64> = (0..state.threads)
                        .map(|i| state.next_lo + i as u64 * span)
                        .filter(|&lo| lo <= self.limit)
                        .collect();
                    state.next_lo += state.threads as u64 * span;
                    let base = &state.base;
                    let limit = self.limit;
                    let seg_odds = state.seg_odds;
                    let segs: Vec<Vec<u64>> = if starts.len() == 1 {
                        vec![sieve_segment(base, starts[0], seg_odds, limit)]
                    } else {
                        starts
                            .par_iter()
                            .map(|&lo| sieve_segment(base, lo, seg_odds, limit))
                            .collect()
                    };
                    state.pending.extend(segs);
                }
                Source::Cache(state) => {
                    let mut chunk = Vec::with_capacity(CACHE_CHUNK);
                    while !state.finished && chunk.len() < CACHE_CHUNK {
                        match read_uleb(&mut state.reader) {
                            Some(gap) => {
                                let p = state.last + gap;
                                if p > self.limit {
                                    state.finished = true;
                                    break;
                                }
                                state.last = p;
                                chunk.push(p);
                            }
                            None => {
                                state.finished = true;
                                break;
                            }
                        }
                    }
                    if chunk.is_empty() {
                        self.source = Source::Done;
                        return false;
                    }
                    self.current = chunk;
                    self.pos = 0;
                    return true;
                }
            }
        }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.current.len() && !self.refill() {
            return None;
        }
        let p = self.current[self.pos];
        self.pos += 1;
        if let Some(rec) = &mut self.recorder {
            write_uleb(&mut rec.buf, p - rec.last);
            rec.last = p;
        }
        Some(p)
    }
}

impl GapRecorder {
    /// Best-effort cache write; the cache is advisory, so IO failures are
    /// swallowed rather than surfaced mid-iteration.
    fn flush(self) {
        let mut out = Vec::with_capacity(13 + self.buf.len());
        out.extend_from_slice(&CACHE_MAGIC);
        out.push(CACHE_VERSION);
        out.extend_from_slice(&self.limit.to_le_bytes());
        out.extend_from_slice(&self.buf);
        let tmp = self.path.with_extension("tmp");
        if fs::write(&tmp, &out).is_ok() {
            let _ = fs::rename(&tmp, &self.path);
        }
    }
}

/// Validates the whole cache file before trusting it: header, strictly
/// increasing gap decoding, no trailing garbage, and a final prime close
/// enough to the recorded limit that truncation is ruled out (prime gaps
/// below 2^31 never approach this slack). Anything off means "sieve instead".
fn open_valid_cache(path: &std::path::Path, limit: u64) -> Option<BufReader<fs::File>> {
    const GAP_SLACK: u64 = 1500;

    let mut file = fs::File::open(path).ok()?;
    let mut header = [0u8; 13];
    file.read_exact(&mut header).ok()?;
    if header[0..4] != CACHE_MAGIC || header[4] != CACHE_VERSION {
        return None;
    }
    let cached_limit = u64::from_le_bytes(header[5..13].try_into().unwrap());
    if cached_limit < limit {
        return None;
    }

    let mut reader = BufReader::new(file);
    let mut last = 0u64;
    let mut first = true;
    loop {
        match read_uleb(&mut reader) {
            Some(gap) => {
                if gap == 0 {
                    return None;
                }
                last += gap;
                if first && last != 2 {
                    return None;
                }
                first = false;
                if last > cached_limit {
                    return None;
                }
            }
            None => break,
        }
    }
    if first || last + GAP_SLACK < cached_limit {
        return None;
    }

    let mut file = fs::File::open(path).ok()?;
    let mut skip = [0u8; 13];
    file.read_exact(&mut skip).ok()?;
    Some(BufReader::new(file))
}

fn write_uleb(buf: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            buf.push(byte);
            return;
        }
        buf.push(byte | 0x80);
    }
}

/// Reads one LEB128 value; `None` on clean EOF or any malformed byte run.
fn read_uleb(reader: &mut impl Read) -> Option<u64> {
    let mut out = 0u64;
    let mut shift = 0u32;
    loop {
        let mut byte = [0u8; 1];
        match reader.read(&mut byte) {
            Ok(1) => {}
            _ => return None,
        }
        if shift >= 64 {
            return None;
        }
        out |= u64::from(byte[0] & 0x7f) << shift;
        if byte[0] & 0x80 == 0 {
            return Some(out);
        }
        shift += 7;
    }
}

/// Odd primes up to `n` inclusive, by a plain dense sieve. Used only for the
/// base primes below sqrt(limit).
fn small_odd_primes(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let count = ((n - 3) / 2 + 1) as usize;
    let mut composite = vec![false; count];
    let mut i = 0usize;
    loop {
        let p = 3 + 2 * i as u64;
        if p * p > n {
            break;
        }
        if !composite[i] {
            let mut m = p * p;
            while m <= n {
                composite[((m - 3) / 2) as usize] = true;
                m += 2 * p;
            }
        }
        i += 1;
    }
    (0..count)
        .filter(|&i| !composite[i])
        .map(|i| 3 + 2 * i as u64)
        .collect()
}

/// Sieve the odd candidates `lo, lo+2, ..` (`count` of them, clipped to
/// `limit`) against the base primes. `lo` must be odd and >= 3.
fn sieve_segment(base: &[u64], lo: u64, count: usize, limit: u64) -> Vec<u64> {
    debug_assert!(lo % 2 == 1 && lo >= 3);
    let hi_unclipped = lo + 2 * (count as u64 - 1);
    let hi = hi_unclipped.min(if limit % 2 == 0 { limit - 1 } else { limit });
    if lo > hi {
        return Vec::new();
    }
    let slots = ((hi - lo) / 2 + 1) as usize;
    let mut composite = vec![false; slots];
    for &p in base {
        if p * p > hi {
            break;
        }
        let mut m = p * p;
        if m < lo {
            let mut k = lo.div_ceil(p);
            if k % 2 == 0 {
                k += 1;
            }
            m = k * p;
        }
        while m <= hi {
            composite[((m - lo) / 2) as usize] = true;
            m += 2 * p;
        }
    }
    (0..slots)
        .filter(|&i| !composite[i])
        .map(|i| lo + 2 * i as u64)
        .collect()
}

/// All primes up to `limit` as an ordered stream, with default sieve settings.
pub fn primes_up_to(limit: u64) -> Result<PrimeStream> {
    PrimeStream::new(SieveConfig::new(limit))
}

/// Number of primes `<= x`. Negative or non-finite `x` is a domain error;
/// `x < 2` counts zero primes.
pub fn prime_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "prime_count needs a finite x >= 0, got {x}"
        )));
    }
    if x < 2.0 {
        return Ok(0);
    }
    let stream = primes_up_to(x.floor() as u64)?;
    Ok(stream.count() as u64)
}

/// The `j`-th prime, 1-indexed (`nth_prime(1) == 2`).
pub fn nth_prime(j: u64) -> Result<u64> {
    if j == 0 {
        return Err(Error::Domain("prime indices start at 1".into()));
    }
    // p_j < j (ln j + ln ln j) for j >= 6; small cases fit under 13.
    let bound = if j < 6 {
        13
    } else {
        let jf = j as f64;
        (jf * (jf.ln() + jf.ln().ln())).ceil() as u64 + 2
    };
    if bound > DEFAULT_HARD_CAP {
        return Err(Error::Range(format!(
            "prime index {j} needs a sieve past the hard cap"
        )));
    }
    let mut stream = primes_up_to(bound)?;
    stream
        .nth(j as usize - 1)
        .ok_or_else(|| Error::Range(format!("prime index {j} beyond sieved range")))
}
