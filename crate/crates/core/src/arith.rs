//! Segmented tabulation of the multiplicative functions μ, φ, σ, ω and
//! exact squarefree counting.
//!
//! Each segment keeps a running cofactor per entry: every base prime
//! p ≤ √(segment end) is divided out completely while the p-part of φ and σ
//! is multiplied in; whatever cofactor remains afterwards is either 1 or a
//! single prime larger than the square root, which contributes one final
//! factor. This fully determines all four functions with O(n log log n)
//! total work and memory bounded by the segment length.
//!
//! Conventions at n = 1: μ = 1, φ = 1, σ = 1, ω = 0.

use rayon::prelude::*;
use serde::Serialize;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::primes::{isqrt, simple_primes};
use crate::report::{BoundReport, CONSTANT_SLACK_REL};

/// Default entries per segment (the sweet spot between cache pressure and
/// per-segment overhead).
pub const DEFAULT_SEGMENT_LENGTH: usize = 1 << 22;
/// Default cap on entries a materialized table may hold (~600 MB).
pub const DEFAULT_TABLE_BUDGET: usize = 1 << 25;
/// Largest supported tabulation endpoint.
pub const MAX_TABLE_END: u64 = 1_000_000_000_000;

/// Coefficient of √z in the squarefree-count error bound being verified.
pub const SQUAREFREE_ERROR_COEFF: f64 = 0.68;

/// One tabulated block `[base, base + len)`.
#[derive(Clone, Debug)]
pub struct Segment {
    pub base: u64,
    pub mu: Vec<i8>,
    pub phi: Vec<u64>,
    pub sigma: Vec<u64>,
    pub omega: Vec<u8>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Last covered value (inclusive).
    pub fn end(&self) -> u64 {
        self.base + self.len() as u64 - 1
    }
}

pub(crate) fn build_segment(base: u64, len: usize, base_primes: &[u64]) -> Segment {
    debug_assert!(base >= 1 && len >= 1);
    let end = base + len as u64 - 1;
    let mut rem: Vec<u64> = (base..=end).collect();
    let mut mu = vec![1i8; len];
    let mut phi = vec![1u64; len];
    let mut sigma = vec![1u64; len];
    let mut omega = vec![0u8; len];

    for &p in base_primes {
        if p * p > end {
            break;
        }
        let mut m = base.div_ceil(p) * p;
        while m <= end {
            let i = (m - base) as usize;
            let mut pe = 1u64;
            let mut e = 0u32;
            while rem[i].is_multiple_of(p) {
                rem[i] /= p;
                pe *= p;
                e += 1;
            }
            phi[i] *= pe / p * (p - 1);
            sigma[i] *= (pe * p - 1) / (p - 1);
            omega[i] += 1;
            mu[i] = if e >= 2 { 0 } else { -mu[i] };
            m += p;
        }
    }
    // Leftover cofactor: a single prime above √end.
    for i in 0..len {
        let q = rem[i];
        if q > 1 {
            phi[i] *= q - 1;
            sigma[i] *= q + 1;
            omega[i] += 1;
            mu[i] = -mu[i];
        }
    }
    Segment {
        base,
        mu,
        phi,
        sigma,
        omega,
    }
}

fn validate_range(lo: u64, hi: u64, segment_length: usize) -> Result<()> {
    if lo < 1 || hi < lo {
        return Err(Error::Precondition(format!(
            "need 1 ≤ lo ≤ hi, got lo={lo} hi={hi}"
        )));
    }
    if segment_length < 1 {
        return Err(Error::Precondition("segment_length must be ≥ 1".into()));
    }
    if hi > MAX_TABLE_END {
        return Err(Error::Resource(format!(
            "tabulation end {hi} exceeds supported maximum {MAX_TABLE_END}"
        )));
    }
    Ok(())
}

/// Visit the segments tiling `[lo, hi]` in ascending order.
pub fn stream_segments<F: FnMut(&Segment)>(
    lo: u64,
    hi: u64,
    segment_length: usize,
    mut visit: F,
) -> Result<()> {
    validate_range(lo, hi, segment_length)?;
    let base_primes = simple_primes(isqrt(hi));
    let mut base = lo;
    while base <= hi {
        let len = (hi - base + 1).min(segment_length as u64) as usize;
        let seg = build_segment(base, len, &base_primes);
        visit(&seg);
        base += len as u64;
    }
    Ok(())
}

/// Map the segments tiling `[lo, hi]` in parallel; results come back in
/// base order, so any order-sensitive reduction stays deterministic.
pub fn par_map_segments<T, M>(lo: u64, hi: u64, segment_length: usize, map: M) -> Result<Vec<T>>
where
    T: Send,
    M: Fn(&Segment) -> T + Sync,
{
    validate_range(lo, hi, segment_length)?;
    let base_primes = simple_primes(isqrt(hi));
    let seg_len = segment_length as u64;
    let n_segs = (hi - lo + 1).div_ceil(seg_len);
    Ok((0..n_segs)
        .into_par_iter()
        .map(|i| {
            let base = lo + i * seg_len;
            let len = (hi - base + 1).min(seg_len) as usize;
            map(&build_segment(base, len, &base_primes))
        })
        .collect())
}

/// Values of μ, φ, σ, ω for every n in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ArithTable {
    lo: u64,
    mu: Vec<i8>,
    phi: Vec<u64>,
    sigma: Vec<u64>,
    omega: Vec<u8>,
}

impl ArithTable {
    /// Tabulate with default segment length and memory budget.
    pub fn tabulate(lo: u64, hi: u64) -> Result<Self> {
        Self::tabulate_with(lo, hi, DEFAULT_SEGMENT_LENGTH, DEFAULT_TABLE_BUDGET)
    }

    pub fn tabulate_with(
        lo: u64,
        hi: u64,
        segment_length: usize,
        budget_entries: usize,
    ) -> Result<Self> {
        validate_range(lo, hi, segment_length)?;
        let entries = hi - lo + 1;
        if entries > budget_entries as u64 {
            return Err(Error::Resource(format!(
                "{entries} entries exceed the table budget of {budget_entries}; \
                 stream segments instead"
            )));
        }
        let entries = entries as usize;
        let mut table = ArithTable {
            lo,
            mu: Vec::with_capacity(entries),
            phi: Vec::with_capacity(entries),
            sigma: Vec::with_capacity(entries),
            omega: Vec::with_capacity(entries),
        };
        let segments = par_map_segments(lo, hi, segment_length, |seg| seg.clone())?;
        for seg in segments {
            table.mu.extend_from_slice(&seg.mu);
            table.phi.extend_from_slice(&seg.phi);
            table.sigma.extend_from_slice(&seg.sigma);
            table.omega.extend_from_slice(&seg.omega);
        }
        Ok(table)
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.mu.len() as u64 - 1
    }

    pub fn covers(&self, lo: u64, hi: u64) -> bool {
        self.lo <= lo && hi <= self.hi()
    }

    fn idx(&self, n: u64) -> usize {
        assert!(
            n >= self.lo && n <= self.hi(),
            "n={} outside tabulated range [{}, {}]",
            n,
            self.lo,
            self.hi()
        );
        (n - self.lo) as usize
    }

    pub fn mu(&self, n: u64) -> i8 {
        self.mu[self.idx(n)]
    }

    pub fn phi(&self, n: u64) -> u64 {
        self.phi[self.idx(n)]
    }

    pub fn sigma(&self, n: u64) -> u64 {
        self.sigma[self.idx(n)]
    }

    pub fn omega(&self, n: u64) -> u8 {
        self.omega[self.idx(n)]
    }

    /// n ≥ 2 is prime exactly when φ(n) = n − 1.
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.phi(n) == n - 1
    }

    /// Little-endian dump: magic `WBT1`, lo, hi, then per-n records
    /// (μ: i8, φ: u64, σ: u64, ω: u8).
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"WBT1")?;
        w.write_all(&self.lo.to_le_bytes())?;
        w.write_all(&self.hi().to_le_bytes())?;
        for i in 0..self.mu.len() {
            w.write_all(&self.mu[i].to_le_bytes())?;
            w.write_all(&self.phi[i].to_le_bytes())?;
            w.write_all(&self.sigma[i].to_le_bytes())?;
            w.write_all(&self.omega[i].to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"WBT1" {
            return Err(Error::Parse("bad magic, expected WBT1".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let lo = u64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let hi = u64::from_le_bytes(word);
        if lo < 1 || hi < lo {
            return Err(Error::Parse(format!("bad table range [{lo}, {hi}]")));
        }
        let entries = (hi - lo + 1) as usize;
        let mut table = ArithTable {
            lo,
            mu: Vec::with_capacity(entries),
            phi: Vec::with_capacity(entries),
            sigma: Vec::with_capacity(entries),
            omega: Vec::with_capacity(entries),
        };
        let mut rec = [0u8; 18];
        for _ in 0..entries {
            r.read_exact(&mut rec)?;
            table.mu.push(rec[0] as i8);
            table
                .phi
                .push(u64::from_le_bytes(rec[1..9].try_into().unwrap()));
            table
                .sigma
                .push(u64::from_le_bytes(rec[9..17].try_into().unwrap()));
            table.omega.push(rec[17]);
        }
        Ok(table)
    }
}

/// Squarefree flags for `[base, base + len)`: false exactly when some p²
/// divides n.
fn squarefree_flags(base: u64, len: usize, base_primes: &[u64]) -> Vec<bool> {
    let end = base + len as u64 - 1;
    let mut flags = vec![true; len];
    for &p in base_primes {
        let q = p * p;
        if q > end {
            break;
        }
        let mut m = base.div_ceil(q) * q;
        while m <= end {
            flags[(m - base) as usize] = false;
            m += q;
        }
    }
    flags
}

/// Exact number of squarefree integers ≤ z.
pub fn squarefree_count(z: u64) -> u64 {
    squarefree_counts_at(&[z])[0]
}

/// Exact squarefree counts at several checkpoints from one sieve pass over
/// `[1, max(points)]`. Results are returned in input order.
pub fn squarefree_counts_at(points: &[u64]) -> Vec<u64> {
    if points.is_empty() {
        return Vec::new();
    }
    let zmax = *points.iter().max().unwrap();
    assert!(points.iter().all(|&z| z >= 1), "counts need z ≥ 1");
    let base_primes = simple_primes(isqrt(zmax));
    let seg_len = DEFAULT_SEGMENT_LENGTH as u64;
    let n_segs = zmax.div_ceil(seg_len);

    // Sorted unique checkpoints, partitioned per segment.
    let mut sorted: Vec<u64> = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let per_segment: Vec<(u64, Vec<(u64, u64)>)> = (0..n_segs)
        .into_par_iter()
        .map(|i| {
            let base = 1 + i * seg_len;
            let len = (zmax - base + 1).min(seg_len) as usize;
            let end = base + len as u64 - 1;
            let flags = squarefree_flags(base, len, &base_primes);
            let mut local = Vec::new();
            let lo_idx = sorted.partition_point(|&z| z < base);
            let hi_idx = sorted.partition_point(|&z| z <= end);
            let mut cursor = 0usize;
            let mut running = 0u64;
            for &z in &sorted[lo_idx..hi_idx] {
                let upto = (z - base + 1) as usize;
                running += flags[cursor..upto].iter().filter(|&&f| f).count() as u64;
                cursor = upto;
                local.push((z, running));
            }
            let total = running + flags[cursor..].iter().filter(|&&f| f).count() as u64;
            (total, local)
        })
        .collect();

    let mut at_point = std::collections::HashMap::new();
    let mut prefix = 0u64;
    for (total, local) in per_segment {
        for (z, within) in local {
            at_point.insert(z, prefix + within);
        }
        prefix += total;
    }
    points.iter().map(|z| at_point[z]).collect()
}

/// Sweep every integer z in `[1, z_max]` and verify
/// |Q(z) − (6/π²)z| ≤ 0.68√z, reporting the largest normalized error and
/// the z attaining it.
pub fn squarefree_error_sweep(z_max: u64) -> Result<BoundReport> {
    if z_max < 1 {
        return Err(Error::Precondition(
            "squarefree sweep needs z_max ≥ 1".into(),
        ));
    }
    let density = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let base_primes = simple_primes(isqrt(z_max));
    let mut count = 0u64;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_z = 0u64;
    let seg_len = DEFAULT_SEGMENT_LENGTH as u64;
    let mut base = 1u64;
    while base <= z_max {
        let len = (z_max - base + 1).min(seg_len) as usize;
        let flags = squarefree_flags(base, len, &base_primes);
        for (i, &f) in flags.iter().enumerate() {
            let z = base + i as u64;
            if f {
                count += 1;
            }
            let ratio = ((count as f64) - density * z as f64).abs() / (z as f64).sqrt();
            if ratio > worst {
                worst = ratio;
                worst_z = z;
            }
        }
        base += len as u64;
    }
    Ok(BoundReport::non_strict(
        "squarefree-count-error",
        worst,
        SQUAREFREE_ERROR_COEFF,
        CONSTANT_SLACK_REL,
        serde_json::json!({ "z_max": z_max, "argmax_z": worst_z }),
    ))
}

/// Summary row for one tabulated range (used by the CLI).
#[derive(Clone, Debug, Serialize)]
pub struct TableSummary {
    pub lo: u64,
    pub hi: u64,
    pub entries: u64,
    pub primes: u64,
    pub squarefree: u64,
}

impl ArithTable {
    pub fn summary(&self) -> TableSummary {
        let mut primes = 0u64;
        let mut squarefree = 0u64;
        for n in self.lo..=self.hi() {
            if self.is_prime(n) {
                primes += 1;
            }
            if self.mu(n) != 0 {
                squarefree += 1;
            }
        }
        TableSummary {
            lo: self.lo,
            hi: self.hi(),
            entries: self.mu.len() as u64,
            primes,
            squarefree,
        }
    }
}
