//! The large-range inequality sweep.
//!
//! For every integer z in `[z_min, z_max)` the running triple
//! (S₁(z), H₁(z), π(z)) is advanced incrementally and the test inequality
//!
//! ```text
//! Y/S₁(z) + H₁(z)²/S₁(z)² + π(z)  <  2Y/log(Y)
//! ```
//!
//! is evaluated at Y = 4z² and Y = 4(z+1)². Concavity of t ↦ t/log(t) above
//! e² (spot-checked and recorded in the report) lifts the two-point check to
//! every Y between consecutive grid points.
//!
//! Determinism: the range is tiled into fixed absolute blocks of
//! [`BLOCK_LEN`] integers. Block partial sums are computed independently and
//! prefix-merged in block order, so the state entering each block — and
//! hence every reported number — is a pure function of the configuration,
//! independent of thread count and of where a resumed run picked up.
//! Checkpoints are emitted only at block boundaries for the same reason.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::PathBuf;

use crate::arith::{self, Segment};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::primes::{isqrt, simple_primes};
use crate::report::{BoundReport, CheckStatus, ConstantsReport, SWEEP_SLACK_REL};

/// Absolute block grid: block b covers [b·BLOCK_LEN + 1, (b+1)·BLOCK_LEN].
pub const BLOCK_LEN: u64 = 1 << 20;
/// Blocks scheduled per parallel batch.
const CHUNK_BLOCKS: u64 = 64;
/// Diagnostic detail is kept for at most this many flagged checks.
const FLAGGED_CAP: usize = 100;

/// Running (z, S₁, H₁, π) with compensated accumulators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SweepState {
    pub z: u64,
    pub s1: KahanSum,
    pub h1: KahanSum,
    pub piz: u64,
}

impl SweepState {
    pub fn initial() -> Self {
        SweepState::default()
    }

    /// Fold in the value at n = z + 1 (values from a tabulated segment).
    pub fn advance(&mut self, n: u64, mu: i8, phi: u64, sigma: u64) {
        debug_assert_eq!(n, self.z + 1, "sweep state must advance contiguously");
        self.z = n;
        if mu != 0 {
            self.s1.add(1.0 / phi as f64);
            self.h1.add(sigma as f64 / phi as f64);
        }
        if n >= 2 && phi == n - 1 {
            self.piz += 1;
        }
    }

    /// Append a whole block's partial sums (prefix-merge step).
    fn merge_block(&mut self, block: &BlockSummary) {
        debug_assert_eq!(self.z + 1, block.first);
        self.z = block.last;
        self.s1.merge(block.s1);
        self.h1.merge(block.h1);
        self.piz += block.pi;
    }

    /// Fresh sequential recomputation; an independent route used to validate
    /// incremental states at checkpoints.
    pub fn recompute(z: u64) -> Result<Self> {
        let mut state = SweepState::initial();
        if z == 0 {
            return Ok(state);
        }
        arith::stream_segments(1, z, arith::DEFAULT_SEGMENT_LENGTH, |seg| {
            for i in 0..seg.len() {
                let n = seg.base + i as u64;
                state.advance(n, seg.mu[i], seg.phi[i], seg.sigma[i]);
            }
        })?;
        Ok(state)
    }

    /// Relative agreement with another state for the same z.
    pub fn agrees_with(&self, other: &SweepState, rel_tol: f64) -> bool {
        self.z == other.z
            && self.piz == other.piz
            && (self.s1.value() - other.s1.value()).abs() <= rel_tol * other.s1.value().abs()
            && (self.h1.value() - other.h1.value()).abs() <= rel_tol * other.h1.value().abs()
    }
}

/// lhs and rhs of the test inequality at (Y, S₁, H₁, π).
pub fn eval_test(y: f64, s1: f64, h1: f64, piz: u64) -> (f64, f64) {
    let ratio = h1 / s1;
    (y / s1 + ratio * ratio + piz as f64, 2.0 * y / y.ln())
}

/// Judge the test inequality at one point; strict with the sweep slack.
pub fn test_inequality(y: f64, s1: f64, h1: f64, piz: u64) -> Result<BoundReport> {
    if y.is_nan() || y <= 1.0 {
        return Err(Error::Precondition(format!(
            "test inequality needs Y > 1 (log positive), got Y={y}"
        )));
    }
    if s1.is_nan() || s1 <= 0.0 {
        return Err(Error::Precondition(format!(
            "test inequality needs S1 > 0, got {s1}"
        )));
    }
    let (lhs, rhs) = eval_test(y, s1, h1, piz);
    Ok(BoundReport::strict(
        "test-inequality",
        lhs,
        rhs,
        SWEEP_SLACK_REL,
        serde_json::json!({ "Y": y, "S1": s1, "H1": h1, "piz": piz }),
    ))
}

/// Spot-check that t ↦ t/log(t) is concave above e²: chords sampled on a
/// log grid must not exceed the function. Reports the minimum
/// function/chord ratio.
pub fn concavity_check() -> ConstantsReport {
    let lo = 7.5f64; // just above e² ≈ 7.389
    let hi = 1.6e19;
    let points = 400usize;
    let step = (hi / lo).ln() / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo * (step * i as f64).exp()).collect();
    let g = |t: f64| t / t.ln();
    let mut min_ratio = f64::INFINITY;
    for gap in [1usize, 7, 50] {
        for i in 0..points.saturating_sub(gap) {
            let (t0, t1) = (grid[i], grid[i + gap]);
            for lam_idx in 1..20 {
                let lam = lam_idx as f64 / 20.0;
                let t = lam * t0 + (1.0 - lam) * t1;
                let chord = lam * g(t0) + (1.0 - lam) * g(t1);
                min_ratio = min_ratio.min(g(t) / chord);
            }
        }
    }
    ConstantsReport::lower_bound_check("t-over-log-t-concavity-min-ratio", min_ratio, 1.0)
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub z_min: u64,
    pub z_max: u64,
    /// Desired checkpoint spacing in z; rounded up to whole blocks.
    pub checkpoint_stride: u64,
    /// Where to append checkpoint JSON lines (none: keep in memory only).
    pub checkpoint_path: Option<PathBuf>,
    /// Resume from the last checkpoint line of this file.
    pub resume_from: Option<PathBuf>,
    /// Recompute (S₁, H₁, π) from scratch at every checkpoint and compare.
    pub validate_checkpoints: bool,
}

impl CampaignConfig {
    /// The desk-scale range.
    pub fn quick() -> Self {
        CampaignConfig {
            z_min: 50,
            z_max: 2_000_000,
            checkpoint_stride: 10_000_000,
            checkpoint_path: None,
            resume_from: None,
            validate_checkpoints: false,
        }
    }

    /// The full range (a long run).
    pub fn full() -> Self {
        CampaignConfig {
            z_max: 2_000_000_000,
            ..Self::quick()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.z_min < 50 || self.z_min >= self.z_max {
            return Err(Error::Precondition(format!(
                "need 50 ≤ z_min < z_max, got z_min={} z_max={}",
                self.z_min, self.z_max
            )));
        }
        if self.checkpoint_stride < 1 {
            return Err(Error::Precondition("checkpoint stride must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One flagged (failed or inconclusive) check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MarginCase {
    pub z: u64,
    pub y: f64,
    pub margin: f64,
    pub status: CheckStatus,
}

/// State and aggregate statistics at a block boundary. The aggregate
/// fields are carried so a resumed run reports exactly what an
/// uninterrupted one would.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub z: u64,
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S1_compensation")]
    pub s1_comp: f64,
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H1_compensation")]
    pub h1_comp: f64,
    pub piz: u64,
    pub checks: u64,
    pub passed: u64,
    pub failed: u64,
    pub inconclusive: u64,
    pub min_margin: Option<f64>,
    pub argmin_z: Option<u64>,
    pub argmin_y: Option<f64>,
    /// Some(result) when checkpoint validation ran.
    pub validated: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub schema: u32,
    pub label: String,
    pub z_min: u64,
    pub z_max: u64,
    /// The Y range the two-point grid covers.
    pub y_covered: [f64; 2],
    pub checks: u64,
    pub passed: u64,
    pub failed: u64,
    pub inconclusive: u64,
    pub min_margin: Option<f64>,
    pub argmin_z: Option<u64>,
    pub argmin_y: Option<f64>,
    /// Failed or inconclusive checks (first `FLAGGED_CAP` in z order).
    pub flagged: Vec<MarginCase>,
    pub checkpoints: Vec<CheckpointRecord>,
    pub final_state: CheckpointRecord,
    pub concavity: ConstantsReport,
    pub verdict: bool,
}

#[derive(Clone, Copy, Debug)]
struct BlockSummary {
    first: u64,
    last: u64,
    s1: KahanSum,
    h1: KahanSum,
    pi: u64,
}

fn summarize_block(seg: &Segment) -> BlockSummary {
    let mut s1 = KahanSum::new();
    let mut h1 = KahanSum::new();
    let mut pi = 0u64;
    for i in 0..seg.len() {
        let n = seg.base + i as u64;
        if seg.mu[i] != 0 {
            s1.add(1.0 / seg.phi[i] as f64);
            h1.add(seg.sigma[i] as f64 / seg.phi[i] as f64);
        }
        if n >= 2 && seg.phi[i] == n - 1 {
            pi += 1;
        }
    }
    BlockSummary {
        first: seg.base,
        last: seg.end(),
        s1,
        h1,
        pi,
    }
}

#[derive(Clone, Debug, Default)]
struct Stats {
    checks: u64,
    passed: u64,
    failed: u64,
    inconclusive: u64,
    min_margin: Option<(f64, u64, f64)>,
    flagged: Vec<MarginCase>,
}

impl Stats {
    fn record(&mut self, z: u64, y: f64, margin: f64, slack: f64) {
        self.checks += 1;
        let status = if margin > slack {
            self.passed += 1;
            CheckStatus::Pass
        } else if margin > 0.0 {
            self.inconclusive += 1;
            CheckStatus::Inconclusive
        } else {
            self.failed += 1;
            CheckStatus::Fail
        };
        if status != CheckStatus::Pass && self.flagged.len() < FLAGGED_CAP {
            self.flagged.push(MarginCase {
                z,
                y,
                margin,
                status,
            });
        }
        if self.min_margin.is_none_or(|(m, _, _)| margin < m) {
            self.min_margin = Some((margin, z, y));
        }
    }

    fn fold(&mut self, other: Stats) {
        self.checks += other.checks;
        self.passed += other.passed;
        self.failed += other.failed;
        self.inconclusive += other.inconclusive;
        if let Some((m, z, y)) = other.min_margin {
            if self.min_margin.is_none_or(|(cur, _, _)| m < cur) {
                self.min_margin = Some((m, z, y));
            }
        }
        for case in other.flagged {
            if self.flagged.len() < FLAGGED_CAP {
                self.flagged.push(case);
            }
        }
    }

    fn from_checkpoint(c: &CheckpointRecord) -> Stats {
        Stats {
            checks: c.checks,
            passed: c.passed,
            failed: c.failed,
            inconclusive: c.inconclusive,
            min_margin: match (c.min_margin, c.argmin_z, c.argmin_y) {
                (Some(m), Some(z), Some(y)) => Some((m, z, y)),
                _ => None,
            },
            flagged: Vec::new(),
        }
    }
}

fn checkpoint_from(state: &SweepState, stats: &Stats, validated: Option<bool>) -> CheckpointRecord {
    let (s1, s1_comp) = state.s1.parts();
    let (h1, h1_comp) = state.h1.parts();
    CheckpointRecord {
        z: state.z,
        s1,
        s1_comp,
        h1,
        h1_comp,
        piz: state.piz,
        checks: stats.checks,
        passed: stats.passed,
        failed: stats.failed,
        inconclusive: stats.inconclusive,
        min_margin: stats.min_margin.map(|(m, _, _)| m),
        argmin_z: stats.min_margin.map(|(_, z, _)| z),
        argmin_y: stats.min_margin.map(|(_, _, y)| y),
        validated,
    }
}

fn state_from_checkpoint(c: &CheckpointRecord) -> SweepState {
    SweepState {
        z: c.z,
        s1: KahanSum::from_parts(c.s1, c.s1_comp),
        h1: KahanSum::from_parts(c.h1, c.h1_comp),
        piz: c.piz,
    }
}

fn read_checkpoints(path: &PathBuf) -> Result<Vec<CheckpointRecord>> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("bad checkpoint line: {e}")))?,
        );
    }
    Ok(records)
}

/// Scan one block: advance a local copy of the entry state value by value
/// and check every z in `[z_min, z_max)` it covers.
fn scan_block(seg: &Segment, entry: &SweepState, z_min: u64, z_max: u64) -> Stats {
    let mut state = *entry;
    let mut stats = Stats::default();
    // (Y, ln Y) for Y = 4(z+1)² carries over as the next z's first grid point.
    let mut carried: Option<(f64, f64)> = None;
    for i in 0..seg.len() {
        let n = seg.base + i as u64;
        state.advance(n, seg.mu[i], seg.phi[i], seg.sigma[i]);
        if n < z_min || n >= z_max {
            carried = None;
            continue;
        }
        let s1 = state.s1.value();
        let h1 = state.h1.value();
        let ratio = h1 / s1;
        let base_lhs = ratio * ratio + state.piz as f64;
        let zf = n as f64;
        let (y0, ln_y0) = match carried {
            Some(pair) => pair,
            None => {
                let y = 4.0 * zf * zf;
                (y, y.ln())
            }
        };
        let y1 = 4.0 * (zf + 1.0) * (zf + 1.0);
        let ln_y1 = y1.ln();
        for (y, ln_y) in [(y0, ln_y0), (y1, ln_y1)] {
            let lhs = y / s1 + base_lhs;
            let rhs = 2.0 * y / ln_y;
            stats.record(n, y, rhs - lhs, SWEEP_SLACK_REL * rhs);
        }
        carried = Some((y1, ln_y1));
    }
    stats
}

/// Run the sweep described by `cfg`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let concavity = concavity_check();

    let last_n = cfg.z_max - 1;
    let total_blocks = last_n.div_ceil(BLOCK_LEN);
    let stride_blocks = cfg.checkpoint_stride.div_ceil(BLOCK_LEN).max(1);

    // Resuming replays nothing: the last checkpoint seeds the state and the
    // carried aggregate statistics, and the earlier records are kept so the
    // final report equals the uninterrupted one.
    let (start_block, mut state, mut stats, mut checkpoints, mut all_validated) =
        match &cfg.resume_from {
            Some(path) => {
                let records = read_checkpoints(path)?;
                let record = records
                    .last()
                    .ok_or_else(|| Error::Parse("checkpoint file has no records".into()))?
                    .clone();
                if !record.z.is_multiple_of(BLOCK_LEN) {
                    return Err(Error::Parse(format!(
                        "checkpoint z={} is not on the block grid ({})",
                        record.z, BLOCK_LEN
                    )));
                }
                if record.z > last_n {
                    return Err(Error::Precondition(format!(
                        "checkpoint z={} lies beyond the campaign range",
                        record.z
                    )));
                }
                let valid_so_far = records.iter().all(|r| r.validated != Some(false));
                (
                    record.z / BLOCK_LEN,
                    state_from_checkpoint(&record),
                    Stats::from_checkpoint(&record),
                    records,
                    valid_so_far,
                )
            }
            None => (0, SweepState::initial(), Stats::default(), Vec::new(), true),
        };

    let mut writer: Option<std::io::BufWriter<std::fs::File>> = match &cfg.checkpoint_path {
        Some(path) => {
            let file = std::fs::OpenOptions::new()
                .create(true)
                .append(cfg.resume_from.is_some())
                .truncate(cfg.resume_from.is_none())
                .write(true)
                .open(path)?;
            Some(std::io::BufWriter::new(file))
        }
        None => None,
    };

    let base_primes = simple_primes(isqrt(last_n));
    let mut block = start_block;
    while block < total_blocks {
        let chunk_end = total_blocks.min(block + CHUNK_BLOCKS);

        let summaries: Vec<BlockSummary> = (block..chunk_end)
            .into_par_iter()
            .map(|b| {
                let base = b * BLOCK_LEN + 1;
                let len = (last_n - base + 1).min(BLOCK_LEN) as usize;
                summarize_block(&arith_segment(base, len, &base_primes))
            })
            .collect();

        // Entry state for every block of the chunk, by prefix merge.
        let mut entries = Vec::with_capacity(summaries.len());
        for summary in &summaries {
            entries.push(state);
            state.merge_block(summary);
        }

        let chunk_stats: Vec<Stats> = entries
            .par_iter()
            .enumerate()
            .map(|(offset, entry)| {
                let b = block + offset as u64;
                let base = b * BLOCK_LEN + 1;
                let end = last_n.min((b + 1) * BLOCK_LEN);
                if end < cfg.z_min {
                    return Stats::default();
                }
                let len = (end - base + 1) as usize;
                scan_block(
                    &arith_segment(base, len, &base_primes),
                    entry,
                    cfg.z_min,
                    cfg.z_max,
                )
            })
            .collect();

        for (offset, block_stats) in chunk_stats.into_iter().enumerate() {
            let b = block + offset as u64;
            stats.fold(block_stats);
            let boundary = (b + 1) * BLOCK_LEN;
            if boundary <= last_n && (b + 1).is_multiple_of(stride_blocks) {
                // `state` has already absorbed later blocks of this chunk,
                // so rebuild the boundary state from the entry list.
                let boundary_state = if offset + 1 < entries.len() {
                    entries[offset + 1]
                } else {
                    state
                };
                debug_assert_eq!(boundary_state.z, boundary);
                let validated = if cfg.validate_checkpoints {
                    let fresh = SweepState::recompute(boundary)?;
                    let ok = boundary_state.agrees_with(&fresh, 1e-9);
                    all_validated &= ok;
                    Some(ok)
                } else {
                    None
                };
                let record = checkpoint_from(&boundary_state, &stats, validated);
                if let Some(w) = writer.as_mut() {
                    serde_json::to_writer(&mut *w, &record)
                        .map_err(|e| Error::Parse(format!("checkpoint write: {e}")))?;
                    writeln!(w)?;
                }
                checkpoints.push(record);
            }
        }
        block = chunk_end;
    }
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }

    let verdict =
        stats.failed == 0 && stats.inconclusive == 0 && concavity.verdict && all_validated;
    let final_state = checkpoint_from(&state, &stats, None);
    Ok(CampaignReport {
        schema: 1,
        label: "verify-test".into(),
        z_min: cfg.z_min,
        z_max: cfg.z_max,
        y_covered: [
            4.0 * cfg.z_min as f64 * cfg.z_min as f64,
            4.0 * cfg.z_max as f64 * cfg.z_max as f64,
        ],
        checks: stats.checks,
        passed: stats.passed,
        failed: stats.failed,
        inconclusive: stats.inconclusive,
        min_margin: stats.min_margin.map(|(m, _, _)| m),
        argmin_z: stats.min_margin.map(|(_, z, _)| z),
        argmin_y: stats.min_margin.map(|(_, _, y)| y),
        flagged: stats.flagged,
        checkpoints,
        final_state,
        concavity,
        verdict,
    })
}

fn arith_segment(base: u64, len: usize, base_primes: &[u64]) -> Segment {
    arith::build_segment(base, len, base_primes)
}
