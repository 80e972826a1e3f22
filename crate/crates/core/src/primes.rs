//! Prime enumeration and the prime-sum bound evaluators.
//!
//! A plain sieve supplies base primes; windows anywhere up to 1e12 are then
//! sieved segment by segment with base primes up to √(end). On top of that
//! sit exact prime counts, weighted sums of a piecewise-linear function over
//! primes in an arithmetic progression, and the two theorem-level upper
//! bounds those sums are compared against.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gcd;
use crate::report::{BoundReport, STRICT_SLACK_REL};
use crate::weights::{Decimal, Shape, WeightFunction};

/// Largest supported window end; base primes are sieved to √(this) = 1e6.
pub const MAX_WINDOW_END: u64 = 1_000_000_000_000;
/// Enumeration budget for weighted prime sums (interval length).
pub const ENUM_BUDGET: u64 = 100_000_000;

const WINDOW_LEN: usize = 1 << 20;

/// All primes ≤ `limit` by a plain sieve of Eratosthenes.
pub fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for the full u64 range (the first twelve
/// prime bases are a proven witness set far beyond 2^64).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality flags for the inclusive window `[lo, hi]`.
pub(crate) fn sieve_window(lo: u64, hi: u64, base_primes: &[u64]) -> Vec<bool> {
    let len = (hi - lo + 1) as usize;
    let mut prime = vec![true; len];
    for n in lo..=hi.min(1) {
        prime[(n - lo) as usize] = false;
    }
    for &p in base_primes {
        if p * p > hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        if m < p * p {
            m = p * p;
        }
        while m <= hi {
            prime[(m - lo) as usize] = false;
            m += p;
        }
    }
    // A base prime inside the window is prime, not a multiple of itself.
    for &p in base_primes {
        if p >= lo && p <= hi {
            prime[(p - lo) as usize] = true;
        }
    }
    prime
}

/// Visit every prime in the inclusive range `[lo, hi]` in ascending order.
pub fn for_each_prime_in<F: FnMut(u64)>(lo: u64, hi: u64, mut visit: F) -> Result<()> {
    if hi > MAX_WINDOW_END {
        return Err(Error::Resource(format!(
            "window end {hi} exceeds supported maximum {MAX_WINDOW_END}"
        )));
    }
    if hi < lo || hi < 2 {
        return Ok(());
    }
    let lo = lo.max(2);
    let base_primes = simple_primes(isqrt(hi));
    let mut base = lo;
    while base <= hi {
        let end = hi.min(base + WINDOW_LEN as u64 - 1);
        let flags = sieve_window(base, end, &base_primes);
        for (i, &f) in flags.iter().enumerate() {
            if f {
                visit(base + i as u64);
            }
        }
        base = end + 1;
    }
    Ok(())
}

/// Exact prime count π(z).
pub fn pi_count(z: u64) -> u64 {
    if z < 2 {
        return 0;
    }
    let base_primes = simple_primes(isqrt(z));
    let n_windows = (z - 1).div_ceil(WINDOW_LEN as u64); // windows over [2, z]
    let counts: Vec<u64> = (0..n_windows)
        .into_par_iter()
        .map(|w| {
            let lo = 2 + w * WINDOW_LEN as u64;
            let hi = z.min(lo + WINDOW_LEN as u64 - 1);
            sieve_window(lo, hi, &base_primes)
                .iter()
                .filter(|&&f| f)
                .count() as u64
        })
        .collect();
    counts.iter().sum()
}

/// Exact count of primes p ≤ x with p ≡ l (mod k).
pub fn pi_ap(x: u64, k: u64, l: u64) -> Result<u64> {
    if k == 0 || gcd(l, k) != 1 {
        return Err(Error::Precondition(format!(
            "pi_ap requires k ≥ 1 and gcd(l, k) = 1, got k={k} l={l}"
        )));
    }
    let lr = l % k;
    let mut count = 0u64;
    for_each_prime_in(2, x, |p| {
        if p % k == lr {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Integer candidates contained in the weight function's domain.
fn integer_span(f: &WeightFunction) -> (u64, u64) {
    let dom = f.domain();
    let lo = dom.left().ceil().max(0.0) as u64;
    let hi = dom.right().floor().max(0.0) as u64;
    (lo, hi)
}

/// Σ f(p) over primes p in `[lo, hi]` with p ≡ l (mod k).
///
/// Candidates are integers, so membership is decided on the integer span;
/// the weight is evaluated at p clamped into the float domain to keep
/// representation skew at the interval ends from raising a domain error.
pub fn weighted_prime_sum_over(
    f: &WeightFunction,
    lo: u64,
    hi: u64,
    k: u64,
    l: u64,
) -> Result<f64> {
    if k == 0 || gcd(l, k) != 1 {
        return Err(Error::Precondition(format!(
            "weighted prime sum requires k ≥ 1 and gcd(l, k) = 1, got k={k} l={l}"
        )));
    }
    if hi >= lo && hi - lo > ENUM_BUDGET {
        return Err(Error::Resource(format!(
            "interval length {} exceeds enumeration budget {ENUM_BUDGET}",
            hi - lo
        )));
    }
    let dom = f.domain();
    let (first, last) = (dom.left(), dom.right());
    let lr = l % k;
    let mut acc = crate::kahan::KahanSum::new();
    let mut err: Option<Error> = None;
    for_each_prime_in(lo, hi, |p| {
        if err.is_some() || p % k != lr {
            return;
        }
        let t = (p as f64).clamp(first, last);
        match f.eval(t) {
            Ok(v) => acc.add(v),
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(acc.value()),
    }
}

/// Σ f(p) over primes p in the function's own domain with p ≡ l (mod k).
pub fn weighted_prime_sum(f: &WeightFunction, k: u64, l: u64) -> Result<f64> {
    let (lo, hi) = integer_span(f);
    weighted_prime_sum_over(f, lo, hi, k, l)
}

/// Euler's totient by trial division; intended for moduli up to ~1e9.
pub fn phi_of(k: u64) -> u64 {
    let mut n = k;
    let mut phi = k;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremKind {
    /// 2‖f‖₁/(φ(k) log(ρ/k)) · (1 + 8/log(ρ/k))
    T4WithCorrection,
    /// 3‖f‖₁/(φ(k) log(ρ/k))
    T4Factor3,
    /// 2‖f‖₁/log(ρ), progression-free (k = 1)
    T5,
}

/// One evaluated theorem bound; `value` is absent when the hypothesis
/// ρ > k (resp. ρ > 1) fails.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoremBound {
    pub kind: TheoremKind,
    pub rho: f64,
    pub applicable: bool,
    pub value: Option<f64>,
}

/// Both forms of the progression bound for modulus k.
pub fn theorem4_bounds(f: &WeightFunction, k: u64) -> Result<(TheoremBound, TheoremBound)> {
    if k == 0 {
        return Err(Error::Precondition("modulus k must be ≥ 1".into()));
    }
    let rho = f.rho();
    if rho <= k as f64 {
        let na = |kind| TheoremBound {
            kind,
            rho,
            applicable: false,
            value: None,
        };
        return Ok((
            na(TheoremKind::T4WithCorrection),
            na(TheoremKind::T4Factor3),
        ));
    }
    let l1 = f.norms().l1;
    let lg = (rho / k as f64).ln();
    let phik = phi_of(k) as f64;
    let with_correction = 2.0 * l1 / (phik * lg) * (1.0 + 8.0 / lg);
    let factor3 = 3.0 * l1 / (phik * lg);
    Ok((
        TheoremBound {
            kind: TheoremKind::T4WithCorrection,
            rho,
            applicable: true,
            value: Some(with_correction),
        },
        TheoremBound {
            kind: TheoremKind::T4Factor3,
            rho,
            applicable: true,
            value: Some(factor3),
        },
    ))
}

/// The k = 1 bound over all primes in the interval.
pub fn theorem5_bound(f: &WeightFunction) -> TheoremBound {
    let rho = f.rho();
    if rho <= 1.0 {
        return TheoremBound {
            kind: TheoremKind::T5,
            rho,
            applicable: false,
            value: None,
        };
    }
    let l1 = f.norms().l1;
    TheoremBound {
        kind: TheoremKind::T5,
        rho,
        applicable: true,
        value: Some(2.0 * l1 / rho.ln()),
    }
}

/// One corpus entry: a shaped weight on `[x, x+y]`, scaled, checked against
/// the progression (k, l).
#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub shape: Shape,
    pub k: u64,
    pub l: u64,
    pub x: Decimal,
    pub y: Decimal,
    pub scale: f64,
    pub resolution: u32,
}

impl CorpusCase {
    pub fn weight(&self) -> Result<WeightFunction> {
        let dom = crate::weights::Interval::new(self.x.to_f64(), self.y.to_f64())?;
        crate::weights::builtin(self.shape, dom, self.resolution)?.scale(self.scale)
    }

    /// Integer candidate span from the exact decimal endpoints.
    pub fn span(&self) -> Result<(u64, u64)> {
        let lo = self.x.ceil_u64()?;
        let hi = self.x.add(self.y)?.floor_u64()?;
        Ok((lo, hi))
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({
            "shape": self.shape.as_str(),
            "k": self.k,
            "l": self.l,
            "x": self.x.to_f64(),
            "y": self.y.to_f64(),
            "scale": self.scale,
            "resolution": self.resolution,
        })
    }
}

/// Parse corpus lines `shape kmod lres x y scale resolution`.
///
/// Blank lines and `#` comments are skipped; everything else is validated
/// strictly.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusCase>> {
    let mut cases = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "corpus line {}: expected 7 fields `shape kmod lres x y scale resolution`, got {}",
                idx + 1,
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Parse(format!("corpus line {}: bad {what}", idx + 1));
        let shape: Shape = fields[0].parse().map_err(|_| bad("shape"))?;
        let k: u64 = fields[1].parse().map_err(|_| bad("kmod"))?;
        let l: u64 = fields[2].parse().map_err(|_| bad("lres"))?;
        let x = Decimal::parse(fields[3]).map_err(|_| bad("x"))?;
        let y = Decimal::parse(fields[4]).map_err(|_| bad("y"))?;
        let scale: f64 = fields[5].parse().map_err(|_| bad("scale"))?;
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(bad("scale"));
        }
        let resolution: u32 = fields[6].parse().map_err(|_| bad("resolution"))?;
        if k == 0 || gcd(l, k) != 1 {
            return Err(Error::Parse(format!(
                "corpus line {}: need k ≥ 1 and gcd(l, k) = 1",
                idx + 1
            )));
        }
        if x.is_negative() || y.is_negative() {
            return Err(Error::Parse(format!(
                "corpus line {}: interval must lie in [0, ∞)",
                idx + 1
            )));
        }
        cases.push(CorpusCase {
            shape,
            k,
            l,
            x,
            y,
            scale,
            resolution,
        });
    }
    Ok(cases)
}

/// The fixed verification grid: four shapes, three interval scales, five
/// moduli.
pub fn builtin_corpus() -> Vec<CorpusCase> {
    let shapes = [
        (Shape::Constant, 1u32),
        (Shape::LinearRamp, 1),
        (Shape::Hat, 2),
        (Shape::SmoothBumpApprox, 64),
    ];
    let intervals: [(u64, u64); 3] = [(0, 1_000), (1_000_000, 10_000), (1_000_000_000, 100_000)];
    let moduli = [1u64, 2, 3, 5, 12];
    let mut out = Vec::new();
    for &(shape, resolution) in &shapes {
        for &(x, y) in &intervals {
            for &k in &moduli {
                out.push(CorpusCase {
                    shape,
                    k,
                    l: if k == 1 { 0 } else { 1 },
                    x: Decimal::from_u64(x),
                    y: Decimal::from_u64(y),
                    scale: 1.0,
                    resolution,
                });
            }
        }
    }
    out
}

/// The integer candidates inside the weight function's own (float) domain.
pub fn domain_span(f: &WeightFunction) -> (u64, u64) {
    integer_span(f)
}

/// Every applicable theorem bound for one weight against the progression
/// (k, l), with the left-hand side enumerated over `span`.
pub fn theorem_reports(
    f: &WeightFunction,
    span: (u64, u64),
    k: u64,
    l: u64,
    params: serde_json::Value,
) -> Result<Vec<BoundReport>> {
    let mut reports = Vec::new();
    let rho = f.rho();
    if rho <= k as f64 {
        reports.push(BoundReport::inapplicable("theorem4", params.clone()));
        if k == 1 {
            reports.push(BoundReport::inapplicable("theorem5", params));
        }
        return Ok(reports);
    }
    let lhs = weighted_prime_sum_over(f, span.0, span.1, k, l)?;
    let (b1, b2) = theorem4_bounds(f, k)?;
    reports.push(BoundReport::strict(
        "theorem4-with-correction",
        lhs,
        b1.value.expect("applicable"),
        STRICT_SLACK_REL,
        params.clone(),
    ));
    reports.push(BoundReport::strict(
        "theorem4-factor3",
        lhs,
        b2.value.expect("applicable"),
        STRICT_SLACK_REL,
        params.clone(),
    ));
    if k == 1 {
        let b5 = theorem5_bound(f);
        reports.push(BoundReport::strict(
            "theorem5",
            lhs,
            b5.value.expect("applicable"),
            STRICT_SLACK_REL,
            params,
        ));
    }
    Ok(reports)
}

/// Evaluate every applicable theorem bound for every case, with the
/// left-hand side by full enumeration.
pub fn theorem_corpus_check(cases: &[CorpusCase]) -> Result<Vec<BoundReport>> {
    let mut reports = Vec::new();
    for case in cases {
        let f = case.weight()?;
        reports.extend(theorem_reports(
            &f,
            case.span()?,
            case.k,
            case.l,
            case.params(),
        )?);
    }
    Ok(reports)
}
