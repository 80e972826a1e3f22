//! Piecewise-linear weight functions with exactly computable norms.
//!
//! Restricting to nonnegative piecewise-linear representatives makes all
//! three norms closed-form: the integral is a trapezoid sum, the sup norm is
//! the largest node value, and the derivative's integral is the total
//! variation of the node values. The shape functional ρ = ‖f‖₁/(‖f‖∞ + ‖f'‖₁)
//! that the bound evaluators key on is therefore exact up to f64 rounding.

use serde::Serialize;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;

/// `[x, x+y] ⊂ [0, ∞)`, stored as left endpoint and length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    x: f64,
    y: f64,
}

impl Interval {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0) {
            return Err(Error::Precondition(format!(
                "interval needs finite x ≥ 0 and y ≥ 0, got x={x} y={y}"
            )));
        }
        Ok(Interval { x, y })
    }

    pub fn left(&self) -> f64 {
        self.x
    }

    pub fn length(&self) -> f64 {
        self.y
    }

    pub fn right(&self) -> f64 {
        self.x + self.y
    }
}

/// The three norms of a weight function: ∫|f|, max|f|, ∫|f'|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub l1: f64,
    pub sup: f64,
    pub tv: f64,
}

/// Nonnegative piecewise-linear function on its breakpoint span.
///
/// A single breakpoint is the degenerate length-zero interval: l1 = 0,
/// sup = f(x), tv = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl WeightFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Precondition(
                "need equally many breakpoints and values, at least one".into(),
            ));
        }
        if breakpoints[0] < 0.0 || !breakpoints[0].is_finite() {
            return Err(Error::Precondition("domain must lie in [0, ∞)".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::Precondition(format!(
                    "breakpoints must be finite and strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for &v in &values {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Precondition(format!(
                    "values must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(WeightFunction {
            ts: breakpoints,
            vs: values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn domain(&self) -> Interval {
        let x = self.ts[0];
        Interval {
            x,
            y: self.ts[self.ts.len() - 1] - x,
        }
    }

    pub fn norms(&self) -> Norms {
        let mut l1 = KahanSum::new();
        let mut tv = KahanSum::new();
        let mut sup = 0.0f64;
        for (i, &v) in self.vs.iter().enumerate() {
            sup = sup.max(v);
            if i + 1 < self.vs.len() {
                let dt = self.ts[i + 1] - self.ts[i];
                l1.add(0.5 * (v + self.vs[i + 1]) * dt);
                tv.add((self.vs[i + 1] - v).abs());
            }
        }
        Norms {
            l1: l1.value(),
            sup,
            tv: tv.value(),
        }
    }

    /// ‖f‖₁ / (‖f‖∞ + ‖f'‖₁), with the zero function mapped to 0.
    pub fn rho(&self) -> f64 {
        let n = self.norms();
        let denom = n.sup + n.tv;
        if denom == 0.0 {
            0.0
        } else {
            n.l1 / denom
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vs.iter().all(|&v| v == 0.0)
    }

    /// Linear interpolation; breakpoints return their stored value.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let first = self.ts[0];
        let last = self.ts[self.ts.len() - 1];
        if !(t >= first && t <= last) {
            return Err(Error::Domain(format!("t={t} outside [{first}, {last}]")));
        }
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => Ok(self.vs[i]),
            Err(i) => {
                // first < t < last here, so 0 < i < len
                let (t0, t1) = (self.ts[i - 1], self.ts[i]);
                let (v0, v1) = (self.vs[i - 1], self.vs[i]);
                Ok(v0 + (v1 - v0) * ((t - t0) / (t1 - t0)))
            }
        }
    }

    /// Pointwise multiple `c·f` for c ≥ 0.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Precondition(format!(
                "scale factor must be finite and ≥ 0, got {c}"
            )));
        }
        Ok(WeightFunction {
            ts: self.ts.clone(),
            vs: self.vs.iter().map(|&v| c * v).collect(),
        })
    }

    /// f divided by ‖f‖∞ + ‖f'‖₁; None for the zero function.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norms();
        let denom = n.sup + n.tv;
        if denom == 0.0 {
            return None;
        }
        Some(WeightFunction {
            ts: self.ts.clone(),
            vs: self.vs.iter().map(|&v| v / denom).collect(),
        })
    }

    /// Insert a breakpoint at `t` (interpolated value); no-op if present.
    pub fn with_breakpoint(&self, t: f64) -> Result<Self> {
        let v = self.eval(t)?;
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(_) => Ok(self.clone()),
            Err(i) => {
                let mut ts = self.ts.clone();
                let mut vs = self.vs.clone();
                ts.insert(i, t);
                vs.insert(i, v);
                Ok(WeightFunction { ts, vs })
            }
        }
    }

    /// Parse the text format: one `t value` pair per line, strictly
    /// increasing t. Blank lines and `#` comments are allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "weight line {}: expected `t value`, got {} fields",
                    idx + 1,
                    fields.len()
                )));
            }
            let t: f64 = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("weight line {}: bad t", idx + 1)))?;
            let v: f64 = fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("weight line {}: bad value", idx + 1)))?;
            ts.push(t);
            vs.push(v);
        }
        if ts.is_empty() {
            return Err(Error::Parse("weight file has no data lines".into()));
        }
        WeightFunction::new(ts, vs)
            .map_err(|e| Error::Parse(format!("invalid weight function: {e}")))
    }
}

/// Test-corpus shapes for slowly varying weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Constant,
    LinearRamp,
    Hat,
    SmoothBumpApprox,
}

impl Shape {
    pub fn as_str(&self) -> &'static str {
        match self {
            Shape::Constant => "constant",
            Shape::LinearRamp => "linear_ramp",
            Shape::Hat => "hat",
            Shape::SmoothBumpApprox => "smooth_bump_approx",
        }
    }

    /// Shape value at relative position u ∈ [0, 1].
    fn at(&self, u: f64) -> f64 {
        match self {
            Shape::Constant => 1.0,
            Shape::LinearRamp => u,
            Shape::Hat => 1.0 - (2.0 * u - 1.0).abs(),
            Shape::SmoothBumpApprox => {
                let w = 1.0 - (2.0 * u - 1.0).powi(2);
                w * w
            }
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Shape::Constant),
            "linear_ramp" | "ramp" => Ok(Shape::LinearRamp),
            "hat" => Ok(Shape::Hat),
            "smooth_bump_approx" | "bump" => Ok(Shape::SmoothBumpApprox),
            other => Err(Error::Parse(format!("unknown shape `{other}`"))),
        }
    }
}

/// Sample a shape at `resolution + 1` equispaced breakpoints over `domain`.
pub fn builtin(shape: Shape, domain: Interval, resolution: u32) -> Result<WeightFunction> {
    if resolution < 1 {
        return Err(Error::Precondition("resolution must be ≥ 1".into()));
    }
    if domain.length() == 0.0 {
        return WeightFunction::new(vec![domain.left()], vec![shape.at(0.0)]);
    }
    let res = resolution as usize;
    let mut ts = Vec::with_capacity(res + 1);
    let mut vs = Vec::with_capacity(res + 1);
    for i in 0..=res {
        let u = i as f64 / res as f64;
        ts.push(domain.left() + domain.length() * u);
        vs.push(shape.at(u));
    }
    WeightFunction::new(ts, vs)
}

const POW10: [i128; 19] = [
    1,
    10,
    100,
    1_000,
    10_000,
    100_000,
    1_000_000,
    10_000_000,
    100_000_000,
    1_000_000_000,
    10_000_000_000,
    100_000_000_000,
    1_000_000_000_000,
    10_000_000_000_000,
    100_000_000_000_000,
    1_000_000_000_000_000,
    10_000_000_000_000_000,
    100_000_000_000_000_000,
    1_000_000_000_000_000_000,
];

/// Exact decimal-scaled value `units / 10^scale`.
///
/// Interval endpoints parsed from text are kept in this form so that the
/// integer-membership tests `x ≤ n ≤ x+y` are decided exactly even where the
/// decimal is not representable in f64.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decimal {
    units: i128,
    scale: u32,
}

impl Decimal {
    pub fn from_u64(n: u64) -> Self {
        Decimal {
            units: n as i128,
            scale: 0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::Parse(format!("empty decimal `{s}`")));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::Parse(format!("bad decimal `{s}`")));
        }
        if int_part.len() + frac_part.len() > 27 {
            return Err(Error::Parse(format!("decimal `{s}` has too many digits")));
        }
        let scale = frac_part.len() as u32;
        let mut units: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            units = units * 10 + (c as i128 - '0' as i128);
        }
        if neg {
            units = -units;
        }
        Ok(Decimal { units, scale })
    }

    pub fn is_negative(&self) -> bool {
        self.units < 0
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / POW10[self.scale as usize] as f64
    }

    pub fn add(&self, other: Decimal) -> Result<Decimal> {
        let scale = self.scale.max(other.scale);
        if scale as usize >= POW10.len() {
            return Err(Error::Parse("decimal scale overflow".into()));
        }
        let a = self.units * POW10[(scale - self.scale) as usize];
        let b = other.units * POW10[(scale - other.scale) as usize];
        Ok(Decimal {
            units: a + b,
            scale,
        })
    }

    /// Smallest integer ≥ value; requires the result to be ≥ 0.
    pub fn ceil_u64(&self) -> Result<u64> {
        let p = POW10[self.scale as usize];
        let q = self.units.div_euclid(p);
        let r = self.units.rem_euclid(p);
        let c = if r == 0 { q } else { q + 1 };
        u64::try_from(c.max(0)).map_err(|_| Error::Parse("decimal out of u64 range".into()))
    }

    /// Largest integer ≤ value; negative values floor to an error.
    pub fn floor_u64(&self) -> Result<u64> {
        let p = POW10[self.scale as usize];
        let q = self.units.div_euclid(p);
        u64::try_from(q).map_err(|_| Error::Parse("decimal out of u64 range".into()))
    }
}
