//! Shared inputs for the criterion benchmarks; see `benches/`.

use wbt_core::weights::{builtin, Interval, Shape, WeightFunction};

/// A mid-resolution bump on a window high enough to exercise the segmented
/// prime sieve.
pub fn bump_at_1e9() -> WeightFunction {
    builtin(
        Shape::SmoothBumpApprox,
        Interval::new(1.0e9, 1.0e5).unwrap(),
        64,
    )
    .unwrap()
}
