//! Sieve machinery for weighted sums over primes in arithmetic progressions.
//!
//! The crate tabulates the multiplicative functions μ, φ, σ, ω over large
//! ranges with a segmented sieve, represents slowly varying weight functions
//! as piecewise-linear functions with exactly computable norms, evaluates the
//! weighted Selberg and Legendre–Eratosthenes sieve upper bounds, certifies
//! the explicit constants those bounds rest on (zeta values, Euler products
//! with comparison tails, truncated Dirichlet series), and runs the
//! large-range inequality sweep with deterministic checkpoint/resume.
//!
//! All verifiers report through [`BoundReport`] / [`ConstantsReport`] with an
//! explicit slack policy: float noise may neither pass a failing check nor
//! fail a passing one silently.

pub mod arith;
pub mod campaign;
pub mod constants;
pub mod error;
pub mod kahan;
pub mod primes;
pub mod report;
pub mod sieve;
pub mod weights;

pub use arith::{ArithTable, Segment};
pub use campaign::{CampaignConfig, CampaignReport, CheckpointRecord, SweepState};
pub use error::{Error, Result};
pub use kahan::KahanSum;
pub use report::{BoundReport, CheckStatus, ConstantsReport};
pub use sieve::{SelbergWeights, SieveParams};
pub use weights::{Decimal, Interval, Norms, Shape, WeightFunction};

/// Euclid's algorithm on unsigned words.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::gcd;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 1), 1);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(35, 64), 1);
        assert_eq!(gcd(1, 1), 1);
    }
}
