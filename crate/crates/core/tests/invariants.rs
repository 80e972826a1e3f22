//! Cross-module invariants that are too heavy for inline unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wbt_core::primes::{self, is_prime};
use wbt_core::weights::{builtin, Interval, Shape};

/// Segmented prime enumeration agrees with trial division on 100 random
/// windows of length 1e4 below 1e10, and every enumerated prime passes the
/// deterministic Miller–Rabin test.
#[test]
fn window_enumeration_matches_trial_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x91AE);
    for _ in 0..100 {
        let lo = rng.gen_range(0..10_000_000_000u64 - 10_000);
        let hi = lo + 10_000;
        let mut listed = Vec::new();
        primes::for_each_prime_in(lo, hi, |p| listed.push(p)).unwrap();
        for &p in &listed {
            assert!(is_prime(p), "listed non-prime {p}");
        }
        let mut iter = listed.iter();
        for n in lo.max(2)..=hi {
            let td = (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
            if td {
                assert_eq!(iter.next(), Some(&n), "missing prime {n} in [{lo}, {hi}]");
            }
        }
        assert_eq!(iter.next(), None);
    }
}

/// A constant weight turns the weighted sum into a progression prime count.
#[test]
fn constant_weight_sum_equals_progression_count() {
    for &(x, y, k, l) in &[
        (0u64, 10_000u64, 3u64, 2u64),
        (50_000, 25_000, 4, 1),
        (1, 9_999, 1, 0),
        (100, 50_000, 12, 7),
    ] {
        let f = builtin(
            Shape::Constant,
            Interval::new(x as f64, y as f64).unwrap(),
            1,
        )
        .unwrap();
        let s = primes::weighted_prime_sum(&f, k, l).unwrap();
        let expected = primes::pi_ap(x + y, k, l).unwrap()
            - if x == 0 {
                0
            } else {
                primes::pi_ap(x - 1, k, l).unwrap()
            };
        assert_eq!(s, expected as f64, "x={x} y={y} k={k} l={l}");
    }
}

/// Extending the interval never decreases the sum for a nonnegative weight.
#[test]
fn weighted_sum_monotone_in_interval_length() {
    let mut previous = 0.0;
    for y in [100u64, 500, 1_000, 5_000, 20_000] {
        let f = builtin(
            Shape::Constant,
            Interval::new(1_000.0, y as f64).unwrap(),
            1,
        )
        .unwrap();
        let s = primes::weighted_prime_sum(&f, 1, 0).unwrap();
        assert!(s >= previous, "sum decreased when y grew to {y}");
        previous = s;
    }
}

/// The theorem evaluators stay strict over a seeded random mix of shapes
/// and progressions (smaller than the acceptance corpus, wider parameters).
#[test]
fn random_theorem_cases_hold() {
    let shapes = [
        (Shape::Constant, 1u32),
        (Shape::LinearRamp, 1),
        (Shape::Hat, 2),
        (Shape::SmoothBumpApprox, 32),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E0C);
    for _ in 0..40 {
        let (shape, resolution) = shapes[rng.gen_range(0..shapes.len())];
        let x = rng.gen_range(0..100_000_000u64);
        let y = rng.gen_range(2_000..=50_000u64);
        let k = rng.gen_range(1..=12u64);
        let l = loop {
            let l = rng.gen_range(0..k);
            if wbt_core::gcd(l, k) == 1 {
                break l;
            }
        };
        let f = builtin(
            shape,
            Interval::new(x as f64, y as f64).unwrap(),
            resolution,
        )
        .unwrap();
        if f.rho() <= k as f64 {
            continue;
        }
        let lhs = primes::weighted_prime_sum(&f, k, l).unwrap();
        let (b1, b2) = primes::theorem4_bounds(&f, k).unwrap();
        assert!(lhs < b1.value.unwrap());
        assert!(lhs < b2.value.unwrap());
        if k == 1 {
            let b5 = primes::theorem5_bound(&f);
            assert!(lhs < b5.value.unwrap());
        }
    }
}
