//! The Takagi function `T(x) = sum_k 2^-k dist(2^k x, Z)`.

use num_bigint::BigInt;

use crate::geometry::Rat;
use crate::zoo::scalar::Scalar;

/// Partial sum of the Takagi series together with a bound on the discarded tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated<S> {
    pub value: S,
    /// `|T(x) - value| <= tail_bound`; zero when every omitted term vanishes.
    pub tail_bound: Rat,
}

/// `sum_{k<K} 2^-k dist(2^k x, Z)`.
///
/// The tail is at most `sum_{k>=K} 2^-k / 2 = 2^-K`. If `2^k x` becomes an
/// integer for some `k < K`, all later terms vanish and the result is exact.
pub fn takagi<S: Scalar>(x: &S, k: u32) -> Truncated<S> {
    assert!(k >= 1, "truncation order must be positive");
    let one = Rat::one();
    let two = Rat::from_int(2);
    let mut sum = S::from_rat(Rat::zero());
    // y = frac(2^j x), kept in [0, 1) so numbers stay small.
    let mut y = frac(x);
    let mut weight = Rat::one();
    for _ in 0..k {
        if y.is_zero() {
            return Truncated {
                value: sum,
                tail_bound: Rat::zero(),
            };
        }
        let complement = S::from_rat(one.clone()).sub(&y);
        let dist = if y.cmp_rat(&Rat::new(1, 2)) == std::cmp::Ordering::Greater {
            complement
        } else {
            y.clone()
        };
        sum = sum.add(&dist.mul_rat(&weight));
        weight *= Rat::new(1, 2);
        y = frac(&y.mul_rat(&two));
    }
    let tail_bound = if y.is_zero() { Rat::zero() } else { Rat::dyadic(k) };
    Truncated {
        value: sum,
        tail_bound,
    }
}

fn frac<S: Scalar>(x: &S) -> S {
    let n: BigInt = x.floor();
    x.sub(&S::from_rat(Rat::from_bigint(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::scalar::ScalarQ2;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        for k in [1, 5, 64] {
            let t = takagi(&Rat::zero(), k);
            assert_eq!(t.value, Rat::zero());
            assert_eq!(t.tail_bound, Rat::zero());
        }
        let t = takagi(&Rat::new(1, 2), 2);
        assert_eq!(t.value, Rat::new(1, 2));
        assert_eq!(t.tail_bound, Rat::zero());
        // T(1/4) = 1/4 + 1/2 * 1/2 = 1/2.
        assert_eq!(takagi(&Rat::new(1, 4), 64).value, Rat::new(1, 2));
        // Periodic: T(x + 1) = T(x).
        assert_eq!(takagi(&Rat::new(5, 4), 64).value, Rat::new(1, 2));
    }

    #[test]
    fn one_third_against_geometric_series() {
        // dist(2^k/3, Z) = 1/3 for every k, so the K-term sum is (2/3)(1 - 2^-K).
        let t = takagi(&Rat::new(1, 3), 60);
        let closed = Rat::new(2, 3) * (Rat::one() - Rat::dyadic(60));
        assert_eq!(t.value, closed);
        assert_eq!(t.tail_bound, Rat::dyadic(60));
        assert!((Rat::new(2, 3) - &t.value).abs() <= t.tail_bound);
    }

    #[test]
    fn irrational_probe_agrees_with_float_sum() {
        let x = "1/3+1/7*sqrt2".parse::<ScalarQ2>().unwrap();
        let t = takagi(&x, 40);
        let xf = x.to_f64();
        let float: f64 = (0..40)
            .map(|k| {
                let y = xf * 2f64.powi(k);
                (y - y.round()).abs() / 2f64.powi(k)
            })
            .sum();
        assert!((t.value.to_f64() - float).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn truncations_are_within_bound(n in -500i64..500, d in 1i64..400, k1 in 1u32..40, k2 in 1u32..40) {
            let x = Rat::new(n, d);
            let a = takagi(&x, k1);
            let b = takagi(&x, k2);
            prop_assert!((&a.value - &b.value).abs() <= Rat::dyadic(k1.min(k2)));
        }
    }
}
