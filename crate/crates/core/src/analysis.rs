//! Contraction analysis for the space/edges ratio.
//!
//! At every recursion level the worst-case ratio `eps` of stored bits to
//! interval edges contracts as `eps -> eps*(1 + k*eps)/(1 + eps)`, where
//! `k < 1` bounds how much of an interval's edge total either half can
//! hold. Iterating the map drives `eps` to zero like `1/i`, which is what
//! makes the whole construction sublinear.
//!
//! The iteration is generic over the scalar: `f64` for long traces,
//! exact rationals when a test wants bit-for-bit arithmetic.

use std::ops::{Add, Div, Mul};

use num_traits::One;

/// Scalar usable in the ratio recurrence. Blanket-implemented for any
/// clonable type with one, `+`, `*`, and `/` — in particular `f64` and the
/// rational types.
pub trait RatioScalar: Clone + One + Add<Output = Self> + Mul<Output = Self> + Div<Output = Self> {}

impl<T> RatioScalar for T where
    T: Clone + One + Add<Output = T> + Mul<Output = T> + Div<Output = T>
{
}

/// One application of the contraction map.
pub fn epsilon_step<T: RatioScalar>(eps: T, k: T) -> T {
    let one = T::one();
    eps.clone() * (one.clone() + k * eps.clone()) / (one + eps)
}

/// Returns `eps_0, eps_1, ..., eps_steps` under repeated application of
/// [`epsilon_step`].
pub fn epsilon_iterate<T: RatioScalar>(epsilon0: T, k: T, steps: usize) -> Vec<T> {
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(epsilon0);
    for _ in 0..steps {
        let eps = trace.last().unwrap().clone();
        trace.push(epsilon_step(eps, k.clone()));
    }
    trace
}

/// Crossing-edge demand `y` at which the two split strategies cost the
/// same, for an interval with edge total `x`: recomputing costs
/// `(x - y)*eps` while materializing costs `x*k*eps + y`, and the worst
/// case over `y` sits where they cross, `y = x*(1 - k)*eps/(eps + 1)`.
pub fn strategy_crossover_demand(x: f64, k: f64, eps: f64) -> f64 {
    x * (1.0 - k) * eps / (eps + 1.0)
}

/// Worst-case ratio after one level: the value of both strategies at the
/// crossover, `eps*(1 + k*eps)/(1 + eps)` scaled by `x`.
pub fn worst_case_space(x: f64, k: f64, eps: f64) -> f64 {
    x * epsilon_step(eps, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BigRational;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_first_steps() {
        // eps0 = 1, k = 1/2: one step gives (1 * (1 + 1/2)) / 2 = 3/4.
        let trace = epsilon_iterate(ratio(1, 1), ratio(1, 2), 1);
        assert_eq!(trace[1], ratio(3, 4));
        // k = 5/6 gives 11/12.
        let trace = epsilon_iterate(ratio(1, 1), ratio(5, 6), 1);
        assert_eq!(trace[1], ratio(11, 12));
    }

    #[test]
    fn zero_steps_returns_start() {
        let trace = epsilon_iterate(0.37f64, 0.5, 0);
        assert_eq!(trace, vec![0.37]);
    }

    #[test]
    fn float_matches_exact_prefix() {
        use num_traits::ToPrimitive;
        let exact = epsilon_iterate(ratio(1, 1), ratio(2, 3), 12);
        let float = epsilon_iterate(1.0f64, 2.0 / 3.0, 12);
        for (e, f) in exact.iter().zip(&float) {
            let e_as_f64 = e.to_f64().unwrap();
            assert!((e_as_f64 - f).abs() < 1e-9);
        }
    }

    #[test]
    fn strictly_decreasing_and_bounded() {
        for k in [0.5f64, 2.0 / 3.0, 5.0 / 6.0] {
            let trace = epsilon_iterate(1.0f64, k, 64);
            for w in trace.windows(2) {
                assert!(w[1] < w[0], "not decreasing at k={k}");
            }
            for (i, eps) in trace.iter().enumerate() {
                assert!(i as f64 * eps <= 10.0, "i*eps_i = {} at k={k}", i as f64 * eps);
            }
        }
    }

    #[test]
    fn crossover_matches_grid_search() {
        // The worst case over y of min((x-y)*eps, x*k*eps + y) should sit
        // at the closed-form crossover, within one grid step.
        let (x, eps) = (1000.0, 0.8);
        for k in [0.5, 2.0 / 3.0, 5.0 / 6.0] {
            let mut best_y = 0.0;
            let mut best = f64::NEG_INFINITY;
            let steps = 4000;
            for i in 0..=steps {
                let y = x * i as f64 / steps as f64;
                let value = ((x - y) * eps).min(x * k * eps + y);
                if value > best {
                    best = value;
                    best_y = y;
                }
            }
            let closed = strategy_crossover_demand(x, k, eps);
            let grid_step = x / steps as f64;
            assert!(
                (best_y - closed).abs() <= grid_step + 1e-9,
                "grid {best_y} vs closed form {closed} at k={k}"
            );
            // The grid undershoots the true maximum by at most one step
            // times the steeper slope.
            let value_tol = grid_step * (1.0 + eps) + 1e-9;
            assert!((best - worst_case_space(x, k, eps)).abs() <= value_tol);
        }
    }
}
