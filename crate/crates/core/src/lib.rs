//! Space-frugal evaluation of boolean gate circuits and single-bit-access
//! machines.
//!
//! The crate is organized around two engines and their shared substrate:
//!
//! * [`circuit`] — gate-list intermediate representation, validation, a
//!   one-pass reference evaluator, and exact wire counting over index
//!   intervals.
//! * [`blockeval`] — recursive interval evaluation of a circuit under a
//!   [`blockeval::Plan`]: every split either recomputes the lower half on
//!   demand (strategy `A`) or materializes one bit per crossing wire
//!   (strategy `B`). Includes the exact space model, an optimal planner,
//!   a metered executor, and an iterative-deepening evaluator that
//!   searches strategy choices under a growing space budget.
//! * [`ramsim`] — the analogous machinery for unit-cost single-bit-access
//!   machines: a tracing reference simulator, a replay simulator that
//!   stores only the sequence of read bits, and a recursive block
//!   simulator with entropy-coded stored-read checkpoints.
//! * [`genlib`] — deterministic generators of circuit families and
//!   machine programs with known closed-form behavior.
//! * [`analysis`] — the contraction recurrence for the space/edges ratio
//!   and the crossover point between the two split strategies, generic
//!   over the scalar type.

pub mod analysis;
pub mod bits;
pub mod blockeval;
pub mod circuit;
pub mod genlib;
pub mod ramsim;
pub mod rng;

/// Exact rational scalar used where tests need bit-for-bit arithmetic.
pub type BigRational = num_rational::BigRational;
/// Small exact fraction used for model constants such as the contraction
/// factor.
pub type Frac = num_rational::Ratio<u64>;
