//! Deterministic generators of circuit families and machine programs.
//!
//! Identical `GenSpec`s always produce byte-identical artifacts: all
//! randomness flows through the fixed [`crate::rng::SplitMix64`] mixer.

mod builder;
mod circuits;
mod programs;

pub use builder::CircuitBuilder;
pub use circuits::{parity_tree, random_layered, ripple_adder, ripple_adder_sum_pins};
pub use programs::{bit_reversal_copy, pointer_chase, PointerChaseLayout, ProgramArtifact};

use thiserror::Error;

use crate::circuit::Circuit;
use crate::ramsim::MachineSpec;

/// What to generate, how big, and from which seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub family: Family,
    /// Family size parameter: input count for `ParityTree`, word width for
    /// `RippleAdder`, gate count for `RandomLayered`, chase length for
    /// `PointerChase`, log2 of the copied block for `BitReversalCopy`.
    pub size: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    ParityTree,
    RippleAdder,
    RandomLayered,
    PointerChase,
    BitReversalCopy,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parity-tree" => Ok(Family::ParityTree),
            "ripple-adder" => Ok(Family::RippleAdder),
            "random-layered" => Ok(Family::RandomLayered),
            "pointer-chase" => Ok(Family::PointerChase),
            "bit-reversal-copy" => Ok(Family::BitReversalCopy),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("family {0:?} does not generate this kind of artifact")]
pub struct BadFamily(pub Family);

/// Generates a circuit family member. Every result passes validation.
pub fn gen_circuit(spec: GenSpec) -> Result<Circuit, BadFamily> {
    match spec.family {
        Family::ParityTree => Ok(parity_tree(spec.size)),
        Family::RippleAdder => Ok(ripple_adder(spec.size)),
        Family::RandomLayered => Ok(random_layered(spec.size, spec.seed)),
        other => Err(BadFamily(other)),
    }
}

/// Generates a program family member together with its layout metadata.
pub fn gen_program(spec: GenSpec) -> Result<ProgramArtifact, BadFamily> {
    match spec.family {
        Family::PointerChase => Ok(pointer_chase(spec.size, spec.seed)),
        Family::BitReversalCopy => Ok(bit_reversal_copy(spec.size)),
        other => Err(BadFamily(other)),
    }
}

/// Convenience accessor when only the machine is wanted.
pub fn gen_machine(spec: GenSpec) -> Result<MachineSpec, BadFamily> {
    gen_program(spec).map(|artifact| artifact.machine)
}
