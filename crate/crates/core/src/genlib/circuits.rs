//! Circuit families.

use crate::circuit::{Circuit, Gate};
use crate::rng::SplitMix64;

use super::CircuitBuilder;

/// XOR of `inputs` input bits, combined level by level: all the inputs
/// first, then every first-level combiner left to right, and so on up the
/// tree. The breadth-first layout keeps each level's outputs adjacent in
/// the ordering.
pub fn parity_tree(inputs: usize) -> Circuit {
    let inputs = inputs.max(1);
    let mut builder = CircuitBuilder::new(inputs);
    let mut level: Vec<usize> = (0..inputs).map(|j| builder.input(j)).collect();
    if level.len() == 1 {
        let out = builder.pin(level[0]);
        return builder.finish(out);
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut iter = level.chunks_exact(2);
        for pair in iter.by_ref() {
            next.push(builder.xor(pair[0], pair[1]));
        }
        if let [odd] = *iter.remainder() {
            next.push(odd);
        }
        level = next;
    }
    let out = level[0];
    builder.finish(out)
}

/// Adds two `width`-bit numbers. Inputs are the first operand's bits most
/// significant first, then the second operand's likewise. The `width` sum
/// bits (modulo `2^width`) are pinned as the final `width` gates, most
/// significant first.
pub fn ripple_adder(width: usize) -> Circuit {
    let width = width.max(1);
    let mut builder = CircuitBuilder::new(2 * width);
    // Bit i (least significant) of each operand.
    let a: Vec<usize> = (0..width).map(|i| builder.input(width - 1 - i)).collect();
    let b: Vec<usize> = (0..width).map(|i| builder.input(2 * width - 1 - i)).collect();

    let mut sums = Vec::with_capacity(width);
    let mut carry: Option<usize> = None;
    for i in 0..width {
        let half_sum = builder.xor(a[i], b[i]);
        let half_carry = builder.and(a[i], b[i]);
        match carry {
            None => {
                sums.push(half_sum);
                carry = Some(half_carry);
            }
            Some(c) => {
                let sum = builder.xor(half_sum, c);
                let propagate = builder.and(half_sum, c);
                let carry_out = builder.or(half_carry, propagate);
                sums.push(sum);
                carry = Some(carry_out);
            }
        }
    }

    // Pins in most-significant-first order, so the circuit tail reads as
    // the written sum.
    let mut last = 0;
    for i in (0..width).rev() {
        last = builder.pin(sums[i]);
    }
    builder.finish(last)
}

/// Gate positions of the pinned sum bits, most significant first.
pub fn ripple_adder_sum_pins(circuit: &Circuit, width: usize) -> Vec<usize> {
    let n = circuit.gates().len();
    (n - width..n).collect()
}

/// Random circuit of exactly `gate_count` gates with locality-biased
/// wiring: sources are drawn from the most recent gates that still have a
/// free fan-out slot, so wires mostly stay short with occasional long
/// hops.
pub fn random_layered(gate_count: usize, seed: u64) -> Circuit {
    let gate_count = gate_count.max(1);
    let num_inputs = (gate_count / 8).clamp(1, gate_count);
    let mut rng = SplitMix64::new(seed);

    let mut gates: Vec<Gate> = Vec::with_capacity(gate_count);
    let mut fan_out = vec![0u8; gate_count];
    // Gates with spare fan-out, oldest first.
    let mut open: Vec<usize> = Vec::new();

    for j in 0..num_inputs.min(gate_count) {
        gates.push(Gate::Input(j));
        open.push(j);
    }

    while gates.len() < gate_count {
        let index = gates.len();
        let gate = if open.is_empty() {
            Gate::Const(rng.next_bool())
        } else {
            let mut draw = |rng: &mut SplitMix64, open: &mut Vec<usize>| -> Option<usize> {
                if open.is_empty() {
                    return None;
                }
                let window = open.len().min((gate_count / 8).max(4));
                let offset = open.len() - window + rng.next_below(window as u64) as usize;
                let source = open[offset];
                fan_out[source] += 1;
                if fan_out[source] >= 2 {
                    open.remove(offset);
                }
                Some(source)
            };
            match rng.next_below(8) {
                0 | 1 => match draw(&mut rng, &mut open) {
                    Some(s) => Gate::Not(s),
                    None => Gate::Const(rng.next_bool()),
                },
                2 => match draw(&mut rng, &mut open) {
                    Some(s) => Gate::Dup(s),
                    None => Gate::Const(rng.next_bool()),
                },
                3 | 4 | 5 => match (draw(&mut rng, &mut open), draw(&mut rng, &mut open)) {
                    (Some(s), Some(t)) => Gate::And(s, t),
                    (Some(s), None) | (None, Some(s)) => Gate::Not(s),
                    (None, None) => Gate::Const(rng.next_bool()),
                },
                _ => match (draw(&mut rng, &mut open), draw(&mut rng, &mut open)) {
                    (Some(s), Some(t)) => Gate::Or(s, t),
                    (Some(s), None) | (None, Some(s)) => Gate::Not(s),
                    (None, None) => Gate::Const(rng.next_bool()),
                },
            }
        };
        gates.push(gate);
        open.push(index);
    }

    Circuit::new(gates, num_inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{format_circuit, naive_eval, validate_circuit};

    #[test]
    fn parity_tree_two_inputs() {
        let c = parity_tree(2);
        validate_circuit(&c).unwrap();
        let values = naive_eval(&c, &[true, false]).unwrap();
        assert!(values[c.output_gate()]);
        let values = naive_eval(&c, &[true, true]).unwrap();
        assert!(!values[c.output_gate()]);
    }

    #[test]
    fn parity_tree_matches_xor_reduction() {
        for inputs in [1usize, 3, 5, 8, 17] {
            let c = parity_tree(inputs);
            validate_circuit(&c).unwrap();
            let mut rng = SplitMix64::new(inputs as u64);
            for _ in 0..16 {
                let bits: Vec<bool> = (0..inputs).map(|_| rng.next_bool()).collect();
                let expected = bits.iter().fold(false, |acc, &b| acc ^ b);
                let values = naive_eval(&c, &bits).unwrap();
                assert_eq!(values[c.output_gate()], expected, "inputs={inputs}");
            }
        }
    }

    #[test]
    fn ripple_adder_example() {
        let c = ripple_adder(4);
        validate_circuit(&c).unwrap();
        // 0011 + 0001 = 0100.
        let input: Vec<bool> = "00110001".chars().map(|ch| ch == '1').collect();
        let values = naive_eval(&c, &input).unwrap();
        let sum: String = ripple_adder_sum_pins(&c, 4)
            .iter()
            .map(|&g| if values[g] { '1' } else { '0' })
            .collect();
        assert_eq!(sum, "0100");
    }

    #[test]
    fn ripple_adder_random_sums() {
        let width = 6;
        let c = ripple_adder(width);
        let mut rng = SplitMix64::new(99);
        for _ in 0..32 {
            let x = rng.next_below(1 << width);
            let y = rng.next_below(1 << width);
            let mut input = Vec::new();
            for i in (0..width).rev() {
                input.push(x >> i & 1 == 1);
            }
            for i in (0..width).rev() {
                input.push(y >> i & 1 == 1);
            }
            let values = naive_eval(&c, &input).unwrap();
            let got = ripple_adder_sum_pins(&c, width)
                .iter()
                .fold(0u64, |acc, &g| acc << 1 | u64::from(values[g]));
            assert_eq!(got, (x + y) % (1 << width), "{x}+{y}");
        }
    }

    #[test]
    fn random_layered_validates_and_is_deterministic() {
        let a = random_layered(256, 42);
        let b = random_layered(256, 42);
        validate_circuit(&a).unwrap();
        assert_eq!(a.gates().len(), 256);
        assert_eq!(format_circuit(&a), format_circuit(&b));
        let c = random_layered(256, 43);
        assert_ne!(format_circuit(&a), format_circuit(&c));
    }
}
