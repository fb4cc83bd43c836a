//! Exact wire counting over gate-index intervals.
//!
//! Wires are counted individually: a gate reading the same source on both
//! ports contributes two. Each gate also carries one accounting-only
//! self-wire; self-wires never cross an interval boundary and are never
//! materialized as data.

use thiserror::Error;

use super::GateSource;

/// Wire count for an interval or an interval pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeCount {
    /// Real wires.
    pub functional: u64,
    /// One per gate in the interval; zero for cross-interval counts.
    pub self_wires: u64,
}

impl EdgeCount {
    pub fn total(self) -> u64 {
        self.functional + self.self_wires
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("bad interval: expected 0 <= {0} <= {1} <= gate count")]
pub struct BadInterval(pub usize, pub usize);

/// Functional wires from a source gate in `a..b` to a destination gate in
/// `c..d`, where `b <= c`. Self-wires never cross, so `self_wires` is 0.
pub fn count_cross_edges<C: GateSource + ?Sized>(
    circuit: &C,
    src: std::ops::Range<usize>,
    dst: std::ops::Range<usize>,
) -> Result<EdgeCount, BadInterval> {
    let n = circuit.gate_count();
    if src.start > src.end || src.end > dst.start || dst.start > dst.end || dst.end > n {
        return Err(BadInterval(src.start, dst.end));
    }
    let mut functional = 0;
    for g in dst {
        for s in circuit.gate(g).sources() {
            if src.contains(&s) {
                functional += 1;
            }
        }
    }
    Ok(EdgeCount {
        functional,
        self_wires: 0,
    })
}

/// Wires with both endpoints in `a..c`, plus one self-wire per gate.
pub fn count_interval_edges<C: GateSource + ?Sized>(
    circuit: &C,
    interval: std::ops::Range<usize>,
) -> Result<EdgeCount, BadInterval> {
    let n = circuit.gate_count();
    if interval.start > interval.end || interval.end > n {
        return Err(BadInterval(interval.start, interval.end));
    }
    let mut functional = 0;
    for g in interval.clone() {
        for s in circuit.gate(g).sources() {
            if interval.contains(&s) {
                functional += 1;
            }
        }
    }
    Ok(EdgeCount {
        functional,
        self_wires: (interval.end - interval.start) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::c4;

    #[test]
    fn c4_cross_counts() {
        let c = c4();
        assert_eq!(
            count_cross_edges(&c, 0..2, 2..4).unwrap(),
            EdgeCount {
                functional: 2,
                self_wires: 0
            }
        );
        assert_eq!(
            count_cross_edges(&c, 0..1, 3..4).unwrap().functional,
            0
        );
        assert_eq!(count_cross_edges(&c, 0..2, 3..3).unwrap().total(), 0);
    }

    #[test]
    fn c4_interval_counts() {
        let c = c4();
        let whole = count_interval_edges(&c, 0..4).unwrap();
        assert_eq!(whole.functional, 3);
        assert_eq!(whole.self_wires, 4);
        assert_eq!(whole.total(), 7);

        let upper = count_interval_edges(&c, 2..4).unwrap();
        assert_eq!(upper.functional, 1);
        assert_eq!(upper.total(), 3);

        // A single gate with no internal wires still counts its self-wire.
        assert_eq!(count_interval_edges(&c, 0..1).unwrap().total(), 1);
    }

    #[test]
    fn overlapping_cross_intervals_rejected() {
        let c = c4();
        assert!(count_cross_edges(&c, 0..3, 2..4).is_err());
        assert!(count_interval_edges(&c, 2..9).is_err());
    }
}
