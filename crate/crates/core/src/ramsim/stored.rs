//! Stored-read lists and their codecs.
//!
//! A stored-read list is the strategy-`B` checkpoint: the boundary-defined
//! bits of the upper half in first-read order, each with the number of
//! upper-half reads elapsed since the previous entry. With `d` entries per
//! read, the positional information costs about `lg(1/d)` bits per entry
//! at the entropy limit, plus one bit for the value.
//!
//! Gaps are coded with a Rice code whose divisor is fitted to the list
//! (the exact minimizer over divisor exponents), which stays within about
//! one bit per entry of the entropy at the densities we care about. A
//! plain Elias-gamma mode is kept for comparison, but gamma spends
//! `~2*lg(gap)` bits per gap, double the entropy, so it is not the
//! default. A raw fixed-width mode completes the set.

use crate::bits::{rice_len, BitReader, BitWriter};

/// One checkpoint entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoredRead {
    /// Upper-half reads elapsed since the previous stored entry (or since
    /// the interval start for the first entry).
    pub step_gap: u64,
    /// Value of the bit at checkpoint time.
    pub bit: bool,
}

/// Entries in first-read order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoredReadList {
    pub entries: Vec<StoredRead>,
}

impl StoredReadList {
    pub fn from_steps(base: u64, steps_and_bits: impl IntoIterator<Item = (u64, bool)>) -> Self {
        let mut entries = Vec::new();
        let mut prev = base;
        for (step, bit) in steps_and_bits {
            debug_assert!(step >= prev);
            entries.push(StoredRead {
                step_gap: step - prev,
                bit,
            });
            prev = step + 1;
        }
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ListEncoding {
    /// Fixed-width gaps sized to the largest one.
    Raw,
    /// Elias gamma per gap.
    Gamma,
    /// Rice code with the fitted divisor exponent.
    #[default]
    Rice,
}

/// Encoded list. `payload` holds the per-entry codes; the entry count,
/// encoding tag, and code parameter are header data, reported separately
/// from the payload length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedList {
    pub encoding: ListEncoding,
    pub entries: usize,
    /// Divisor exponent for `Rice`, gap width for `Raw`, unused for
    /// `Gamma`.
    pub parameter: u32,
    pub payload: crate::bits::BitBuf,
}

impl EncodedList {
    pub fn payload_bits(&self) -> u64 {
        self.payload.len() as u64
    }

    /// Fixed header: 64-bit entry count, 2-bit encoding tag, 6-bit
    /// parameter.
    pub fn header_bits(&self) -> u64 {
        72
    }
}

/// Exact minimizer of the Rice payload over divisor exponents.
pub fn choose_rice_k(list: &StoredReadList) -> u32 {
    let mut best = (u64::MAX, 0u32);
    for k in 0..32 {
        let total: u64 = list.entries.iter().map(|e| rice_len(e.step_gap, k)).sum();
        if total < best.0 {
            best = (total, k);
        }
    }
    best.1
}

fn raw_width(list: &StoredReadList) -> u32 {
    let max_gap = list.entries.iter().map(|e| e.step_gap).max().unwrap_or(0);
    (64 - max_gap.leading_zeros()).max(1)
}

/// Encodes the list; decoding reproduces it exactly.
pub fn encode_stored_list(list: &StoredReadList, encoding: ListEncoding) -> EncodedList {
    let parameter = match encoding {
        ListEncoding::Raw => raw_width(list),
        ListEncoding::Gamma => 0,
        ListEncoding::Rice => choose_rice_k(list),
    };
    let mut writer = BitWriter::new();
    for entry in &list.entries {
        match encoding {
            ListEncoding::Raw => writer.write_bits(entry.step_gap, parameter),
            ListEncoding::Gamma => writer.write_gamma(entry.step_gap + 1),
            ListEncoding::Rice => writer.write_rice(entry.step_gap, parameter),
        }
        writer.write_bit(entry.bit);
    }
    EncodedList {
        encoding,
        entries: list.len(),
        parameter,
        payload: writer.finish(),
    }
}

pub fn decode_stored_list(encoded: &EncodedList) -> StoredReadList {
    let mut reader = BitReader::new(&encoded.payload);
    let mut entries = Vec::with_capacity(encoded.entries);
    for _ in 0..encoded.entries {
        let step_gap = match encoded.encoding {
            ListEncoding::Raw => reader.read_bits(encoded.parameter),
            ListEncoding::Gamma => reader.read_gamma().map(|v| v - 1),
            ListEncoding::Rice => reader.read_rice(encoded.parameter),
        }
        .expect("payload truncated");
        let bit = reader.read_bit().expect("payload truncated");
        entries.push(StoredRead { step_gap, bit });
    }
    debug_assert_eq!(reader.remaining(), 0);
    StoredReadList { entries }
}

/// Payload bits under the default encoding; the header is reported
/// separately by [`EncodedList::header_bits`].
pub fn stored_list_bits(list: &StoredReadList) -> u64 {
    encode_stored_list(list, ListEncoding::default()).payload_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_list(rng: &mut SplitMix64, entries: usize, mean_gap: u64) -> StoredReadList {
        let entries = (0..entries)
            .map(|_| StoredRead {
                step_gap: rng.next_below(2 * mean_gap + 1),
                bit: rng.next_bool(),
            })
            .collect();
        StoredReadList { entries }
    }

    #[test]
    fn empty_list_is_zero_payload() {
        let list = StoredReadList::default();
        let encoded = encode_stored_list(&list, ListEncoding::Rice);
        assert_eq!(encoded.payload_bits(), 0);
        assert_eq!(encoded.header_bits(), 72);
        assert_eq!(decode_stored_list(&encoded), list);
    }

    #[test]
    fn single_entry_roundtrip() {
        let list = StoredReadList {
            entries: vec![StoredRead {
                step_gap: 0,
                bit: true,
            }],
        };
        for encoding in [ListEncoding::Raw, ListEncoding::Gamma, ListEncoding::Rice] {
            let encoded = encode_stored_list(&list, encoding);
            assert_eq!(decode_stored_list(&encoded), list, "{encoding:?}");
        }
        // Gamma: gap 0 codes as gamma(1) = 1 bit, plus the value bit.
        let gamma = encode_stored_list(&list, ListEncoding::Gamma);
        assert_eq!(gamma.payload_bits(), 2);
    }

    #[test]
    fn random_roundtrips_all_encodings() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..200 {
            let entries = (rng.next_below(40) + 1) as usize;
            let list = random_list(&mut rng, entries, 16);
            for encoding in [ListEncoding::Raw, ListEncoding::Gamma, ListEncoding::Rice] {
                let encoded = encode_stored_list(&list, encoding);
                assert_eq!(decode_stored_list(&encoded), list);
            }
        }
    }

    #[test]
    fn rice_meets_density_bound() {
        // Uniform random hit patterns at density d: payload per entry
        // must stay within lg(1/d) + 3.5.
        let mut rng = SplitMix64::new(11);
        for inv_d in [4u64, 16, 64] {
            let total_reads = 1 << 14;
            let mut steps = Vec::new();
            for step in 0..total_reads {
                if rng.next_ratio(1, inv_d) {
                    steps.push((step, rng.next_bool()));
                }
            }
            let list = StoredReadList::from_steps(0, steps);
            let bits = stored_list_bits(&list);
            let per_entry = bits as f64 / list.len() as f64;
            let bound = (inv_d as f64).log2() + 3.5;
            assert!(
                per_entry <= bound,
                "density 1/{inv_d}: {per_entry:.2} bits/entry exceeds {bound:.2}"
            );
        }
    }

    #[test]
    fn from_steps_gap_convention() {
        let list = StoredReadList::from_steps(10, vec![(10, true), (12, false), (13, true)]);
        let gaps: Vec<u64> = list.entries.iter().map(|e| e.step_gap).collect();
        assert_eq!(gaps, vec![0, 1, 0]);
    }
}
