//! Measured space accounting for one evaluation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Peak and per-interval stored-bit accounting from an instrumented run.
///
/// `per_interval` records, per plan node, the most bits that node itself
/// ever held at once: the gate buffer for a direct node, the crossing-wire
/// buffer for a strategy-`B` split, nothing for strategy `A`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub peak_stored_bits: u64,
    pub peak_frames: u64,
    pub recompute_count: u64,
    #[serde(with = "interval_triples")]
    pub per_interval: BTreeMap<(usize, usize), u64>,
}

impl SpaceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `per_interval` as an array of `[a, c, bits]` triples.
mod interval_triples {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), u64>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let triples: Vec<(usize, usize, u64)> =
            map.iter().map(|(&(a, c), &bits)| (a, c, bits)).collect();
        triples.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<(usize, usize), u64>, D::Error> {
        let triples = Vec::<(usize, usize, u64)>::deserialize(de)?;
        Ok(triples.into_iter().map(|(a, c, bits)| ((a, c), bits)).collect())
    }
}
