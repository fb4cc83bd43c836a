//! Packed bit buffers and the bit-level reader/writer used by the
//! stored-read-list codecs.

/// Growable bit vector packed into 64-bit words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn set(&mut self, index: usize, bit: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % 64);
        if bit {
            self.words[index / 64] |= mask;
        } else {
            self.words[index / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

impl FromIterator<bool> for BitBuf {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut buf = BitBuf::new();
        for bit in iter {
            buf.push(bit);
        }
        buf
    }
}

/// Appends variable-width codes to a [`BitBuf`]. Bits are written
/// least-significant-first within each value.
#[derive(Debug, Default)]
pub struct BitWriter {
    buf: BitBuf,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.buf.push(bit);
    }

    pub fn write_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < (1u64 << width));
        for i in 0..width {
            self.buf.push(value >> i & 1 == 1);
        }
    }

    /// `count` one-bits followed by a terminating zero.
    pub fn write_unary(&mut self, count: u64) {
        for _ in 0..count {
            self.buf.push(true);
        }
        self.buf.push(false);
    }

    /// Elias gamma code for `value >= 1`: the bit length in unary, then the
    /// low bits. Costs `2*floor(log2 value) + 1` bits.
    pub fn write_gamma(&mut self, value: u64) {
        assert!(value >= 1, "gamma codes start at 1");
        let width = 63 - value.leading_zeros();
        self.write_unary(width as u64);
        self.write_bits(value & !(1u64 << width), width);
    }

    /// Rice code with divisor `2^k`: quotient in unary, remainder in `k`
    /// bits.
    pub fn write_rice(&mut self, value: u64, k: u32) {
        self.write_unary(value >> k);
        self.write_bits(value & ((1u64 << k) - 1).min(u64::MAX), k.min(63));
    }

    pub fn finish(self) -> BitBuf {
        self.buf
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

/// Reads back codes produced by [`BitWriter`].
pub struct BitReader<'a> {
    buf: &'a BitBuf,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(buf: &'a BitBuf) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        if self.pos < self.buf.len() {
            let bit = self.buf.get(self.pos);
            self.pos += 1;
            Some(bit)
        } else {
            None
        }
    }

    pub fn read_bits(&mut self, width: u32) -> Option<u64> {
        let mut value = 0u64;
        for i in 0..width {
            if self.read_bit()? {
                value |= 1u64 << i;
            }
        }
        Some(value)
    }

    pub fn read_unary(&mut self) -> Option<u64> {
        let mut count = 0;
        while self.read_bit()? {
            count += 1;
        }
        Some(count)
    }

    pub fn read_gamma(&mut self) -> Option<u64> {
        let width = self.read_unary()? as u32;
        let low = self.read_bits(width)?;
        Some(low | 1u64 << width)
    }

    pub fn read_rice(&mut self, k: u32) -> Option<u64> {
        let quotient = self.read_unary()?;
        let remainder = self.read_bits(k.min(63))?;
        Some((quotient << k) | remainder)
    }
}

/// Bit length of the gamma code for `value >= 1`.
pub fn gamma_len(value: u64) -> u64 {
    debug_assert!(value >= 1);
    2 * (63 - value.leading_zeros()) as u64 + 1
}

/// Bit length of the Rice code for `value` with parameter `k`.
pub fn rice_len(value: u64, k: u32) -> u64 {
    (value >> k) + 1 + k as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_get_roundtrip() {
        let mut buf = BitBuf::new();
        let pattern: Vec<bool> = (0..200).map(|i| i % 3 == 0).collect();
        for &b in &pattern {
            buf.push(b);
        }
        assert_eq!(buf.len(), 200);
        for (i, &b) in pattern.iter().enumerate() {
            assert_eq!(buf.get(i), b);
        }
    }

    #[test]
    fn gamma_roundtrip_small() {
        let mut w = BitWriter::new();
        for v in 1..=300u64 {
            w.write_gamma(v);
        }
        let buf = w.finish();
        let mut r = BitReader::new(&buf);
        for v in 1..=300u64 {
            assert_eq!(r.read_gamma(), Some(v));
        }
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn gamma_len_matches_written() {
        for v in [1u64, 2, 3, 7, 8, 255, 256, 1 << 40] {
            let mut w = BitWriter::new();
            w.write_gamma(v);
            assert_eq!(w.len() as u64, gamma_len(v));
        }
    }

    #[test]
    fn rice_roundtrip() {
        for k in 0..8u32 {
            let mut w = BitWriter::new();
            for v in 0..100u64 {
                w.write_rice(v, k);
            }
            let buf = w.finish();
            let mut r = BitReader::new(&buf);
            for v in 0..100u64 {
                assert_eq!(r.read_rice(k), Some(v), "k={k}");
            }
        }
    }

    #[test]
    fn rice_len_matches_written() {
        for (v, k) in [(0u64, 0u32), (5, 0), (5, 2), (77, 3), (1024, 10)] {
            let mut w = BitWriter::new();
            w.write_rice(v, k);
            assert_eq!(w.len() as u64, rice_len(v, k));
        }
    }
}
