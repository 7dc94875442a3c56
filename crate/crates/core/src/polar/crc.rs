//! Bit-serial CRC for the CRC-aided stopping rule.

use crate::{Bit, Error, Result};

/// Rocksoft-style CRC parameters. `poly` omits the implicit top bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrcSpec {
    pub width: usize,
    pub poly: u64,
    pub init: u64,
    pub reflect_in: bool,
    pub reflect_out: bool,
    pub xor_out: u64,
}

impl CrcSpec {
    pub const CRC8: CrcSpec = CrcSpec::plain(8, 0x07);
    /// 5G NR CRC11 (uplink control).
    pub const CRC11: CrcSpec = CrcSpec::plain(11, 0x621);
    /// 5G NR CRC16.
    pub const CRC16: CrcSpec = CrcSpec::plain(16, 0x1021);
    /// 5G NR CRC24C (downlink polar).
    pub const CRC24C: CrcSpec = CrcSpec::plain(24, 0xB2_B117);

    /// Zero init, no reflection, no final xor.
    pub const fn plain(width: usize, poly: u64) -> Self {
        Self {
            width,
            poly,
            init: 0,
            reflect_in: false,
            reflect_out: false,
            xor_out: 0,
        }
    }

    /// Looks up a preset by name (`crc8`, `crc11`, `crc16`, `crc24c`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "crc8" => Some(Self::CRC8),
            "crc11" => Some(Self::CRC11),
            "crc16" => Some(Self::CRC16),
            "crc24c" => Some(Self::CRC24C),
            _ => None,
        }
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// CRC register over a bit sequence, processed in the given order.
    pub fn checksum(&self, bits: &[Bit]) -> u64 {
        let mask = self.mask();
        let top = self.width - 1;
        let mut reg = self.init & mask;
        for &bit in bits {
            let feedback = ((reg >> top) & 1) as u8 ^ bit;
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        if self.reflect_out {
            reg = reg.reverse_bits() >> (64 - self.width);
        }
        (reg ^ self.xor_out) & mask
    }

    /// CRC over bytes; bits are fed MSB first unless `reflect_in`.
    pub fn checksum_bytes(&self, bytes: &[u8]) -> u64 {
        let bits: Vec<Bit> = bytes
            .iter()
            .flat_map(|&b| {
                (0..8).map(move |i| {
                    let shift = if self.reflect_in { i } else { 7 - i };
                    (b >> shift) & 1
                })
            })
            .collect();
        self.checksum(&bits)
    }

    fn to_bits(self, value: u64) -> impl Iterator<Item = Bit> {
        (0..self.width).rev().map(move |i| ((value >> i) & 1) as Bit)
    }
}

/// Appends `width` check bits (MSB first) to a nonempty payload.
pub fn crc_attach(payload: &[Bit], spec: &CrcSpec) -> Result<Vec<Bit>> {
    if payload.is_empty() {
        return Err(Error::InvalidParameter("empty CRC payload".into()));
    }
    let crc = spec.checksum(payload);
    let mut word = payload.to_vec();
    word.extend(spec.to_bits(crc));
    Ok(word)
}

/// True iff the trailing `width` bits match the CRC of the leading bits.
pub fn crc_check(word: &[Bit], spec: &CrcSpec) -> Result<bool> {
    if spec.width >= word.len() {
        return Err(Error::CrcTooWide {
            width: spec.width,
            len: word.len(),
        });
    }
    let (payload, tail) = word.split_at(word.len() - spec.width);
    let crc = spec.checksum(payload);
    Ok(spec.to_bits(crc).eq(tail.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Remainder of `m(x) x^w mod g(x)` by schoolbook GF(2) long division.
    fn long_division(msg: &[Bit], width: usize, poly: u64) -> u64 {
        let mut dividend: Vec<Bit> = msg.to_vec();
        dividend.extend(std::iter::repeat_n(0, width));
        let divisor: Vec<Bit> = std::iter::once(1)
            .chain((0..width).rev().map(|i| ((poly >> i) & 1) as Bit))
            .collect();
        for i in 0..msg.len() {
            if dividend[i] == 1 {
                for (j, &d) in divisor.iter().enumerate() {
                    dividend[i + j] ^= d;
                }
            }
        }
        dividend[msg.len()..]
            .iter()
            .fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    fn bytes_to_bits(bytes: &[u8]) -> Vec<Bit> {
        bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect()
    }

    #[test]
    fn crc8_check_value() {
        let oracle = long_division(&bytes_to_bits(b"123456789"), 8, 0x07);
        assert_eq!(oracle, 0xF4);
        assert_eq!(CrcSpec::CRC8.checksum_bytes(b"123456789"), oracle);
    }

    #[test]
    fn register_matches_long_division() {
        let msg: Vec<Bit> = (0..77).map(|i| ((i * 7 + i / 3) % 2) as Bit).collect();
        for spec in [CrcSpec::CRC8, CrcSpec::CRC11, CrcSpec::CRC16, CrcSpec::CRC24C] {
            assert_eq!(spec.checksum(&msg), long_division(&msg, spec.width, spec.poly));
        }
    }

    #[test]
    fn reflected_variant() {
        // CRC-16/ARC: poly 0x8005, reflected in/out, check 0xBB3D.
        let arc = CrcSpec {
            width: 16,
            poly: 0x8005,
            init: 0,
            reflect_in: true,
            reflect_out: true,
            xor_out: 0,
        };
        assert_eq!(arc.checksum_bytes(b"123456789"), 0xBB3D);
    }

    #[test]
    fn attach_then_check() {
        let payload = [1, 0, 1, 1, 0, 0, 1];
        let word = crc_attach(&payload, &CrcSpec::CRC8).unwrap();
        assert_eq!(word.len(), payload.len() + 8);
        assert!(crc_check(&word, &CrcSpec::CRC8).unwrap());
        for i in 0..word.len() {
            let mut bad = word.clone();
            bad[i] ^= 1;
            assert!(!crc_check(&bad, &CrcSpec::CRC8).unwrap(), "flip at {i}");
        }
    }

    #[test]
    fn word_too_short() {
        assert!(matches!(
            crc_check(&[0; 8], &CrcSpec::CRC8),
            Err(Error::CrcTooWide { width: 8, len: 8 })
        ));
        assert!(crc_attach(&[], &CrcSpec::CRC8).is_err());
    }
}
