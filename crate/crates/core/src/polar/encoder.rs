//! Non-systematic polar encoding in natural bit order.

use super::InformationSet;
use crate::{Bit, Error, Result};

/// In-place `x = u F^{(x)n}` with `F = [[1, 0], [1, 1]]` (row-vector
/// convention, no bit reversal). Stage `s` pairs positions `span = 2^s` apart.
pub fn polar_transform(bits: &mut [Bit]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut span = 1;
    while span < n {
        for block in bits.chunks_exact_mut(2 * span) {
            let (upper, lower) = block.split_at_mut(span);
            for (a, &b) in upper.iter_mut().zip(lower.iter()) {
                *a ^= b;
            }
        }
        span *= 2;
    }
}

/// Places `u` on the information positions (frozen positions are 0).
pub fn scatter(u: &[Bit], info: &InformationSet) -> Result<Vec<Bit>> {
    if u.len() != info.k() {
        return Err(Error::LengthMismatch {
            expected: info.k(),
            actual: u.len(),
        });
    }
    let mut full = vec![0; info.len()];
    let mut src = u.iter();
    for (slot, &a) in full.iter_mut().zip(info.mask()) {
        if a {
            *slot = *src.next().unwrap();
        }
    }
    Ok(full)
}

/// Reads the information positions of a length-N vector.
pub fn gather(full: &[Bit], info: &InformationSet) -> Vec<Bit> {
    full.iter()
        .zip(info.mask())
        .filter_map(|(&b, &a)| a.then_some(b))
        .collect()
}

/// Encodes `k` information bits into a length-N codeword.
pub fn encode(u: &[Bit], info: &InformationSet) -> Result<Vec<Bit>> {
    let mut x = scatter(u, info)?;
    polar_transform(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_of_the_kernel_power() {
        let full = InformationSet::parse("1111").unwrap();
        assert_eq!(encode(&[1, 0, 0, 0], &full).unwrap(), [1, 0, 0, 0]);
        assert_eq!(encode(&[0, 0, 0, 1], &full).unwrap(), [1, 1, 1, 1]);
        let half = InformationSet::parse("0011").unwrap();
        // row 3 xor row 4 = (1,0,1,0) xor (1,1,1,1)
        assert_eq!(encode(&[1, 1], &half).unwrap(), [0, 1, 0, 1]);
    }

    #[test]
    fn wrong_message_length() {
        let half = InformationSet::parse("0011").unwrap();
        assert!(matches!(
            encode(&[1], &half),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn transform_is_an_involution() {
        let mut v: Vec<Bit> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let orig = v.clone();
        polar_transform(&mut v);
        polar_transform(&mut v);
        assert_eq!(v, orig);
    }
}
