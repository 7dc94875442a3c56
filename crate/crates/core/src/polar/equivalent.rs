//! A polar code followed by an inner d_r-fold repetition is itself a polar
//! code of length N d_r whose first N (d_r - 1) bit-channels are frozen.

use super::InformationSet;
use crate::{Error, Result};

/// Builds the length `N d_r` information set: `N (d_r - 1)` frozen positions
/// followed by a copy of `info`. Its codewords are the original codewords
/// repeated blockwise `d_r` times.
pub fn build_equivalent_code(info: &InformationSet, repetition: usize) -> Result<InformationSet> {
    if repetition < 2 || !repetition.is_power_of_two() {
        return Err(Error::InvalidRepetition(repetition));
    }
    let n = info.len();
    let mut mask = vec![false; n * (repetition - 1)];
    mask.extend_from_slice(info.mask());
    InformationSet::new(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::encode;

    #[test]
    fn two_by_two() {
        let info = InformationSet::parse("01").unwrap();
        let eq = build_equivalent_code(&info, 2).unwrap();
        assert_eq!(eq.to_string(), "0001");
        assert_eq!(encode(&[1], &eq).unwrap(), [1, 1, 1, 1]);
        assert_eq!(encode(&[1], &info).unwrap(), [1, 1]);
    }

    #[test]
    fn four_by_two() {
        let info = InformationSet::parse("0011").unwrap();
        let eq = build_equivalent_code(&info, 2).unwrap();
        assert_eq!(eq.to_string(), "00000011");
        assert_eq!(eq.rate(), info.rate() / 2.0);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let info = InformationSet::parse("01").unwrap();
        assert!(matches!(
            build_equivalent_code(&info, 3),
            Err(Error::InvalidRepetition(3))
        ));
        assert!(build_equivalent_code(&info, 1).is_err());
    }
}
