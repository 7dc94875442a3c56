use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::Design;
use crate::polar::{build_equivalent_code, encode, InformationSet};
use crate::user::repeat_encode;
use crate::{Bit, Result};

/// Messages up to this length are checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 16;
/// Random messages checked for longer codes.
pub const SAMPLED_MESSAGES: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub code: InformationSet,
    pub equivalent: InformationSet,
    pub repetition: usize,
    pub messages_checked: usize,
    pub exhaustive: bool,
    /// First message whose two encodings differ.
    pub counterexample: Option<Vec<Bit>>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks that repeating a codeword `repetition` times equals encoding with
/// the equivalent length `N d_r` code.
pub fn check_equivalence(code: &InformationSet, repetition: usize) -> Result<EquivalenceReport> {
    let equivalent = build_equivalent_code(code, repetition)?;
    let k = code.k();
    let exhaustive = k <= EXHAUSTIVE_LIMIT;
    let mut report = EquivalenceReport {
        code: code.clone(),
        equivalent: equivalent.clone(),
        repetition,
        messages_checked: 0,
        exhaustive,
        counterexample: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
    let count = if exhaustive { 1usize << k } else { SAMPLED_MESSAGES };
    for m in 0..count {
        let u: Vec<Bit> = if exhaustive {
            (0..k).map(|i| ((m >> i) & 1) as Bit).collect()
        } else {
            (0..k).map(|_| rng.random_range(0..=1)).collect()
        };
        report.messages_checked += 1;
        let lhs = repeat_encode(&encode(&u, code)?, repetition);
        if lhs != encode(&u, &equivalent)? {
            report.counterexample = Some(u);
            break;
        }
    }
    Ok(report)
}

/// Builds a `(k, n)` code with `design` and runs [`check_equivalence`].
pub fn verify_equivalence(
    n: usize,
    k: usize,
    repetition: usize,
    design: &Design,
) -> Result<EquivalenceReport> {
    let (code, _) = design.build(n, k)?;
    check_equivalence(&code, repetition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_codes_hold() {
        let r = verify_equivalence(8, 4, 2, &Design::Bhattacharyya { z0: 0.5 }).unwrap();
        assert!(r.passed());
        assert!(r.exhaustive);
        assert_eq!(r.messages_checked, 16);
        assert_eq!(r.equivalent.len(), 16);
        let r = verify_equivalence(256, 128, 4, &Design::Nr5g).unwrap();
        assert!(r.passed());
        assert!(!r.exhaustive);
        assert!(verify_equivalence(8, 4, 3, &Design::Nr5g).is_err());
    }
}
