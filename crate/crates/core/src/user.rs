//! Per-user transmit and receive chain: polar encoding, repetition,
//! interleaving, BPSK mapping, phase scrambling and soft demapping.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polar::{encode, CrcSpec, InformationSet};
use crate::{Bit, Error, Result};

/// Blockwise repetition: `c || c || ... ` (`repetition` blocks).
pub fn repeat_encode(bits: &[Bit], repetition: usize) -> Vec<Bit> {
    bits.repeat(repetition)
}

/// Sums the `repetition` copies of each position (inverse layout of
/// [`repeat_encode`]).
pub fn repeat_combine(llrs: &[f64], repetition: usize) -> Result<Vec<f64>> {
    if repetition == 0 || !llrs.len().is_multiple_of(repetition) {
        return Err(Error::LengthMismatch {
            expected: llrs.len().next_multiple_of(repetition.max(1)),
            actual: llrs.len(),
        });
    }
    let n = llrs.len() / repetition;
    let mut out = llrs[..n].to_vec();
    for block in llrs[n..].chunks_exact(n) {
        for (o, v) in out.iter_mut().zip(block) {
            *o += v;
        }
    }
    Ok(out)
}

/// A user-specific permutation. Position `i` moves to `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self {
            perm: (0..len).collect(),
        }
    }

    /// Fisher-Yates permutation from ChaCha8 seeded with `seed`.
    pub fn from_seed(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        Self { perm }
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("interleaver is not a permutation".into()));
            }
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::LengthMismatch {
                expected: self.perm.len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `out[perm[i]] = v[i]`.
    pub fn interleave<T: Copy + Default>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let mut out = vec![T::default(); v.len()];
        for (&p, &x) in self.perm.iter().zip(v) {
            out[p] = x;
        }
        Ok(out)
    }

    /// `out[i] = v[perm[i]]`.
    pub fn deinterleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        Ok(self.perm.iter().map(|&p| v[p]).collect())
    }
}

/// Bit 0 maps to `+1`, bit 1 to `-1`.
pub fn map_bpsk(bits: &[Bit]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
}

pub fn scramble(symbols: &[f64], phase: f64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, phase);
    symbols.iter().map(|&s| rot * s).collect()
}

pub fn descramble(y: &[Complex64], phase: f64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, -phase);
    y.iter().map(|&v| v * rot).collect()
}

/// MMSE estimate of a BPSK symbol from its LLR, `tanh(L / 2)`.
#[inline]
pub fn soft_symbol(llr: f64) -> f64 {
    (0.5 * llr).tanh()
}

/// Transmit parameters of one user.
#[derive(Clone, Debug)]
pub struct UserConfig {
    pub user_id: usize,
    /// Received power P (linear).
    pub power: f64,
    /// Phase scrambling angle in `[0, pi)`.
    pub phase: f64,
    pub interleaver: Arc<Interleaver>,
    pub repetition: usize,
    pub code: Arc<InformationSet>,
    pub crc: Option<CrcSpec>,
}

impl UserConfig {
    pub fn new(
        user_id: usize,
        power: f64,
        phase: f64,
        code: Arc<InformationSet>,
        repetition: usize,
        interleaver: Arc<Interleaver>,
    ) -> Result<Self> {
        let cfg = Self {
            user_id,
            power,
            phase,
            interleaver,
            repetition,
            code,
            crc: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidParameter(format!("power {}", self.power)));
        }
        if !(0.0..std::f64::consts::PI).contains(&self.phase) {
            return Err(Error::InvalidParameter(format!(
                "phase {} outside [0, pi)",
                self.phase
            )));
        }
        if self.repetition == 0 {
            return Err(Error::InvalidParameter("repetition factor 0".into()));
        }
        if self.interleaver.len() != self.frame_len() {
            return Err(Error::LengthMismatch {
                expected: self.frame_len(),
                actual: self.interleaver.len(),
            });
        }
        if let Some(crc) = &self.crc {
            if crc.width >= self.code.k() {
                return Err(Error::CrcTooWide {
                    width: crc.width,
                    len: self.code.k(),
                });
            }
        }
        Ok(())
    }

    /// Channel uses per frame, `N d_r`.
    pub fn frame_len(&self) -> usize {
        self.code.len() * self.repetition
    }

    /// Per-user information rate R_u = R_c / d_r.
    pub fn rate(&self) -> f64 {
        self.code.rate() / self.repetition as f64
    }

    /// Coded bits after repetition and interleaving, in channel order.
    pub fn channel_bits(&self, codeword: &[Bit]) -> Result<Vec<Bit>> {
        self.interleaver
            .interleave(&repeat_encode(codeword, self.repetition))
    }

    /// Full transmit chain for information bits `u` (CRC already attached):
    /// encode, repeat, interleave, map, scramble. Returns unit-power symbols.
    pub fn transmit(&self, u: &[Bit]) -> Result<Vec<Complex64>> {
        let codeword = encode(u, &self.code)?;
        let bits = self.channel_bits(&codeword)?;
        Ok(scramble(&map_bpsk(&bits), self.phase))
    }
}

/// Soft demapper treating residual interference as Gaussian noise:
/// `L = 4 sqrt(P) Re(y e^{-j phi}) / sigma_eff2`, where `sigma_eff2` is the
/// total complex variance per position.
pub fn demap(y: &[Complex64], user: &UserConfig, sigma_eff2: &[f64]) -> Result<Vec<f64>> {
    if sigma_eff2.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            actual: sigma_eff2.len(),
        });
    }
    let rot = Complex64::from_polar(1.0, -user.phase);
    let gain = 4.0 * user.power.sqrt();
    y.iter()
        .zip(sigma_eff2)
        .map(|(&v, &var)| {
            if var > 0.0 {
                Ok(gain * (v * rot).re / var)
            } else {
                Err(Error::InvalidParameter(format!("non-positive variance {var}")))
            }
        })
        .collect()
}
