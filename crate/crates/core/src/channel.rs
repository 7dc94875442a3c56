//! Gaussian multiple access channel `y = sum_i sqrt(P_i) x_i + n`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Noise parameters. `sigma2` is the total complex variance `E|n|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    pub sigma2: f64,
    pub seed: u64,
    /// Skip the noise draw; `sigma2` is still what the receiver assumes.
    pub noiseless: bool,
}

/// Channel observation and the noise variance known to the receiver.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub y: Vec<Complex64>,
    pub sigma2: f64,
}

impl ReceivedFrame {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Circularly symmetric complex Gaussian samples with variance `sigma2`.
pub fn complex_noise(len: usize, sigma2: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = (0.5 * sigma2).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(std * re, std * im)
        })
        .collect()
}

/// Superimposes the (already scrambled) user signals with powers `powers`
/// and adds noise drawn deterministically from `cfg.seed`.
pub fn transmit(
    signals: &[Vec<Complex64>],
    powers: &[f64],
    cfg: &ChannelConfig,
) -> Result<ReceivedFrame> {
    if signals.is_empty() {
        return Err(Error::InvalidParameter("no active users".into()));
    }
    if powers.len() != signals.len() {
        return Err(Error::LengthMismatch {
            expected: signals.len(),
            actual: powers.len(),
        });
    }
    if !(cfg.sigma2 > 0.0 && cfg.sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise variance {}", cfg.sigma2)));
    }
    let len = signals[0].len();
    let mut y = if cfg.noiseless {
        vec![Complex64::new(0.0, 0.0); len]
    } else {
        complex_noise(len, cfg.sigma2, cfg.seed)
    };
    for (signal, &p) in signals.iter().zip(powers) {
        if signal.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: signal.len(),
            });
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidParameter(format!("power {p}")));
        }
        let amp = p.sqrt();
        for (acc, &x) in y.iter_mut().zip(signal) {
            *acc += amp * x;
        }
    }
    Ok(ReceivedFrame {
        y,
        sigma2: cfg.sigma2,
    })
}

/// Noise variance for a per-user Eb/N0: `E_b = P / R_u`, `sigma2 = N0`.
pub fn sigma2_from_ebn0(ebn0_db: f64, rate: f64, power: f64) -> Result<f64> {
    if rate.is_nan() || rate <= 0.0 || power.is_nan() || power <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} and power {power} must be positive"
        )));
    }
    let eb = power / rate;
    Ok(eb / 10f64.powf(ebn0_db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn noiseless() -> ChannelConfig {
        ChannelConfig {
            sigma2: 1.0,
            seed: 0,
            noiseless: true,
        }
    }

    #[test]
    fn single_user_noiseless() {
        let x = vec![c(1.0), c(-1.0), Complex64::new(0.0, 1.0)];
        let f = transmit(std::slice::from_ref(&x), &[1.0], &noiseless()).unwrap();
        assert_eq!(f.y, x);
    }

    #[test]
    fn superposition_cancels() {
        let f = transmit(&[vec![c(1.0)], vec![c(-1.0)]], &[1.0, 1.0], &noiseless()).unwrap();
        assert_eq!(f.y, [c(0.0)]);
    }

    #[test]
    fn noise_variance_moment() {
        let n = complex_noise(100_000, 2.5, 11);
        let mean = n.iter().map(|v| v.norm_sqr()).sum::<f64>() / n.len() as f64;
        assert!((mean / 2.5 - 1.0).abs() < 0.02, "{mean}");
        let re = n.iter().map(|v| v.re * v.re).sum::<f64>() / n.len() as f64;
        assert!((re / 1.25 - 1.0).abs() < 0.03, "{re}");
    }

    #[test]
    fn same_seed_same_noise() {
        assert_eq!(complex_noise(64, 1.0, 5), complex_noise(64, 1.0, 5));
        assert_ne!(complex_noise(64, 1.0, 5), complex_noise(64, 1.0, 6));
    }

    #[test]
    fn ebn0_conversion() {
        assert!((sigma2_from_ebn0(0.0, 0.25, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((sigma2_from_ebn0(10.0, 1.0, 1.0).unwrap() - 0.1).abs() < 1e-12);
        assert!(sigma2_from_ebn0(300.0, 1.0, 1.0).unwrap() < 1e-29);
        assert!(sigma2_from_ebn0(0.0, 0.0, 1.0).is_err());
        assert!(sigma2_from_ebn0(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let r = transmit(&[vec![c(1.0)], vec![c(1.0), c(1.0)]], &[1.0, 1.0], &noiseless());
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
        assert!(transmit(&[vec![c(1.0)]], &[1.0, 1.0], &noiseless()).is_err());
    }
}
