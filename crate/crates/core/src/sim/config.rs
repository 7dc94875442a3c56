//! Simulation configuration and its flat `key = value` text format.
//!
//! Recognised keys (the CLI flags use the same names with `-` for `_`):
//!
//! | key | value |
//! |-----|-------|
//! | `users` | number of active users K_a |
//! | `N` | polar code length |
//! | `k` | information bits per user, CRC included |
//! | `rc` | code rate; sets `k = round(rc * N)` when `k` is absent |
//! | `dr` | repetition factor |
//! | `design` | `bhatt`, `5g` or `file:PATH` |
//! | `z0` | Bhattacharyya design erasure probability |
//! | `powers` | comma-separated received powers |
//! | `phases` | `random` or comma-separated angles in radians |
//! | `crc` | `none`, `crc8`, `crc11`, `crc16`, `crc24c` |
//! | `ebn0` | `start:stop:step` or comma-separated dB values |
//! | `trials` | maximum trials per point |
//! | `max_block_errors` | stop a point after this many block errors (0 = never) |
//! | `it_mud`, `it_bp` | outer and inner iterations |
//! | `reset_fg` | `on` / `off` |
//! | `stop` | `gmatrix`, `crc`, `genie`, `none` |
//! | `q` | factor graphs per decode |
//! | `schedule_seed`, `llr_max` | decoder details |
//! | `feedback` | `ext` / `app` |
//! | `variance` | `position`, `frame` or `projected` |
//! | `seed` | master seed |
//! | `noiseless` | `true` / `false` |
//! | `ablate_it_bp_reset`, `ablate_it_bp_persist` | BP iterations of the two ablation variants |
//! | `out` | CSV output path |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::io_error;
use crate::polar::{
    construct_bhattacharyya, info_set_from_order, load_reliability_order, nr_reliability_order,
    CrcSpec, InformationSet, ReliabilityOrder,
};
use crate::receiver::{Feedback, ReceiverConfig, StopRule, VarianceMode};
use crate::{Error, Result};

/// How the information set is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Design {
    Bhattacharyya { z0: f64 },
    /// Vendored 5G NR reliability sequence.
    Nr5g,
    File(PathBuf),
}

impl Design {
    /// Builds a `(k, n)` code and the order it was selected from.
    pub fn build(&self, n: usize, k: usize) -> Result<(InformationSet, ReliabilityOrder)> {
        let order = match self {
            Design::Bhattacharyya { z0 } => return construct_bhattacharyya(n, k, *z0),
            Design::Nr5g => nr_reliability_order(n)?,
            Design::File(path) => load_reliability_order(path, n)?,
        };
        Ok((info_set_from_order(&order, k)?, order))
    }

    fn describe(&self) -> String {
        match self {
            Design::Bhattacharyya { z0 } => format!("bhatt:{z0}"),
            Design::Nr5g => "5g".into(),
            Design::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PhasePolicy {
    /// Uniform in `[0, pi)`, drawn per user and frame.
    Random,
    Fixed(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub users: usize,
    pub code_len: usize,
    /// Information bits per user including CRC bits.
    pub info_len: usize,
    pub repetition: usize,
    pub design: Design,
    pub powers: Vec<f64>,
    pub phases: PhasePolicy,
    pub crc: Option<CrcSpec>,
    pub ebn0_db: Vec<f64>,
    pub max_trials: usize,
    pub max_block_errors: usize,
    pub master_seed: u64,
    pub receiver: ReceiverConfig,
    pub noiseless: bool,
    pub ablate_bp_reset: usize,
    pub ablate_bp_persist: usize,
    pub output: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            users: 2,
            code_len: 512,
            info_len: 128,
            repetition: 1,
            design: Design::Nr5g,
            powers: vec![1.0; 2],
            phases: PhasePolicy::Random,
            crc: None,
            ebn0_db: vec![0.0, 1.0, 2.0, 3.0],
            max_trials: 10_000,
            max_block_errors: 100,
            master_seed: 1,
            receiver: ReceiverConfig::reset(10),
            noiseless: false,
            ablate_bp_reset: 20,
            ablate_bp_persist: 2,
            output: None,
        }
    }
}

fn parse_err(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("bad value {value:?} for key {key}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| parse_err(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(key, value)),
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_ebn0(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    let points = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) =
                (num("ebn0", start)?, num("ebn0", stop)?, num("ebn0", step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(parse_err("ebn0", value));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        [single] => list("ebn0", single)?,
        _ => return Err(parse_err("ebn0", value)),
    };
    if points.is_empty() {
        return Err(parse_err("ebn0", value));
    }
    Ok(points)
}

/// Splits config text into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl SimConfig {
    /// Applies `(key, value)` pairs on top of the defaults, later pairs
    /// overriding earlier ones, and validates the result.
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut cfg = SimConfig::default();
        let mut k = None;
        let mut rc = None;
        let mut powers = None;
        let mut z0 = 0.5;
        let mut design = None;
        for (key, value) in pairs {
            let key = key.as_ref().replace('-', "_");
            let value = value.as_ref().trim();
            match key.as_str() {
                "users" => cfg.users = num(&key, value)?,
                "N" | "n" => cfg.code_len = num(&key, value)?,
                "k" => k = Some(num(&key, value)?),
                "rc" => rc = Some(num::<f64>(&key, value)?),
                "dr" => cfg.repetition = num(&key, value)?,
                "z0" => z0 = num(&key, value)?,
                "design" => design = Some(value.to_string()),
                "powers" => powers = Some(list(&key, value)?),
                "phases" => {
                    cfg.phases = if value.eq_ignore_ascii_case("random") {
                        PhasePolicy::Random
                    } else {
                        PhasePolicy::Fixed(list(&key, value)?)
                    }
                }
                "crc" => {
                    cfg.crc = if value.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(CrcSpec::by_name(value).ok_or_else(|| parse_err(&key, value))?)
                    }
                }
                "ebn0" => cfg.ebn0_db = parse_ebn0(value)?,
                "trials" => cfg.max_trials = num(&key, value)?,
                "max_block_errors" => cfg.max_block_errors = num(&key, value)?,
                "it_mud" => cfg.receiver.outer_iterations = num(&key, value)?,
                "it_bp" => cfg.receiver.bp_iterations = num(&key, value)?,
                "reset_fg" => cfg.receiver.reset_graph = flag(&key, value)?,
                "stop" => {
                    cfg.receiver.stop = match value.to_ascii_lowercase().as_str() {
                        "gmatrix" => StopRule::GMatrix,
                        "crc" => StopRule::Crc,
                        "genie" => StopRule::Genie,
                        "none" => StopRule::None,
                        _ => return Err(parse_err(&key, value)),
                    }
                }
                "q" => cfg.receiver.num_graphs = num(&key, value)?,
                "schedule_seed" => cfg.receiver.schedule_seed = num(&key, value)?,
                "llr_max" => cfg.receiver.llr_max = num(&key, value)?,
                "feedback" => {
                    cfg.receiver.feedback = match value.to_ascii_lowercase().as_str() {
                        "ext" | "extrinsic" => Feedback::Extrinsic,
                        "app" => Feedback::App,
                        _ => return Err(parse_err(&key, value)),
                    }
                }
                "variance" => {
                    cfg.receiver.variance = match value.to_ascii_lowercase().as_str() {
                        "position" => VarianceMode::PerPosition,
                        "frame" => VarianceMode::FrameAverage,
                        "projected" => VarianceMode::Projected,
                        _ => return Err(parse_err(&key, value)),
                    }
                }
                "seed" => cfg.master_seed = num(&key, value)?,
                "noiseless" => cfg.noiseless = flag(&key, value)?,
                "ablate_it_bp_reset" => cfg.ablate_bp_reset = num(&key, value)?,
                "ablate_it_bp_persist" => cfg.ablate_bp_persist = num(&key, value)?,
                "out" => cfg.output = Some(PathBuf::from(value)),
                _ => return Err(Error::InvalidParameter(format!("unknown key {key}"))),
            }
        }
        cfg.design = match design.as_deref() {
            None | Some("5g") => Design::Nr5g,
            Some("bhatt") => Design::Bhattacharyya { z0 },
            Some(other) => match other.strip_prefix("file:") {
                Some(path) => Design::File(PathBuf::from(path)),
                None => return Err(parse_err("design", other)),
            },
        };
        cfg.info_len = match (k, rc) {
            (Some(k), _) => k,
            (None, Some(rc)) => (rc * cfg.code_len as f64).round() as usize,
            (None, None) => cfg.code_len / 4,
        };
        cfg.powers = powers.unwrap_or_else(|| vec![1.0; cfg.users]);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Self::from_pairs(parse_pairs(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.users == 0 {
            return bad("at least one user required".into());
        }
        if self.code_len < 2 || !self.code_len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.code_len));
        }
        if self.info_len == 0 || self.info_len > self.code_len {
            return Err(Error::InfoLengthOutOfRange {
                k: self.info_len,
                n: self.code_len,
            });
        }
        if let Some(crc) = &self.crc {
            if crc.width >= self.info_len {
                return Err(Error::CrcTooWide {
                    width: crc.width,
                    len: self.info_len,
                });
            }
        }
        if self.receiver.stop == StopRule::Crc && self.crc.is_none() {
            return bad("stop = crc needs a crc".into());
        }
        if self.repetition == 0 {
            return bad("repetition factor must be >= 1".into());
        }
        if self.powers.len() != self.users || self.powers.iter().any(|&p| p.is_nan() || p <= 0.0) {
            return bad(format!("need {} positive powers", self.users));
        }
        if let PhasePolicy::Fixed(ph) = &self.phases {
            if ph.len() != self.users || ph.iter().any(|p| !(0.0..std::f64::consts::PI).contains(p)) {
                return bad(format!("need {} phases in [0, pi)", self.users));
            }
        }
        if self.ebn0_db.is_empty() {
            return bad("empty Eb/N0 list".into());
        }
        if self.max_trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.receiver.outer_iterations == 0
            || self.receiver.bp_iterations == 0
            || self.receiver.num_graphs == 0
            || self.ablate_bp_reset == 0
            || self.ablate_bp_persist == 0
        {
            return bad("iteration counts must be >= 1".into());
        }
        Ok(())
    }

    /// Payload bits per user (CRC excluded).
    pub fn payload_len(&self) -> usize {
        self.info_len - self.crc.map_or(0, |c| c.width)
    }

    /// Per-user information rate `payload / (N d_r)`.
    pub fn user_rate(&self) -> f64 {
        self.payload_len() as f64 / (self.code_len * self.repetition) as f64
    }

    /// Sum rate K_a R_u.
    pub fn sum_rate(&self) -> f64 {
        self.users as f64 * self.user_rate()
    }

    /// Everything that influences results, one `key=value` per line.
    pub fn canonical_string(&self) -> String {
        let r = &self.receiver;
        let mut s = String::new();
        let _ = writeln!(s, "users={}", self.users);
        let _ = writeln!(s, "N={}", self.code_len);
        let _ = writeln!(s, "k={}", self.info_len);
        let _ = writeln!(s, "dr={}", self.repetition);
        let _ = writeln!(s, "design={}", self.design.describe());
        let _ = writeln!(s, "powers={:?}", self.powers);
        let _ = writeln!(s, "phases={:?}", self.phases);
        let _ = writeln!(s, "crc={:?}", self.crc);
        let _ = writeln!(s, "ebn0={:?}", self.ebn0_db);
        let _ = writeln!(s, "trials={}", self.max_trials);
        let _ = writeln!(s, "max_block_errors={}", self.max_block_errors);
        let _ = writeln!(s, "seed={}", self.master_seed);
        let _ = writeln!(s, "noiseless={}", self.noiseless);
        let _ = writeln!(s, "receiver={r:?}");
        let _ = writeln!(s, "ebn0_convention=per-user Eb=P/R_u, sigma2=N0");
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_string`].
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical_string().as_bytes())[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
