use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{PhasePolicy, SimConfig};
use super::seed::{derive_seed, Role};
use super::stats::wilson95;
use crate::channel::{self, ChannelConfig};
use crate::error::io_error;
use crate::polar::{crc_attach, InformationSet};
use crate::receiver::{receive, ReceiverConfig};
use crate::user::{Interleaver, UserConfig};
use crate::{Bit, Result};

pub const CSV_HEADER: &str =
    "ebn0_db,trials,block_errors,bler,per_user_block_errors,bit_errors,ber,seed,config_digest";

/// Results of one Eb/N0 point.
#[derive(Clone, Debug, PartialEq)]
pub struct BlerRecord {
    pub ebn0_db: f64,
    pub trials: usize,
    /// Frames in which at least one user failed.
    pub block_errors: usize,
    pub per_user_block_errors: Vec<usize>,
    pub bit_errors: usize,
    /// Information bits checked per trial, summed over users.
    pub bits_per_trial: usize,
    pub seed: u64,
    pub config_digest: String,
    pub elapsed: Duration,
}

impl BlerRecord {
    pub fn bler(&self) -> f64 {
        ratio(self.block_errors, self.trials)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.trials * self.bits_per_trial)
    }

    /// Per-user BLER averaged over users.
    pub fn user_bler(&self) -> f64 {
        let total: usize = self.per_user_block_errors.iter().sum();
        ratio(total, self.trials * self.per_user_block_errors.len())
    }

    /// 95% Wilson interval of [`Self::bler`].
    pub fn bler_interval(&self) -> (f64, f64) {
        wilson95(self.block_errors, self.trials)
    }

    pub fn csv_line(&self) -> String {
        let per_user: Vec<String> = self
            .per_user_block_errors
            .iter()
            .map(|e| e.to_string())
            .collect();
        format!(
            "{},{},{},{:.6e},{},{},{:.6e},{},{}",
            self.ebn0_db,
            self.trials,
            self.block_errors,
            self.bler(),
            per_user.join(";"),
            self.bit_errors,
            self.ber(),
            self.seed,
            self.config_digest
        )
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Outcome of a single frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub user_errors: Vec<bool>,
    pub bit_errors: usize,
}

/// Codes and interleavers shared by every trial of a simulation.
#[derive(Clone, Debug)]
pub struct SimContext {
    pub config: SimConfig,
    pub code: Arc<InformationSet>,
    pub users: Vec<UserConfig>,
}

impl SimContext {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let (code, _) = config.design.build(config.code_len, config.info_len)?;
        let code = Arc::new(code);
        let frame_len = config.code_len * config.repetition;
        let users = (0..config.users)
            .map(|u| {
                let seed = derive_seed(config.master_seed, 0, 0, Role::Interleaver, u as u64);
                let mut user = UserConfig::new(
                    u,
                    config.powers[u],
                    0.0,
                    code.clone(),
                    config.repetition,
                    Arc::new(Interleaver::from_seed(frame_len, seed)),
                )?;
                user.crc = config.crc;
                Ok(user)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            config: config.clone(),
            code,
            users,
        })
    }

    /// Noise variance at `ebn0_db`, referenced to the mean user power.
    pub fn sigma2(&self, ebn0_db: f64) -> Result<f64> {
        let p = self.config.powers.iter().sum::<f64>() / self.config.users as f64;
        channel::sigma2_from_ebn0(ebn0_db, self.config.user_rate(), p)
    }

    /// Simulates one frame. Depends only on `(point, trial)` and the config.
    pub fn run_trial(
        &self,
        point: usize,
        trial: usize,
        sigma2: f64,
        receiver: &ReceiverConfig,
    ) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let (p, t) = (point as u64, trial as u64);
        let mut truths: Vec<Vec<Bit>> = Vec::with_capacity(cfg.users);
        let mut users = self.users.clone();
        let mut signals = Vec::with_capacity(cfg.users);
        for (u, user) in users.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                cfg.master_seed,
                p,
                t,
                Role::Message,
                u as u64,
            ));
            let payload: Vec<Bit> = (0..cfg.payload_len()).map(|_| rng.random_range(0..=1)).collect();
            let info = match &cfg.crc {
                Some(crc) => crc_attach(&payload, crc)?,
                None => payload,
            };
            user.phase = match &cfg.phases {
                PhasePolicy::Fixed(ph) => ph[u],
                PhasePolicy::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        cfg.master_seed,
                        p,
                        t,
                        Role::Phase,
                        u as u64,
                    ));
                    rng.random_range(0.0..std::f64::consts::PI)
                }
            };
            signals.push(user.transmit(&info)?);
            truths.push(info);
        }
        let frame = channel::transmit(
            &signals,
            &cfg.powers,
            &ChannelConfig {
                sigma2,
                seed: derive_seed(cfg.master_seed, p, t, Role::Noise, 0),
                noiseless: cfg.noiseless,
            },
        )?;
        let results = receive(&frame, &users, receiver, Some(&truths))?;
        let mut outcome = TrialOutcome {
            user_errors: Vec::with_capacity(cfg.users),
            bit_errors: 0,
        };
        for (res, truth) in results.iter().zip(&truths) {
            let errs = res
                .info_bits
                .iter()
                .zip(truth)
                .filter(|(a, b)| a != b)
                .count();
            outcome.bit_errors += errs;
            outcome.user_errors.push(errs > 0);
        }
        Ok(outcome)
    }

    /// Runs one Eb/N0 point. Trials are evaluated in parallel batches but
    /// tallied in trial order, so the stopping point is deterministic.
    pub fn run_point(&self, point: usize, receiver: &ReceiverConfig) -> Result<BlerRecord> {
        let cfg = &self.config;
        let start = Instant::now();
        let ebn0_db = cfg.ebn0_db[point];
        let sigma2 = self.sigma2(ebn0_db)?;
        let batch = (rayon::current_num_threads() * 16).max(16);
        let mut rec = BlerRecord {
            ebn0_db,
            trials: 0,
            block_errors: 0,
            per_user_block_errors: vec![0; cfg.users],
            bit_errors: 0,
            bits_per_trial: cfg.users * cfg.info_len,
            seed: cfg.master_seed,
            config_digest: cfg.digest(),
            elapsed: Duration::ZERO,
        };
        let done = |rec: &BlerRecord| {
            rec.trials >= cfg.max_trials
                || (cfg.max_block_errors > 0 && rec.block_errors >= cfg.max_block_errors)
        };
        while !done(&rec) {
            let first = rec.trials;
            let last = (first + batch).min(cfg.max_trials);
            let outcomes: Vec<Result<TrialOutcome>> = (first..last)
                .into_par_iter()
                .map(|t| self.run_trial(point, t, sigma2, receiver))
                .collect();
            for outcome in outcomes {
                if done(&rec) {
                    break;
                }
                let o = outcome?;
                rec.trials += 1;
                rec.bit_errors += o.bit_errors;
                if o.user_errors.iter().any(|&e| e) {
                    rec.block_errors += 1;
                }
                for (acc, &e) in rec.per_user_block_errors.iter_mut().zip(&o.user_errors) {
                    *acc += e as usize;
                }
            }
        }
        rec.elapsed = start.elapsed();
        Ok(rec)
    }

    /// Runs every point, calling `sink` after each one.
    pub fn run_with(
        &self,
        receiver: &ReceiverConfig,
        mut sink: impl FnMut(&BlerRecord) -> Result<()>,
    ) -> Result<Vec<BlerRecord>> {
        let mut out = Vec::with_capacity(self.config.ebn0_db.len());
        for point in 0..self.config.ebn0_db.len() {
            let rec = self.run_point(point, receiver)?;
            sink(&rec)?;
            out.push(rec);
        }
        Ok(out)
    }
}

/// Runs the configured sweep. If `config.output` is set, the CSV is written
/// there and flushed after every point.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<BlerRecord>> {
    let ctx = SimContext::new(config)?;
    match &config.output {
        Some(path) => {
            let mut w = CsvWriter::create(path, CSV_HEADER)?;
            ctx.run_with(&config.receiver, |rec| w.line(&rec.csv_line()))
        }
        None => ctx.run_with(&config.receiver, |_| Ok(())),
    }
}

/// Both variants of the graph-reset ablation over the same frames.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationResult {
    pub reset: Vec<BlerRecord>,
    pub persistent: Vec<BlerRecord>,
}

impl AblationResult {
    pub fn to_csv(&self) -> String {
        let mut s = format!("variant,{CSV_HEADER}\n");
        for (name, recs) in [("reset", &self.reset), ("persistent", &self.persistent)] {
            for r in recs {
                s.push_str(name);
                s.push(',');
                s.push_str(&r.csv_line());
                s.push('\n');
            }
        }
        s
    }
}

/// Compares a fresh graph with `ablate_bp_reset` BP iterations against a
/// persistent graph with `ablate_bp_persist`, everything else equal.
pub fn run_reset_ablation(config: &SimConfig) -> Result<AblationResult> {
    let ctx = SimContext::new(config)?;
    let reset = ReceiverConfig {
        reset_graph: true,
        bp_iterations: config.ablate_bp_reset,
        ..config.receiver.clone()
    };
    let persistent = ReceiverConfig {
        reset_graph: false,
        bp_iterations: config.ablate_bp_persist,
        ..config.receiver.clone()
    };
    let result = AblationResult {
        reset: ctx.run_with(&reset, |_| Ok(()))?,
        persistent: ctx.run_with(&persistent, |_| Ok(()))?,
    };
    if let Some(path) = &config.output {
        std::fs::write(path, result.to_csv()).map_err(io_error(path))?;
    }
    Ok(result)
}

/// Formats records as a complete CSV document.
pub fn to_csv(records: &[BlerRecord]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in records {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    fn create(path: &Path, header: &str) -> Result<Self> {
        let file = File::create(path).map_err(io_error(path))?;
        let mut w = Self {
            out: BufWriter::new(file),
        };
        w.line(header)?;
        Ok(w)
    }

    fn line(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")?;
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig::from_pairs([
            ("users", "2"),
            ("N", "64"),
            ("k", "16"),
            ("design", "bhatt"),
            ("ebn0", "2,6"),
            ("trials", "40"),
            ("max_block_errors", "5"),
            ("it_mud", "3"),
            ("it_bp", "10"),
        ])
        .unwrap()
    }

    #[test]
    fn stops_at_error_budget() {
        let mut cfg = small();
        cfg.ebn0_db = vec![-10.0];
        let rec = run_sweep(&cfg).unwrap();
        assert_eq!(rec[0].block_errors, 5);
        assert_eq!(rec[0].trials, 5);
    }

    #[test]
    fn trial_is_reproducible() {
        let ctx = SimContext::new(&small()).unwrap();
        let s2 = ctx.sigma2(1.0).unwrap();
        let a = ctx.run_trial(0, 3, s2, &ctx.config.receiver).unwrap();
        let b = ctx.run_trial(0, 3, s2, &ctx.config.receiver).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_format() {
        let rec = BlerRecord {
            ebn0_db: 1.5,
            trials: 200,
            block_errors: 3,
            per_user_block_errors: vec![2, 1],
            bit_errors: 9,
            bits_per_trial: 64,
            seed: 7,
            config_digest: "abc".into(),
            elapsed: Duration::from_secs(1),
        };
        assert_eq!(
            rec.csv_line(),
            "1.5,200,3,1.500000e-2,2;1,9,7.031250e-4,7,abc"
        );
        assert!(to_csv(&[rec]).starts_with(CSV_HEADER));
    }

    #[test]
    fn noiseless_sweep_is_error_free() {
        let mut cfg = small();
        cfg.noiseless = true;
        cfg.phases = PhasePolicy::Fixed(vec![0.0, std::f64::consts::FRAC_PI_2]);
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.iter().all(|r| r.block_errors == 0 && r.trials == 40));
    }
}
