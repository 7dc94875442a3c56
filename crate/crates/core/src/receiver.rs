//! Iterative multi-user receiver: soft interference cancellation, per-user
//! demapping, deinterleaving and repetition combining, BP decoding, and
//! re-modulated soft feedback, repeated for a number of outer iterations.
//!
//! Users are updated in parallel: every user cancels against the feedback
//! of the previous outer iteration.

use num_complex::Complex64;

use crate::bp::{self, DecodeResult, DecoderConfig, FactorGraphState, StopCriterion};
use crate::channel::ReceivedFrame;
use crate::user::{demap, repeat_combine, soft_symbol, UserConfig};
use crate::{Bit, Error, Result};

/// What the decoder feeds back to the detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feedback {
    /// Extrinsic LLRs `R(n+1, :)` (plus the other repetition copies).
    Extrinsic,
    /// Full a-posteriori LLRs `L(n+1, :) + R(n+1, :)`.
    App,
}

/// How residual interference variance is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarianceMode {
    PerPosition,
    FrameAverage,
    /// Per position, counting only the interference component in phase with
    /// the target: `2 P_i (1 - mean_i^2) cos^2(phi_i - phi_j)`.
    Projected,
}

/// Stopping rule applied to every user's decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopRule {
    GMatrix,
    /// Uses each user's [`UserConfig::crc`].
    Crc,
    /// Needs the transmitted bits passed to [`receive`].
    Genie,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverConfig {
    /// Outer detector/decoder iterations.
    pub outer_iterations: usize,
    /// BP iterations per outer iteration.
    pub bp_iterations: usize,
    /// Start every user's decode from a fresh graph.
    pub reset_graph: bool,
    pub stop: StopRule,
    pub feedback: Feedback,
    pub variance: VarianceMode,
    /// Factor graphs per decode when `reset_graph` is set.
    pub num_graphs: usize,
    pub schedule_seed: u64,
    pub llr_max: f64,
}

impl ReceiverConfig {
    /// Fresh graph per outer iteration with 20 BP iterations.
    pub fn reset(outer_iterations: usize) -> Self {
        Self {
            outer_iterations,
            bp_iterations: 20,
            reset_graph: true,
            stop: StopRule::GMatrix,
            feedback: Feedback::Extrinsic,
            variance: VarianceMode::PerPosition,
            num_graphs: 1,
            schedule_seed: 0,
            llr_max: bp::DEFAULT_LLR_MAX,
        }
    }

    /// Persistent graph memory with 2 BP iterations per outer iteration.
    pub fn persistent(outer_iterations: usize) -> Self {
        Self {
            bp_iterations: 2,
            reset_graph: false,
            ..Self::reset(outer_iterations)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.outer_iterations == 0 || self.bp_iterations == 0 || self.num_graphs == 0 {
            return Err(Error::InvalidParameter(
                "receiver iteration counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Receiver-side state of one user.
#[derive(Clone, Debug)]
pub struct UserState {
    graph: Option<FactorGraphState>,
    /// Feedback LLRs on the channel bits, channel order.
    feedback: Vec<f64>,
    /// `tanh(feedback / 2)`.
    mean: Vec<f64>,
    /// `sqrt(P) e^{j phi} mean`.
    soft: Vec<Complex64>,
    stopped: bool,
    result: Option<DecodeResult>,
}

impl UserState {
    /// No feedback yet: all soft symbols zero.
    pub fn new(user: &UserConfig) -> Self {
        let len = user.frame_len();
        Self {
            graph: None,
            feedback: vec![0.0; len],
            mean: vec![0.0; len],
            soft: vec![Complex64::new(0.0, 0.0); len],
            stopped: false,
            result: None,
        }
    }

    /// Installs feedback LLRs (channel order) and re-modulates them.
    pub fn set_feedback(&mut self, user: &UserConfig, llrs: &[f64]) -> Result<()> {
        if llrs.len() != self.feedback.len() {
            return Err(Error::LengthMismatch {
                expected: self.feedback.len(),
                actual: llrs.len(),
            });
        }
        let rot = Complex64::from_polar(user.power.sqrt(), user.phase);
        for (i, &l) in llrs.iter().enumerate() {
            let m = soft_symbol(l);
            self.feedback[i] = l;
            self.mean[i] = m;
            self.soft[i] = rot * m;
        }
        Ok(())
    }

    /// Saturated feedback for a known codeword (before repetition).
    pub fn set_hard_feedback(&mut self, user: &UserConfig, codeword: &[Bit], llr_max: f64) -> Result<()> {
        let bits = user.channel_bits(codeword)?;
        let llrs: Vec<f64> = bits
            .iter()
            .map(|&b| if b == 0 { llr_max } else { -llr_max })
            .collect();
        self.set_feedback(user, &llrs)
    }

    pub fn feedback(&self) -> &[f64] {
        &self.feedback
    }

    pub fn soft_symbols(&self) -> &[Complex64] {
        &self.soft
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn result(&self) -> Option<&DecodeResult> {
        self.result.as_ref()
    }

    pub fn graph(&self) -> Option<&FactorGraphState> {
        self.graph.as_ref()
    }
}

/// `y_j = y - sum_{i != j} sqrt(P_i) e^{j phi_i} tanh(L_i / 2)`.
pub fn cancel(frame: &ReceivedFrame, states: &[UserState], target: usize) -> Result<Vec<Complex64>> {
    if target >= states.len() {
        return Err(Error::InvalidParameter(format!("unknown user {target}")));
    }
    let mut y = frame.y.clone();
    for (i, state) in states.iter().enumerate() {
        if i == target {
            continue;
        }
        if state.soft.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: y.len(),
                actual: state.soft.len(),
            });
        }
        for (acc, &s) in y.iter_mut().zip(&state.soft) {
            *acc -= s;
        }
    }
    Ok(y)
}

/// Noise plus residual interference variance seen by `target`:
/// `sigma2 + sum_{i != j} P_i (1 - mean_i^2)`, per position or frame-averaged.
pub fn effective_variance(
    states: &[UserState],
    users: &[UserConfig],
    target: usize,
    sigma2: f64,
    mode: VarianceMode,
) -> Result<Vec<f64>> {
    if target >= states.len() || users.len() != states.len() {
        return Err(Error::InvalidParameter(format!("unknown user {target}")));
    }
    let len = states[target].mean.len();
    let mut var = vec![sigma2; len];
    for (i, (state, user)) in states.iter().zip(users).enumerate() {
        if i == target {
            continue;
        }
        let weight = match mode {
            VarianceMode::Projected => {
                let c = (user.phase - users[target].phase).cos();
                2.0 * user.power * c * c
            }
            _ => user.power,
        };
        for (v, &m) in var.iter_mut().zip(&state.mean) {
            *v += weight * (1.0 - m * m);
        }
    }
    if mode == VarianceMode::FrameAverage {
        let avg = var.iter().sum::<f64>() / len as f64;
        var.fill(avg);
    }
    Ok(var)
}

/// Detector output for one user.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    /// Demapped LLRs after deinterleaving, `N d_r` values in repetition layout.
    pub per_copy: Vec<f64>,
    /// Repetition-combined LLRs, the decoder's channel input (length N).
    pub combined: Vec<f64>,
}

/// Cancel, demap, deinterleave and combine for user `target`.
pub fn detect(
    frame: &ReceivedFrame,
    users: &[UserConfig],
    states: &[UserState],
    target: usize,
    mode: VarianceMode,
) -> Result<Detection> {
    let y = cancel(frame, states, target)?;
    let var = effective_variance(states, users, target, frame.sigma2, mode)?;
    let user = &users[target];
    let llrs = demap(&y, user, &var)?;
    let per_copy = user.interleaver.deinterleave(&llrs)?;
    let combined = repeat_combine(&per_copy, user.repetition)?;
    Ok(Detection { per_copy, combined })
}

fn stop_criterion(rule: StopRule, user: &UserConfig, truth: Option<&Vec<Bit>>) -> Result<StopCriterion> {
    Ok(match rule {
        StopRule::GMatrix => StopCriterion::GMatrix,
        StopRule::None => StopCriterion::None,
        StopRule::Crc => StopCriterion::Crc(user.crc.ok_or_else(|| {
            Error::InvalidParameter(format!("user {} has no CRC", user.user_id))
        })?),
        StopRule::Genie => StopCriterion::Genie(
            truth
                .ok_or_else(|| Error::InvalidParameter("genie stop needs transmitted bits".into()))?
                .clone(),
        ),
    })
}

/// Runs the full iterative receiver and returns one result per user.
///
/// `truth` holds each user's transmitted information bits and is only read by
/// [`StopRule::Genie`]. A user whose stop rule fires is frozen: its decision
/// is final and its feedback becomes the saturated re-encoded codeword.
pub fn receive(
    frame: &ReceivedFrame,
    users: &[UserConfig],
    cfg: &ReceiverConfig,
    truth: Option<&[Vec<Bit>]>,
) -> Result<Vec<DecodeResult>> {
    cfg.validate()?;
    if users.is_empty() {
        return Err(Error::InvalidParameter("no users".into()));
    }
    if let Some(t) = truth {
        if t.len() != users.len() {
            return Err(Error::LengthMismatch {
                expected: users.len(),
                actual: t.len(),
            });
        }
    }
    for user in users {
        user.validate()?;
        if user.frame_len() != frame.len() {
            return Err(Error::LengthMismatch {
                expected: frame.len(),
                actual: user.frame_len(),
            });
        }
    }
    let criteria = users
        .iter()
        .enumerate()
        .map(|(j, u)| stop_criterion(cfg.stop, u, truth.map(|t| &t[j])))
        .collect::<Result<Vec<_>>>()?;

    let mut states: Vec<UserState> = users.iter().map(UserState::new).collect();
    for _ in 0..cfg.outer_iterations {
        if states.iter().all(|s| s.stopped) {
            break;
        }
        let detections = (0..users.len())
            .map(|j| {
                if states[j].stopped {
                    Ok(None)
                } else {
                    detect(frame, users, &states, j, cfg.variance).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;

        for (j, det) in detections.into_iter().enumerate() {
            let Some(det) = det else { continue };
            let user = &users[j];
            let state = &mut states[j];
            let result = if cfg.reset_graph {
                let dcfg = DecoderConfig {
                    max_iters: cfg.bp_iterations,
                    num_graphs: cfg.num_graphs,
                    schedule_seed: cfg.schedule_seed,
                    stop: criteria[j].clone(),
                    llr_max: cfg.llr_max,
                };
                bp::decode(&det.combined, &user.code, &dcfg)?
            } else {
                let graph = match state.graph.take() {
                    Some(g) => g,
                    None => FactorGraphState::initialize(&det.combined, &user.code, cfg.llr_max)?,
                };
                let graph = state.graph.insert(graph);
                bp::decode_warm(graph, &det.combined, cfg.bp_iterations, &criteria[j])?
            };

            if result.stopped_early {
                state.stopped = true;
                state.set_hard_feedback(user, &result.codeword, cfg.llr_max)?;
            } else {
                let n = user.code.len();
                let fb: Vec<f64> = det
                    .per_copy
                    .iter()
                    .enumerate()
                    .map(|(idx, &own)| {
                        let i = idx % n;
                        match cfg.feedback {
                            Feedback::Extrinsic => result.extrinsic[i] + det.combined[i] - own,
                            Feedback::App => result.posterior[i],
                        }
                    })
                    .collect();
                let fb = user.interleaver.interleave(&fb)?;
                state.set_feedback(user, &fb)?;
            }
            state.result = Some(result);
        }
    }
    Ok(states
        .into_iter()
        .map(|s| s.result.expect("every user decoded at least once"))
        .collect())
}
