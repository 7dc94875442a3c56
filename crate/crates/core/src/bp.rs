//! Belief-propagation decoding on the polar factor graph.
//!
//! The graph has `n = log2(N)` stages between `n + 1` message columns.
//! Column 0 is the information side (frozen priors enter through `R`), column
//! `n` is the channel side (channel LLRs enter through `L`). Stage `j`
//! (1-based) joins columns `j - 1` and `j` with processing elements on pairs
//! `(a, a + 2^(j-1))`, the same butterflies as [`polar_transform`].
//!
//! [`polar_transform`]: crate::polar::polar_transform

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polar::{crc_check, encode, gather, CrcSpec, InformationSet};
use crate::{Bit, Error, Result};

/// Saturation magnitude for all messages unless configured otherwise.
pub const DEFAULT_LLR_MAX: f64 = 100.0;

/// Exact boxplus `ln((1 + e^{x+y}) / (e^x + e^y))`.
///
/// Evaluated as `sign(x) sign(y) min(|x|, |y|) + ln(1 + e^{-|x+y|}) - ln(1 + e^{-|x-y|})`,
/// which never overflows.
#[inline]
pub fn boxplus(x: f64, y: f64) -> f64 {
    let sign = x.signum() * y.signum();
    sign * x.abs().min(y.abs()) + (-(x + y).abs()).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p()
}

#[inline]
fn clamp(v: f64, llr_max: f64) -> f64 {
    v.clamp(-llr_max, llr_max)
}

/// The four outputs of one processing element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeOutputs {
    pub l_out1: f64,
    pub l_out2: f64,
    pub r_out1: f64,
    pub r_out2: f64,
}

/// Updates one PE. Index 1 is the upper (xor) branch, 2 the lower branch; `L`
/// inputs arrive from the channel side, `R` inputs from the information side.
pub fn pe_update(l_in1: f64, l_in2: f64, r_in1: f64, r_in2: f64, llr_max: f64) -> PeOutputs {
    let cross = boxplus(r_in1, l_in1);
    PeOutputs {
        l_out1: clamp(boxplus(l_in1, l_in2 + r_in2), llr_max),
        l_out2: clamp(cross + l_in2, llr_max),
        r_out1: clamp(boxplus(r_in1, l_in2 + r_in2), llr_max),
        r_out2: clamp(cross + r_in2, llr_max),
    }
}

/// Hard decision: bit 0 iff LLR >= 0.
pub fn llr2bit(llrs: &[f64]) -> Vec<Bit> {
    llrs.iter().map(|&l| (l < 0.0) as Bit).collect()
}

/// Order in which the `n` stages are visited during one iteration.
///
/// Holds a permutation of `1..=n`. The L-pass visits stage `n + 1 - s` for
/// each entry `s` in order; the R-pass visits the same stages in reverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule(Vec<usize>);

impl Schedule {
    /// The conventional right-to-left / left-to-right sweep.
    pub fn identity(stages: usize) -> Self {
        Self((1..=stages).collect())
    }

    /// Fisher-Yates shuffle of `1..=n` driven by ChaCha8 seeded with `seed`.
    pub fn permuted(stages: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (1..=stages).collect();
        for i in (1..stages).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        Self(perm)
    }

    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &s in &perm {
            if s == 0 || s > n || std::mem::replace(&mut seen[s - 1], true) {
                return Err(Error::InvalidSchedule(format!(
                    "{perm:?} is not a permutation of 1..={n}"
                )));
            }
        }
        Ok(Self(perm))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn left_pass(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        let n = self.0.len();
        self.0.iter().map(move |&s| n + 1 - s)
    }
}

/// The L and R message matrices of one factor graph instance.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorGraphState {
    info: InformationSet,
    left: Vec<f64>,
    right: Vec<f64>,
    llr_max: f64,
}

impl FactorGraphState {
    /// Fresh graph: channel LLRs in the last L column, `+llr_max` priors on
    /// frozen positions of the first R column, zeros elsewhere.
    pub fn initialize(channel: &[f64], info: &InformationSet, llr_max: f64) -> Result<Self> {
        if !(llr_max > 0.0 && llr_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("llr_max {llr_max}")));
        }
        let n = info.len();
        let cols = info.stages() + 1;
        let mut state = Self {
            info: info.clone(),
            left: vec![0.0; cols * n],
            right: vec![0.0; cols * n],
            llr_max,
        };
        state.set_channel(channel)?;
        for (r, &a) in state.right[..n].iter_mut().zip(info.mask()) {
            if !a {
                *r = llr_max;
            }
        }
        Ok(state)
    }

    /// Overwrites the channel-side L column, leaving all other messages.
    pub fn set_channel(&mut self, channel: &[f64]) -> Result<()> {
        let n = self.len();
        if channel.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: channel.len(),
            });
        }
        if let Some(pos) = channel.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLlr(pos));
        }
        let llr_max = self.llr_max;
        let stages = self.stages();
        for (dst, &v) in self.left[stages * n..].iter_mut().zip(channel) {
            *dst = clamp(v, llr_max);
        }
        Ok(())
    }

    pub fn info(&self) -> &InformationSet {
        &self.info
    }

    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stages(&self) -> usize {
        self.info.stages()
    }

    pub fn llr_max(&self) -> f64 {
        self.llr_max
    }

    /// L messages of column `col` (0 = information side, `n` = channel side).
    pub fn left(&self, col: usize) -> &[f64] {
        let n = self.len();
        &self.left[col * n..(col + 1) * n]
    }

    pub fn right(&self, col: usize) -> &[f64] {
        let n = self.len();
        &self.right[col * n..(col + 1) * n]
    }

    fn column_sum(&self, col: usize) -> Vec<f64> {
        self.left(col)
            .iter()
            .zip(self.right(col))
            .map(|(l, r)| l + r)
            .collect()
    }

    /// Hard decisions on the information positions of column 0.
    pub fn info_estimate(&self) -> Vec<Bit> {
        gather(&llr2bit(&self.column_sum(0)), &self.info)
    }

    /// Hard decisions on the channel-side column.
    pub fn codeword_estimate(&self) -> Vec<Bit> {
        llr2bit(&self.column_sum(self.stages()))
    }

    /// Code-constraint message towards the channel, `R(n+1, :)`.
    pub fn extrinsic(&self) -> Vec<f64> {
        self.right(self.stages()).to_vec()
    }

    /// Total channel-side belief `L(n+1, :) + R(n+1, :)`.
    pub fn posterior(&self) -> Vec<f64> {
        self.column_sum(self.stages())
    }

    fn max_abs(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn left_stage(&mut self, stage: usize) {
        let n = self.len();
        let span = 1 << (stage - 1);
        let llr_max = self.llr_max;
        let (lo, hi) = self.left.split_at_mut(stage * n);
        let l_out = &mut lo[(stage - 1) * n..];
        let l_in = &hi[..n];
        let r_in = &self.right[(stage - 1) * n..stage * n];
        for block in (0..n).step_by(2 * span) {
            for a in block..block + span {
                let b = a + span;
                let (l1, l2, r1, r2) = (l_in[a], l_in[b], r_in[a], r_in[b]);
                l_out[a] = clamp(boxplus(l1, l2 + r2), llr_max);
                l_out[b] = clamp(boxplus(r1, l1) + l2, llr_max);
            }
        }
    }

    fn right_stage(&mut self, stage: usize) {
        let n = self.len();
        let span = 1 << (stage - 1);
        let llr_max = self.llr_max;
        let (lo, hi) = self.right.split_at_mut(stage * n);
        let r_in = &lo[(stage - 1) * n..];
        let r_out = &mut hi[..n];
        let l_in = &self.left[stage * n..(stage + 1) * n];
        for block in (0..n).step_by(2 * span) {
            for a in block..block + span {
                let b = a + span;
                let (l1, l2, r1, r2) = (l_in[a], l_in[b], r_in[a], r_in[b]);
                r_out[a] = clamp(boxplus(r1, l2 + r2), llr_max);
                r_out[b] = clamp(boxplus(r1, l1) + r2, llr_max);
            }
        }
    }
}

/// One full L-pass followed by one full R-pass in the given stage order.
pub fn one_iteration(state: &mut FactorGraphState, schedule: &Schedule) -> Result<()> {
    if schedule.len() != state.stages() {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} stages, graph has {}",
            schedule.len(),
            state.stages()
        )));
    }
    for stage in schedule.left_pass() {
        state.left_stage(stage);
    }
    for stage in schedule.left_pass().rev() {
        state.right_stage(stage);
    }
    debug_assert!(state.max_abs() <= state.llr_max);
    Ok(())
}

/// When the iterations of one graph may terminate early.
#[derive(Clone, Debug, PartialEq)]
pub enum StopCriterion {
    /// Re-encoded information estimate equals the codeword estimate.
    GMatrix,
    /// Information estimate passes the CRC.
    Crc(CrcSpec),
    /// Information estimate equals the transmitted bits (simulation only).
    Genie(Vec<Bit>),
    None,
}

/// Evaluates `criterion` on the current hard decisions of `state`.
pub fn check_stop(state: &FactorGraphState, criterion: &StopCriterion) -> Result<bool> {
    match criterion {
        StopCriterion::GMatrix => {
            let u_hat = state.info_estimate();
            Ok(encode(&u_hat, state.info())? == state.codeword_estimate())
        }
        StopCriterion::Crc(spec) => crc_check(&state.info_estimate(), spec),
        StopCriterion::Genie(truth) => {
            if truth.len() != state.info().k() {
                return Err(Error::LengthMismatch {
                    expected: state.info().k(),
                    actual: truth.len(),
                });
            }
            Ok(state.info_estimate() == *truth)
        }
        StopCriterion::None => Ok(false),
    }
}

/// Parameters of the multi-trellis decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    /// Iterations per factor graph (I).
    pub max_iters: usize,
    /// Number of factor graphs tried (q). Graph 1 uses the identity schedule.
    pub num_graphs: usize,
    /// Graph `g >= 2` uses `Schedule::permuted(n, schedule_seed + g)`.
    pub schedule_seed: u64,
    pub stop: StopCriterion,
    pub llr_max: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            num_graphs: 1,
            schedule_seed: 0,
            stop: StopCriterion::GMatrix,
            llr_max: DEFAULT_LLR_MAX,
        }
    }
}

impl DecoderConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.num_graphs == 0 {
            return Err(Error::InvalidParameter(
                "decoder needs at least one graph and one iteration".into(),
            ));
        }
        Ok(())
    }

    /// Stage schedule of graph `graph` (1-based).
    pub fn schedule(&self, stages: usize, graph: usize) -> Schedule {
        if graph <= 1 {
            Schedule::identity(stages)
        } else {
            Schedule::permuted(stages, self.schedule_seed.wrapping_add(graph as u64))
        }
    }
}

/// Outcome of a decode.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Estimated information bits (length k).
    pub info_bits: Vec<Bit>,
    /// Estimated codeword (length N).
    pub codeword: Vec<Bit>,
    pub stopped_early: bool,
    pub graphs_used: usize,
    pub iters_used: usize,
    /// `R(n+1, :)`, the decoder's extrinsic LLRs on the code bits.
    pub extrinsic: Vec<f64>,
    /// `L(n+1, :) + R(n+1, :)`.
    pub posterior: Vec<f64>,
}

impl DecodeResult {
    fn from_state(state: &FactorGraphState, stopped_early: bool, graphs: usize, iters: usize) -> Self {
        Self {
            info_bits: state.info_estimate(),
            codeword: state.codeword_estimate(),
            stopped_early,
            graphs_used: graphs,
            iters_used: iters,
            extrinsic: state.extrinsic(),
            posterior: state.posterior(),
        }
    }
}

/// One row of a decoder trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub graph: usize,
    pub iteration: usize,
    pub info_bits: Vec<Bit>,
    pub stop: bool,
}

/// Multi-trellis BP: up to `num_graphs` freshly initialised graphs, each run
/// for up to `max_iters` iterations with a stop check after every iteration.
pub fn decode(channel: &[f64], info: &InformationSet, config: &DecoderConfig) -> Result<DecodeResult> {
    decode_inner(channel, info, config, None)
}

/// [`decode`] that also records every iteration's hard decisions.
pub fn decode_traced(
    channel: &[f64],
    info: &InformationSet,
    config: &DecoderConfig,
    trace: &mut Vec<TraceRow>,
) -> Result<DecodeResult> {
    decode_inner(channel, info, config, Some(trace))
}

fn decode_inner(
    channel: &[f64],
    info: &InformationSet,
    config: &DecoderConfig,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<DecodeResult> {
    config.validate()?;
    let mut iters = 0;
    let mut last = None;
    for graph in 1..=config.num_graphs {
        let mut state = FactorGraphState::initialize(channel, info, config.llr_max)?;
        let schedule = config.schedule(info.stages(), graph);
        for iteration in 1..=config.max_iters {
            one_iteration(&mut state, &schedule)?;
            iters += 1;
            let stop = check_stop(&state, &config.stop)?;
            if let Some(rows) = trace.as_deref_mut() {
                rows.push(TraceRow {
                    graph,
                    iteration,
                    info_bits: state.info_estimate(),
                    stop,
                });
            }
            if stop {
                return Ok(DecodeResult::from_state(&state, true, graph, iters));
            }
        }
        last = Some(state);
    }
    let state = last.expect("at least one graph");
    Ok(DecodeResult::from_state(&state, false, config.num_graphs, iters))
}

/// Continues decoding on an existing graph: replaces only the channel column
/// with `channel` and runs up to `iters` identity-schedule iterations.
pub fn decode_warm(
    state: &mut FactorGraphState,
    channel: &[f64],
    iters: usize,
    stop: &StopCriterion,
) -> Result<DecodeResult> {
    state.set_channel(channel)?;
    let schedule = Schedule::identity(state.stages());
    for done in 1..=iters {
        one_iteration(state, &schedule)?;
        if check_stop(state, stop)? {
            return Ok(DecodeResult::from_state(state, true, 1, done));
        }
    }
    Ok(DecodeResult::from_state(state, false, 1, iters))
}

/// Writes a trace as CSV: `graph,iteration,stop,info_bits`.
pub fn write_trace_csv(rows: &[TraceRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "graph,iteration,stop,info_bits")?;
    for row in rows {
        let bits: String = row.info_bits.iter().map(|b| char::from(b'0' + b)).collect();
        writeln!(out, "{},{},{},{}", row.graph, row.iteration, row.stop as u8, bits)?;
    }
    Ok(())
}
