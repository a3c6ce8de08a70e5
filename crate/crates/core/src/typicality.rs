//! Typical sets: single-sequence membership, exhaustive enumeration at small
//! block lengths, and joint typicality for memoryless pairs.
//!
//! Membership uses the strict inequality `|-(1/n) log2 P - H| < eps`. Values
//! within [`BOUNDARY_SLACK`] of the boundary count as on it (not typical), so
//! lattice points that sit exactly on the boundary in exact arithmetic are
//! classified the same way regardless of floating-point rounding.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{entropy, joint_entropy, JointPmf};
use crate::sources::{Sequence, SequenceSample, Source};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Strict typicality test on a per-symbol rate.
#[inline]
pub fn within_epsilon(rate: f64, entropy: f64, epsilon: f64) -> bool {
    rate.is_finite() && (rate - entropy).abs() < epsilon - BOUNDARY_SLACK
}

/// Is `seq` in `A_eps^n` of `source`? Zero-probability sequences never are.
pub fn is_typical(seq: &SequenceSample, source: &Source, epsilon: f64) -> bool {
    let n = seq.symbols.len();
    if n == 0 {
        return false;
    }
    within_epsilon(-seq.log2_prob / n as f64, source.entropy_rate(), epsilon)
}

/// Every sequence of length `n` in lexicographic order, with exact log-probabilities.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub n: usize,
    pub alphabet_size: usize,
    /// Indexed by the base-`alphabet_size` code of the sequence.
    pub log2_probs: Vec<f64>,
}

impl Enumeration {
    pub fn new(source: &Source, n: usize, cap: u64) -> Result<Self> {
        let k = source.alphabet_size();
        let size = (k as f64).powi(n as i32);
        if n == 0 || size > cap as f64 {
            return Err(Error::EnumerationTooLarge { size, cap });
        }
        let total = k.pow(n as u32);
        let mut log2_probs = Vec::with_capacity(total);
        // odometer with per-position prefix sums
        let mut digits = vec![0usize; n];
        let mut prefix = vec![0.0f64; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + source.log2_step(if i == 0 { None } else { Some(0) }, 0);
        }
        loop {
            log2_probs.push(prefix[n]);
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(Self {
                        n,
                        alphabet_size: k,
                        log2_probs,
                    });
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < k {
                    break;
                }
                digits[pos] = 0;
            }
            for i in pos..n {
                let prev = if i == 0 { None } else { Some(digits[i - 1]) };
                prefix[i + 1] = prefix[i] + source.log2_step(prev, digits[i]);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.log2_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log2_probs.is_empty()
    }

    pub fn decode(&self, code: u64) -> Sequence {
        decode_sequence(code, self.alphabet_size, self.n)
    }

    pub fn encode(&self, seq: &[usize]) -> u64 {
        encode_sequence(seq, self.alphabet_size)
    }
}

pub fn encode_sequence(seq: &[usize], k: usize) -> u64 {
    seq.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
}

pub fn decode_sequence(mut code: u64, k: usize, n: usize) -> Sequence {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = (code % k as u64) as usize;
        code /= k as u64;
    }
    out
}

/// Exhaustively enumerated typical set.
#[derive(Clone, Debug, Serialize)]
pub struct TypicalSet {
    pub n: usize,
    pub epsilon: f64,
    pub alphabet_size: usize,
    /// Lexicographic sequence codes of the members.
    pub members: Vec<u64>,
    pub member_log2_probs: Vec<f64>,
    pub total_prob: f64,
    pub source_entropy_rate: f64,
}

/// Outcome of checking the three AEP statements on an enumerated set.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AepCheck {
    pub size: u64,
    pub mass: f64,
    /// `2^{-n(H+eps)} <= P(u) <= 2^{-n(H-eps)}` for every member.
    pub member_prob_bounds: bool,
    pub size_upper_bound: f64,
    pub size_lower_bound: f64,
    pub size_upper_ok: bool,
    pub size_lower_ok: bool,
}

impl AepCheck {
    pub fn all_hold(&self) -> bool {
        self.member_prob_bounds && self.size_upper_ok && self.size_lower_ok
    }
}

impl TypicalSet {
    pub fn from_enumeration(e: &Enumeration, h: f64, epsilon: f64) -> Self {
        let n = e.n as f64;
        let mut members = Vec::new();
        let mut member_log2_probs = Vec::new();
        let mut total_prob = 0.0;
        for (code, &lp) in e.log2_probs.iter().enumerate() {
            if within_epsilon(-lp / n, h, epsilon) {
                members.push(code as u64);
                member_log2_probs.push(lp);
                total_prob += lp.exp2();
            }
        }
        Self {
            n: e.n,
            epsilon,
            alphabet_size: e.alphabet_size,
            members,
            member_log2_probs,
            total_prob,
            source_entropy_rate: h,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> Sequence {
        decode_sequence(self.members[i], self.alphabet_size, self.n)
    }

    pub fn check_aep(&self) -> AepCheck {
        let n = self.n as f64;
        let (h, eps) = (self.source_entropy_rate, self.epsilon);
        let lo = -n * (h + eps);
        let hi = -n * (h - eps);
        let member_prob_bounds = self
            .member_log2_probs
            .iter()
            .all(|&lp| lp >= lo - 1e-9 && lp <= hi + 1e-9);
        let size = self.members.len() as u64;
        let size_upper_bound = (n * (h + eps)).exp2();
        let size_lower_bound = (1.0 - eps) * (n * (h - eps)).exp2();
        AepCheck {
            size,
            mass: self.total_prob,
            member_prob_bounds,
            size_upper_bound,
            size_lower_bound,
            size_upper_ok: size as f64 <= size_upper_bound,
            size_lower_ok: size as f64 >= size_lower_bound,
        }
    }
}

/// Full scan of `source^n`. Fails above `cap` sequences.
pub fn enumerate_typical_set(source: &Source, n: usize, epsilon: f64) -> Result<TypicalSet> {
    enumerate_typical_set_capped(source, n, epsilon, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_typical_set_capped(source: &Source, n: usize, epsilon: f64, cap: u64) -> Result<TypicalSet> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let e = Enumeration::new(source, n, cap)?;
    Ok(TypicalSet::from_enumeration(&e, source.entropy_rate(), epsilon))
}

/// Joint law and entropies for joint-typicality tests between memoryless
/// sequences `x^n` (rows) and `y^n` (columns).
#[derive(Clone, Debug)]
pub struct JointTypicalityContext {
    n: usize,
    epsilon: f64,
    joint: JointPmf,
    h_x: f64,
    h_y: f64,
    h_xy: f64,
    cols: usize,
    log2_joint: Vec<f64>,
    log2_x: Vec<f64>,
    log2_y: Vec<f64>,
}

impl JointTypicalityContext {
    pub fn new(joint: JointPmf, n: usize, epsilon: f64) -> Result<Self> {
        Self::with_lengths(joint, n, n, epsilon)
    }

    /// `d` is the length of the column sequence. Only `d == n` is supported:
    /// a joint law on sequences of different lengths needs an explicit
    /// pairing that the memoryless model does not provide.
    pub fn with_lengths(joint: JointPmf, n: usize, d: usize, epsilon: f64) -> Result<Self> {
        if n == 0 || !(epsilon > 0.0) {
            return Err(Error::InvalidParams("need n >= 1 and epsilon > 0".into()));
        }
        if d != n {
            return Err(Error::InvalidParams(format!(
                "joint typicality with d = {d} != n = {n} needs an explicit pairing"
            )));
        }
        let px = joint.row_marginal();
        let py = joint.col_marginal();
        Ok(Self {
            n,
            epsilon,
            h_x: entropy(&px),
            h_y: entropy(&py),
            h_xy: joint_entropy(&joint),
            cols: joint.cols(),
            log2_joint: joint.probs().iter().map(|p| p.log2()).collect(),
            log2_x: px.log2_probs(),
            log2_y: py.log2_probs(),
            joint,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn entropy_x(&self) -> f64 {
        self.h_x
    }

    pub fn entropy_y(&self) -> f64 {
        self.h_y
    }

    pub fn joint_entropy(&self) -> f64 {
        self.h_xy
    }

    pub fn mutual_information(&self) -> f64 {
        (self.h_x + self.h_y - self.h_xy).max(0.0)
    }

    pub fn x_typical(&self, x: &[usize]) -> bool {
        let lp: f64 = x.iter().map(|&a| self.log2_x[a]).sum();
        within_epsilon(-lp / x.len() as f64, self.h_x, self.epsilon)
    }

    pub fn y_typical(&self, y: &[usize]) -> bool {
        let lp: f64 = y.iter().map(|&b| self.log2_y[b]).sum();
        within_epsilon(-lp / y.len() as f64, self.h_y, self.epsilon)
    }

    /// Only the joint condition, without the two marginal ones.
    #[inline]
    pub(crate) fn pair_condition(&self, x: &[usize], y: &[usize]) -> bool {
        let lp: f64 = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| self.log2_joint[a * self.cols + b])
            .sum();
        within_epsilon(-lp / self.n as f64, self.h_xy, self.epsilon)
    }
}

/// All three conditions: `x` typical, `y` typical, and the pair typical
/// under the joint law.
pub fn is_jointly_typical(x: &[usize], y: &[usize], ctx: &JointTypicalityContext) -> bool {
    x.len() == ctx.n && y.len() == ctx.n && ctx.x_typical(x) && ctx.y_typical(y) && ctx.pair_condition(x, y)
}

/// Indices of the candidates `y` jointly typical with `x`; empty whenever
/// `x` itself is not typical.
pub fn conditional_typical_set(x: &[usize], candidates: &[Sequence], ctx: &JointTypicalityContext) -> Vec<usize> {
    if !ctx.x_typical(x) {
        return Vec::new();
    }
    candidates
        .iter()
        .enumerate()
        .filter(|(_, y)| is_jointly_typical(x, y, ctx))
        .map(|(i, _)| i)
        .collect()
}
