//! Discrete memoryless channels, their simulation, and capacity by
//! Blahut-Arimoto alternating maximization.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::prob::{self, normalize_probs, Alphabet, JointPmf, Pmf};
use crate::rng::{self, tag};

pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Gaussian tails beyond this many noise standard deviations are dropped.
pub const AWGN_TAIL_SD: f64 = 6.0;

/// Row-stochastic transition matrix `P(y | x)`.
#[derive(Clone, Debug)]
pub struct DiscreteChannel {
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
    transition: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(input_alphabet: Alphabet, output_alphabet: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input_alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: input_alphabet.size(),
                found: rows.len(),
            });
        }
        let cols = output_alphabet.size();
        let mut transition = Vec::with_capacity(rows.len() * cols);
        let mut row_cdfs = Vec::with_capacity(rows.len());
        for (i, mut row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            normalize_probs(&mut row, &format!("channel row {i}"))?;
            row_cdfs.push(Pmf::from_probs(row.clone())?.cdf());
            transition.extend(row);
        }
        Ok(Self {
            input_alphabet,
            output_alphabet,
            transition,
            row_cdfs,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidAlphabet("channel matrix must not be empty".into()));
        }
        Self::new(Alphabet::indexed(r), Alphabet::indexed(c), rows)
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!("crossover {p} outside [0, 1]")));
        }
        Self::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn identity(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParams("identity channel needs at least one symbol".into()));
        }
        Self::from_rows((0..size).map(|i| (0..size).map(|j| f64::from(u8::from(i == j))).collect()).collect())
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output_alphabet
    }

    pub fn inputs(&self) -> usize {
        self.input_alphabet.size()
    }

    pub fn outputs(&self) -> usize {
        self.output_alphabet.size()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.transition[x * self.outputs() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let c = self.outputs();
        &self.transition[x * c..(x + 1) * c]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inputs()).map(|x| self.row(x).to_vec()).collect()
    }

    /// Induced joint law `P_X(x) P(y|x)`.
    pub fn joint(&self, input: &Pmf) -> Result<JointPmf> {
        if input.len() != self.inputs() {
            return Err(Error::AlphabetMismatch(format!(
                "input pmf has {} symbols, channel has {} inputs",
                input.len(),
                self.inputs()
            )));
        }
        let c = self.outputs();
        let probs = (0..self.inputs())
            .flat_map(|x| self.transition[x * c..(x + 1) * c].iter().map(move |&p| input.prob(x) * p))
            .collect();
        Ok(JointPmf::from_parts_unchecked(
            input.alphabet().clone(),
            self.output_alphabet.clone(),
            probs,
        ))
    }

    /// Output law for the given input law.
    pub fn output_pmf(&self, input: &Pmf) -> Result<Pmf> {
        Ok(self.joint(input)?.col_marginal())
    }

    pub(crate) fn transmit_into(&self, rng: &mut impl RngCore, x: &[usize], y: &mut [usize]) {
        for (xi, yi) in x.iter().zip(y.iter_mut()) {
            *yi = rng::categorical(rng, &self.row_cdfs[*xi]);
        }
    }

    pub fn transmit_with(&self, rng: &mut impl RngCore, x: &[usize]) -> Vec<usize> {
        let mut y = vec![0; x.len()];
        self.transmit_into(rng, x, &mut y);
        y
    }

    /// Passes `x` through the channel symbol by symbol, deterministic in `seed`.
    pub fn transmit(&self, x: &[usize], seed: u64) -> Result<Vec<usize>> {
        if let Some(&bad) = x.iter().find(|&&s| s >= self.inputs()) {
            return Err(Error::AlphabetMismatch(format!("input symbol {bad} outside channel input alphabet")));
        }
        Ok(self.transmit_with(&mut rng::stream(seed, tag::CHANNEL, 0), x))
    }
}

/// `I(X; Y)` for input law `input` through `channel`.
pub fn channel_mutual_information(input: &Pmf, channel: &DiscreteChannel) -> Result<f64> {
    Ok(prob::mutual_information(&channel.joint(input)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub optimal_input: Vec<f64>,
    pub iterations: usize,
    /// Gap between the upper and lower capacity bounds at termination.
    pub residual: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Per-input `sum_y P(y|x) log2 (P(y|x) / q(y))`.
fn information_density(channel: &DiscreteChannel, neg_cond_entropy: &[f64], q: &[f64], out: &mut [f64]) {
    let log_q: Vec<f64> = q.iter().map(|&v| if v > 0.0 { v.log2() } else { 0.0 }).collect();
    for (x, d) in out.iter_mut().enumerate() {
        let cross: f64 = channel
            .row(x)
            .iter()
            .zip(&log_q)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &lq)| p * lq)
            .sum();
        *d = neg_cond_entropy[x] - cross;
    }
}

fn output_law(channel: &DiscreteChannel, r: &[f64], q: &mut [f64]) {
    q.fill(0.0);
    for (x, &rx) in r.iter().enumerate() {
        if rx > 0.0 {
            for (qy, &p) in q.iter_mut().zip(channel.row(x)) {
                *qy += rx * p;
            }
        }
    }
}

/// Lagrangian Blahut-Arimoto run at a fixed cost multiplier.
struct BaRun {
    input: Vec<f64>,
    lower: f64,
    upper: f64,
    iterations: usize,
    converged: bool,
}

fn blahut_arimoto_penalized(
    channel: &DiscreteChannel,
    cost: Option<&[f64]>,
    multiplier: f64,
    tol: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> BaRun {
    let nx = channel.inputs();
    let neg_cond_entropy: Vec<f64> = (0..nx)
        .map(|x| channel.row(x).iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum())
        .collect();
    let mut r = start.map_or_else(|| vec![1.0 / nx as f64; nx], <[f64]>::to_vec);
    let mut q = vec![0.0; channel.outputs()];
    let mut d = vec![0.0; nx];
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for it in 1..=max_iter {
        output_law(channel, &r, &mut q);
        information_density(channel, &neg_cond_entropy, &q, &mut d);
        if let Some(s) = cost {
            for (dx, sx) in d.iter_mut().zip(s) {
                *dx -= multiplier * sx;
            }
        }
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // c(x) = 2^{d(x)}, scaled by 2^{-dmax} for stability
        let c: Vec<f64> = d.iter().map(|&v| (v - dmax).exp2()).collect();
        let z: f64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
        lower = z.log2() + dmax;
        upper = dmax;
        if upper - lower <= tol {
            return BaRun {
                input: r,
                lower,
                upper,
                iterations: it,
                converged: true,
            };
        }
        for (rx, cx) in r.iter_mut().zip(&c) {
            *rx *= cx / z;
        }
    }
    BaRun {
        input: r,
        lower,
        upper,
        iterations: max_iter,
        converged: false,
    }
}

/// Capacity `max_{P_X} I(X;Y)`. Terminates when the Blahut-Arimoto upper
/// and lower bounds are within `tol`; otherwise returns
/// [`Error::CapacityNotConverged`] carrying the best bracket found.
pub fn blahut_arimoto_capacity(channel: &DiscreteChannel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParams("tol must be positive and max_iter nonzero".into()));
    }
    let run = blahut_arimoto_penalized(channel, None, 0.0, tol, max_iter, None);
    let input = Pmf::new(channel.input_alphabet.clone(), run.input.clone())?;
    let result = CapacityResult {
        capacity_bits: channel_mutual_information(&input, channel)?.clamp(run.lower.max(0.0), run.upper.max(0.0)),
        optimal_input: input.probs().to_vec(),
        iterations: run.iterations,
        residual: run.upper - run.lower,
        lower_bound: run.lower,
        upper_bound: run.upper,
    };
    if run.converged {
        Ok(result)
    } else {
        Err(Error::CapacityNotConverged(Box::new(result)))
    }
}

/// Cost-constrained capacity `max I(X;Y)` subject to `E s(X) <= budget`,
/// where `s(x) = sum_y P(y|x) s(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostCapacityResult {
    pub capacity_bits: f64,
    pub optimal_input: Vec<f64>,
    pub multiplier: f64,
    pub expected_cost: f64,
    pub budget: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Cost matrix `s(x, y)`; identically zero by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostFunction {
    pub rows: Vec<Vec<f64>>,
}

impl CostFunction {
    pub fn zero(channel: &DiscreteChannel) -> Self {
        Self {
            rows: vec![vec![0.0; channel.outputs()]; channel.inputs()],
        }
    }

    /// Cost depending on the input only.
    pub fn per_input(channel: &DiscreteChannel, cost: &[f64]) -> Self {
        Self {
            rows: cost.iter().map(|&c| vec![c; channel.outputs()]).collect(),
        }
    }

    fn expected_per_input(&self, channel: &DiscreteChannel) -> Result<Vec<f64>> {
        if self.rows.len() != channel.inputs() || self.rows.iter().any(|r| r.len() != channel.outputs()) {
            return Err(Error::DimensionMismatch {
                expected: channel.inputs() * channel.outputs(),
                found: self.rows.iter().map(Vec::len).sum(),
            });
        }
        Ok((0..channel.inputs())
            .map(|x| channel.row(x).iter().zip(&self.rows[x]).map(|(p, s)| p * s).sum())
            .collect())
    }
}

pub fn blahut_arimoto_capacity_with_cost(
    channel: &DiscreteChannel,
    cost: &CostFunction,
    budget: f64,
    tol: f64,
    max_iter: usize,
) -> Result<CostCapacityResult> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParams("tol must be positive and max_iter nonzero".into()));
    }
    let s = cost.expected_per_input(channel)?;
    let min_cost = s.iter().copied().fold(f64::INFINITY, f64::min);
    if !(budget >= min_cost - 1e-12) {
        return Err(Error::InvalidParams(format!(
            "budget {budget} below the cheapest input cost {min_cost}"
        )));
    }
    let nx = channel.inputs();
    let neg_cond_entropy: Vec<f64> = (0..nx)
        .map(|x| channel.row(x).iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum())
        .collect();
    let mut r = vec![1.0 / nx as f64; nx];
    let mut q = vec![0.0; channel.outputs()];
    let mut d = vec![0.0; nx];
    let mut next = vec![0.0; nx];
    let mut feasible = r.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() <= budget;
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for it in 1..=max_iter {
        output_law(channel, &r, &mut q);
        information_density(channel, &neg_cond_entropy, &q, &mut d);
        let multiplier = constrained_update(&r, &d, &s, budget, &mut next);
        upper = dual_bound(&d, &s, budget, multiplier);
        if feasible {
            lower = r.iter().zip(&d).filter(|(&a, _)| a > 0.0).map(|(a, b)| a * b).sum();
            if upper - lower <= tol {
                let input = Pmf::new(channel.input_alphabet.clone(), r.clone())?;
                return Ok(CostCapacityResult {
                    capacity_bits: channel_mutual_information(&input, channel)?,
                    expected_cost: r.iter().zip(&s).map(|(a, b)| a * b).sum(),
                    optimal_input: r,
                    multiplier,
                    budget,
                    iterations: it,
                    residual: upper - lower,
                });
            }
        }
        std::mem::swap(&mut r, &mut next);
        feasible = true;
    }
    Err(Error::NotConverged {
        what: "cost-constrained Blahut-Arimoto",
        iterations: max_iter,
        residual: upper - lower,
    })
}

/// Weak duality: for any output law and `l >= 0`,
/// `C(budget) <= max_x [D(W_x || q) - l s(x)] + l budget`. The right side is
/// convex in `l`; it is minimized near the step's multiplier.
fn dual_bound(d: &[f64], s: &[f64], budget: f64, hint: f64) -> f64 {
    let at = |l: f64| {
        d.iter().zip(s).map(|(dx, sx)| dx - l * sx).fold(f64::NEG_INFINITY, f64::max) + l * budget
    };
    if !hint.is_finite() {
        return d.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(at(0.0));
    }
    let (mut lo, mut hi) = (0.0, 2.0 * hint + 1.0);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) <= at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi)).min(at(hint)).min(at(0.0))
}

/// One constrained step: `out ∝ r 2^{d - l s}` with the smallest `l >= 0`
/// whose expected cost is within budget. Returns `l`.
fn constrained_update(r: &[f64], d: &[f64], s: &[f64], budget: f64, out: &mut [f64]) -> f64 {
    let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let weigh = |l: f64, out: &mut [f64]| -> f64 {
        let mut z = 0.0;
        let mut c = 0.0;
        for x in 0..r.len() {
            let w = if r[x] > 0.0 { r[x] * (d[x] - dmax - l * (s[x] - smin)).exp2() } else { 0.0 };
            out[x] = w;
            z += w;
            c += w * s[x];
        }
        out.iter_mut().for_each(|w| *w /= z);
        c / z
    };
    if weigh(0.0, out) <= budget {
        return 0.0;
    }
    if budget <= smin {
        // only the cheapest inputs remain
        let z: f64 = (0..r.len()).filter(|&x| s[x] <= smin).map(|x| r[x] * (d[x] - dmax).exp2()).sum();
        for x in 0..r.len() {
            out[x] = if s[x] <= smin { r[x] * (d[x] - dmax).exp2() / z } else { 0.0 };
        }
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while weigh(hi, out) > budget {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if weigh(mid, out) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    weigh(hi, out);
    hi
}

/// Parameters of the built-in example channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExampleChannel {
    /// `y = x + e`, `e` uniform over `noise_values` values. With
    /// `disjoint_cosets` the sum is taken modulo `inputs * noise_values`
    /// with noise steps of `inputs`, so every output determines its input;
    /// otherwise modulo `inputs`.
    Modular {
        inputs: usize,
        noise_values: usize,
        #[serde(default)]
        disjoint_cosets: bool,
    },
    /// `y = snr * x + e`, `e ~ N(0, 1)`, with `x` on a uniform grid of
    /// `2^levels_log2` points in `[-amplitude, amplitude]` and `y` quantized
    /// into `output_bins` equal bins spanning the noise tails.
    QuantizedAwgn {
        levels_log2: u32,
        amplitude: f64,
        snr: f64,
        output_bins: usize,
    },
}

/// Input grid of the quantized AWGN example.
pub fn awgn_input_grid(levels_log2: u32, amplitude: f64) -> Vec<f64> {
    let m = 1usize << levels_log2;
    if m == 1 {
        return vec![0.0];
    }
    (0..m).map(|i| -amplitude + 2.0 * amplitude * i as f64 / (m - 1) as f64).collect()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn build_example_channel(kind: &ExampleChannel) -> Result<DiscreteChannel> {
    match *kind {
        ExampleChannel::Modular {
            inputs,
            noise_values,
            disjoint_cosets,
        } => {
            if inputs == 0 || noise_values == 0 || (!disjoint_cosets && noise_values > inputs) {
                return Err(Error::InvalidParams(format!(
                    "modular channel needs 1 <= noise values ({noise_values}) <= inputs ({inputs})"
                )));
            }
            let (outputs, step) = if disjoint_cosets {
                (inputs * noise_values, inputs)
            } else {
                (inputs, 1)
            };
            let w = 1.0 / noise_values as f64;
            let rows = (0..inputs)
                .map(|x| {
                    let mut row = vec![0.0; outputs];
                    for e in 0..noise_values {
                        row[(x + e * step) % outputs] += w;
                    }
                    row
                })
                .collect();
            DiscreteChannel::from_rows(rows)
        }
        ExampleChannel::QuantizedAwgn {
            levels_log2,
            amplitude,
            snr,
            output_bins,
        } => {
            if !(amplitude > 0.0) || !snr.is_finite() || snr < 0.0 || output_bins < 2 || levels_log2 > 16 {
                return Err(Error::InvalidParams("quantized AWGN needs amplitude > 0, snr >= 0, bins >= 2".into()));
            }
            let grid = awgn_input_grid(levels_log2, amplitude);
            let lo = -snr * amplitude - AWGN_TAIL_SD;
            let hi = snr * amplitude + AWGN_TAIL_SD;
            let width = (hi - lo) / output_bins as f64;
            let rows = grid
                .iter()
                .map(|&x| {
                    let mean = snr * x;
                    let mut row: Vec<f64> = (0..output_bins)
                        .map(|b| {
                            let a = lo + b as f64 * width;
                            std_normal_cdf(a + width - mean) - std_normal_cdf(a - mean)
                        })
                        .collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|p| *p /= s);
                    row
                })
                .collect();
            DiscreteChannel::from_rows(rows)
        }
    }
}
