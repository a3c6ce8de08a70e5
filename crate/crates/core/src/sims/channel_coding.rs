use rand::Rng;
use rayon::prelude::*;

use super::config::{codebook_size, ExperimentConfig};
use super::report::{ExperimentReport, RateRecord};
use super::trial_seed;
use crate::channels::{blahut_arimoto_capacity, DiscreteChannel, DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITER};
use crate::codec::{joint_typicality_decode, Codebook, LazyCodebook};
use crate::error::{Error, Result};
use crate::prob::{self, Pmf};
use crate::rng::{self, tag};
use crate::sources::Source;
use crate::typicality::JointTypicalityContext;

/// Error labels; only trials with a wrong decision get one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ChannelError {
    None,
    AtypicalCodeword,
    PairNotTypical,
    Impostor,
}

impl ChannelError {
    pub(crate) fn classify(decoded: usize, sent: usize, x: &[usize], y: &[usize], ctx: &JointTypicalityContext) -> Self {
        if decoded == sent {
            ChannelError::None
        } else if !ctx.x_typical(x) {
            ChannelError::AtypicalCodeword
        } else if !(ctx.y_typical(y) && ctx.pair_condition(x, y)) {
            ChannelError::PairNotTypical
        } else {
            ChannelError::Impostor
        }
    }
}

/// Capacity-achieving input, with probabilities rounded to 1e-9 so that
/// symmetric channels get an exactly uniform input.
pub(crate) fn capacity_input(channel: &DiscreteChannel) -> Result<(Pmf, f64)> {
    let cap = match blahut_arimoto_capacity(channel, DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITER) {
        Ok(c) => c,
        Err(Error::CapacityNotConverged(best)) => *best,
        Err(e) => return Err(e),
    };
    let rounded: Vec<f64> = cap.optimal_input.iter().map(|p| (p * 1e9).round() / 1e9).collect();
    let total: f64 = rounded.iter().sum();
    let probs = rounded.iter().map(|p| p / total).collect();
    Ok((Pmf::new(channel.input_alphabet().clone(), probs)?, cap.capacity_bits))
}

/// Random coding over a memoryless channel with joint-typicality decoding.
/// Each trial draws its own codebook from the capacity-achieving input.
pub fn run_channel_coding(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let channel = config.require_channel()?;
    let (input, capacity) = capacity_input(&channel)?;
    let joint = channel.joint(&input)?;
    let mi = prob::mutual_information(&joint);
    let h_y = prob::entropy(&joint.col_marginal());
    let source = Source::iid(input);
    let mut report = ExperimentReport::new(config);
    report.thresholds.insert("mutual_information".into(), mi);
    report.thresholds.insert("capacity".into(), capacity);
    let rates = config.rate_grid(mi);
    for &n in &config.n {
        let eps = config.channel_epsilon_for(n);
        let ctx = JointTypicalityContext::new(joint.clone(), n, eps)?;
        for (ri, &rate) in rates.iter().enumerate() {
            let m = codebook_size(n, rate);
            if m > usize::MAX as u64 / 2 {
                return Err(Error::InvalidParams(format!("codebook of 2^{} words is too large", n as f64 * rate)));
            }
            let outcomes: Vec<(ChannelError, bool)> = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| -> Result<(ChannelError, bool)> {
                    let seed = trial_seed(config.seed, n, ri, t);
                    let book = LazyCodebook::new(m as usize, source.clone(), n, seed)?;
                    let w = rng::stream(seed, tag::TRIAL, 0).random_range(0..m as usize);
                    let mut buf = Vec::new();
                    let x = book.codeword(w, &mut buf).to_vec();
                    let y = channel.transmit_with(&mut rng::stream(seed, tag::CHANNEL, 0), &x);
                    let out = joint_typicality_decode(&y, &book, &ctx);
                    Ok((ChannelError::classify(out.index, w, &x, &y, &ctx), out.no_candidate))
                })
                .collect::<Result<_>>()?;
            let count = |e: ChannelError| outcomes.iter().filter(|o| o.0 == e).count() as u64;
            let (c1, c2, c3) = (
                count(ChannelError::AtypicalCodeword),
                count(ChannelError::PairNotTypical),
                count(ChannelError::Impostor),
            );
            let mut rec = RateRecord::new(n, eps, rate, m, config.trials as u64, c1 + c2 + c3);
            rec.push_case("atypical_codeword", c1, None);
            rec.push_case("pair_not_typical", c2, None);
            rec.push_case("impostor", c3, None);
            rec.extra
                .insert("no_candidate".into(), outcomes.iter().filter(|o| o.1).count() as f64);
            let exponent = n as f64 * (mi - 2.0 * eps * h_y);
            rec.union_bound = Some(((m - 1) as f64 * (-exponent).exp2()).min(1.0));
            report.records.push(rec);
        }
    }
    Ok(report)
}
