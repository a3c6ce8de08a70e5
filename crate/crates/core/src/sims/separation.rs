use std::collections::HashSet;

use rayon::prelude::*;

use super::config::{codebook_size, ExperimentConfig};
use super::report::{mean_interval, ExperimentReport, RateRecord, Sandwich};
use super::channel_coding::{capacity_input, ChannelError};
use super::lossy_coding::{lossy_encode, lossy_setup, SourceEvent};
use super::trial_seed;
use crate::codec::{joint_typicality_decode, Codebook, LazyCodebook};
use crate::error::{Error, Result};
use crate::prob;
use crate::rng::{self, tag};
use crate::sources::Source;
use crate::typicality::JointTypicalityContext;

struct Trial {
    event: SourceEvent,
    channel: ChannelError,
    distortion: f64,
    /// `log2` of the distinct non-zero reproduction words in this trial's codebook.
    support_bits: f64,
}

/// Separate lossy source coding and channel coding: the index of the
/// source codeword is sent with a random channel code of the same size and
/// decoded by joint typicality; the receiver reproduces the codeword of the
/// decoded index. One channel use per source symbol.
pub fn run_separation(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let source = config.require_source()?;
    if !source.is_memoryless() {
        return Err(Error::InvalidParams("source-channel simulation needs an i.i.d. source".into()));
    }
    let pmf = source.marginal().clone();
    let measure = config.require_distortion(pmf.alphabet())?;
    let target = config.require_target()?;
    let channel = config.require_channel()?;
    let setup = lossy_setup(&pmf, &measure, target)?;
    let (input, capacity) = capacity_input(&channel)?;
    let channel_joint = channel.joint(&input)?;
    let mi_channel = prob::mutual_information(&channel_joint);
    let channel_source = Source::iid(input);
    let rd = setup.point.rate;

    let mut report = ExperimentReport::new(config);
    report.thresholds.insert("rate_distortion".into(), rd);
    report.thresholds.insert("mutual_information_source".into(), rd);
    report.thresholds.insert("mutual_information_channel".into(), mi_channel);
    report.thresholds.insert("capacity".into(), capacity);
    report.thresholds.insert("target_distortion".into(), target);
    if rd >= capacity {
        report
            .warnings
            .push(format!("R(D) = {rd:.6} is not below the capacity {capacity:.6}; separation cannot succeed"));
    }
    let rates = if config.rates.is_empty() {
        vec![0.5 * (rd + mi_channel)]
    } else {
        config.rates.clone()
    };
    for &n in &config.n {
        let eps = config.epsilon_for(n);
        let ch_eps = config.channel_epsilon_for(n);
        let src_ctx = JointTypicalityContext::new(setup.joint.clone(), n, eps)?;
        let ch_ctx = JointTypicalityContext::new(channel_joint.clone(), n, ch_eps)?;
        for (ri, &rate) in rates.iter().enumerate() {
            let m = codebook_size(n, rate) as usize;
            let trials: Vec<Trial> = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| -> Result<Trial> {
                    let seed = trial_seed(config.seed, n, ri, t);
                    let src_book = LazyCodebook::tagged(m, setup.reproduction.clone(), n, seed, tag::CODEBOOK)?;
                    let ch_book = LazyCodebook::tagged(m, channel_source.clone(), n, seed, tag::CHANNEL_CODEBOOK)?;
                    let x = source.sample_with(&mut rng::stream(seed, tag::SAMPLE, 0), n).symbols;
                    let (w, event) = lossy_encode(&x, &src_book, &src_ctx, &measure);
                    let mut buf = Vec::new();
                    let cw = ch_book.codeword(w, &mut buf).to_vec();
                    let y = channel.transmit_with(&mut rng::stream(seed, tag::CHANNEL, 0), &cw);
                    let decoded = joint_typicality_decode(&y, &ch_book, &ch_ctx).index;
                    let distortion = measure.sequence_distortion(&x, src_book.codeword(decoded, &mut buf));
                    let mut distinct = HashSet::new();
                    for i in 0..m {
                        let v = src_book.codeword(i, &mut buf);
                        if v.iter().any(|&s| s != 0) {
                            distinct.insert(v.to_vec());
                        }
                    }
                    let count = distinct.len();
                    Ok(Trial {
                        event,
                        channel: ChannelError::classify(decoded, w, &cw, &y, &ch_ctx),
                        distortion,
                        support_bits: if count <= 1 { 0.0 } else { (count as f64).log2() },
                    })
                })
                .collect::<Result<_>>()?;
            let distortions: Vec<f64> = trials.iter().map(|t| t.distortion).collect();
            let (mean, ci) = mean_interval(&distortions);
            let channel_errors = trials.iter().filter(|t| t.channel != ChannelError::None).count() as u64;
            let mut rec = RateRecord::new(n, eps, rate, m as u64, config.trials as u64, channel_errors);
            rec.mean_distortion = Some(mean);
            rec.distortion_ci = Some(ci);
            for (name, ev) in [
                ("atypical_source", SourceEvent::Atypical),
                ("no_jointly_typical_codeword", SourceEvent::NoJointlyTypical),
                ("jointly_typical", SourceEvent::Covered),
            ] {
                let (c, s) = trials
                    .iter()
                    .filter(|t| t.event == ev)
                    .fold((0u64, 0.0), |(c, s), t| (c + 1, s + t.distortion));
                rec.push_case(name, c, Some(s));
            }
            for (name, e) in [
                ("atypical_codeword", ChannelError::AtypicalCodeword),
                ("pair_not_typical", ChannelError::PairNotTypical),
                ("impostor", ChannelError::Impostor),
            ] {
                rec.push_case(name, trials.iter().filter(|t| t.channel == e).count() as u64, None);
            }
            // a run succeeds when the index gets through the channel
            let ok: Vec<f64> = trials
                .iter()
                .filter(|t| t.channel == ChannelError::None)
                .map(|t| t.support_bits / n as f64)
                .collect();
            rec.sandwich = Some(Sandwich {
                lower: rd,
                upper: mi_channel,
                checked: ok.len() as u64,
                inside: ok.iter().filter(|&&q| q > rd && q < mi_channel).count() as u64,
                min_measured: ok.iter().copied().fold(f64::INFINITY, f64::min),
                max_measured: ok.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
            report.records.push(rec);
        }
    }
    Ok(report)
}
