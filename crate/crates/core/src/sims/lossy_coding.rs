use rayon::prelude::*;

use super::config::{codebook_size, ExperimentConfig};
use super::report::{mean_interval, ExperimentReport, RateRecord};
use super::trial_seed;
use crate::codec::{Codebook, LazyCodebook};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::rate_distortion::{rd_at_distortion, DistortionMeasure, RdPoint};
use crate::rng::{self, tag};
use crate::sources::Source;
use crate::typicality::JointTypicalityContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SourceEvent {
    /// The source sequence is not typical.
    Atypical,
    /// Typical, but no codeword is jointly typical with it.
    NoJointlyTypical,
    /// A jointly typical codeword was found.
    Covered,
}

/// Index of the first codeword jointly typical with `x`; otherwise the
/// codeword of least distortion (first on ties).
pub(crate) fn lossy_encode(
    x: &[usize],
    book: &impl Codebook,
    ctx: &JointTypicalityContext,
    measure: &DistortionMeasure,
) -> (usize, SourceEvent) {
    let mut buf = Vec::with_capacity(x.len());
    let typical = ctx.x_typical(x);
    if typical {
        for w in 0..book.len() {
            let v = book.codeword(w, &mut buf);
            if ctx.pair_condition(x, v) && ctx.y_typical(v) {
                return (w, SourceEvent::Covered);
            }
        }
    }
    let mut best = (0, f64::INFINITY);
    for w in 0..book.len() {
        let d = measure.sequence_distortion(x, book.codeword(w, &mut buf));
        if d < best.1 {
            best = (w, d);
        }
    }
    let event = if typical {
        SourceEvent::NoJointlyTypical
    } else {
        SourceEvent::Atypical
    };
    (best.0, event)
}

/// Test channel at the target distortion, its reproduction law, and the
/// joint law of source and reproduction.
pub(crate) struct LossySetup {
    pub point: RdPoint,
    pub reproduction: Source,
    pub joint: crate::prob::JointPmf,
}

pub(crate) fn lossy_setup(source: &Pmf, measure: &DistortionMeasure, target: f64) -> Result<LossySetup> {
    let point = rd_at_distortion(source, measure, target)?;
    let q = point.output_marginal(source);
    let reproduction = Source::iid(Pmf::new(measure.vhat_alphabet().clone(), q)?);
    let joint = point.joint(source);
    Ok(LossySetup {
        point,
        reproduction,
        joint,
    })
}

/// Lossy source coding with a random reproduction codebook drawn from the
/// test channel's output law and joint-typicality encoding.
pub fn run_lossy_coding(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let source = config.require_source()?;
    if !source.is_memoryless() {
        return Err(Error::InvalidParams("lossy coding simulation needs an i.i.d. source".into()));
    }
    let pmf = source.marginal().clone();
    let measure = config.require_distortion(pmf.alphabet())?;
    let target = config.require_target()?;
    let setup = lossy_setup(&pmf, &measure, target)?;
    let rd = setup.point.rate;
    let mut report = ExperimentReport::new(config);
    report.thresholds.insert("rate_distortion".into(), rd);
    report.thresholds.insert("target_distortion".into(), target);
    report.thresholds.insert("test_channel_distortion".into(), setup.point.distortion);
    report.thresholds.insert("d_max".into(), measure.d_max());
    let rates = config.rate_grid(rd);
    for &n in &config.n {
        let eps = config.epsilon_for(n);
        let ctx = JointTypicalityContext::new(setup.joint.clone(), n, eps)?;
        for (ri, &rate) in rates.iter().enumerate() {
            let m = codebook_size(n, rate);
            let outcomes: Vec<(SourceEvent, f64)> = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| -> Result<(SourceEvent, f64)> {
                    let seed = trial_seed(config.seed, n, ri, t);
                    let book = LazyCodebook::new(m as usize, setup.reproduction.clone(), n, seed)?;
                    let x = source.sample_with(&mut rng::stream(seed, tag::SAMPLE, 0), n).symbols;
                    let (w, event) = lossy_encode(&x, &book, &ctx, &measure);
                    let mut buf = Vec::new();
                    Ok((event, measure.sequence_distortion(&x, book.codeword(w, &mut buf))))
                })
                .collect::<Result<_>>()?;
            let distortions: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            let (mean, ci) = mean_interval(&distortions);
            let exceed = distortions.iter().filter(|&&d| d > target).count() as u64;
            let mut rec = RateRecord::new(n, eps, rate, m, config.trials as u64, exceed);
            rec.mean_distortion = Some(mean);
            rec.distortion_ci = Some(ci);
            for (name, ev) in [
                ("atypical_source", SourceEvent::Atypical),
                ("no_jointly_typical_codeword", SourceEvent::NoJointlyTypical),
                ("jointly_typical", SourceEvent::Covered),
            ] {
                let hits = outcomes.iter().filter(|o| o.0 == ev);
                let (count, sum) = hits.fold((0u64, 0.0), |(c, s), o| (c + 1, s + o.1));
                rec.push_case(name, count, Some(sum));
            }
            report.records.push(rec);
        }
    }
    Ok(report)
}
