use rayon::prelude::*;

use super::config::{codebook_size, ExperimentConfig};
use super::report::{ExperimentReport, RateRecord};
use super::trial_seed;
use crate::codec::build_budget_codebook;
use crate::error::Result;
use crate::rng::{self, tag};
use crate::typicality::within_epsilon;

/// Noise-free representation: a code of `2^{nR}` embedding points covers
/// the typical sequences first, most probable first, then the most
/// probable atypical ones. An error is a test sequence with no point.
pub fn run_source_coverage(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let source = config.require_source()?;
    let h = source.entropy_rate();
    let k = source.alphabet_size() as f64;
    let mut report = ExperimentReport::new(config);
    report.thresholds.insert("entropy_rate".into(), h);
    let rates = config.rate_grid(h);
    for &n in &config.n {
        let eps = config.epsilon_for(n);
        let all = k.powi(n as i32);
        for (ri, &rate) in rates.iter().enumerate() {
            let budget = codebook_size(n, rate).min(all as u64);
            let code = build_budget_codebook(&source, n, eps, budget)?;
            // (represented, typical) per trial
            let outcomes: Vec<(bool, bool)> = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(config.seed, n, ri, t);
                    let x = source.sample_with(&mut rng::stream(seed, tag::SAMPLE, 0), n);
                    let typical = within_epsilon(-x.log2_prob / n as f64, h, eps);
                    (code.contains(&x.symbols), typical)
                })
                .collect();
            let errors = outcomes.iter().filter(|o| !o.0).count() as u64;
            let atypical_miss = outcomes.iter().filter(|o| !o.0 && !o.1).count() as u64;
            let mut rec = RateRecord::new(n, eps, rate, budget, config.trials as u64, errors);
            rec.push_case("atypical_unrepresented", atypical_miss, None);
            rec.push_case("typical_unrepresented", errors - atypical_miss, None);
            rec.oracle = Some((1.0 - code.covered_mass).max(0.0));
            rec.extra.insert("typical_set_size".into(), code.typical_total as f64);
            rec.extra.insert("typical_points_used".into(), code.typical_count as f64);
            rec.extra.insert("embedding_bits".into(), n as f64 * rate);
            // whether a typical-only codebook fits in the budget
            rec.extra.insert(
                "typical_codebook_feasible".into(),
                f64::from(u8::from(code.typical_total as u64 <= budget)),
            );
            report.records.push(rec);
        }
    }
    Ok(report)
}
