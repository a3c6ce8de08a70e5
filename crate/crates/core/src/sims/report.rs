use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ExperimentConfig;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub half_width: f64,
}

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> Interval {
    if trials == 0 {
        return Interval {
            low: 0.0,
            high: 1.0,
            half_width: 0.5,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        // the exact endpoints cancel to rounding noise otherwise
        low: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        high: if successes == trials { 1.0 } else { (center + half).min(1.0) },
        half_width: half,
    }
}

/// Mean with a normal-approximation 95% interval.
pub fn mean_interval(values: &[f64]) -> (f64, Interval) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = Z_95 * (var / n).sqrt();
    (
        mean,
        Interval {
            low: mean - half,
            high: mean + half,
            half_width: half,
        },
    )
}

/// Count of trials falling in one labelled error case or event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseCount {
    pub name: &'static str,
    pub count: u64,
    pub rate: f64,
    /// Sum of per-trial distortion over trials in this case, divided by all trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion_contribution: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    /// Successful trials checked and how many fell strictly inside.
    pub checked: u64,
    pub inside: u64,
    pub min_measured: f64,
    pub max_measured: f64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.checked > 0 && self.inside == self.checked
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRecord {
    pub n: usize,
    pub epsilon: f64,
    pub rate: f64,
    pub codebook_size: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub error_ci: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_distortion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion_ci: Option<Interval>,
    pub cases: Vec<CaseCount>,
    /// Exact or analytic value the Monte Carlo estimate is compared to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<Sandwich>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl RateRecord {
    pub fn new(n: usize, epsilon: f64, rate: f64, codebook_size: u64, trials: u64, errors: u64) -> Self {
        Self {
            n,
            epsilon,
            rate,
            codebook_size,
            trials,
            errors,
            error_rate: errors as f64 / trials.max(1) as f64,
            error_ci: wilson_interval(errors, trials),
            mean_distortion: None,
            distortion_ci: None,
            cases: Vec::new(),
            oracle: None,
            union_bound: None,
            sandwich: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn case(&self, name: &str) -> Option<&CaseCount> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub(crate) fn push_case(&mut self, name: &'static str, count: u64, distortion_sum: Option<f64>) {
        let t = self.trials.max(1) as f64;
        self.cases.push(CaseCount {
            name,
            count,
            rate: count as f64 / t,
            distortion_contribution: distortion_sum.map(|s| s / t),
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzOutcome {
    pub bound: f64,
    pub delta: f64,
    pub sigma: f64,
    pub k_c: f64,
    pub k_g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<LipschitzEmpirical>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzEmpirical {
    pub trials: u64,
    pub max_loss: f64,
    pub mean_loss: f64,
    pub violations: u64,
    pub operator_norm_f: f64,
    pub operator_norm_g: f64,
    pub operator_norm_composed: f64,
    pub adversarial_loss: f64,
    pub adversarial_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub theorem: &'static str,
    pub config: ExperimentConfig,
    pub thresholds: BTreeMap<String, f64>,
    pub records: Vec<RateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<LipschitzOutcome>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        Self {
            theorem: config.theorem.name(),
            config: config.clone(),
            thresholds: BTreeMap::new(),
            records: Vec::new(),
            lipschitz: None,
            warnings: Vec::new(),
        }
    }

    pub fn record(&self, n: usize, rate: f64) -> Option<&RateRecord> {
        self.records.iter().find(|r| r.n == n && (r.rate - rate).abs() < 1e-12)
    }
}
