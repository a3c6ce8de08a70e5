use serde::{Deserialize, Serialize};

use crate::channels::{build_example_channel, DiscreteChannel, ExampleChannel};
use crate::error::{Error, Result};
use crate::prob::{Alphabet, Pmf};
use crate::rate_distortion::DistortionMeasure;
use crate::sources::{MarkovSource, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
/// Experiment identifier as it appears in configs and on the command line.
pub enum Theorem {
    /// Typical-set source coverage.
    Thm3,
    /// Random coding with joint-typicality decoding.
    Thm4,
    /// Lossy source coding against a distortion target.
    Thm5,
    /// Lossy source code followed by a channel code.
    Thm6,
    /// Lipschitz bound on decoder perturbation.
    Thm7,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm3 => "thm3",
            Theorem::Thm4 => "thm4",
            Theorem::Thm5 => "thm5",
            Theorem::Thm6 => "thm6",
            Theorem::Thm7 => "thm7",
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
            .map_err(|_| Error::Parse(format!("unknown theorem {s:?}; expected thm3..thm7")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Bernoulli { p: f64 },
    Iid { probs: Vec<f64> },
    Markov { rows: Vec<Vec<f64>> },
    SymmetricMarkov { flip: f64 },
}

impl SourceSpec {
    pub fn build(&self) -> Result<Source> {
        match self {
            SourceSpec::Bernoulli { p } => Source::bernoulli(*p),
            SourceSpec::Iid { probs } => Ok(Source::iid(Pmf::from_probs(probs.clone())?)),
            SourceSpec::Markov { rows } => Ok(MarkovSource::new(Alphabet::indexed(rows.len()), rows.clone())?.into()),
            SourceSpec::SymmetricMarkov { flip } => Ok(MarkovSource::symmetric_binary(*flip)?.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Bsc {
        p: f64,
    },
    Identity {
        size: usize,
    },
    Matrix {
        rows: Vec<Vec<f64>>,
    },
    Modular {
        inputs: usize,
        noise_values: usize,
        #[serde(default)]
        disjoint_cosets: bool,
    },
    QuantizedAwgn {
        levels_log2: u32,
        amplitude: f64,
        snr: f64,
        output_bins: usize,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<DiscreteChannel> {
        match self {
            ChannelSpec::Bsc { p } => DiscreteChannel::bsc(*p),
            ChannelSpec::Identity { size } => DiscreteChannel::identity(*size),
            ChannelSpec::Matrix { rows } => DiscreteChannel::from_rows(rows.clone()),
            ChannelSpec::Modular {
                inputs,
                noise_values,
                disjoint_cosets,
            } => build_example_channel(&ExampleChannel::Modular {
                inputs: *inputs,
                noise_values: *noise_values,
                disjoint_cosets: *disjoint_cosets,
            }),
            ChannelSpec::QuantizedAwgn {
                levels_log2,
                amplitude,
                snr,
                output_bins,
            } => build_example_channel(&ExampleChannel::QuantizedAwgn {
                levels_log2: *levels_log2,
                amplitude: *amplitude,
                snr: *snr,
                output_bins: *output_bins,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionSpec {
    Hamming,
    Matrix { rows: Vec<Vec<f64>> },
}

impl DistortionSpec {
    pub fn build(&self, alphabet: &Alphabet) -> Result<DistortionMeasure> {
        match self {
            DistortionSpec::Hamming => Ok(DistortionMeasure::hamming(alphabet.clone())),
            DistortionSpec::Matrix { rows } => DistortionMeasure::from_rows(rows.clone()),
        }
    }
}

/// Explicit linear maps `F` (q x n) and `G` (d x q) for the Lipschitz bound check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMapsSpec {
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSpec {
    pub delta: f64,
    pub sigma: f64,
    /// Lipschitz constants; computed as operator norms of the maps when absent.
    #[serde(default)]
    pub k_c: Option<f64>,
    #[serde(default)]
    pub k_g: Option<f64>,
    #[serde(default)]
    pub empirical: Option<LinearMapsSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

fn lengths<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(n) => vec![n],
        OneOrMany::Many(v) => v,
    })
}

/// Simulation configuration. `n` may be a single length or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_distortion: Option<f64>,
    #[serde(default, deserialize_with = "lengths")]
    pub n: Vec<usize>,
    /// Typicality slack; defaults to 0.1 for n <= 24 and 0.05 above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Slack for the channel decoder when it should differ from `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_epsilon: Option<f64>,
    /// Rates in bits per symbol; defaults to 0.5, 0.75, 1.25 and 1.5 times the threshold.
    #[serde(default)]
    pub rates: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<LipschitzSpec>,
}

fn default_trials() -> usize {
    1000
}

pub const DEFAULT_RATE_MULTIPLIERS: [f64; 4] = [0.5, 0.75, 1.25, 1.5];

pub fn default_epsilon(n: usize) -> f64 {
    if n <= 24 {
        0.1
    } else {
        0.05
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if self.rates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("rate grid must be strictly increasing".into()));
        }
        if self.rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParams("rates must be finite and nonnegative".into()));
        }
        if self.theorem != Theorem::Thm7 && (self.n.is_empty() || self.n.contains(&0)) {
            return Err(Error::InvalidParams("at least one block length n >= 1 is required".into()));
        }
        if let Some(e) = self.epsilon.into_iter().chain(self.channel_epsilon).find(|e| !(*e > 0.0)) {
            return Err(Error::InvalidParams(format!("epsilon {e} must be positive")));
        }
        Ok(())
    }

    pub fn epsilon_for(&self, n: usize) -> f64 {
        self.epsilon.unwrap_or_else(|| default_epsilon(n))
    }

    pub fn channel_epsilon_for(&self, n: usize) -> f64 {
        self.channel_epsilon.unwrap_or_else(|| self.epsilon_for(n))
    }

    pub fn rate_grid(&self, threshold: f64) -> Vec<f64> {
        if self.rates.is_empty() {
            DEFAULT_RATE_MULTIPLIERS.iter().map(|m| m * threshold).collect()
        } else {
            self.rates.clone()
        }
    }

    pub(crate) fn require_source(&self) -> Result<Source> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::InvalidParams(format!("{} needs a source", self.theorem.name())))?
            .build()
    }

    pub(crate) fn require_channel(&self) -> Result<DiscreteChannel> {
        self.channel
            .as_ref()
            .ok_or_else(|| Error::InvalidParams(format!("{} needs a channel", self.theorem.name())))?
            .build()
    }

    pub(crate) fn require_distortion(&self, alphabet: &Alphabet) -> Result<DistortionMeasure> {
        self.distortion.as_ref().unwrap_or(&DistortionSpec::Hamming).build(alphabet)
    }

    pub(crate) fn require_target(&self) -> Result<f64> {
        self.target_distortion
            .ok_or_else(|| Error::InvalidParams(format!("{} needs target_distortion", self.theorem.name())))
    }
}

/// `2^{n R}` rounded to the nearest integer, at least 1.
pub fn codebook_size(n: usize, rate: f64) -> u64 {
    let m = (n as f64 * rate).exp2().round();
    if m >= u64::MAX as f64 {
        u64::MAX
    } else {
        (m as u64).max(1)
    }
}
