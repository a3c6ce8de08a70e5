//! Canonical JSON output: sorted keys, 12 significant digits, NaN reported.

use repcap::canonical::to_canonical_string;
use repcap::channels::{blahut_arimoto_capacity, DiscreteChannel};

#[derive(serde::Serialize)]
struct Summary {
    name: &'static str,
    capacity: f64,
    input: Vec<f64>,
    failed_probe: f64,
}

fn main() -> repcap::Result<()> {
    let c = blahut_arimoto_capacity(&DiscreteChannel::bsc(0.11)?, 1e-12, 10_000)?;
    let s = Summary { name: "bsc", capacity: c.capacity_bits, input: c.optimal_input, failed_probe: f64::NAN };
    print!("{}", to_canonical_string(&s)?);
    Ok(())
}
