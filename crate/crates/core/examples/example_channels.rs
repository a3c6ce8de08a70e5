//! The modular additive-noise channel and the quantized AWGN channel.

use repcap::channels::{
    blahut_arimoto_capacity, build_example_channel, channel_mutual_information, ExampleChannel, DEFAULT_MAX_ITER,
};
use repcap::prob::Pmf;

fn main() -> repcap::Result<()> {
    for disjoint_cosets in [false, true] {
        let ch = build_example_channel(&ExampleChannel::Modular { inputs: 8, noise_values: 4, disjoint_cosets })?;
        let uniform = Pmf::from_probs(vec![1.0 / 8.0; 8])?;
        println!(
            "modular 8 inputs, 4 noise values, disjoint cosets {disjoint_cosets}: I = {:.6} bits",
            channel_mutual_information(&uniform, &ch)?
        );
    }

    for k in [1, 2, 4, 6] {
        let ch = build_example_channel(&ExampleChannel::QuantizedAwgn {
            levels_log2: k,
            amplitude: 1.0,
            snr: 2.0,
            output_bins: 512,
        })?;
        let m = ch.inputs();
        let uniform = Pmf::from_probs(vec![1.0 / m as f64; m])?;
        let c = blahut_arimoto_capacity(&ch, 1e-7, DEFAULT_MAX_ITER)?;
        println!(
            "AWGN snr 2, {m:>2} levels: uniform I = {:.4}, capacity = {:.4}",
            channel_mutual_information(&uniform, &ch)?,
            c.capacity_bits
        );
    }
    Ok(())
}
