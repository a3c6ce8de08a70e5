//! Blahut-Arimoto capacity of a BSC and of a cost-constrained Z channel.

use repcap::channels::{
    blahut_arimoto_capacity, blahut_arimoto_capacity_with_cost, CostFunction, DiscreteChannel, DEFAULT_CAPACITY_TOL,
    DEFAULT_MAX_ITER,
};
use repcap::prob::binary_entropy;

fn main() -> repcap::Result<()> {
    let bsc = DiscreteChannel::bsc(0.11)?;
    let c = blahut_arimoto_capacity(&bsc, DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITER)?;
    println!("BSC(0.11): C = {:.9} (1 - H2 = {:.9}), {} iterations", c.capacity_bits, 1.0 - binary_entropy(0.11), c.iterations);
    println!("  input {:?}", c.optimal_input);

    let z = DiscreteChannel::from_rows(vec![vec![1.0, 0.0], vec![0.3, 0.7]])?;
    let free = blahut_arimoto_capacity(&z, DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITER)?;
    println!("Z(0.3): C = {:.6}, P(X=1) = {:.4}", free.capacity_bits, free.optimal_input[1]);

    // sending a 1 costs one unit, at most 0.2 on average
    let cost = CostFunction::per_input(&z, &[0.0, 1.0]);
    for budget in [0.1, 0.2, 0.5] {
        let r = blahut_arimoto_capacity_with_cost(&z, &cost, budget, 1e-8, DEFAULT_MAX_ITER)?;
        println!(
            "  budget {budget}: C = {:.6}, E cost = {:.4}, multiplier {:.4}",
            r.capacity_bits, r.expected_cost, r.multiplier
        );
    }
    Ok(())
}
