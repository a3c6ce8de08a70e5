//! Representation rate of a finite-precision embedding and the feasibility
//! checks against source entropy and channel information.

use repcap::codec::{feasibility_report, representation_rate, EmbeddingSpace, FeasibilityInputs};

fn main() -> repcap::Result<()> {
    // 84-dimensional float32 embedding of a 28x28 8-bit image
    let space = EmbeddingSpace::new(84, 32)?;
    let n = 28 * 28;
    println!("rate = {} bits per input symbol", representation_rate(&space, n)?);

    // source entropy close to log2 256: the budget is too small
    let inputs = FeasibilityInputs { source_entropy: 7.9, ..Default::default() };
    let report = feasibility_report(&space, n, &inputs)?;
    for c in &report.checks {
        println!("  {:<28} {} {:>10.1} vs {:>10.1}  margin {:>9.1}  {}", c.name, c.relation, c.lhs_bits, c.rhs_bits, c.margin_bits, if c.holds { "ok" } else { "fails" });
    }

    let inputs = FeasibilityInputs {
        source_entropy: 2.0,
        channel_mutual_information: Some(1.5),
        ..Default::default()
    };
    let report = feasibility_report(&space, n, &inputs)?;
    for c in &report.checks {
        println!("  {:<28} margin {:>9.1}  {}", c.name, c.margin_bits, if c.holds { "ok" } else { "fails" });
    }
    Ok(())
}
