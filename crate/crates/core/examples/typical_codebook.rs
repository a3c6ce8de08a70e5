//! Builds an embedding codebook from a typical set and round-trips sequences.

use repcap::codec::{build_typical_codebook, EmbeddingSpace};
use repcap::sources::Source;

fn main() -> repcap::Result<()> {
    let src = Source::bernoulli(0.1)?;
    let n = 20;
    let space = EmbeddingSpace::new(2, 6)?;
    let code = build_typical_codebook(&src, n, 0.2, &space)?;
    println!(
        "{} codewords ({} of {} typical), covered mass {:.4}",
        code.len(),
        code.typical_count,
        code.typical_total,
        code.covered_mass
    );

    let sample = src.sample(n, 7)?;
    let (index, hit) = code.encode(&sample.symbols);
    println!("sequence {:?}", sample.symbols);
    println!("  -> index {index} (in codebook: {hit}), embedding {:?}", code.embedding(index));
    println!("  <- {:?}", code.decode(index));
    Ok(())
}
