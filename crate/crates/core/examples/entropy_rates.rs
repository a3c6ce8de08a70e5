//! Entropy rates of an i.i.d. and a Markov source, with Monte Carlo estimates.

use repcap::prob::{binary_entropy, Pmf};
use repcap::sources::{empirical_entropy_rate, MarkovSource, Source};

fn main() -> repcap::Result<()> {
    let iid = Source::iid(Pmf::bernoulli(0.2)?);
    let markov: Source = MarkovSource::symmetric_binary(0.1)?.into();

    for (name, src) in [("bernoulli(0.2)", &iid), ("markov(flip 0.1)", &markov)] {
        println!("{name}: H = {:.6} bits/symbol", src.entropy_rate());
        for n in [16, 64, 256] {
            let est = empirical_entropy_rate(src, n, 2000, 42)?;
            println!("  n={n:>3}  -(1/n) log2 P = {:.4} +/- {:.4}", est.mean, est.std);
        }
    }
    println!("check: H2(0.1) = {:.6}", binary_entropy(0.1));
    Ok(())
}
