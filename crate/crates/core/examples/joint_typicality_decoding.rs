//! Random codebook over a BSC with joint-typicality decoding.

use repcap::channels::DiscreteChannel;
use repcap::codec::{joint_typicality_decode, Codebook, LazyCodebook};
use repcap::prob::Pmf;
use repcap::sources::Source;
use repcap::typicality::JointTypicalityContext;

fn main() -> repcap::Result<()> {
    let n = 24;
    let ch = DiscreteChannel::bsc(0.05)?;
    let input = Pmf::bernoulli(0.5)?;
    let ctx = JointTypicalityContext::new(ch.joint(&input)?, n, 0.35)?;
    println!("I(X;Y) = {:.4} bits", ctx.mutual_information());

    for messages in [16usize, 256, 4096] {
        let book = LazyCodebook::new(messages, Source::iid(input.clone()), n, 1)?;
        let mut errors = 0;
        let trials = 200;
        for t in 0..trials {
            let w = t * 7919 % messages;
            let mut buf = Vec::new();
            let x = book.codeword(w, &mut buf).to_vec();
            let y = ch.transmit(&x, t as u64)?;
            if joint_typicality_decode(&y, &book, &ctx).index != w {
                errors += 1;
            }
        }
        let rate = (messages as f64).log2() / n as f64;
        println!("M = {messages:>5} (rate {rate:.3}): {errors}/{trials} errors");
    }
    Ok(())
}
