//! Enumerates typical sets and checks the AEP statements at growing n.

use repcap::sources::Source;
use repcap::typicality::enumerate_typical_set;

fn main() -> repcap::Result<()> {
    let src = Source::bernoulli(0.2)?;
    let eps = 0.15;
    println!("  n   |A|        P(A)    bounds(members, upper, lower)");
    for n in [8, 12, 16, 20] {
        let set = enumerate_typical_set(&src, n, eps)?;
        let aep = set.check_aep();
        println!(
            "{n:>3}  {:>8}  {:.4}   {} {} {}",
            aep.size, aep.mass, aep.member_prob_bounds, aep.size_upper_ok, aep.size_lower_ok
        );
    }
    Ok(())
}
