//! Effective support of a set of embeddings: log2 of the distinct non-zero vectors.

use repcap::codec::effective_support_audit;

fn main() -> repcap::Result<()> {
    let z = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.5],
        vec![1.0, 0.5],
        vec![-0.0, 0.0],
        vec![0.25, 2.0],
        vec![3.0, 1.0],
        vec![0.0, 1.0],
    ];
    let audit = effective_support_audit(&z)?;
    println!(
        "{} embeddings in R^{}: {} distinct non-zero, effective support {:.4} bits",
        audit.total, audit.q, audit.distinct_nonzero_count, audit.q_tilde
    );
    Ok(())
}
