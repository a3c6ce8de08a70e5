//! Collapse index and simplex residuals of class means, for a collapsed and a
//! spread-out embedding.

use repcap::collapse::{collapse_report, LabeledEmbeddings, DEFAULT_COLLAPSE_TOL};
use std::f64::consts::PI;

fn simplex(jitter: f64) -> repcap::Result<LabeledEmbeddings> {
    let mut labels = Vec::new();
    let mut z = Vec::new();
    for c in 0..3 {
        let a = 2.0 * PI * c as f64 / 3.0;
        for i in 0..4 {
            let e = jitter * (i as f64 - 1.5);
            labels.push(["a", "b", "c"][c]);
            z.push(vec![a.cos() + e, a.sin() - e]);
        }
    }
    LabeledEmbeddings::from_parts(&labels, z, None)
}

fn main() -> repcap::Result<()> {
    for jitter in [0.0, 0.3] {
        let r = collapse_report(&simplex(jitter)?, DEFAULT_COLLAPSE_TOL)?;
        println!("jitter {jitter}: collapse index {:.4}", r.collapse_index);
        if let Some(etf) = &r.etf_residuals {
            println!(
                "  mean sum {:.2e}, norm spread {:.2e}, gram deviation {:.2e}",
                etf.mean_sum_norm, etf.norm_spread, etf.gram_deviation
            );
        }
    }

    // two classes on one point with different regression targets
    let data = LabeledEmbeddings::from_parts(
        &["x", "x", "y", "y"],
        vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
        Some(vec![vec![0.0], vec![5.0], vec![1.0], vec![1.0]]),
    )?;
    let r = collapse_report(&data, DEFAULT_COLLAPSE_TOL)?;
    println!("regression degeneracy flag: {}", r.degeneracy_flag);
    Ok(())
}
