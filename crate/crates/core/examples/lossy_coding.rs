//! Lossy coding of a Bernoulli source under Hamming distortion with a random reproduction codebook.

use repcap::sims::{simulate, ExperimentConfig};

const CONFIG: &str = r#"{"theorem":"thm5","source":{"kind":"bernoulli","p":0.3},"distortion":{"kind":"hamming"},"target_distortion":0.1,"n":16,"rates":[0.3,0.6,0.9],"trials":300,"seed":5}"#;

fn main() -> repcap::Result<()> {
    let config = ExperimentConfig::from_json(CONFIG)?;
    let report = simulate(&config, 4)?;
    println!("{}", report.theorem);
    for (k, v) in &report.thresholds {
        println!("  {k} = {v:.6}");
    }
    for r in &report.records {
        print!("n={:>2} rate={:.3} M={:<8} error {:.4} [{:.4}, {:.4}]", r.n, r.rate, r.codebook_size, r.error_rate, r.error_ci.low, r.error_ci.high);
        if let Some(d) = r.mean_distortion {
            print!(" distortion {d:.4}");
        }
        if let Some(o) = r.oracle {
            print!(" oracle {o:.4}");
        }
        println!();
        for c in &r.cases {
            println!("    {:<24} {:.4}", c.name, c.rate);
        }
    }
    Ok(())
}
