//! Typical-set coding of a Bernoulli source: the error drops once the rate passes the entropy.

use repcap::sims::{simulate, ExperimentConfig};

const CONFIG: &str = r#"{"theorem":"thm3","source":{"kind":"bernoulli","p":0.2},"n":[12,16],"epsilon":0.1,"rates":[0.4,0.6,0.8,1.0],"trials":4000,"seed":3}"#;

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
