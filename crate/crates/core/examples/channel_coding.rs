//! Random coding over a BSC with joint-typicality decoding, below and above capacity.

use repcap::sims::{simulate, ExperimentConfig};

const CONFIG: &str = r#"{"theorem":"thm4","channel":{"kind":"bsc","p":0.05},"n":[16,24],"epsilon":0.35,"rates":[0.2,0.5,0.9],"trials":500,"seed":7}"#;

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
