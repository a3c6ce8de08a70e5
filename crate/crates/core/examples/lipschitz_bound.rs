//! Perturbation bound for a composed linear encoder and decoder, checked
//! against random and adversarial perturbations.

use repcap::sims::{lipschitz_bound, simulate, ExperimentConfig};

const CONFIG: &str = r#"{"theorem":"thm7","seed":4,"lipschitz":{"delta":0.05,"sigma":0.25,
  "empirical":{"f":[[1.0,0.5],[0.0,2.0]],"g":[[0.5,0.0],[0.25,1.0]],"trials":10000}}}"#;

fn main() -> repcap::Result<()> {
    println!("bound with K_c = 2, K_g = 3: {:.4}", lipschitz_bound(0.1, 0.2, 2.0, 3.0)?);
    let report = simulate(&ExperimentConfig::from_json(CONFIG)?, 2)?;
    let out = report.lipschitz.as_ref().expect("lipschitz outcome");
    println!("bound {:.6} (K_c {:.4}, K_g {:.4})", out.bound, out.k_c, out.k_g);
    if let Some(e) = &out.empirical {
        println!(
            "{} trials: max loss {:.6}, violations {}, adversarial ratio {:.4}",
            e.trials, e.max_loss, e.violations, e.adversarial_ratio
        );
    }
    Ok(())
}
