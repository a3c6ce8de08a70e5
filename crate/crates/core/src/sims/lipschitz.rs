use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{ExperimentConfig, LinearMapsSpec};
use super::report::{ExperimentReport, LipschitzEmpirical, LipschitzOutcome};
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// `Delta + sigma K_c K_G`.
pub fn lipschitz_bound(delta: f64, sigma: f64, k_c: f64, k_g: f64) -> Result<f64> {
    for (name, v) in [("delta", delta), ("sigma", sigma), ("k_c", k_c), ("k_g", k_g)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidInputs(format!("{name} = {v} must be finite and >= 0")));
        }
    }
    Ok(delta + sigma * k_c * k_g)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidInputs(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Uniform draw from the ball of radius `radius` in `dim` dimensions.
fn ball(rng: &mut impl Rng, dim: usize, radius: f64) -> DVector<f64> {
    let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = g.norm();
    let r = radius * rng::unit(rng).powf(1.0 / dim as f64);
    if norm == 0.0 {
        DVector::zeros(dim)
    } else {
        g * (r / norm)
    }
}

/// With `h = G F` trained to loss at most `delta`, targets are
/// `v = h(x) + r` with `|r| <= delta`, and the loss on a perturbed input
/// `y = x + e`, `|e| <= sigma`, is `|G F e - r|`.
fn empirical(spec: &LinearMapsSpec, delta: f64, sigma: f64, bound: f64, seed: u64) -> Result<LipschitzEmpirical> {
    let f = matrix(&spec.f, "F")?;
    let g = matrix(&spec.g, "G")?;
    if g.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch {
            expected: f.nrows(),
            found: g.ncols(),
        });
    }
    let h = &g * &f;
    let (dim_in, dim_out) = (h.ncols(), h.nrows());
    let losses: Vec<f64> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut s = rng::stream(seed, tag::PERTURB, t);
            let e = ball(&mut s, dim_in, sigma);
            let r = ball(&mut s, dim_out, delta);
            (&h * e - r).norm()
        })
        .collect();
    let svd = h.clone().svd(true, true);
    let (top, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let e_adv: DVector<f64> = v_t.row(top).transpose() * sigma;
    let he = &h * &e_adv;
    let r_adv = if he.norm() > 0.0 { -he.normalize() * delta } else { DVector::zeros(dim_out) };
    let adversarial_loss = (&he - r_adv).norm();
    let max_loss = losses.iter().copied().fold(0.0, f64::max);
    Ok(LipschitzEmpirical {
        trials: spec.trials as u64,
        max_loss,
        mean_loss: losses.iter().sum::<f64>() / losses.len().max(1) as f64,
        violations: losses.iter().filter(|&&l| l > bound * (1.0 + 1e-12)).count() as u64,
        operator_norm_f: operator_norm(&f),
        operator_norm_g: operator_norm(&g),
        operator_norm_composed: operator_norm(&h),
        adversarial_loss,
        adversarial_ratio: if bound > 0.0 { adversarial_loss / bound } else { 1.0 },
    })
}

/// The perturbation bound, and an empirical check when explicit linear
/// maps are given.
pub fn run_lipschitz(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = config
        .lipschitz
        .as_ref()
        .ok_or_else(|| Error::InvalidInputs("thm7 needs a lipschitz section".into()))?;
    let mut report = ExperimentReport::new(config);
    let norms = match &spec.empirical {
        Some(m) => Some((operator_norm(&matrix(&m.f, "F")?), operator_norm(&matrix(&m.g, "G")?))),
        None => None,
    };
    let k_c = spec.k_c.or(norms.map(|n| n.0)).ok_or_else(|| Error::InvalidInputs("k_c missing".into()))?;
    let k_g = spec.k_g.or(norms.map(|n| n.1)).ok_or_else(|| Error::InvalidInputs("k_g missing".into()))?;
    let bound = lipschitz_bound(spec.delta, spec.sigma, k_c, k_g)?;
    if let Some((nf, ng)) = norms {
        if k_c < nf * (1.0 - 1e-12) || k_g < ng * (1.0 - 1e-12) {
            report
                .warnings
                .push("given Lipschitz constants are below the operator norms of the maps".into());
        }
    }
    let empirical = match &spec.empirical {
        Some(m) => Some(empirical(m, spec.delta, spec.sigma, bound, config.seed)?),
        None => None,
    };
    report.thresholds.insert("bound".into(), bound);
    report.lipschitz = Some(LipschitzOutcome {
        bound,
        delta: spec.delta,
        sigma: spec.sigma,
        k_c,
        k_g,
        empirical,
    });
    Ok(report)
}
