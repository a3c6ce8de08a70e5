//! Distortion measures and the rate-distortion function, computed by
//! Blahut-Arimoto alternating minimization at a fixed Lagrange slope.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{self, Alphabet, JointPmf, Pmf};

pub const DEFAULT_RD_TOL: f64 = 1e-10;
pub const DEFAULT_RD_MAX_ITER: usize = 100_000;
/// Target distortions are met to this accuracy by slope bisection.
pub const DISTORTION_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionMeasure {
    v_alphabet: Alphabet,
    vhat_alphabet: Alphabet,
    d: Vec<Vec<f64>>,
    d_max: f64,
}

impl DistortionMeasure {
    pub fn new(v_alphabet: Alphabet, vhat_alphabet: Alphabet, d: Vec<Vec<f64>>) -> Result<Self> {
        if d.len() != v_alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: v_alphabet.size(),
                found: d.len(),
            });
        }
        let mut d_max: f64 = 0.0;
        for row in &d {
            if row.len() != vhat_alphabet.size() {
                return Err(Error::DimensionMismatch {
                    expected: vhat_alphabet.size(),
                    found: row.len(),
                });
            }
            for &x in row {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidParams(format!("distortion entry {x} must be finite and >= 0")));
                }
                d_max = d_max.max(x);
            }
        }
        Ok(Self {
            v_alphabet,
            vhat_alphabet,
            d,
            d_max,
        })
    }

    pub fn from_rows(d: Vec<Vec<f64>>) -> Result<Self> {
        let r = d.len();
        let c = d.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidAlphabet("distortion matrix must not be empty".into()));
        }
        Self::new(Alphabet::indexed(r), Alphabet::indexed(c), d)
    }

    pub fn hamming(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        let d = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i != j))).collect()).collect();
        Self {
            vhat_alphabet: alphabet.clone(),
            v_alphabet: alphabet,
            d,
            d_max: if k > 1 { 1.0 } else { 0.0 },
        }
    }

    pub fn v_alphabet(&self) -> &Alphabet {
        &self.v_alphabet
    }

    pub fn vhat_alphabet(&self) -> &Alphabet {
        &self.vhat_alphabet
    }

    pub fn d(&self, v: usize, vhat: usize) -> f64 {
        self.d[v][vhat]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.d
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Re-indexes rows by source symbol through the bijection `v = g[x]`.
    pub fn through_bijection(&self, g: &[usize]) -> Result<Self> {
        let k = self.v_alphabet.size();
        let mut seen = vec![false; k];
        if g.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: g.len() });
        }
        for &v in g {
            if v >= k || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidParams("target map g is not a bijection".into()));
            }
        }
        Ok(Self {
            v_alphabet: Alphabet::indexed(k),
            vhat_alphabet: self.vhat_alphabet.clone(),
            d: g.iter().map(|&v| self.d[v].clone()).collect(),
            d_max: self.d_max,
        })
    }

    /// Mean per-symbol distortion between two equal-length sequences.
    pub fn sequence_distortion(&self, v: &[usize], vhat: &[usize]) -> f64 {
        let total: f64 = v.iter().zip(vhat).map(|(&a, &b)| self.d[a][b]).sum();
        total / v.len().max(1) as f64
    }

    fn check_source(&self, source: &Pmf) -> Result<()> {
        if source.len() != self.v_alphabet.size() {
            return Err(Error::AlphabetMismatch(format!(
                "source has {} symbols, distortion measure has {} rows",
                source.len(),
                self.v_alphabet.size()
            )));
        }
        Ok(())
    }

    /// Smallest achievable expected distortion, `sum_x p(x) min_vhat d(x, vhat)`.
    pub fn min_distortion(&self, source: &Pmf) -> f64 {
        self.d
            .iter()
            .zip(source.probs())
            .map(|(row, &p)| p * row.iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Distortion of the best constant reproduction, where the rate is 0.
    pub fn zero_rate_distortion(&self, source: &Pmf) -> (f64, usize) {
        (0..self.vhat_alphabet.size())
            .map(|j| (self.d.iter().zip(source.probs()).map(|(row, &p)| p * row[j]).sum::<f64>(), j))
            .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdPoint {
    pub distortion: f64,
    pub rate: f64,
    pub slope: f64,
    /// `P(vhat | x)`, one row per source symbol.
    pub test_channel: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl RdPoint {
    /// Reproduction marginal `sum_x p(x) P(vhat | x)`.
    pub fn output_marginal(&self, source: &Pmf) -> Vec<f64> {
        let mut q = vec![0.0; self.test_channel.first().map_or(0, Vec::len)];
        for (row, &p) in self.test_channel.iter().zip(source.probs()) {
            for (qj, &w) in q.iter_mut().zip(row) {
                *qj += p * w;
            }
        }
        q
    }

    pub fn joint(&self, source: &Pmf) -> JointPmf {
        let rows = self
            .test_channel
            .iter()
            .zip(source.probs())
            .map(|(row, &p)| row.iter().map(|&w| p * w).collect())
            .collect();
        JointPmf::from_rows(rows).expect("test channel rows are normalized")
    }
}

fn point_from_channel(source: &Pmf, measure: &DistortionMeasure, q: Vec<Vec<f64>>, slope: f64, iterations: usize) -> RdPoint {
    let distortion = q
        .iter()
        .zip(source.probs())
        .zip(measure.rows())
        .map(|((row, &p), drow)| p * row.iter().zip(drow).map(|(w, d)| w * d).sum::<f64>())
        .sum();
    let mut point = RdPoint {
        distortion,
        rate: 0.0,
        slope,
        test_channel: q,
        iterations,
    };
    point.rate = prob::mutual_information(&point.joint(source)).max(0.0);
    point
}

/// Blahut-Arimoto at slope `s <= 0`: minimizes `I(X; Vhat) - s E d`. Stops
/// when the Lagrangian is within `tol` of its dual lower bound.
pub fn blahut_arimoto_rd_with(
    source: &Pmf,
    measure: &DistortionMeasure,
    slope: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RdPoint> {
    let (point, gap) = solve_rd(source, measure, slope, tol, max_iter)?;
    if gap <= tol {
        Ok(point)
    } else {
        Err(Error::NotConverged {
            what: "rate-distortion Blahut-Arimoto",
            iterations: max_iter,
            residual: gap,
        })
    }
}

/// Last iterate and its duality gap.
fn solve_rd(source: &Pmf, measure: &DistortionMeasure, slope: f64, tol: f64, max_iter: usize) -> Result<(RdPoint, f64)> {
    measure.check_source(source)?;
    if !(slope <= 0.0) || !slope.is_finite() {
        return Err(Error::InvalidParams(format!("slope {slope} must be finite and <= 0")));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParams("tol must be positive and max_iter nonzero".into()));
    }
    let p = source.probs();
    let nv = measure.vhat_alphabet.size();
    // exponent s (d - d_min(x)) keeps the row weights away from underflow
    let weights: Vec<Vec<f64>> = measure
        .rows()
        .iter()
        .map(|row| {
            let dmin = row.iter().copied().fold(f64::INFINITY, f64::min);
            row.iter().map(|&d| (slope * (d - dmin)).exp2()).collect()
        })
        .collect();
    let shift: f64 = measure
        .rows()
        .iter()
        .zip(p)
        .map(|(row, &px)| px * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum();
    let mut q = vec![1.0 / nv as f64; nv];
    let mut c = vec![0.0; p.len()];
    let mut last = None;
    for it in 1..=max_iter {
        for (cx, w) in c.iter_mut().zip(&weights) {
            *cx = w.iter().zip(&q).map(|(a, b)| a * b).sum();
        }
        let cv: Vec<f64> = (0..nv)
            .map(|j| {
                weights
                    .iter()
                    .zip(p)
                    .zip(&c)
                    .filter(|((_, &px), _)| px > 0.0)
                    .map(|((w, &px), &cx)| px * w[j] / cx)
                    .sum()
            })
            .collect();
        let channel: Vec<Vec<f64>> = weights
            .iter()
            .zip(&c)
            .map(|(w, &cx)| w.iter().zip(&q).map(|(a, b)| a * b / cx).collect())
            .collect();
        let point = point_from_channel(source, measure, channel, slope, it);
        let lagrangian = point.rate - slope * point.distortion;
        let sum_log_c: f64 = p.iter().zip(&c).filter(|(&px, _)| px > 0.0).map(|(px, cx)| px * cx.log2()).sum();
        let max_log_cv = cv
            .iter()
            .zip(&q)
            .filter(|(_, &qj)| qj > 0.0)
            .map(|(v, _)| v.log2())
            .fold(f64::NEG_INFINITY, f64::max);
        let dual = -sum_log_c - max_log_cv - slope * shift;
        let gap = lagrangian - dual;
        if gap <= tol {
            return Ok((point, gap));
        }
        last = Some((point, gap));
        for (qj, v) in q.iter_mut().zip(&cv) {
            *qj *= v;
        }
        let z: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= z);
    }
    Ok(last.expect("max_iter is nonzero"))
}

pub fn blahut_arimoto_rd(source: &Pmf, measure: &DistortionMeasure, slope: f64) -> Result<RdPoint> {
    blahut_arimoto_rd_with(source, measure, slope, DEFAULT_RD_TOL, DEFAULT_RD_MAX_ITER)
}

/// Near a slope where a reproduction symbol drops out the iteration slows
/// to a crawl; curve points accept a gap up to this after the budget.
pub const RD_ACCEPT_GAP: f64 = 1e-8;

fn curve_point(source: &Pmf, measure: &DistortionMeasure, slope: f64) -> Result<RdPoint> {
    let (point, gap) = solve_rd(source, measure, slope, DEFAULT_RD_TOL, DEFAULT_RD_MAX_ITER)?;
    if gap <= RD_ACCEPT_GAP {
        Ok(point)
    } else {
        Err(Error::NotConverged {
            what: "rate-distortion Blahut-Arimoto",
            iterations: DEFAULT_RD_MAX_ITER,
            residual: gap,
        })
    }
}

/// The zero-distortion-limit point: each source symbol reproduced by its
/// cheapest reproduction symbol (first on ties).
fn min_distortion_point(source: &Pmf, measure: &DistortionMeasure) -> RdPoint {
    let nv = measure.vhat_alphabet.size();
    let channel = measure
        .rows()
        .iter()
        .map(|row| {
            let best = (0..nv).fold(0, |b, j| if row[j] < row[b] { j } else { b });
            (0..nv).map(|j| f64::from(u8::from(j == best))).collect()
        })
        .collect();
    point_from_channel(source, measure, channel, f64::NEG_INFINITY, 0)
}

fn zero_rate_point(source: &Pmf, measure: &DistortionMeasure) -> RdPoint {
    let (_, best) = measure.zero_rate_distortion(source);
    let nv = measure.vhat_alphabet.size();
    let row: Vec<f64> = (0..nv).map(|j| f64::from(u8::from(j == best))).collect();
    point_from_channel(source, measure, vec![row; source.len()], 0.0, 0)
}

fn has_unique_minimizers(measure: &DistortionMeasure) -> bool {
    measure.rows().iter().all(|row| {
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        row.iter().filter(|&&d| d == m).count() == 1
    })
}

/// `R(D)` at a target distortion, by bisection on the slope.
pub fn rd_at_distortion(source: &Pmf, measure: &DistortionMeasure, target: f64) -> Result<RdPoint> {
    measure.check_source(source)?;
    let d_min = measure.min_distortion(source);
    let (d_zero, _) = measure.zero_rate_distortion(source);
    if !(target >= d_min - 1e-12) {
        return Err(Error::InvalidParams(format!(
            "target distortion {target} below the minimum achievable {d_min}"
        )));
    }
    if target >= d_zero {
        return Ok(zero_rate_point(source, measure));
    }
    if target <= d_min + DISTORTION_TOL && has_unique_minimizers(measure) {
        return Ok(min_distortion_point(source, measure));
    }
    // D(s) increases with s; find a bracket [lo, hi] with D(lo) <= target < D(hi)
    let mut hi = 0.0;
    let mut at_hi = zero_rate_point(source, measure);
    let mut lo = -1.0;
    let mut at_lo = curve_point(source, measure, lo)?;
    while at_lo.distortion > target {
        hi = lo;
        at_hi = at_lo;
        lo *= 2.0;
        if lo < -1e6 {
            return Ok(at_hi);
        }
        at_lo = curve_point(source, measure, lo)?;
    }
    for _ in 0..200 {
        if target - at_lo.distortion <= DISTORTION_TOL {
            return Ok(at_lo);
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        // a stalled solve means mid sits on a kink of D(s)
        let Ok(pt) = curve_point(source, measure, mid) else { break };
        if pt.distortion <= target {
            lo = mid;
            at_lo = pt;
        } else {
            hi = mid;
            at_hi = pt;
        }
    }
    Ok(time_share(source, measure, &at_lo, &at_hi, target))
}

/// The target lies on a straight piece of the curve: mix the test channels
/// of the bracket ends so the distortion lands on it exactly.
fn time_share(source: &Pmf, measure: &DistortionMeasure, lo: &RdPoint, hi: &RdPoint, target: f64) -> RdPoint {
    let span = hi.distortion - lo.distortion;
    let w = if span > 0.0 { ((hi.distortion - target) / span).clamp(0.0, 1.0) } else { 1.0 };
    let channel = lo
        .test_channel
        .iter()
        .zip(&hi.test_channel)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| w * x + (1.0 - w) * y).collect())
        .collect();
    let slope = if span > 0.0 { (hi.rate - lo.rate) / span } else { lo.slope };
    point_from_channel(source, measure, channel, slope, lo.iterations + hi.iterations)
}

/// `num_points` points on the curve at equally spaced distortions between
/// the zero-distortion limit and the zero-rate distortion.
pub fn rd_curve(source: &Pmf, measure: &DistortionMeasure, num_points: usize) -> Result<Vec<RdPoint>> {
    if num_points < 2 {
        return Err(Error::InvalidParams("rd_curve needs at least two points".into()));
    }
    measure.check_source(source)?;
    let d_min = measure.min_distortion(source);
    let (d_zero, _) = measure.zero_rate_distortion(source);
    if d_zero - d_min <= 1e-12 {
        return Err(Error::InvalidParams("distortion range is degenerate; R(D) = 0 everywhere".into()));
    }
    let last = num_points - 1;
    (0..num_points)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                if has_unique_minimizers(measure) {
                    return Ok(min_distortion_point(source, measure));
                }
                return rd_at_distortion(source, measure, d_min);
            }
            if i == last {
                return Ok(zero_rate_point(source, measure));
            }
            rd_at_distortion(source, measure, d_min + (d_zero - d_min) * i as f64 / last as f64)
        })
        .collect()
}
