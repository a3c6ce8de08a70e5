//! Stationary ergodic sources over finite alphabets: i.i.d. and first-order
//! Markov. Sequence probabilities are carried as `log2` values.

use std::collections::VecDeque;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{self, normalize_probs, Alphabet, Pmf};
use crate::rng::{self, tag};

/// Symbol indices into a source alphabet.
pub type Sequence = Vec<usize>;

pub const STATIONARY_TOL: f64 = 1e-12;
pub const STATIONARY_MAX_ITER: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceSample {
    pub symbols: Sequence,
    pub log2_prob: f64,
}

#[derive(Clone, Debug)]
pub struct IidSource {
    pmf: Pmf,
    cdf: Vec<f64>,
    log2: Vec<f64>,
}

impl IidSource {
    pub fn new(pmf: Pmf) -> Self {
        let cdf = pmf.cdf();
        let log2 = pmf.log2_probs();
        Self { pmf, cdf, log2 }
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }
}

#[derive(Clone, Debug)]
pub struct MarkovSource {
    alphabet: Alphabet,
    k: usize,
    transition: Vec<f64>,
    stationary: Pmf,
    row_cdfs: Vec<Vec<f64>>,
    log2_transition: Vec<f64>,
    log2_stationary: Vec<f64>,
}

impl MarkovSource {
    /// Builds the chain, rejecting non-ergodic transition matrices.
    pub fn new(alphabet: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = alphabet.size();
        if rows.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: rows.len(),
            });
        }
        let mut transition = Vec::with_capacity(k * k);
        for (i, mut row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            normalize_probs(&mut row, &format!("transition row {i}"))?;
            transition.extend(row);
        }
        check_ergodic(k, &transition)?;
        let stationary = Pmf::new(alphabet.clone(), stationary_distribution(k, &transition)?)?;
        let row_cdfs = transition
            .chunks(k)
            .map(|r| Pmf::from_probs(r.to_vec()).map(|p| p.cdf()))
            .collect::<Result<Vec<_>>>()?;
        let log2_transition = transition.iter().map(|p| p.log2()).collect();
        let log2_stationary = stationary.log2_probs();
        Ok(Self {
            alphabet,
            k,
            transition,
            stationary,
            row_cdfs,
            log2_transition,
            log2_stationary,
        })
    }

    /// Two-state chain that flips state with probability `flip`.
    pub fn symmetric_binary(flip: f64) -> Result<Self> {
        Self::new(
            Alphabet::indexed(2),
            vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]],
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.k + to]
    }

    pub fn transition_rows(&self) -> Vec<Vec<f64>> {
        self.transition.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    pub fn stationary(&self) -> &Pmf {
        &self.stationary
    }
}

fn check_ergodic(k: usize, t: &[f64]) -> Result<()> {
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..k {
                let w = if forward { t[u * k + v] } else { t[v * k + u] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    if !reach(true) || !reach(false) {
        return Err(Error::NotErgodic("transition graph is not strongly connected".into()));
    }
    // BFS levels; the period is the gcd of level(u) + 1 - level(v) over all edges.
    let mut level = vec![usize::MAX; k];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in 0..k {
            if t[u * k + v] > 0.0 && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0usize;
    for u in 0..k {
        for v in 0..k {
            if t[u * k + v] > 0.0 {
                let diff = (level[u] + 1).abs_diff(level[v]);
                period = gcd(period, diff);
            }
        }
    }
    if period != 1 {
        return Err(Error::NotErgodic(format!("chain is periodic with period {period}")));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Direct solve of `pi (T - I) = 0, sum pi = 1`, then power-iteration polish.
fn stationary_distribution(k: usize, t: &[f64]) -> Result<Vec<f64>> {
    // Augmented system A pi = b, with A = (T^T - I) and the last row replaced by ones.
    let mut a = vec![0.0; k * (k + 1)];
    for i in 0..k {
        for j in 0..k {
            a[i * (k + 1) + j] = t[j * k + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[(k - 1) * (k + 1) + j] = 1.0;
    }
    a[(k - 1) * (k + 1) + k] = 1.0;
    let w = k + 1;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
            .unwrap();
        if pivot != col {
            for c in 0..w {
                a.swap(pivot * w + c, col * w + c);
            }
        }
        let p = a[col * w + col];
        if p.abs() < 1e-300 {
            continue;
        }
        for r in 0..k {
            if r != col {
                let f = a[r * w + col] / p;
                if f != 0.0 {
                    for c in col..w {
                        a[r * w + c] -= f * a[col * w + c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..k)
        .map(|i| {
            let d = a[i * w + i];
            if d.abs() < 1e-300 {
                1.0 / k as f64
            } else {
                (a[i * w + k] / d).max(0.0)
            }
        })
        .collect();
    let mut residual = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITER {
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
        let next: Vec<f64> = (0..k).map(|j| (0..k).map(|i| pi[i] * t[i * k + j]).sum()).collect();
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if residual <= STATIONARY_TOL {
            let s: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= s);
            return Ok(pi);
        }
    }
    Err(Error::NotConverged {
        what: "stationary distribution",
        iterations: STATIONARY_MAX_ITER,
        residual,
    })
}

#[derive(Clone, Debug)]
pub enum Source {
    Iid(IidSource),
    Markov(MarkovSource),
}

impl From<IidSource> for Source {
    fn from(s: IidSource) -> Self {
        Source::Iid(s)
    }
}

impl From<MarkovSource> for Source {
    fn from(s: MarkovSource) -> Self {
        Source::Markov(s)
    }
}

impl From<Pmf> for Source {
    fn from(p: Pmf) -> Self {
        Source::Iid(IidSource::new(p))
    }
}

impl Source {
    pub fn iid(pmf: Pmf) -> Self {
        Source::Iid(IidSource::new(pmf))
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Ok(Self::iid(Pmf::bernoulli(p)?))
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Source::Iid(s) => s.pmf.alphabet(),
            Source::Markov(m) => &m.alphabet,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet().size()
    }

    /// Single-letter law: the pmf for i.i.d., the stationary law for Markov.
    pub fn marginal(&self) -> &Pmf {
        match self {
            Source::Iid(s) => &s.pmf,
            Source::Markov(m) => &m.stationary,
        }
    }

    pub fn is_memoryless(&self) -> bool {
        matches!(self, Source::Iid(_))
    }

    /// Exact `log2 P(seq)`; `-inf` for impossible sequences.
    pub fn log2_prob(&self, seq: &[usize]) -> f64 {
        match self {
            Source::Iid(s) => seq.iter().map(|&x| s.log2[x]).sum(),
            Source::Markov(m) => {
                let Some((&first, _)) = seq.split_first() else {
                    return 0.0;
                };
                let mut lp = m.log2_stationary[first];
                for w in seq.windows(2) {
                    lp += m.log2_transition[w[0] * m.k + w[1]];
                }
                lp
            }
        }
    }

    /// Log-probability contribution of appending `next` after `prev`
    /// (`prev = None` at the start of the sequence).
    #[inline]
    pub(crate) fn log2_step(&self, prev: Option<usize>, next: usize) -> f64 {
        match self {
            Source::Iid(s) => s.log2[next],
            Source::Markov(m) => match prev {
                None => m.log2_stationary[next],
                Some(p) => m.log2_transition[p * m.k + next],
            },
        }
    }

    /// Fills `out` with a draw of length `out.len()` and returns its log2 probability.
    pub(crate) fn draw_into(&self, rng: &mut impl RngCore, out: &mut [usize]) -> f64 {
        match self {
            Source::Iid(s) => {
                let mut lp = 0.0;
                for x in out.iter_mut() {
                    *x = rng::categorical(rng, &s.cdf);
                    lp += s.log2[*x];
                }
                lp
            }
            Source::Markov(m) => {
                let mut lp = 0.0;
                let mut prev: Option<usize> = None;
                let stationary_cdf = m.stationary.cdf();
                for x in out.iter_mut() {
                    *x = match prev {
                        None => rng::categorical(rng, &stationary_cdf),
                        Some(p) => rng::categorical(rng, &m.row_cdfs[p]),
                    };
                    lp += self.log2_step(prev, *x);
                    prev = Some(*x);
                }
                lp
            }
        }
    }

    /// Like [`Source::draw_into`] without the log-probability.
    pub(crate) fn draw_symbols_into(&self, rng: &mut impl RngCore, out: &mut [usize]) {
        match self {
            Source::Iid(s) => {
                for x in out.iter_mut() {
                    *x = rng::categorical(rng, &s.cdf);
                }
            }
            Source::Markov(_) => {
                self.draw_into(rng, out);
            }
        }
    }

    pub fn sample_with(&self, rng: &mut impl RngCore, n: usize) -> SequenceSample {
        let mut symbols = vec![0; n];
        let log2_prob = self.draw_into(rng, &mut symbols);
        SequenceSample { symbols, log2_prob }
    }

    /// Draws a length-`n` sequence, deterministic in `seed`. Markov
    /// sequences start from the stationary law.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SequenceSample> {
        if n == 0 {
            return Err(Error::InvalidParams("sequence length must be at least 1".into()));
        }
        Ok(self.sample_with(&mut rng::stream(seed, tag::SAMPLE, 0), n))
    }

    /// Entropy rate in bits per symbol.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            Source::Iid(s) => prob::entropy(&s.pmf),
            Source::Markov(m) => {
                let mut h = 0.0;
                for i in 0..m.k {
                    let row = &m.transition[i * m.k..(i + 1) * m.k];
                    let hi: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
                    h += m.stationary.prob(i) * hi;
                }
                h
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmpiricalRate {
    pub mean: f64,
    pub std: f64,
}

/// Monte Carlo estimate of `-(1/n) log2 P(X^n)`. Trial `t` uses its own
/// stream derived from `(seed, t)`.
pub fn empirical_entropy_rate(source: &Source, n: usize, trials: usize, seed: u64) -> Result<EmpiricalRate> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParams("n and trials must be at least 1".into()));
    }
    let mut buf = vec![0; n];
    let values: Vec<f64> = (0..trials as u64)
        .map(|t| {
            let lp = source.draw_into(&mut rng::stream(seed, tag::SAMPLE, t), &mut buf);
            -lp / n as f64
        })
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / trials as f64;
    Ok(EmpiricalRate {
        mean,
        std: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn degenerate_source_samples_ones() {
        let s = Source::bernoulli(1.0).unwrap();
        let x = s.sample(5, 42).unwrap();
        assert_eq!(x.symbols, vec![1; 5]);
        assert_eq!(x.log2_prob, 0.0);
    }

    #[test]
    fn fair_coin_sequences_equiprobable() {
        let s = Source::bernoulli(0.5).unwrap();
        for seed in 0..10 {
            assert_eq!(s.sample(8, seed).unwrap().log2_prob, -8.0);
        }
    }

    #[test]
    fn markov_chain_rule() {
        let m: Source = MarkovSource::symmetric_binary(0.1).unwrap().into();
        let expected = (0.5f64 * 0.9 * 0.9).log2();
        assert_abs_diff_eq!(m.log2_prob(&[0, 0, 0]), expected, epsilon = 1e-14);
        // sample() reports the same exact probability as log2_prob
        let x = m.sample(3, 9).unwrap();
        assert_abs_diff_eq!(x.log2_prob, m.log2_prob(&x.symbols), epsilon = 1e-14);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let m: Source = MarkovSource::symmetric_binary(0.3).unwrap().into();
        assert_eq!(m.sample(100, 5).unwrap(), m.sample(100, 5).unwrap());
        assert_ne!(m.sample(100, 5).unwrap(), m.sample(100, 6).unwrap());
    }

    #[test]
    fn entropy_rate_examples() {
        assert_abs_diff_eq!(Source::bernoulli(0.2).unwrap().entropy_rate(), 0.721928094887, epsilon = 1e-12);
        let m: Source = MarkovSource::symmetric_binary(0.1).unwrap().into();
        assert_abs_diff_eq!(m.entropy_rate(), h2(0.1), epsilon = 1e-14);
        assert_abs_diff_eq!(m.entropy_rate(), 0.468995593589, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_ergodic_chains() {
        let identity = MarkovSource::new(Alphabet::indexed(2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(identity, Err(Error::NotErgodic(_))));
        let periodic = MarkovSource::new(Alphabet::indexed(2), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(periodic, Err(Error::NotErgodic(_))));
        let bad_row = MarkovSource::new(Alphabet::indexed(2), vec![vec![0.5, 0.6], vec![0.5, 0.5]]);
        assert!(matches!(bad_row, Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn stationary_law_is_fixed_point() {
        let rows = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.8, 0.1], vec![0.3, 0.3, 0.4]];
        let m = MarkovSource::new(Alphabet::indexed(3), rows.clone()).unwrap();
        let pi = m.stationary().probs();
        for j in 0..3 {
            let s: f64 = (0..3).map(|i| pi[i] * rows[i][j]).sum();
            assert_abs_diff_eq!(s, pi[j], epsilon = 1e-10);
        }
        // conditioning reduces entropy
        let src: Source = m.clone().into();
        assert!(src.entropy_rate() <= prob::entropy(m.stationary()) + 1e-12);
    }

    #[test]
    fn empirical_rate_of_fair_coin_is_exact() {
        let s = Source::bernoulli(0.5).unwrap();
        let r = empirical_entropy_rate(&s, 37, 50, 1).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn empirical_rate_concentrates() {
        let s = Source::bernoulli(0.2).unwrap();
        let r = empirical_entropy_rate(&s, 1000, 1000, 11).unwrap();
        assert!((r.mean - 0.721928).abs() < 0.03, "{r:?}");
        let m: Source = MarkovSource::symmetric_binary(0.1).unwrap().into();
        let r = empirical_entropy_rate(&m, 2000, 500, 11).unwrap();
        assert!((r.mean - 0.468995).abs() < 0.03, "{r:?}");
    }

    #[test]
    fn empirical_std_shrinks_with_length() {
        for source in [Source::bernoulli(0.2).unwrap(), MarkovSource::symmetric_binary(0.1).unwrap().into()] {
            let stds: Vec<f64> = [100, 400, 1600]
                .iter()
                .map(|&n| empirical_entropy_rate(&source, n, 400, 3).unwrap().std)
                .collect();
            assert!(stds[0] > stds[1] && stds[1] > stds[2], "{stds:?}");
        }
    }
}
