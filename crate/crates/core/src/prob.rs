//! Finite-alphabet probability tables and the basic information measures.
//!
//! Every measure is in bits. The conventions `0 log 0 = 0` and
//! `0 log (0/0) = 0` hold throughout.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tables whose mass is off by more than this are renormalized or rejected.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Largest normalization error that is silently repaired.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// Ordered set of distinct symbol labels. Position defines the symbol index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must not be empty".into()));
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{0, 1, ..., size-1}`.
    pub fn indexed(size: usize) -> Self {
        assert!(size >= 1, "alphabet size must be positive");
        Self {
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

/// Checks entries and total mass, renormalizing small rounding errors.
pub(crate) fn normalize_probs(probs: &mut [f64], what: &str) -> Result<()> {
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || !(0.0..=1.0 + RENORMALIZE_TOL).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} = {p} is not a probability"
            )));
        }
    }
    let total: f64 = probs.iter().sum();
    let off = (total - 1.0).abs();
    if off > RENORMALIZE_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: mass sums to {total}"
        )));
    }
    if off > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(())
}

/// Probability mass function over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.size(),
                found: probs.len(),
            });
        }
        normalize_probs(&mut probs, "pmf")?;
        Ok(Self { alphabet, probs })
    }

    /// Pmf over the indexed alphabet `{0, ..., len-1}`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must not be empty".into()));
        }
        Self::new(Alphabet::indexed(probs.len()), probs)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        Self {
            alphabet,
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// `P(1) = p` over the alphabet `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::from_probs(vec![1.0 - p, p])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Per-symbol `log2 p`, with `-inf` for zero-mass symbols.
    pub fn log2_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|&p| p.log2()).collect()
    }

    pub fn from_log2_probs(alphabet: Alphabet, log2_probs: &[f64]) -> Result<Self> {
        Self::new(alphabet, log2_probs.iter().map(|&l| l.exp2()).collect())
    }

    /// Cumulative distribution, last entry forced to exactly 1.
    pub(crate) fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }
}

/// Joint pmf over a row alphabet and a column alphabet, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    row_alphabet: Alphabet,
    col_alphabet: Alphabet,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(row_alphabet: Alphabet, col_alphabet: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != row_alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: row_alphabet.size(),
                found: rows.len(),
            });
        }
        let cols = col_alphabet.size();
        let mut probs = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            probs.extend(row);
        }
        normalize_probs(&mut probs, "joint pmf")?;
        Ok(Self {
            row_alphabet,
            col_alphabet,
            probs,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidAlphabet("joint table must not be empty".into()));
        }
        Self::new(Alphabet::indexed(r), Alphabet::indexed(c), rows)
    }

    /// Independent coupling `p(x) q(y)`.
    pub fn product(p: &Pmf, q: &Pmf) -> Self {
        let probs = p
            .probs()
            .iter()
            .flat_map(|&a| q.probs().iter().map(move |&b| a * b))
            .collect();
        Self {
            row_alphabet: p.alphabet().clone(),
            col_alphabet: q.alphabet().clone(),
            probs,
        }
    }

    pub(crate) fn from_parts_unchecked(row_alphabet: Alphabet, col_alphabet: Alphabet, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), row_alphabet.size() * col_alphabet.size());
        Self {
            row_alphabet,
            col_alphabet,
            probs,
        }
    }

    pub fn row_alphabet(&self) -> &Alphabet {
        &self.row_alphabet
    }

    pub fn col_alphabet(&self) -> &Alphabet {
        &self.col_alphabet
    }

    pub fn rows(&self) -> usize {
        self.row_alphabet.size()
    }

    pub fn cols(&self) -> usize {
        self.col_alphabet.size()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.probs[row * self.cols() + col]
    }

    /// Flat row-major view.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_marginal(&self) -> Pmf {
        let c = self.cols();
        let probs = self.probs.chunks(c).map(|r| r.iter().sum()).collect();
        Pmf {
            alphabet: self.row_alphabet.clone(),
            probs,
        }
    }

    pub fn col_marginal(&self) -> Pmf {
        let c = self.cols();
        let mut probs = vec![0.0; c];
        for row in self.probs.chunks(c) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Pmf {
            alphabet: self.col_alphabet.clone(),
            probs,
        }
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.rows(), self.cols());
        let mut probs = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                probs[j * r + i] = self.probs[i * c + j];
            }
        }
        Self {
            row_alphabet: self.col_alphabet.clone(),
            col_alphabet: self.row_alphabet.clone(),
            probs,
        }
    }
}

fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

/// `H(X, Y)` of a joint table.
pub fn joint_entropy(j: &JointPmf) -> f64 {
    entropy_of(j.probs())
}

/// `D(p || q)` in bits. Fails when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch(format!(
            "pmfs have sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut d = 0.0;
    for (index, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::AbsoluteContinuityViolated { index, p: a });
        }
        d += a * (a / b).log2();
    }
    Ok(d.max(0.0))
}

/// `I(X; Y) = D(P_XY || P_X P_Y)` in bits.
pub fn mutual_information(j: &JointPmf) -> f64 {
    let px = j.row_marginal();
    let py = j.col_marginal();
    let c = j.cols();
    let mut mi = 0.0;
    for (x, row) in j.probs().chunks(c).enumerate() {
        for (y, &pxy) in row.iter().enumerate() {
            if pxy > 0.0 {
                // the product of marginals can underflow where pxy does not
                mi += pxy * (pxy.log2() - px.prob(x).log2() - py.prob(y).log2());
            }
        }
    }
    mi.max(0.0)
}

/// `H(Y | X)` where rows index `X`.
pub fn conditional_entropy(j: &JointPmf) -> f64 {
    (joint_entropy(j) - entropy(&j.row_marginal())).max(0.0)
}

/// Binary entropy `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}
