//! Embedding-space accounting and the constructive codecs: typical-set
//! codebooks, random codebooks and joint-typicality decoding.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::sources::{Sequence, Source};
use crate::typicality::{
    decode_sequence, encode_sequence, within_epsilon, Enumeration, JointTypicalityContext, TypicalSet,
    DEFAULT_ENUMERATION_CAP,
};

/// `q` coordinates of `b` bits each, so `Q_z = q b` bits in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingSpace {
    pub q: usize,
    pub bits_per_coord: u32,
}

impl EmbeddingSpace {
    pub fn new(q: usize, bits_per_coord: u32) -> Result<Self> {
        if q == 0 || bits_per_coord == 0 || bits_per_coord > 63 {
            return Err(Error::InvalidParams(format!(
                "embedding space needs q >= 1 and 1 <= b <= 63 (got q = {q}, b = {bits_per_coord})"
            )));
        }
        Ok(Self { q, bits_per_coord })
    }

    /// `Q_z = q b`.
    pub fn capacity_bits(&self) -> u64 {
        self.q as u64 * u64::from(self.bits_per_coord)
    }

    /// Whether `count` points fit in `2^{Q_z}`.
    pub fn holds(&self, count: u64) -> bool {
        self.capacity_bits() >= 64 || count <= 1u64 << self.capacity_bits()
    }

    /// Coordinates of embedding point `index`: its base-`2^b` digits, least
    /// significant coordinate first. Index 0 is the all-zeros tuple.
    pub fn tuple(&self, mut index: u64) -> Vec<u64> {
        let mask = (1u64 << self.bits_per_coord) - 1;
        let mut out = vec![0; self.q];
        for c in out.iter_mut() {
            *c = index & mask;
            index >>= self.bits_per_coord;
        }
        out
    }
}

/// Embedding bits per input symbol, `q b / n`.
pub fn representation_rate(space: &EmbeddingSpace, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    Ok(space.capacity_bits() as f64 / n as f64)
}

/// One inequality `lhs >= rhs` (or `lhs < rhs` when `strict_below`), in bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityCheck {
    pub name: &'static str,
    pub relation: &'static str,
    pub lhs_bits: f64,
    pub rhs_bits: f64,
    /// Positive or zero when the inequality holds.
    pub margin_bits: f64,
    pub holds: bool,
}

/// Optional quantities for [`feasibility_report`]; entropies in bits per symbol.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FeasibilityInputs {
    pub source_entropy: f64,
    pub epsilon_z: Option<f64>,
    pub channel_mutual_information: Option<f64>,
    pub rd_mutual_information: Option<f64>,
    /// Output length `d` and output alphabet size `|V|`.
    pub output: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub n: usize,
    pub capacity_bits: u64,
    pub representation_rate: f64,
    pub checks: Vec<FeasibilityCheck>,
}

impl FeasibilityReport {
    pub fn check(&self, name: &str) -> Option<&FeasibilityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const MARGIN_TOL: f64 = 1e-9;

fn at_least(name: &'static str, lhs: f64, rhs: f64) -> FeasibilityCheck {
    let margin = lhs - rhs;
    FeasibilityCheck {
        name,
        relation: ">=",
        lhs_bits: lhs,
        rhs_bits: rhs,
        margin_bits: margin,
        holds: margin >= -MARGIN_TOL * rhs.abs().max(1.0),
    }
}

pub fn feasibility_report(space: &EmbeddingSpace, n: usize, inputs: &FeasibilityInputs) -> Result<FeasibilityReport> {
    let rate = representation_rate(space, n)?;
    let qz = space.capacity_bits() as f64;
    let nf = n as f64;
    let h = inputs.source_entropy;
    let mut checks = vec![at_least("source_coverage", qz, nf * h)];
    if let Some(ez) = inputs.epsilon_z {
        checks.push(at_least("source_coverage_with_slack", qz, nf * (h + ez)));
    }
    if let Some(i) = inputs.channel_mutual_information {
        let margin = nf * i - qz;
        checks.push(FeasibilityCheck {
            name: "channel_support",
            relation: "<",
            lhs_bits: qz,
            rhs_bits: nf * i,
            margin_bits: margin,
            holds: margin > 0.0,
        });
    }
    if let Some(i) = inputs.rd_mutual_information {
        checks.push(at_least("rate_distortion", qz, nf * i));
    }
    if let Some((d, v)) = inputs.output {
        checks.push(at_least("output_alphabet", d as f64 * (v as f64).log2(), nf * h));
    }
    Ok(FeasibilityReport {
        n,
        capacity_bits: space.capacity_bits(),
        representation_rate: rate,
        checks,
    })
}

/// Injective map from a set of input sequences to embedding indices.
/// Sequences outside the set map to the fallback index 0.
#[derive(Clone, Debug)]
pub struct EmbeddingCode {
    pub space: Option<EmbeddingSpace>,
    pub n: usize,
    pub alphabet_size: usize,
    /// Embedding index to sequence code.
    codewords: Vec<u64>,
    lookup: HashMap<u64, u64>,
    /// Number of leading codewords that are typical.
    pub typical_count: usize,
    /// Size of the whole typical set.
    pub typical_total: usize,
    /// Exact probability of the represented set.
    pub covered_mass: f64,
}

pub const FALLBACK_INDEX: u64 = 0;

impl EmbeddingCode {
    fn from_codes(
        space: Option<EmbeddingSpace>,
        n: usize,
        alphabet_size: usize,
        codewords: Vec<u64>,
        typical_count: usize,
        typical_total: usize,
        covered_mass: f64,
    ) -> Self {
        let lookup = codewords.iter().enumerate().map(|(i, &c)| (c, i as u64)).collect();
        Self {
            space,
            n,
            alphabet_size,
            codewords,
            lookup,
            typical_count,
            typical_total,
            covered_mass,
        }
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Embedding index of `seq`, and whether it is represented.
    pub fn encode(&self, seq: &[usize]) -> (u64, bool) {
        match self.lookup.get(&encode_sequence(seq, self.alphabet_size)) {
            Some(&i) => (i, true),
            None => (FALLBACK_INDEX, false),
        }
    }

    pub fn decode(&self, index: u64) -> Sequence {
        decode_sequence(self.codewords[index as usize], self.alphabet_size, self.n)
    }

    pub fn contains(&self, seq: &[usize]) -> bool {
        self.encode(seq).1
    }

    pub fn embedding(&self, index: u64) -> Option<Vec<u64>> {
        self.space.map(|s| s.tuple(index))
    }
}

/// Typical sequences, most probable first; equal probabilities keep
/// lexicographic order.
fn ordered_members(set: &TypicalSet) -> Vec<(u64, f64)> {
    let mut members: Vec<(u64, f64)> = set.members.iter().copied().zip(set.member_log2_probs.iter().copied()).collect();
    members.sort_by(|a, b| b.1.total_cmp(&a.1));
    members
}

/// One embedding index per typical sequence; errors when the typical set
/// does not fit in the space.
pub fn build_typical_codebook(source: &Source, n: usize, epsilon: f64, space: &EmbeddingSpace) -> Result<EmbeddingCode> {
    let e = Enumeration::new(source, n, DEFAULT_ENUMERATION_CAP)?;
    let set = TypicalSet::from_enumeration(&e, source.entropy_rate(), epsilon);
    if !space.holds(set.len() as u64) {
        return Err(Error::InsufficientRate {
            needed: set.len() as u64,
            available_bits: space.capacity_bits() as f64,
        });
    }
    let members = ordered_members(&set);
    Ok(EmbeddingCode::from_codes(
        Some(*space),
        n,
        set.alphabet_size,
        members.iter().map(|m| m.0).collect(),
        members.len(),
        members.len(),
        set.total_prob,
    ))
}

/// The `budget` sequences a code of that size represents: typical
/// sequences first (most probable first), then atypical ones by decreasing
/// probability when the budget exceeds the typical set.
pub fn build_budget_codebook(source: &Source, n: usize, epsilon: f64, budget: u64) -> Result<EmbeddingCode> {
    if budget == 0 {
        return Err(Error::InvalidParams("codebook budget must be at least 1".into()));
    }
    let e = Enumeration::new(source, n, DEFAULT_ENUMERATION_CAP)?;
    let h = source.entropy_rate();
    let set = TypicalSet::from_enumeration(&e, h, epsilon);
    let mut order = ordered_members(&set);
    let typical_total = order.len();
    let typical_count = order.len().min(budget as usize);
    if (order.len() as u64) < budget {
        let mut rest: Vec<(u64, f64)> = e
            .log2_probs
            .iter()
            .enumerate()
            .filter(|(_, &lp)| lp > f64::NEG_INFINITY && !within_epsilon(-lp / n as f64, h, epsilon))
            .map(|(c, &lp)| (c as u64, lp))
            .collect();
        rest.sort_by(|a, b| b.1.total_cmp(&a.1));
        order.extend(rest);
    }
    order.truncate(budget as usize);
    let covered_mass = order.iter().map(|m| m.1.exp2()).sum();
    Ok(EmbeddingCode::from_codes(
        None,
        n,
        e.alphabet_size,
        order.into_iter().map(|m| m.0).collect(),
        typical_count,
        typical_total,
        covered_mass,
    ))
}

/// Read access to codeword `w` of a codebook of length-`n` sequences.
pub trait Codebook: Sync {
    fn len(&self) -> usize;
    fn n(&self) -> usize;
    fn codeword<'a>(&'a self, w: usize, buf: &'a mut Vec<usize>) -> &'a [usize];
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Codewords drawn i.i.d. from a source, codeword `w` from its own stream.
#[derive(Clone, Debug, Serialize)]
pub struct RandomCodebook {
    pub n: usize,
    pub codewords: Vec<Sequence>,
    /// Codewords equal to some earlier codeword.
    pub collisions: usize,
}

fn draw_codeword(source: &Source, seed: u64, stream_tag: u64, w: usize, out: &mut [usize]) {
    source.draw_symbols_into(&mut rng::stream(seed, stream_tag, w as u64), out);
}

pub fn random_codebook(num_messages: usize, source: &Source, n: usize, seed: u64) -> Result<RandomCodebook> {
    random_codebook_tagged(num_messages, source, n, seed, tag::CODEBOOK)
}

pub fn random_codebook_tagged(
    num_messages: usize,
    source: &Source,
    n: usize,
    seed: u64,
    stream_tag: u64,
) -> Result<RandomCodebook> {
    if num_messages == 0 || n == 0 {
        return Err(Error::InvalidParams("codebook needs M >= 1 and n >= 1".into()));
    }
    let codewords: Vec<Sequence> = (0..num_messages)
        .map(|w| {
            let mut x = vec![0; n];
            draw_codeword(source, seed, stream_tag, w, &mut x);
            x
        })
        .collect();
    let distinct: HashSet<&Sequence> = codewords.iter().collect();
    Ok(RandomCodebook {
        n,
        collisions: num_messages - distinct.len(),
        codewords,
    })
}

impl Codebook for RandomCodebook {
    fn len(&self) -> usize {
        self.codewords.len()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn codeword<'a>(&'a self, w: usize, _buf: &'a mut Vec<usize>) -> &'a [usize] {
        &self.codewords[w]
    }
}

/// Same codewords as [`random_codebook`] with the same seed, generated on
/// demand so very large codebooks need no storage.
#[derive(Clone, Debug)]
pub struct LazyCodebook {
    source: Source,
    n: usize,
    size: usize,
    seed: u64,
    stream_tag: u64,
}

impl LazyCodebook {
    pub fn new(num_messages: usize, source: Source, n: usize, seed: u64) -> Result<Self> {
        Self::tagged(num_messages, source, n, seed, tag::CODEBOOK)
    }

    pub fn tagged(num_messages: usize, source: Source, n: usize, seed: u64, stream_tag: u64) -> Result<Self> {
        if num_messages == 0 || n == 0 {
            return Err(Error::InvalidParams("codebook needs M >= 1 and n >= 1".into()));
        }
        Ok(Self {
            source,
            n,
            size: num_messages,
            seed,
            stream_tag,
        })
    }
}

impl Codebook for LazyCodebook {
    fn len(&self) -> usize {
        self.size
    }

    fn n(&self) -> usize {
        self.n
    }

    fn codeword<'a>(&'a self, w: usize, buf: &'a mut Vec<usize>) -> &'a [usize] {
        buf.resize(self.n, 0);
        draw_codeword(&self.source, self.seed, self.stream_tag, w, buf);
        buf
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeOutcome {
    /// 0-based message index; the fallback is message 0.
    pub index: usize,
    pub no_candidate: bool,
}

/// The smallest `w` whose codeword is jointly typical with `y`, or the
/// fallback message 0 flagged `no_candidate`.
pub fn joint_typicality_decode(y: &[usize], codebook: &impl Codebook, ctx: &JointTypicalityContext) -> DecodeOutcome {
    let fallback = DecodeOutcome {
        index: 0,
        no_candidate: true,
    };
    if y.len() != ctx.n() || codebook.n() != ctx.n() || !ctx.y_typical(y) {
        return fallback;
    }
    let mut buf = Vec::with_capacity(ctx.n());
    for w in 0..codebook.len() {
        let x = codebook.codeword(w, &mut buf);
        if ctx.pair_condition(x, y) && ctx.x_typical(x) {
            return DecodeOutcome {
                index: w,
                no_candidate: false,
            };
        }
    }
    fallback
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportAudit {
    pub q: usize,
    pub total: usize,
    pub distinct_nonzero_count: usize,
    /// `log2` of the distinct non-zero count; 0 when the count is at most 1.
    pub q_tilde: f64,
}

/// Counts the distinct embedding vectors that are not identically zero.
pub fn effective_support_audit<T: AsRef<[f64]>>(embeddings: &[T]) -> Result<SupportAudit> {
    let q = embeddings.first().map_or(0, |e| e.as_ref().len());
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for e in embeddings {
        let e = e.as_ref();
        if e.len() != q {
            return Err(Error::DimensionMismatch { expected: q, found: e.len() });
        }
        if e.iter().any(|&v| v != 0.0) {
            // -0.0 and 0.0 are the same coordinate
            seen.insert(e.iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }).collect());
        }
    }
    let count = seen.len();
    Ok(SupportAudit {
        q,
        total: embeddings.len(),
        distinct_nonzero_count: count,
        q_tilde: if count <= 1 { 0.0 } else { (count as f64).log2() },
    })
}

/// Audit of integer embedding points, e.g. codebook indices mapped through
/// [`EmbeddingSpace::tuple`].
pub fn effective_support_of_indices(space: &EmbeddingSpace, indices: impl IntoIterator<Item = u64>) -> SupportAudit {
    let mut total = 0;
    let distinct: HashSet<u64> = indices.into_iter().inspect(|_| total += 1).filter(|&i| i != 0).collect();
    let count = distinct.len();
    SupportAudit {
        q: space.q,
        total,
        distinct_nonzero_count: count,
        q_tilde: if count <= 1 { 0.0 } else { (count as f64).log2() },
    }
}
