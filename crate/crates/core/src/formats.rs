//! CSV readers and writers for the on-disk formats.
//!
//! Vectors are `symbol,prob` (or `symbol,cost`) tables. Matrices carry the
//! column symbols in the header row and the row symbols in the first column;
//! the corner cell is ignored. Embedding dumps are `id,label,v_1..,z_1..`.

use std::fmt::Write as _;

use crate::channels::DiscreteChannel;
use crate::collapse::{EmbeddingRow, LabeledEmbeddings};
use crate::prob::{Alphabet, JointPmf, Pmf};
use crate::rate_distortion::{DistortionMeasure, RdPoint};
use crate::sources::{MarkovSource, Source};
use crate::typicality::{decode_sequence, TypicalSet};
use crate::{Error, Result};

fn records(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn number(cell: &str, line: usize) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: '{cell}' is not a number")))
}

/// Two-column `symbol,value` table.
fn parse_vector(text: &str, value_name: &str) -> Result<(Vec<String>, Vec<f64>)> {
    let (header, rows) = records(text)?;
    if header.len() != 2 || header[1] != value_name {
        return Err(Error::Parse(format!("expected header 'symbol,{value_name}', found '{}'", header.join(","))));
    }
    let mut symbols = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        symbols.push(row[0].clone());
        values.push(number(&row[1], i + 2)?);
    }
    Ok((symbols, values))
}

pub fn parse_pmf(text: &str) -> Result<Pmf> {
    let (symbols, probs) = parse_vector(text, "prob")?;
    Pmf::new(Alphabet::new(symbols)?, probs)
}

/// Per-input costs aligned to `alphabet`; every symbol must appear once.
pub fn parse_cost(text: &str, alphabet: &Alphabet) -> Result<Vec<f64>> {
    let (symbols, values) = parse_vector(text, "cost")?;
    let mut cost = vec![f64::NAN; alphabet.size()];
    for (s, v) in symbols.iter().zip(values) {
        let i = alphabet
            .index_of(s)
            .ok_or_else(|| Error::AlphabetMismatch(format!("cost symbol '{s}' is not a channel input")))?;
        cost[i] = v;
    }
    if let Some(i) = cost.iter().position(|c| c.is_nan()) {
        return Err(Error::AlphabetMismatch(format!("no cost for input '{}'", alphabet.symbol(i))));
    }
    Ok(cost)
}

/// A matrix with symbol labels on both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub row_symbols: Vec<String>,
    pub col_symbols: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LabeledMatrix {
    fn alphabets(&self) -> Result<(Alphabet, Alphabet)> {
        Ok((Alphabet::new(self.row_symbols.clone())?, Alphabet::new(self.col_symbols.clone())?))
    }
}

pub fn parse_matrix(text: &str) -> Result<LabeledMatrix> {
    let (header, rows) = records(text)?;
    if header.len() < 2 {
        return Err(Error::Parse("matrix header needs a corner cell and at least one column".into()));
    }
    let col_symbols = header[1..].to_vec();
    let mut row_symbols = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "line {}: {} cells, header has {}",
                i + 2,
                row.len(),
                header.len()
            )));
        }
        row_symbols.push(row[0].clone());
        values.push(row[1..].iter().map(|c| number(c, i + 2)).collect::<Result<Vec<_>>>()?);
    }
    if values.is_empty() {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    Ok(LabeledMatrix { row_symbols, col_symbols, rows: values })
}

pub fn parse_joint(text: &str) -> Result<JointPmf> {
    let m = parse_matrix(text)?;
    let (r, c) = m.alphabets()?;
    JointPmf::new(r, c, m.rows)
}

pub fn parse_channel(text: &str) -> Result<DiscreteChannel> {
    let m = parse_matrix(text)?;
    let (r, c) = m.alphabets()?;
    DiscreteChannel::new(r, c, m.rows)
}

pub fn parse_distortion(text: &str) -> Result<DistortionMeasure> {
    let m = parse_matrix(text)?;
    let (r, c) = m.alphabets()?;
    DistortionMeasure::new(r, c, m.rows)
}

pub fn parse_markov(text: &str) -> Result<MarkovSource> {
    let m = parse_matrix(text)?;
    if m.row_symbols != m.col_symbols {
        return Err(Error::AlphabetMismatch("transition matrix rows and columns must list the same symbols".into()));
    }
    MarkovSource::new(Alphabet::new(m.row_symbols)?, m.rows)
}

/// A pmf file, or a transition matrix when `markov` is set.
pub fn parse_source(text: &str, markov: bool) -> Result<Source> {
    if markov {
        Ok(parse_markov(text)?.into())
    } else {
        Ok(parse_pmf(text)?.into())
    }
}

/// Embedding dump. Columns `v_*` are optional regression targets, `z_*`
/// the embedding coordinates; both are taken in header order.
pub fn parse_embeddings(text: &str) -> Result<LabeledEmbeddings> {
    let (header, rows) = records(text)?;
    if header.len() < 3 || header[0] != "id" || header[1] != "label" {
        return Err(Error::Parse("embedding header must start with 'id,label'".into()));
    }
    let mut v_cols = Vec::new();
    let mut z_cols = Vec::new();
    for (i, h) in header.iter().enumerate().skip(2) {
        if h.starts_with("v_") {
            v_cols.push(i);
        } else if h.starts_with("z_") {
            z_cols.push(i);
        } else {
            return Err(Error::Parse(format!("unexpected embedding column '{h}'")));
        }
    }
    if z_cols.is_empty() {
        return Err(Error::Parse("no z_ columns".into()));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Parse(format!("line {}: {} cells, header has {}", i + 2, row.len(), header.len())));
        }
        let pick = |cols: &[usize]| cols.iter().map(|&c| number(&row[c], i + 2)).collect::<Result<Vec<f64>>>();
        out.push(EmbeddingRow {
            id: row[0].clone(),
            label: row[1].clone(),
            target: if v_cols.is_empty() { None } else { Some(pick(&v_cols)?) },
            z: pick(&z_cols)?,
        });
    }
    LabeledEmbeddings::new(z_cols.len(), out)
}

/// Writes a sequence with its symbols; single-character alphabets are
/// concatenated, others separated by spaces.
pub fn format_sequence(seq: &[usize], alphabet: &Alphabet) -> String {
    let sep = if alphabet.symbols().iter().all(|s| s.chars().count() == 1) { "" } else { " " };
    seq.iter().map(|&i| alphabet.symbol(i)).collect::<Vec<_>>().join(sep)
}

pub fn typical_set_csv(set: &TypicalSet, alphabet: &Alphabet) -> String {
    let mut out = String::from("sequence,log2_prob\n");
    for (&code, &lp) in set.members.iter().zip(&set.member_log2_probs) {
        let seq = decode_sequence(code, set.alphabet_size, set.n);
        let _ = writeln!(out, "{},{}", format_sequence(&seq, alphabet), format_float(lp));
    }
    out
}

pub fn rd_curve_csv(points: &[RdPoint]) -> String {
    let mut out = String::from("distortion,rate,slope\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", format_float(p.distortion), format_float(p.rate), format_float(p.slope));
    }
    out
}

/// Twelve significant digits in the shortest form that round-trips them.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:.11e}");
    let rounded: f64 = s.parse().unwrap_or(x);
    // shortest repr of the rounded value, so 0.5 stays 0.5
    let short = format!("{rounded}");
    if short.len() <= 20 {
        short
    } else {
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_roundtrip() {
        let p = parse_pmf("symbol,prob\na,0.25\nb, 0.75\n").unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
        assert_eq!(p.alphabet().symbols(), &["a", "b"]);
        assert!(parse_pmf("sym,p\na,1\n").is_err());
        assert!(parse_pmf("symbol,prob\na,0.3\nb,0.3\n").is_err());
    }

    #[test]
    fn channel_matrix() {
        let c = parse_channel("x\\y,0,1\n0,0.89,0.11\n1,0.11,0.89\n").unwrap();
        assert_eq!(c.inputs(), 2);
        assert_eq!(c.prob(1, 0), 0.11);
        assert!(matches!(parse_channel("x,0,1\n0,1\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn markov_needs_square_labels() {
        assert!(parse_markov(",a,b\na,0.9,0.1\nb,0.1,0.9\n").is_ok());
        assert!(matches!(parse_markov(",a,b\na,0.9,0.1\nc,0.1,0.9\n"), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn cost_aligned_to_alphabet() {
        let a = Alphabet::new(["u", "v"]).unwrap();
        assert_eq!(parse_cost("symbol,cost\nv,2\nu,1\n", &a).unwrap(), vec![1.0, 2.0]);
        assert!(parse_cost("symbol,cost\nv,2\n", &a).is_err());
    }

    #[test]
    fn embeddings_with_targets() {
        let e = parse_embeddings("id,label,v_1,z_1,z_2\n0,a,0.5,1,0\n1,b,1.5,0,1\n").unwrap();
        assert_eq!(e.q(), 2);
        assert_eq!(e.rows()[1].target, Some(vec![1.5]));
        let e = parse_embeddings("id,label,z_1\n0,a,3\n").unwrap();
        assert!(!e.has_targets());
        assert!(parse_embeddings("id,label,w\n0,a,3\n").is_err());
    }

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(0.500084041835472), "0.500084041835");
        assert_eq!(format_float(3.875), "3.875");
        assert_eq!(format_float(1e-20), "1e-20");
        assert_eq!(format_float(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_float(f64::NAN), "");
    }
}
