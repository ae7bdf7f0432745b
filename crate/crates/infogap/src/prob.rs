//! Exact finite-alphabet probability objects and the basic information
//! measures built on them.
//!
//! All logarithms are natural, so every quantity is in nats. Conventions:
//! `0 log 0 = 0`, `0 log(0/0) = 0`, and relative entropy is `+inf` when the
//! left argument is not absolutely continuous with respect to the right.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance accepted on probability normalization at construction time.
/// Rows within this distance of unit mass are renormalized; anything worse
/// is rejected so downstream exact identities stay testable.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("alphabet needs at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol label: {0}")]
    DuplicateSymbol(String),
    #[error("expected {expected} probabilities, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, outside tolerance of 1")]
    NotNormalized { sum: f64 },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("pair index ({x}, {y}) out of alphabet bounds")]
    IndexOutOfBounds { x: usize, y: usize },
    #[error("dataset needs at least one pair")]
    EmptyDataset,
    #[error("eta must lie in (0,1), got {0}")]
    InvalidEta(f64),
}

/// Ordered finite alphabet with distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>) -> Result<Self, ProbError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        let mut seen = std::collections::HashSet::new();
        for s in &symbols {
            if !seen.insert(s.clone()) {
                return Err(ProbError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{prefix}0 .. {prefix}{n-1}`.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self, ProbError> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")).collect())
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
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let symbols = Vec::<String>::deserialize(de)?;
        Alphabet::new(symbols).map_err(serde::de::Error::custom)
    }
}

fn validate_probs(probs: &[f64], expected_len: usize) -> Result<Vec<f64>, ProbError> {
    if probs.len() != expected_len {
        return Err(ProbError::LengthMismatch {
            expected: expected_len,
            got: probs.len(),
        });
    }
    for (index, &value) in probs.iter().enumerate() {
        if !(value >= 0.0) {
            return Err(ProbError::NegativeProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(ProbError::NotNormalized { sum });
    }
    Ok(probs.iter().map(|p| p / sum).collect())
}

/// Probability mass function over a labeled finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "PmfRepr")]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> Self {
        Self {
            alphabet: p.alphabet,
            probs: p.probs,
        }
    }
}

impl<'de> Deserialize<'de> for Pmf {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = PmfRepr::deserialize(de)?;
        Pmf::new(raw.alphabet, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl Pmf {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self, ProbError> {
        let probs = validate_probs(&probs, alphabet.size())?;
        Ok(Self { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Self {
            alphabet,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(alphabet: Alphabet, index: usize) -> Self {
        let mut probs = vec![0.0; alphabet.size()];
        probs[index] = 1.0;
        Self { alphabet, probs }
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

    /// Indices carrying strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.probs[i] > 0.0).collect()
    }

    /// Smallest strictly positive entry.
    pub fn min_positive(&self) -> Option<f64> {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(None, |acc, p| Some(acc.map_or(p, |a: f64| a.min(p))))
    }
}

/// Row-stochastic conditional pmf matrix: one pmf over `to` per `from` symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "ChannelRepr")]
pub struct Channel {
    from: Alphabet,
    to: Alphabet,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    from: Alphabet,
    to: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        Self {
            from: c.from,
            to: c.to,
            rows: c.rows,
        }
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = ChannelRepr::deserialize(de)?;
        Channel::new(raw.from, raw.to, raw.rows).map_err(serde::de::Error::custom)
    }
}

impl Channel {
    pub fn new(from: Alphabet, to: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        if rows.len() != from.size() {
            return Err(ProbError::LengthMismatch {
                expected: from.size(),
                got: rows.len(),
            });
        }
        let rows = rows
            .into_iter()
            .map(|row| validate_probs(&row, to.size()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { from, to, rows })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row
            })
            .collect();
        Self {
            from: alphabet.clone(),
            to: alphabet,
            rows,
        }
    }

    /// Every input mapped through the same output distribution.
    pub fn constant(from: Alphabet, row: Pmf) -> Self {
        let rows = vec![row.probs.clone(); from.size()];
        Self {
            from,
            to: row.alphabet,
            rows,
        }
    }

    pub fn from_alphabet(&self) -> &Alphabet {
        &self.from
    }

    pub fn to_alphabet(&self) -> &Alphabet {
        &self.to
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.rows[index]
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn row_pmf(&self, index: usize) -> Pmf {
        Pmf {
            alphabet: self.to.clone(),
            probs: self.rows[index].clone(),
        }
    }

    /// Chain `self: A -> B` with `next: B -> C` into `A -> C`.
    pub fn compose(&self, next: &Channel) -> Result<Channel, ProbError> {
        if self.to != next.from {
            return Err(ProbError::AlphabetMismatch(
                "inner alphabets differ in channel composition".into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; next.to.size()];
                for (mid, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (j, &q) in next.rows[mid].iter().enumerate() {
                        out[j] += w * q;
                    }
                }
                out
            })
            .collect();
        Ok(Channel {
            from: self.from.clone(),
            to: next.to.clone(),
            rows,
        })
    }
}

/// Joint pmf over a product of two labeled alphabets, row-major in x.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "JointRepr")]
pub struct JointPmf {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    probs: Vec<Vec<f64>>,
}

impl From<JointPmf> for JointRepr {
    fn from(j: JointPmf) -> Self {
        Self {
            x_alphabet: j.x_alphabet,
            y_alphabet: j.y_alphabet,
            probs: j.probs,
        }
    }
}

impl<'de> Deserialize<'de> for JointPmf {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = JointRepr::deserialize(de)?;
        JointPmf::new(raw.x_alphabet, raw.y_alphabet, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl JointPmf {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        probs: Vec<Vec<f64>>,
    ) -> Result<Self, ProbError> {
        if probs.len() != x_alphabet.size() {
            return Err(ProbError::LengthMismatch {
                expected: x_alphabet.size(),
                got: probs.len(),
            });
        }
        let mut total = 0.0;
        for row in &probs {
            if row.len() != y_alphabet.size() {
                return Err(ProbError::LengthMismatch {
                    expected: y_alphabet.size(),
                    got: row.len(),
                });
            }
            for (index, &value) in row.iter().enumerate() {
                if !(value >= 0.0) {
                    return Err(ProbError::NegativeProbability { index, value });
                }
            }
            total += row.iter().sum::<f64>();
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(ProbError::NotNormalized { sum: total });
        }
        let probs = probs
            .into_iter()
            .map(|row| row.into_iter().map(|p| p / total).collect())
            .collect();
        Ok(Self {
            x_alphabet,
            y_alphabet,
            probs,
        })
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    pub fn x_marginal(&self) -> Pmf {
        let probs = self.probs.iter().map(|row| row.iter().sum()).collect();
        Pmf {
            alphabet: self.x_alphabet.clone(),
            probs,
        }
    }

    pub fn y_marginal(&self) -> Pmf {
        let mut probs = vec![0.0; self.y_alphabet.size()];
        for row in &self.probs {
            for (j, &p) in row.iter().enumerate() {
                probs[j] += p;
            }
        }
        Pmf {
            alphabet: self.y_alphabet.clone(),
            probs,
        }
    }

    /// Conditional rows P(y|x). Zero-mass x rows fall back to uniform; they
    /// carry no weight in any expectation.
    pub fn conditional(&self) -> Channel {
        let ny = self.y_alphabet.size();
        let rows = self
            .probs
            .iter()
            .map(|row| {
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    row.iter().map(|p| p / mass).collect()
                } else {
                    vec![1.0 / ny as f64; ny]
                }
            })
            .collect();
        Channel {
            from: self.x_alphabet.clone(),
            to: self.y_alphabet.clone(),
            rows,
        }
    }

    /// Joint Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .flatten()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Transposed view with x and y swapped.
    pub fn swap(&self) -> JointPmf {
        let nx = self.x_alphabet.size();
        let ny = self.y_alphabet.size();
        let mut probs = vec![vec![0.0; nx]; ny];
        for x in 0..nx {
            for y in 0..ny {
                probs[y][x] = self.probs[x][y];
            }
        }
        JointPmf {
            x_alphabet: self.y_alphabet.clone(),
            y_alphabet: self.x_alphabet.clone(),
            probs,
        }
    }
}

/// Finite sequence of (x, y) index pairs over declared alphabets.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "DatasetRepr")]
pub struct LabeledDataset {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    pairs: Vec<(usize, usize)>,
}

impl From<LabeledDataset> for DatasetRepr {
    fn from(d: LabeledDataset) -> Self {
        Self {
            x_alphabet: d.x_alphabet,
            y_alphabet: d.y_alphabet,
            pairs: d.pairs,
        }
    }
}

impl<'de> Deserialize<'de> for LabeledDataset {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = DatasetRepr::deserialize(de)?;
        LabeledDataset::new(raw.x_alphabet, raw.y_alphabet, raw.pairs)
            .map_err(serde::de::Error::custom)
    }
}

impl LabeledDataset {
    pub fn new(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self, ProbError> {
        if pairs.is_empty() {
            return Err(ProbError::EmptyDataset);
        }
        for &(x, y) in &pairs {
            if x >= x_alphabet.size() || y >= y_alphabet.size() {
                return Err(ProbError::IndexOutOfBounds { x, y });
            }
        }
        Ok(Self {
            x_alphabet,
            y_alphabet,
            pairs,
        })
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }
}

/// Uniform floor assumptions on the data marginals and the decoder rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelAssumptions {
    pub eta: f64,
    pub enforce: bool,
}

impl ModelAssumptions {
    pub fn new(eta: f64, enforce: bool) -> Result<Self, ProbError> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(ProbError::InvalidEta(eta));
        }
        Ok(Self { eta, enforce })
    }
}

/// Per-condition result of checking the floor assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub passed: bool,
    pub observed_floor: f64,
    pub violating_symbol: Option<String>,
}

/// Report for the three floor conditions: decoder rows, P_X, and P_Y.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionsReport {
    pub eta: f64,
    pub decoder: AssumptionCheck,
    pub x_marginal: AssumptionCheck,
    pub y_marginal: AssumptionCheck,
}

impl AssumptionsReport {
    pub fn all_passed(&self) -> bool {
        self.decoder.passed && self.x_marginal.passed && self.y_marginal.passed
    }
}

/// Shannon entropy of a pmf in nats. `0 log 0` contributes nothing.
pub fn entropy(p: &Pmf) -> f64 {
    p.probs()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Binary entropy `h(t) = -t log t - (1-t) log(1-t)` in nats.
pub fn binary_entropy(t: f64) -> f64 {
    let mut h = 0.0;
    if t > 0.0 {
        h -= t * t.ln();
    }
    if t < 1.0 {
        h -= (1.0 - t) * (1.0 - t).ln();
    }
    h
}

/// Relative entropy D(p || q) in nats; `+inf` when support(p) is not
/// contained in support(q).
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64, ProbError> {
    if p.alphabet() != q.alphabet() {
        return Err(ProbError::AlphabetMismatch(
            "relative entropy needs a common alphabet".into(),
        ));
    }
    Ok(kl_divergence_raw(p.probs(), q.probs()))
}

/// Relative entropy of raw probability slices, assumed index-aligned.
pub fn kl_divergence_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        sum += pi * (pi / qi).ln();
    }
    sum.max(0.0)
}

/// Conditional entropy H(rows | input) = sum_x p(x) H(row_x).
pub fn conditional_entropy(input: &Pmf, channel: &Channel) -> Result<f64, ProbError> {
    if input.alphabet() != channel.from_alphabet() {
        return Err(ProbError::AlphabetMismatch(
            "conditional entropy needs input alphabet = channel.from".into(),
        ));
    }
    Ok(input
        .probs()
        .iter()
        .zip(channel.rows())
        .map(|(&px, row)| {
            if px == 0.0 {
                0.0
            } else {
                px * row
                    .iter()
                    .filter(|&&v| v > 0.0)
                    .map(|&v| -v * v.ln())
                    .sum::<f64>()
            }
        })
        .sum())
}

/// Conditional relative entropy D(a || b | input) averaged over the input.
pub fn conditional_kl(input: &Pmf, a: &Channel, b: &Channel) -> Result<f64, ProbError> {
    if input.alphabet() != a.from_alphabet()
        || a.from_alphabet() != b.from_alphabet()
        || a.to_alphabet() != b.to_alphabet()
    {
        return Err(ProbError::AlphabetMismatch(
            "conditional relative entropy needs matching alphabets".into(),
        ));
    }
    let mut total = 0.0;
    for (x, &px) in input.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let d = kl_divergence_raw(a.row(x), b.row(x));
        if d.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += px * d;
    }
    Ok(total)
}

/// Mutual information I(input; channel) = D(channel || marginal | input).
pub fn mutual_information(input: &Pmf, channel: &Channel) -> Result<f64, ProbError> {
    if input.alphabet() != channel.from_alphabet() {
        return Err(ProbError::AlphabetMismatch(
            "mutual information needs input alphabet = channel.from".into(),
        ));
    }
    let marginal = output_marginal(input, channel);
    let mut info = 0.0;
    for (x, &px) in input.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (u, &q) in channel.row(x).iter().enumerate() {
            if q > 0.0 {
                info += px * q * (q / marginal[u]).ln();
            }
        }
    }
    Ok(info.max(0.0))
}

fn output_marginal(input: &Pmf, channel: &Channel) -> Vec<f64> {
    let mut marginal = vec![0.0; channel.to_alphabet().size()];
    for (x, &px) in input.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (u, &q) in channel.row(x).iter().enumerate() {
            marginal[u] += px * q;
        }
    }
    marginal
}

/// Output of pushing an input pmf through a channel.
#[derive(Debug, Clone)]
pub struct PushForward {
    /// Row-mix of the channel by the input pmf.
    pub marginal: Pmf,
    /// Joint over (input, output).
    pub joint: JointPmf,
    /// Bayes inverse rows, output -> input. Zero-mass output symbols get a
    /// uniform row; those rows carry zero weight in every risk expression.
    pub bayes_inverse: Channel,
}

/// Push `input` through `channel`, producing the output marginal, the joint
/// over (input, output), and the Bayes inverse rows.
pub fn push_forward(input: &Pmf, channel: &Channel) -> Result<PushForward, ProbError> {
    if input.alphabet() != channel.from_alphabet() {
        return Err(ProbError::AlphabetMismatch(
            "push-forward needs input alphabet = channel.from".into(),
        ));
    }
    let nx = input.len();
    let nu = channel.to_alphabet().size();
    let mut joint = vec![vec![0.0; nu]; nx];
    for x in 0..nx {
        let px = input.prob(x);
        for u in 0..nu {
            joint[x][u] = px * channel.prob(x, u);
        }
    }
    let marginal = output_marginal(input, channel);
    let inverse_rows = (0..nu)
        .map(|u| {
            if marginal[u] > 0.0 {
                (0..nx).map(|x| joint[x][u] / marginal[u]).collect()
            } else {
                vec![1.0 / nx as f64; nx]
            }
        })
        .collect();
    Ok(PushForward {
        marginal: Pmf {
            alphabet: channel.to_alphabet().clone(),
            probs: marginal,
        },
        joint: JointPmf {
            x_alphabet: input.alphabet().clone(),
            y_alphabet: channel.to_alphabet().clone(),
            probs: joint,
        },
        bayes_inverse: Channel {
            from: channel.to_alphabet().clone(),
            to: input.alphabet().clone(),
            rows: inverse_rows,
        },
    })
}

/// Empirical joint distribution of a dataset: probs[x][y] = count(x,y)/n.
pub fn empirical_joint(data: &LabeledDataset) -> JointPmf {
    let nx = data.x_alphabet().size();
    let ny = data.y_alphabet().size();
    let mut probs = vec![vec![0.0; ny]; nx];
    let w = 1.0 / data.n() as f64;
    for &(x, y) in data.pairs() {
        probs[x][y] += w;
    }
    JointPmf {
        x_alphabet: data.x_alphabet().clone(),
        y_alphabet: data.y_alphabet().clone(),
        probs,
    }
}

/// Check the restricted-model floor conditions: decoder rows, P_X and P_Y
/// minima all at least eta.
pub fn validate_assumptions(
    joint: &JointPmf,
    decoder: &Channel,
    assumptions: &ModelAssumptions,
) -> Result<AssumptionsReport, ProbError> {
    if decoder.to_alphabet() != joint.y_alphabet() {
        return Err(ProbError::AlphabetMismatch(
            "decoder output alphabet must match the joint's y alphabet".into(),
        ));
    }
    let eta = assumptions.eta;

    let mut decoder_floor = f64::INFINITY;
    let mut decoder_symbol = None;
    for (u, row) in decoder.rows().iter().enumerate() {
        for (y, &q) in row.iter().enumerate() {
            if q < decoder_floor {
                decoder_floor = q;
                decoder_symbol = Some(format!(
                    "{}|{}",
                    joint.y_alphabet().symbol(y),
                    decoder.from_alphabet().symbol(u)
                ));
            }
        }
    }

    let check_marginal = |pmf: &Pmf| {
        let mut floor = f64::INFINITY;
        let mut symbol = None;
        for (i, &p) in pmf.probs().iter().enumerate() {
            if p < floor {
                floor = p;
                symbol = Some(pmf.alphabet().symbol(i).to_string());
            }
        }
        AssumptionCheck {
            passed: floor >= eta,
            observed_floor: floor,
            violating_symbol: if floor >= eta { None } else { symbol },
        }
    };

    Ok(AssumptionsReport {
        eta,
        decoder: AssumptionCheck {
            passed: decoder_floor >= eta,
            observed_floor: decoder_floor,
            violating_symbol: if decoder_floor >= eta {
                None
            } else {
                decoder_symbol
            },
        },
        x_marginal: check_marginal(&joint.x_marginal()),
        y_marginal: check_marginal(&joint.y_marginal()),
    })
}
