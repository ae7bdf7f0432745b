//! Concrete randomized-encoder families: dropout layers over binary inputs
//! (exact Bernoulli form and the CLT approximation for feed-forward
//! pre-activations), their per-unit information-complexity bounds, the
//! dropout-rate cost scan, and the GAN encoder objective with its
//! information penalty.
//!
//! The per-unit bound is the divergence of each unit's conditional Bernoulli
//! law from the best product marginal, which is the input-averaged one;
//! summed over units it dominates the mutual information of the full
//! product channel.

use crate::prob::{mutual_information, Alphabet, Channel, Pmf, ProbError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hidden-configuration enumerations are capped at this many units.
pub const MAX_MATERIALIZED_UNITS: usize = 16;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("inconsistent dimensions: {0}")]
    Dimensions(String),
    #[error("p_out must lie in [0,1], got {0}")]
    BadPOut(f64),
    #[error("{got} hidden units exceed the materialization cap of {cap}")]
    TooManyUnits { got: usize, cap: usize },
    #[error("input pmf needs at least one vector")]
    EmptyInputs,
    #[error("probabilities must be non-negative and sum to 1")]
    BadWeights,
    #[error("discriminator values must lie in [0,1]")]
    BadDiscriminator,
    #[error("grid needs at least two p values in [0,1]")]
    BadGrid,
}

/// Weights, biases, and keep-probability of one dropout layer over d-bit
/// inputs with m hidden units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DropoutEncoderSpec {
    #[serde(rename = "w")]
    pub weights: Vec<Vec<f64>>,
    #[serde(rename = "b")]
    pub biases: Vec<f64>,
    pub p_out: f64,
}

impl DropoutEncoderSpec {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>, p_out: f64) -> Result<Self, EncoderError> {
        let spec = Self {
            weights,
            biases,
            p_out,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.weights.is_empty() {
            return Err(EncoderError::Dimensions("no hidden units".into()));
        }
        let d = self.weights[0].len();
        if d == 0 {
            return Err(EncoderError::Dimensions("zero input width".into()));
        }
        if self.weights.iter().any(|w| w.len() != d) {
            return Err(EncoderError::Dimensions("ragged weight rows".into()));
        }
        if self.biases.len() != self.weights.len() {
            return Err(EncoderError::Dimensions(format!(
                "{} biases for {} units",
                self.biases.len(),
                self.weights.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.p_out) {
            return Err(EncoderError::BadPOut(self.p_out));
        }
        Ok(())
    }

    pub fn hidden_units(&self) -> usize {
        self.weights.len()
    }

    pub fn input_bits(&self) -> usize {
        self.weights[0].len()
    }

    pub fn with_p_out(&self, p_out: f64) -> Result<Self, EncoderError> {
        Self::new(self.weights.clone(), self.biases.clone(), p_out)
    }
}

/// Distribution over a finite list of binary input vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BitInputPmf {
    pub vectors: Vec<Vec<u8>>,
    pub probs: Vec<f64>,
}

impl BitInputPmf {
    pub fn new(vectors: Vec<Vec<u8>>, probs: Vec<f64>) -> Result<Self, EncoderError> {
        if vectors.is_empty() {
            return Err(EncoderError::EmptyInputs);
        }
        let d = vectors[0].len();
        if vectors.iter().any(|v| v.len() != d) {
            return Err(EncoderError::Dimensions("ragged input vectors".into()));
        }
        if probs.len() != vectors.len()
            || probs.iter().any(|&p| p < 0.0)
            || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(EncoderError::BadWeights);
        }
        Ok(Self { vectors, probs })
    }

    pub fn uniform(vectors: Vec<Vec<u8>>) -> Result<Self, EncoderError> {
        let n = vectors.len();
        Self::new(vectors, vec![1.0 / n as f64; n.max(1)])
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Per-unit Bernoulli firing parameters, one row per hidden unit and one
/// column per input vector.
#[derive(Debug, Clone)]
pub struct UnitTable {
    pub params: Vec<Vec<f64>>,
}

impl UnitTable {
    pub fn units(&self) -> usize {
        self.params.len()
    }

    pub fn inputs(&self) -> usize {
        self.params[0].len()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot_bits(w: &[f64], x: &[u8]) -> f64 {
    w.iter()
        .zip(x)
        .map(|(&wi, &xi)| if xi != 0 { wi } else { 0.0 })
        .sum()
}

/// Exact dropout firing table: unit i fires on input x with probability
/// `p_out * sigmoid(b_i + <w_i, x>)`.
pub fn rbm_channel(spec: &DropoutEncoderSpec, inputs: &[Vec<u8>]) -> Result<UnitTable, EncoderError> {
    spec.validate()?;
    let d = spec.input_bits();
    if inputs.iter().any(|x| x.len() != d) {
        return Err(EncoderError::Dimensions(
            "input vectors must match the spec width".into(),
        ));
    }
    let params = spec
        .weights
        .iter()
        .zip(&spec.biases)
        .map(|(w, &b)| {
            inputs
                .iter()
                .map(|x| spec.p_out * sigmoid(b + dot_bits(w, x)))
                .collect()
        })
        .collect();
    Ok(UnitTable { params })
}

/// The full product channel over hidden configurations, materialized only
/// for small unit counts. Output symbols are fire-bit strings with unit 0
/// leftmost.
pub fn materialize_product_channel(
    table: &UnitTable,
    input_labels: &Alphabet,
) -> Result<Channel, EncoderError> {
    let m = table.units();
    if m > MAX_MATERIALIZED_UNITS {
        return Err(EncoderError::TooManyUnits {
            got: m,
            cap: MAX_MATERIALIZED_UNITS,
        });
    }
    if input_labels.size() != table.inputs() {
        return Err(EncoderError::Dimensions(
            "input labels must match the table columns".into(),
        ));
    }
    let size = 1usize << m;
    let labels: Vec<String> = (0..size)
        .map(|idx| {
            (0..m)
                .map(|i| if idx >> i & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    let to = Alphabet::new(labels)?;
    let rows = (0..table.inputs())
        .map(|x| {
            (0..size)
                .map(|idx| {
                    (0..m)
                        .map(|i| {
                            let q = table.params[i][x];
                            if idx >> i & 1 == 1 {
                                q
                            } else {
                                1.0 - q
                            }
                        })
                        .product()
                })
                .collect()
        })
        .collect();
    Ok(Channel::new(input_labels.clone(), to, rows)?)
}

/// KL divergence between Bernoulli laws with parameters `a` and `b`.
pub fn kl_bernoulli(a: f64, b: f64) -> f64 {
    let mut sum = 0.0;
    if a > 0.0 {
        if b == 0.0 {
            return f64::INFINITY;
        }
        sum += a * (a / b).ln();
    }
    if a < 1.0 {
        if b == 1.0 {
            return f64::INFINITY;
        }
        sum += (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    }
    sum.max(0.0)
}

/// Summed per-unit divergence of the table's Bernoulli laws from their
/// input-averaged marginals. Upper-bounds the product-channel information.
pub fn unit_table_ic_bound(table: &UnitTable, probs: &[f64]) -> f64 {
    let mut total = 0.0;
    for row in &table.params {
        let mean: f64 = row.iter().zip(probs).map(|(&q, &p)| p * q).sum();
        for (&q, &p) in row.iter().zip(probs) {
            if p > 0.0 {
                total += p * kl_bernoulli(q, mean);
            }
        }
    }
    total
}

/// Information-complexity bound of the dropout layer under an input pmf.
pub fn rbm_ic_bound(
    spec: &DropoutEncoderSpec,
    input_pmf: &BitInputPmf,
) -> Result<f64, EncoderError> {
    let table = rbm_channel(spec, &input_pmf.vectors)?;
    Ok(unit_table_ic_bound(&table, &input_pmf.probs))
}

/// Soft-max decoder over hidden-configuration vectors: one weight vector of
/// length m per class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SoftmaxDecoderSpec {
    #[serde(rename = "a")]
    pub class_vectors: Vec<Vec<f64>>,
}

impl SoftmaxDecoderSpec {
    pub fn new(class_vectors: Vec<Vec<f64>>) -> Result<Self, EncoderError> {
        if class_vectors.is_empty() || class_vectors[0].is_empty() {
            return Err(EncoderError::Dimensions("empty decoder".into()));
        }
        let m = class_vectors[0].len();
        if class_vectors.iter().any(|v| v.len() != m) {
            return Err(EncoderError::Dimensions("ragged class vectors".into()));
        }
        Ok(Self { class_vectors })
    }

    pub fn classes(&self) -> usize {
        self.class_vectors.len()
    }

    pub fn hidden_units(&self) -> usize {
        self.class_vectors[0].len()
    }

    /// Class probabilities for a hidden configuration given as fire bits.
    pub fn class_probs(&self, fires: &[u8]) -> Vec<f64> {
        let scores: Vec<f64> = self
            .class_vectors
            .iter()
            .map(|a| {
                a.iter()
                    .zip(fires)
                    .map(|(&ai, &ui)| if ui != 0 { ai } else { 0.0 })
                    .sum::<f64>()
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }
}

/// Joint input distribution for the cost scan: vectors with their weights
/// and a conditional class pmf per vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledInputPmf {
    pub vectors: Vec<Vec<u8>>,
    pub probs: Vec<f64>,
    pub label_cond: Vec<Vec<f64>>,
}

impl LabeledInputPmf {
    pub fn new(
        vectors: Vec<Vec<u8>>,
        probs: Vec<f64>,
        label_cond: Vec<Vec<f64>>,
    ) -> Result<Self, EncoderError> {
        let base = BitInputPmf::new(vectors, probs)?;
        if label_cond.len() != base.vectors.len() {
            return Err(EncoderError::Dimensions(
                "need one class pmf per input vector".into(),
            ));
        }
        let ny = label_cond[0].len();
        for row in &label_cond {
            if row.len() != ny
                || row.iter().any(|&p| p < 0.0)
                || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(EncoderError::BadWeights);
            }
        }
        Ok(Self {
            vectors: base.vectors,
            probs: base.probs,
            label_cond,
        })
    }

    pub fn classes(&self) -> usize {
        self.label_cond[0].len()
    }
}

/// One evaluated point of the dropout-rate scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub loss: f64,
    pub ic_bound: f64,
    pub j: f64,
}

/// Result of scanning the penalized cost over dropout rates.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub p_star: f64,
    pub j_star: f64,
    /// Set when the decoder's expected log loss exceeds log|Y| at some
    /// sampled hidden configuration (the scan's interiority argument
    /// assumes it does not).
    pub condition_warning: bool,
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,loss,ic_bound,J\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.p, r.loss, r.ic_bound, r.j));
        }
        out
    }
}

fn expected_loss_at(
    spec: &DropoutEncoderSpec,
    decoder: &SoftmaxDecoderSpec,
    joint: &LabeledInputPmf,
    p: f64,
) -> Result<f64, EncoderError> {
    let spec_p = spec.with_p_out(p)?;
    let table = rbm_channel(&spec_p, &joint.vectors)?;
    let m = table.units();
    let size = 1usize << m;
    let mut loss = 0.0;
    let mut fires = vec![0u8; m];
    for (x, &w) in joint.probs.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for idx in 0..size {
            let mut weight = 1.0;
            for i in 0..m {
                let q = table.params[i][x];
                if idx >> i & 1 == 1 {
                    weight *= q;
                    fires[i] = 1;
                } else {
                    weight *= 1.0 - q;
                    fires[i] = 0;
                }
            }
            if weight == 0.0 {
                continue;
            }
            let class_probs = decoder.class_probs(&fires);
            let f: f64 = joint.label_cond[x]
                .iter()
                .zip(&class_probs)
                .map(|(&py, &q)| if py > 0.0 { py * -q.ln() } else { 0.0 })
                .sum();
            loss += w * weight * f;
        }
    }
    Ok(loss)
}

/// Scan `J(p) = loss(p) + lambda * sqrt(ic_bound(p))` over a grid of
/// dropout rates, then refine around the grid argmin by golden-section
/// search to 1e-4 in p. Exact expectations over all hidden configurations;
/// unit counts above the cap are rejected.
pub fn dropout_cost_scan(
    spec: &DropoutEncoderSpec,
    decoder: &SoftmaxDecoderSpec,
    joint: &LabeledInputPmf,
    lambda: f64,
    grid: &[f64],
) -> Result<ScanResult, EncoderError> {
    if spec.hidden_units() > MAX_MATERIALIZED_UNITS {
        return Err(EncoderError::TooManyUnits {
            got: spec.hidden_units(),
            cap: MAX_MATERIALIZED_UNITS,
        });
    }
    if decoder.hidden_units() != spec.hidden_units() {
        return Err(EncoderError::Dimensions(
            "decoder width must match the hidden units".into(),
        ));
    }
    if decoder.classes() != joint.classes() {
        return Err(EncoderError::Dimensions(
            "decoder classes must match the labels".into(),
        ));
    }
    if grid.len() < 2 || grid.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(EncoderError::BadGrid);
    }

    // Pointwise check of the uniform-loss ceiling over every hidden
    // configuration; a violation voids the interior-optimum argument but is
    // an assumption, not a contract, so it only raises a flag.
    let log_y = (decoder.classes() as f64).ln();
    let m = spec.hidden_units();
    let mut condition_warning = false;
    'outer: for (x, w) in joint.probs.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        for idx in 0..(1usize << m) {
            let fires: Vec<u8> = (0..m).map(|i| (idx >> i & 1) as u8).collect();
            let class_probs = decoder.class_probs(&fires);
            let f: f64 = joint.label_cond[x]
                .iter()
                .zip(&class_probs)
                .map(|(&py, &q)| if py > 0.0 { py * -q.ln() } else { 0.0 })
                .sum();
            if f > log_y + 1e-9 {
                condition_warning = true;
                break 'outer;
            }
        }
    }

    let bit_pmf = BitInputPmf::new(joint.vectors.clone(), joint.probs.clone())?;
    let cost = |p: f64| -> Result<(f64, f64, f64), EncoderError> {
        let loss = expected_loss_at(spec, decoder, joint, p)?;
        let ic = rbm_ic_bound(&spec.with_p_out(p)?, &bit_pmf)?;
        Ok((loss, ic, loss + lambda * ic.sqrt()))
    };

    let mut rows = Vec::with_capacity(grid.len());
    let mut argmin = 0usize;
    for (k, &p) in grid.iter().enumerate() {
        let (loss, ic_bound, j) = cost(p)?;
        if j < rows.get(argmin).map_or(f64::INFINITY, |r: &ScanRow| r.j) {
            argmin = k;
        }
        rows.push(ScanRow {
            p,
            loss,
            ic_bound,
            j,
        });
    }

    // Golden-section refinement between the argmin's grid neighbours.
    let lo = if argmin == 0 { grid[0] } else { grid[argmin - 1] };
    let hi = if argmin + 1 == grid.len() {
        grid[grid.len() - 1]
    } else {
        grid[argmin + 1]
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = cost(c)?.2;
    let mut fd = cost(d)?.2;
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = cost(c)?.2;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = cost(d)?.2;
        }
    }
    let p_star = 0.5 * (a + b);
    let j_star = cost(p_star)?.2.min(rows[argmin].j);

    Ok(ScanResult {
        rows,
        p_star,
        j_star,
        condition_warning,
    })
}

/// Standard normal cumulative distribution (increasing).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Gaussian-approximation firing table for a feed-forward layer whose input
/// connections are masked with keep-probability `p_out`:
/// `Psi((b + p <w,x>) / sqrt(p (1-p) <x o w, x o w>))` per unit, where Psi
/// is the increasing normal cumulative so a larger pre-activation mean gives
/// a larger firing probability. Zero variance degenerates to a step: 1, 0,
/// or 1/2 by the sign of the mean.
pub fn ff_clt_channel(
    spec: &DropoutEncoderSpec,
    inputs: &[Vec<u8>],
) -> Result<UnitTable, EncoderError> {
    spec.validate()?;
    let d = spec.input_bits();
    if inputs.iter().any(|x| x.len() != d) {
        return Err(EncoderError::Dimensions(
            "input vectors must match the spec width".into(),
        ));
    }
    let p = spec.p_out;
    let params = spec
        .weights
        .iter()
        .zip(&spec.biases)
        .map(|(w, &b)| {
            inputs
                .iter()
                .map(|x| {
                    let mean = b + p * dot_bits(w, x);
                    let sq: f64 = w
                        .iter()
                        .zip(x)
                        .map(|(&wi, &xi)| if xi != 0 { wi * wi } else { 0.0 })
                        .sum();
                    let var = p * (1.0 - p) * sq;
                    if var > 0.0 {
                        normal_cdf(mean / var.sqrt())
                    } else if mean > 0.0 {
                        1.0
                    } else if mean < 0.0 {
                        0.0
                    } else {
                        0.5
                    }
                })
                .collect()
        })
        .collect();
    Ok(UnitTable { params })
}

/// Exact firing probability of one masked unit: the mask-enumeration value
/// of `P(b + <w, x o z> > 0)` with `z ~ Bernoulli(p)` per coordinate.
/// Enumeration runs over the active coordinates only.
pub fn exact_fire_probability(w: &[f64], b: f64, p: f64, x: &[u8]) -> f64 {
    let active: Vec<f64> = w
        .iter()
        .zip(x)
        .filter(|(_, &xi)| xi != 0)
        .map(|(&wi, _)| wi)
        .collect();
    let k = active.len();
    assert!(k <= 25, "mask enumeration capped at 25 active coordinates");
    let mut total = 0.0;
    for mask in 0..(1usize << k) {
        let mut weight = 1.0;
        let mut sum = b;
        for (i, &wi) in active.iter().enumerate() {
            if mask >> i & 1 == 1 {
                weight *= p;
                sum += wi;
            } else {
                weight *= 1.0 - p;
            }
        }
        if sum > 0.0 {
            total += weight;
        }
    }
    total
}

/// Data distribution, generator, and discriminator of a two-player model
/// over a common finite alphabet. `discriminator[x]` is the probability
/// assigned to the "real data" label on input x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GanModel {
    pub data_pmf: Pmf,
    pub generator: Pmf,
    pub discriminator: Vec<f64>,
}

impl GanModel {
    pub fn new(data_pmf: Pmf, generator: Pmf, discriminator: Vec<f64>) -> Result<Self, EncoderError> {
        if data_pmf.alphabet() != generator.alphabet() {
            return Err(EncoderError::Prob(ProbError::AlphabetMismatch(
                "data and generator need a common alphabet".into(),
            )));
        }
        if discriminator.len() != data_pmf.len()
            || discriminator.iter().any(|&v| !(0.0..=1.0).contains(&v))
        {
            return Err(EncoderError::BadDiscriminator);
        }
        Ok(Self {
            data_pmf,
            generator,
            discriminator,
        })
    }
}

/// Discriminator loss, the information-complexity bound of the implied
/// encoder, and the penalized objective.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GanObjective {
    pub loss: f64,
    pub ic_bound: f64,
    pub penalized: f64,
}

/// `loss = (1/2) E_data[-log disc] + (1/2) E_gen[-log(1 - disc)]`,
/// `ic_bound = (1/2) E_data[-log G(X)]`, `penalized = loss + lambda
/// sqrt(ic_bound)`. Infinite values propagate rather than error.
pub fn gan_objective(model: &GanModel, lambda: f64) -> GanObjective {
    let mut loss = 0.0;
    for (x, &px) in model.data_pmf.probs().iter().enumerate() {
        if px > 0.0 {
            let d = model.discriminator[x];
            if d == 0.0 {
                loss = f64::INFINITY;
                break;
            }
            loss += 0.5 * px * -d.ln();
        }
    }
    if loss.is_finite() {
        for (x, &gx) in model.generator.probs().iter().enumerate() {
            if gx > 0.0 {
                let d = model.discriminator[x];
                if d == 1.0 {
                    loss = f64::INFINITY;
                    break;
                }
                loss += 0.5 * gx * -(1.0 - d).ln();
            }
        }
    }
    let mut ic_bound = 0.0;
    for (x, &px) in model.data_pmf.probs().iter().enumerate() {
        if px > 0.0 {
            let gx = model.generator.prob(x);
            if gx == 0.0 {
                ic_bound = f64::INFINITY;
                break;
            }
            ic_bound += 0.5 * px * -gx.ln();
        }
    }
    let penalized = if loss.is_finite() && ic_bound.is_finite() {
        loss + lambda * ic_bound.sqrt()
    } else {
        f64::INFINITY
    };
    GanObjective {
        loss,
        ic_bound,
        penalized,
    }
}

/// Exact information of the implied encoder channel: inputs are (x, label)
/// pairs under data x uniform binary label, representations are alphabet
/// symbols; real inputs map to themselves, fake ones through the generator.
pub fn gan_exact_channel_information(model: &GanModel) -> Result<f64, EncoderError> {
    let nx = model.data_pmf.len();
    let pair_labels: Vec<String> = (0..nx)
        .flat_map(|x| {
            let sym = model.data_pmf.alphabet().symbol(x).to_string();
            [format!("{sym}|real"), format!("{sym}|fake")]
        })
        .collect();
    let from = Alphabet::new(pair_labels)?;
    let mut probs = Vec::with_capacity(2 * nx);
    let mut rows = Vec::with_capacity(2 * nx);
    for x in 0..nx {
        // Real branch: identity representation.
        probs.push(0.5 * model.data_pmf.prob(x));
        let mut row = vec![0.0; nx];
        row[x] = 1.0;
        rows.push(row);
        // Fake branch: generator draw, independent of x.
        probs.push(0.5 * model.data_pmf.prob(x));
        rows.push(model.generator.probs().to_vec());
    }
    let input = Pmf::new(from.clone(), probs)?;
    let channel = Channel::new(from, model.data_pmf.alphabet().clone(), rows)?;
    Ok(mutual_information(&input, &channel)?)
}
