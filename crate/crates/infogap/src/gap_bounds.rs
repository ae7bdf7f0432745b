//! Evaluation of the high-probability generalization-gap bound for an
//! encoder/decoder pair on a finite dataset, with every constant computed in
//! closed form, plus the misclassification sandwich that brackets the error
//! probability between a distortion-rate inverse and a log-loss surrogate.

use crate::prob::{
    empirical_joint, mutual_information, Channel, JointPmf,
    LabeledDataset, ModelAssumptions, Pmf, ProbError,
};
use crate::rate_distortion::{distortion_rate_inverse, rd_inverse_derivative, RdCurve};
use serde::Serialize;
use thiserror::Error;

/// Floor applied to decoder entries hit by positive weight before computing
/// losses, so empirical decoders with structural zeros stay finite.
pub const DECODER_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GapError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("delta must lie in (0,1), got {0}")]
    BadDelta(f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Rd(#[from] crate::rate_distortion::RdError),
}

/// Where the marginal floors entering the constants came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FloorSource {
    /// The declared eta of the model assumptions.
    Eta,
    /// Smallest strictly positive empirical marginal entries.
    EmpiricalPositiveMin,
}

/// Every evaluated term of the gap bound.
#[derive(Debug, Clone, Serialize)]
pub struct GapBoundReport {
    pub n: usize,
    pub delta: f64,
    pub a_delta: f64,
    pub b_delta: f64,
    pub c_delta: f64,
    /// I(P_X_hat; encoder) under the empirical input marginal.
    pub ic: f64,
    /// A_delta * sqrt(ic) * log(n) / sqrt(n)
    pub ic_term: f64,
    pub lambda: f64,
    /// B_delta * lambda / sqrt(n)
    pub lambda_term: f64,
    /// C_delta / sqrt(n)
    pub c_term: f64,
    /// ic_term + lambda_term + c_term
    pub total_bound: f64,
    /// Dominant concrete piece of the higher-order residual:
    /// |X||Y| log(n+1)/n + log((|Y|+4)/delta)/n. Reported, never summed.
    pub residual: f64,
    /// |empirical risk - true risk|, present only when a true joint is given.
    pub observed_gap: Option<f64>,
    pub x_floor: f64,
    pub y_floor: f64,
    pub floor_source: FloorSource,
    /// True when the decoder needed flooring to keep losses finite.
    pub smoothing_fired: bool,
}

/// Both sides of the misclassification sandwich.
#[derive(Debug, Clone, Serialize)]
pub struct MisclassSandwich {
    pub lower: f64,
    pub upper: f64,
    pub e_delta: f64,
    pub risk_empirical: f64,
    pub ic: f64,
    /// Derivative correction actually applied to the lower bound.
    pub derivative_correction: f64,
}

/// Dispersion check tying the per-representation variance sum to the
/// information complexity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceCheck {
    pub vsum: f64,
    pub bound_rhs: f64,
}

/// Empirical decoder: Bayes inverse of the encoder through the empirical
/// joint, with additive smoothing `alpha` on the pushed-forward counts.
/// With `alpha = 0`, zero-mass representation rows fall back to uniform.
pub fn empirical_decoder(
    encoder: &Channel,
    data: &LabeledDataset,
    alpha: f64,
) -> Result<Channel, GapError> {
    if data.x_alphabet() != encoder.from_alphabet() {
        return Err(GapError::Prob(ProbError::AlphabetMismatch(
            "dataset x alphabet must match the encoder input".into(),
        )));
    }
    let nu = encoder.to_alphabet().size();
    let ny = data.y_alphabet().size();
    let n = data.n() as f64;
    // Pushed-forward joint counts over (u, y).
    let mut counts = vec![vec![0.0; ny]; nu];
    for &(x, y) in data.pairs() {
        for u in 0..nu {
            counts[u][y] += encoder.prob(x, u);
        }
    }
    let rows = counts
        .iter()
        .map(|row| {
            let mass: f64 = row.iter().sum::<f64>() + alpha * ny as f64;
            if mass > 0.0 {
                row.iter().map(|c| (c + alpha) / mass).collect()
            } else {
                vec![1.0 / ny as f64; ny]
            }
        })
        .collect();
    let _ = n;
    Ok(Channel::new(
        encoder.to_alphabet().clone(),
        data.y_alphabet().clone(),
        rows,
    )?)
}

/// Average-over-representations cross-entropy risk of (encoder, decoder)
/// under `joint`. `+inf` is a valid return when zero decoder entries carry
/// positive weight.
pub fn cross_entropy_risk(
    encoder: &Channel,
    decoder: &Channel,
    joint: &JointPmf,
) -> Result<f64, GapError> {
    if joint.x_alphabet() != encoder.from_alphabet()
        || encoder.to_alphabet() != decoder.from_alphabet()
        || decoder.to_alphabet() != joint.y_alphabet()
    {
        return Err(GapError::Prob(ProbError::AlphabetMismatch(
            "risk needs joint.x = encoder.from, encoder.to = decoder.from, decoder.to = joint.y"
                .into(),
        )));
    }
    let nu = encoder.to_alphabet().size();
    let mut risk = 0.0;
    for (x, row) in joint.probs().iter().enumerate() {
        for (y, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for u in 0..nu {
                let q = encoder.prob(x, u);
                if q == 0.0 {
                    continue;
                }
                let dec = decoder.prob(u, y);
                if dec == 0.0 {
                    return Ok(f64::INFINITY);
                }
                risk += w * q * -dec.ln();
            }
        }
    }
    Ok(risk)
}

/// Risk with smoothing applied only when a zero decoder entry carries
/// positive weight: the raw risk when finite, else the floored one.
/// Returns the risk and whether the fallback fired.
pub fn risk_with_fallback(
    encoder: &Channel,
    decoder: &Channel,
    joint: &JointPmf,
) -> Result<(f64, bool), GapError> {
    let raw = cross_entropy_risk(encoder, decoder, joint)?;
    if raw.is_finite() {
        return Ok((raw, false));
    }
    let (smoothed, _) = smooth_decoder(decoder);
    Ok((cross_entropy_risk(encoder, &smoothed, joint)?, true))
}

/// Floor decoder entries at `DECODER_FLOOR` and renormalize rows. Returns
/// the smoothed channel and whether any entry was lifted.
pub fn smooth_decoder(decoder: &Channel) -> (Channel, bool) {
    let mut fired = false;
    let rows: Vec<Vec<f64>> = decoder
        .rows()
        .iter()
        .map(|row| {
            let mut out: Vec<f64> = row
                .iter()
                .map(|&v| {
                    if v < DECODER_FLOOR {
                        fired = true;
                        DECODER_FLOOR
                    } else {
                        v
                    }
                })
                .collect();
            let s: f64 = out.iter().sum();
            out.iter_mut().for_each(|v| *v /= s);
            out
        })
        .collect();
    let smoothed = Channel::new(
        decoder.from_alphabet().clone(),
        decoder.to_alphabet().clone(),
        rows,
    )
    .expect("floored rows remain stochastic");
    (smoothed, fired)
}

/// Per-(x, y) average-over-representations log loss table for a decoder.
fn loss_table(encoder: &Channel, decoder: &Channel) -> Vec<Vec<f64>> {
    let nx = encoder.from_alphabet().size();
    let ny = decoder.to_alphabet().size();
    let nu = encoder.to_alphabet().size();
    let mut table = vec![vec![0.0; ny]; nx];
    for x in 0..nx {
        for y in 0..ny {
            let mut loss = 0.0;
            for u in 0..nu {
                let q = encoder.prob(x, u);
                if q > 0.0 {
                    loss += q * -decoder.prob(u, y).ln();
                }
            }
            table[x][y] = loss;
        }
    }
    table
}

/// Loss tables for a chosen decoder and the empirical decoder, plus their
/// difference. Both decoders are floored first so the table stays finite.
#[derive(Debug, Clone)]
pub struct LossTable {
    pub chosen: Vec<Vec<f64>>,
    pub empirical: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    pub smoothing_fired: bool,
}

pub fn build_loss_table(
    encoder: &Channel,
    emp_decoder: &Channel,
    decoder: &Channel,
) -> LossTable {
    let (dec_s, fired_a) = smooth_decoder(decoder);
    let (emp_s, fired_b) = smooth_decoder(emp_decoder);
    let chosen = loss_table(encoder, &dec_s);
    let empirical = loss_table(encoder, &emp_s);
    let delta = chosen
        .iter()
        .zip(&empirical)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    LossTable {
        chosen,
        empirical,
        delta,
        smoothing_fired: fired_a || fired_b,
    }
}

/// Decoder efficiency: root-mean-square spread of the loss difference
/// between a chosen decoder and the empirical decoder. Invariant under
/// adding a constant to the difference table.
pub fn decoder_efficiency(encoder: &Channel, emp_decoder: &Channel, decoder: &Channel) -> f64 {
    let table = build_loss_table(encoder, emp_decoder, decoder);
    lambda_from_delta(&table.delta)
}

fn lambda_from_delta(delta: &[Vec<f64>]) -> f64 {
    let d = (delta.len() * delta[0].len()) as f64;
    let mean: f64 = delta.iter().flatten().sum::<f64>() / d;
    // (1/d) sum_{ij} (a_i - a_j)^2 = 2 sum_i (a_i - mean)^2
    let v: f64 = delta.iter().flatten().map(|&a| (a - mean).powi(2)).sum();
    (2.0 * v).sqrt()
}

fn constants(
    delta: f64,
    nx: usize,
    ny: usize,
    nu: usize,
    x_floor: f64,
    y_floor: f64,
) -> (f64, f64, f64) {
    let b = 1.0 + ((ny as f64 + 4.0) / delta).ln().sqrt();
    let a = (2.0f64).sqrt() * b / x_floor * (1.0 + (1.0 / nx as f64).sqrt());
    let c = 2.0 * nu as f64 * (-1.0f64).exp() + b * (ny as f64).sqrt() * (nu as f64 / y_floor).ln();
    (a, b, c)
}

/// Evaluate the gap bound with all constants for a given pair and dataset.
/// Supplying the true joint also reports the realized gap.
pub fn gap_bound_report(
    encoder: &Channel,
    decoder: &Channel,
    data: &LabeledDataset,
    delta: f64,
    assumptions: &ModelAssumptions,
    true_joint: Option<&JointPmf>,
) -> Result<GapBoundReport, GapError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GapError::BadDelta(delta));
    }
    if data.n() < 2 {
        return Err(GapError::TooFewSamples(data.n()));
    }
    let joint = empirical_joint(data);
    let px = joint.x_marginal();
    let py = joint.y_marginal();
    let (x_floor, y_floor, floor_source) = if assumptions.enforce {
        (assumptions.eta, assumptions.eta, FloorSource::Eta)
    } else {
        (
            px.min_positive().unwrap_or(assumptions.eta),
            py.min_positive().unwrap_or(assumptions.eta),
            FloorSource::EmpiricalPositiveMin,
        )
    };
    let nx = encoder.from_alphabet().size();
    let ny = data.y_alphabet().size();
    let nu = encoder.to_alphabet().size();
    let (a_delta, b_delta, c_delta) = constants(delta, nx, ny, nu, x_floor, y_floor);

    let ic = mutual_information(&px, encoder)?;
    let emp_dec = empirical_decoder(encoder, data, 0.0)?;
    let table = build_loss_table(encoder, &emp_dec, decoder);
    let lambda = lambda_from_delta(&table.delta);

    let n = data.n() as f64;
    let ic_term = a_delta * ic.sqrt() * n.ln() / n.sqrt();
    let lambda_term = b_delta * lambda / n.sqrt();
    let c_term = c_delta / n.sqrt();
    let residual = nx as f64 * ny as f64 * (n + 1.0).ln() / n + ((ny as f64 + 4.0) / delta).ln() / n;

    let observed_gap = match true_joint {
        Some(tj) => {
            let (emp_risk, _) = risk_with_fallback(encoder, decoder, &joint)?;
            let (true_risk, _) = risk_with_fallback(encoder, decoder, tj)?;
            Some((emp_risk - true_risk).abs())
        }
        None => None,
    };

    Ok(GapBoundReport {
        n: data.n(),
        delta,
        a_delta,
        b_delta,
        c_delta,
        ic,
        ic_term,
        lambda,
        lambda_term,
        c_term,
        total_bound: ic_term + lambda_term + c_term,
        residual,
        observed_gap,
        x_floor,
        y_floor,
        floor_source,
        smoothing_fired: table.smoothing_fired,
    })
}

/// Bracket the misclassification probability of (encoder, decoder) between
/// the distortion-rate inverse of the information complexity (with a finite
/// sample derivative correction) and the exponential log-loss surrogate.
///
/// `curve` must be built from the empirical label marginal and the decoder.
/// Floors entering `E_delta` and the surrogate constants come from the
/// smallest positive empirical marginal entries.
pub fn misclass_sandwich(
    encoder: &Channel,
    decoder: &Channel,
    data: &LabeledDataset,
    delta: f64,
    curve: &RdCurve,
) -> Result<MisclassSandwich, GapError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GapError::BadDelta(delta));
    }
    let joint = empirical_joint(data);
    let px = joint.x_marginal();
    let py = joint.y_marginal();
    let n = data.n() as f64;

    let ic = mutual_information(&px, encoder)?;
    let lower_base = distortion_rate_inverse(curve, ic);

    // Derivative evaluated at the label-side information of the empirical
    // conditional pushed through the encoder.
    let cond_xy = joint.swap().conditional();
    let label_channel = cond_xy.compose(encoder)?;
    let ic_label = mutual_information(&py, &label_channel)?;
    let nx = encoder.from_alphabet().size() as f64;
    let ny = data.y_alphabet().size() as f64;
    let y_floor = py.min_positive().unwrap_or(1.0 / ny);
    let e_delta =
        (1.0 + (1.0 / delta).ln().sqrt()) * (nx * ny).sqrt() * ((1.0 / y_floor).ln() - 1.0);
    let ex = curve.extremes();
    let step = 1e-4;
    let derivative_correction = if !curve.is_degenerate()
        && ic_label > ex.r_min + step
        && ic_label < ex.r_max - step
    {
        let deriv = rd_inverse_derivative(curve, ic_label, step)?;
        // A positive product (possible when the label floor exceeds 1/e and
        // the bracket in E_delta goes negative) would strengthen the lower
        // bound beyond what the first-order argument supports; keep only the
        // weakening direction.
        ((e_delta / n.sqrt()) * deriv).min(0.0)
    } else {
        0.0
    };
    let lower = (lower_base + derivative_correction).clamp(0.0, 1.0);

    let (risk_empirical, _) = risk_with_fallback(encoder, decoder, &joint)?;
    let x_floor = px.min_positive().unwrap_or(1.0 / nx);
    let (a_delta, _, _) = constants(
        delta,
        encoder.from_alphabet().size(),
        data.y_alphabet().size(),
        encoder.to_alphabet().size(),
        x_floor,
        y_floor,
    );
    let ic_term = a_delta * ic.sqrt() * n.ln() / n.sqrt();
    let upper = if risk_empirical.is_infinite() {
        1.0
    } else {
        (1.0 - (-(risk_empirical + ic_term)).exp()).clamp(0.0, 1.0)
    };

    Ok(MisclassSandwich {
        lower,
        upper,
        e_delta,
        risk_empirical,
        ic,
        derivative_correction,
    })
}

/// Dispersion of a vector about its mean: squared Euclidean distance to the
/// all-mean vector.
pub fn dispersion(values: &[f64]) -> f64 {
    let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|&v| (v - mean).powi(2)).sum()
}

/// Sum over representation symbols of the root dispersion of the encoder
/// columns, and the information-complexity bound that dominates it.
pub fn variance_sum_check(encoder: &Channel, px: &Pmf) -> Result<VarianceCheck, GapError> {
    if px.alphabet() != encoder.from_alphabet() {
        return Err(GapError::Prob(ProbError::AlphabetMismatch(
            "variance check needs px alphabet = encoder.from".into(),
        )));
    }
    let nx = px.len();
    let nu = encoder.to_alphabet().size();
    let mut vsum = 0.0;
    for u in 0..nu {
        let column: Vec<f64> = (0..nx).map(|x| encoder.prob(x, u)).collect();
        vsum += dispersion(&column).sqrt();
    }
    let x_floor = px.min_positive().unwrap_or(1.0);
    let ic = mutual_information(px, encoder)?;
    let bound_rhs = (2.0f64).sqrt() / x_floor * (1.0 + (1.0 / nx as f64).sqrt()) * ic.sqrt();
    Ok(VarianceCheck { vsum, bound_rhs })
}

/// The truncated `-x log x` envelope used in the entropy perturbation
/// bounds: 0 for x <= 0, -x log x on (0, 1/e), and 1/e beyond.
pub fn phi(x: f64) -> f64 {
    let inv_e = (-1.0f64).exp();
    if x <= 0.0 {
        0.0
    } else if x < inv_e {
        -x * x.ln()
    } else {
        inv_e
    }
}

/// For n >= a^2 e^2, phi(a/sqrt(n)) <= (a/2) log(n)/sqrt(n) + e^{-1}/sqrt(n).
/// Returns (lhs, rhs) so callers can assert the inequality.
pub fn phi_bound(a: f64, n: f64) -> (f64, f64) {
    let lhs = phi(a / n.sqrt());
    let rhs = 0.5 * a * n.ln() / n.sqrt() + (-1.0f64).exp() / n.sqrt();
    (lhs, rhs)
}

/// Draw `n` i.i.d. pairs from a joint pmf. Used by the Monte-Carlo bound
/// checks and the CLI.
pub fn sample_from_joint(
    joint: &JointPmf,
    n: usize,
    rng: &mut impl rand::Rng,
) -> LabeledDataset {
    let nx = joint.x_alphabet().size();
    let ny = joint.y_alphabet().size();
    let mut flat = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            flat.push(joint.prob(x, y));
        }
    }
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut r: f64 = rng.gen();
        let mut idx = 0;
        for (i, &p) in flat.iter().enumerate() {
            if r < p {
                idx = i;
                break;
            }
            r -= p;
            idx = i;
        }
        pairs.push((idx / ny, idx % ny));
    }
    LabeledDataset::new(
        joint.x_alphabet().clone(),
        joint.y_alphabet().clone(),
        pairs,
    )
    .expect("sampled indices are in range")
}

/// One CSV row for gap-bound sweep tables; `header` gives the column names.
#[derive(Debug, Clone, Serialize)]
pub struct GapCsvRow {
    pub n: usize,
    pub delta: f64,
    pub ic: f64,
    pub lambda: f64,
    pub bound: f64,
    pub gap: f64,
}

impl GapCsvRow {
    pub fn header() -> &'static str {
        "n,delta,ic,lambda,bound,gap"
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.delta, self.ic, self.lambda, self.bound, self.gap
        )
    }
}
