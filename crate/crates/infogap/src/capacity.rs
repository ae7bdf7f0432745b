//! Encoder capacity, the Fano-style sandwich linking it to the information
//! complexity of representations, and two auxiliary upper bounds on that
//! complexity (pairwise divergences and covering sets).
//!
//! The capacity of an encoder with respect to a sample set A is the log of
//! the total maximum-likelihood mass of recovering inputs from their
//! representations: `C_e = log sum_u Q(u|psi(u))` with `psi` the
//! per-representation argmax decoder, which equals
//! `log|A| - log(1/(1-eps))` for the misidentification fraction `eps`.

use crate::prob::{
    kl_divergence_raw, mutual_information, Channel, LabeledDataset, Pmf, ProbError,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("sample set alphabet must match the encoder input alphabet")]
    SampleSetMismatch,
}

/// Maximum-likelihood decoder from representations back to sample symbols.
#[derive(Debug, Clone)]
pub struct MlDecoder {
    /// For each representation index, the recovered input index.
    map: Vec<usize>,
    /// Total recovered mass sum_u Q(u | map(u)).
    success_mass: f64,
}

impl MlDecoder {
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn success_mass(&self) -> f64 {
        self.success_mass
    }
}

/// Capacity and misidentification fraction of an encoder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapacityPoint {
    pub capacity: f64,
    pub epsilon: f64,
    pub success_mass: f64,
    pub sample_count: usize,
}

/// Full sandwich report: capacity, epsilon, the two bounds tying epsilon to
/// the information complexity, and the complexity itself.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    pub epsilon: f64,
    pub fano_lower: f64,
    pub half_upper: f64,
    pub ic: f64,
}

fn sample_support(encoder: &Channel, sample_set: &Pmf) -> Result<Vec<usize>, CapacityError> {
    if sample_set.alphabet() != encoder.from_alphabet() {
        return Err(CapacityError::SampleSetMismatch);
    }
    let support = sample_set.support();
    if support.is_empty() {
        return Err(CapacityError::EmptySampleSet);
    }
    Ok(support)
}

/// Per-representation argmax decoder. Ties break toward the smallest symbol
/// index; the capacity value itself is tie-invariant.
pub fn ml_decoder(encoder: &Channel, sample_set: &Pmf) -> Result<MlDecoder, CapacityError> {
    let support = sample_support(encoder, sample_set)?;
    let nu = encoder.to_alphabet().size();
    let mut map = Vec::with_capacity(nu);
    let mut success_mass = 0.0;
    for u in 0..nu {
        let mut best_x = support[0];
        let mut best = f64::NEG_INFINITY;
        for &x in &support {
            let q = encoder.prob(x, u);
            if q > best {
                best = q;
                best_x = x;
            }
        }
        map.push(best_x);
        success_mass += best;
    }
    Ok(MlDecoder { map, success_mass })
}

/// Capacity and misidentification fraction for the uniform sample set drawn
/// from the support of `sample_set`.
pub fn encoder_capacity(
    encoder: &Channel,
    sample_set: &Pmf,
) -> Result<CapacityPoint, CapacityError> {
    let support = sample_support(encoder, sample_set)?;
    let decoder = ml_decoder(encoder, sample_set)?;
    let a = support.len() as f64;
    let epsilon = 1.0 - decoder.success_mass / a;
    Ok(CapacityPoint {
        capacity: decoder.success_mass.ln(),
        epsilon,
        success_mass: decoder.success_mass,
        sample_count: support.len(),
    })
}

/// The Fano link function `g(t) = t log(|A|-1) + h(t)`, continuous and
/// increasing on [0, 1 - 1/|A|] with g(0) = 0 and g(1 - 1/|A|) = log|A|.
pub fn fano_g(t: f64, sample_count: usize) -> f64 {
    let mut value = crate::prob::binary_entropy(t);
    if sample_count > 1 {
        value += t * ((sample_count - 1) as f64).ln();
    }
    value
}

/// Inverse of `g` on [0, 1 - 1/|A|], with `g_inv(t) = 0` for t <= 0.
/// Bisection to 1e-10 in the argument.
pub fn fano_g_inv(target: f64, sample_count: usize) -> f64 {
    if target <= 0.0 || sample_count <= 1 {
        return 0.0;
    }
    let hi_end = 1.0 - 1.0 / sample_count as f64;
    if target >= fano_g(hi_end, sample_count) {
        return hi_end;
    }
    let mut lo = 0.0;
    let mut hi = hi_end;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if fano_g(mid, sample_count) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided bound on the misidentification fraction from the information
/// complexity, together with the capacity identity and the complexity
/// itself.
///
/// The upper bound divides the information slack by `2 log 2`: the
/// entropy-versus-error inequality behind it (`H >= 2(1 - p_max)`) is a
/// base-2 statement, so in nats the valid constant is `1/(2 log 2)`, not
/// `1/2`. Random binary-ish encoders violate the plain-half form.
pub fn fano_sandwich(encoder: &Channel, px_hat: &Pmf) -> Result<CapacityReport, CapacityError> {
    let point = encoder_capacity(encoder, px_hat)?;
    let ic = mutual_information(px_hat, encoder)?;
    let slack = (point.sample_count as f64).ln() - ic;
    Ok(CapacityReport {
        capacity: point.capacity,
        epsilon: point.epsilon,
        fano_lower: fano_g_inv(slack, point.sample_count),
        half_upper: slack / (2.0 * std::f64::consts::LN_2),
        ic,
    })
}

/// Jensen-style upper bound on the information complexity: the average
/// pairwise divergence between per-sample representation distributions,
/// duplicates included. `+inf` when some cross-support divergence diverges.
pub fn pairwise_kl_bound(encoder: &Channel, data: &LabeledDataset) -> Result<f64, CapacityError> {
    if data.x_alphabet() != encoder.from_alphabet() {
        return Err(CapacityError::SampleSetMismatch);
    }
    let mut counts = vec![0usize; encoder.from_alphabet().size()];
    for &(x, _) in data.pairs() {
        counts[x] += 1;
    }
    let n = data.n() as f64;
    let mut total = 0.0;
    for (xi, &ci) in counts.iter().enumerate() {
        if ci == 0 {
            continue;
        }
        for (xj, &cj) in counts.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            let d = if xi == xj {
                0.0
            } else {
                kl_divergence_raw(encoder.row(xi), encoder.row(xj))
            };
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += (ci as f64 / n) * (cj as f64 / n) * d;
        }
    }
    Ok(total)
}

/// Metric-entropy upper bound on the information complexity via a cover of
/// the per-sample representation distributions. Exact over all subsets when
/// there are at most 12 distinct samples, greedy otherwise.
pub fn covering_bound(
    encoder: &Channel,
    data: &LabeledDataset,
    epsilon: f64,
) -> Result<(f64, usize), CapacityError> {
    if data.x_alphabet() != encoder.from_alphabet() {
        return Err(CapacityError::SampleSetMismatch);
    }
    let mut distinct: Vec<usize> = Vec::new();
    for &(x, _) in data.pairs() {
        if !distinct.contains(&x) {
            distinct.push(x);
        }
    }
    distinct.sort_unstable();
    let k = distinct.len();
    // Pairwise divergences between distinct sample rows. Diagonal is 0, so
    // the full set is always a feasible cover.
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                d[i][j] = kl_divergence_raw(encoder.row(distinct[i]), encoder.row(distinct[j]));
            }
        }
    }

    let value_of = |members: &[usize]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..k {
            let best = members
                .iter()
                .map(|&j| d[i][j])
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        (members.len() as f64).ln() + worst
    };
    let feasible = |members: &[usize]| -> bool {
        (0..k).all(|i| {
            members
                .iter()
                .map(|&j| d[i][j])
                .fold(f64::INFINITY, f64::min)
                <= epsilon + 1e-12
        })
    };

    if k <= 12 {
        let mut best_value = f64::INFINITY;
        let mut best_size = k;
        for mask in 1u32..(1u32 << k) {
            let members: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
            if !feasible(&members) {
                continue;
            }
            let v = value_of(&members);
            if v < best_value {
                best_value = v;
                best_size = members.len();
            }
        }
        Ok((best_value, best_size))
    } else {
        // Greedy max-coverage: add the sample covering the most uncovered
        // points within epsilon until everything is covered.
        let mut members: Vec<usize> = Vec::new();
        let mut covered = vec![false; k];
        while covered.iter().any(|&c| !c) {
            let mut best_gain = 0usize;
            let mut best_j = None;
            for j in 0..k {
                if members.contains(&j) {
                    continue;
                }
                let gain = (0..k)
                    .filter(|&i| !covered[i] && d[i][j] <= epsilon + 1e-12)
                    .count();
                if gain > best_gain {
                    best_gain = gain;
                    best_j = Some(j);
                }
            }
            match best_j {
                Some(j) => {
                    members.push(j);
                    for i in 0..k {
                        if d[i][j] <= epsilon + 1e-12 {
                            covered[i] = true;
                        }
                    }
                }
                // Infinite cross divergences can strand points; absorb them
                // directly (each covers itself at distance zero).
                None => {
                    for i in 0..k {
                        if !covered[i] {
                            members.push(i);
                            covered[i] = true;
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        Ok((value_of(&members), members.len()))
    }
}
