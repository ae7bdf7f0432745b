//! Information-bottleneck style objectives on empirical data: the
//! `H(Y|U) + lambda * I(X;U)` functional and its alternating minimization,
//! the variational surrogate with an explicit representation prior, and the
//! multilayer chaining bound on the end-to-end information complexity.

use crate::prob::{
    conditional_kl, empirical_joint, kl_divergence_raw, mutual_information,
    push_forward, Channel, LabeledDataset, Pmf, ProbError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IbError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("lambda must be >= 0, got {0}")]
    BadLambda(f64),
    #[error("tolerance must be > 0, got {0}")]
    BadTolerance(f64),
    #[error("need at least one restart")]
    NoRestarts,
    #[error("u_size must be >= 1")]
    BadUSize,
    #[error("layer stack is empty")]
    EmptyStack,
    #[error("layer weights must be non-negative and sum to 1")]
    BadWeights,
}

/// Configuration for the alternating-minimization solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IbConfig {
    pub lambda: f64,
    pub u_size: usize,
    pub init_seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
}

impl IbConfig {
    pub fn new(lambda: f64, u_size: usize, init_seed: u64) -> Result<Self, IbError> {
        let cfg = Self {
            lambda,
            u_size,
            init_seed,
            max_iter: 500,
            tol: 1e-10,
            restarts: 8,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IbError> {
        if !(self.lambda >= 0.0) {
            return Err(IbError::BadLambda(self.lambda));
        }
        if !(self.tol > 0.0) {
            return Err(IbError::BadTolerance(self.tol));
        }
        if self.restarts == 0 {
            return Err(IbError::NoRestarts);
        }
        if self.u_size == 0 {
            return Err(IbError::BadUSize);
        }
        Ok(())
    }
}

/// Value of the bottleneck functional split into its two terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IbObjective {
    pub value: f64,
    pub h_term: f64,
    pub ic_term: f64,
}

/// One accepted iterate of the optimizer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IbTracePoint {
    pub iter: usize,
    pub value: f64,
    pub h_term: f64,
    pub ic_term: f64,
}

/// Result of the optimization: best encoder over restarts plus its trace.
#[derive(Debug, Clone)]
pub struct IbSolution {
    pub encoder: Channel,
    pub objective: IbObjective,
    pub trace: Vec<IbTracePoint>,
    pub converged: bool,
    /// Restart index that produced the returned encoder.
    pub best_restart: usize,
}

impl IbSolution {
    /// CSV export of the accepted-iterate trace.
    pub fn trace_to_csv(&self) -> String {
        let mut out = String::from("iter,value,h_term,ic_term\n");
        for p in &self.trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.iter, p.value, p.h_term, p.ic_term
            ));
        }
        out
    }
}

/// Evaluate `H(Q_Y|U | Q_U) + lambda * I(P_X; encoder)` through the decoder
/// and marginal refreshed from the empirical joint.
pub fn ib_objective(
    encoder: &Channel,
    data: &LabeledDataset,
    lambda: f64,
) -> Result<IbObjective, IbError> {
    if lambda < 0.0 {
        return Err(IbError::BadLambda(lambda));
    }
    let joint = empirical_joint(data);
    let px = joint.x_marginal();
    if px.alphabet() != encoder.from_alphabet() {
        return Err(IbError::Prob(ProbError::AlphabetMismatch(
            "encoder input must match the dataset x alphabet".into(),
        )));
    }
    let (h_term, ic_term) = objective_terms(encoder, &joint, &px)?;
    Ok(IbObjective {
        value: h_term + lambda * ic_term,
        h_term,
        ic_term,
    })
}

fn objective_terms(
    encoder: &Channel,
    joint: &crate::prob::JointPmf,
    px: &Pmf,
) -> Result<(f64, f64), IbError> {
    let nu = encoder.to_alphabet().size();
    let ny = joint.y_alphabet().size();
    let nx = px.len();
    // Pushed-forward joint over (u, y).
    let mut uy = vec![vec![0.0; ny]; nu];
    for x in 0..nx {
        for y in 0..ny {
            let w = joint.prob(x, y);
            if w == 0.0 {
                continue;
            }
            for u in 0..nu {
                uy[u][y] += w * encoder.prob(x, u);
            }
        }
    }
    let mut h_term = 0.0;
    for row in &uy {
        let mass: f64 = row.iter().sum();
        if mass > 0.0 {
            for &p in row {
                if p > 0.0 {
                    h_term += -p * (p / mass).ln();
                }
            }
        }
    }
    let ic_term = mutual_information(px, encoder)?;
    Ok((h_term, ic_term))
}

/// Alternating minimization of the bottleneck functional with seeded random
/// restarts. The decoder and marginal refresh in closed form; the encoder
/// refresh is the exponentiated self-consistent update at inverse
/// temperature `1/lambda` (hard assignment when lambda is effectively 0).
/// Steps that would increase the objective are rejected and end the run,
/// so the accepted trace is non-increasing by construction.
pub fn ib_optimize(data: &LabeledDataset, config: &IbConfig) -> Result<IbSolution, IbError> {
    config.validate()?;
    let joint = empirical_joint(data);
    let px = joint.x_marginal();
    let u_alphabet = crate::prob::Alphabet::indexed("u", config.u_size)
        .expect("u_size >= 1 was validated");

    let run = |restart: usize| -> Result<(IbSolution, f64), IbError> {
        let mut rng = ChaCha8Rng::seed_from_u64(
            config
                .init_seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(restart as u64),
        );
        let nx = px.len();
        let nu = config.u_size;
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|_| {
                let mut row: Vec<f64> = (0..nu).map(|_| -rng.gen::<f64>().ln()).collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
                row
            })
            .collect();
        let mut encoder = Channel::new(px.alphabet().clone(), u_alphabet.clone(), rows)?;

        let (h0, ic0) = objective_terms(&encoder, &joint, &px)?;
        let mut best_value = h0 + config.lambda * ic0;
        let mut trace = vec![IbTracePoint {
            iter: 0,
            value: best_value,
            h_term: h0,
            ic_term: ic0,
        }];
        let mut converged = false;

        for iter in 1..=config.max_iter {
            let candidate = ib_step(&encoder, &joint, &px, config.lambda, &u_alphabet)?;
            let (h, ic) = objective_terms(&candidate, &joint, &px)?;
            let value = h + config.lambda * ic;
            if value > best_value + 1e-12 {
                // Fixed-point step left the descent region; keep the best
                // iterate found so far.
                break;
            }
            encoder = candidate;
            trace.push(IbTracePoint {
                iter,
                value,
                h_term: h,
                ic_term: ic,
            });
            if (best_value - value).abs() < config.tol {
                best_value = value.min(best_value);
                converged = true;
                break;
            }
            best_value = value.min(best_value);
        }

        let last = *trace.last().expect("trace has the initial point");
        Ok((
            IbSolution {
                encoder,
                objective: IbObjective {
                    value: last.value,
                    h_term: last.h_term,
                    ic_term: last.ic_term,
                },
                trace,
                converged,
                best_restart: restart,
            },
            best_value,
        ))
    };

    // Restarts run concurrently; selection is deterministic: lowest value,
    // then lowest restart index.
    let results: Vec<Result<(IbSolution, f64), IbError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.restarts)
            .map(|r| scope.spawn(move || run(r)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("restart thread panicked"))
            .collect()
    });

    let mut best: Option<(IbSolution, f64)> = None;
    for result in results {
        let (solution, value) = result?;
        best = match best {
            None => Some((solution, value)),
            Some((cur_sol, cur_val)) => {
                if value < cur_val - 1e-15 {
                    Some((solution, value))
                } else {
                    Some((cur_sol, cur_val))
                }
            }
        };
    }
    Ok(best.expect("at least one restart").0)
}

fn ib_step(
    encoder: &Channel,
    joint: &crate::prob::JointPmf,
    px: &Pmf,
    lambda: f64,
    u_alphabet: &crate::prob::Alphabet,
) -> Result<Channel, IbError> {
    let nx = px.len();
    let nu = u_alphabet.size();
    let ny = joint.y_alphabet().size();
    // Marginal and decoder refresh.
    let pf = push_forward(px, encoder)?;
    let marginal = pf.marginal;
    let mut decoder_rows = vec![vec![0.0; ny]; nu];
    for x in 0..nx {
        for y in 0..ny {
            let w = joint.prob(x, y);
            if w == 0.0 {
                continue;
            }
            for u in 0..nu {
                decoder_rows[u][y] += w * encoder.prob(x, u);
            }
        }
    }
    for (u, row) in decoder_rows.iter_mut().enumerate() {
        let mass: f64 = row.iter().sum();
        if mass > 0.0 {
            row.iter_mut().for_each(|v| *v /= mass);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / ny as f64);
        }
        let _ = u;
    }
    let cond = joint.conditional();

    // Encoder refresh. Rows with zero empirical mass stay put.
    let hard = lambda <= 1e-12;
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            if px.prob(x) == 0.0 {
                return encoder.row(x).to_vec();
            }
            let divergences: Vec<f64> = (0..nu)
                .map(|u| kl_divergence_raw(cond.row(x), &decoder_rows[u]))
                .collect();
            if hard {
                // Zero-temperature limit: all mass on the closest decoder
                // row, ties to the smallest index.
                let mut best_u = 0;
                let mut best = f64::INFINITY;
                for (u, &d) in divergences.iter().enumerate() {
                    if d < best {
                        best = d;
                        best_u = u;
                    }
                }
                let mut row = vec![0.0; nu];
                row[best_u] = 1.0;
                row
            } else {
                let beta = 1.0 / lambda;
                let shift = divergences
                    .iter()
                    .copied()
                    .filter(|d| d.is_finite())
                    .fold(f64::INFINITY, f64::min);
                let mut row: Vec<f64> = (0..nu)
                    .map(|u| {
                        let m = marginal.prob(u);
                        if m == 0.0 || !divergences[u].is_finite() {
                            0.0
                        } else {
                            m * (-beta * (divergences[u] - shift)).exp()
                        }
                    })
                    .collect();
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    row.iter_mut().for_each(|v| *v /= mass);
                } else {
                    row = encoder.row(x).to_vec();
                }
                row
            }
        })
        .collect();
    Ok(Channel::new(
        px.alphabet().clone(),
        u_alphabet.clone(),
        rows,
    )?)
}

/// Variational surrogate value with an explicit representation prior.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VaObjective {
    pub value: f64,
    pub h_term: f64,
    /// D(encoder || prior | P_X), `+inf` when the prior misses encoder mass.
    pub divergence: f64,
}

/// `H(Y|U) + lambda * sqrt(D(encoder || prior | P_X))`. The divergence term
/// equals the information complexity exactly when the prior matches the
/// pushed-forward marginal, and dominates it otherwise.
pub fn va_surrogate(
    encoder: &Channel,
    data: &LabeledDataset,
    prior: &Pmf,
    lambda: f64,
) -> Result<VaObjective, IbError> {
    if lambda < 0.0 {
        return Err(IbError::BadLambda(lambda));
    }
    let joint = empirical_joint(data);
    let px = joint.x_marginal();
    let (h_term, _) = objective_terms(encoder, &joint, &px)?;
    let prior_channel = Channel::constant(px.alphabet().clone(), prior.clone());
    let divergence = conditional_kl(&px, encoder, &prior_channel)?;
    let value = if divergence.is_infinite() {
        f64::INFINITY
    } else {
        h_term + lambda * divergence.sqrt()
    };
    Ok(VaObjective {
        value,
        h_term,
        divergence,
    })
}

/// Ordered stack of composable channels with convex layer weights.
#[derive(Debug, Clone)]
pub struct LayerStack {
    layers: Vec<Channel>,
    weights: Vec<f64>,
}

impl LayerStack {
    pub fn new(layers: Vec<Channel>, weights: Vec<f64>) -> Result<Self, IbError> {
        if layers.is_empty() {
            return Err(IbError::EmptyStack);
        }
        for pair in layers.windows(2) {
            if pair[0].to_alphabet() != pair[1].from_alphabet() {
                return Err(IbError::Prob(ProbError::AlphabetMismatch(
                    "adjacent layers must compose".into(),
                )));
            }
        }
        if weights.len() != layers.len()
            || weights.iter().any(|&w| w < 0.0)
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(IbError::BadWeights);
        }
        Ok(Self { layers, weights })
    }

    /// Equal weights across layers.
    pub fn with_uniform_weights(layers: Vec<Channel>) -> Result<Self, IbError> {
        let k = layers.len();
        Self::new(layers, vec![1.0 / k as f64; k.max(1)])
    }

    pub fn layers(&self) -> &[Channel] {
        &self.layers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// End-to-end composition of all layers.
    pub fn compose(&self) -> Result<Channel, IbError> {
        let mut composed = self.layers[0].clone();
        for layer in &self.layers[1..] {
            composed = composed.compose(layer)?;
        }
        Ok(composed)
    }
}

/// Per-layer informations under propagated marginals, their minimum (the
/// tightest admissible convex combination), and the declared-weight value.
#[derive(Debug, Clone, Serialize)]
pub struct MultilayerBound {
    pub per_layer: Vec<f64>,
    pub aggregate: f64,
    pub weighted: f64,
}

/// Chaining bound: the end-to-end information complexity is dominated by
/// every per-layer information, hence by their minimum and by any convex
/// combination.
pub fn multilayer_ic_bound(stack: &LayerStack, px: &Pmf) -> Result<MultilayerBound, IbError> {
    if px.alphabet() != stack.layers[0].from_alphabet() {
        return Err(IbError::Prob(ProbError::AlphabetMismatch(
            "input pmf must match the first layer".into(),
        )));
    }
    let mut marginal = px.clone();
    let mut per_layer = Vec::with_capacity(stack.layers.len());
    for layer in &stack.layers {
        per_layer.push(mutual_information(&marginal, layer)?);
        marginal = push_forward(&marginal, layer)?.marginal;
    }
    let aggregate = per_layer.iter().copied().fold(f64::INFINITY, f64::min);
    let weighted = per_layer
        .iter()
        .zip(&stack.weights)
        .map(|(&i, &w)| w * i)
        .sum();
    Ok(MultilayerBound {
        per_layer,
        aggregate,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{conditional_entropy, entropy, Alphabet, LabeledDataset};
    use rand::Rng;

    fn identity_coupled_binary(n_each: usize) -> LabeledDataset {
        let x = Alphabet::indexed("x", 2).unwrap();
        let y = Alphabet::indexed("y", 2).unwrap();
        let mut pairs = Vec::new();
        for _ in 0..n_each {
            pairs.push((0, 0));
            pairs.push((1, 1));
        }
        LabeledDataset::new(x, y, pairs).unwrap()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, nx: usize, ny: usize, n: usize) -> LabeledDataset {
        let x = Alphabet::indexed("x", nx).unwrap();
        let y = Alphabet::indexed("y", ny).unwrap();
        let pairs = (0..n)
            .map(|_| (rng.gen_range(0..nx), rng.gen_range(0..ny)))
            .collect();
        LabeledDataset::new(x, y, pairs).unwrap()
    }

    fn random_channel(rng: &mut ChaCha8Rng, from: &Alphabet, to: &Alphabet) -> Channel {
        let rows: Vec<Vec<f64>> = (0..from.size())
            .map(|_| {
                let mut row: Vec<f64> = (0..to.size()).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
                row
            })
            .collect();
        Channel::new(from.clone(), to.clone(), rows).unwrap()
    }

    #[test]
    fn objective_constant_encoder_collapses() {
        let data = identity_coupled_binary(5);
        let u = Alphabet::indexed("u", 2).unwrap();
        let enc = Channel::constant(
            data.x_alphabet().clone(),
            Pmf::new(u, vec![0.4, 0.6]).unwrap(),
        );
        let obj = ib_objective(&enc, &data, 0.7).unwrap();
        assert_eq!(obj.ic_term, 0.0);
        let hy = entropy(&empirical_joint(&data).y_marginal());
        assert!((obj.h_term - hy).abs() < 1e-12);
    }

    #[test]
    fn objective_identity_encoder_on_deterministic_labels() {
        let data = identity_coupled_binary(5);
        let enc = Channel::identity(data.x_alphabet().clone());
        let obj = ib_objective(&enc, &data, 1.0).unwrap();
        assert!(obj.h_term.abs() < 1e-12);
        let hx = entropy(&empirical_joint(&data).x_marginal());
        assert!((obj.ic_term - hx).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_pushforward_recomposition_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data = random_dataset(&mut rng, 3, 3, 60);
        let u = Alphabet::indexed("u", 3).unwrap();
        let enc = random_channel(&mut rng, data.x_alphabet(), &u);
        let obj = ib_objective(&enc, &data, 0.3).unwrap();
        // Oracle: recompute both terms through independent push-forward
        // composition on the empirical joint.
        let joint = empirical_joint(&data);
        let px = joint.x_marginal();
        let ic = mutual_information(&px, &enc).unwrap();
        let pf = push_forward(&px, &enc).unwrap();
        let dec = {
            // Bayes decoder through the label side.
            let mut rows = vec![vec![0.0; 3]; 3];
            for x in 0..3 {
                for y in 0..3 {
                    for uu in 0..3 {
                        rows[uu][y] += joint.prob(x, y) * enc.prob(x, uu);
                    }
                }
            }
            for row in rows.iter_mut() {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            Channel::new(u.clone(), data.y_alphabet().clone(), rows).unwrap()
        };
        let h = conditional_entropy(&pf.marginal, &dec).unwrap();
        assert!((obj.ic_term - ic).abs() < 1e-12);
        assert!((obj.h_term - h).abs() < 1e-9);
        assert!((obj.value - (h + 0.3 * ic)).abs() < 1e-9);
    }

    #[test]
    fn h_term_never_exceeds_label_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let data = random_dataset(&mut rng, 4, 3, 40);
            let u = Alphabet::indexed("u", 3).unwrap();
            let enc = random_channel(&mut rng, data.x_alphabet(), &u);
            let obj = ib_objective(&enc, &data, 0.0).unwrap();
            let hy = entropy(&empirical_joint(&data).y_marginal());
            assert!(obj.h_term <= hy + 1e-9);
        }
    }

    #[test]
    fn optimize_identity_coupling_reaches_zero() {
        let data = identity_coupled_binary(8);
        let config = IbConfig::new(0.0, 2, 42).unwrap();
        let solution = ib_optimize(&data, &config).unwrap();
        // Exhaustive oracle over the four deterministic 2 -> 2 encoders.
        let u = Alphabet::indexed("u", 2).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..2usize {
            for b in 0..2usize {
                let mut rows = vec![vec![0.0; 2]; 2];
                rows[0][a] = 1.0;
                rows[1][b] = 1.0;
                let enc = Channel::new(data.x_alphabet().clone(), u.clone(), rows).unwrap();
                let obj = ib_objective(&enc, &data, 0.0).unwrap();
                best = best.min(obj.value);
            }
        }
        assert!(best.abs() < 1e-12, "exhaustive optimum should be 0");
        assert!(
            solution.objective.value <= 1e-6,
            "optimizer stalled at {}",
            solution.objective.value
        );
    }

    #[test]
    fn optimize_large_lambda_collapses_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let data = random_dataset(&mut rng, 3, 2, 60);
        let lambda = 10.0 * 3f64.ln();
        let config = IbConfig::new(lambda, 3, 7).unwrap();
        let solution = ib_optimize(&data, &config).unwrap();
        let hy = entropy(&empirical_joint(&data).y_marginal());
        assert!(
            solution.objective.ic_term < 1e-3,
            "ic stayed at {}",
            solution.objective.ic_term
        );
        assert!((solution.objective.value - hy).abs() < 1e-3);
    }

    #[test]
    fn optimize_trace_is_monotone_on_random_datasets() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for trial in 0..50 {
            let nx = rng.gen_range(2..=4);
            let ny = rng.gen_range(2..=3);
            let data = random_dataset(&mut rng, nx, ny, 30);
            let lambda = rng.gen_range(0.0..2.0);
            let mut config = IbConfig::new(lambda, nx, trial).unwrap();
            config.restarts = 2;
            config.max_iter = 100;
            let solution = ib_optimize(&data, &config).unwrap();
            for w in solution.trace.windows(2) {
                assert!(
                    w[1].value <= w[0].value + 1e-9,
                    "trace increased on trial {trial}: {} -> {}",
                    w[0].value,
                    w[1].value
                );
            }
        }
    }

    #[test]
    fn objective_at_zero_lambda_bounded_below_by_bayes_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..20 {
            let data = random_dataset(&mut rng, 3, 3, 40);
            let u = Alphabet::indexed("u", 3).unwrap();
            let enc = random_channel(&mut rng, data.x_alphabet(), &u);
            let obj = ib_objective(&enc, &data, 0.0).unwrap();
            let joint = empirical_joint(&data);
            let bayes = conditional_entropy(&joint.x_marginal(), &joint.conditional()).unwrap();
            assert!(obj.value >= bayes - 1e-9);
        }
    }

    #[test]
    fn va_equals_ic_when_prior_is_pushforward_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let data = random_dataset(&mut rng, 3, 2, 50);
        let u = Alphabet::indexed("u", 2).unwrap();
        let enc = random_channel(&mut rng, data.x_alphabet(), &u);
        let px = empirical_joint(&data).x_marginal();
        let prior = push_forward(&px, &enc).unwrap().marginal;
        let va = va_surrogate(&enc, &data, &prior, 1.0).unwrap();
        let ic = mutual_information(&px, &enc).unwrap();
        assert!((va.divergence - ic).abs() < 1e-12);
    }

    #[test]
    fn va_constant_encoder_with_matching_prior() {
        let data = identity_coupled_binary(5);
        let u = Alphabet::indexed("u", 2).unwrap();
        let row = Pmf::new(u, vec![0.3, 0.7]).unwrap();
        let enc = Channel::constant(data.x_alphabet().clone(), row.clone());
        let va = va_surrogate(&enc, &data, &row, 2.0).unwrap();
        let hy = entropy(&empirical_joint(&data).y_marginal());
        assert!(va.divergence < 1e-12);
        assert!((va.value - hy).abs() < 1e-9);
    }

    #[test]
    fn va_random_priors_dominate_the_marginal_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let data = random_dataset(&mut rng, 3, 2, 50);
        let u = Alphabet::indexed("u", 3).unwrap();
        let enc = random_channel(&mut rng, data.x_alphabet(), &u);
        let px = empirical_joint(&data).x_marginal();
        let marginal = push_forward(&px, &enc).unwrap().marginal;
        let base = va_surrogate(&enc, &data, &marginal, 1.0).unwrap();
        for _ in 0..20 {
            let mut probs: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 0.05).collect();
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|v| *v /= s);
            let prior = Pmf::new(u.clone(), probs).unwrap();
            let va = va_surrogate(&enc, &data, &prior, 1.0).unwrap();
            assert!(va.value >= base.value - 1e-9);
        }
    }

    #[test]
    fn va_zero_prior_reports_infinite_divergence() {
        let data = identity_coupled_binary(4);
        let u = Alphabet::indexed("u", 2).unwrap();
        let enc = Channel::constant(
            data.x_alphabet().clone(),
            Pmf::new(u.clone(), vec![0.5, 0.5]).unwrap(),
        );
        let prior = Pmf::point_mass(u, 0);
        let va = va_surrogate(&enc, &data, &prior, 1.0).unwrap();
        assert!(va.divergence.is_infinite());
        assert!(va.value.is_infinite());
    }

    #[test]
    fn multilayer_single_layer_matches_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let x = Alphabet::indexed("x", 3).unwrap();
        let u = Alphabet::indexed("u", 3).unwrap();
        let layer = random_channel(&mut rng, &x, &u);
        let stack = LayerStack::with_uniform_weights(vec![layer.clone()]).unwrap();
        let px = Pmf::uniform(x);
        let bound = multilayer_ic_bound(&stack, &px).unwrap();
        let end_to_end = mutual_information(&px, &layer).unwrap();
        assert!((bound.aggregate - end_to_end).abs() < 1e-12);
        assert_eq!(bound.per_layer.len(), 1);
    }

    #[test]
    fn multilayer_constant_second_layer_kills_aggregate() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x = Alphabet::indexed("x", 3).unwrap();
        let u = Alphabet::indexed("u", 3).unwrap();
        let v = Alphabet::indexed("v", 2).unwrap();
        let first = random_channel(&mut rng, &x, &u);
        let second = Channel::constant(u, Pmf::new(v, vec![0.5, 0.5]).unwrap());
        let stack = LayerStack::with_uniform_weights(vec![first, second]).unwrap();
        let px = Pmf::uniform(x);
        let bound = multilayer_ic_bound(&stack, &px).unwrap();
        assert_eq!(bound.aggregate, 0.0);
        let composed = stack.compose().unwrap();
        assert_eq!(mutual_information(&px, &composed).unwrap(), 0.0);
    }

    #[test]
    fn multilayer_aggregate_dominates_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..200 {
            let k = rng.gen_range(1..=4);
            let sizes: Vec<usize> = (0..=k).map(|_| rng.gen_range(2..=4)).collect();
            let alphabets: Vec<Alphabet> = sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| Alphabet::indexed(&format!("a{i}_"), s).unwrap())
                .collect();
            let layers: Vec<Channel> = (0..k)
                .map(|i| random_channel(&mut rng, &alphabets[i], &alphabets[i + 1]))
                .collect();
            let stack = LayerStack::with_uniform_weights(layers).unwrap();
            let px = Pmf::uniform(alphabets[0].clone());
            let bound = multilayer_ic_bound(&stack, &px).unwrap();
            let composed = stack.compose().unwrap();
            let end_to_end = mutual_information(&px, &composed).unwrap();
            assert!(
                end_to_end <= bound.aggregate + 1e-9,
                "end-to-end {end_to_end} above aggregate {}",
                bound.aggregate
            );
            for &layer_info in &bound.per_layer {
                assert!(end_to_end <= layer_info + 1e-9);
            }
            assert!(bound.aggregate <= bound.weighted + 1e-12);
        }
    }

    #[test]
    fn stack_rejects_bad_weights_and_mismatch() {
        let x = Alphabet::indexed("x", 2).unwrap();
        let u = Alphabet::indexed("u", 2).unwrap();
        let v = Alphabet::indexed("v", 2).unwrap();
        let a = Channel::identity(x.clone());
        let b = Channel::identity(v.clone());
        assert!(LayerStack::new(vec![a.clone(), b], vec![0.5, 0.5]).is_err());
        let c = Channel::new(x.clone(), u, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(LayerStack::new(vec![a.clone(), c], vec![0.7, 0.7]).is_err());
        assert!(LayerStack::new(vec![], vec![]).is_err());
    }
}
