//! Feed-forward network with logistic hidden units and a softmax output,
//! trained by SGD on cross-entropy. Dropout masks the input connections of
//! each hidden layer with that layer's keep-probability; masks are redrawn
//! every batch, there is no inverted rescaling at train time, and
//! evaluation scales each masked input by its keep-probability instead.

use super::data::{BitDataset, LabelCorruption};
use super::track::track_ic_and_gap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("layer_sizes needs input, at least one hidden, and output entries")]
    TooFewLayers,
    #[error("layer sizes must all be >= 1")]
    ZeroWidth,
    #[error("need one keep-probability per hidden layer")]
    POutShape,
    #[error("keep-probabilities must lie in [0,1]")]
    BadPOut,
    #[error("learning_rate must be > 0")]
    BadLearningRate,
    #[error("batch_size and epochs must be >= 1")]
    BadSchedule,
    #[error("dataset is empty or its width does not match the input layer")]
    DataShape,
    #[error("early stopping needs a non-empty validation split")]
    NoValidationSplit,
    #[error("non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
}

/// Architecture and schedule of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetConfig {
    /// Input, hidden..., output widths.
    pub layer_sizes: Vec<usize>,
    /// Keep-probability per hidden layer.
    pub p_out: Vec<f64>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
    /// Cap on the training points used for the per-epoch surrogate.
    #[serde(default = "default_ic_subsample")]
    pub ic_subsample: usize,
}

fn default_ic_subsample() -> usize {
    500
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.layer_sizes.len() < 3 {
            return Err(TrainError::TooFewLayers);
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(TrainError::ZeroWidth);
        }
        let hidden = self.layer_sizes.len() - 2;
        if self.p_out.len() != hidden {
            return Err(TrainError::POutShape);
        }
        if self.p_out.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(TrainError::BadPOut);
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::BadLearningRate);
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(TrainError::BadSchedule);
        }
        Ok(())
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_sizes.len() - 2
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// Row-major weights, one row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weights: vec![vec![0.0; inp]; out],
            biases: vec![0.0; out],
        }
    }
}

/// The network: hidden layers with logistic activation, then a softmax
/// output layer.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    /// Keep-probability of the mask on each hidden layer's input.
    pub p_out: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Mlp {
    /// Seeded uniform init scaled by the fan-in.
    pub fn init(config: &NetConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (inp, out) = (w[0], w[1]);
                let scale = 1.0 / (inp as f64).sqrt();
                Layer {
                    weights: (0..out)
                        .map(|_| (0..inp).map(|_| rng.gen_range(-scale..scale)).collect())
                        .collect(),
                    biases: vec![0.0; out],
                }
            })
            .collect();
        Ok(Self {
            layers,
            p_out: config.p_out.clone(),
        })
    }

    /// All-zero parameters, used by the tracking edge cases.
    pub fn zeros(config: &NetConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| Layer::zeros(w[1], w[0]))
            .collect();
        Ok(Self {
            layers,
            p_out: config.p_out.clone(),
        })
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// Deterministic evaluation pass: hidden-layer inputs scaled by their
    /// keep-probabilities. Returns every activation vector, input first.
    pub fn forward_eval(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        for (k, layer) in self.layers.iter().enumerate() {
            let prev = acts.last().expect("non-empty activations");
            let scale = if k < self.p_out.len() {
                self.p_out[k]
            } else {
                1.0
            };
            let scores: Vec<f64> = layer
                .weights
                .iter()
                .zip(&layer.biases)
                .map(|(row, &b)| {
                    b + row
                        .iter()
                        .zip(prev)
                        .map(|(&w, &a)| w * a * scale)
                        .sum::<f64>()
                })
                .collect();
            if k + 1 == self.layers.len() {
                acts.push(softmax(&scores));
            } else {
                acts.push(scores.into_iter().map(sigmoid).collect());
            }
        }
        acts
    }

    /// Class probabilities for one input.
    pub fn predict(&self, input: &[f64]) -> Vec<f64> {
        self.forward_eval(input).pop().expect("output layer")
    }

    /// Analytic gradient of the single-sample cross-entropy loss with all
    /// units kept, as used by the SGD step.
    pub fn loss_gradient(&self, input: &[f64], label: usize) -> Vec<Layer> {
        let masks: Vec<Vec<u8>> = (0..self.hidden_layers())
            .map(|k| vec![1u8; self.layers[k].weights[0].len()])
            .collect();
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer::zeros(l.weights.len(), l.weights[0].len()))
            .collect();
        backprop_sample(self, input, label, &masks, &mut grads);
        grads
    }

    /// Cross-entropy and misclassification rate over a dataset.
    pub fn evaluate(&self, data: &BitDataset) -> (f64, f64) {
        let mut loss = 0.0;
        let mut wrong = 0usize;
        for (bits, &label) in data.features.iter().zip(&data.labels) {
            let input: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
            let probs = self.predict(&input);
            loss += -(probs[label].max(1e-300)).ln();
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .expect("non-empty output");
            if argmax != label {
                wrong += 1;
            }
        }
        let n = data.len() as f64;
        (loss / n, wrong as f64 / n)
    }
}

/// One training pass over a sample: masked forward then backprop into the
/// gradient accumulators. Returns the sample loss.
fn backprop_sample(
    net: &Mlp,
    input: &[f64],
    label: usize,
    masks: &[Vec<u8>],
    grads: &mut [Layer],
) -> f64 {
    let depth = net.layers.len();
    // Forward with masks on hidden-layer inputs.
    let mut masked_inputs: Vec<Vec<f64>> = Vec::with_capacity(depth);
    let mut acts: Vec<Vec<f64>> = vec![input.to_vec()];
    for (k, layer) in net.layers.iter().enumerate() {
        let prev = acts.last().expect("non-empty activations");
        let masked: Vec<f64> = if k < masks.len() {
            prev.iter()
                .zip(&masks[k])
                .map(|(&a, &z)| if z != 0 { a } else { 0.0 })
                .collect()
        } else {
            prev.clone()
        };
        let scores: Vec<f64> = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, &b)| {
                b + row.iter().zip(&masked).map(|(&w, &a)| w * a).sum::<f64>()
            })
            .collect();
        masked_inputs.push(masked);
        if k + 1 == depth {
            acts.push(softmax(&scores));
        } else {
            acts.push(scores.into_iter().map(sigmoid).collect());
        }
    }
    let output = acts.last().expect("output");
    let loss = -(output[label].max(1e-300)).ln();

    // Output delta is softmax minus the one-hot target.
    let mut delta: Vec<f64> = output
        .iter()
        .enumerate()
        .map(|(i, &p)| p - f64::from(u8::from(i == label)))
        .collect();
    for k in (0..depth).rev() {
        let layer = &net.layers[k];
        for (j, &d) in delta.iter().enumerate() {
            grads[k].biases[j] += d;
            for (i, &m) in masked_inputs[k].iter().enumerate() {
                if m != 0.0 {
                    grads[k].weights[j][i] += d * m;
                }
            }
        }
        if k == 0 {
            break;
        }
        // Gradient into the previous activation, through mask and logistic.
        let prev_act = &acts[k];
        let mut next_delta = vec![0.0; prev_act.len()];
        for (j, &d) in delta.iter().enumerate() {
            for (i, nd) in next_delta.iter_mut().enumerate() {
                *nd += layer.weights[j][i] * d;
            }
        }
        // The output layer's input carries no mask.
        let mask = masks.get(k);
        for (i, nd) in next_delta.iter_mut().enumerate() {
            let gate = mask.map_or(1.0, |m| if m[i] != 0 { 1.0 } else { 0.0 });
            *nd *= gate * prev_act[i] * (1.0 - prev_act[i]);
        }
        delta = next_delta;
    }
    loss
}

/// Per-epoch metrics.
#[derive(Debug, Clone, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_risk: f64,
    pub val_risk: f64,
    pub test_risk: f64,
    pub gap: f64,
    pub train_misclass: f64,
    pub val_misclass: f64,
    pub test_misclass: f64,
    pub ic_layers: Vec<f64>,
    pub ic_aggregate: f64,
    /// sqrt of the aggregate: the tracked surrogate.
    pub ic_surrogate: f64,
}

/// Complete record of a training run.
#[derive(Debug, Clone, Serialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    pub ic_subsample: usize,
    /// Best-validation epoch when early stopping fired.
    pub best_epoch: Option<usize>,
}

impl TrainHistory {
    pub fn last(&self) -> &EpochRecord {
        self.records.last().expect("at least one epoch")
    }

    pub fn to_csv(&self) -> String {
        let layers = self.records.first().map_or(0, |r| r.ic_layers.len());
        let mut header = String::from("epoch,train_risk,test_risk,gap");
        for k in 0..layers {
            header.push_str(&format!(",ic_layer_{k}"));
        }
        header.push_str(",ic_aggregate\n");
        let mut out = header;
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}",
                r.epoch, r.train_risk, r.test_risk, r.gap
            ));
            for v in &r.ic_layers {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", r.ic_aggregate));
        }
        out
    }
}

/// SGD training loop. Corruption rewrites the training labels only;
/// validation and test keep theirs. Deterministic for a fixed config.
pub fn train_mlp(
    config: &NetConfig,
    train: &BitDataset,
    val: &BitDataset,
    test: &BitDataset,
    corruption: &LabelCorruption,
) -> Result<TrainHistory, TrainError> {
    config.validate()?;
    let mut net = Mlp::init(config)?;
    train_mlp_into(config, &mut net, train, val, test, corruption)
}

/// Same loop, continuing from the given network state. Used by the phase
/// experiments to retrain on fresh data.
pub fn train_mlp_into(
    config: &NetConfig,
    net: &mut Mlp,
    train: &BitDataset,
    val: &BitDataset,
    test: &BitDataset,
    corruption: &LabelCorruption,
) -> Result<TrainHistory, TrainError> {
    config.validate()?;
    let input_dim = config.layer_sizes[0];
    if train.is_empty() || train.dim != input_dim || test.dim != input_dim {
        return Err(TrainError::DataShape);
    }
    if config.early_stop_patience > 0 && val.is_empty() {
        return Err(TrainError::NoValidationSplit);
    }
    let train = corruption.apply(train);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Fixed subsample for the surrogate, drawn once per run.
    let mut subsample: Vec<usize> = (0..train.len()).collect();
    subsample.shuffle(&mut rng);
    subsample.truncate(config.ic_subsample.min(train.len()));

    let inputs: Vec<Vec<f64>> = train
        .features
        .iter()
        .map(|bits| bits.iter().map(|&b| f64::from(b)).collect())
        .collect();

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut records = Vec::with_capacity(config.epochs);
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut stale = 0usize;
    let mut stopped = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut grads: Vec<Layer> = net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.weights.len(), l.weights[0].len()))
                .collect();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let masks: Vec<Vec<u8>> = (0..net.hidden_layers())
                    .map(|k| {
                        let width = net.layers[k].weights[0].len();
                        (0..width)
                            .map(|_| u8::from(rng.gen::<f64>() < net.p_out[k]))
                            .collect()
                    })
                    .collect();
                batch_loss +=
                    backprop_sample(net, &inputs[idx], train.labels[idx], &masks, &mut grads);
            }
            if !batch_loss.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
            let step = config.learning_rate / batch.len() as f64;
            for (layer, grad) in net.layers.iter_mut().zip(&grads) {
                for (wrow, grow) in layer.weights.iter_mut().zip(&grad.weights) {
                    for (w, &g) in wrow.iter_mut().zip(grow) {
                        *w -= step * g;
                    }
                }
                for (b, &g) in layer.biases.iter_mut().zip(&grad.biases) {
                    *b -= step * g;
                }
            }
        }

        let (train_risk, train_misclass) = net.evaluate(&train);
        if !train_risk.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        let (val_risk, val_misclass) = if val.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            net.evaluate(val)
        };
        let (test_risk, test_misclass) = net.evaluate(test);
        let (ic_layers, ic_aggregate) = track_ic_and_gap(net, &train, &subsample);
        records.push(EpochRecord {
            epoch,
            train_risk,
            val_risk,
            test_risk,
            gap: (test_risk - train_risk).abs(),
            train_misclass,
            val_misclass,
            test_misclass,
            ic_layers,
            ic_aggregate,
            ic_surrogate: ic_aggregate.max(0.0).sqrt(),
        });

        if config.early_stop_patience > 0 {
            if val_misclass < best_val - 1e-12 {
                best_val = val_misclass;
                best_epoch = epoch;
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.early_stop_patience {
                    stopped = Some(best_epoch);
                    break;
                }
            }
        }
    }

    Ok(TrainHistory {
        records,
        ic_subsample: subsample.len(),
        best_epoch: stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::data::{synth_dataset, CorruptionMode};

    fn small_config(layer_sizes: Vec<usize>, p_out: Vec<f64>, seed: u64) -> NetConfig {
        NetConfig {
            layer_sizes,
            p_out,
            learning_rate: 0.1,
            epochs: 3,
            batch_size: 16,
            seed,
            early_stop_patience: 0,
            ic_subsample: 100,
        }
    }

    #[test]
    fn config_rejects_missing_hidden_layer() {
        let cfg = small_config(vec![4, 2], vec![], 0);
        assert!(matches!(cfg.validate(), Err(TrainError::TooFewLayers)));
    }

    #[test]
    fn config_rejects_bad_shapes() {
        assert!(small_config(vec![4, 0, 2], vec![1.0], 0).validate().is_err());
        assert!(small_config(vec![4, 3, 2], vec![1.0, 0.5], 0)
            .validate()
            .is_err());
        assert!(small_config(vec![4, 3, 2], vec![1.5], 0).validate().is_err());
        let mut cfg = small_config(vec![4, 3, 2], vec![1.0], 0);
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn gradients_match_central_differences() {
        // 2-2-2 network without dropout, 50 random parameter points.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let cfg = small_config(vec![2, 2, 2], vec![1.0], 1);
        for trial in 0..50 {
            let mut net = Mlp::init(&cfg).unwrap();
            for layer in net.layers.iter_mut() {
                for row in layer.weights.iter_mut() {
                    for w in row.iter_mut() {
                        *w = rng.gen_range(-1.5..1.5);
                    }
                }
                for b in layer.biases.iter_mut() {
                    *b = rng.gen_range(-1.0..1.0);
                }
            }
            let input = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let label = rng.gen_range(0..2);
            let masks = vec![vec![1u8; 2]];

            let mut grads: Vec<Layer> = net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.weights.len(), l.weights[0].len()))
                .collect();
            backprop_sample(&net, &input, label, &masks, &mut grads);

            let loss_of = |net: &Mlp| -> f64 {
                let probs = net.predict(&input);
                -(probs[label]).ln()
            };
            let step = 1e-5;
            for k in 0..net.layers.len() {
                for j in 0..net.layers[k].weights.len() {
                    for i in 0..net.layers[k].weights[j].len() {
                        let mut plus = net.clone();
                        plus.layers[k].weights[j][i] += step;
                        let mut minus = net.clone();
                        minus.layers[k].weights[j][i] -= step;
                        let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * step);
                        let analytic = grads[k].weights[j][i];
                        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                        assert!(
                            (analytic - numeric).abs() / denom < 1e-4,
                            "trial {trial}: dW[{k}][{j}][{i}] analytic {analytic} vs numeric {numeric}"
                        );
                    }
                    let mut plus = net.clone();
                    plus.layers[k].biases[j] += step;
                    let mut minus = net.clone();
                    minus.layers[k].biases[j] -= step;
                    let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * step);
                    let analytic = grads[k].biases[j];
                    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                    assert!(
                        (analytic - numeric).abs() / denom < 1e-4,
                        "trial {trial}: db[{k}][{j}]"
                    );
                }
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = synth_dataset(3, 8, 120, 0.9, 5).unwrap();
        let val = synth_dataset(3, 8, 30, 0.9, 6).unwrap();
        let test = synth_dataset(3, 8, 60, 0.9, 7).unwrap();
        let mut cfg = small_config(vec![8, 6, 3], vec![0.8], 11);
        cfg.epochs = 4;
        let a = train_mlp(&cfg, &data, &val, &test, &LabelCorruption::none()).unwrap();
        let b = train_mlp(&cfg, &data, &val, &test, &LabelCorruption::none()).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.train_risk.to_bits(), rb.train_risk.to_bits());
            assert_eq!(ra.test_risk.to_bits(), rb.test_risk.to_bits());
            assert_eq!(ra.ic_aggregate.to_bits(), rb.ic_aggregate.to_bits());
        }
    }

    #[test]
    fn gap_field_matches_risk_difference() {
        let data = synth_dataset(3, 8, 100, 0.8, 5).unwrap();
        let test = synth_dataset(3, 8, 50, 0.8, 6).unwrap();
        let cfg = small_config(vec![8, 4, 3], vec![1.0], 3);
        let h = train_mlp(&cfg, &data, &data, &test, &LabelCorruption::none()).unwrap();
        for r in &h.records {
            assert!((r.gap - (r.test_risk - r.train_risk).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_data_trains_to_low_error() {
        let data = synth_dataset(4, 16, 400, 1.0, 9).unwrap();
        let test = synth_dataset(4, 16, 200, 1.0, 10).unwrap();
        let mut cfg = small_config(vec![16, 16, 4], vec![1.0], 2);
        cfg.epochs = 40;
        let h = train_mlp(&cfg, &data, &data, &test, &LabelCorruption::none()).unwrap();
        assert!(
            h.last().train_misclass < 0.05,
            "train misclassification stayed at {}",
            h.last().train_misclass
        );
    }

    #[test]
    fn random_labels_give_chance_level_test_error() {
        // Zero separation makes features independent of labels, so test
        // predictions are independent of the true labels by construction
        // and the error concentrates at 1 - 1/classes.
        let data = synth_dataset(4, 16, 400, 0.0, 13).unwrap();
        let test = synth_dataset(4, 16, 1000, 0.0, 14).unwrap();
        let mut cfg = small_config(vec![16, 16, 4], vec![1.0], 4);
        cfg.epochs = 25;
        let corruption = LabelCorruption {
            mode: CorruptionMode::Random,
            seed: 99,
        };
        let h = train_mlp(&cfg, &data, &data, &test, &corruption).unwrap();
        let err = h.last().test_misclass;
        assert!(
            (err - 0.75).abs() < 0.05,
            "test error {err} not at chance level"
        );
    }

    #[test]
    fn early_stopping_requires_validation() {
        let data = synth_dataset(3, 8, 60, 0.9, 5).unwrap();
        let empty = BitDataset {
            features: vec![],
            labels: vec![],
            classes: 3,
            dim: 8,
        };
        let mut cfg = small_config(vec![8, 4, 3], vec![1.0], 3);
        cfg.early_stop_patience = 2;
        assert!(matches!(
            train_mlp(&cfg, &data, &empty, &data, &LabelCorruption::none()),
            Err(TrainError::NoValidationSplit)
        ));
    }

    #[test]
    fn early_stopping_truncates_history() {
        let data = synth_dataset(3, 8, 150, 1.0, 5).unwrap();
        let val = synth_dataset(3, 8, 40, 1.0, 6).unwrap();
        let mut cfg = small_config(vec![8, 8, 3], vec![1.0], 3);
        cfg.epochs = 60;
        cfg.early_stop_patience = 3;
        let h = train_mlp(&cfg, &data, &val, &data, &LabelCorruption::none()).unwrap();
        assert!(h.records.len() < 60, "early stopping never fired");
        assert!(h.best_epoch.is_some());
    }

    #[test]
    fn dropout_mask_frequency_matches_bernoulli_parameter() {
        // A frozen dropout unit fires with probability p * sigma(b + <w,x>)
        // exactly; the simulated frequency must land within three standard
        // errors of it.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let (w, b, p) = (1.3f64, -0.4f64, 0.7f64);
        let x = 1.0f64;
        let target = p * super::sigmoid(b + w * x);
        let draws = 100_000;
        let mut fired = 0usize;
        for _ in 0..draws {
            let kept = rng.gen::<f64>() < p;
            let active = kept && rng.gen::<f64>() < super::sigmoid(b + w * x);
            if active {
                fired += 1;
            }
        }
        let freq = fired as f64 / draws as f64;
        let se = (target * (1.0 - target) / draws as f64).sqrt();
        assert!(
            (freq - target).abs() <= 3.0 * se,
            "freq {freq} vs parameter {target} (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn masked_preactivation_frequency_matches_gaussian_parameter() {
        // 64 equal active weights with the threshold between binomial atoms:
        // the Gaussian value is accurate to ~2e-4 there, well inside the
        // Monte-Carlo band.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let k = 64usize;
        let w = vec![1.0f64; k];
        let b = -31.5f64;
        let p = 0.5f64;
        let x = vec![1u8; k];
        let spec =
            crate::encoders::DropoutEncoderSpec::new(vec![w.clone()], vec![b], p).unwrap();
        let table = crate::encoders::ff_clt_channel(&spec, &[x]).unwrap();
        let param = table.params[0][0];
        let draws = 100_000;
        let mut fired = 0usize;
        for _ in 0..draws {
            let mut sum = b;
            for &wi in &w {
                if rng.gen::<f64>() < p {
                    sum += wi;
                }
            }
            if sum > 0.0 {
                fired += 1;
            }
        }
        let freq = fired as f64 / draws as f64;
        let se = (param * (1.0 - param) / draws as f64).sqrt();
        assert!(
            (freq - param).abs() <= 3.0 * se,
            "freq {freq} vs parameter {param} (3se = {})",
            3.0 * se
        );
    }
}
