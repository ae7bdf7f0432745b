//! Layer-wise information-complexity surrogate of a trained network: each
//! hidden layer is read as a masked-input dropout channel from its
//! (binarized) input distribution on a fixed training subsample, scored by
//! the per-unit Bernoulli divergence bound, and the layers are chained by
//! taking the minimum.

use super::data::BitDataset;
use super::net::Mlp;
use crate::encoders::{ff_clt_channel, unit_table_ic_bound, DropoutEncoderSpec};
use std::collections::HashMap;

/// Per-layer surrogates and their minimum for the network's current
/// parameters, evaluated on `subsample` indices of `data`.
pub fn track_ic_and_gap(net: &Mlp, data: &BitDataset, subsample: &[usize]) -> (Vec<f64>, f64) {
    let hidden = net.hidden_layers();
    let mut per_layer = Vec::with_capacity(hidden);
    // Layer inputs: raw bits for the first hidden layer, binarized
    // deterministic activations for the rest.
    let mut layer_inputs: Vec<Vec<Vec<u8>>> = vec![Vec::new(); hidden];
    for &idx in subsample {
        let input: Vec<f64> = data.features[idx].iter().map(|&b| f64::from(b)).collect();
        let acts = net.forward_eval(&input);
        for (k, bucket) in layer_inputs.iter_mut().enumerate() {
            let bits: Vec<u8> = acts[k].iter().map(|&a| u8::from(a > 0.5)).collect();
            bucket.push(bits);
        }
    }
    for k in 0..hidden {
        // Deduplicate into an empirical pmf over the observed inputs.
        let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
        for bits in &layer_inputs[k] {
            *counts.entry(bits.clone()).or_insert(0) += 1;
        }
        let mut entries: Vec<(Vec<u8>, usize)> = counts.into_iter().collect();
        entries.sort();
        let total: usize = entries.iter().map(|(_, c)| c).sum();
        let vectors: Vec<Vec<u8>> = entries.iter().map(|(v, _)| v.clone()).collect();
        let probs: Vec<f64> = entries
            .iter()
            .map(|(_, c)| *c as f64 / total as f64)
            .collect();
        let spec = DropoutEncoderSpec::new(
            net.layers[k].weights.clone(),
            net.layers[k].biases.clone(),
            net.p_out[k],
        )
        .expect("layer shapes are consistent");
        let table = ff_clt_channel(&spec, &vectors).expect("inputs match the layer width");
        per_layer.push(unit_table_ic_bound(&table, &probs));
    }
    let aggregate = per_layer.iter().copied().fold(f64::INFINITY, f64::min);
    (per_layer, aggregate)
}
