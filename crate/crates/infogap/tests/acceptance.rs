//! Acceptance suite: one test per criterion, each printing a pass line when
//! it completes. Run with `cargo test -p infogap --test acceptance --
//! --nocapture` to see the per-criterion lines.

use infogap::capacity::{encoder_capacity, fano_sandwich, fano_g_inv};
use infogap::encoders::{
    dropout_cost_scan, gan_exact_channel_information, gan_objective, kl_bernoulli,
    materialize_product_channel, rbm_channel, rbm_ic_bound, BitInputPmf, DropoutEncoderSpec,
    GanModel, LabeledInputPmf, SoftmaxDecoderSpec,
};
use infogap::gap_bounds::{
    decoder_efficiency, empirical_decoder, sample_from_joint, smooth_decoder, gap_bound_report,
};
use infogap::ib::{ib_optimize, multilayer_ic_bound, IbConfig, LayerStack};
use infogap::prob::{
    binary_entropy, empirical_joint, mutual_information, Alphabet, Channel, JointPmf,
    LabeledDataset, ModelAssumptions, Pmf,
};
use infogap::rate_distortion::{
    blahut_arimoto_point, distortion_rate_inverse, rd_curve, RdProblem,
};
use infogap::trainer::{
    ic_jump_sigmas, spearman, sweep, three_phase, CorruptionMode, Mlp, NetConfig, SweepAxis,
    TrainSetup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

/// Exhaustive misidentification oracle over every map from representations
/// to sample symbols.
fn epsilon_bruteforce(encoder: &Channel, support: &[usize]) -> f64 {
    let nu = encoder.to_alphabet().size();
    let a = support.len();
    let total = (a as u64).pow(nu as u32);
    let mut best_mass = f64::NEG_INFINITY;
    for code in 0..total {
        let mut rem = code;
        let mut mass = 0.0;
        for u in 0..nu {
            let x = support[(rem % a as u64) as usize];
            rem /= a as u64;
            mass += encoder.prob(x, u);
        }
        best_mass = best_mass.max(mass);
    }
    1.0 - best_mass / a as f64
}

#[test]
fn criterion_1_fano_sandwich() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for trial in 0..1000 {
        let nx = rng.gen_range(2..=6);
        let nu = rng.gen_range(2..=6);
        let x = Alphabet::indexed("x", nx).unwrap();
        let u = Alphabet::indexed("u", nu).unwrap();
        let encoder = random_channel(&mut rng, &x, &u);
        let px = Pmf::uniform(x);
        let report = fano_sandwich(&encoder, &px).unwrap();

        let support: Vec<usize> = (0..nx).collect();
        let eps = if nu * nx <= 36 {
            epsilon_bruteforce(&encoder, &support)
        } else {
            encoder_capacity(&encoder, &px).unwrap().epsilon
        };
        assert!(
            report.fano_lower - 1e-9 <= eps,
            "trial {trial}: lower {} above brute-force epsilon {eps}",
            report.fano_lower
        );
        assert!(
            eps <= report.half_upper + 1e-9,
            "trial {trial}: brute-force epsilon {eps} above upper {}",
            report.half_upper
        );
        assert!(
            report.ic <= report.capacity + 1e-9,
            "trial {trial}: information {} above capacity {}",
            report.ic,
            report.capacity
        );
    }
    assert!(start.elapsed().as_secs() < 30, "criterion 1 exceeded 30 s");
    println!("acceptance criterion 1 (Fano sandwich, 1000 encoders): PASS");
}

#[test]
fn criterion_2_binary_hamming_rate_distortion() {
    let start = std::time::Instant::now();
    let y = Alphabet::indexed("y", 2).unwrap();
    let u = Alphabet::indexed("u", 2).unwrap();
    let decoder = Channel::new(u, y.clone(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let problem = RdProblem::new(Pmf::uniform(y), decoder).unwrap();
    for k in 1..=9 {
        let d = 0.05 * k as f64;
        let slope = (d / (1.0 - d)).ln();
        let point = blahut_arimoto_point(&problem, slope, 1e-12, 10_000).unwrap();
        let closed_form = 2f64.ln() - binary_entropy(d);
        assert!(
            (point.rate - closed_form).abs() < 1e-4,
            "solver rate {} vs closed form {closed_form} at D = {d}",
            point.rate
        );
        assert!((point.distortion - d).abs() < 1e-4);
    }
    let curve = rd_curve(&problem, 33).unwrap();
    for k in 1..=9 {
        let d = 0.05 * k as f64;
        let rate = 2f64.ln() - binary_entropy(d);
        let inverse = distortion_rate_inverse(&curve, rate);
        assert!(
            (inverse - d).abs() < 1e-3,
            "round trip at D = {d} gave {inverse}"
        );
    }
    assert!(start.elapsed().as_secs() < 5, "criterion 2 exceeded 5 s");
    println!("acceptance criterion 2 (binary Hamming rate-distortion): PASS");
}

#[test]
fn criterion_3_gap_bound_evaluation() {
    let start = std::time::Instant::now();
    // Hand arithmetic for the constants.
    let b_delta = 1.0 + ((10.0f64 + 4.0) / 0.05).ln().sqrt();
    assert!((b_delta - 3.37377).abs() < 1e-3);
    let b2 = 1.0 + ((2.0f64 + 4.0) / 0.1).ln().sqrt();
    let c_delta = 2.0 * 4.0 * (-1.0f64).exp() + b2 * 2f64.sqrt() * (4.0f64 / 0.5).ln();
    assert!((c_delta - 11.834).abs() < 1e-3);

    // Lambda vanishes exactly at the empirical decoder.
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let x = Alphabet::indexed("x", 3).unwrap();
    let y = Alphabet::indexed("y", 2).unwrap();
    let u = Alphabet::indexed("u", 3).unwrap();
    let pairs: Vec<(usize, usize)> = (0..60)
        .map(|_| (rng.gen_range(0..3), rng.gen_range(0..2)))
        .collect();
    let data = LabeledDataset::new(x.clone(), y.clone(), pairs).unwrap();
    let encoder = random_channel(&mut rng, &x, &u);
    let emp = empirical_decoder(&encoder, &data, 0.0).unwrap();
    assert_eq!(decoder_efficiency(&encoder, &emp, &emp), 0.0);

    // Monte-Carlo dominance: 200 trials at n = 500, delta = 0.05.
    let mut hits = 0;
    for _ in 0..200 {
        let nx = rng.gen_range(2..=4);
        let ny = rng.gen_range(2..=3);
        let nu = rng.gen_range(2..=4);
        let xa = Alphabet::indexed("x", nx).unwrap();
        let ya = Alphabet::indexed("y", ny).unwrap();
        let ua = Alphabet::indexed("u", nu).unwrap();
        let mut probs: Vec<Vec<f64>> = (0..nx)
            .map(|_| (0..ny).map(|_| rng.gen::<f64>() + 0.1).collect())
            .collect();
        let total: f64 = probs.iter().flatten().sum();
        probs
            .iter_mut()
            .for_each(|row| row.iter_mut().for_each(|v| *v /= total));
        let joint = JointPmf::new(xa.clone(), ya.clone(), probs).unwrap();
        let sample = sample_from_joint(&joint, 500, &mut rng);
        let encoder = random_channel(&mut rng, &xa, &ua);
        let decoder = smooth_decoder(&empirical_decoder(&encoder, &sample, 0.0).unwrap()).0;
        let assumptions = ModelAssumptions::new(0.01, false).unwrap();
        let report =
            gap_bound_report(&encoder, &decoder, &sample, 0.05, &assumptions, Some(&joint)).unwrap();
        if report.observed_gap.unwrap() <= report.total_bound {
            hits += 1;
        }
    }
    assert!(
        hits >= 190,
        "gap bound held in only {hits}/200 Monte-Carlo trials"
    );
    assert!(start.elapsed().as_secs() < 120, "criterion 3 exceeded 2 min");
    println!("acceptance criterion 3 (gap bound constants and dominance, {hits}/200): PASS");
}

#[test]
fn criterion_4_dropout_bounds() {
    let start = std::time::Instant::now();
    // The two-sigma instance reproduces the averaged Bernoulli divergence.
    let logit = |s: f64| (s / (1.0 - s)).ln();
    let spec =
        DropoutEncoderSpec::new(vec![vec![logit(0.9) - logit(0.1)]], vec![logit(0.1)], 1.0)
            .unwrap();
    let pmf = BitInputPmf::uniform(vec![vec![1], vec![0]]).unwrap();
    let bound = rbm_ic_bound(&spec, &pmf).unwrap();
    let oracle = 0.5 * (kl_bernoulli(0.9, 0.5) + kl_bernoulli(0.1, 0.5));
    assert!(
        (bound - oracle).abs() < 1e-9,
        "bound {bound} vs hand value {oracle}"
    );
    assert!((bound - 0.368064).abs() < 1e-6);

    // Strict monotonicity in the keep-probability on 100 random specs.
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    for _ in 0..100 {
        let d = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=3);
        let weights: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let biases: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = DropoutEncoderSpec::new(weights, biases, 0.5).unwrap();
        let inputs = vec![vec![0; d], {
            let mut v = vec![0; d];
            v[0] = 1;
            v
        }];
        let pmf = BitInputPmf::uniform(inputs).unwrap();
        let mut last = -1.0;
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let b = rbm_ic_bound(&spec.with_p_out(p).unwrap(), &pmf).unwrap();
            assert!(
                b > last || (k == 0 && b == 0.0),
                "bound not strictly increasing at p = {p}"
            );
            last = b;
        }
    }

    // Bound dominates the exact product-channel information for m <= 10.
    for _ in 0..20 {
        let d = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=10);
        let weights: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let biases: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = DropoutEncoderSpec::new(weights, biases, rng.gen_range(0.1..1.0)).unwrap();
        let inputs: Vec<Vec<u8>> = (0..3)
            .map(|_| (0..d).map(|_| rng.gen_range(0..2) as u8).collect())
            .collect();
        let pmf = BitInputPmf::uniform(inputs).unwrap();
        let bound = rbm_ic_bound(&spec, &pmf).unwrap();
        let table = rbm_channel(&spec, &pmf.vectors).unwrap();
        let labels = Alphabet::indexed("i", pmf.len()).unwrap();
        let channel = materialize_product_channel(&table, &labels).unwrap();
        let input = Pmf::new(labels, pmf.probs.clone()).unwrap();
        let exact = mutual_information(&input, &channel).unwrap();
        assert!(bound >= exact - 1e-9, "bound {bound} below exact {exact}");
    }

    // Interior optimum of the penalized scan on the constructed instance.
    let spec = DropoutEncoderSpec::new(
        vec![
            vec![6.0, -6.0],
            vec![-6.0, 6.0],
            vec![6.0, -6.0],
            vec![-6.0, 6.0],
        ],
        vec![0.0; 4],
        0.5,
    )
    .unwrap();
    let decoder = SoftmaxDecoderSpec::new(vec![
        vec![2.0, -2.0, 2.0, -2.0],
        vec![-2.0, 2.0, -2.0, 2.0],
    ])
    .unwrap();
    let joint = LabeledInputPmf::new(
        vec![vec![1, 0], vec![0, 1]],
        vec![0.5, 0.5],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    )
    .unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let scan = dropout_cost_scan(&spec, &decoder, &joint, 0.5, &grid).unwrap();
    let j0 = scan.rows.first().unwrap().j;
    let j1 = scan.rows.last().unwrap().j;
    assert!(
        scan.j_star < j0.min(j1) - 1e-9,
        "no interior optimum: J* = {}, J(0) = {j0}, J(1) = {j1}",
        scan.j_star
    );
    assert!(start.elapsed().as_secs() < 60, "criterion 4 exceeded 1 min");
    println!("acceptance criterion 4 (dropout information bounds): PASS");
}

#[test]
fn criterion_5_bottleneck_and_multilayer() {
    let start = std::time::Instant::now();
    // Identity-coupling instance at lambda = 0 reaches the exhaustive
    // optimum of zero.
    let x = Alphabet::indexed("x", 2).unwrap();
    let y = Alphabet::indexed("y", 2).unwrap();
    let mut pairs = Vec::new();
    for _ in 0..8 {
        pairs.push((0, 0));
        pairs.push((1, 1));
    }
    let data = LabeledDataset::new(x, y, pairs).unwrap();
    let config = IbConfig::new(0.0, 2, 42).unwrap();
    let solution = ib_optimize(&data, &config).unwrap();
    assert!(
        solution.objective.value <= 1e-6,
        "optimizer value {} above 1e-6",
        solution.objective.value
    );

    // Multilayer aggregate dominates the end-to-end information on 200
    // random stacks.
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
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
    }
    assert!(start.elapsed().as_secs() < 60, "criterion 5 exceeded 1 min");
    println!("acceptance criterion 5 (bottleneck optimum and chaining bound): PASS");
}

#[test]
fn criterion_6_gan_objective() {
    let start = std::time::Instant::now();
    let a = Alphabet::indexed("x", 4).unwrap();
    let model = GanModel::new(Pmf::uniform(a.clone()), Pmf::uniform(a), vec![0.5; 4]).unwrap();
    let objective = gan_objective(&model, 0.0);
    assert_eq!(objective.loss, 2.0 * 0.5 * -(0.5f64.ln()));
    assert!((objective.loss - 2f64.ln()).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for _ in 0..50 {
        let n = rng.gen_range(2..=5);
        let alphabet = Alphabet::indexed("x", n).unwrap();
        let mk = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|p| *p /= s);
            v
        };
        let data = Pmf::new(alphabet.clone(), mk(&mut rng)).unwrap();
        let generator = Pmf::new(alphabet.clone(), mk(&mut rng)).unwrap();
        let disc: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let model = GanModel::new(data, generator, disc).unwrap();
        let objective = gan_objective(&model, 1.0);
        let exact = gan_exact_channel_information(&model).unwrap();
        assert!(
            objective.ic_bound >= exact - 1e-9,
            "bound {} below exact information {exact}",
            objective.ic_bound
        );
    }
    assert!(start.elapsed().as_secs() < 5, "criterion 6 exceeded 5 s");
    println!("acceptance criterion 6 (adversarial objective and penalty): PASS");
}

#[test]
fn criterion_7_gradient_check() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let config = NetConfig {
        layer_sizes: vec![2, 2, 2],
        p_out: vec![1.0],
        learning_rate: 0.1,
        epochs: 1,
        batch_size: 1,
        seed: 7,
        early_stop_patience: 0,
        ic_subsample: 10,
    };
    for trial in 0..50 {
        let mut net = Mlp::init(&config).unwrap();
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
        let label = rng.gen_range(0..2usize);
        let grads = net.loss_gradient(&input, label);
        let loss_of = |net: &Mlp| -> f64 { -net.predict(&input)[label].ln() };
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
                        "trial {trial}: gradient mismatch at layer {k} [{j}][{i}]: {analytic} vs {numeric}"
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
                    "trial {trial}: bias gradient mismatch at layer {k} [{j}]"
                );
            }
        }
    }
    assert!(start.elapsed().as_secs() < 10, "criterion 7 exceeded 10 s");
    println!("acceptance criterion 7 (analytic vs numeric gradients): PASS");
}

#[test]
fn criterion_8_hidden_unit_trend() {
    let start = std::time::Instant::now();
    let base = TrainSetup::desk_default();
    let values = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
    let table = sweep(SweepAxis::HiddenUnits, &values, &base, 5).unwrap();
    let ics: Vec<f64> = table.rows.iter().map(|r| r.mean_ic).collect();
    let gaps: Vec<f64> = table.rows.iter().map(|r| r.mean_gap).collect();
    let rho_ic = spearman(&values, &ics);
    let rho_gap = spearman(&values, &gaps);
    assert!(
        rho_ic >= 0.9,
        "units vs surrogate correlation {rho_ic} below 0.9 (ics {ics:?})"
    );
    assert!(
        rho_gap >= 0.7,
        "units vs gap correlation {rho_gap} below 0.7 (gaps {gaps:?})"
    );
    assert!(start.elapsed().as_secs() < 600, "criterion 8 exceeded 10 min");
    println!(
        "acceptance criterion 8 (hidden-unit trend, rho_ic = {rho_ic:.3}, rho_gap = {rho_gap:.3}): PASS"
    );
}

#[test]
fn criterion_9_phase_transition() {
    // As stated: the mean surrogate over the 10 epochs after the random
    // label switch must EXCEED the pre-switch mean by at least three
    // pre-switch standard deviations in at least 4 of 5 seeds.
    let start = std::time::Instant::now();
    let base = TrainSetup::desk_default();
    let mut detections = 0;
    let mut sigmas = Vec::new();
    for seed in 0..5u64 {
        let history = three_phase(&base, CorruptionMode::Random, seed).unwrap();
        let trace = history.ic_trace();
        let jump = ic_jump_sigmas(&trace, history.switch_epoch, 10);
        sigmas.push(jump);
        if jump >= 3.0 {
            detections += 1;
        }
    }
    assert!(start.elapsed().as_secs() < 600, "criterion 9 exceeded 10 min");
    let line = format!(
        "acceptance criterion 9 (phase transition, positive jumps {detections}/5, sigmas {:?})",
        sigmas.iter().map(|s| format!("{s:.1}")).collect::<Vec<_>>()
    );
    assert!(
        detections >= 4,
        "{line}: FAIL - the surrogate drops at the switch at desk scale \
         (the immediate SGD response to random labels is output uniformization, \
         which collapses the surrogate; the memorization-driven rise arrives \
         after the 10-epoch window). See criterion_9_phase_change_detected for \
         the two-sided change-point check."
    );
    println!("{line}: PASS");
}

#[test]
fn criterion_9_diagnostic_change_point_detected() {
    // Companion diagnostic: the corruption switch is a detectable change
    // point of the surrogate trace (two-sided) in at least 4 of 5 seeds.
    let base = TrainSetup::desk_default();
    let mut detections = 0;
    for seed in 0..5u64 {
        let history = three_phase(&base, CorruptionMode::Random, seed).unwrap();
        let trace = history.ic_trace();
        let jump = ic_jump_sigmas(&trace, history.switch_epoch, 10);
        if jump.abs() >= 3.0 {
            detections += 1;
        }
    }
    assert!(
        detections >= 4,
        "change point detected in only {detections}/5 seeds"
    );
    println!(
        "acceptance criterion 9 diagnostic (two-sided change point, {detections}/5 seeds): PASS"
    );
}

#[test]
fn criterion_1_g_inverse_helpers() {
    // Support checks for the sandwich: the link function's inverse clamps
    // at zero on non-positive arguments.
    assert_eq!(fano_g_inv(-1.0, 4), 0.0);
    assert_eq!(fano_g_inv(0.0, 4), 0.0);
}

#[test]
fn criterion_3_reference_instances() {
    // The two constant instances evaluated through the public entry point.
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let x = Alphabet::indexed("x", 3).unwrap();
    let y = Alphabet::indexed("y", 10).unwrap();
    let u = Alphabet::indexed("u", 4).unwrap();
    let pairs: Vec<(usize, usize)> = (0..100)
        .map(|_| (rng.gen_range(0..3), rng.gen_range(0..10)))
        .collect();
    let data = LabeledDataset::new(x.clone(), y, pairs).unwrap();
    let encoder = random_channel(&mut rng, &x, &u);
    let decoder = random_channel(&mut rng, &u, data.y_alphabet());
    let assumptions = ModelAssumptions::new(0.05, false).unwrap();
    let report = gap_bound_report(&encoder, &decoder, &data, 0.05, &assumptions, None).unwrap();
    assert!((report.b_delta - 3.37377).abs() < 1e-5);
    let joint = empirical_joint(&data);
    let _ = joint;
}
