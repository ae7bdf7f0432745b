//! Seeded sweeps over architecture and noise, and the three-phase
//! label-corruption protocol with its change-point statistic. Sweep cells
//! run concurrently with independent generators and merge in value order.

use super::data::{synth_dataset, BitDataset, CorruptionMode, LabelCorruption};
use super::net::{train_mlp_into, EpochRecord, Mlp, NetConfig, TrainError};
use serde::{Deserialize, Serialize};

/// Synthetic data shape shared by all sweep cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: usize,
    pub dim: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub separation: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: 4,
            dim: 20,
            n_train: 2000,
            n_val: 200,
            n_test: 2000,
            separation: 0.75,
        }
    }
}

/// Base configuration of one training cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSetup {
    pub data: SynthSpec,
    pub net: NetConfig,
}

impl TrainSetup {
    /// Desk-scale default: two hidden layers, dropout in the upper part of
    /// the usual range, constant-rate SGD.
    pub fn desk_default() -> Self {
        Self {
            data: SynthSpec::default(),
            net: NetConfig {
                layer_sizes: vec![20, 32, 32, 4],
                p_out: vec![0.8, 0.8],
                learning_rate: 0.1,
                epochs: 30,
                batch_size: 32,
                seed: 0,
                early_stop_patience: 0,
                ic_subsample: 500,
            },
        }
    }

    fn datasets(&self, seed: u64) -> (BitDataset, BitDataset, BitDataset) {
        let s = &self.data;
        let train = synth_dataset(s.classes, s.dim, s.n_train, s.separation, seed)
            .expect("valid synth shape");
        let val = synth_dataset(
            s.classes,
            s.dim,
            s.n_val.max(1),
            s.separation,
            seed ^ 0x00aa_55aa,
        )
        .expect("valid synth shape");
        let test = synth_dataset(
            s.classes,
            s.dim,
            s.n_test,
            s.separation,
            seed ^ 0x0155_aa55,
        )
        .expect("valid synth shape");
        (train, val, test)
    }
}

/// Sweep dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    HiddenUnits,
    POut,
    CorruptionPhase,
}

/// Per-value aggregation over repeats.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub mean_ic: f64,
    pub std_ic: f64,
}

/// Concatenated three-phase record with the corruption switch position.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseHistory {
    pub records: Vec<EpochRecord>,
    /// Index of the first epoch trained on corrupted labels.
    pub switch_epoch: usize,
    pub phase_epochs: usize,
}

impl PhaseHistory {
    pub fn ic_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ic_surrogate).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,phase,train_risk,test_risk,gap,ic_surrogate\n");
        for (i, r) in self.records.iter().enumerate() {
            let phase = i / self.phase_epochs;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i, phase, r.train_risk, r.test_risk, r.gap, r.ic_surrogate
            ));
        }
        out
    }
}

/// Sweep result: one aggregated row per axis value, plus the full phase
/// traces when the axis is the corruption protocol.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub phase_runs: Vec<Vec<PhaseHistory>>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mean_gap,std_gap,mean_ic,std_ic\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.value, r.mean_gap, r.std_gap, r.mean_ic, r.std_ic
            ));
        }
        out
    }
}

fn mix_seed(base: u64, value_index: usize, repeat: usize) -> u64 {
    let mut z = base
        .wrapping_add((value_index as u64) << 32)
        .wrapping_add(repeat as u64 + 1)
        .wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Three-phase protocol: train on fresh normal data, retrain on more fresh
/// normal data, then retrain on fresh data with corrupted labels, carrying
/// the network state across phases. Early stopping is disabled so the
/// per-epoch trace spans all phases.
pub fn three_phase(
    base: &TrainSetup,
    mode: CorruptionMode,
    seed: u64,
) -> Result<PhaseHistory, TrainError> {
    let mut config = base.net.clone();
    config.seed = seed;
    config.early_stop_patience = 0;
    config.validate()?;
    let phase_epochs = config.epochs;
    let (_, val, test) = base.datasets(mix_seed(seed, 1000, 0));
    let mut net = Mlp::init(&config)?;
    let mut records = Vec::with_capacity(3 * phase_epochs);
    for phase in 0..3usize {
        let train = {
            let s = &base.data;
            synth_dataset(
                s.classes,
                s.dim,
                s.n_train,
                s.separation,
                mix_seed(seed, 2000 + phase, 0),
            )
            .expect("valid synth shape")
        };
        let corruption = if phase == 2 {
            LabelCorruption {
                mode,
                seed: mix_seed(seed, 3000, 0),
            }
        } else {
            LabelCorruption::none()
        };
        let mut phase_config = config.clone();
        phase_config.seed = mix_seed(seed, 4000 + phase, 0);
        let history = train_mlp_into(&phase_config, &mut net, &train, &val, &test, &corruption)?;
        records.extend(history.records);
    }
    Ok(PhaseHistory {
        records,
        switch_epoch: 2 * phase_epochs,
        phase_epochs,
    })
}

/// Change-point statistic: how many pre-switch standard deviations the mean
/// of the `window` epochs after the switch sits above the mean of the
/// `window` epochs before it.
pub fn ic_jump_sigmas(trace: &[f64], switch_epoch: usize, window: usize) -> f64 {
    assert!(switch_epoch >= window && switch_epoch + window <= trace.len());
    let before = &trace[switch_epoch - window..switch_epoch];
    let after = &trace[switch_epoch..switch_epoch + window];
    let (mb, sb) = mean_std(before);
    let (ma, _) = mean_std(after);
    if sb < 1e-15 {
        if ma > mb {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        (ma - mb) / sb
    }
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |values: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0.0; values.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &idx in &order[i..=j] {
                ranks[idx] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn run_cell(
    axis: SweepAxis,
    value: f64,
    base: &TrainSetup,
    seed: u64,
) -> Result<(f64, f64, Option<PhaseHistory>), TrainError> {
    match axis {
        SweepAxis::HiddenUnits => {
            let mut setup = base.clone();
            let units = value.round() as usize;
            let depth = setup.net.layer_sizes.len();
            for size in setup.net.layer_sizes[1..depth - 1].iter_mut() {
                *size = units.max(1);
            }
            let mut config = setup.net.clone();
            config.seed = seed;
            let (train, val, test) = setup.datasets(mix_seed(seed, 7, 0));
            let mut net = Mlp::init(&config)?;
            let history =
                train_mlp_into(&config, &mut net, &train, &val, &test, &LabelCorruption::none())?;
            Ok((history.last().gap, history.last().ic_surrogate, None))
        }
        SweepAxis::POut => {
            let mut setup = base.clone();
            let p = value.clamp(0.0, 1.0);
            // Hold m * p_out constant at each hidden layer's base product.
            let depth = setup.net.layer_sizes.len();
            for k in 0..depth - 2 {
                let budget = setup.net.layer_sizes[k + 1] as f64 * setup.net.p_out[k];
                setup.net.layer_sizes[k + 1] = (budget / p.max(1e-9)).round().max(1.0) as usize;
                setup.net.p_out[k] = p;
            }
            let mut config = setup.net.clone();
            config.seed = seed;
            let (train, val, test) = setup.datasets(mix_seed(seed, 7, 0));
            let mut net = Mlp::init(&config)?;
            let history =
                train_mlp_into(&config, &mut net, &train, &val, &test, &LabelCorruption::none())?;
            Ok((history.last().gap, history.last().ic_surrogate, None))
        }
        SweepAxis::CorruptionPhase => {
            let mode = match value.round() as usize {
                0 => CorruptionMode::Normal,
                1 => CorruptionMode::Roll,
                _ => CorruptionMode::Random,
            };
            let history = three_phase(base, mode, seed)?;
            let third: Vec<&EpochRecord> = history
                .records
                .iter()
                .skip(history.switch_epoch)
                .collect();
            let gap = third.iter().map(|r| r.gap).sum::<f64>() / third.len() as f64;
            let ic = third.iter().map(|r| r.ic_surrogate).sum::<f64>() / third.len() as f64;
            Ok((gap, ic, Some(history)))
        }
    }
}

/// Run `repeats` seeded cells per axis value and aggregate. A single-point
/// sweep with one repeat reproduces a direct training run.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &TrainSetup,
    repeats: usize,
) -> Result<SweepTable, TrainError> {
    assert!(!values.is_empty() && repeats >= 1);
    type CellOutcome = Result<(f64, f64, Option<PhaseHistory>), TrainError>;
    let cells: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..repeats).map(move |r| (v, r)))
        .collect();
    let outcomes: Vec<CellOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&(v, r)| {
                let value = values[v];
                let seed = mix_seed(base.net.seed, v, r);
                scope.spawn(move || run_cell(axis, value, base, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep cell panicked"))
            .collect()
    });

    let mut rows = Vec::with_capacity(values.len());
    let mut phase_runs: Vec<Vec<PhaseHistory>> = Vec::new();
    for (v, &value) in values.iter().enumerate() {
        let mut gaps = Vec::with_capacity(repeats);
        let mut ics = Vec::with_capacity(repeats);
        let mut histories = Vec::new();
        for r in 0..repeats {
            let idx = v * repeats + r;
            let (gap, ic, phase) = match &outcomes[idx] {
                Ok(x) => (x.0, x.1, x.2.clone()),
                Err(e) => {
                    return Err(match e {
                        TrainError::Diverged { epoch } => TrainError::Diverged { epoch: *epoch },
                        _ => TrainError::DataShape,
                    })
                }
            };
            gaps.push(gap);
            ics.push(ic);
            if let Some(h) = phase {
                histories.push(h);
            }
        }
        let (mean_gap, std_gap) = mean_std(&gaps);
        let (mean_ic, std_ic) = mean_std(&ics);
        rows.push(SweepRow {
            value,
            mean_gap,
            std_gap,
            mean_ic,
            std_ic,
        });
        if !histories.is_empty() {
            phase_runs.push(histories);
        }
    }
    Ok(SweepTable {
        axis,
        rows,
        phase_runs,
    })
}
