//! Single binary exposing the library as subcommands with JSON configs and
//! CSV/JSON/SVG outputs. Every successful run writes one manifest holding
//! the command, config path, and seed needed to replay it byte-for-byte.

mod manifest;
mod plot;

use infogap::capacity::fano_sandwich;
use infogap::encoders::{
    dropout_cost_scan, ff_clt_channel, gan_exact_channel_information, gan_objective,
    rbm_ic_bound, unit_table_ic_bound, BitInputPmf, DropoutEncoderSpec, GanModel,
    LabeledInputPmf, SoftmaxDecoderSpec,
};
use infogap::gap_bounds::{misclass_sandwich, gap_bound_report, GapCsvRow};
use infogap::ib::{ib_optimize, IbConfig};
use infogap::prob::{
    empirical_joint, entropy, kl_divergence, mutual_information, Channel, JointPmf,
    LabeledDataset, ModelAssumptions, Pmf,
};
use infogap::rate_distortion::{distortion_rate_inverse, rd_curve, RdProblem};
use infogap::trainer::{
    load_idx, sweep, synth_dataset, train_mlp, BitDataset, LabelCorruption, NetConfig, SweepAxis,
    SynthSpec, TrainSetup,
};
use manifest::ManifestBuilder;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            std::process::exit(1);
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            std::process::exit(2);
        }
    }
}

const USAGE: &str = "usage: infogap <subcommand> [flags]
subcommands:
  measures    entropies, divergences, and mutual information of a JSON instance
  rd          rate-distortion curve and inverse queries
  capacity    encoder capacity and its two-sided bound report
  gap-bound   generalization-gap bound report
  ib          bottleneck objective minimization with trace
  dropout-ic  dropout information-complexity bounds and rate scan
  gan         adversarial-pair objective and penalty
  train       single training run
  sweep       axis sweep over training cells
  plot        CSV to SVG line chart
flags:
  --config <path>   JSON config (CSV input for plot)
  --out <dir>       output directory (default .)
  --seed <u64>      master seed (default 0)
  --format csv|json extra CSV row output where applicable
  --delta <r>       confidence parameter where applicable
  --points <n>      curve sample count for rd (default 33)";

struct Flags {
    config: Option<String>,
    out: PathBuf,
    seed: u64,
    format: String,
    delta: f64,
    points: usize,
}

fn parse_flags(args: &[String]) -> CliResult<Flags> {
    let mut flags = Flags {
        config: None,
        out: PathBuf::from("."),
        seed: 0,
        format: "json".to_string(),
        delta: 0.05,
        points: 33,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| -> CliResult<String> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(grab("--config")?),
            "--out" => flags.out = PathBuf::from(grab("--out")?),
            "--seed" => {
                flags.seed = grab("--seed")?
                    .parse()
                    .map_err(|_| CliError::usage("--seed must be an unsigned integer"))?
            }
            "--format" => {
                let v = grab("--format")?;
                if v != "csv" && v != "json" {
                    return Err(CliError::usage("--format must be csv or json"));
                }
                flags.format = v;
            }
            "--delta" => {
                flags.delta = grab("--delta")?
                    .parse()
                    .map_err(|_| CliError::usage("--delta must be a real number"))?
            }
            "--points" => {
                flags.points = grab("--points")?
                    .parse()
                    .map_err(|_| CliError::usage("--points must be a positive integer"))?
            }
            other => return Err(CliError::usage(format!("unknown flag {other}"))),
        }
    }
    Ok(flags)
}

fn run(args: &[String]) -> CliResult<()> {
    let Some(cmd) = args.first() else {
        return Err(CliError::usage("missing subcommand"));
    };
    let flags = parse_flags(&args[1..])?;
    std::fs::create_dir_all(&flags.out)
        .map_err(|e| CliError::usage(format!("cannot create output dir: {e}")))?;
    match cmd.as_str() {
        "measures" => cmd_measures(&flags),
        "rd" => cmd_rd(&flags),
        "capacity" => cmd_capacity(&flags),
        "gap-bound" => cmd_gap_bound(&flags),
        "ib" => cmd_ib(&flags),
        "dropout-ic" => cmd_dropout_ic(&flags),
        "gan" => cmd_gan(&flags),
        "train" => cmd_train(&flags),
        "sweep" => cmd_sweep(&flags),
        "plot" => cmd_plot(&flags),
        other => Err(CliError::usage(format!("unknown subcommand {other}"))),
    }
}

fn load_config<T: serde::de::DeserializeOwned>(flags: &Flags) -> CliResult<(T, String)> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {path}: {e}")))?;
    let value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {path}: {e}")))?;
    Ok((value, path.clone()))
}

fn write_output(
    builder: &mut ManifestBuilder,
    out: &Path,
    name: &str,
    contents: &str,
) -> CliResult<()> {
    let path = out.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    builder.record_output(&path);
    Ok(())
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Deserialize)]
struct MeasuresConfig {
    px: Pmf,
    q: Option<Pmf>,
    channel: Option<Channel>,
    joint: Option<JointPmf>,
}

#[derive(Serialize)]
struct MeasuresReport {
    entropy: f64,
    kl_to_q: Option<f64>,
    mutual_information: Option<f64>,
    joint_entropy: Option<f64>,
    x_marginal_entropy: Option<f64>,
    y_marginal_entropy: Option<f64>,
}

fn cmd_measures(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (MeasuresConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("measures", &config_path, flags.seed);
    let kl_to_q = match &config.q {
        Some(q) => {
            Some(kl_divergence(&config.px, q).map_err(|e| CliError::usage(e.to_string()))?)
        }
        None => None,
    };
    let mi = match &config.channel {
        Some(ch) => {
            Some(mutual_information(&config.px, ch).map_err(|e| CliError::usage(e.to_string()))?)
        }
        None => None,
    };
    let report = MeasuresReport {
        entropy: entropy(&config.px),
        kl_to_q,
        mutual_information: mi,
        joint_entropy: config.joint.as_ref().map(|j| j.entropy()),
        x_marginal_entropy: config.joint.as_ref().map(|j| entropy(&j.x_marginal())),
        y_marginal_entropy: config.joint.as_ref().map(|j| entropy(&j.y_marginal())),
    };
    write_output(&mut builder, &flags.out, "measures.json", &to_pretty(&report))?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct RdConfig {
    py: Pmf,
    decoder: Channel,
    #[serde(default)]
    inverse_queries: Vec<f64>,
}

#[derive(Serialize)]
struct InverseAnswer {
    rate: f64,
    distortion: f64,
}

fn cmd_rd(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (RdConfig, _) = load_config(flags)?;
    if flags.points < 2 {
        return Err(CliError::usage("--points must be at least 2"));
    }
    let mut builder = ManifestBuilder::new("rd", &config_path, flags.seed);
    let problem =
        RdProblem::new(config.py, config.decoder).map_err(|e| CliError::usage(e.to_string()))?;
    let curve = rd_curve(&problem, flags.points).map_err(|e| CliError::Numerical(e.to_string()))?;
    write_output(&mut builder, &flags.out, "curve.csv", &curve.to_csv())?;
    if !config.inverse_queries.is_empty() {
        let answers: Vec<InverseAnswer> = config
            .inverse_queries
            .iter()
            .map(|&rate| InverseAnswer {
                rate,
                distortion: distortion_rate_inverse(&curve, rate),
            })
            .collect();
        write_output(&mut builder, &flags.out, "inverse.json", &to_pretty(&answers))?;
    }
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct CapacityConfig {
    encoder: Channel,
    px: Pmf,
}

fn cmd_capacity(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (CapacityConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("capacity", &config_path, flags.seed);
    let report =
        fano_sandwich(&config.encoder, &config.px).map_err(|e| CliError::usage(e.to_string()))?;
    write_output(&mut builder, &flags.out, "capacity.json", &to_pretty(&report))?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct GapBoundConfig {
    encoder: Channel,
    decoder: Channel,
    dataset: LabeledDataset,
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(default)]
    enforce_eta: bool,
    /// Optional true joint for the realized gap.
    true_joint: Option<JointPmf>,
    /// Also evaluate the misclassification sandwich with this many curve
    /// points (0 skips it).
    #[serde(default)]
    sandwich_points: usize,
}

fn default_eta() -> f64 {
    0.01
}

fn cmd_gap_bound(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (GapBoundConfig, _) = load_config(flags)?;
    if !(flags.delta > 0.0 && flags.delta < 1.0) {
        return Err(CliError::usage("delta must lie in (0,1)"));
    }
    let mut builder = ManifestBuilder::new("gap-bound", &config_path, flags.seed);
    let assumptions = ModelAssumptions::new(config.eta, config.enforce_eta)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let report = gap_bound_report(
        &config.encoder,
        &config.decoder,
        &config.dataset,
        flags.delta,
        &assumptions,
        config.true_joint.as_ref(),
    )
    .map_err(|e| CliError::usage(e.to_string()))?;
    write_output(&mut builder, &flags.out, "gap_bound.json", &to_pretty(&report))?;
    if flags.format == "csv" {
        let row = GapCsvRow {
            n: report.n,
            delta: report.delta,
            ic: report.ic,
            lambda: report.lambda,
            bound: report.total_bound,
            gap: report.observed_gap.unwrap_or(f64::NAN),
        };
        let csv = format!("{}\n{}\n", GapCsvRow::header(), row.to_csv_line());
        write_output(&mut builder, &flags.out, "gap_bound.csv", &csv)?;
    }
    if config.sandwich_points >= 2 {
        let py = empirical_joint(&config.dataset).y_marginal();
        let problem = RdProblem::new(py, config.decoder.clone())
            .map_err(|e| CliError::usage(e.to_string()))?;
        let curve = rd_curve(&problem, config.sandwich_points)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let sandwich = misclass_sandwich(
            &config.encoder,
            &config.decoder,
            &config.dataset,
            flags.delta,
            &curve,
        )
        .map_err(|e| CliError::Numerical(e.to_string()))?;
        write_output(&mut builder, &flags.out, "sandwich.json", &to_pretty(&sandwich))?;
    }
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct IbCliConfig {
    dataset: LabeledDataset,
    lambda: f64,
    u_size: Option<usize>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    restarts: Option<usize>,
}

#[derive(Serialize)]
struct IbReport {
    value: f64,
    h_term: f64,
    ic_term: f64,
    converged: bool,
    best_restart: usize,
    encoder: Channel,
}

fn cmd_ib(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (IbCliConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("ib", &config_path, flags.seed);
    let u_size = config
        .u_size
        .unwrap_or_else(|| config.dataset.x_alphabet().size());
    let mut ib_config = IbConfig::new(config.lambda, u_size, flags.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(v) = config.max_iter {
        ib_config.max_iter = v;
    }
    if let Some(v) = config.tol {
        ib_config.tol = v;
    }
    if let Some(v) = config.restarts {
        ib_config.restarts = v;
    }
    ib_config
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let solution =
        ib_optimize(&config.dataset, &ib_config).map_err(|e| CliError::Numerical(e.to_string()))?;
    let report = IbReport {
        value: solution.objective.value,
        h_term: solution.objective.h_term,
        ic_term: solution.objective.ic_term,
        converged: solution.converged,
        best_restart: solution.best_restart,
        encoder: solution.encoder.clone(),
    };
    write_output(&mut builder, &flags.out, "ib.json", &to_pretty(&report))?;
    write_output(&mut builder, &flags.out, "trace.csv", &solution.trace_to_csv())?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct DropoutIcConfig {
    spec: DropoutEncoderSpec,
    inputs: Vec<Vec<u8>>,
    input_probs: Option<Vec<f64>>,
    decoder: Option<SoftmaxDecoderSpec>,
    label_cond: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_lambda")]
    lambda: f64,
    grid: Option<Vec<f64>>,
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Serialize)]
struct DropoutIcReport {
    rbm_ic_bound: f64,
    ff_clt_ic_bound: f64,
    scan_p_star: Option<f64>,
    scan_j_star: Option<f64>,
    condition_warning: Option<bool>,
}

fn cmd_dropout_ic(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (DropoutIcConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("dropout-ic", &config_path, flags.seed);
    let probs = match config.input_probs.clone() {
        Some(p) => p,
        None => vec![1.0 / config.inputs.len() as f64; config.inputs.len()],
    };
    let pmf = BitInputPmf::new(config.inputs.clone(), probs.clone())
        .map_err(|e| CliError::usage(e.to_string()))?;
    let rbm = rbm_ic_bound(&config.spec, &pmf).map_err(|e| CliError::usage(e.to_string()))?;
    let ff_table =
        ff_clt_channel(&config.spec, &pmf.vectors).map_err(|e| CliError::usage(e.to_string()))?;
    let ff = unit_table_ic_bound(&ff_table, &pmf.probs);

    let mut report = DropoutIcReport {
        rbm_ic_bound: rbm,
        ff_clt_ic_bound: ff,
        scan_p_star: None,
        scan_j_star: None,
        condition_warning: None,
    };
    if let Some(decoder) = &config.decoder {
        let label_cond = config
            .label_cond
            .clone()
            .ok_or_else(|| CliError::usage("scan needs label_cond alongside decoder"))?;
        let joint = LabeledInputPmf::new(config.inputs.clone(), probs, label_cond)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let grid = config
            .grid
            .clone()
            .unwrap_or_else(|| (0..=20).map(|k| k as f64 / 20.0).collect());
        let scan = dropout_cost_scan(&config.spec, decoder, &joint, config.lambda, &grid)
            .map_err(|e| CliError::usage(e.to_string()))?;
        report.scan_p_star = Some(scan.p_star);
        report.scan_j_star = Some(scan.j_star);
        report.condition_warning = Some(scan.condition_warning);
        write_output(&mut builder, &flags.out, "scan.csv", &scan.to_csv())?;
    }
    write_output(&mut builder, &flags.out, "dropout_ic.json", &to_pretty(&report))?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct GanConfig {
    data_pmf: Pmf,
    generator: Pmf,
    discriminator: Vec<f64>,
    #[serde(default = "default_lambda")]
    lambda: f64,
}

#[derive(Serialize)]
struct GanReport {
    loss: f64,
    ic_bound: f64,
    penalized: f64,
    exact_channel_information: f64,
}

fn cmd_gan(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (GanConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("gan", &config_path, flags.seed);
    let model = GanModel::new(config.data_pmf, config.generator, config.discriminator)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let objective = gan_objective(&model, config.lambda);
    let exact =
        gan_exact_channel_information(&model).map_err(|e| CliError::usage(e.to_string()))?;
    let report = GanReport {
        loss: objective.loss,
        ic_bound: objective.ic_bound,
        penalized: objective.penalized,
        exact_channel_information: exact,
    };
    write_output(&mut builder, &flags.out, "gan.json", &to_pretty(&report))?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum DataConfig {
    Synth(SynthSpec),
    Idx {
        images: String,
        labels: String,
        limit: usize,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default = "default_val_fraction")]
        val_fraction: f64,
    },
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_val_fraction() -> f64 {
    0.1
}

#[derive(Deserialize)]
struct TrainConfig {
    data: DataConfig,
    net: NetConfig,
    corruption: Option<LabelCorruption>,
}

#[derive(Serialize)]
struct TrainReport {
    epochs_run: usize,
    final_train_risk: f64,
    final_test_risk: f64,
    final_gap: f64,
    final_test_misclass: f64,
    final_ic_aggregate: f64,
    final_ic_surrogate: f64,
    ic_subsample: usize,
    best_epoch: Option<usize>,
}

fn split_dataset(
    data: BitDataset,
    train_fraction: f64,
    val_fraction: f64,
) -> (BitDataset, BitDataset, BitDataset) {
    let n = data.len();
    let n_train = ((n as f64) * train_fraction).round() as usize;
    let n_train = n_train.min(n.saturating_sub(2)).max(1);
    let n_val = ((n as f64) * val_fraction).round() as usize;
    let n_val = n_val.min(n - n_train - 1).max(1);
    let take = |range: std::ops::Range<usize>| BitDataset {
        features: data.features[range.clone()].to_vec(),
        labels: data.labels[range].to_vec(),
        classes: data.classes,
        dim: data.dim,
    };
    (
        take(0..n_train),
        take(n_train..n_train + n_val),
        take(n_train + n_val..n),
    )
}

fn cmd_train(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (TrainConfig, _) = load_config(flags)?;
    let mut builder = ManifestBuilder::new("train", &config_path, flags.seed);
    let (train, val, test) = match &config.data {
        DataConfig::Synth(spec) => {
            let mk = |n: usize, salt: u64| {
                synth_dataset(spec.classes, spec.dim, n, spec.separation, flags.seed ^ salt)
                    .map_err(|e| CliError::usage(e.to_string()))
            };
            (
                mk(spec.n_train, 0)?,
                mk(spec.n_val.max(1), 0x00aa_55aa)?,
                mk(spec.n_test, 0x0155_aa55)?,
            )
        }
        DataConfig::Idx {
            images,
            labels,
            limit,
            train_fraction,
            val_fraction,
        } => {
            let all = load_idx(Path::new(images), Path::new(labels), *limit)
                .map_err(|e| CliError::usage(e.to_string()))?;
            split_dataset(all, *train_fraction, *val_fraction)
        }
    };
    let mut net_config = config.net.clone();
    net_config.seed = flags.seed;
    let corruption = config.corruption.unwrap_or_else(LabelCorruption::none);
    let history = train_mlp(&net_config, &train, &val, &test, &corruption)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let last = history.last();
    let report = TrainReport {
        epochs_run: history.records.len(),
        final_train_risk: last.train_risk,
        final_test_risk: last.test_risk,
        final_gap: last.gap,
        final_test_misclass: last.test_misclass,
        final_ic_aggregate: last.ic_aggregate,
        final_ic_surrogate: last.ic_surrogate,
        ic_subsample: history.ic_subsample,
        best_epoch: history.best_epoch,
    };
    write_output(&mut builder, &flags.out, "history.csv", &history.to_csv())?;
    write_output(&mut builder, &flags.out, "run.json", &to_pretty(&report))?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

#[derive(Deserialize)]
struct SweepConfig {
    axis: SweepAxis,
    values: Vec<f64>,
    #[serde(default = "TrainSetup::desk_default")]
    base: TrainSetup,
    #[serde(default = "default_repeats")]
    repeats: usize,
}

fn default_repeats() -> usize {
    5
}

fn cmd_sweep(flags: &Flags) -> CliResult<()> {
    let (config, config_path): (SweepConfig, _) = load_config(flags)?;
    if config.values.is_empty() || config.repeats == 0 {
        return Err(CliError::usage("sweep needs values and repeats >= 1"));
    }
    let mut builder = ManifestBuilder::new("sweep", &config_path, flags.seed);
    let mut base = config.base.clone();
    base.net.seed = flags.seed;
    let table = sweep(config.axis, &config.values, &base, config.repeats)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_output(&mut builder, &flags.out, "sweep.csv", &table.to_csv())?;
    for (v, runs) in table.phase_runs.iter().enumerate() {
        for (r, history) in runs.iter().enumerate() {
            write_output(
                &mut builder,
                &flags.out,
                &format!("phase_trace_v{v}_r{r}.csv"),
                &history.to_csv(),
            )?;
        }
    }
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

fn cmd_plot(flags: &Flags) -> CliResult<()> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config must point at the input CSV"))?;
    let csv = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
    let svg = plot::csv_to_svg(&csv).map_err(CliError::Usage)?;
    let stem = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".to_string());
    let mut builder = ManifestBuilder::new("plot", path, flags.seed);
    write_output(&mut builder, &flags.out, &format!("{stem}.svg"), &svg)?;
    builder
        .finish(&flags.out)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}
