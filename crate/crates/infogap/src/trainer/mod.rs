//! Desk-scale training harness: synthetic binary datasets and an IDX
//! loader, a small feed-forward network with logistic hidden units and
//! dropout trained by SGD on cross-entropy, per-epoch tracking of the
//! generalization gap and the layer-wise information-complexity surrogate,
//! and seeded sweeps over architecture, noise, and label-corruption phases.

mod data;
mod net;
mod sweep;
mod track;

pub use data::{load_idx, synth_dataset, BitDataset, CorruptionMode, IdxError, LabelCorruption};
pub use net::{train_mlp, train_mlp_into, EpochRecord, Layer, Mlp, NetConfig, TrainError, TrainHistory};
pub use sweep::{
    ic_jump_sigmas, spearman, sweep, three_phase, PhaseHistory, SweepAxis, SweepRow, SweepTable,
    SynthSpec, TrainSetup,
};
pub use track::track_ic_and_gap;
