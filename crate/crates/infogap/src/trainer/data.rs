//! Binary-feature datasets: a seeded synthetic generator with class
//! prototypes and flip noise, an IDX ubyte loader with pixel binarization,
//! and the label-corruption modes used by the phase experiments.

use crate::prob::{Alphabet, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Read;
use thiserror::Error;

/// Feature vectors of bits with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BitDataset {
    pub features: Vec<Vec<u8>>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub dim: usize,
}

impl BitDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// View as a labeled dataset over the alphabet of distinct feature
    /// bit-strings, sorted lexicographically for a stable symbol order.
    pub fn to_labeled_dataset(&self) -> LabeledDataset {
        let mut distinct: Vec<String> = self
            .features
            .iter()
            .map(|bits| bits.iter().map(|&b| if b != 0 { '1' } else { '0' }).collect())
            .collect();
        distinct.sort();
        distinct.dedup();
        let index: std::collections::HashMap<&str, usize> = distinct
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let pairs = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(bits, &y)| {
                let key: String =
                    bits.iter().map(|&b| if b != 0 { '1' } else { '0' }).collect();
                (index[key.as_str()], y)
            })
            .collect();
        let x_alphabet = Alphabet::new(distinct).expect("non-empty distinct strings");
        let y_alphabet = Alphabet::indexed("y", self.classes).expect("classes >= 1");
        LabeledDataset::new(x_alphabet, y_alphabet, pairs).expect("indices are in range")
    }
}

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:#010x}, got {got:#010x}")]
    BadMagic { expected: u32, got: u32 },
    #[error("file truncated while reading {0}")]
    Truncated(&'static str),
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("limit must be at least 1")]
    EmptyLimit,
    #[error("synthetic dataset needs classes >= 2 and dim >= 2")]
    BadSynthShape,
}

/// Class-conditional random-prototype bit vectors with independent flip
/// noise. `separation` in [0,1]: 0 makes features independent of labels,
/// 1 reproduces the prototypes exactly. Deterministic per seed.
pub fn synth_dataset(
    classes: usize,
    dim: usize,
    n: usize,
    separation: f64,
    seed: u64,
) -> Result<BitDataset, IdxError> {
    if classes < 2 || dim < 2 {
        return Err(IdxError::BadSynthShape);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prototypes: Vec<Vec<u8>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.gen_range(0..2) as u8).collect())
        .collect();
    let flip = (1.0 - separation.clamp(0.0, 1.0)) / 2.0;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = rng.gen_range(0..classes);
        let bits = prototypes[label]
            .iter()
            .map(|&b| if rng.gen::<f64>() < flip { 1 - b } else { b })
            .collect();
        features.push(bits);
        labels.push(label);
    }
    Ok(BitDataset {
        features,
        labels,
        classes,
        dim,
    })
}

fn read_u32_be(reader: &mut impl Read, what: &'static str) -> Result<u32, IdxError> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|_| IdxError::Truncated(what))?;
    Ok(u32::from_be_bytes(buf))
}

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Load paired IDX ubyte image/label files, binarizing pixels at half the
/// ubyte maximum. Takes the first `limit` items (capped at the file count).
pub fn load_idx(
    images_path: &std::path::Path,
    labels_path: &std::path::Path,
    limit: usize,
) -> Result<BitDataset, IdxError> {
    if limit == 0 {
        return Err(IdxError::EmptyLimit);
    }
    let mut images = std::io::BufReader::new(std::fs::File::open(images_path)?);
    let magic = read_u32_be(&mut images, "image magic")?;
    if magic != IMAGES_MAGIC {
        return Err(IdxError::BadMagic {
            expected: IMAGES_MAGIC,
            got: magic,
        });
    }
    let image_count = read_u32_be(&mut images, "image count")? as usize;
    let rows = read_u32_be(&mut images, "image rows")? as usize;
    let cols = read_u32_be(&mut images, "image cols")? as usize;

    let mut labels = std::io::BufReader::new(std::fs::File::open(labels_path)?);
    let magic = read_u32_be(&mut labels, "label magic")?;
    if magic != LABELS_MAGIC {
        return Err(IdxError::BadMagic {
            expected: LABELS_MAGIC,
            got: magic,
        });
    }
    let label_count = read_u32_be(&mut labels, "label count")? as usize;
    if image_count != label_count {
        return Err(IdxError::CountMismatch {
            images: image_count,
            labels: label_count,
        });
    }

    let take = limit.min(image_count);
    if take == 0 {
        return Err(IdxError::EmptyLimit);
    }
    let dim = rows * cols;
    let mut features = Vec::with_capacity(take);
    let mut raw = vec![0u8; dim];
    for _ in 0..take {
        images
            .read_exact(&mut raw)
            .map_err(|_| IdxError::Truncated("image pixels"))?;
        features.push(raw.iter().map(|&p| u8::from(p as f64 > 127.5)).collect());
    }
    let mut label_bytes = vec![0u8; take];
    labels
        .read_exact(&mut label_bytes)
        .map_err(|_| IdxError::Truncated("label bytes"))?;
    let labels_vec: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    let classes = labels_vec.iter().copied().max().unwrap_or(0) + 1;
    Ok(BitDataset {
        features,
        labels: labels_vec,
        classes: classes.max(2),
        dim,
    })
}

/// Label rewrite applied to a training split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptionMode {
    Normal,
    Roll,
    Random,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LabelCorruption {
    pub mode: CorruptionMode,
    pub seed: u64,
}

impl LabelCorruption {
    pub fn none() -> Self {
        Self {
            mode: CorruptionMode::Normal,
            seed: 0,
        }
    }

    /// Rewrite labels: rolled by one class, replaced uniformly at random,
    /// or left alone.
    pub fn apply(&self, data: &BitDataset) -> BitDataset {
        let mut out = data.clone();
        match self.mode {
            CorruptionMode::Normal => {}
            CorruptionMode::Roll => {
                for label in out.labels.iter_mut() {
                    *label = (*label + 1) % out.classes;
                }
            }
            CorruptionMode::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                for label in out.labels.iter_mut() {
                    *label = rng.gen_range(0..out.classes);
                }
            }
        }
        out
    }
}
