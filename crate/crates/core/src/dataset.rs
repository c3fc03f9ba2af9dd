//! Labeled training-set generation for the two attack scenarios, with
//! per-vector provenance and stratified splitting.
//!
//! Generalized-set data comes from locking many non-target netlists with
//! fresh keys. Self-referencing data comes from relocking the locked target
//! repeatedly: only the added key inputs provide training labels, while the
//! target's own key localities form the unlabeled test set. Every source
//! netlist is reduced to generic form before locking, and an optional
//! optimizer pass list stands in for the post-locking resynthesis step.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ann::{Real, TrainData};
use crate::extract::{lve, ExtractError, ExtractionParams, LocalityVector};
use crate::locking::{self, LockError, LockRecord, Scheme};
use crate::netlist::Netlist;
use crate::seed;
use crate::transform::{self, Pass, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Gss,
    Srs,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Gss => "gss",
            Scenario::Srs => "srs",
        })
    }
}

/// Where one training vector came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub netlist_id: String,
    pub scheme: Scheme,
    /// Lock (or relock) seed of the copy this vector was extracted from.
    pub lock_seed: u64,
    /// Copy counter within the generation run.
    pub copy: usize,
    /// Key-input index inside the copy.
    pub key_index: usize,
    /// True when the key input belongs to the attack target's original key
    /// (never the case for training vectors).
    pub original_key: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub scenario: Scenario,
    pub params: ExtractionParams,
    pub vectors: Vec<LocalityVector>,
    pub provenance: Vec<Provenance>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `[count of label 0, count of label 1]` - the balance report.
    pub fn label_counts(&self) -> [usize; 2] {
        let ones = self
            .vectors
            .iter()
            .filter(|v| v.label == Some(true))
            .count();
        [self.len() - ones, ones]
    }

    /// Flatten into training arrays (row order preserved).
    pub fn to_train_data<T: Real>(&self) -> TrainData<T> {
        let dim = self.params.l_vec;
        let mut x = Vec::with_capacity(self.len() * dim);
        let mut y = Vec::with_capacity(self.len());
        for v in &self.vectors {
            debug_assert_eq!(v.formatted.len(), dim);
            x.extend(v.formatted.iter().map(|&f| T::from_f64(f as f64)));
            y.push(v.label.expect("dataset vectors are labeled") as u8);
        }
        TrainData::new(x, y, dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    /// A training netlist carries the declared target's id.
    TargetLeakage {
        id: String,
    },
    /// Split fraction out of range or a side came out empty.
    DegenerateSplit,
    NoTrainingNetlists,
    Lock(LockError),
    Extract(ExtractError),
    Transform(TransformError),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::TargetLeakage { id } => {
                write!(f, "training set contains the attack target '{id}'")
            }
            DatasetError::DegenerateSplit => f.write_str("split leaves one side empty"),
            DatasetError::NoTrainingNetlists => f.write_str("no training netlists given"),
            DatasetError::Lock(e) => write!(f, "{e}"),
            DatasetError::Extract(e) => write!(f, "{e}"),
            DatasetError::Transform(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DatasetError {}

impl From<LockError> for DatasetError {
    fn from(e: LockError) -> Self {
        DatasetError::Lock(e)
    }
}
impl From<ExtractError> for DatasetError {
    fn from(e: ExtractError) -> Self {
        DatasetError::Extract(e)
    }
}
impl From<TransformError> for DatasetError {
    fn from(e: TransformError) -> Self {
        DatasetError::Transform(e)
    }
}

/// Generalized-set generation parameters.
#[derive(Debug, Clone)]
pub struct GssConfig {
    /// Declared attack target; any training netlist with this id is
    /// rejected.
    pub target_id: String,
    pub scheme: Scheme,
    /// Locks per training netlist (N).
    pub locks_per_netlist: usize,
    /// Key length (K).
    pub key_bits: usize,
    pub master_seed: u64,
    pub params: ExtractionParams,
    /// Resynthesis stand-in; `None` models the pre-resynthesis case.
    pub optimize_passes: Option<Vec<Pass>>,
}

/// All locks of one training netlist (index `ni` in the full run). Exposed
/// so a driver can fan netlists out to workers and merge in index order,
/// which reproduces [`gen_gss`] byte for byte.
pub fn gen_gss_netlist(
    ni: usize,
    id: &str,
    netlist: &Netlist,
    cfg: &GssConfig,
) -> Result<(Vec<LocalityVector>, Vec<Provenance>), DatasetError> {
    let generic = transform::to_generic(netlist)?;
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for copy in 0..cfg.locks_per_netlist {
        let key_seed = seed::derive(cfg.master_seed, &[0, ni as u64, copy as u64, 0]);
        let lock_seed = seed::derive(cfg.master_seed, &[0, ni as u64, copy as u64, 1]);
        let key = locking::keygen(cfg.key_bits, key_seed);
        let (locked, _) = locking::lock(&generic, cfg.scheme, &key, lock_seed)?;
        let locked = match &cfg.optimize_passes {
            Some(p) => transform::optimize(&locked, p),
            None => locked,
        };
        for v in lve(&locked, &cfg.params, Some(&key))? {
            provenance.push(Provenance {
                netlist_id: id.into(),
                scheme: cfg.scheme,
                lock_seed,
                copy,
                key_index: v.key_index,
                original_key: false,
            });
            vectors.push(v);
        }
    }
    Ok((vectors, provenance))
}

/// Lock every training netlist `N` times with fresh keys and extract one
/// labeled locality per key bit: `|netlists| * N * K` vectors.
pub fn gen_gss(
    train_netlists: &[(String, Netlist)],
    cfg: &GssConfig,
) -> Result<LabeledDataset, DatasetError> {
    if train_netlists.is_empty() {
        return Err(DatasetError::NoTrainingNetlists);
    }
    for (id, _) in train_netlists {
        if *id == cfg.target_id {
            return Err(DatasetError::TargetLeakage { id: id.clone() });
        }
    }
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for (ni, (id, netlist)) in train_netlists.iter().enumerate() {
        let (v, p) = gen_gss_netlist(ni, id, netlist, cfg)?;
        vectors.extend(v);
        provenance.extend(p);
    }
    Ok(LabeledDataset {
        scenario: Scenario::Gss,
        params: cfg.params,
        vectors,
        provenance,
    })
}

/// Self-referencing generation parameters.
#[derive(Debug, Clone)]
pub struct SrsConfig {
    pub target_id: String,
    /// Relocked copies (N).
    pub relocks: usize,
    /// Additional key bits per copy (K2).
    pub key2_bits: usize,
    pub master_seed: u64,
    pub params: ExtractionParams,
    pub optimize_passes: Option<Vec<Pass>>,
}

/// One relocked copy of the target (copy index `copy` in the full run);
/// merging copies in index order reproduces [`gen_srs`] byte for byte.
pub fn gen_srs_copy(
    copy: usize,
    target_locked: &Netlist,
    record: &LockRecord,
    cfg: &SrsConfig,
) -> Result<(Vec<LocalityVector>, Vec<Provenance>), DatasetError> {
    let original_keys = target_locked.key_inputs.len();
    let key_seed = seed::derive(cfg.master_seed, &[1, copy as u64, 0]);
    let lock_seed = seed::derive(cfg.master_seed, &[1, copy as u64, 1]);
    let key2 = locking::keygen(cfg.key2_bits, key_seed);
    let (relocked, _) = locking::relock(target_locked, record, &key2, lock_seed)?;
    let relocked = match &cfg.optimize_passes {
        Some(p) => transform::optimize(&relocked, p),
        None => relocked,
    };
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for mut v in lve(&relocked, &cfg.params, None)? {
        if v.key_index < original_keys {
            continue; // the target's own key inputs never train the model
        }
        v.label = Some(key2.bit(v.key_index - original_keys));
        provenance.push(Provenance {
            netlist_id: cfg.target_id.clone(),
            scheme: record.scheme,
            lock_seed,
            copy,
            key_index: v.key_index,
            original_key: false,
        });
        vectors.push(v);
    }
    Ok((vectors, provenance))
}

/// Relock the locked target `N` times. Training vectors come only from the
/// added key inputs (labels from the relock keys; the target's key never
/// enters). The returned test vectors are the target's own key localities,
/// unlabeled, in key order: `N * K2` training vectors plus `K` test vectors.
pub fn gen_srs(
    target_locked: &Netlist,
    record: &LockRecord,
    cfg: &SrsConfig,
) -> Result<(LabeledDataset, Vec<LocalityVector>), DatasetError> {
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for copy in 0..cfg.relocks {
        let (v, p) = gen_srs_copy(copy, target_locked, record, cfg)?;
        vectors.extend(v);
        provenance.extend(p);
    }
    let test_vectors = lve(target_locked, &cfg.params, None)?;
    Ok((
        LabeledDataset {
            scenario: Scenario::Srs,
            params: cfg.params,
            vectors,
            provenance,
        },
        test_vectors,
    ))
}

/// Stratified split: per label, vectors are shuffled (seeded) and divided so
/// the train side holds `fraction` of the whole, with per-label counts
/// allocated by largest remainder.
pub fn split(
    dataset: &LabeledDataset,
    fraction: f64,
    split_seed: u64,
) -> Result<(LabeledDataset, LabeledDataset), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) || dataset.len() < 2 {
        return Err(DatasetError::DegenerateSplit);
    }
    let n = dataset.len();
    let target_train = ((fraction * n as f64) + 0.5) as usize;
    let mut groups: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, v) in dataset.vectors.iter().enumerate() {
        groups[v.label.expect("split needs labels") as usize].push(i);
    }
    use rand::seq::SliceRandom;
    let mut rng = seed::rng(seed::derive(split_seed, &[0x517]));
    for g in groups.iter_mut() {
        g.shuffle(&mut rng);
    }
    // largest-remainder allocation of the train quota across labels
    let quota: Vec<f64> = groups.iter().map(|g| fraction * g.len() as f64).collect();
    let mut take: Vec<usize> = quota.iter().map(|&q| q as usize).collect();
    let mut assigned: usize = take.iter().sum();
    let mut order: Vec<usize> = (0..2).collect();
    order.sort_by(|&a, &b| {
        let ra = quota[a] - take[a] as f64;
        let rb = quota[b] - take[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &g in order.iter().cycle() {
        if assigned >= target_train {
            break;
        }
        if take[g] < groups[g].len() {
            take[g] += 1;
            assigned += 1;
        }
    }
    let mut train_idx: Vec<usize> = Vec::new();
    let mut hold_idx: Vec<usize> = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        train_idx.extend(&group[..take[g]]);
        hold_idx.extend(&group[take[g]..]);
    }
    train_idx.sort_unstable();
    hold_idx.sort_unstable();
    if train_idx.is_empty() || hold_idx.is_empty() {
        return Err(DatasetError::DegenerateSplit);
    }
    let pick = |idx: &[usize]| LabeledDataset {
        scenario: dataset.scenario,
        params: dataset.params,
        vectors: idx.iter().map(|&i| dataset.vectors[i].clone()).collect(),
        provenance: idx.iter().map(|&i| dataset.provenance[i].clone()).collect(),
    };
    Ok((pick(&train_idx), pick(&hold_idx)))
}
