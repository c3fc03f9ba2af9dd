//! End-to-end attack pipelines: setup (lock + resynthesis stand-in),
//! dataset generation, model training or evolution, deployment and scoring.
//!
//! Every stage's artifacts can be persisted for audit. The ground-truth key
//! lives in a `truth/` sidecar that the deployment stage provably never
//! reads: deployment re-loads its inputs through a [`StageGuard`] whose
//! allowlist excludes the sidecar, and only the scoring stage opens it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use locklab_core::ann::{build_cnn, build_mlp, train, CnnArchitecture, Model};
use locklab_core::attack::{deploy, kpa, AttackReport};
use locklab_core::dataset::{
    gen_gss_netlist, gen_srs_copy, GssConfig, LabeledDataset, Scenario, SrsConfig,
};
use locklab_core::extract::ExtractionParams;
use locklab_core::locking::{self, LockRecord};
use locklab_core::netlist::Netlist;
use locklab_core::neuroevo::{evolve, NoObserver};
use locklab_core::seed;
use locklab_core::transform;
use rayon::prelude::*;
use thiserror::Error;

use crate::bench;
use crate::config::{Config, ModelKind};
use crate::formats::{self, JsonlLog};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[{stage}] {msg}")]
    Stage { stage: &'static str, msg: String },
    #[error("deployment attempted to read '{path}', which is outside its allowlist")]
    GuardViolation { path: PathBuf },
    #[error(transparent)]
    Format(#[from] formats::FormatError),
}

fn stage_err(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage,
        msg: e.to_string(),
    }
}

/// Read allowlist for a pipeline stage. Paths must be registered before the
/// stage may open them; the truth sidecar is never registered for deploy.
pub struct StageGuard {
    allowed: Vec<PathBuf>,
}

impl StageGuard {
    pub fn new(allowed: Vec<PathBuf>) -> Self {
        StageGuard { allowed }
    }

    pub fn read_to_string(&self, path: &Path) -> Result<String, PipelineError> {
        if !self.allowed.iter().any(|a| a == path) {
            return Err(PipelineError::GuardViolation {
                path: path.to_path_buf(),
            });
        }
        Ok(formats::read_to_string(path)?)
    }
}

/// Inputs shared by both attack pipelines.
#[derive(Debug, Clone)]
pub struct AttackOptions {
    pub scenario: Scenario,
    pub model_kind: ModelKind,
    pub seed: u64,
    /// Persist per-stage artifacts under this directory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct AttackArtifacts {
    pub report: AttackReport,
    pub truth: LockRecord,
    pub model_architecture: String,
}

/// Parallel GSS generation: netlists fan out to workers, results merge in
/// index order, so the output is byte-identical to the sequential path.
pub fn gen_gss_parallel(
    train_netlists: &[(String, Netlist)],
    cfg: &GssConfig,
) -> Result<LabeledDataset, locklab_core::dataset::DatasetError> {
    use locklab_core::dataset::DatasetError;
    if train_netlists.is_empty() {
        return Err(DatasetError::NoTrainingNetlists);
    }
    for (id, _) in train_netlists {
        if *id == cfg.target_id {
            return Err(DatasetError::TargetLeakage { id: id.clone() });
        }
    }
    let parts: Vec<_> = train_netlists
        .par_iter()
        .enumerate()
        .map(|(ni, (id, netlist))| gen_gss_netlist(ni, id, netlist, cfg))
        .collect::<Result<_, _>>()?;
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for (v, p) in parts {
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

/// Parallel SRS generation; byte-identical to [`gen_srs`].
pub fn gen_srs_parallel(
    target_locked: &Netlist,
    record: &LockRecord,
    cfg: &SrsConfig,
) -> Result<
    (LabeledDataset, Vec<locklab_core::extract::LocalityVector>),
    locklab_core::dataset::DatasetError,
> {
    let parts: Vec<_> = (0..cfg.relocks)
        .into_par_iter()
        .map(|copy| gen_srs_copy(copy, target_locked, record, cfg))
        .collect::<Result<_, _>>()?;
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for (v, p) in parts {
        vectors.extend(v);
        provenance.extend(p);
    }
    let test_vectors = locklab_core::extract::lve(target_locked, &cfg.params, None)
        .map_err(locklab_core::dataset::DatasetError::Extract)?;
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

/// Train (or evolve) the configured model kind on a labeled dataset.
pub fn fit_model(
    kind: ModelKind,
    scenario: Scenario,
    dataset: &LabeledDataset,
    cfg: &Config,
    seed_v: u64,
    evolution_log: Option<&Path>,
) -> Result<Model<f32>, PipelineError> {
    let stage = "ann-design";
    let deploy_epochs = cfg.model.epochs;
    let train_fresh = |arch: Option<CnnArchitecture>| -> Result<Model<f32>, PipelineError> {
        let mut model = match &arch {
            None => build_mlp::<f32>(scenario, seed::derive(seed_v, &[0x33])),
            Some(a) => build_cnn::<f32>(a, seed::derive(seed_v, &[0x34]))
                .map_err(|e| stage_err(stage, e))?,
        };
        let tc = cfg
            .model
            .train_config(deploy_epochs, seed::derive(seed_v, &[0x35]));
        train(&mut model, &dataset.to_train_data(), &tc).map_err(|e| stage_err(stage, e))?;
        Ok(model)
    };
    match kind {
        ModelKind::Mlp => train_fresh(None),
        ModelKind::CnnFixed => train_fresh(Some(CnnArchitecture::default())),
        ModelKind::CnnEvolved => {
            let ecfg = cfg
                .evolution
                .evolution_config(cfg.model.batch_size, seed::derive(seed_v, &[0x36]));
            let outcome = match evolution_log {
                Some(path) => {
                    let mut log = JsonlLog::create(path)?;
                    evolve::<f32>(dataset, &ecfg, &mut log)
                }
                None => evolve::<f32>(dataset, &ecfg, &mut NoObserver),
            };
            // the winning architecture gets a fresh full-length training run
            // before deployment
            if deploy_epochs > ecfg.epochs_per_fitness {
                train_fresh(Some(outcome.best_architecture))
            } else {
                Ok(outcome.best_model)
            }
        }
    }
}

fn persist_target(
    out: &Path,
    locked: &Netlist,
    record: &LockRecord,
) -> Result<(PathBuf, PathBuf), PipelineError> {
    let locked_path = out.join("target").join("locked.bench");
    formats::write_string(&locked_path, &bench::write_bench(locked))?;
    let truth_path = out.join("truth").join("lockrecord.json");
    formats::write_lock_record(&truth_path, record)?;
    Ok((locked_path, truth_path))
}

/// Deployment stage: re-reads the locked target through the guard (never
/// the truth sidecar) and predicts the key.
fn deploy_stage(
    locked_path: &Path,
    guard: &StageGuard,
    model: &Model<f32>,
    params: &ExtractionParams,
) -> Result<locklab_core::attack::Deployment, PipelineError> {
    let text = guard.read_to_string(locked_path)?;
    let locked = bench::parse_bench(&text).map_err(|e| stage_err("deploy", e))?;
    deploy(model, &locked, params).map_err(|e| stage_err("deploy", e))
}

/// Self-referencing attack: lock the target (withholding the key), relock
/// to build training data, fit the model, predict, score.
pub fn run_srs_attack(
    target_id: &str,
    target: &Netlist,
    cfg: &Config,
    opts: &AttackOptions,
) -> Result<AttackArtifacts, PipelineError> {
    let started = Instant::now();
    let seed_v = opts.seed;
    let passes = cfg
        .optimize
        .maybe_passes()
        .map_err(|e| stage_err("setup", e))?;
    let params = cfg.extraction.params();

    // setup: generic form, lock with a withheld key, optional resynthesis
    let generic = transform::to_generic(target).map_err(|e| stage_err("setup", e))?;
    let key = locking::keygen(cfg.locking.key_bits, seed::derive(seed_v, &[0x10]));
    let (locked, record) = locking::lock(
        &generic,
        cfg.locking.scheme,
        &key,
        seed::derive(seed_v, &[0x11]),
    )
    .map_err(|e| stage_err("setup", e))?;
    let locked = match &passes {
        Some(p) => transform::optimize(&locked, p),
        None => locked,
    };

    let out = opts.out_dir.clone().unwrap_or_else(std::env::temp_dir);
    let persist = opts.out_dir.is_some();
    let (locked_path, _truth_path) = if persist {
        persist_target(&out, &locked, &record)?
    } else {
        let dir = out.join(format!("locklab-srs-{seed_v}"));
        persist_target(&dir, &locked, &record)?
    };

    // extraction: relock-based training data; the record is passed only for
    // its scheme, the key bits never reach the dataset
    let srs_cfg = SrsConfig {
        target_id: target_id.to_string(),
        relocks: cfg.dataset.relocks,
        key2_bits: cfg.dataset.relock_key_bits,
        master_seed: seed::derive(seed_v, &[0x12]),
        params,
        optimize_passes: passes.clone(),
    };
    let (dataset, _test) =
        gen_srs_parallel(&locked, &record, &srs_cfg).map_err(|e| stage_err("extraction", e))?;
    if persist {
        formats::write_dataset(
            &out.join("dataset"),
            &dataset,
            record.scheme,
            srs_cfg.master_seed,
        )?;
    }

    // ann design
    let log = persist.then(|| out.join("evolution.jsonl"));
    let model = fit_model(
        opts.model_kind,
        Scenario::Srs,
        &dataset,
        cfg,
        seed_v,
        log.as_deref(),
    )?;
    if persist {
        formats::write_model(&out.join("model.json"), &model)?;
    }

    // deployment: allowed to read the locked bench, nothing else
    let guard = StageGuard::new(vec![locked_path.clone()]);
    let deployment = deploy_stage(&locked_path, &guard, &model, &params)?;

    // scoring (the only stage that touches the truth)
    let score = kpa(&deployment.key, &record.key).map_err(|e| stage_err("score", e))?;

    let report = AttackReport {
        scenario: Scenario::Srs,
        model: model.meta.architecture.clone(),
        target_id: target_id.to_string(),
        predicted_key: deployment.key,
        probabilities: deployment.probabilities,
        kpa: Some(score),
        predictions_made: deployment.predictions_made,
        seed: seed_v,
        timing_ms: Some(started.elapsed().as_millis() as u64),
    };
    if persist {
        formats::write_string(
            &out.join("report.json"),
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        formats::write_string(
            &out.join("predicted_key.json"),
            &serde_json::to_string_pretty(
                &serde_json::json!({ "key": report.predicted_key.to_string() }),
            )
            .expect("key serializes"),
        )?;
    }
    Ok(AttackArtifacts {
        model_architecture: model.meta.architecture.clone(),
        report,
        truth: record,
    })
}

/// Generalized-set attack: train on other locked netlists, predict the key
/// of a held-out target.
pub fn run_gss_attack(
    train_netlists: &[(String, Netlist)],
    target_id: &str,
    target: &Netlist,
    cfg: &Config,
    opts: &AttackOptions,
) -> Result<AttackArtifacts, PipelineError> {
    let started = Instant::now();
    let seed_v = opts.seed;
    let passes = cfg
        .optimize
        .maybe_passes()
        .map_err(|e| stage_err("setup", e))?;
    let params = cfg.extraction.params();

    // the target is locked with a withheld key, like any victim netlist
    let generic = transform::to_generic(target).map_err(|e| stage_err("setup", e))?;
    let key = locking::keygen(cfg.locking.key_bits, seed::derive(seed_v, &[0x20]));
    let (locked, record) = locking::lock(
        &generic,
        cfg.locking.scheme,
        &key,
        seed::derive(seed_v, &[0x21]),
    )
    .map_err(|e| stage_err("setup", e))?;
    let locked = match &passes {
        Some(p) => transform::optimize(&locked, p),
        None => locked,
    };

    let out = opts.out_dir.clone().unwrap_or_else(std::env::temp_dir);
    let persist = opts.out_dir.is_some();
    let (locked_path, _truth_path) = if persist {
        persist_target(&out, &locked, &record)?
    } else {
        let dir = out.join(format!("locklab-gss-{seed_v}"));
        persist_target(&dir, &locked, &record)?
    };

    let gss_cfg = GssConfig {
        target_id: target_id.to_string(),
        scheme: cfg.locking.scheme,
        locks_per_netlist: cfg.dataset.locks_per_netlist,
        key_bits: cfg.locking.key_bits,
        master_seed: seed::derive(seed_v, &[0x22]),
        params,
        optimize_passes: passes.clone(),
    };
    let dataset =
        gen_gss_parallel(train_netlists, &gss_cfg).map_err(|e| stage_err("extraction", e))?;
    if persist {
        formats::write_dataset(
            &out.join("dataset"),
            &dataset,
            gss_cfg.scheme,
            gss_cfg.master_seed,
        )?;
    }

    let log = persist.then(|| out.join("evolution.jsonl"));
    let model = fit_model(
        opts.model_kind,
        Scenario::Gss,
        &dataset,
        cfg,
        seed_v,
        log.as_deref(),
    )?;
    if persist {
        formats::write_model(&out.join("model.json"), &model)?;
    }

    let guard = StageGuard::new(vec![locked_path.clone()]);
    let deployment = deploy_stage(&locked_path, &guard, &model, &params)?;
    let score = kpa(&deployment.key, &record.key).map_err(|e| stage_err("score", e))?;

    let report = AttackReport {
        scenario: Scenario::Gss,
        model: model.meta.architecture.clone(),
        target_id: target_id.to_string(),
        predicted_key: deployment.key,
        probabilities: deployment.probabilities,
        kpa: Some(score),
        predictions_made: deployment.predictions_made,
        seed: seed_v,
        timing_ms: Some(started.elapsed().as_millis() as u64),
    };
    if persist {
        formats::write_string(
            &out.join("report.json"),
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
    }
    Ok(AttackArtifacts {
        model_architecture: model.meta.architecture.clone(),
        report,
        truth: record,
    })
}
