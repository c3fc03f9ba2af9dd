//! Evolutionary-search integration tests on small synthetic datasets.

use locklab_core::ann::INPUT_LEN;
use locklab_core::dataset::{LabeledDataset, Scenario};
use locklab_core::extract::{format_vector, ExtractionParams, LocalityVector};
use locklab_core::locking::Scheme;
use locklab_core::neuroevo::{
    evolve, fitness, EvalRecord, EvolutionConfig, EvolutionObserver, FitnessMode, Genotype,
    NoObserver,
};
use locklab_core::seed;

use rand::Rng;

/// A dataset whose label is written into the vector (trivially separable).
fn separable_dataset(n: usize) -> LabeledDataset {
    let mut vectors = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 1;
        let mut raw = vec![0u8; 80];
        raw[5] = if label { 9 } else { 1 };
        raw[40] = 5;
        vectors.push(LocalityVector {
            key_index: 0,
            label: Some(label),
            formatted: format_vector(&raw, INPUT_LEN).unwrap(),
            raw,
        });
        provenance.push(locklab_core::dataset::Provenance {
            netlist_id: "toy".into(),
            scheme: Scheme::Epic,
            lock_seed: i as u64,
            copy: i,
            key_index: 0,
            original_key: false,
        });
    }
    LabeledDataset {
        scenario: Scenario::Srs,
        params: ExtractionParams::default(),
        vectors,
        provenance,
    }
}

/// Labels independent of the vectors (nothing to learn).
fn noise_dataset(n: usize, seed_v: u64) -> LabeledDataset {
    let mut rng = seed::rng(seed_v);
    let mut ds = separable_dataset(n);
    for v in ds.vectors.iter_mut() {
        let mut raw = vec![0u8; 80];
        for r in raw.iter_mut() {
            *r = rng.gen_range(0..10);
        }
        v.formatted = format_vector(&raw, INPUT_LEN).unwrap();
        v.raw = raw;
        v.label = Some(rng.gen());
    }
    ds
}

fn quick_cfg(seed_v: u64) -> EvolutionConfig {
    let mut cfg = EvolutionConfig::new(seed_v);
    cfg.population = 4;
    cfg.generations = 3;
    cfg.epochs_per_fitness = 4;
    cfg.batch_size = 16;
    cfg
}

#[test]
fn defaults_match_the_search_protocol() {
    let cfg = EvolutionConfig::new(0);
    assert_eq!(cfg.population, 10);
    assert_eq!(cfg.generations, 20);
    assert_eq!(cfg.mutation_prob, 0.1);
    assert_eq!(cfg.crossover_prob, 0.9);
    assert_eq!(cfg.tournament, 3);
    assert_eq!(cfg.epochs_per_fitness, 44);
    assert_eq!(cfg.batch_size, 128);
    assert!(matches!(cfg.fitness_mode, FitnessMode::TrainSet));
}

#[test]
fn separable_data_reaches_full_fitness_for_any_genotype() {
    let data = separable_dataset(32);
    let mut cfg = quick_cfg(5);
    cfg.epochs_per_fitness = 30;
    let kpa = fitness::<f32>(&Genotype::from_u16(0), &data, &cfg).unwrap();
    assert_eq!(kpa, 100.0);
}

#[test]
fn label_noise_keeps_fitness_near_chance_on_holdout() {
    let data = noise_dataset(2000, 9);
    let mut cfg = quick_cfg(6);
    cfg.fitness_mode = FitnessMode::Holdout;
    cfg.holdout_fraction = 0.25;
    cfg.epochs_per_fitness = 3;
    let kpa = fitness::<f32>(&Genotype::from_u16(0), &data, &cfg).unwrap();
    assert!((45.0..=55.0).contains(&kpa), "kpa = {kpa}");
}

struct Counter {
    records: Vec<EvalRecord>,
}

impl EvolutionObserver for Counter {
    fn on_evaluation(&mut self, rec: &EvalRecord) {
        self.records.push(rec.clone());
    }
}

#[test]
fn evolution_budget_and_memoization() {
    let data = separable_dataset(32);
    let cfg = quick_cfg(7);
    let mut obs = Counter {
        records: Vec::new(),
    };
    let out = evolve::<f32>(&data, &cfg, &mut obs);
    assert_eq!(out.evaluations, cfg.population * cfg.generations);
    assert!(out.evaluations <= 200, "within the published budget");
    let distinct: std::collections::BTreeSet<&str> = obs
        .records
        .iter()
        .map(|r| r.architecture.as_str())
        .collect();
    assert_eq!(
        out.trainings,
        distinct.len(),
        "one training per distinct architecture"
    );
    assert!(out.trainings <= 255);
    // every cached record reports zero epochs
    for r in &obs.records {
        if r.cached {
            assert_eq!(r.epochs, 0);
        }
    }
    assert!(
        obs.records.iter().any(|r| r.cached),
        "duplicates appear in 12 evaluations"
    );
}

#[test]
fn evolution_is_deterministic() {
    let data = separable_dataset(32);
    let cfg = quick_cfg(8);
    let a = evolve::<f32>(&data, &cfg, &mut NoObserver);
    let b = evolve::<f32>(&data, &cfg, &mut NoObserver);
    assert_eq!(a.best_genotype, b.best_genotype);
    assert_eq!(a.history.len(), b.history.len());
    for (x, y) in a.history.iter().zip(&b.history) {
        assert_eq!(x, y);
    }
}

#[test]
fn best_ever_fitness_is_monotone_and_beats_initial_mean_on_easy_data() {
    let data = separable_dataset(64);
    let mut cfg = quick_cfg(11);
    cfg.generations = 4;
    cfg.epochs_per_fitness = 6;
    let out = evolve::<f32>(&data, &cfg, &mut NoObserver);
    let mut prev = f64::NEG_INFINITY;
    for h in &out.history {
        assert!(h.best_ever >= prev, "best-ever must not regress");
        prev = h.best_ever;
    }
    let first = &out.history[0];
    assert!(out.best_fitness >= first.mean, "selection pressure sanity");
}
