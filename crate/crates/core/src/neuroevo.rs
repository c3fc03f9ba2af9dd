//! Generational genetic search over CNN architectures.
//!
//! A genotype is a 14-bit string: seven presence bits followed by seven
//! type bits. Slot `i` contributes an internal layer when its presence bit
//! is set; the layer is a convolution when the matching type bit is 1 and a
//! max-pool otherwise. Fitness is the key prediction accuracy of the decoded
//! network after a fixed training budget; architectures are memoized so
//! genotypes that decode to the same network train only once.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ann::{
    accuracy_percent, build_cnn, train, CnnArchitecture, InternalLayer, Model, Real, TrainConfig,
};
use crate::dataset::{split, LabeledDataset};
use crate::seed;

/// Internal layer slots.
pub const SLOTS: usize = 7;
/// Genotype length: presence bits then type bits.
pub const GENOTYPE_BITS: usize = 2 * SLOTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genotype {
    pub bits: [bool; GENOTYPE_BITS],
}

impl Genotype {
    pub fn new(bits: [bool; GENOTYPE_BITS]) -> Self {
        Genotype { bits }
    }

    pub fn from_u16(v: u16) -> Self {
        let mut bits = [false; GENOTYPE_BITS];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = v >> i & 1 != 0;
        }
        Genotype { bits }
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut bits = [false; GENOTYPE_BITS];
        for b in bits.iter_mut() {
            *b = rng.gen();
        }
        Genotype { bits }
    }

    /// Layer presence/type split: `([presence; 7], [type; 7])`.
    pub fn halves(&self) -> (&[bool], &[bool]) {
        self.bits.split_at(SLOTS)
    }

    /// Decode left to right: present slots contribute a conv (type bit 1)
    /// or a pool (type bit 0). Never fails.
    pub fn decode(&self) -> CnnArchitecture {
        let (presence, types) = self.halves();
        let internal: Vec<InternalLayer> = presence
            .iter()
            .zip(types)
            .filter(|&(&p, _)| p)
            .map(|(_, &t)| {
                if t {
                    InternalLayer::Conv
                } else {
                    InternalLayer::Pool
                }
            })
            .collect();
        CnnArchitecture::new(internal)
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessMode {
    /// Score on the data the network trained on (the literal protocol).
    TrainSet,
    /// Hold out a stratified fraction for scoring.
    Holdout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    /// Per-bit flip probability.
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub tournament: usize,
    pub epochs_per_fitness: usize,
    pub batch_size: usize,
    pub fitness_mode: FitnessMode,
    /// Holdout fraction used by [`FitnessMode::Holdout`].
    pub holdout_fraction: f64,
    /// Carry the best individual into the next generation.
    pub elitism: bool,
    pub seed: u64,
}

impl EvolutionConfig {
    pub fn new(seed: u64) -> Self {
        EvolutionConfig {
            population: 10,
            generations: 20,
            mutation_prob: 0.1,
            crossover_prob: 0.9,
            tournament: 3,
            epochs_per_fitness: 44,
            batch_size: 128,
            fitness_mode: FitnessMode::TrainSet,
            holdout_fraction: 0.1,
            elitism: true,
            seed,
        }
    }
}

/// One fitness evaluation, as logged.
#[derive(Debug, Clone, Serialize)]
pub struct EvalRecord {
    pub generation: usize,
    pub genotype: String,
    pub architecture: String,
    pub arch_hash: u64,
    /// `None` when training failed; such individuals lose every tournament.
    pub kpa: Option<f64>,
    pub epochs: usize,
    pub cached: bool,
}

/// Hook for logging evaluations (the CLI streams these to a JSONL file).
pub trait EvolutionObserver {
    fn on_evaluation(&mut self, _rec: &EvalRecord) {}
}

/// No-op observer.
pub struct NoObserver;
impl EvolutionObserver for NoObserver {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
}

pub struct EvolutionOutcome<T> {
    pub best_genotype: Genotype,
    pub best_architecture: CnnArchitecture,
    pub best_fitness: f64,
    pub best_model: Model<T>,
    pub history: Vec<GenerationStats>,
    /// Fitness evaluations requested (cached ones included).
    pub evaluations: usize,
    /// Networks actually trained.
    pub trainings: usize,
}

/// Architecture-keyed fitness memo.
pub type FitnessCache = BTreeMap<String, Option<f64>>;

fn eval_arch<T: Real>(
    arch: &CnnArchitecture,
    train_set: &LabeledDataset,
    score_set: &LabeledDataset,
    cfg: &EvolutionConfig,
) -> (Option<f64>, Option<Model<T>>) {
    let arch_seed = seed::derive(cfg.seed, &[0xA5C4, arch.hash()]);
    let mut model = match build_cnn::<T>(arch, arch_seed) {
        Ok(m) => m,
        Err(_) => return (None, None),
    };
    let mut tc = TrainConfig::new(cfg.epochs_per_fitness, arch_seed);
    tc.batch_size = cfg.batch_size;
    match train(&mut model, &train_set.to_train_data(), &tc) {
        Ok(_) => {
            let kpa = accuracy_percent(&model, &score_set.to_train_data());
            (Some(kpa), Some(model))
        }
        Err(_) => (None, None),
    }
}

/// Train-and-score a single genotype (no memoization); the evolutionary
/// loop wraps this with an architecture cache.
pub fn fitness<T: Real>(
    genotype: &Genotype,
    data: &LabeledDataset,
    cfg: &EvolutionConfig,
) -> Option<f64> {
    let arch = genotype.decode();
    let (train_set, score_set) = fitness_sets(data, cfg);
    eval_arch::<T>(&arch, &train_set, &score_set, cfg).0
}

fn fitness_sets(data: &LabeledDataset, cfg: &EvolutionConfig) -> (LabeledDataset, LabeledDataset) {
    match cfg.fitness_mode {
        FitnessMode::TrainSet => (data.clone(), data.clone()),
        FitnessMode::Holdout => {
            match split(
                data,
                1.0 - cfg.holdout_fraction,
                seed::derive(cfg.seed, &[0x0d]),
            ) {
                Ok((tr, ho)) => (tr, ho),
                Err(_) => (data.clone(), data.clone()),
            }
        }
    }
}

/// Uniform two-point crossover: swap the segment between two cut points.
pub fn two_point_crossover<R: Rng>(
    a: &Genotype,
    b: &Genotype,
    rng: &mut R,
) -> (Genotype, Genotype) {
    let mut x = *a;
    let mut y = *b;
    let p1 = rng.gen_range(0..GENOTYPE_BITS);
    let p2 = rng.gen_range(0..GENOTYPE_BITS);
    let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
    for i in lo..hi {
        core::mem::swap(&mut x.bits[i], &mut y.bits[i]);
    }
    (x, y)
}

/// Independent per-bit flips.
pub fn mutate<R: Rng>(g: &Genotype, prob: f64, rng: &mut R) -> Genotype {
    let mut out = *g;
    for b in out.bits.iter_mut() {
        if rng.gen::<f64>() < prob {
            *b = !*b;
        }
    }
    out
}

/// Tournament of `k` uniformly drawn individuals; higher fitness wins, ties
/// prefer shallower architectures, then the lower population index.
fn tournament_winner<R: Rng>(
    fitnesses: &[Option<f64>],
    depths: &[usize],
    k: usize,
    rng: &mut R,
) -> usize {
    let mut best: Option<usize> = None;
    for _ in 0..k.max(1) {
        let i = rng.gen_range(0..fitnesses.len());
        best = Some(match best {
            None => i,
            Some(j) => {
                if better(fitnesses[i], depths[i], i, fitnesses[j], depths[j], j) {
                    i
                } else {
                    j
                }
            }
        });
    }
    best.unwrap()
}

fn better(fa: Option<f64>, da: usize, ia: usize, fb: Option<f64>, db: usize, ib: usize) -> bool {
    match (fa, fb) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(a), Some(b)) => {
            if a != b {
                a > b
            } else if da != db {
                da < db
            } else {
                ia < ib
            }
        }
    }
}

/// Run the generational GA and return the fittest-ever genotype together
/// with its trained network.
pub fn evolve<T: Real>(
    data: &LabeledDataset,
    cfg: &EvolutionConfig,
    observer: &mut dyn EvolutionObserver,
) -> EvolutionOutcome<T> {
    let mut rng = seed::rng(seed::derive(cfg.seed, &[0xE7071]));
    let (train_set, score_set) = fitness_sets(data, cfg);
    let mut cache: FitnessCache = BTreeMap::new();
    let mut evaluations = 0usize;
    let mut trainings = 0usize;

    let mut population: Vec<Genotype> = (0..cfg.population)
        .map(|_| Genotype::random(&mut rng))
        .collect();
    let mut best_ever: Option<(Genotype, f64, Model<T>)> = None;
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 0..cfg.generations {
        let mut fitnesses: Vec<Option<f64>> = Vec::with_capacity(population.len());
        let mut depths: Vec<usize> = Vec::with_capacity(population.len());
        for g in &population {
            let arch = g.decode();
            let key = arch.describe();
            evaluations += 1;
            let (kpa, cached) = match cache.get(&key) {
                Some(&kpa) => (kpa, true),
                None => {
                    let (kpa, model) = eval_arch::<T>(&arch, &train_set, &score_set, cfg);
                    trainings += 1;
                    cache.insert(key.clone(), kpa);
                    if let (Some(k), Some(m)) = (kpa, model) {
                        let replace = match &best_ever {
                            None => true,
                            Some((_, bk, _)) => k > *bk,
                        };
                        if replace {
                            best_ever = Some((*g, k, m));
                        }
                    }
                    (kpa, false)
                }
            };
            // a cached architecture can still carry a fitter genotype label;
            // best-ever tracks fitness, which is unchanged, so no update
            observer.on_evaluation(&EvalRecord {
                generation,
                genotype: alloc::format!("{g}"),
                architecture: arch.describe(),
                arch_hash: arch.hash(),
                kpa,
                epochs: if cached { 0 } else { cfg.epochs_per_fitness },
                cached,
            });
            fitnesses.push(kpa);
            depths.push(arch.depth());
        }
        let valid: Vec<f64> = fitnesses.iter().filter_map(|&f| f).collect();
        let gen_best = valid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = if valid.is_empty() {
            f64::NAN
        } else {
            valid.iter().sum::<f64>() / valid.len() as f64
        };
        history.push(GenerationStats {
            generation,
            best: gen_best,
            mean,
            best_ever: best_ever.as_ref().map(|(_, k, _)| *k).unwrap_or(f64::NAN),
        });
        if generation + 1 == cfg.generations {
            break;
        }
        // breed the next generation
        let mut next: Vec<Genotype> = Vec::with_capacity(cfg.population);
        if cfg.elitism {
            let mut elite = 0usize;
            for i in 1..population.len() {
                if better(
                    fitnesses[i],
                    depths[i],
                    i,
                    fitnesses[elite],
                    depths[elite],
                    elite,
                ) {
                    elite = i;
                }
            }
            next.push(population[elite]);
        }
        while next.len() < cfg.population {
            let pa = population[tournament_winner(&fitnesses, &depths, cfg.tournament, &mut rng)];
            let pb = population[tournament_winner(&fitnesses, &depths, cfg.tournament, &mut rng)];
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
                two_point_crossover(&pa, &pb, &mut rng)
            } else {
                (pa, pb)
            };
            c1 = mutate(&c1, cfg.mutation_prob, &mut rng);
            c2 = mutate(&c2, cfg.mutation_prob, &mut rng);
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }
        population = next;
    }

    let (best_genotype, best_fitness, best_model) =
        best_ever.expect("at least one architecture trains");
    EvolutionOutcome {
        best_architecture: best_genotype.decode(),
        best_genotype,
        best_fitness,
        best_model,
        history,
        evaluations,
        trainings,
    }
}
