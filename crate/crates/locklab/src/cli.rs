//! Command-line surface. Every subcommand is a thin adapter over the
//! library: same seeds, same results.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use locklab_core::attack::kpa;
use locklab_core::dataset::{gen_srs, Scenario, SrsConfig};
use locklab_core::equiv::{equiv_check, EquivMode, EquivOutcome};
use locklab_core::extract::{export_image, lve};
use locklab_core::locking::{self, Scheme};
use locklab_core::netlist::{Key, Netlist};
use locklab_core::neuroevo::evolve;
use locklab_core::seed;
use locklab_core::transform;

use crate::bench::{parse_bench, write_bench};
use crate::config::{Config, ModelKind};
use crate::formats::{self, JsonlLog};
use crate::pipeline::{self, AttackOptions};

const VERSION_LINE: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (bench format 1, dataset format 1, model format 1)"
);

#[derive(Parser)]
#[command(name = "locklab", version = VERSION_LINE)]
#[command(
    about = "Logic-locking attack workbench: lock netlists, extract localities, train key predictors"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed for every random choice in the invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML configuration file (defaults cover every key).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for produced artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Epic,
    Unbiased,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Epic => Scheme::Epic,
            SchemeArg::Unbiased => Scheme::Unbiased,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Gss,
    Srs,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::Gss => Scenario::Gss,
            ScenarioArg::Srs => Scenario::Srs,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKindArg {
    Mlp,
    CnnFixed,
    CnnEvolved,
}

impl From<ModelKindArg> for ModelKind {
    fn from(k: ModelKindArg) -> ModelKind {
        match k {
            ModelKindArg::Mlp => ModelKind::Mlp,
            ModelKindArg::CnnFixed => ModelKind::CnnFixed,
            ModelKindArg::CnnEvolved => ModelKind::CnnEvolved,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Lock a bench netlist with key gates; writes locked.bench and
    /// lockrecord.json.
    Lock {
        input: PathBuf,
        #[arg(long)]
        scheme: Option<SchemeArg>,
        #[arg(long)]
        key_bits: Option<usize>,
    },
    /// Reduce a netlist to generic two-input form.
    Transform { input: PathBuf },
    /// Apply the peephole optimizer (resynthesis stand-in).
    Optimize {
        input: PathBuf,
        /// Comma-separated pass list; defaults to the configured set.
        #[arg(long)]
        passes: Option<String>,
    },
    /// Extract locality vectors from a locked netlist.
    Extract {
        input: PathBuf,
        /// Label with the key from a lock record.
        #[arg(long)]
        lockrecord: Option<PathBuf>,
        /// Label with an explicit 0/1 key string.
        #[arg(long)]
        key: Option<String>,
    },
    /// Generate a labeled training set (and, for srs, the target and test
    /// vectors).
    GenDataset {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Target bench file (locked here for srs; excluded for gss).
        #[arg(long)]
        target: PathBuf,
        /// Training bench files (gss).
        #[arg(long, num_args = 1..)]
        train: Vec<PathBuf>,
    },
    /// Train the configured model on a dataset directory.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<ModelKindArg>,
    },
    /// Evolve a CNN architecture on a dataset directory.
    Evolve {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Run a full attack pipeline end to end.
    Attack {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, num_args = 0..)]
        train: Vec<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<ModelKindArg>,
    },
    /// Score a predicted key against a lock record.
    Eval {
        /// predicted_key.json or report.json.
        #[arg(long)]
        pred: PathBuf,
        /// lockrecord.json with the true key.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Render per-label locality images from a dataset directory.
    ExportImage {
        #[arg(long)]
        dataset: PathBuf,
        /// Also write PNG next to each PGM.
        #[arg(long)]
        png: bool,
    },
    /// Check two netlists for combinational equivalence.
    EquivCheck {
        left: PathBuf,
        right: PathBuf,
        /// exhaustive or random.
        #[arg(long, default_value = "random")]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        vectors: usize,
    },
    /// Generate and print a seeded random key.
    Keygen {
        #[arg(long, default_value_t = 64)]
        bits: usize,
    },
}

fn load_bench(path: &Path) -> Result<Netlist> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bench(&text).with_context(|| format!("parsing {}", path.display()))
}

fn bench_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bench".into())
}

fn load_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Ok(Config::load(path)?),
        None => Ok(Config::default()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.common.jobs {
        // ignore the error if a pool already exists (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let common = &cli.common;
    let cfg = load_config(common)?;
    let out = &common.out;
    match cli.command {
        Command::Lock {
            input,
            scheme,
            key_bits,
        } => {
            let netlist = load_bench(&input)?;
            let generic = transform::to_generic(&netlist)?;
            let scheme = scheme.map(Scheme::from).unwrap_or(cfg.locking.scheme);
            let bits = key_bits.unwrap_or(cfg.locking.key_bits);
            let key = locking::keygen(bits, seed::derive(common.seed, &[0x10]));
            let (locked, record) =
                locking::lock(&generic, scheme, &key, seed::derive(common.seed, &[0x11]))?;
            formats::write_string(&out.join("locked.bench"), &write_bench(&locked))?;
            formats::write_lock_record(&out.join("lockrecord.json"), &record)?;
            println!(
                "locked {} with {} key gates ({scheme}); artifacts in {}",
                input.display(),
                bits,
                out.display()
            );
        }
        Command::Transform { input } => {
            let netlist = load_bench(&input)?;
            let generic = transform::to_generic(&netlist)?;
            formats::write_string(&out.join("generic.bench"), &write_bench(&generic))?;
            println!(
                "generic form: {} gates (was {})",
                generic.logic_gate_count(),
                netlist.logic_gate_count()
            );
        }
        Command::Optimize { input, passes } => {
            let netlist = load_bench(&input)?;
            let list = match passes {
                Some(s) => s
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse()
                            .map_err(|_| anyhow::anyhow!("unknown optimizer pass '{p}'"))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => cfg.optimize.pass_list()?,
            };
            let optimized = transform::optimize(&netlist, &list);
            formats::write_string(&out.join("optimized.bench"), &write_bench(&optimized))?;
            println!(
                "optimized: {} gates (was {})",
                optimized.logic_gate_count(),
                netlist.logic_gate_count()
            );
        }
        Command::Extract {
            input,
            lockrecord,
            key,
        } => {
            let netlist = load_bench(&input)?;
            let key = match (lockrecord, key) {
                (Some(path), None) => Some(formats::read_lock_record(&path)?.key),
                (None, Some(s)) => {
                    Some(Key::from_str_bits(&s).context("key must be a 0/1 string")?)
                }
                (None, None) => None,
                (Some(_), Some(_)) => bail!("give either --lockrecord or --key, not both"),
            };
            let params = cfg.extraction.params();
            let vectors = lve(&netlist, &params, key.as_ref())?;
            let path = out.join("localities.csv");
            let mut text = String::from("label");
            for i in 0..params.l_vec {
                text.push_str(&format!(",v{i}"));
            }
            text.push('\n');
            for v in &vectors {
                text.push_str(match v.label {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "-",
                });
                for &x in &v.formatted {
                    text.push_str(&format!(",{x}"));
                }
                text.push('\n');
            }
            formats::write_string(&path, &text)?;
            println!(
                "extracted {} localities to {}",
                vectors.len(),
                path.display()
            );
        }
        Command::GenDataset {
            scenario,
            target,
            train,
        } => {
            let params = cfg.extraction.params();
            let passes = cfg.optimize.maybe_passes()?;
            match Scenario::from(scenario) {
                Scenario::Gss => {
                    let nets: Vec<(String, Netlist)> = train
                        .iter()
                        .map(|p| Ok((bench_id(p), load_bench(p)?)))
                        .collect::<Result<_>>()?;
                    let gss = locklab_core::dataset::GssConfig {
                        target_id: bench_id(&target),
                        scheme: cfg.locking.scheme,
                        locks_per_netlist: cfg.dataset.locks_per_netlist,
                        key_bits: cfg.locking.key_bits,
                        master_seed: seed::derive(common.seed, &[0x22]),
                        params,
                        optimize_passes: passes,
                    };
                    let ds = pipeline::gen_gss_parallel(&nets, &gss)?;
                    formats::write_dataset(&out.join("dataset"), &ds, gss.scheme, gss.master_seed)?;
                    println!(
                        "gss dataset: {} vectors in {}",
                        ds.len(),
                        out.join("dataset").display()
                    );
                }
                Scenario::Srs => {
                    let netlist = load_bench(&target)?;
                    let generic = transform::to_generic(&netlist)?;
                    let key =
                        locking::keygen(cfg.locking.key_bits, seed::derive(common.seed, &[0x10]));
                    let (locked, record) = locking::lock(
                        &generic,
                        cfg.locking.scheme,
                        &key,
                        seed::derive(common.seed, &[0x11]),
                    )?;
                    let locked = match &passes {
                        Some(p) => transform::optimize(&locked, p),
                        None => locked,
                    };
                    formats::write_string(&out.join("target/locked.bench"), &write_bench(&locked))?;
                    formats::write_lock_record(&out.join("truth/lockrecord.json"), &record)?;
                    let srs = SrsConfig {
                        target_id: bench_id(&target),
                        relocks: cfg.dataset.relocks,
                        key2_bits: cfg.dataset.relock_key_bits,
                        master_seed: seed::derive(common.seed, &[0x12]),
                        params,
                        optimize_passes: passes,
                    };
                    let (ds, test) = gen_srs(&locked, &record, &srs)?;
                    formats::write_dataset(
                        &out.join("dataset"),
                        &ds,
                        record.scheme,
                        srs.master_seed,
                    )?;
                    formats::write_test_vectors(&out.join("dataset/test_vectors.csv"), &test)?;
                    println!(
                        "srs dataset: {} training vectors, {} test vectors in {}",
                        ds.len(),
                        test.len(),
                        out.join("dataset").display()
                    );
                }
            }
        }
        Command::Train { dataset, kind } => {
            let (ds, manifest) = formats::read_dataset(&dataset)?;
            let kind = kind.map(ModelKind::from).unwrap_or(cfg.model.kind);
            let model = pipeline::fit_model(
                kind,
                manifest.scenario,
                &ds,
                &cfg,
                common.seed,
                Some(&out.join("evolution.jsonl")),
            )?;
            formats::write_model(&out.join("model.json"), &model)?;
            let last = model.meta.accuracy_curve.last().copied().unwrap_or(0.0);
            println!(
                "trained {} on {} vectors; final training accuracy {:.2}%",
                model.meta.architecture,
                ds.len(),
                100.0 * last
            );
        }
        Command::Evolve { dataset } => {
            let (ds, _) = formats::read_dataset(&dataset)?;
            let ecfg = cfg
                .evolution
                .evolution_config(cfg.model.batch_size, seed::derive(common.seed, &[0x36]));
            let mut log = JsonlLog::create(&out.join("evolution.jsonl"))?;
            let outcome = evolve::<f32>(&ds, &ecfg, &mut log);
            formats::write_model(&out.join("model.json"), &outcome.best_model)?;
            println!(
                "best architecture {} (genotype {}) with fitness {:.2} after {} evaluations ({} trainings)",
                outcome.best_architecture,
                outcome.best_genotype,
                outcome.best_fitness,
                outcome.evaluations,
                outcome.trainings
            );
        }
        Command::Attack {
            scenario,
            target,
            train,
            kind,
        } => {
            let target_netlist = load_bench(&target)?;
            let opts = AttackOptions {
                scenario: scenario.into(),
                model_kind: kind.map(ModelKind::from).unwrap_or(cfg.model.kind),
                seed: common.seed,
                out_dir: Some(out.clone()),
            };
            let report = match Scenario::from(scenario) {
                Scenario::Srs => {
                    pipeline::run_srs_attack(&bench_id(&target), &target_netlist, &cfg, &opts)?
                        .report
                }
                Scenario::Gss => {
                    let nets: Vec<(String, Netlist)> = train
                        .iter()
                        .map(|p| Ok((bench_id(p), load_bench(p)?)))
                        .collect::<Result<_>>()?;
                    pipeline::run_gss_attack(
                        &nets,
                        &bench_id(&target),
                        &target_netlist,
                        &cfg,
                        &opts,
                    )?
                    .report
                }
            };
            println!(
                "{} attack on {} with {}: kpa {:.2}% over {} bits ({} ms)",
                report.scenario,
                report.target_id,
                report.model,
                report.kpa.unwrap_or(f64::NAN),
                report.predictions_made,
                report.timing_ms.unwrap_or(0)
            );
        }
        Command::Eval { pred, truth } => {
            let pred_text = formats::read_to_string(&pred)?;
            let value: serde_json::Value = serde_json::from_str(&pred_text)
                .with_context(|| format!("parsing {}", pred.display()))?;
            let key_str = value
                .get("predicted_key")
                .or_else(|| value.get("key"))
                .and_then(|v| v.as_str())
                .ok_or_else(|| {
                    anyhow::anyhow!("{}: no 'key' or 'predicted_key' field", pred.display())
                })?;
            let predicted = Key::from_str_bits(key_str)
                .ok_or_else(|| anyhow::anyhow!("predicted key is not a 0/1 string"))?;
            let record = formats::read_lock_record(&truth)?;
            let score = kpa(&predicted, &record.key)?;
            println!("{score}");
        }
        Command::ExportImage { dataset, png } => {
            let (ds, _) = formats::read_dataset(&dataset)?;
            let images = export_image(&ds.vectors, true)?;
            for (label, image) in &images {
                let stem = match label {
                    Some(true) => "label1",
                    Some(false) => "label0",
                    None => "combined",
                };
                formats::write_pgm(&out.join(format!("{stem}.pgm")), image)?;
                if png {
                    formats::write_png(&out.join(format!("{stem}.png")), image)?;
                }
                println!("{stem}: {}x{}", image.width, image.height);
            }
        }
        Command::EquivCheck {
            left,
            right,
            mode,
            vectors,
        } => {
            let a = load_bench(&left)?;
            let b = load_bench(&right)?;
            let mode = match mode.as_str() {
                "exhaustive" => EquivMode::Exhaustive,
                "random" => EquivMode::Random {
                    vectors,
                    seed: common.seed,
                },
                other => bail!("unknown mode '{other}' (use exhaustive or random)"),
            };
            match equiv_check(&a, &b, mode)? {
                EquivOutcome::Equivalent => println!("equivalent"),
                EquivOutcome::Counterexample(cex) => {
                    let fmt = |bits: &[bool]| -> String {
                        bits.iter().map(|&x| if x { '1' } else { '0' }).collect()
                    };
                    println!(
                        "counterexample: inputs={} keys={} ff={}",
                        fmt(&cex.primary_inputs),
                        fmt(&cex.key_inputs),
                        fmt(&cex.ff_state)
                    );
                }
            }
        }
        Command::Keygen { bits } => {
            let key = locking::keygen(bits, common.seed);
            formats::write_string(
                &out.join("key.json"),
                &serde_json::to_string_pretty(&serde_json::json!({ "key": key.to_string() }))
                    .expect("key serializes"),
            )?;
            println!("{key}");
        }
    }
    Ok(())
}
