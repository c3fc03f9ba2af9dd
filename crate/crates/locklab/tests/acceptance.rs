//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line with its measurements (visible with `--nocapture`).
//!
//! Run with:
//! ```bash
//! cargo test -p locklab --test acceptance -- --nocapture
//! ```

use std::sync::OnceLock;
use std::time::Instant;

use locklab::config::{Config, ModelKind};
use locklab::formats;
use locklab::pipeline::{run_gss_attack, run_srs_attack, AttackOptions};
use locklab_core::ann::{build_cnn, grad_check, Layer, Model, Shape};
use locklab_core::dataset::Scenario;
use locklab_core::equiv::{equiv_check, EquivMode, EquivOutcome};
use locklab_core::extract::{
    bfs_extract, encode_gate, export_image, format_vector, lve, reconstruct_window, window_blocks,
    DepthMode, Direction, ExtractionParams,
};
use locklab_core::locking::{keygen, lock_epic, Scheme};
use locklab_core::netlist::{GateType, Netlist};
use locklab_core::neuroevo::{evolve, EvolutionConfig, Genotype, NoObserver, GENOTYPE_BITS};
use locklab_core::randgen::{random_netlist, RandNetlistParams};
use locklab_core::seed;
use locklab_core::transform::{optimize, to_generic, Pass};

fn pass_line(criterion: &str, elapsed: Instant, detail: String) {
    println!(
        "acceptance {criterion}: PASS in {:.1}s ({detail})",
        elapsed.elapsed().as_secs_f64()
    );
}

// ----------------------------------------------------------------------
// 1. Locking correctness
// ----------------------------------------------------------------------

#[test]
fn c01_locking_correctness() {
    let started = Instant::now();
    let pairs = 50;
    let mut counterexamples_found = 0;
    for i in 0..pairs {
        let inputs = 8 + (i % 7); // 8..=14 primary inputs
        let gates = 80 + 10 * (i % 12);
        let params = RandNetlistParams {
            inputs,
            gates,
            flipflops: 0,
        };
        let base = random_netlist(&params, seed::derive(0xC1, &[i as u64, 0]));
        assert!(base.primary_inputs.len() <= 16);
        let k = 8 + (i % 17); // 8..=24 key bits
        let key = keygen(k, seed::derive(0xC1, &[i as u64, 1]));
        let (locked, _) = lock_epic(&base, &key, seed::derive(0xC1, &[i as u64, 2])).unwrap();

        let unlocked = locked.apply_key(&key).unwrap();
        let out = equiv_check(&base, &unlocked, EquivMode::Exhaustive).unwrap();
        assert!(
            out.is_equivalent(),
            "pair {i}: correct key must restore the function"
        );

        let wrong = key.with_flipped(i % k);
        let bad = locked.apply_key(&wrong).unwrap();
        let mode = EquivMode::Random {
            vectors: 10_000,
            seed: seed::derive(0xC1, &[i as u64, 3]),
        };
        if matches!(
            equiv_check(&base, &bad, mode).unwrap(),
            EquivOutcome::Counterexample(_)
        ) {
            counterexamples_found += 1;
        }
    }
    assert!(
        counterexamples_found * 10 >= pairs * 9,
        "wrong keys detectable on only {counterexamples_found}/{pairs} pairs"
    );
    assert!(
        started.elapsed().as_secs() < 300,
        "over the 5 minute budget"
    );
    pass_line(
        "criterion 1 (locking correctness)",
        started,
        format!("50/50 exact unlocks, {counterexamples_found}/50 wrong-key counterexamples"),
    );
}

// ----------------------------------------------------------------------
// 2 & 3. SRS pipelines (shared desk-scale setup)
// ----------------------------------------------------------------------

fn srs_config(scheme: Scheme) -> Config {
    let mut cfg = Config::default();
    cfg.extraction.forward_depth = 4; // raw 183, padded to 400: no trimming
    cfg.locking.scheme = scheme;
    cfg.locking.key_bits = 32;
    cfg.dataset.relocks = 300;
    cfg.dataset.relock_key_bits = 32;
    cfg.model.epochs = 30;
    cfg.optimize.enabled = false; // the resilience claim holds pre-resynthesis
    cfg
}

fn srs_target() -> Netlist {
    let n = random_netlist(&RandNetlistParams::medium(), 0xBE7C);
    assert!(
        n.logic_gate_count() >= 500,
        "bench must have at least 500 gates"
    );
    n
}

fn srs_kpa(scheme: Scheme, model_kind: ModelKind, seed_v: u64, epochs: usize) -> f64 {
    let mut cfg = srs_config(scheme);
    cfg.model.epochs = epochs;
    let target = srs_target();
    let opts = AttackOptions {
        scenario: Scenario::Srs,
        model_kind,
        seed: seed_v,
        out_dir: None,
    };
    let art = run_srs_attack("srs-bench", &target, &cfg, &opts).unwrap();
    art.report.kpa.expect("scored run")
}

/// Criterion 2's per-seed results, shared with criterion 3.
fn unbiased_kpas() -> &'static Vec<f64> {
    static RESULTS: OnceLock<Vec<f64>> = OnceLock::new();
    RESULTS.get_or_init(|| {
        (1..=5)
            .map(|s| srs_kpa(Scheme::Unbiased, ModelKind::Mlp, s, 30))
            .collect()
    })
}

#[test]
fn c02_unbiased_scheme_resilience() {
    let started = Instant::now();
    let kpas = unbiased_kpas();
    let mean = kpas.iter().sum::<f64>() / kpas.len() as f64;
    assert!(
        (45.0..=55.0).contains(&mean),
        "unbiased scheme must force a coin flip; per-seed {kpas:?}, mean {mean:.2}"
    );
    assert!(
        started.elapsed().as_secs() < 1200,
        "over the 20 minute budget"
    );
    pass_line(
        "criterion 2 (unbiased scheme resilience)",
        started,
        format!("per-seed KPA {kpas:?}, mean {mean:.2} within 50±5pp"),
    );
}

#[test]
fn c03_epic_srs_attack() {
    let started = Instant::now();
    let mlp: Vec<f64> = (1..=3)
        .map(|s| srs_kpa(Scheme::Epic, ModelKind::Mlp, s, 30))
        .collect();
    let cnn: Vec<f64> = (1..=3)
        .map(|s| srs_kpa(Scheme::Epic, ModelKind::CnnFixed, s, 10))
        .collect();
    let mlp_mean = mlp.iter().sum::<f64>() / mlp.len() as f64;
    let cnn_mean = cnn.iter().sum::<f64>() / cnn.len() as f64;
    let unbiased_mean = {
        let k = unbiased_kpas();
        k.iter().sum::<f64>() / k.len() as f64
    };
    for (name, mean) in [("mlp", mlp_mean), ("cnn-fixed", cnn_mean)] {
        assert!(mean >= 60.0, "{name}: KPA {mean:.2} below 60%");
        assert!(
            mean >= unbiased_mean + 10.0,
            "{name}: KPA {mean:.2} not 10pp above the unbiased control {unbiased_mean:.2}"
        );
    }
    assert!(
        started.elapsed().as_secs() < 2700,
        "over the 45 minute budget"
    );
    pass_line(
        "criterion 3 (EPIC SRS attack)",
        started,
        format!(
            "MLP mean {mlp_mean:.2} {mlp:?}, CNN mean {cnn_mean:.2} {cnn:?}, control {unbiased_mean:.2}"
        ),
    );
}

// ----------------------------------------------------------------------
// 4. GSS attack
// ----------------------------------------------------------------------

#[test]
fn c04_gss_attack() {
    let started = Instant::now();
    let train: Vec<(String, Netlist)> = (0..4)
        .map(|i| {
            let params = RandNetlistParams {
                inputs: 12,
                gates: 350 + 60 * i,
                flipflops: 0,
            };
            (
                format!("train{i}"),
                random_netlist(&params, seed::derive(0xC4, &[i as u64])),
            )
        })
        .collect();
    let target = random_netlist(&RandNetlistParams::medium(), seed::derive(0xC4, &[99]));

    let mut cfg = Config::default();
    cfg.extraction.forward_depth = 4;
    cfg.locking.key_bits = 32;
    cfg.dataset.locks_per_netlist = 200;
    cfg.model.epochs = 12;
    cfg.optimize.enabled = true;

    let kpas: Vec<f64> = (1..=3)
        .map(|s| {
            let opts = AttackOptions {
                scenario: Scenario::Gss,
                model_kind: ModelKind::Mlp,
                seed: s,
                out_dir: None,
            };
            run_gss_attack(&train, "target", &target, &cfg, &opts)
                .unwrap()
                .report
                .kpa
                .unwrap()
        })
        .collect();
    let mean = kpas.iter().sum::<f64>() / kpas.len() as f64;
    assert!(
        mean > 52.0,
        "GSS transfer must beat random: per-seed {kpas:?}, mean {mean:.2}"
    );
    assert!(
        started.elapsed().as_secs() < 3600,
        "over the 60 minute budget"
    );
    pass_line(
        "criterion 4 (GSS attack)",
        started,
        format!("per-seed KPA {kpas:?}, mean {mean:.2} > 52"),
    );
}

// ----------------------------------------------------------------------
// 5. Extraction geometry
// ----------------------------------------------------------------------

#[test]
fn c05_extraction_geometry() {
    let started = Instant::now();
    let canonical = ExtractionParams::default();
    assert_eq!(canonical.backward_len(), 62);
    assert_eq!(canonical.forward_len(), 363);
    assert_eq!(canonical.raw_len(), 426);

    // a locality at the canonical geometry formats to exactly 400 entries
    let mut raw = vec![0u8; 426];
    raw[canonical.center_index()] = 5;
    let formatted = format_vector(&raw, canonical.l_vec).unwrap();
    assert_eq!(formatted.len(), 400);

    // nodes mode at depth 3, fan-in 2: exactly 4 backward entries
    let nodes = ExtractionParams {
        depth_mode: DepthMode::Nodes,
        d_b: 3,
        ..Default::default()
    };
    assert_eq!(nodes.backward_len(), 4);
    let mut n = Netlist::new();
    let a = n.add_input("a");
    let b = n.add_input("b");
    let g = n.add_gate(GateType::And, &[a, b]);
    n.mark_output(g);
    assert_eq!(bfs_extract(&n, Direction::Backward, g, &nodes).len(), 4);
    pass_line(
        "criterion 5 (extraction geometry)",
        started,
        "raw 426 = 62+1+363, formatted 400, nodes-mode backward length 4".to_string(),
    );
}

// ----------------------------------------------------------------------
// 6. Reversibility oracle
// ----------------------------------------------------------------------

#[test]
fn c06_reversibility() {
    let started = Instant::now();
    let params = ExtractionParams {
        d_b: 3,
        d_f: 3,
        ..Default::default()
    };
    for s in 0..100u64 {
        let base = random_netlist(&RandNetlistParams::small(), seed::derive(0xC6, &[s, 0]));
        let generic = to_generic(&base).unwrap();
        let key = keygen(3, seed::derive(0xC6, &[s, 1]));
        let (locked, rec) = lock_epic(&generic, &key, seed::derive(0xC6, &[s, 2])).unwrap();
        for (i, &ki) in locked.key_inputs.iter().enumerate() {
            let kg = locked.gate(ki).fanout[0];
            let data = locked.gate(kg).fanin[1];
            let mut raw = bfs_extract(&locked, Direction::Backward, data, &params);
            raw.push(encode_gate(locked.gate(kg).gtype).unwrap());
            raw.extend(bfs_extract(&locked, Direction::Forward, kg, &params));

            let (bwd, center, fwd) = reconstruct_window(&raw, &params).unwrap();
            assert_eq!(
                bwd,
                window_blocks(&locked, Direction::Backward, data, &params),
                "netlist {s} bit {i}: backward window must reconstruct exactly"
            );
            assert_eq!(
                fwd,
                window_blocks(&locked, Direction::Forward, kg, &params),
                "netlist {s} bit {i}: forward window must reconstruct exactly"
            );
            assert_eq!(center, encode_gate(locked.gate(kg).gtype).unwrap());
            let _ = rec;
        }
    }
    pass_line(
        "criterion 6 (reversibility oracle)",
        started,
        "100 random netlists, every window reconstructed exactly".to_string(),
    );
}

// ----------------------------------------------------------------------
// 7. Gradient correctness
// ----------------------------------------------------------------------

#[test]
fn c07_gradient_correctness() {
    use locklab_core::ann::layers::{Conv2d, Dense, MaxPool, Relu, Softmax};
    let started = Instant::now();
    let mut rng = seed::rng(0xC7);
    let mut inputs = |n: usize| -> Vec<f64> {
        use rand::Rng;
        (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
    };

    let mut worst: f64 = 0.0;
    // dense + softmax/cross-entropy
    let mut dense = Model::new(
        Shape::Flat(8),
        vec![
            Layer::Dense(Dense::<f64>::new(8, 6)),
            Layer::Relu(Relu::default()),
            Layer::Dense(Dense::new(6, 2)),
            Layer::Softmax(Softmax::default()),
        ],
        1,
        "dense".into(),
    );
    let x = inputs(3 * 8);
    let r = grad_check(&mut dense, &x, &[0, 1, 1], 1e-3);
    assert!(r.max_rel_error < 1e-4, "dense: {r:?}");
    worst = worst.max(r.max_rel_error);

    // conv
    let mut conv = Model::new(
        Shape::Hwc { h: 6, w: 6, c: 1 },
        vec![
            Layer::Conv2d(Conv2d::<f64>::new(6, 6, 1, 3)),
            Layer::Relu(Relu::default()),
            Layer::Flatten,
            Layer::Dense(Dense::new(4 * 4 * 3, 2)),
            Layer::Softmax(Softmax::default()),
        ],
        2,
        "conv".into(),
    );
    let x = inputs(2 * 36);
    let r = grad_check(&mut conv, &x, &[1, 0], 1e-3);
    assert!(r.max_rel_error < 1e-4, "conv: {r:?}");
    worst = worst.max(r.max_rel_error);

    // maxpool
    let mut pool = Model::new(
        Shape::Hwc { h: 5, w: 5, c: 2 },
        vec![
            Layer::MaxPool(MaxPool::new(5, 5, 2)),
            Layer::Flatten,
            Layer::Dense(Dense::<f64>::new(4 * 4 * 2, 2)),
            Layer::Softmax(Softmax::default()),
        ],
        3,
        "pool".into(),
    );
    let x = inputs(2 * 50);
    let r = grad_check(&mut pool, &x, &[0, 1], 1e-3);
    assert!(r.max_rel_error < 1e-4, "pool: {r:?}");
    worst = worst.max(r.max_rel_error);

    // full composition
    let mut full = Model::new(
        Shape::Hwc { h: 8, w: 8, c: 1 },
        vec![
            Layer::Conv2d(Conv2d::<f64>::new(8, 8, 1, 2)),
            Layer::Relu(Relu::default()),
            Layer::MaxPool(MaxPool::new(6, 6, 2)),
            Layer::Flatten,
            Layer::Dense(Dense::new(5 * 5 * 2, 4)),
            Layer::Relu(Relu::default()),
            Layer::Dense(Dense::new(4, 2)),
            Layer::Softmax(Softmax::default()),
        ],
        4,
        "composition".into(),
    );
    let x = inputs(2 * 64);
    let r = grad_check(&mut full, &x, &[1, 0], 1e-3);
    assert!(r.max_rel_error < 1e-4, "composition: {r:?}");
    worst = worst.max(r.max_rel_error);

    assert!(
        started.elapsed().as_secs() < 120,
        "over the 2 minute budget"
    );
    pass_line(
        "criterion 7 (gradient correctness)",
        started,
        format!("max relative error {worst:.2e} < 1e-4 across all four stacks"),
    );
}

// ----------------------------------------------------------------------
// 8. Phenotype enumeration and search budget
// ----------------------------------------------------------------------

#[test]
fn c08_phenotype_enumeration() {
    let started = Instant::now();
    let mut archs = std::collections::BTreeSet::new();
    for v in 0..(1u32 << GENOTYPE_BITS) {
        let arch = Genotype::from_u16(v as u16).decode();
        assert!(locklab_core::ann::cnn_shape_plan(&arch, (20, 20)).is_ok());
        if archs.insert(arch.clone()) {
            assert!(build_cnn::<f32>(&arch, 0).is_ok());
        }
    }
    assert_eq!(
        archs.len(),
        255,
        "sum over k=0..=7 of 2^k distinct architectures"
    );

    let default_cfg = EvolutionConfig::new(0);
    assert_eq!(
        default_cfg.population * default_cfg.generations,
        200,
        "published budget"
    );

    // an instrumented run stays within budget and never retrains a network
    let mut cfg = EvolutionConfig::new(0xC8);
    cfg.population = 5;
    cfg.generations = 4;
    cfg.epochs_per_fitness = 2;
    cfg.batch_size = 16;
    let data = tiny_separable_dataset(24);
    let out = evolve::<f32>(&data, &cfg, &mut NoObserver);
    assert_eq!(out.evaluations, 20);
    assert!(out.evaluations <= 200);
    assert!(out.trainings <= out.evaluations);
    assert!(out.trainings <= 255);
    pass_line(
        "criterion 8 (phenotype enumeration)",
        started,
        format!(
            "16384 genotypes -> 255 architectures; {} evaluations, {} trainings",
            out.evaluations, out.trainings
        ),
    );
}

fn tiny_separable_dataset(n: usize) -> locklab_core::dataset::LabeledDataset {
    use locklab_core::dataset::{LabeledDataset, Provenance};
    use locklab_core::extract::LocalityVector;
    let mut vectors = Vec::new();
    let mut provenance = Vec::new();
    for i in 0..n {
        let label = i % 2 == 1;
        let mut raw = vec![0u8; 64];
        raw[3] = if label { 9 } else { 2 };
        vectors.push(LocalityVector {
            key_index: 0,
            label: Some(label),
            formatted: format_vector(&raw, 400).unwrap(),
            raw,
        });
        provenance.push(Provenance {
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

// ----------------------------------------------------------------------
// 9. Run-of-gates ambiguity
// ----------------------------------------------------------------------

#[test]
fn c09_run_of_gates_ambiguity() {
    let started = Instant::now();
    let build = |t: GateType| -> Netlist {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let b = n.add_input("b");
        let w = n.add_gate(GateType::And, &[a, b]);
        let k0 = n.add_key_input();
        let u = n.add_gate(t, &[k0, w]);
        let k1 = n.add_key_input();
        let v = n.add_gate(t, &[k1, u]);
        n.mark_output(v);
        n
    };
    let n00 = build(GateType::Xor); // both bits 0
    let n11 = build(GateType::Xnor); // both bits 1

    // functionally equivalent as functions of (inputs, key inputs)
    assert!(equiv_check(&n00, &n11, EquivMode::Exhaustive)
        .unwrap()
        .is_equivalent());

    // the collapsing pass reduces both runs to a single data-path gate
    let o00 = optimize(&n00, &[Pass::RunOfGates]);
    let o11 = optimize(&n11, &[Pass::RunOfGates]);
    assert!(o00.isomorphic(&o11));
    assert!(equiv_check(&n00, &o00, EquivMode::Exhaustive)
        .unwrap()
        .is_equivalent());
    assert!(equiv_check(&n11, &o11, EquivMode::Exhaustive)
        .unwrap()
        .is_equivalent());
    let data_path_xors = |n: &Netlist| {
        n.gates()
            .filter(|g| {
                matches!(g.gtype, GateType::Xor | GateType::Xnor)
                    && g.fanin
                        .iter()
                        .any(|&p| n.gate(p).gtype != GateType::KeyInput)
                    && g.fanin.iter().any(|&p| {
                        !matches!(n.gate(p).gtype, GateType::KeyInput)
                            && !matches!(n.gate(p).gtype, GateType::Xor | GateType::Xnor)
                    })
            })
            .count()
    };
    assert_eq!(data_path_xors(&o00), 1, "one gate remains on the data path");

    // after collapsing, the localities of the two versions are identical
    let params = ExtractionParams {
        d_f: 4,
        ..Default::default()
    };
    let v00 = lve(&o00, &params, None).unwrap();
    let v11 = lve(&o11, &params, None).unwrap();
    assert_eq!(v00.len(), 2);
    for (a, b) in v00.iter().zip(&v11) {
        assert_eq!(
            a.raw, b.raw,
            "key {}'s locality must not distinguish 00 from 11",
            a.key_index
        );
    }
    pass_line(
        "criterion 9 (run-of-gates ambiguity)",
        started,
        "00 and 11 runs equivalent, collapsed, and indistinguishable in localities".to_string(),
    );
}

// ----------------------------------------------------------------------
// 10. Pattern images
// ----------------------------------------------------------------------

#[test]
fn c10_pattern_images() {
    let started = Instant::now();
    let base = random_netlist(&RandNetlistParams::medium(), 0xC10);
    // shallow windows: the label-driven center row must dominate the
    // finite-sample noise of 400 columns, and noise grows with window area
    let params = ExtractionParams {
        d_b: 2,
        d_f: 2,
        ..Default::default()
    };
    // keep the source lock of every selected vector so the null model can
    // permute labels within locks (labels are exchangeable only there)
    let mut selected: Vec<(u64, locklab_core::extract::LocalityVector)> = Vec::new();
    let mut zeros = 0usize;
    let mut ones = 0usize;
    let mut s = 0u64;
    while zeros < 400 || ones < 400 {
        let key = keygen(32, seed::derive(0xC10, &[s, 0]));
        let (locked, _) = lock_epic(&base, &key, seed::derive(0xC10, &[s, 1])).unwrap();
        for v in lve(&locked, &params, Some(&key)).unwrap() {
            match v.label {
                Some(false) if zeros < 400 => {
                    zeros += 1;
                    selected.push((s, v));
                }
                Some(true) if ones < 400 => {
                    ones += 1;
                    selected.push((s, v));
                }
                _ => {}
            }
        }
        s += 1;
    }
    let all: Vec<locklab_core::extract::LocalityVector> =
        selected.iter().map(|(_, v)| v.clone()).collect();
    let images = export_image(&all, true).unwrap();
    assert_eq!(images.len(), 2);
    let by_label = |want: bool| {
        &images
            .iter()
            .find(|(l, _)| *l == Some(want))
            .expect("both labels present")
            .1
    };
    let img0 = by_label(false);
    let img1 = by_label(true);
    assert_eq!((img0.width, img0.height), (400, 400));
    assert_eq!((img1.width, img1.height), (400, 400));

    // write the real artifacts too
    let dir = tempfile::tempdir().unwrap();
    formats::write_pgm(&dir.path().join("label0.pgm"), img0).unwrap();
    formats::write_pgm(&dir.path().join("label1.pgm"), img1).unwrap();
    assert_eq!(
        formats::read_pgm(&dir.path().join("label0.pgm")).unwrap(),
        *img0
    );

    // per-row mean profiles differ far beyond a label-shuffled null
    let l1 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() };
    let observed = l1(&img0.row_profile(), &img1.row_profile());

    use rand::seq::SliceRandom;
    let mut lock_groups: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for (i, (lock, _)) in selected.iter().enumerate() {
        lock_groups.entry(*lock).or_default().push(i);
    }
    let mut null = Vec::with_capacity(200);
    let mut rng = seed::rng(seed::derive(0xC10, &[7, 7]));
    for _ in 0..200 {
        let mut fake = all.clone();
        for idxs in lock_groups.values() {
            let mut labels: Vec<Option<bool>> = idxs.iter().map(|&i| all[i].label).collect();
            labels.shuffle(&mut rng);
            for (&i, l) in idxs.iter().zip(labels) {
                fake[i].label = l;
            }
        }
        let imgs = export_image(&fake, true).unwrap();
        let f0 = &imgs.iter().find(|(l, _)| *l == Some(false)).unwrap().1;
        let f1 = &imgs.iter().find(|(l, _)| *l == Some(true)).unwrap().1;
        null.push(l1(&f0.row_profile(), &f1.row_profile()));
    }
    null.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p99 = null[198];
    assert!(
        observed > p99,
        "observed profile distance {observed:.2} must exceed the shuffled-null 99th percentile {p99:.2}"
    );
    assert!(
        started.elapsed().as_secs() < 600,
        "over the 10 minute budget"
    );
    pass_line(
        "criterion 10 (pattern images)",
        started,
        format!("two 400x400 images; profile L1 {observed:.1} vs null p99 {p99:.1}"),
    );
}
