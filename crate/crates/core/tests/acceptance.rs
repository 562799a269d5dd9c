//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion (written straight to stdout, so it shows up without
//! `--nocapture`) and then asserts it.
//!
//! Criteria 4 to 6 share one experiment on a sparse synthetic dataset:
//! 2000 questions, 40 skills, 500 learners, at most 10 answers per
//! question. For five seeds, each variant is trained on the training
//! learners of fold 0 of that seed's split and scored on its test learners.
//! The model settings below were fixed on a separate calibration dataset
//! (generator seed 7) before this dataset was evaluated.

mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{auc_pairwise, gradient_check, ordered_double_sum, params, random_graph_edges, random_sequence};
use qdkt::data::{ingest_csv, split_folds, synth_generate, CsvSchema, Dataset, SynthConfig};
use qdkt::embed::{build_wxv, question_token, train_skipgram, Corpus, SkipGramConfig};
use qdkt::eval::{auc, cross_validate, pca_project, run_fold, separation_score, CvConfig, Variant};
use qdkt::graph::{build_skill_graph, build_weighted_graph, laplacian};
use qdkt::net::{AdamConfig, TrainConfig};
use qdkt::seed;
use rand::Rng;

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "criterion {id} {}: {name} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_1_gradient_exactness() {
    let start = Instant::now();
    let p = params(6, 4, 5, 2024);
    let seq = random_sequence(6, 4, 2024);
    let lap = laplacian(&build_weighted_graph(&random_graph_edges(6, 0.5, 2024), 6).unwrap());
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for lambda in [0.0, 0.1] {
        let (err, at) = gradient_check(&p, &seq, lambda, Some(&lap), 1e-5);
        worst = worst.max(err);
        notes.push(format!("lambda {lambda}: max rel err {err:.2e} at {at}"));
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "BPTT gradients vs central differences",
        worst < 1e-4 && elapsed < Duration::from_secs(5),
        &format!("{}; {:.2}s", notes.join("; "), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_laplacian_identity() {
    let start = Instant::now();
    let mut rng = seed::rng(2);
    let (mut worst_identity, mut worst_grad): (f64, f64) = (0.0, 0.0);
    for case in 0..100 {
        let n = rng.random_range(1..=8);
        let edges = random_graph_edges(n, rng.random::<f64>(), case);
        let lap = laplacian(&build_weighted_graph(&edges, n).unwrap());
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let q = lap.quadratic_form(&y).unwrap();
        worst_identity = worst_identity.max((q - 0.5 * ordered_double_sum(n, &edges, &y)).abs());
        let grad = lap.quadratic_form_grad(&y).unwrap();
        for i in 0..n {
            let (mut up, mut down) = (y.clone(), y.clone());
            up[i] += 1e-5;
            down[i] -= 1e-5;
            let numeric = (lap.quadratic_form(&up).unwrap() - lap.quadratic_form(&down).unwrap()) / 2e-5;
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-6);
            worst_grad = worst_grad.max(rel);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "quadratic form = half the ordered double sum; gradient vs finite differences",
        worst_identity < 1e-12 && worst_grad < 1e-6 && elapsed < Duration::from_secs(1),
        &format!(
            "max abs identity err {worst_identity:.2e}, max rel grad err {worst_grad:.2e}; {:.3}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_auc_oracle() {
    let start = Instant::now();
    let mut rng = seed::rng(3);
    let mut worst: f64 = 0.0;
    let mut tie_heavy = 0;
    for case in 0..100 {
        let n = rng.random_range(2..=200);
        let levels = if case % 2 == 0 { 3 } else { 1_000_000 };
        tie_heavy += usize::from(levels == 3);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        labels[0] = 0;
        labels[1] = 1;
        worst = worst.max((auc(&scores, &labels).unwrap() - auc_pairwise(&scores, &labels)).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        "rank AUC vs pairwise oracle",
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        &format!(
            "100 instances ({tie_heavy} tie-heavy), max abs err {worst:.2e}; {:.3}s",
            elapsed.as_secs_f64()
        ),
    );
}

const SEEDS: u64 = 5;
const DATA_SEED: u64 = 2024;

struct SeedResult {
    auc: [f64; 4],
    first_epoch_loss: [f64; 4],
    separation: [f64; 4],
}

struct Experiment {
    per_seed: Vec<SeedResult>,
    elapsed: Duration,
    identity_err: f64,
    max_obs_per_question: usize,
}

const VARIANTS: [Variant; 4] = [Variant::QdktBase, Variant::QdktReg, Variant::QdktFasttext, Variant::QdktFull];

fn sparse_dataset() -> Dataset {
    synth_generate(&SynthConfig {
        num_learners: 500,
        num_questions: 2000,
        num_skills: 40,
        obs_per_learner: 36,
        max_obs_per_question: Some(10),
        seed: DATA_SEED,
        ..SynthConfig::default()
    })
    .unwrap()
    .dataset
}

fn experiment_config() -> CvConfig {
    CvConfig {
        train: TrainConfig {
            embed_dim: 32,
            hidden: 32,
            lambda: 1e-3,
            dropout: 0.2,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            epochs: 3,
            batch_size: 32,
            ..TrainConfig::default()
        },
        skipgram: SkipGramConfig {
            dim: 32,
            ..SkipGramConfig::default()
        },
        ..CvConfig::default()
    }
}

fn experiment() -> &'static Experiment {
    static EXP: OnceLock<Experiment> = OnceLock::new();
    EXP.get_or_init(|| {
        let start = Instant::now();
        let ds = sparse_dataset();
        let mut counts = vec![0usize; ds.num_questions()];
        for s in &ds.sequences {
            for i in &s.interactions {
                counts[i.question] += 1;
            }
        }
        let lap = laplacian(&build_skill_graph(&ds.question_skills, ds.num_questions()).unwrap());
        let cfg = experiment_config();
        let mut per_seed = Vec::new();
        for s in 0..SEEDS {
            let fold = split_folds(&ds, cfg.k, cfg.train_frac, s).unwrap().swap_remove(0);
            let mut r = SeedResult {
                auc: [0.0; 4],
                first_epoch_loss: [0.0; 4],
                separation: [0.0; 4],
            };
            for (i, v) in VARIANTS.into_iter().enumerate() {
                let out = run_fold(&ds, &cfg, v, &fold, Some(&lap), s).unwrap();
                let proj = pca_project(&out.params.w_xv, 3).unwrap();
                r.auc[i] = out.auc;
                r.first_epoch_loss[i] = out.epoch_losses[0];
                r.separation[i] = separation_score(&proj.points, &proj.labels).unwrap().score;
            }
            let _ = std::io::stdout().write_all(
                format!(
                    "  seed {s}: auc base {:.4} reg {:.4} fasttext {:.4} full {:.4}; epoch-1 loss base {:.4} fasttext {:.4}; separation base {:.3} fasttext {:.3}\n",
                    r.auc[0], r.auc[1], r.auc[2], r.auc[3], r.first_epoch_loss[0], r.first_epoch_loss[2],
                    r.separation[0], r.separation[2]
                )
                .as_bytes(),
            );
            per_seed.push(r);
        }

        // the column identity at initialization, on a table pretrained from
        // the first split's training learners
        let fold = split_folds(&ds, cfg.k, cfg.train_frac, 0).unwrap().swap_remove(0);
        let steps: Vec<Vec<(usize, u8)>> = fold.train.iter().map(|&l| ds.sequences[l].steps()).collect();
        let corpus = Corpus::from_steps(steps.iter().map(Vec::as_slice));
        let mut table = train_skipgram(&corpus, &cfg.skipgram).unwrap().table();
        table.fill_missing_questions(ds.num_questions());
        let n = ds.num_questions();
        let w = build_wxv(&table, n, 32).unwrap();
        let unit = |u: &str| table.get(u).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; 32]);
        let (zero, one) = (unit("0"), unit("1"));
        let mut identity_err: f64 = 0.0;
        for q in 0..n {
            let whole0 = unit(&format!("{}␟0", question_token(q)));
            let whole1 = unit(&format!("{}␟1", question_token(q)));
            let (c0, c1) = (w.column(q), w.column(q + n));
            for d in 0..32 {
                let expected = (zero[d] - one[d]) + (whole0[d] - whole1[d]);
                identity_err = identity_err.max((c0[d] - c1[d] - expected).abs());
            }
        }
        Experiment {
            per_seed,
            elapsed: start.elapsed(),
            identity_err,
            max_obs_per_question: counts.into_iter().max().unwrap_or(0),
        }
    })
}

fn mean_auc(exp: &Experiment, variant: usize) -> f64 {
    exp.per_seed.iter().map(|r| r.auc[variant]).sum::<f64>() / exp.per_seed.len() as f64
}

const BUDGET: Duration = Duration::from_secs(20 * 60);

#[test]
fn criterion_4_regularizer_beats_base_on_sparse_data() {
    let exp = experiment();
    let (base, reg) = (mean_auc(exp, 0), mean_auc(exp, 1));
    verdict(
        4,
        "qdkt-reg mean AUC exceeds qdkt-base by at least 0.01",
        reg - base >= 0.01 && exp.max_obs_per_question <= 10 && exp.elapsed < BUDGET,
        &format!(
            "reg {reg:.4} vs base {base:.4}, gap {:.4}; max answers per question {}; experiment {:.0}s",
            reg - base,
            exp.max_obs_per_question,
            exp.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_pretraining_helps() {
    let exp = experiment();
    let lower = exp
        .per_seed
        .iter()
        .filter(|r| r.first_epoch_loss[2] < r.first_epoch_loss[0])
        .count();
    let (reg, full) = (mean_auc(exp, 1), mean_auc(exp, 3));
    verdict(
        5,
        "pretrained init lowers epoch-1 loss in >= 4/5 seeds; qdkt-full >= qdkt-reg - 0.005",
        lower >= 4 && full >= reg - 0.005 && exp.elapsed < BUDGET,
        &format!("lower epoch-1 loss in {lower}/5 seeds; full {full:.4} vs reg {reg:.4}"),
    );
}

#[test]
fn criterion_6_embedding_geometry() {
    let exp = experiment();
    let wins = exp
        .per_seed
        .iter()
        .filter(|r| r.separation[2] > r.separation[0])
        .count();
    verdict(
        6,
        "pretrained W_xv separates correct/incorrect columns better in >= 4/5 seeds; column identity at init",
        wins >= 4 && exp.identity_err < 1e-12,
        &format!("pretrained ahead in {wins}/5 seeds; identity max err {:.2e}", exp.identity_err),
    );
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qdkt")
}

fn run_cli(args: &[String]) {
    let out = Command::new(bin()).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

type Files = Vec<(String, Vec<u8>)>;

fn dir_files(dir: &Path) -> Files {
    let mut files: Files = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Runs the whole pipeline once under `base`. Every run uses the same `base`
/// so that the echoed input paths agree.
fn pipeline(base: &Path, threads: usize, csv: &Path) -> Vec<PathBuf> {
    let d = |name: &str| base.join(name);
    let s = |p: PathBuf| p.to_str().unwrap().to_string();
    let t = threads.to_string();
    let mut cmds: Vec<(Vec<&str>, &str)> = vec![
        (vec!["synth", "--learners", "60", "--questions", "40", "--skills", "6", "--obs-per-learner", "15"], "synth"),
        (vec!["ingest", "--dedup"], "ingest"),
        (vec!["pretrain", "--dim", "8", "--sg-epochs", "2"], "pretrain"),
        (
            vec!["train", "--variant", "qdkt-full", "--hidden", "6", "--epochs", "2", "--batch-size", "4", "--fold", "0"],
            "train",
        ),
        (
            vec![
                "eval", "--variant", "qdkt-full", "--embed-dim", "8", "--hidden", "6", "--epochs", "2", "--lambda-grid",
                "0,0.01", "--k", "3",
            ],
            "eval",
        ),
        (vec!["project", "--components", "3"], "project"),
    ];
    let mut outs = Vec::new();
    for (args, name) in cmds.drain(..) {
        let mut full: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        match name {
            "ingest" => full.extend(["--input".into(), csv.to_str().unwrap().into()]),
            "pretrain" | "eval" => full.extend(["--data".into(), s(d("synth"))]),
            "train" => full.extend([
                "--data".into(),
                s(d("synth")),
                "--graph".into(),
                s(d("synth").join("graph.edges")),
                "--embeddings".into(),
                s(d("pretrain").join("embeddings.txt")),
            ]),
            "project" => full.extend(["--checkpoint".into(), s(d("train").join("checkpoint.txt"))]),
            _ => {}
        }
        full.extend(["--seed".into(), "3".into(), "--threads".into(), t.clone(), "--out".into(), s(d(name))]);
        run_cli(&full);
        outs.push(d(name));
    }
    outs
}

#[test]
fn criterion_7_cli_determinism() {
    let root = tempfile::tempdir().unwrap();
    let csv = root.path().join("in.csv");
    std::fs::write(
        &csv,
        "user_id,problem_id,skill_id,order_id,correct\n\
         a,p1,s1,1,1\na,p2,s1,2,0\na,p2,s1,2,0\nb,p1,s1,3,0\nb,p3,s2,1,1\nb,p2,s1;s2,2,1\n",
    )
    .unwrap();
    let work = root.path().join("work");
    let mut runs = Vec::new();
    for threads in [1, 3, 1] {
        let dirs = pipeline(&work, threads, &csv);
        let snapshot: Vec<(String, Files)> = dirs
            .iter()
            .map(|d| (d.file_name().unwrap().to_string_lossy().into_owned(), dir_files(d)))
            .collect();
        std::fs::remove_dir_all(&work).unwrap();
        runs.push(snapshot);
    }
    let files: usize = runs[0].iter().map(|(_, f)| f.len()).sum();
    let mut mismatches = Vec::new();
    for other in &runs[1..] {
        for ((name, reference), (_, files)) in runs[0].iter().zip(other) {
            if files != reference {
                mismatches.push(name.clone());
            }
        }
    }
    verdict(
        7,
        "repeated CLI commands give bit-identical files at any thread count",
        mismatches.is_empty(),
        &format!(
            "6 commands x 3 runs (threads 1, 3, 1), {files} files per run; mismatches: {}",
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join(", ") }
        ),
    );
}

/// Needs the ASSISTments 2017 interaction CSV at `QDKT_ASSIST2017_CSV`;
/// hours-scale, so it only runs on request:
/// `cargo test --release --test acceptance -- --ignored criterion_8`.
#[test]
#[ignore]
fn criterion_8_real_data_reference() {
    let Ok(path) = std::env::var("QDKT_ASSIST2017_CSV") else {
        let _ = std::io::stdout().write_all(b"criterion 8 SKIPPED: QDKT_ASSIST2017_CSV not set\n");
        return;
    };
    let schema = CsvSchema {
        learner: std::env::var("QDKT_LEARNER_COL").unwrap_or_else(|_| "studentId".into()),
        question: std::env::var("QDKT_QUESTION_COL").unwrap_or_else(|_| "problemId".into()),
        skill: Some(std::env::var("QDKT_SKILL_COL").unwrap_or_else(|_| "skill".into())),
        order: Some(std::env::var("QDKT_ORDER_COL").unwrap_or_else(|_| "startTime".into())),
        assessment: std::env::var("QDKT_ASSESSMENT_COL").unwrap_or_else(|_| "correct".into()),
        ..CsvSchema::default()
    };
    let (raw, _) = ingest_csv(Path::new(&path), &schema).unwrap();
    let ds = qdkt::data::preprocess(
        &raw,
        qdkt::data::PreprocessOptions {
            dedup: true,
            drop_unskilled: false,
            min_seq_len: 2,
        },
    )
    .unwrap();
    let report = cross_validate(&ds, &CvConfig::default(), Variant::QdktFasttext, 0, None).unwrap();
    let target = 0.772;
    verdict(
        8,
        "qdkt-fasttext on ASSISTments 2017 within 0.03 of 0.772",
        (report.mean - target).abs() <= 0.03,
        &format!("mean {:.4} ± {:.4}", report.mean, report.std),
    );
}
