use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use qdkt::data::Dataset;
use qdkt::embed::{encode_corpus, EmbeddingTable};

fn qdkt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdkt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = qdkt(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    ok(&[
        "synth", "--learners", "40", "--questions", "30", "--skills", "5", "--obs-per-learner", "12",
        "--seed", "1", "--out", p(&out),
    ]);
    out
}

const CSV: &str = "user_id,problem_id,skill_id,order_id,correct,original\n\
u1,a,s1,1,1,1\n\
u1,b,s1;s2,2,0,1\n\
u1,b,s1;s2,2,0,1\n\
u2,a,s1,5,0,1\n\
u2,c,,3,1,0\n\
u2,b,s2,4,1,1\n";

#[test]
fn ingest_writes_dump_and_reports_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    std::fs::write(&csv, CSV).unwrap();
    let out = dir.path().join("dump");
    let stdout = ok(&["ingest", "--input", p(&csv), "--dedup", "--out", p(&out)]);
    assert!(stdout.contains("duplicates_removed 1"), "{stdout}");
    for f in ["interactions.txt", "questions.vocab", "skills.vocab", "graph.edges", "config.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let ds = Dataset::read_dump(&out).unwrap();
    assert_eq!(ds.num_learners(), 2);
    assert_eq!(ds.num_interactions(), 5);
    assert_eq!(ds.sequences[1].steps()[0], (2, 1));

    let filtered = dir.path().join("filtered");
    let stdout = ok(&[
        "ingest", "--input", p(&csv), "--exclude-col", "original", "--exclude-values", "0", "--out",
        p(&filtered),
    ]);
    assert!(stdout.contains("excluded_rows 1"), "{stdout}");
}

#[test]
fn ingest_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = qdkt(&["ingest", "--input", p(&missing), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "user_id,problem_id,skill_id,order_id,correct\nu1,a,s,1,1\nu1,b,s,2,2\n").unwrap();
    let out = qdkt(&["ingest", "--input", p(&bad), "--out", p(&dir.path().join("o2"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = qdkt(&["ingest", "--input", p(&bad), "--question-col", "item", "--out", p(&dir.path().join("o3"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("item"));
}

#[test]
fn synth_is_deterministic_and_validates_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a");
    let b = synth(dir.path(), "b");
    for f in ["interactions.txt", "questions.vocab", "skills.vocab", "graph.edges", "config.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let out = qdkt(&["synth", "--learners", "0", "--out", p(&dir.path().join("z"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pretrained_table_covers_every_observed_token() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d");
    let out = dir.path().join("emb");
    ok(&["pretrain", "--data", p(&data), "--dim", "6", "--sg-epochs", "2", "--out", p(&out)]);
    let table = EmbeddingTable::load(&out.join("embeddings.txt")).unwrap();
    let corpus = encode_corpus(&Dataset::read_dump(&data).unwrap());
    for token in corpus.sentences.iter().flatten() {
        for unit in token.subwords() {
            assert!(table.get(&unit).is_some(), "{unit}");
        }
    }
    assert_eq!(std::fs::read_to_string(out.join("pretrain.log")).unwrap().lines().count(), 2);

    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    for f in ["interactions.txt", "questions.vocab", "skills.vocab"] {
        std::fs::write(empty.join(f), "").unwrap();
    }
    let res = qdkt(&["pretrain", "--data", p(&empty), "--out", p(&dir.path().join("e"))]);
    assert!(!res.status.success());
}

#[test]
fn train_requirements_log_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d");
    let graph = data.join("graph.edges");
    for (extra, name) in [(vec![], "neither"), (vec!["--graph", p(&graph)], "graph only")] {
        let mut args = vec!["train", "--data", p(&data), "--variant", "qdkt-full", "--out", "x"];
        args.extend(extra);
        let out = qdkt(&args);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--embeddings"));
    }

    let emb = dir.path().join("emb");
    ok(&["pretrain", "--data", p(&data), "--dim", "6", "--sg-epochs", "1", "--out", p(&emb)]);
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "train", "--data", p(&data), "--variant", "qdkt-full", "--graph", p(&graph), "--embeddings",
            p(&emb.join("embeddings.txt")), "--hidden", "5", "--epochs", "3", "--fold", "1", "--seed", "4",
            "--out", p(&out),
        ]);
        out
    };
    let (a, b) = (run("t1"), run("t2"));
    let log = std::fs::read_to_string(a.join("loss.log")).unwrap();
    assert_eq!(log.lines().count(), 3);
    assert!(log.lines().all(|l| l.split_whitespace().count() == 4));
    assert_eq!(std::fs::read(a.join("checkpoint.txt")).unwrap(), std::fs::read(b.join("checkpoint.txt")).unwrap());
    let config = std::fs::read_to_string(a.join("config.txt")).unwrap();
    assert!(config.contains("embed_dim=6") && config.contains("variant=qdkt-full"));
}

#[test]
fn eval_writes_a_five_fold_report_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d");
    let out = dir.path().join("r");
    let start = Instant::now();
    ok(&[
        "eval", "--data", p(&data), "--variant", "qdkt-reg", "--embed-dim", "6", "--hidden", "6",
        "--epochs", "2", "--lambda", "0.01", "--out", p(&out),
    ]);
    assert!(start.elapsed().as_secs() < 60);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["k"], 5);
    assert_eq!(json["fold_aucs"].as_array().unwrap().len(), 5);
    assert_eq!(json["variant"], "qdkt-reg");
    assert!(json["mean"].is_f64() && json["std"].is_f64());
    assert!(json["config_fingerprint"].is_string());
}

#[test]
fn project_exports_every_column_for_both_init_modes() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d");
    let emb = dir.path().join("emb");
    ok(&["pretrain", "--data", p(&data), "--dim", "6", "--sg-epochs", "1", "--out", p(&emb)]);
    let emb_file = emb.join("embeddings.txt");
    for (variant, extra) in [("qdkt-base", vec![]), ("qdkt-fasttext", vec!["--embeddings", p(&emb_file)])] {
        let model = dir.path().join(variant);
        let mut args = vec![
            "train", "--data", p(&data), "--variant", variant, "--embed-dim", "6", "--hidden", "4",
            "--epochs", "1", "--out", p(&model),
        ];
        args.extend(extra);
        ok(&args);
        let proj = dir.path().join(format!("{variant}-pca"));
        let stdout = ok(&[
            "project", "--checkpoint", p(&model.join("checkpoint.txt")), "--components", "3", "--out", p(&proj),
        ]);
        assert!(stdout.contains("separation_score "), "{stdout}");
        let csv = std::fs::read_to_string(proj.join("projection.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "col_index,question_index,assessment,pc1,pc2,pc3");
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 60);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r[0], i.to_string());
            assert_eq!(r[1], (i % 30).to_string());
            assert_eq!(r[2], if i >= 30 { "1" } else { "0" });
        }
    }
}

#[test]
fn config_files_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# sweep\nlearners = 12\nquestions=9\nskills=3\nseed=5\n").unwrap();
    let out = dir.path().join("o");
    let stdout = ok(&["synth", "--config", p(&cfg), "--learners", "7", "--out", p(&out)]);
    assert!(stdout.contains("learners 7") && stdout.contains("questions 9"));
    let echoed = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echoed.contains("learners=7") && echoed.contains("seed=5"));
    assert!(!echoed.contains("out=") && !echoed.contains("threads="));

    std::fs::write(&cfg, "lerners=12\n").unwrap();
    let res = qdkt(&["synth", "--config", p(&cfg), "--out", p(&dir.path().join("o2"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("lerners"));
}

#[test]
fn every_subcommand_documents_its_flags() {
    for sub in ["ingest", "synth", "pretrain", "train", "eval", "project"] {
        let out = ok(&[sub, "--help"]);
        for flag in ["--config", "--out", "--threads", "--seed"] {
            assert!(out.contains(flag), "{sub} {flag}");
        }
        assert!(out.contains("default"), "{sub}");
    }
    let train = ok(&["train", "--help"]);
    for flag in ["--lambda", "--dropout", "--grad-clip", "--max-len", "--batch-size", "--fold"] {
        assert!(train.contains(flag), "{flag}");
    }
    assert_eq!(qdkt(&["frobnicate"]).status.code(), Some(2));
}
