//! Compares the four question-level variants on a sparse synthetic dataset:
//! held-out AUC, first-epoch training loss and how well the trained input
//! embeddings separate correct from incorrect columns.
//!
//! Settings come from environment variables (`QDKT_SEEDS`, `QDKT_EPOCHS`,
//! `QDKT_LAMBDA`, `QDKT_HIDDEN`, `QDKT_LR`, ...) so the same binary can be
//! used for quick sweeps.
//!
//! ```text
//! cargo run --release --example variant_comparison
//! ```

use std::time::Instant;

use qdkt::data::{split_folds, synth_generate, SynthConfig};
use qdkt::embed::SkipGramConfig;
use qdkt::eval::{pca_project, run_fold, separation_score, CvConfig, Variant};
use qdkt::graph::{build_skill_graph, laplacian};
use qdkt::net::{AdamConfig, TrainConfig};

fn env<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> qdkt::Result<()> {
    let synth = SynthConfig {
        num_learners: env("QDKT_LEARNERS", 500),
        num_questions: env("QDKT_QUESTIONS", 2000),
        num_skills: 40,
        obs_per_learner: env("QDKT_OBS", 36),
        max_obs_per_question: Some(10),
        seed: env("QDKT_DATA_SEED", 2024),
        ..SynthConfig::default()
    };
    let ds = synth_generate(&synth)?.dataset;
    let lap = laplacian(&build_skill_graph(&ds.question_skills, ds.num_questions())?);
    println!(
        "dataset: {} learners, {} questions, {} interactions, {} graph edges",
        ds.num_learners(),
        ds.num_questions(),
        ds.num_interactions(),
        lap.num_edges()
    );

    let dim = env("QDKT_DIM", 32);
    let cfg = CvConfig {
        train: TrainConfig {
            embed_dim: dim,
            hidden: env("QDKT_HIDDEN", 32),
            lambda: env("QDKT_LAMBDA", 0.001),
            dropout: env("QDKT_DROPOUT", 0.2),
            adam: AdamConfig {
                lr: env("QDKT_LR", 0.01),
                ..AdamConfig::default()
            },
            epochs: env("QDKT_EPOCHS", 3),
            batch_size: env("QDKT_BATCH", 32),
            ..TrainConfig::default()
        },
        skipgram: SkipGramConfig {
            dim,
            epochs: env("QDKT_SG_EPOCHS", 5),
            ..SkipGramConfig::default()
        },
        ..CvConfig::default()
    };
    let seeds: u64 = env("QDKT_SEEDS", 5);
    let variants: Vec<Variant> = std::env::var("QDKT_VARIANTS")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.parse().ok()).collect())
        .unwrap_or_else(|| {
            vec![Variant::QdktBase, Variant::QdktReg, Variant::QdktFasttext, Variant::QdktFull]
        });

    let mut sums = vec![0.0; variants.len()];
    for s in 0..seeds {
        let fold = split_folds(&ds, cfg.k, cfg.train_frac, s)?.swap_remove(0);
        let mut line = format!("seed {s}:");
        for (i, &v) in variants.iter().enumerate() {
            let t = Instant::now();
            let out = run_fold(&ds, &cfg, v, &fold, Some(&lap), s)?;
            let proj = pca_project(&out.params.w_xv, 3)?;
            let sep = separation_score(&proj.points, &proj.labels)?;
            sums[i] += out.auc;
            line += &format!(
                " {v} auc {:.4} loss1 {:.4} lossN {:.4} sep {:.3} ({:.0}s);",
                out.auc,
                out.epoch_losses[0],
                out.epoch_losses.last().unwrap(),
                sep.score,
                t.elapsed().as_secs_f64()
            );
        }
        println!("{line}");
    }
    for (v, sum) in variants.iter().zip(sums) {
        println!("mean {v}: {:.4}", sum / seeds as f64);
    }
    Ok(())
}
