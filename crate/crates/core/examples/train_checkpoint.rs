//! Trains the regularized model on one split, saves a checkpoint, reloads it
//! and scores the held-out learners.

use qdkt::data::{split_folds, synth_generate, Level, SynthConfig};
use qdkt::eval::{auc, evaluate_fold};
use qdkt::graph::{build_skill_graph, laplacian};
use qdkt::net::{train, Checkpoint, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = synth_generate(&SynthConfig {
        num_learners: 200,
        num_questions: 50,
        num_skills: 5,
        obs_per_learner: 25,
        seed: 4,
        ..SynthConfig::default()
    })?
    .dataset;
    let lap = laplacian(&build_skill_graph(&ds.question_skills, ds.num_questions())?);
    let fold = split_folds(&ds, 5, 0.7, 4)?.swap_remove(0);
    let cfg = TrainConfig {
        embed_dim: 16,
        hidden: 16,
        lambda: 0.001,
        epochs: 4,
        batch_size: 16,
        seed: 4,
        ..TrainConfig::default()
    };
    let trained = train(&ds, Some(&fold), Level::Question, &cfg, Some(&lap), None)?;
    for e in &trained.log {
        println!("epoch {} total {:.4} data {:.4} penalty {:.4}", e.epoch, e.total, e.data, e.penalty);
    }

    let path = std::env::temp_dir().join(format!("qdkt-checkpoint-{}.txt", std::process::id()));
    Checkpoint::new(trained.params).with_meta("variant", "qdkt-reg").save(&path)?;
    let restored = Checkpoint::load(&path)?;
    let (scores, labels) = evaluate_fold(&restored.params, &ds, &fold, Level::Question)?;
    println!("held-out AUC {:.4} over {} predictions", auc(&scores, &labels)?, scores.len());
    std::fs::remove_file(path)?;
    Ok(())
}
