//! Five-fold cross-validation of the regularized model with a small penalty
//! sweep on an inner validation split; prints the JSON report.

use qdkt::data::{synth_generate, SynthConfig};
use qdkt::eval::{cross_validate, CvConfig, Variant};
use qdkt::net::{AdamConfig, TrainConfig};

fn main() -> qdkt::Result<()> {
    let ds = synth_generate(&SynthConfig {
        num_learners: 120,
        num_questions: 40,
        num_skills: 4,
        obs_per_learner: 30,
        seed: 5,
        ..SynthConfig::default()
    })?
    .dataset;
    let cfg = CvConfig {
        train: TrainConfig {
            embed_dim: 8,
            hidden: 8,
            epochs: 6,
            batch_size: 16,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        },
        lambda_grid: vec![0.0, 0.001, 0.01],
        ..CvConfig::default()
    };
    let report = cross_validate(&ds, &cfg, Variant::QdktReg, 5, None)?;
    for f in &report.folds {
        println!("fold {} auc {:.4} lambda {}", f.fold, f.auc, f.lambda);
    }
    println!("mean {:.4} std {:.4}", report.mean, report.std);
    println!("{}", report.to_json()?);
    Ok(())
}
