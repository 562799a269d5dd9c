//! Projects input embeddings onto their principal directions and measures
//! how far apart the correct and incorrect columns sit, for a random and a
//! pretrained initialization.

use qdkt::data::{synth_generate, SynthConfig};
use qdkt::eval::{pca_project, pretrained_init, separation_score};
use qdkt::embed::{random_init, SkipGramConfig};

fn main() -> qdkt::Result<()> {
    let ds = synth_generate(&SynthConfig {
        num_learners: 150,
        num_questions: 40,
        num_skills: 4,
        obs_per_learner: 30,
        seed: 6,
        ..SynthConfig::default()
    })?
    .dataset;
    let n = ds.num_questions();
    let dim = 16;
    let sequences: Vec<Vec<(usize, u8)>> = ds.sequences.iter().map(|s| s.steps()).collect();
    let pretrained = pretrained_init(
        &sequences,
        n,
        &SkipGramConfig {
            dim,
            epochs: 5,
            seed: 6,
            ..SkipGramConfig::default()
        },
    )?;
    let random = random_init(dim, 2 * n, 6);

    for (name, w) in [("random", &random), ("pretrained", &pretrained)] {
        let proj = pca_project(w, 2)?;
        let sep = separation_score(&proj.points, &proj.labels)?;
        println!(
            "{name:>10}: explained {:?}, separation {:.3}",
            proj.explained_ratio.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            sep.score
        );
    }
    Ok(())
}
