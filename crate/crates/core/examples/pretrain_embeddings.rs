//! Pretrains subword skip-gram vectors on interaction tokens and turns them
//! into an initial input embedding matrix.

use qdkt::data::{synth_generate, SynthConfig};
use qdkt::embed::{build_wxv, encode_corpus, train_skipgram, InteractionToken, SkipGramConfig};

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn main() -> qdkt::Result<()> {
    let ds = synth_generate(&SynthConfig {
        num_learners: 150,
        num_questions: 40,
        num_skills: 4,
        obs_per_learner: 30,
        seed: 3,
        ..SynthConfig::default()
    })?
    .dataset;
    let corpus = encode_corpus(&ds);
    println!("{} sentences, {} tokens", corpus.sentences.len(), corpus.num_tokens());
    println!("first tokens: {:?}", &corpus.to_strings()[0][..4]);

    let cfg = SkipGramConfig {
        dim: 16,
        epochs: 5,
        seed: 3,
        ..SkipGramConfig::default()
    };
    let model = train_skipgram(&corpus, &cfg)?;
    // a corpus this small reaches its loss floor within a couple of epochs
    for (e, l) in model.epoch_losses().iter().enumerate() {
        println!("epoch {} loss {l:.4}", e + 1);
    }

    let right = model.center_vector(&InteractionToken::new(0, 1))?;
    let wrong = model.center_vector(&InteractionToken::new(0, 0))?;
    println!("cos(q0 correct, q0 incorrect) = {:.3}", cosine(&right, &wrong));

    let mut table = model.table();
    let filled = table.fill_missing_questions(ds.num_questions());
    let w = build_wxv(&table, ds.num_questions(), cfg.dim)?;
    println!("{} units in the table ({filled} filled), W_xv is {:?}", table.len(), w.shape());
    Ok(())
}
