//! Generates a synthetic cohort and checks that the generator's ground truth
//! shows up in the observed answers.

use qdkt::data::{synth_generate, SynthConfig};

fn main() -> qdkt::Result<()> {
    let syn = synth_generate(&SynthConfig {
        num_learners: 200,
        num_questions: 60,
        num_skills: 6,
        obs_per_learner: 30,
        seed: 1,
        ..SynthConfig::default()
    })?;
    let ds = &syn.dataset;
    println!(
        "{} learners, {} questions, {} interactions",
        ds.num_learners(),
        ds.num_questions(),
        ds.num_interactions()
    );

    // accuracy on the easiest and hardest third of the questions
    let mut right = vec![0.0; ds.num_questions()];
    let mut seen = vec![0.0; ds.num_questions()];
    for s in &ds.sequences {
        for i in &s.interactions {
            right[i.question] += f64::from(i.assessment);
            seen[i.question] += 1.0;
        }
    }
    let mut order: Vec<usize> = (0..ds.num_questions()).filter(|&q| seen[q] > 0.0).collect();
    order.sort_by(|&a, &b| syn.truth.question_difficulty[a].total_cmp(&syn.truth.question_difficulty[b]));
    let third = order.len() / 3;
    let acc = |qs: &[usize]| {
        qs.iter().map(|&q| right[q]).sum::<f64>() / qs.iter().map(|&q| seen[q]).sum::<f64>()
    };
    println!("accuracy on easiest third: {:.3}", acc(&order[..third]));
    println!("accuracy on hardest third: {:.3}", acc(&order[order.len() - third..]));

    let first = &ds.sequences[0];
    let preview: Vec<String> = first.steps().iter().take(12).map(|(q, a)| format!("{q}:{a}")).collect();
    println!("learner {}: {} ...", first.learner_id, preview.join(" "));
    Ok(())
}
