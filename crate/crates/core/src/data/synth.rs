//! Synthetic learners with known ground truth.
//!
//! Each learner has a latent ability plus a per-skill offset; mastery of a
//! skill grows with practice. Each question has a fixed difficulty offset
//! around its skill's difficulty. A response is correct with probability
//! `sigmoid(mastery - skill_difficulty - question_difficulty)`, averaged over
//! the question's skills. Learners work in blocks of consecutive questions
//! from one skill, which is what gives the interaction corpus its
//! co-occurrence structure.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Interaction, LearnerSequence, Vocab};
use crate::error::{Error, Result};
use crate::matrix::sigmoid;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasteryModel {
    pub ability_sd: f64,
    pub skill_offset_sd: f64,
    pub skill_difficulty_sd: f64,
    /// Mastery gained per practice attempt on a skill.
    pub learning_gain: f64,
    /// Attempts after which practice stops adding mastery.
    pub max_practice: usize,
}

impl Default for MasteryModel {
    fn default() -> Self {
        MasteryModel {
            ability_sd: 1.0,
            skill_offset_sd: 0.7,
            skill_difficulty_sd: 1.0,
            learning_gain: 0.15,
            max_practice: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub num_learners: usize,
    pub num_questions: usize,
    pub num_skills: usize,
    pub obs_per_learner: usize,
    pub question_difficulty_spread: f64,
    pub mastery: MasteryModel,
    /// Consecutive questions drawn from one skill before switching.
    pub block_len: usize,
    /// Probability that a question carries a second skill.
    pub multi_skill_prob: f64,
    /// Upper bound on how often any one question is answered in total.
    pub max_obs_per_question: Option<usize>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_learners: 100,
            num_questions: 200,
            num_skills: 10,
            obs_per_learner: 30,
            question_difficulty_spread: 1.0,
            mastery: MasteryModel::default(),
            block_len: 4,
            multi_skill_prob: 0.0,
            max_obs_per_question: None,
            seed: 0,
        }
    }
}

/// Generator parameters that produced a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub question_difficulty: Vec<f64>,
    pub skill_difficulty: Vec<f64>,
    pub learner_ability: Vec<f64>,
    /// `[learner][skill]`
    pub learner_skill_offset: Vec<Vec<f64>>,
    pub mastery: MasteryModel,
}

impl SynthTruth {
    /// Mastery of `skill` for `learner` after `practice` prior attempts.
    pub fn mastery(&self, learner: usize, skill: usize, practice: usize) -> f64 {
        self.learner_ability[learner]
            + self.learner_skill_offset[learner][skill]
            + self.mastery.learning_gain * practice.min(self.mastery.max_practice) as f64
    }

    /// Probability of a correct answer to `question` given per-skill
    /// practice counts.
    pub fn success_probability(
        &self,
        learner: usize,
        question: usize,
        skills: &BTreeSet<usize>,
        practice: &[usize],
    ) -> f64 {
        let logit = if skills.is_empty() {
            self.learner_ability[learner]
        } else {
            skills
                .iter()
                .map(|&s| self.mastery(learner, s, practice[s]) - self.skill_difficulty[s])
                .sum::<f64>()
                / skills.len() as f64
        };
        sigmoid(logit - self.question_difficulty[question])
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub truth: SynthTruth,
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd.max(0.0)).expect("finite standard deviation")
}

pub fn synth_generate(cfg: &SynthConfig) -> Result<Synthetic> {
    if cfg.num_learners == 0
        || cfg.num_questions == 0
        || cfg.num_skills == 0
        || cfg.obs_per_learner == 0
        || cfg.block_len == 0
    {
        return Err(Error::invalid("synthetic counts must all be positive"));
    }
    if cfg.num_skills > cfg.num_questions {
        return Err(Error::invalid("more skills than questions"));
    }
    let cap = cfg.max_obs_per_question.unwrap_or(usize::MAX);
    if cfg.num_questions.saturating_mul(cap) < cfg.num_learners * cfg.obs_per_learner {
        return Err(Error::invalid("max_obs_per_question leaves too few slots"));
    }
    let m = &cfg.mastery;
    let mut rng = seed::rng(cfg.seed);

    let mut order: Vec<usize> = (0..cfg.num_questions).collect();
    order.shuffle(&mut rng);
    let mut question_skills = vec![BTreeSet::new(); cfg.num_questions];
    for (i, &q) in order.iter().enumerate() {
        question_skills[q].insert(i % cfg.num_skills);
    }
    if cfg.multi_skill_prob > 0.0 && cfg.num_skills > 1 {
        for skills in question_skills.iter_mut() {
            if rng.random::<f64>() < cfg.multi_skill_prob {
                skills.insert(rng.random_range(0..cfg.num_skills));
            }
        }
    }
    let mut skill_questions = vec![Vec::new(); cfg.num_skills];
    for (q, skills) in question_skills.iter().enumerate() {
        for &s in skills {
            skill_questions[s].push(q);
        }
    }

    let skill_difficulty: Vec<f64> = (0..cfg.num_skills)
        .map(|_| normal(m.skill_difficulty_sd).sample(&mut rng))
        .collect();
    let question_difficulty: Vec<f64> = (0..cfg.num_questions)
        .map(|_| normal(cfg.question_difficulty_spread).sample(&mut rng))
        .collect();
    let learner_ability: Vec<f64> = (0..cfg.num_learners)
        .map(|_| normal(m.ability_sd).sample(&mut rng))
        .collect();
    let learner_skill_offset: Vec<Vec<f64>> = (0..cfg.num_learners)
        .map(|_| {
            (0..cfg.num_skills)
                .map(|_| normal(m.skill_offset_sd).sample(&mut rng))
                .collect()
        })
        .collect();
    let truth = SynthTruth {
        question_difficulty,
        skill_difficulty,
        learner_ability,
        learner_skill_offset,
        mastery: *m,
    };

    let width = (cfg.num_learners.max(2) - 1).to_string().len();
    let mut sequences = Vec::with_capacity(cfg.num_learners);
    let mut used = vec![0usize; cfg.num_questions];
    for learner in 0..cfg.num_learners {
        let mut practice = vec![0usize; cfg.num_skills];
        let mut interactions = Vec::with_capacity(cfg.obs_per_learner);
        while interactions.len() < cfg.obs_per_learner {
            let open: Vec<usize> = (0..cfg.num_skills)
                .filter(|&s| skill_questions[s].iter().any(|&q| used[q] < cap))
                .collect();
            let skill = *open.choose(&mut rng).expect("capacity checked above");
            for _ in 0..cfg.block_len {
                if interactions.len() == cfg.obs_per_learner {
                    break;
                }
                let free: Vec<usize> = skill_questions[skill]
                    .iter()
                    .copied()
                    .filter(|&q| used[q] < cap)
                    .collect();
                let Some(&q) = free.choose(&mut rng) else {
                    break;
                };
                used[q] += 1;
                let p = truth.success_probability(learner, q, &question_skills[q], &practice);
                let assessment = u8::from(rng.random::<f64>() < p);
                for &s in &question_skills[q] {
                    practice[s] += 1;
                }
                interactions.push(Interaction {
                    question: q,
                    assessment,
                    order_key: interactions.len() as i64,
                });
            }
        }
        sequences.push(LearnerSequence {
            learner_id: format!("u{learner:0width$}"),
            interactions,
        });
    }

    let dataset = Dataset {
        sequences,
        questions: Vocab::from_ids((0..cfg.num_questions).map(|q| format!("q{q}")))?,
        skills: Vocab::from_ids((0..cfg.num_skills).map(|s| format!("s{s}")))?,
        question_skills,
    };
    Ok(Synthetic { dataset, truth })
}
