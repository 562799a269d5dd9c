//! Canonical on-disk dataset dump.
//!
//! `interactions.txt` holds one `learner question assessment` line per
//! interaction in chronological order; `questions.vocab` holds
//! `index<TAB>id<TAB>skill,skill,...`; `skills.vocab` holds `index<TAB>id`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Dataset, Interaction, LearnerSequence, Vocab};
use crate::error::{Error, Result};

pub const INTERACTIONS_FILE: &str = "interactions.txt";
pub const QUESTIONS_FILE: &str = "questions.vocab";
pub const SKILLS_FILE: &str = "skills.vocab";

impl Dataset {
    pub fn write_dump(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut body = String::with_capacity(self.num_interactions() * 12);
        for (l, seq) in self.sequences.iter().enumerate() {
            for it in &seq.interactions {
                let _ = writeln!(body, "{l} {} {}", it.question, it.assessment);
            }
        }
        write(&dir.join(INTERACTIONS_FILE), &body)?;

        let mut body = String::new();
        for (q, id) in self.questions.ids().iter().enumerate() {
            let skills: Vec<String> = self.question_skills[q].iter().map(usize::to_string).collect();
            let _ = writeln!(body, "{q}\t{id}\t{}", skills.join(","));
        }
        write(&dir.join(QUESTIONS_FILE), &body)?;

        let mut body = String::new();
        for (s, id) in self.skills.ids().iter().enumerate() {
            let _ = writeln!(body, "{s}\t{id}");
        }
        write(&dir.join(SKILLS_FILE), &body)
    }

    pub fn read_dump(dir: &Path) -> Result<Dataset> {
        let skills_path = dir.join(SKILLS_FILE);
        let mut skill_ids = Vec::new();
        for (n, line) in read(&skills_path)?.lines().enumerate() {
            let mut parts = line.splitn(2, '\t');
            check_index(&skills_path, n, parts.next())?;
            skill_ids.push(parts.next().unwrap_or_default().to_string());
        }
        let skills = Vocab::from_ids(skill_ids)?;

        let questions_path = dir.join(QUESTIONS_FILE);
        let mut question_ids = Vec::new();
        let mut question_skills = Vec::new();
        for (n, line) in read(&questions_path)?.lines().enumerate() {
            let mut parts = line.splitn(3, '\t');
            check_index(&questions_path, n, parts.next())?;
            question_ids.push(parts.next().unwrap_or_default().to_string());
            let set = parts
                .next()
                .unwrap_or_default()
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>().map_err(|_| {
                        Error::parse(&questions_path, format!("line {}: bad skill `{s}`", n + 1))
                    })
                })
                .collect::<Result<BTreeSet<usize>>>()?;
            question_skills.push(set);
        }
        let questions = Vocab::from_ids(question_ids)?;

        let path = dir.join(INTERACTIONS_FILE);
        let mut sequences: Vec<LearnerSequence> = Vec::new();
        for (n, line) in read(&path)?.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [l, q, a] => l
                    .parse::<usize>()
                    .ok()
                    .zip(q.parse::<usize>().ok())
                    .zip(a.parse::<u8>().ok()),
                _ => None,
            };
            let ((learner, question), assessment) = parsed
                .ok_or_else(|| Error::parse(&path, format!("line {}: malformed record", n + 1)))?;
            if learner == sequences.len() {
                sequences.push(LearnerSequence {
                    learner_id: learner.to_string(),
                    interactions: Vec::new(),
                });
            } else if learner + 1 != sequences.len() {
                return Err(Error::parse(
                    &path,
                    format!("line {}: learners must be contiguous and ascending", n + 1),
                ));
            }
            let seq = sequences.last_mut().expect("pushed above");
            let order_key = seq.interactions.len() as i64;
            seq.interactions.push(Interaction {
                question,
                assessment,
                order_key,
            });
        }

        let ds = Dataset {
            sequences,
            questions,
            skills,
            question_skills,
        };
        ds.validate()?;
        if ds.sequences.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(ds)
    }
}

fn check_index(path: &Path, line: usize, field: Option<&str>) -> Result<()> {
    match field.and_then(|f| f.parse::<usize>().ok()) {
        Some(i) if i == line => Ok(()),
        _ => Err(Error::parse(path, format!("line {}: expected index {line}", line + 1))),
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
