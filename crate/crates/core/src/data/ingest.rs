use std::collections::BTreeSet;
use std::path::Path;

use super::{Dataset, Interaction, InteractionRecord, LearnerSequence, Vocab};
use crate::error::{Error, Result};

/// Rows whose `column` holds one of `values` are excluded at ingest time
/// (e.g. scaffolding problems flagged by a dataset-specific column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnFilter {
    pub column: String,
    pub values: Vec<String>,
}

/// Maps CSV header names onto the record fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub learner: String,
    pub question: String,
    /// Optional; questions get an empty skill set when absent.
    pub skill: Option<String>,
    /// Optional; row position is used when absent.
    pub order: Option<String>,
    pub assessment: String,
    pub skill_delimiter: char,
    pub exclude: Option<ColumnFilter>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            learner: "user_id".into(),
            question: "problem_id".into(),
            skill: Some("skill_id".into()),
            order: Some("order_id".into()),
            assessment: "correct".into(),
            skill_delimiter: ';',
            exclude: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub rows: usize,
    pub excluded: usize,
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_assessment(raw: &str) -> Option<u8> {
    match raw.trim() {
        "0" | "0.0" => Some(0),
        "1" | "1.0" => Some(1),
        _ => None,
    }
}

/// Reads a CSV interaction log into a [`Dataset`].
///
/// Records are sorted by `(learner_id, order_key)` (stable, so ties keep file
/// order) and questions and skills are indexed by first appearance in that
/// sorted order.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<(Dataset, IngestSummary)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);
    let headers = reader.headers()?.clone();

    let learner_col = column_index(&headers, &schema.learner)?;
    let question_col = column_index(&headers, &schema.question)?;
    let assessment_col = column_index(&headers, &schema.assessment)?;
    let skill_col = schema
        .skill
        .as_deref()
        .map(|s| column_index(&headers, s))
        .transpose()?;
    let order_col = schema
        .order
        .as_deref()
        .map(|s| column_index(&headers, s))
        .transpose()?;
    let exclude = schema
        .exclude
        .as_ref()
        .map(|f| column_index(&headers, &f.column).map(|c| (c, &f.values)))
        .transpose()?;

    let mut summary = IngestSummary::default();
    let mut records = Vec::new();
    for (position, row) in reader.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(position as u64 + 2, |p| p.line());
        summary.rows += 1;
        if let Some((col, values)) = exclude {
            if values.iter().any(|v| v == row[col].trim()) {
                summary.excluded += 1;
                continue;
            }
        }
        let assessment = parse_assessment(&row[assessment_col]).ok_or_else(|| Error::Row {
            line,
            message: format!("assessment `{}` is not 0 or 1", &row[assessment_col]),
        })?;
        let order_key = match order_col {
            Some(c) => row[c].trim().parse::<i64>().map_err(|_| Error::Row {
                line,
                message: format!("order key `{}` is not an integer", &row[c]),
            })?,
            None => position as i64,
        };
        let skill_ids = skill_col
            .map(|c| {
                row[c]
                    .split(schema.skill_delimiter)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default();
        records.push(InteractionRecord {
            learner_id: row[learner_col].trim().to_string(),
            question_id: row[question_col].trim().to_string(),
            skill_ids,
            order_key,
            assessment,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((from_records(records), summary))
}

/// Builds a dataset from raw records.
pub(crate) fn from_records(mut records: Vec<InteractionRecord>) -> Dataset {
    records.sort_by(|a, b| {
        a.learner_id
            .cmp(&b.learner_id)
            .then(a.order_key.cmp(&b.order_key))
    });

    let mut questions = Vocab::new();
    let mut skills = Vocab::new();
    let mut question_skills: Vec<BTreeSet<usize>> = Vec::new();
    let mut sequences: Vec<LearnerSequence> = Vec::new();

    for rec in records {
        let q = questions.intern(&rec.question_id);
        if q == question_skills.len() {
            question_skills.push(BTreeSet::new());
        }
        for s in &rec.skill_ids {
            let s = skills.intern(s);
            question_skills[q].insert(s);
        }
        let interaction = Interaction {
            question: q,
            assessment: rec.assessment,
            order_key: rec.order_key,
        };
        match sequences.last_mut() {
            Some(seq) if seq.learner_id == rec.learner_id => seq.interactions.push(interaction),
            _ => sequences.push(LearnerSequence {
                learner_id: rec.learner_id,
                interactions: vec![interaction],
            }),
        }
    }
    Dataset {
        sequences,
        questions,
        skills,
        question_skills,
    }
}
