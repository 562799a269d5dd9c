//! Reads an interaction log from CSV, cleans it and writes a dataset dump.
//!
//! ```text
//! cargo run --example ingest_csv [path/to/log.csv]
//! ```
//! Without an argument a small inline log is used.

use std::path::PathBuf;

use qdkt::data::{ingest_csv, preprocess, ColumnFilter, CsvSchema, PreprocessOptions};

const SAMPLE: &str = "user_id,problem_id,skill_id,order_id,correct,original\n\
u1,p1,add,1,1,1\n\
u1,p2,add;sub,2,0,1\n\
u1,p2,add;sub,2,0,1\n\
u1,p9,,3,1,0\n\
u2,p1,add,2,0,1\n\
u2,p3,sub,1,1,1\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile_dir();
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = dir.join("sample.csv");
            std::fs::write(&p, SAMPLE)?;
            p
        }
    };
    let schema = CsvSchema {
        // scaffolding rows carry original=0
        exclude: Some(ColumnFilter {
            column: "original".into(),
            values: vec!["0".into()],
        }),
        ..CsvSchema::default()
    };
    let (raw, summary) = ingest_csv(&path, &schema)?;
    println!("read {} rows, excluded {}", summary.rows, summary.excluded);

    let ds = preprocess(
        &raw,
        PreprocessOptions {
            dedup: true,
            drop_unskilled: true,
            min_seq_len: 2,
        },
    )?;
    println!(
        "{} learners, {} questions, {} skills, {} interactions",
        ds.num_learners(),
        ds.num_questions(),
        ds.num_skills(),
        ds.num_interactions()
    );
    for s in &ds.sequences {
        let steps: Vec<String> = s
            .interactions
            .iter()
            .map(|i| format!("{}:{}", ds.questions.id(i.question), i.assessment))
            .collect();
        println!("  {} -> {}", s.learner_id, steps.join(" "));
    }

    let out = dir.join("dump");
    ds.write_dump(&out)?;
    println!("dump written to {}", out.display());
    Ok(())
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("qdkt-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&d).expect("temp dir");
    d
}
