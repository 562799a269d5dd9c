use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use super::{question_token, InteractionToken};
use crate::data::encode_interaction;
use crate::error::{Error, Result};
use crate::matrix::{axpy, Matrix};
use crate::seed;

/// Subword unit name → vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, unit: &str) -> Option<&[f64]> {
        self.vectors.get(unit).map(Vec::as_slice)
    }

    pub fn remove(&mut self, unit: &str) -> Option<Vec<f64>> {
        self.vectors.remove(unit)
    }

    pub fn units(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn insert(&mut self, unit: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.vectors.insert(unit.into(), vector);
        Ok(())
    }

    /// Adds a zero vector for every question token in `0..n` that has none.
    /// Returns how many were added.
    pub fn fill_missing_questions(&mut self, n: usize) -> usize {
        let mut added = 0;
        for q in 0..n {
            let unit = question_token(q);
            if !self.vectors.contains_key(&unit) {
                self.vectors.insert(unit, vec![0.0; self.dim]);
                added += 1;
            }
        }
        added
    }

    /// Text format: `count dim` header, then `unit v1 ... vK` per line with
    /// 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.vectors.len() * (self.dim * 24 + 16));
        let _ = writeln!(out, "{} {}", self.vectors.len(), self.dim);
        for (unit, v) in &self.vectors {
            out.push_str(unit);
            for x in v {
                let _ = write!(out, " {x:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, "missing header"))?;
        let (count, dim) = header
            .split_once(' ')
            .and_then(|(c, d)| Some((c.parse::<usize>().ok()?, d.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::parse(origin, "header must be `count dim`"))?;
        let mut table = EmbeddingTable::new(dim);
        for (n, line) in lines.enumerate() {
            let bad = |m: &str| Error::parse(origin, format!("line {}: {m}", n + 2));
            let mut fields = line.split(' ');
            let unit = fields.next().filter(|u| !u.is_empty()).ok_or_else(|| bad("empty unit"))?;
            let v = fields
                .map(|f| f.parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != dim {
                return Err(bad("wrong vector length"));
            }
            table.vectors.insert(unit.to_string(), v);
        }
        if table.len() != count {
            return Err(Error::parse(
                origin,
                format!("header says {count} units, found {}", table.len()),
            ));
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

/// Builds the `K × 2N` input embedding matrix: column `encode(q, a)` is
/// `vec(f(q)) + vec(a) + vec(f(q)␟a)`, the last term omitted when the whole
/// token was never observed.
pub fn build_wxv(table: &EmbeddingTable, n: usize, k: usize) -> Result<Matrix> {
    if table.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: table.dim(),
        });
    }
    let lookup = |unit: &str| table.get(unit).ok_or_else(|| Error::MissingEmbedding(unit.to_string()));
    let assessment = [lookup("0")?, lookup("1")?];
    let mut w = Matrix::zeros(k, 2 * n);
    let mut col = vec![0.0; k];
    for q in 0..n {
        let question = lookup(&question_token(q))?;
        for a in 0..=1u8 {
            col.copy_from_slice(question);
            axpy(1.0, assessment[usize::from(a)], &mut col);
            if let Some(whole) = table.get(&InteractionToken::new(q, a).to_string()) {
                axpy(1.0, whole, &mut col);
            }
            let c = encode_interaction(q, a, n)?;
            for (r, &v) in col.iter().enumerate() {
                w.set(r, c, v);
            }
        }
    }
    Ok(w)
}

/// I.i.d. standard normal `rows × cols` matrix.
pub fn random_init(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seed::rng(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        t.insert("0", vec![1.0, 0.0]).unwrap();
        t.insert("1", vec![0.0, 1.0]).unwrap();
        t.insert("q0", vec![0.5, 0.5]).unwrap();
        t.insert("q1", vec![-0.5, 0.25]).unwrap();
        t.insert("q0␟0", vec![0.1, 0.2]).unwrap();
        t
    }

    #[test]
    fn columns_follow_subword_sums() {
        let w = build_wxv(&table(), 2, 2).unwrap();
        assert_eq!(w.shape(), (2, 4));
        assert_eq!(w.column(0), vec![1.6, 0.7]);
        assert_eq!(w.column(2), vec![0.5, 1.5]);
        assert_eq!(w.column(3), vec![-0.5, 1.25]);
    }

    #[test]
    fn missing_question_is_named() {
        let mut t = table();
        t.vectors.remove("q1");
        match build_wxv(&t, 2, 2) {
            Err(Error::MissingEmbedding(u)) => assert_eq!(u, "q1"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(t.fill_missing_questions(2), 1);
        assert!(build_wxv(&t, 2, 2).is_ok());
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let mut t = EmbeddingTable::new(3);
        t.insert("q12␟1", vec![0.1, -1.0 / 3.0, 1e-300]).unwrap();
        t.insert("1", vec![std::f64::consts::PI, 2.0f64.sqrt(), -0.0]).unwrap();
        let back = EmbeddingTable::from_text(&t.to_text(), Path::new("mem")).unwrap();
        for unit in t.units() {
            let a: Vec<u64> = t.get(unit).unwrap().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.get(unit).unwrap().iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_init_is_seeded() {
        assert_eq!(random_init(3, 4, 9), random_init(3, 4, 9));
        assert_ne!(random_init(3, 4, 9), random_init(3, 4, 10));
    }

    #[test]
    fn random_init_moments() {
        let (k, cols) = (50, 400);
        let m = random_init(k, cols, 1);
        let n = (k * cols) as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }
}
