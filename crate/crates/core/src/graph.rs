//! Question-similarity graph and its Laplacian `L = D - A`.
//!
//! The smoothness penalty is `yᵀLy = Σ_{edges} w_ij (y_i - y_j)²`, evaluated
//! directly over the edge list in `O(|E|)`. This is half of the ordered
//! double sum `Σ_i Σ_j w_ij (y_i - y_j)²`; the factor is absorbed into the
//! penalty weight.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected weighted graph over `n` questions; each edge stored once
/// with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl QuestionGraph {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Writes `i j w` lines.
    pub fn write_edges(&self, path: &Path) -> Result<()> {
        let mut body = String::with_capacity(self.edges.len() * 12);
        let _ = writeln!(body, "# nodes {}", self.n);
        for (i, j, w) in &self.edges {
            let _ = writeln!(body, "{i} {j} {w}");
        }
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    /// Reads `i j w` lines. `n` defaults to the `# nodes` header if present,
    /// else to one past the largest index.
    pub fn read_edges(path: &Path, n: Option<usize>) -> Result<QuestionGraph> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut header_n = None;
        let mut triples: Vec<(usize, usize, f64)> = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("nodes") {
                    header_n = v.trim().parse().ok();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::parse(path, format!("line {}: expected `i j w`", line_no + 1));
            let [i, j, w] = fields.as_slice() else {
                return Err(bad());
            };
            triples.push((
                i.parse().map_err(|_| bad())?,
                j.parse().map_err(|_| bad())?,
                w.parse().map_err(|_| bad())?,
            ));
        }
        let inferred = triples.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
        let n = n.or(header_n).unwrap_or(inferred);
        build_weighted_graph(&triples, n)
    }
}

/// Unit-weight edge between every pair of distinct questions whose skill
/// sets intersect.
pub fn build_skill_graph(question_skills: &[BTreeSet<usize>], n: usize) -> Result<QuestionGraph> {
    if question_skills.len() > n {
        return Err(Error::IndexOutOfRange {
            what: "question",
            index: question_skills.len() - 1,
            bound: n,
        });
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (q, skills) in question_skills.iter().enumerate() {
        for &s in skills {
            members.entry(s).or_default().push(q);
        }
    }
    let mut pairs = BTreeSet::new();
    for qs in members.values() {
        for (a, &i) in qs.iter().enumerate() {
            for &j in &qs[a + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    Ok(QuestionGraph {
        n,
        edges: pairs.into_iter().map(|(i, j)| (i, j, 1.0)).collect(),
    })
}

/// Graph from arbitrary nonnegative similarity weights. Pairs are
/// canonicalized to `i < j`, duplicates are summed and self-pairs dropped.
pub fn build_weighted_graph(weights: &[(usize, usize, f64)], n: usize) -> Result<QuestionGraph> {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(i, j, w) in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidWeight { i, j, weight: w });
        }
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange {
                    what: "question",
                    index: idx,
                    bound: n,
                });
            }
        }
        if i != j {
            *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
    }
    Ok(QuestionGraph {
        n,
        edges: acc.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
    })
}

/// Sparse graph Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    n: usize,
    degree: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

pub fn laplacian(g: &QuestionGraph) -> Laplacian {
    let mut degree = vec![0.0; g.n];
    for &(i, j, w) in &g.edges {
        degree[i] += w;
        degree[j] += w;
    }
    Laplacian {
        n: g.n,
        degree,
        edges: g.edges.iter().copied().filter(|e| e.2 != 0.0).collect(),
    }
}

impl Laplacian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (i, &d) in self.degree.iter().enumerate() {
            m[i][i] = d;
        }
        for &(i, j, w) in &self.edges {
            m[i][j] -= w;
            m[j][i] -= w;
        }
        m
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// `L·y`
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y.len())?;
        let mut out: Vec<f64> = self.degree.iter().zip(y).map(|(d, v)| d * v).collect();
        for &(i, j, w) in &self.edges {
            out[i] -= w * y[j];
            out[j] -= w * y[i];
        }
        Ok(out)
    }

    /// `yᵀLy`
    pub fn quadratic_form(&self, y: &[f64]) -> Result<f64> {
        self.check(y.len())?;
        Ok(self
            .edges
            .iter()
            .map(|&(i, j, w)| {
                let d = y[i] - y[j];
                w * d * d
            })
            .sum())
    }

    /// `2·L·y`, the gradient of [`Self::quadratic_form`].
    pub fn quadratic_form_grad(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        self.quadratic_form_with_grad(y, 1.0, &mut g)?;
        Ok(g)
    }

    /// Returns `yᵀLy` and adds `scale·2·L·y` into `grad` in one pass.
    pub fn quadratic_form_with_grad(&self, y: &[f64], scale: f64, grad: &mut [f64]) -> Result<f64> {
        self.check(y.len())?;
        self.check(grad.len())?;
        let mut total = 0.0;
        for &(i, j, w) in &self.edges {
            let d = y[i] - y[j];
            total += w * d * d;
            let g = 2.0 * scale * w * d;
            grad[i] += g;
            grad[j] -= g;
        }
        Ok(total)
    }
}
