//! Text checkpoint container.
//!
//! ```text
//! qdkt-checkpoint 1
//! meta <key> <value>
//! ...
//! tensor <name> <rows> <cols>
//! <row values, space separated>
//! ...
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::params::{Dims, ParamSet, PARAM_NAMES};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const MAGIC: &str = "qdkt-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ParamSet,
    /// Free-form provenance: config, seed, variant, level.
    pub meta: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn new(params: ParamSet) -> Self {
        Checkpoint {
            params,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {k} {v}");
        }
        for (name, t) in PARAM_NAMES.iter().zip(self.params.tensors()) {
            let _ = writeln!(out, "tensor {name} {} {}", t.rows(), t.cols());
            for r in 0..t.rows() {
                let row: Vec<String> = t.row(r).iter().map(f64::to_string).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        let err = |line: usize, m: &str| Error::parse(origin, format!("line {}: {m}", line + 1));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(Error::parse(origin, "not a qdkt checkpoint")),
        }
        let mut meta = BTreeMap::new();
        while let Some((n, line)) = lines.next_if(|(_, l)| l.starts_with("meta ")) {
            let rest = &line[5..];
            let (k, v) = rest.split_once(' ').ok_or_else(|| err(n, "meta needs key and value"))?;
            meta.insert(k.to_string(), v.to_string());
        }
        let mut tensors = BTreeMap::new();
        while let Some((n, line)) = lines.next() {
            let fields: Vec<&str> = line.split(' ').collect();
            let ["tensor", name, rows, cols] = fields.as_slice() else {
                return Err(err(n, "expected a tensor header"));
            };
            let rows: usize = rows.parse().map_err(|_| err(n, "bad row count"))?;
            let cols: usize = cols.parse().map_err(|_| err(n, "bad column count"))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, line) = lines.next().ok_or_else(|| err(n, "truncated tensor"))?;
                let before = data.len();
                for v in line.split(' ').filter(|v| !v.is_empty()) {
                    data.push(v.parse::<f64>().map_err(|_| err(n, "bad number"))?);
                }
                if data.len() - before != cols {
                    return Err(err(n, "wrong row length"));
                }
            }
            tensors.insert(name.to_string(), Matrix::from_vec(rows, cols, data));
        }

        let mut take = |name: &str| {
            tensors
                .remove(name)
                .ok_or_else(|| Error::parse(origin, format!("missing tensor {name}")))
        };
        let w_xv = take("w_xv")?;
        let w_yh = take("w_yh")?;
        let mut params = ParamSet::zeros(Dims {
            k: w_xv.rows(),
            h: w_yh.cols(),
            items: w_yh.rows(),
        });
        params.w_xv = w_xv;
        params.w_yh = w_yh;
        for (name, slot) in PARAM_NAMES.iter().zip(params.tensors_mut()) {
            if *name != "w_xv" && *name != "w_yh" {
                *slot = take(name)?;
            }
        }
        params.check_shapes()?;
        Ok(Checkpoint { params, meta })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn round_trip_is_bitwise() {
        let mut rng = seed::rng(3);
        let dims = Dims { k: 3, h: 2, items: 4 };
        let w_xv = Matrix::from_fn(3, 8, |_, _| rng.random::<f64>() * 1e-5 - 3.0);
        let mut p = ParamSet::init(dims, w_xv, &mut rng).unwrap();
        p.b_y.set(0, 0, -0.0);
        p.b_y.set(1, 0, 1e-310);
        let ck = Checkpoint::new(p).with_meta("seed", 3).with_meta("variant", "qdkt-base");
        let back = Checkpoint::from_text(&ck.to_text(), Path::new("mem")).unwrap();
        assert_eq!(back.meta, ck.meta);
        for (a, b) in back.params.tensors().iter().zip(ck.params.tensors()) {
            let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Checkpoint::from_text("hello", Path::new("x")).is_err());
        assert!(Checkpoint::from_text("qdkt-checkpoint 1\ntensor w_xv 1 2\n1\n", Path::new("x")).is_err());
    }
}
