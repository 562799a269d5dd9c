//! PCA of the input-embedding columns and a two-class separability index.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest value [`separation_score`] reports when within-class spread
/// vanishes.
pub const SEPARATION_CAP: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// `columns × n_components`
    pub points: Matrix,
    /// Assessment implied by the column index (`index >= items`).
    pub labels: Vec<u8>,
    /// Item index of each column.
    pub items: Vec<usize>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Principal directions as rows, `n_components × dim`.
    pub components: Matrix,
    pub explained_ratio: Vec<f64>,
    pub mean: Vec<f64>,
    /// Set when all columns coincide; the projection is then all zeros.
    pub degenerate: bool,
}

/// Projects the columns of a `dim × 2·items` embedding matrix onto their
/// top principal directions (exact eigendecomposition of the column
/// covariance, `n - 1` denominator).
pub fn pca_project(w_xv: &Matrix, n_components: usize) -> Result<PcaProjection> {
    let (dim, cols) = w_xv.shape();
    if cols % 2 != 0 {
        return Err(Error::invalid("embedding matrix must have an even column count"));
    }
    if n_components == 0 || n_components > dim.min(cols) {
        return Err(Error::invalid(format!(
            "n_components {n_components} must lie in 1..={}",
            dim.min(cols)
        )));
    }
    let items = cols / 2;
    let mean: Vec<f64> = (0..dim)
        .map(|r| w_xv.row(r).iter().sum::<f64>() / cols as f64)
        .collect();
    let centered = DMatrix::from_fn(cols, dim, |c, r| w_xv.get(r, c) - mean[r]);
    let denom = (cols.max(2) - 1) as f64;
    let cov = centered.transpose() * &centered / denom;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();

    let labels = (0..cols).map(|c| u8::from(c >= items)).collect();
    let item_of = (0..cols).map(|c| c % items).collect();
    let degenerate = total.is_nan() || total <= 0.0;
    if degenerate {
        log::warn!("all embedding columns are identical; PCA projection is zero");
        return Ok(PcaProjection {
            points: Matrix::zeros(cols, n_components),
            labels,
            items: item_of,
            eigenvalues,
            components: Matrix::zeros(n_components, dim),
            explained_ratio: vec![0.0; n_components],
            mean,
            degenerate,
        });
    }

    let components = Matrix::from_fn(n_components, dim, |p, r| eig.eigenvectors[(r, order[p])]);
    let points = Matrix::from_fn(cols, n_components, |c, p| {
        (0..dim).map(|r| centered[(c, r)] * components.get(p, r)).sum()
    });
    let explained_ratio = eigenvalues[..n_components].iter().map(|v| v / total).collect();
    Ok(PcaProjection {
        points,
        labels,
        items: item_of,
        eigenvalues,
        components,
        explained_ratio,
        mean,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub score: f64,
    /// True when the within-class spread is zero but the class means differ.
    pub capped: bool,
}

/// `‖mean₀ - mean₁‖ / s`, where `s` is the pooled within-class standard
/// deviation per coordinate: `s² = Σ_c Σ_{x∈c} ‖x - mean_c‖² / ((n - 2)·d)`.
/// For isotropic classes with common standard deviation `σ` this estimates
/// `‖μ₀ - μ₁‖ / σ`.
pub fn separation_score(points: &Matrix, labels: &[u8]) -> Result<Separation> {
    let (n, d) = points.shape();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for (r, &l) in labels.iter().enumerate() {
        let c = usize::from(l == 1);
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(points.row(r)) {
            *s += v;
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    let means: Vec<Vec<f64>> = (0..2)
        .map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect())
        .collect();
    let within: f64 = labels
        .iter()
        .enumerate()
        .map(|(r, &l)| {
            let m = &means[usize::from(l == 1)];
            points.row(r).iter().zip(m).map(|(x, m)| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let distance = means[0]
        .iter()
        .zip(&means[1])
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let dof = n.saturating_sub(2).max(1) as f64 * d as f64;
    let pooled = (within / dof).sqrt();
    if pooled <= f64::EPSILON * distance.max(f64::MIN_POSITIVE) || pooled == 0.0 {
        return Ok(if distance == 0.0 {
            Separation {
                score: 0.0,
                capped: false,
            }
        } else {
            Separation {
                score: SEPARATION_CAP,
                capped: true,
            }
        });
    }
    let score = distance / pooled;
    Ok(if score > SEPARATION_CAP {
        Separation {
            score: SEPARATION_CAP,
            capped: true,
        }
    } else {
        Separation {
            score,
            capped: false,
        }
    })
}
