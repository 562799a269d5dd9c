//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use qdkt::embed::random_init;
use qdkt::graph::{build_weighted_graph, laplacian, Laplacian};
use qdkt::net::{backward, forward, loss, Dims, Mode, ParamSet, Step};
use qdkt::seed;
use rand::Rng;

pub fn params(n: usize, k: usize, h: usize, seed_value: u64) -> ParamSet {
    let dims = Dims { k, h, items: n };
    let w_xv = random_init(k, 2 * n, seed_value);
    ParamSet::init(dims, w_xv, &mut seed::rng_for(seed_value, 99)).unwrap()
}

pub fn random_sequence(n: usize, t: usize, seed_value: u64) -> Vec<Step> {
    let mut rng = seed::rng_for(seed_value, 7);
    (0..t)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..2u8)))
        .collect()
}

/// Random weighted graph on `n` nodes, each pair present with probability
/// `density`.
pub fn random_graph_edges(n: usize, density: f64, seed_value: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = seed::rng_for(seed_value, 5);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    edges
}

pub fn random_laplacian(n: usize, seed_value: u64) -> Laplacian {
    laplacian(&build_weighted_graph(&random_graph_edges(n, 0.5, seed_value), n).unwrap())
}

/// `Σ_i Σ_j w_ij (y_i - y_j)²` over ordered pairs from a dense symmetric
/// weight matrix.
pub fn ordered_double_sum(n: usize, edges: &[(usize, usize, f64)], y: &[f64]) -> f64 {
    let mut w = vec![vec![0.0; n]; n];
    for &(i, j, v) in edges {
        w[i][j] += v;
        w[j][i] += v;
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += w[i][j] * (y[i] - y[j]).powi(2);
        }
    }
    s
}

/// Pairwise AUC: fraction of (positive, negative) pairs ranked correctly,
/// ties counting one half.
pub fn auc_pairwise(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn total_loss(p: &ParamSet, seq: &[Step], lambda: f64, lap: Option<&Laplacian>) -> f64 {
    let trace = forward(p, seq, Mode::Eval).unwrap();
    loss(&trace, seq, lambda, lap).unwrap().total()
}

/// Largest relative deviation between the analytic gradient and central
/// finite differences over every parameter entry. Entries where both are
/// below `1e-6` in magnitude are compared relative to `1e-6`.
pub fn gradient_check(p: &ParamSet, seq: &[Step], lambda: f64, lap: Option<&Laplacian>, delta: f64) -> (f64, String) {
    let trace = forward(p, seq, Mode::Eval).unwrap();
    let (grads, _) = backward(p, &trace, seq, lambda, lap).unwrap();
    let mut worst = (0.0, String::new());
    let mut probe = p.clone();
    for (t, (name, g)) in qdkt::net::PARAM_NAMES.iter().zip(grads.tensors()).enumerate() {
        for e in 0..g.as_slice().len() {
            let orig = probe.tensors()[t].as_slice()[e];
            probe.tensors_mut()[t].as_mut_slice()[e] = orig + delta;
            let up = total_loss(&probe, seq, lambda, lap);
            probe.tensors_mut()[t].as_mut_slice()[e] = orig - delta;
            let down = total_loss(&probe, seq, lambda, lap);
            probe.tensors_mut()[t].as_mut_slice()[e] = orig;
            let numeric = (up - down) / (2.0 * delta);
            let analytic = g.as_slice()[e];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            if rel > worst.0 {
                worst = (rel, format!("{name}[{e}]: analytic {analytic}, numeric {numeric}"));
            }
        }
    }
    worst
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
