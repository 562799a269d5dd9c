//! Compares the analytic gradients of a tiny model with central differences.

use qdkt::embed::random_init;
use qdkt::graph::{build_skill_graph, laplacian};
use qdkt::net::{backward, forward, loss, Dims, Mode, ParamSet, PARAM_NAMES};

fn main() -> qdkt::Result<()> {
    let dims = Dims { k: 4, h: 5, items: 6 };
    let w_xv = random_init(dims.k, 2 * dims.items, 1);
    let mut p = ParamSet::init(dims, w_xv, &mut qdkt::seed::rng(1))?;
    let seq = [(0, 1), (3, 0), (5, 1), (2, 1)];
    let skills = vec![[0].into(), [0].into(), [1].into(), [1].into(), [0, 1].into(), [2].into()];
    let lap = laplacian(&build_skill_graph(&skills, dims.items)?);
    let lambda = 0.1;
    let delta = 1e-5;

    let total = |p: &ParamSet| -> qdkt::Result<f64> {
        let trace = forward(p, &seq, Mode::Eval)?;
        Ok(loss(&trace, &seq, lambda, Some(&lap))?.total())
    };
    let trace = forward(&p, &seq, Mode::Eval)?;
    let (grad, _) = backward(&p, &trace, &seq, lambda, Some(&lap))?;
    let analytic: Vec<Vec<f64>> = grad.tensors().iter().map(|m| m.as_slice().to_vec()).collect();

    for (t, name) in PARAM_NAMES.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for i in 0..analytic[t].len() {
            let orig = p.tensors_mut()[t].as_slice()[i];
            p.tensors_mut()[t].as_mut_slice()[i] = orig + delta;
            let up = total(&p)?;
            p.tensors_mut()[t].as_mut_slice()[i] = orig - delta;
            let down = total(&p)?;
            p.tensors_mut()[t].as_mut_slice()[i] = orig;
            let numeric = (up - down) / (2.0 * delta);
            let a = analytic[t][i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{name:>6}: max relative error {worst:.2e}");
    }
    Ok(())
}
