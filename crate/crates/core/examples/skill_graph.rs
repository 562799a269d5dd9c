//! Builds the question graph from shared skills and evaluates the
//! smoothness penalty on a couple of prediction vectors.

use std::collections::BTreeSet;

use qdkt::graph::{build_skill_graph, laplacian};

fn main() -> qdkt::Result<()> {
    // questions 0-2 practise skill 0, 2-3 skill 1, question 4 has no skill
    let skills: Vec<BTreeSet<usize>> = vec![
        [0].into(),
        [0].into(),
        [0, 1].into(),
        [1].into(),
        BTreeSet::new(),
    ];
    let g = build_skill_graph(&skills, skills.len())?;
    for &(i, j, w) in g.edges() {
        println!("edge {i} - {j} weight {w}");
    }
    let lap = laplacian(&g);
    println!("degrees {:?}", lap.degree());

    let smooth = [0.7, 0.7, 0.7, 0.7, 0.1];
    let rough = [0.9, 0.1, 0.8, 0.2, 0.5];
    for (name, y) in [("smooth", &smooth), ("rough", &rough)] {
        println!("{name}: y'Ly = {:.4}, gradient {:?}", lap.quadratic_form(y)?, lap.quadratic_form_grad(y)?);
    }
    Ok(())
}
