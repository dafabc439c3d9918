// Samples a threshold GIRG with the grid engine and checks it against the
// brute-force oracle on the same vertices.

use girg_lab::connectivity::components;
use girg_lab::generator::{generate_oracle, PairRandom};
use girg_lab::{generate, Engine, GirgParams};

pub fn run_example() -> girg_lab::Result<()> {
    let params = GirgParams::new(5000.0, 2, 2.5, 1.0)?.with_seed(1);
    let graph = generate(&params, Engine::Grid)?;
    let mean_degree = 2.0 * graph.edge_count() as f64 / graph.vertex_count() as f64;
    println!(
        "n = {} vertices, {} edges, mean degree {mean_degree:.2}",
        graph.vertex_count(),
        graph.edge_count()
    );

    let oracle = generate_oracle(graph.vertices().to_vec(), &params, &PairRandom::for_params(&params))?;
    assert_eq!(oracle.edges(), graph.edges());
    println!("oracle agrees on all {} edges", oracle.edge_count());

    let heaviest = (0..graph.vertex_count())
        .max_by(|&a, &b| graph.vertex(a).weight.total_cmp(&graph.vertex(b).weight))
        .unwrap();
    println!(
        "heaviest vertex: weight {:.1}, degree {}",
        graph.vertex(heaviest).weight,
        graph.degree(heaviest)
    );
    println!("largest component fraction {:.3}", components(&graph).largest_fraction);
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
