// Same vertices on the box and on the torus.

use girg_lab::connectivity::components;
use girg_lab::generator::is_edge_subset;
use girg_lab::geometry::GroundSpace;
use girg_lab::{generate, Engine, GirgParams};

pub fn run_example() -> girg_lab::Result<()> {
    for seed in 0..5 {
        let p = GirgParams::new(3000.0, 2, 2.4, 1.0)?.with_seed(seed);
        let boxed = generate(&p.clone().with_ground_space(GroundSpace::Box), Engine::Grid)?;
        let torus = generate(&p.with_ground_space(GroundSpace::Torus), Engine::Grid)?;
        assert!(is_edge_subset(boxed.edges(), torus.edges()));
        println!(
            "seed {seed}: box {} edges, torus {} edges, largest {} vs {}",
            boxed.edge_count(),
            torus.edge_count(),
            components(&boxed).sizes[0],
            components(&torus).sizes[0]
        );
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
