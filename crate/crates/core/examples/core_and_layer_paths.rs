// The core clique and layer paths climbing into it.

use girg_lab::connectivity::{core_vertices, expected_core_size, find_layer_path, PathMode};
use girg_lab::model::core_layer;
use girg_lab::{generate, Engine, GirgParams};

pub fn run_example() -> girg_lab::Result<()> {
    let params = GirgParams::new(20_000.0, 2, 2.5, 1.0)?.with_seed(3);
    let graph = generate(&params, Engine::Grid)?;
    let core = core_vertices(&graph)?;
    println!(
        "core: {} vertices above weight {:.1} (expected {:.1}), pairwise adjacent",
        core.len(),
        params.core_weight(),
        expected_core_size(&params)
    );

    let target = core_layer(&params);
    let starts: Vec<usize> = (0..graph.vertex_count()).filter(|&v| graph.layer(v) == 0).take(200).collect();
    for mode in [PathMode::StrictRadius, PathMode::Adjacency] {
        let mut reached = 0;
        let mut example = None;
        for &s in &starts {
            let r = find_layer_path(&graph, s, target, mode)?;
            if r.succeeded {
                reached += 1;
                example.get_or_insert(r.path);
            }
        }
        println!("{mode:?}: {reached} of {} layer-0 starts reach layer {target}", starts.len());
        if let Some(path) = example {
            let layers: Vec<u32> = path.iter().map(|&v| graph.layer(v)).collect();
            println!("  e.g. layers {layers:?}");
        }
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
