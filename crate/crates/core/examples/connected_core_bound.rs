// How often the heavy vertices of a cell fail to form one component,
// next to the analytic lower bound on connectivity.

use girg_lab::connectivity::{analyze_high_weight_connectivity, connected_core_bound};
use girg_lab::generator::generate_in;
use girg_lab::geometry::{CellSpec, Region};
use girg_lab::GirgParams;

pub fn run_example() -> girg_lab::Result<()> {
    let base = GirgParams::new(10_000.0, 1, 2.5, 1.0)?;
    let width = 0.1;
    let cell = CellSpec::new(width, vec![0])?;
    let region = Region::corner_cube(1, width)?;
    let trials = 200;
    for w in [22.0, 30.0, 40.0] {
        let mut disconnected = 0;
        let mut heavy = 0;
        for seed in 0..trials {
            let graph = generate_in(&base.clone().with_seed(seed), &region)?;
            let h = analyze_high_weight_connectivity(&graph, &cell, w)?;
            disconnected += !h.connected as u32;
            heavy += h.vertex_count;
        }
        println!(
            "w = {w}: bound {:.3}, disconnected {disconnected}/{trials}, mean heavy vertices {:.1}",
            connected_core_bound(width, w, &base),
            heavy as f64 / trials as f64
        );
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
