// Cell analysis on a one-dimensional graph whose cells each expect one
// vertex of weight at least ŵ.

use girg_lab::connectivity::{analyze_cell, giant_cell_width};
use girg_lab::geometry::full_cells;
use girg_lab::{generate, Engine, GirgParams};

pub fn run_example() -> girg_lab::Result<()> {
    let params = GirgParams::new(50_000.0, 1, 2.5, 8.0)?.with_seed(12);
    let w_hat = (0.2f64 * params.n_expected).powf(1.0 / (params.tau - 1.0));
    let width = giant_cell_width(&params, w_hat)?;
    println!("w_hat {w_hat:.1}, cell width {width:.3}");
    let graph = generate(&params, Engine::Grid)?;
    for cell in full_cells(width, 1)? {
        let r = analyze_cell(&graph, &cell, w_hat, 0.5)?;
        println!(
            "cell {:?}: nice={} core={} high-weight {} connected={} paths {}/{} {}",
            r.cell.index,
            r.nice,
            r.has_core_vertex,
            r.high_weight_count,
            r.high_weight_connected,
            r.internal_layerpath_successes,
            r.first_layer_count,
            r.reason.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
