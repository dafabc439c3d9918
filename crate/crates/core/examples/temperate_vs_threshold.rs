// The temperate rule on fixed vertices as the temperature drops: the edge
// set closes in on the threshold graph.

use std::collections::BTreeSet;

use girg_lab::generator::{generate_oracle, PairRandom};
use girg_lab::geometry::Region;
use girg_lab::model::sample_vertices;
use girg_lab::GirgParams;

pub fn run_example() -> girg_lab::Result<()> {
    let params = GirgParams::new(1500.0, 2, 2.5, 1.0)?.with_seed(8);
    let vertices = sample_vertices(&params, &Region::unit(2))?;
    let pair = PairRandom::for_params(&params);
    let edge_set = |p: &GirgParams| -> girg_lab::Result<BTreeSet<(usize, usize)>> {
        Ok(generate_oracle(vertices.clone(), p, &pair)?.edges().iter().copied().collect())
    };
    let threshold = edge_set(&params)?;
    println!("threshold: {} edges", threshold.len());
    for t in [0.8, 0.5, 0.2, 0.1, 0.05, 0.01] {
        let temperate = edge_set(&params.clone().with_temperature(t)?)?;
        let extra = temperate.difference(&threshold).count();
        let missing = threshold.difference(&temperate).count();
        println!("T = {t:<4}  edges {:>6}  extra {extra:>5}  missing {missing}", temperate.len());
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
