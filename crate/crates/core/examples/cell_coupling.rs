// A cell of GIRG(n) rescaled to the unit cube against a fresh GIRG(f),
// with a mismatched control that the tests should catch.

use girg_lab::experiments::{run_campaign, Campaign, CampaignKind, CampaignOptions, Estimator};
use girg_lab::GirgParams;

pub fn run_example() -> girg_lab::Result<()> {
    let params = GirgParams::new(3000.0, 2, 2.5, 1.0)?;
    let campaign = Campaign::new("coupling-demo", Estimator::CouplingKS, vec![params], 40, 21).with_options(
        CampaignOptions {
            f: Some(300.0),
            control_factor: Some(3.0),
            repetitions: Some(3),
            ..Default::default()
        },
    );
    let report = run_campaign(CampaignKind::Coupling, &campaign)?;
    let point = &report.points[0];
    for name in ["mean_vertices_cell", "mean_vertices_direct", "mean_edges_cell", "mean_edges_direct"] {
        println!("{name:<22} {:.1}", point.summary(name).unwrap_or(f64::NAN));
    }
    for t in &point.tests {
        println!("{:<22} D/X² {:.4}  p {:.3}  rejected {}", t.name, t.statistic, t.p_value, t.rejected);
    }
    if let Some(c) = point.estimate("control_rejection") {
        println!("control rejected in {}/{} repetitions", c.successes, c.samples);
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
