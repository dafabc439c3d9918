// Giant component campaign over a small grid of sizes.

use girg_lab::experiments::{run_campaign, Campaign, CampaignKind, CampaignOptions, Estimator};
use girg_lab::GirgParams;

pub fn run_example() -> girg_lab::Result<()> {
    let grid = [1000.0, 4000.0]
        .into_iter()
        .map(|n| GirgParams::new(n, 2, 2.5, 2.0))
        .collect::<girg_lab::Result<Vec<_>>>()?;
    let campaign = Campaign::new("giant-demo", Estimator::GiantFraction, grid, 10, 500).with_options(CampaignOptions {
        pilot_trials: Some(5),
        ..Default::default()
    });
    let report = run_campaign(CampaignKind::Giant, &campaign)?;
    for point in &report.points {
        let n = point.params.as_ref().map_or(0.0, |p| p.n_expected);
        let presence = point.estimate("presence").unwrap();
        println!(
            "n = {n}: median largest fraction {:.3}, presence {}/{}",
            point.summary("median_largest_fraction").unwrap_or(f64::NAN),
            presence.successes,
            presence.samples
        );
    }
    for v in &report.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.rule, v.detail);
    }
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
