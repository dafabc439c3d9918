use rand::Rng;

use super::{
    par_trials, positive, stats, unit_open, Campaign, CampaignKind, Estimate, ExperimentReport, PointReport,
    Summary, Verdict,
};
use crate::connectivity::{
    analyze_cell, analyze_high_weight_connectivity, connected_core_bound, giant_cell_width, layer_path_where,
    PathMode, StepRadii,
};
use crate::error::{Error, Result};
use crate::generator::{generate, generate_in, Engine, Graph};
use crate::geometry::{CellSpec, GroundSpace, Region};
use crate::model::{core_layer, stream_rng, streams, GirgParams};

/// Samples only the corner cell `[0, width)^d`. The restriction of the
/// Poisson process to the cell is itself a Poisson process, and edges
/// between cell vertices depend only on those vertices, so this has the
/// law of the cell's induced subgraph in the whole graph.
fn corner_cell_graph(params: &GirgParams, seed: u64, width: f64) -> Result<(Graph, CellSpec)> {
    let cell = CellSpec::new(width, vec![0; params.d])?;
    if !cell.is_full() {
        return Err(Error::InvalidInput(format!("cell width {width} exceeds the ground space")));
    }
    if params.ground_space == GroundSpace::Torus && width > 0.5 {
        return Err(Error::InvalidInput("torus cells must be at most 1/2 wide".into()));
    }
    let region = Region::corner_cube(params.d, width)?;
    let graph = generate_in(&params.clone().with_seed(seed), &region)?;
    Ok((graph, cell))
}

struct PathCounts {
    starts: u64,
    strict: u64,
    adjacency: u64,
    eligible: usize,
}

fn layerpath_trial(params: &GirgParams, seed: u64, starts: usize) -> Result<PathCounts> {
    let params = params.clone().with_seed(seed);
    let graph = generate(&params, Engine::Grid)?;
    let target = core_layer(&params);
    let candidates: Vec<usize> = (0..graph.vertex_count())
        .filter(|&v| graph.layer(v) < target)
        .collect();
    let mut counts = PathCounts {
        starts: 0,
        strict: 0,
        adjacency: 0,
        eligible: candidates.len(),
    };
    if candidates.is_empty() {
        return Ok(counts);
    }
    let radii = StepRadii::new(&params);
    let mut rng = stream_rng(seed, streams::SAMPLING);
    for _ in 0..starts {
        let start = candidates[rng.random_range(0..candidates.len())];
        counts.starts += 1;
        if layer_path_where(&graph, start, target, PathMode::StrictRadius, &radii, |_| true).succeeded {
            counts.strict += 1;
        }
        if layer_path_where(&graph, start, target, PathMode::Adjacency, &radii, |_| true).succeeded {
            counts.adjacency += 1;
        }
    }
    Ok(counts)
}

/// Probability that a uniformly chosen vertex below the core layer has a
/// strict layer path up to the core layer. Each of the `trials` graphs
/// contributes `options.starts_per_graph` (default 50) starts drawn with
/// replacement.
///
/// Rules: `layerpath-trend` requires `p̂(n_max) ≥ p̂(n_min) - ε`
/// (`options.epsilon`, default 0.05); `layerpath-floor` requires every
/// Wilson lower bound to exceed `options.floor` (default 0.1).
pub fn run_layerpath_campaign(campaign: &Campaign) -> Result<ExperimentReport> {
    campaign.validate(CampaignKind::Layerpath)?;
    campaign.require_threshold()?;
    let opts = &campaign.options;
    let starts = opts.starts_per_graph.unwrap_or(50);
    if starts == 0 {
        return Err(Error::param("starts_per_graph", "must be positive"));
    }
    let epsilon = opts.epsilon.unwrap_or(0.05);
    let floor = opts.floor.unwrap_or(0.1);
    let mut report = ExperimentReport::new(CampaignKind::Layerpath, campaign);

    let mut estimates = Vec::new();
    for params in &campaign.params_grid {
        let trials = par_trials(0..campaign.trials, |t| layerpath_trial(params, campaign.seed(t), starts))?;
        let total: u64 = trials.iter().map(|c| c.starts).sum();
        let strict: u64 = trials.iter().map(|c| c.strict).sum();
        let adjacency: u64 = trials.iter().map(|c| c.adjacency).sum();
        let mut point = PointReport::at(params);
        let estimate = Estimate::proportion("layer_path", strict, total);
        estimates.push((params.n_expected, estimate.clone()));
        point.estimates.push(estimate);
        point.estimates.push(Estimate::proportion("layer_path_adjacency", adjacency, total));
        point.summaries.push(Summary::new("target_layer", core_layer(params) as f64, trials.len()));
        point.summaries.push(Summary::new(
            "mean_eligible_starts",
            trials.iter().map(|c| c.eligible as f64).sum::<f64>() / trials.len() as f64,
            trials.len(),
        ));
        point.series.insert(
            "successes_per_graph".into(),
            trials.iter().map(|c| c.strict as f64).collect(),
        );
        report.points.push(point);
    }

    let smallest = estimates
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    let largest = estimates
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    report.verdicts.push(Verdict::new(
        "layerpath-trend",
        largest.1.value >= smallest.1.value - epsilon,
        format!(
            "p(n={}) = {} against p(n={}) = {} - {epsilon}",
            largest.0, largest.1.value, smallest.0, smallest.1.value
        ),
    ));
    let lowest = estimates
        .iter()
        .map(|(_, e)| e.interval[0])
        .fold(f64::INFINITY, f64::min);
    report.verdicts.push(Verdict::new(
        "layerpath-floor",
        lowest > floor,
        format!("smallest Wilson lower bound {lowest} against floor {floor}"),
    ));
    report.notes.push(
        "starts within one graph share that graph; the interval treats them as independent draws".into(),
    );
    Ok(report)
}

/// Frequency with which the vertices of weight at least `w` in a corner
/// cell of width `options.cell_width` fail to induce a connected graph,
/// for every `w` in `options.weights` at every grid point.
///
/// Rule `connected-core-bound`: at every point the number of
/// disconnected trials is at most the one-sided 99% binomial critical
/// value for the failure probability `1 - bound`.
pub fn run_connected_core_campaign(campaign: &Campaign) -> Result<ExperimentReport> {
    campaign.validate(CampaignKind::ConnectedCore)?;
    campaign.require_threshold()?;
    let opts = &campaign.options;
    let width = positive(
        "cell_width",
        opts.cell_width
            .ok_or_else(|| Error::param("cell_width", "required for the connected-core campaign"))?,
    )?;
    let weights = opts
        .weights
        .clone()
        .filter(|w| !w.is_empty())
        .ok_or_else(|| Error::param("weights", "required for the connected-core campaign"))?;
    for &w in &weights {
        positive("weights", w)?;
    }
    let mut report = ExperimentReport::new(CampaignKind::ConnectedCore, campaign);
    let mut violations = Vec::new();
    let mut outside = 0;
    for params in &campaign.params_grid {
        for &w in &weights {
            let bound = connected_core_bound(width, w, params);
            if !(bound > 0.5 && bound < 1.0) {
                outside += 1;
            }
            let trials = par_trials(0..campaign.trials, |t| {
                let (graph, cell) = corner_cell_graph(params, campaign.seed(t), width)?;
                analyze_high_weight_connectivity(&graph, &cell, w)
            })?;
            let disconnected = trials.iter().filter(|r| !r.connected).count() as u64;
            let n = campaign.trials as u64;
            let critical = stats::binomial_upper_critical(n, 1.0 - bound, 0.99)?;
            let passed = disconnected <= critical;
            if !passed {
                violations.push(format!("w = {w} at n = {}", params.n_expected));
            }
            let mut point = PointReport::at(params);
            point.coordinates.insert("w".into(), w);
            point.coordinates.insert("cell_width".into(), width);
            point.estimates.push(Estimate::proportion("disconnected", disconnected, n));
            point.summaries.push(Summary::new("bound", bound, 0));
            point.summaries.push(Summary::new("allowed_disconnected", critical as f64, campaign.trials));
            point.summaries.push(Summary::new(
                "mean_high_weight_count",
                trials.iter().map(|r| r.vertex_count as f64).sum::<f64>() / n as f64,
                campaign.trials,
            ));
            report.points.push(point);
        }
    }
    report.verdicts.push(Verdict::new(
        "connected-core-bound",
        violations.is_empty(),
        if violations.is_empty() {
            "no point exceeds its allowance".to_string()
        } else {
            format!("allowance exceeded at {}", violations.join(", "))
        },
    ));
    if outside > 0 {
        report
            .notes
            .push(format!("{outside} point(s) have a bound outside (0.5, 1) and test little"));
    }
    Ok(report)
}

/// Frequency of nice cells and of each event that makes a cell nice, for
/// the corner cell. Reads `options.w_hat` (default `√(n/λ)`),
/// `options.fraction_c` (default 0.5) and `options.cell_width` (default
/// the width with `Δ^d n = ŵ^{τ-1}`). Descriptive only: no rules.
pub fn run_cell_nice_campaign(campaign: &Campaign) -> Result<ExperimentReport> {
    campaign.validate(CampaignKind::CellNice)?;
    campaign.require_threshold()?;
    let opts = &campaign.options;
    let fraction_c = unit_open("fraction_c", opts.fraction_c.unwrap_or(0.5))?;
    let mut report = ExperimentReport::new(CampaignKind::CellNice, campaign);
    for params in &campaign.params_grid {
        let w_hat = opts.w_hat.unwrap_or_else(|| params.core_weight());
        let width = match opts.cell_width {
            Some(w) => positive("cell_width", w)?,
            None => giant_cell_width(params, w_hat)?,
        };
        let trials = par_trials(0..campaign.trials, |t| {
            let (graph, cell) = corner_cell_graph(params, campaign.seed(t), width)?;
            analyze_cell(&graph, &cell, w_hat, fraction_c)
        })?;
        let n = campaign.trials as u64;
        let count = |f: &dyn Fn(&crate::connectivity::CellReport) -> bool| trials.iter().filter(|r| f(r)).count() as u64;
        let mut point = PointReport::at(params);
        point.coordinates.insert("w_hat".into(), w_hat);
        point.coordinates.insert("cell_width".into(), width);
        point.estimates.push(Estimate::proportion("nice", count(&|r| r.nice), n));
        point.estimates.push(Estimate::proportion("has_core_vertex", count(&|r| r.has_core_vertex), n));
        point
            .estimates
            .push(Estimate::proportion("high_weight_connected", count(&|r| r.high_weight_connected), n));
        let first: u64 = trials.iter().map(|r| r.first_layer_count as u64).sum();
        let reached: u64 = trials.iter().map(|r| r.internal_layerpath_successes as u64).sum();
        point.estimates.push(Estimate::proportion("internal_layer_path", reached, first));
        let first_report = &trials[0];
        point.summaries.push(Summary::new("mu", first_report.mu, 0));
        point.summaries.push(Summary::new("w_bar", first_report.w_bar, 0));
        point
            .summaries
            .push(Summary::new("deviation_budget", first_report.deviation_budget, 0));
        point.summaries.push(Summary::new(
            "mu_condition_met",
            if first_report.mu_condition_met { 1.0 } else { 0.0 },
            0,
        ));
        if let Some(r) = first_report.mu_growth_ratio {
            point.summaries.push(Summary::new("mu_growth_ratio", r, 0));
        }
        if let Some(r) = first_report.w_hat_growth_ratio {
            point.summaries.push(Summary::new("w_hat_growth_ratio", r, 0));
        }
        report.points.push(point);
    }
    report
        .notes
        .push("the growth ratios are advisory; their asymptotic conditions cannot be checked at one n".into());
    Ok(report)
}
