//! Seeded Monte Carlo campaigns and their JSON reports.
//!
//! Trial `t` of a campaign uses seed `seed_base + t`. Trials run in
//! parallel and are collected in index order, so a report depends only on
//! its configuration.

mod coupling;
mod giant;
mod layers;
pub mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GirgParams;

pub use coupling::{run_coupling_campaign, run_torus_box_campaign};
pub use giant::{run_giant_campaign, run_partial_giant_campaign};
pub use layers::{run_cell_nice_campaign, run_connected_core_campaign, run_layerpath_campaign};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(alias = "giant_fraction")]
    GiantFraction,
    #[serde(alias = "giant_presence")]
    GiantPresence,
    #[serde(alias = "layer_path_prob")]
    LayerPathProb,
    #[serde(alias = "cell_nice_prob")]
    CellNiceProb,
    #[serde(alias = "connected_core_bound")]
    ConnectedCoreBound,
    #[serde(alias = "coupling_ks")]
    CouplingKS,
    #[serde(alias = "torus_box_domination")]
    TorusBoxDomination,
}

/// Which runner a campaign goes to; one per `experiment` subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    Giant,
    Layerpath,
    Coupling,
    PartialGiant,
    ConnectedCore,
    TorusBox,
    CellNice,
}

impl CampaignKind {
    pub const ALL: [CampaignKind; 7] = [
        CampaignKind::Giant,
        CampaignKind::Layerpath,
        CampaignKind::Coupling,
        CampaignKind::PartialGiant,
        CampaignKind::ConnectedCore,
        CampaignKind::TorusBox,
        CampaignKind::CellNice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Giant => "giant",
            CampaignKind::Layerpath => "layerpath",
            CampaignKind::Coupling => "coupling",
            CampaignKind::PartialGiant => "partial-giant",
            CampaignKind::ConnectedCore => "connected-core",
            CampaignKind::TorusBox => "torus-box",
            CampaignKind::CellNice => "cell-nice",
        }
    }

    /// Estimators this runner accepts.
    pub fn accepts(self, estimator: Estimator) -> bool {
        use Estimator::*;
        match self {
            CampaignKind::Giant | CampaignKind::PartialGiant => {
                matches!(estimator, GiantFraction | GiantPresence)
            }
            CampaignKind::Layerpath => estimator == LayerPathProb,
            CampaignKind::Coupling => estimator == CouplingKS,
            CampaignKind::ConnectedCore => estimator == ConnectedCoreBound,
            CampaignKind::TorusBox => estimator == TorusBoxDomination,
            CampaignKind::CellNice => estimator == CellNiceProb,
        }
    }
}

impl std::str::FromStr for CampaignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CampaignKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown campaign `{s}`")))
    }
}

/// Runner-specific knobs; each runner documents which ones it reads.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignOptions {
    /// Expected size of the smaller model (cell campaigns).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction_c: Option<f64>,
    /// Family-wise significance level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_trials: Option<usize>,
    /// Giant presence threshold; calibrated from a pilot when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts_per_graph: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_width: Option<f64>,
    /// Weight thresholds for the connected-core campaign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Size multiplier for the mismatched negative control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
}

/// A campaign configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub name: String,
    pub estimator: Estimator,
    pub params_grid: Vec<GirgParams>,
    #[serde(alias = "trials_per_cell")]
    pub trials: usize,
    pub seed_base: u64,
    #[serde(default)]
    pub options: CampaignOptions,
    /// Verdict rules whose failure makes the `experiment` command fail.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assert: Vec<String>,
}

impl Campaign {
    pub fn new(name: &str, estimator: Estimator, params_grid: Vec<GirgParams>, trials: usize, seed_base: u64) -> Self {
        Campaign {
            name: name.to_string(),
            estimator,
            params_grid,
            trials,
            seed_base,
            options: CampaignOptions::default(),
            assert: Vec::new(),
        }
    }

    pub fn with_options(mut self, options: CampaignOptions) -> Self {
        self.options = options;
        self
    }

    fn validate(&self, kind: CampaignKind) -> Result<()> {
        if !kind.accepts(self.estimator) {
            return Err(Error::InvalidInput(format!(
                "estimator {:?} does not belong to the {} campaign",
                self.estimator,
                kind.name()
            )));
        }
        if self.params_grid.is_empty() {
            return Err(Error::param("params_grid", "must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be positive"));
        }
        for p in &self.params_grid {
            p.validate()?;
        }
        Ok(())
    }

    fn require_threshold(&self) -> Result<()> {
        if self.params_grid.iter().all(GirgParams::is_threshold) {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "this campaign covers the threshold variant only".into(),
            ))
        }
    }

    fn seed(&self, trial: usize) -> u64 {
        self.seed_base.wrapping_add(trial as u64)
    }
}

/// A proportion with its Wilson 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub successes: u64,
    pub samples: u64,
    pub interval: [f64; 2],
}

impl Estimate {
    pub fn proportion(name: &str, successes: u64, samples: u64) -> Self {
        let (lo, hi) = stats::wilson(successes, samples);
        Estimate {
            name: name.to_string(),
            value: if samples == 0 { 0.0 } else { successes as f64 / samples as f64 },
            successes,
            samples,
            interval: [lo, hi],
        }
    }
}

/// A descriptive number such as a median or a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub value: f64,
    pub samples: u64,
}

impl Summary {
    fn new(name: &str, value: f64, samples: usize) -> Self {
        Summary {
            name: name.to_string(),
            value,
            samples: samples as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Level the p-value was compared against.
    pub level: f64,
    pub rejected: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub params: Option<GirgParams>,
    /// Extra coordinates of the point beyond the model parameters.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coordinates: BTreeMap<String, f64>,
    pub estimates: Vec<Estimate>,
    pub summaries: Vec<Summary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestResult>,
    /// Per-trial values, in trial order.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<f64>>,
}

impl PointReport {
    fn at(params: &GirgParams) -> Self {
        PointReport {
            params: Some(params.clone()),
            ..Default::default()
        }
    }

    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn summary(&self, name: &str) -> Option<f64> {
        self.summaries.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(rule: &str, passed: bool, detail: String) -> Self {
        Verdict {
            rule: rule.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub kind: CampaignKind,
    pub campaign: Campaign,
    /// Pilot and calibration results shared by all points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calibration: Vec<Summary>,
    pub points: Vec<PointReport>,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn new(kind: CampaignKind, campaign: &Campaign) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            kind,
            campaign: campaign.clone(),
            calibration: Vec::new(),
            points: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn verdict(&self, rule: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.rule == rule)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Rules named in the campaign's `assert` list that failed. Unknown
    /// rule names are an error.
    pub fn failed_assertions(&self) -> Result<Vec<&Verdict>> {
        let mut failed = Vec::new();
        for rule in &self.campaign.assert {
            let verdict = self.verdict(rule).ok_or_else(|| {
                Error::InvalidInput(format!("assert names unknown rule `{rule}`"))
            })?;
            if !verdict.passed {
                failed.push(verdict);
            }
        }
        Ok(failed)
    }

    pub fn calibration_value(&self, name: &str) -> Option<f64> {
        self.calibration.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

/// Runs `campaign` with the runner for `kind`.
pub fn run_campaign(kind: CampaignKind, campaign: &Campaign) -> Result<ExperimentReport> {
    match kind {
        CampaignKind::Giant => run_giant_campaign(campaign),
        CampaignKind::Layerpath => run_layerpath_campaign(campaign),
        CampaignKind::Coupling => run_coupling_campaign(campaign),
        CampaignKind::PartialGiant => run_partial_giant_campaign(campaign),
        CampaignKind::ConnectedCore => run_connected_core_campaign(campaign),
        CampaignKind::TorusBox => run_torus_box_campaign(campaign),
        CampaignKind::CellNice => run_cell_nice_campaign(campaign),
    }
}

/// Evaluates `trial` for each index in `range` in parallel, in order.
fn par_trials<T, F>(range: std::ops::Range<usize>, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    range.into_par_iter().map(trial).collect()
}

fn as_f64(values: &[usize]) -> Vec<f64> {
    values.iter().map(|&v| v as f64).collect()
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, "must be positive and finite"))
    }
}

fn unit_open(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::param(name, "must lie in (0, 1)"))
    }
}
