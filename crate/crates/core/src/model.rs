//! Model parameters, the Pareto weight law, weight layers and the marked
//! Poisson point process that produces vertices.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GroundSpace, Region};

/// Fixed ChaCha stream ids. Each sampling stage reads its own stream, so
/// changing how much one stage consumes never shifts another.
pub mod streams {
    pub const COUNT: u64 = 0;
    pub const POSITIONS: u64 = 1;
    pub const WEIGHTS: u64 = 2;
    pub const EDGES: u64 = 3;
    pub const SAMPLING: u64 = 4;
}

/// Seeded generator for one sub-stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn default_ground_space() -> GroundSpace {
    GroundSpace::Box
}

/// The model tuple `(n, d, τ, λ, T)` plus ground space and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GirgParams {
    /// Expected number of vertices in `[0, 1]^d`.
    pub n_expected: f64,
    pub d: usize,
    /// Power-law exponent, in (2, 3).
    pub tau: f64,
    /// Average-degree constant.
    pub lambda: f64,
    /// 0 selects the threshold variant.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_ground_space")]
    pub ground_space: GroundSpace,
    #[serde(default)]
    pub seed: u64,
}

impl GirgParams {
    /// Threshold parameters on the box with seed 0.
    pub fn new(n_expected: f64, d: usize, tau: f64, lambda: f64) -> Result<Self> {
        let params = GirgParams {
            n_expected,
            d,
            tau,
            lambda,
            temperature: 0.0,
            ground_space: GroundSpace::Box,
            seed: 0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        self.temperature = temperature;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ground_space(mut self, ground_space: GroundSpace) -> Self {
        self.ground_space = ground_space;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n_expected: f64) -> Result<Self> {
        self.n_expected = n_expected;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_expected.is_finite() && self.n_expected > 0.0) {
            return Err(Error::param("n", "must be a positive finite number"));
        }
        if self.d == 0 {
            return Err(Error::param("d", "must be at least 1"));
        }
        if !(self.tau > 2.0 && self.tau < 3.0) {
            return Err(Error::param(
                "tau",
                format!("must lie in the open interval (2, 3), got {}", self.tau),
            ));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if !(self.temperature >= 0.0 && self.temperature < 1.0) {
            return Err(Error::param(
                "temperature",
                format!("must lie in [0, 1), got {}", self.temperature),
            ));
        }
        Ok(())
    }

    pub fn is_threshold(&self) -> bool {
        self.temperature == 0.0
    }

    /// `√(n/λ)`: vertices at least this heavy form a clique in the
    /// threshold variant.
    pub fn core_weight(&self) -> f64 {
        (self.n_expected / self.lambda).sqrt()
    }
}

/// A vertex: its id, position in `[0, 1]^d` and weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub id: usize,
    pub position: Vec<f64>,
    pub weight: f64,
}

/// Weight layer ℓ: weights in `[e^{ℓ/2}, e^{(ℓ+1)/2})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub index: u32,
    pub lower: f64,
    pub upper: f64,
}

impl Layer {
    pub fn new(index: u32) -> Self {
        Layer {
            index,
            lower: layer_bound(index),
            upper: layer_bound(index + 1),
        }
    }

    pub fn contains(&self, weight: f64) -> bool {
        self.lower <= weight && weight < self.upper
    }
}

#[inline]
fn layer_bound(index: u32) -> f64 {
    (index as f64 / 2.0).exp()
}

/// Inverse CDF of the Pareto law `P[w ≤ x] = 1 - x^{-(τ-1)}`.
pub fn pareto_quantile(u: f64, tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidInput(format!(
            "uniform draw {u} outside [0, 1)"
        )));
    }
    if !(tau > 1.0) {
        return Err(Error::param("tau", "Pareto CDF needs tau > 1"));
    }
    Ok((1.0 - u).powf(-1.0 / (tau - 1.0)))
}

/// `P[w ≥ x] = x^{-(τ-1)}` for `x ≥ 1`.
pub fn pareto_tail(x: f64, tau: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else {
        x.powf(-(tau - 1.0))
    }
}

/// Ulp distance between two positive finite floats.
fn ulps_apart(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

/// Weights this many ulps or fewer below a layer boundary are placed in
/// the upper layer.
const BOUNDARY_ULPS: u64 = 4;

/// Layer index of a weight; infallible for `weight ≥ 1`.
#[inline]
pub(crate) fn layer_index(weight: f64) -> u32 {
    let mut ell = (2.0 * weight.ln()).floor().max(0.0) as u32;
    let upper = layer_bound(ell + 1);
    if weight >= upper || ulps_apart(weight, upper) <= BOUNDARY_ULPS {
        ell += 1;
    } else if ell > 0 {
        let lower = layer_bound(ell);
        if weight < lower && ulps_apart(weight, lower) > BOUNDARY_ULPS {
            ell -= 1;
        }
    }
    ell
}

/// The layer containing `weight`.
pub fn layer_of(weight: f64) -> Result<u32> {
    if !(weight >= 1.0) || !weight.is_finite() {
        return Err(Error::InvalidInput(format!(
            "weight {weight} is below the Pareto support [1, ∞)"
        )));
    }
    Ok(layer_index(weight))
}

/// `⌈ln(n/λ)⌉`, the first layer whose weights all reach `√(n/λ)`.
/// Returns 0 when `n/λ ≤ 1`, where every weight is a core weight.
pub fn core_layer(params: &GirgParams) -> u32 {
    let ratio = params.n_expected / params.lambda;
    if ratio <= 1.0 {
        return 0;
    }
    let log = ratio.ln();
    let nearest = log.round();
    if (log - nearest).abs() <= 4.0 * f64::EPSILON * nearest.max(1.0) {
        nearest as u32
    } else {
        log.ceil() as u32
    }
}

/// Whether `n/λ ≤ 1`, in which case the whole weight range is core.
pub fn core_is_degenerate(params: &GirgParams) -> bool {
    params.n_expected / params.lambda <= 1.0
}

/// Exact probability that a Pareto(τ) weight lands in layer `ell`.
pub fn layer_probability(ell: u32, tau: f64) -> f64 {
    let rate = (tau - 1.0) / 2.0;
    (-rate * ell as f64).exp() * -(-rate).exp_m1()
}

/// Samples the marked Poisson point process restricted to `region`.
///
/// The vertex count is Poisson with mean `volume(region) · n`; positions
/// are uniform in the region and weights are Pareto(τ). Count, positions
/// and weights each come from their own stream of `params.seed`, and ids
/// are assigned consecutively from 0 in sampling order.
pub fn sample_vertices(params: &GirgParams, region: &Region) -> Result<Vec<WeightedPoint>> {
    params.validate()?;
    if region.dim() != params.d {
        return Err(Error::InvalidInput(format!(
            "region has dimension {} but the model has d = {}",
            region.dim(),
            params.d
        )));
    }
    let mean = region.volume() * params.n_expected;
    if mean <= 0.0 {
        return Ok(Vec::new());
    }

    let mut count_rng = stream_rng(params.seed, streams::COUNT);
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?
        .sample(&mut count_rng) as usize;

    let mut pos_rng = stream_rng(params.seed, streams::POSITIONS);
    let mut weight_rng = stream_rng(params.seed, streams::WEIGHTS);
    let widths: Vec<f64> = region
        .lower()
        .iter()
        .zip(region.upper())
        .map(|(lo, hi)| hi - lo)
        .collect();

    let mut vertices = Vec::with_capacity(count);
    for id in 0..count {
        let position = region
            .lower()
            .iter()
            .zip(&widths)
            .map(|(lo, w)| lo + pos_rng.random::<f64>() * w)
            .collect();
        let weight = pareto_quantile(weight_rng.random::<f64>(), params.tau)?;
        vertices.push(WeightedPoint {
            id,
            position,
            weight,
        });
    }
    Ok(vertices)
}

/// Formats a float with 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `id\tx_1\t…\tx_d\tweight` rows with a header line.
pub fn write_vertices_tsv<W: Write>(mut out: W, vertices: &[WeightedPoint], d: usize) -> Result<()> {
    let mut header = String::from("id");
    for i in 1..=d {
        header.push_str(&format!("\tx_{i}"));
    }
    header.push_str("\tweight\n");
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for v in vertices {
        line.clear();
        line.push_str(&v.id.to_string());
        for x in &v.position {
            line.push('\t');
            line.push_str(&fmt_f64(*x));
        }
        line.push('\t');
        line.push_str(&fmt_f64(v.weight));
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses the output of [`write_vertices_tsv`].
pub fn read_vertices_tsv<R: BufRead>(input: R, d: usize) -> Result<Vec<WeightedPoint>> {
    let malformed = |reason: String| Error::Malformed {
        file: "vertex TSV".into(),
        reason,
    };
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed("missing header".into()))??;
    let columns = header.split('\t').count();
    if columns != d + 2 {
        return Err(malformed(format!(
            "header has {columns} columns, expected {}",
            d + 2
        )));
    }
    let mut vertices = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != d + 2 {
            return Err(malformed(format!("row {} has {} columns", row + 1, fields.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| malformed(format!("row {}: {e}", row + 1)))
        };
        let id = fields[0]
            .parse::<usize>()
            .map_err(|e| malformed(format!("row {}: {e}", row + 1)))?;
        let position = fields[1..=d].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let weight = parse(fields[d + 1])?;
        vertices.push(WeightedPoint {
            id,
            position,
            weight,
        });
    }
    Ok(vertices)
}
