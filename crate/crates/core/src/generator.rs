//! Edge generation.
//!
//! [`generate_oracle`] examines every vertex pair and defines the reference
//! semantics for both model variants. [`generate_grid`] is the threshold
//! fast path: vertices are bucketed by weight layer, each layer pair is
//! searched through a uniform grid sized to that pair's largest possible
//! connection radius, and every candidate is re-checked with the same
//! exact rule the oracle uses. The two produce identical edge lists.

use std::io::{BufRead, Write};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{linf, pow_dim, CellSpec, GroundSpace, Region};
use crate::model::{self, layer_index, streams, GirgParams, WeightedPoint};

/// An undirected simple graph over weighted points.
///
/// Edges are stored as `(smaller id, larger id)` pairs sorted
/// lexicographically; the adjacency lists are sorted as well.
#[derive(Clone, Debug)]
pub struct Graph {
    params: GirgParams,
    vertices: Vec<WeightedPoint>,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    layers: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. Ids must be `0..vertices.len()`
    /// in order; self-loops and duplicate edges are rejected.
    pub fn from_edges(
        params: GirgParams,
        vertices: Vec<WeightedPoint>,
        mut edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        check_ids(&vertices)?;
        let n = vertices.len();
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::InvalidInput(format!("self-loop at vertex {}", e.0)));
            }
            if e.0 >= n || e.1 >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {e:?} references a vertex outside 0..{n}"
                )));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.par_sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self::assemble(params, vertices, edges))
    }

    /// `edges` must already be normalized, sorted and unique.
    fn assemble(params: GirgParams, vertices: Vec<WeightedPoint>, edges: Vec<(usize, usize)>) -> Self {
        let n = vertices.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; edges.len() * 2];
        // lexicographic edge order fills every list in increasing order:
        // smaller neighbors arrive first, then the larger ones
        for &(u, v) in &edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        debug_assert!((0..n).all(|v| neighbors[offsets[v]..offsets[v + 1]]
            .windows(2)
            .all(|w| w[0] < w[1])));
        let layers = vertices.iter().map(|p| layer_index(p.weight.max(1.0))).collect();
        Graph {
            params,
            vertices,
            edges,
            offsets,
            neighbors,
            layers,
        }
    }

    pub fn params(&self) -> &GirgParams {
        &self.params
    }

    pub fn vertices(&self) -> &[WeightedPoint] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &WeightedPoint {
        &self.vertices[id]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Weight layer of vertex `v`.
    pub fn layer(&self, v: usize) -> u32 {
        self.layers[v]
    }

    /// The subgraph induced by the vertices satisfying `keep`, renumbered
    /// consecutively in original id order. Returns the subgraph and the
    /// original id of each of its vertices.
    pub fn induced<F>(&self, keep: F) -> (Graph, Vec<usize>)
    where
        F: Fn(&WeightedPoint) -> bool,
    {
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        let mut original = Vec::new();
        let mut vertices = Vec::new();
        for v in &self.vertices {
            if keep(v) {
                new_id[v.id] = original.len();
                vertices.push(WeightedPoint {
                    id: original.len(),
                    position: v.position.clone(),
                    weight: v.weight,
                });
                original.push(v.id);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| new_id[u] != usize::MAX && new_id[v] != usize::MAX)
            .map(|&(u, v)| (new_id[u], new_id[v]))
            .collect();
        (Self::assemble(self.params.clone(), vertices, edges), original)
    }
}

fn check_ids(vertices: &[WeightedPoint]) -> Result<()> {
    if let Some((i, v)) = vertices.iter().enumerate().find(|(i, v)| v.id != *i) {
        return Err(Error::InvalidInput(format!(
            "vertex at position {i} has id {}; ids must be consecutive from 0",
            v.id
        )));
    }
    Ok(())
}

/// Counter-based uniform randomness per unordered vertex pair.
///
/// The value for `{u, v}` is a hash of `(seed, min, max)`, so it does not
/// depend on the order in which pairs are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRandom {
    seed: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl PairRandom {
    pub fn new(seed: u64) -> Self {
        PairRandom { seed }
    }

    /// Pair randomness derived from the edge stream of `params.seed`.
    pub fn for_params(params: &GirgParams) -> Self {
        PairRandom::new(model::stream_rng(params.seed, streams::EDGES).next_u64())
    }

    /// Uniform value in `[0, 1)` for the unordered pair `{u, v}`.
    #[inline]
    pub fn uniform(&self, u: usize, v: usize) -> f64 {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let h = splitmix64(self.seed ^ splitmix64(lo as u64));
        let h = splitmix64(h ^ splitmix64((hi as u64).wrapping_add(0xD1B5_4A32_D192_ED03)));
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `min(1, (λ w_u w_v / n)^{1/d})`.
pub fn threshold_radius(w_u: f64, w_v: f64, params: &GirgParams) -> f64 {
    let (lo, hi) = if w_u <= w_v { (w_u, w_v) } else { (w_v, w_u) };
    (params.lambda * (lo * hi) / params.n_expected)
        .powf(1.0 / params.d as f64)
        .min(1.0)
}

/// `min{1, (λ w_u w_v / (n · dist^d))^{1/T}}`; 1 at distance 0.
pub fn temperate_probability(w_u: f64, w_v: f64, dist: f64, params: &GirgParams) -> Result<f64> {
    if !(params.temperature > 0.0) {
        return Err(Error::Unsupported(
            "temperature 0 is the threshold variant; use the threshold rule".into(),
        ));
    }
    if dist < 0.0 {
        return Err(Error::InvalidInput(format!("negative distance {dist}")));
    }
    Ok(ConnectionRule::new(params).temperate_probability(w_u, w_v, dist))
}

/// Shared edge decision used by every generator.
#[derive(Clone, Copy, Debug)]
struct ConnectionRule {
    lambda: f64,
    n: f64,
    d: usize,
    space: GroundSpace,
    inv_temperature: f64,
}

impl ConnectionRule {
    fn new(params: &GirgParams) -> Self {
        ConnectionRule {
            lambda: params.lambda,
            n: params.n_expected,
            d: params.d,
            space: params.ground_space,
            inv_temperature: if params.temperature > 0.0 {
                1.0 / params.temperature
            } else {
                f64::INFINITY
            },
        }
    }

    /// `λ w_u w_v / n`, symmetric in the two weights.
    #[inline]
    fn weight_term(&self, w_u: f64, w_v: f64) -> f64 {
        let (lo, hi) = if w_u <= w_v { (w_u, w_v) } else { (w_v, w_u) };
        self.lambda * (lo * hi) / self.n
    }

    /// Threshold rule `dist^d ≤ λ w_u w_v / n`; equality is an edge.
    #[inline]
    fn threshold_adjacent(&self, a: &WeightedPoint, b: &WeightedPoint) -> bool {
        let dist = linf(&a.position, &b.position, self.space);
        pow_dim(dist, self.d) <= self.weight_term(a.weight, b.weight)
    }

    #[inline]
    fn temperate_probability(&self, w_u: f64, w_v: f64, dist: f64) -> f64 {
        if dist == 0.0 {
            return 1.0;
        }
        let ratio = self.weight_term(w_u, w_v) / pow_dim(dist, self.d);
        if ratio >= 1.0 {
            1.0
        } else {
            ratio.powf(self.inv_temperature)
        }
    }
}

/// Reference generator: decides every pair directly.
///
/// Threshold: `{u, v}` is an edge iff `dist^d ≤ λ w_u w_v / n`.
/// Temperate: iff `pair_random(u, v) < temperate_probability`.
pub fn generate_oracle(
    vertices: Vec<WeightedPoint>,
    params: &GirgParams,
    pair_random: &PairRandom,
) -> Result<Graph> {
    params.validate()?;
    check_ids(&vertices)?;
    let rule = ConnectionRule::new(params);
    let threshold = params.is_threshold();
    let edges: Vec<(usize, usize)> = (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|u| {
            let a = &vertices[u];
            let vs = &vertices;
            (u + 1..vs.len()).filter_map(move |v| {
                let b = &vs[v];
                let adjacent = if threshold {
                    rule.threshold_adjacent(a, b)
                } else {
                    let dist = linf(&a.position, &b.position, rule.space);
                    pair_random.uniform(u, v) < rule.temperate_probability(a.weight, b.weight, dist)
                };
                adjacent.then_some((u, v))
            })
        })
        .collect();
    Ok(Graph::assemble(params.clone(), vertices, edges))
}

/// Which generator to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Oracle,
    Grid,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Engine::Oracle),
            "grid" => Ok(Engine::Grid),
            other => Err(Error::InvalidInput(format!("unknown engine `{other}`"))),
        }
    }
}

impl Engine {
    /// Grid for the threshold variant, oracle otherwise.
    pub fn default_for(params: &GirgParams) -> Self {
        if params.is_threshold() {
            Engine::Grid
        } else {
            Engine::Oracle
        }
    }
}

/// Generates edges over `vertices` with the chosen engine.
pub fn generate_edges(vertices: Vec<WeightedPoint>, params: &GirgParams, engine: Engine) -> Result<Graph> {
    match engine {
        Engine::Oracle => generate_oracle(vertices, params, &PairRandom::for_params(params)),
        Engine::Grid => generate_grid(vertices, params),
    }
}

/// Samples vertices in `region` and generates a graph with the default
/// engine for the variant.
pub fn generate_in(params: &GirgParams, region: &Region) -> Result<Graph> {
    let vertices = model::sample_vertices(params, region)?;
    generate_edges(vertices, params, Engine::default_for(params))
}

/// Samples a full graph on `[0, 1]^d` with the given engine.
pub fn generate(params: &GirgParams, engine: Engine) -> Result<Graph> {
    let vertices = model::sample_vertices(params, &Region::unit(params.d))?;
    generate_edges(vertices, params, engine)
}

/// Vertices of one weight layer, with the largest weight present.
struct LayerGroup {
    members: Vec<usize>,
    max_weight: f64,
}

/// A uniform grid over one layer group, stored as a counting-sorted array.
struct BucketIndex {
    lower: Vec<f64>,
    cell_width: Vec<f64>,
    per_dim: Vec<usize>,
    starts: Vec<usize>,
    items: Vec<usize>,
    torus: bool,
}

impl BucketIndex {
    fn build(
        vertices: &[WeightedPoint],
        members: &[usize],
        radius: f64,
        bounds: &(Vec<f64>, Vec<f64>),
        torus: bool,
    ) -> Self {
        let d = bounds.0.len();
        let cap = ((4 * members.len()).max(1) as f64).powf(1.0 / d as f64).ceil() as usize;
        let mut per_dim = Vec::with_capacity(d);
        let mut cell_width = Vec::with_capacity(d);
        for i in 0..d {
            let extent = bounds.1[i] - bounds.0[i];
            let k = if extent <= 0.0 || radius >= extent {
                1
            } else {
                ((extent / radius).floor() as usize).clamp(1, cap.max(1))
            };
            per_dim.push(k);
            cell_width.push(if extent > 0.0 { extent / k as f64 } else { 1.0 });
        }
        let mut index = BucketIndex {
            lower: bounds.0.clone(),
            cell_width,
            per_dim,
            starts: Vec::new(),
            items: Vec::new(),
            torus,
        };
        let total: usize = index.per_dim.iter().product();
        let keys: Vec<usize> = members.iter().map(|&m| index.key_of(&vertices[m].position)).collect();
        let mut counts = vec![0usize; total + 1];
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts[..total].to_vec();
        let mut items = vec![0usize; members.len()];
        for (&m, &k) in members.iter().zip(&keys) {
            items[fill[k]] = m;
            fill[k] += 1;
        }
        index.starts = counts;
        index.items = items;
        index
    }

    #[inline]
    fn axis_coord(&self, axis: usize, x: f64) -> usize {
        let raw = ((x - self.lower[axis]) / self.cell_width[axis]).floor();
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.per_dim[axis] - 1)
        }
    }

    fn key_of(&self, x: &[f64]) -> usize {
        let mut key = 0;
        for axis in (0..x.len()).rev() {
            key = key * self.per_dim[axis] + self.axis_coord(axis, x[axis]);
        }
        key
    }

    /// Cell coordinates along `axis` that may hold a point within
    /// `radius` of `x`.
    fn axis_range(&self, axis: usize, x: f64, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let k = self.per_dim[axis];
        let w = self.cell_width[axis];
        let lo = ((x - radius - self.lower[axis]) / w).floor();
        let hi = ((x + radius - self.lower[axis]) / w).floor();
        if self.torus {
            if hi - lo + 1.0 >= k as f64 {
                out.extend(0..k);
            } else {
                let mut t = lo as i64;
                while t <= hi as i64 {
                    out.push(t.rem_euclid(k as i64) as usize);
                    t += 1;
                }
                out.sort_unstable();
                out.dedup();
            }
        } else {
            let lo = lo.max(0.0) as usize;
            let hi = if hi < 0.0 { 0 } else { (hi as usize).min(k - 1) };
            out.extend(lo.min(k - 1)..=hi);
        }
    }

    /// Calls `visit` for every indexed vertex in cells near `x`.
    fn for_each_near<F: FnMut(usize)>(&self, x: &[f64], radius: f64, ranges: &mut [Vec<usize>], mut visit: F) {
        let d = x.len();
        for axis in 0..d {
            self.axis_range(axis, x[axis], radius, &mut ranges[axis]);
        }
        let mut cursor = vec![0usize; d];
        loop {
            let mut key = 0;
            for axis in (0..d).rev() {
                key = key * self.per_dim[axis] + ranges[axis][cursor[axis]];
            }
            for &m in &self.items[self.starts[key]..self.starts[key + 1]] {
                visit(m);
            }
            // odometer increment
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                cursor[axis] += 1;
                if cursor[axis] < ranges[axis].len() {
                    break;
                }
                cursor[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// Grid-accelerated threshold generator; edge set equals
/// [`generate_oracle`]'s exactly.
pub fn generate_grid(vertices: Vec<WeightedPoint>, params: &GirgParams) -> Result<Graph> {
    params.validate()?;
    if !params.is_threshold() {
        return Err(Error::Unsupported(
            "the grid engine handles the threshold variant only; use generate_oracle for T > 0".into(),
        ));
    }
    check_ids(&vertices)?;
    let d = params.d;
    if vertices.iter().any(|v| v.position.len() != d) {
        return Err(Error::InvalidInput(format!("every position must have {d} coordinates")));
    }
    let rule = ConnectionRule::new(params);
    let torus = params.ground_space == GroundSpace::Torus;

    let bounds = if torus {
        (vec![0.0; d], vec![1.0; d])
    } else {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v.position[i]);
                hi[i] = hi[i].max(v.position[i]);
            }
        }
        if vertices.is_empty() {
            (vec![0.0; d], vec![1.0; d])
        } else {
            (lo, hi)
        }
    };

    let mut groups: Vec<LayerGroup> = Vec::new();
    {
        let mut by_layer: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for v in &vertices {
            by_layer.entry(layer_index(v.weight.max(1.0))).or_default().push(v.id);
        }
        for (_, members) in by_layer {
            let max_weight = members.iter().map(|&m| vertices[m].weight).fold(0.0, f64::max);
            groups.push(LayerGroup { members, max_weight });
        }
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for b in 0..groups.len() {
        for a in 0..=b {
            // index the lower (larger) layer, query from the upper one
            let radius = (rule.weight_term(groups[a].max_weight, groups[b].max_weight))
                .powf(1.0 / d as f64);
            // padded so rounding in the root can only add candidates
            let radius = (radius * (1.0 + 1e-9) + 1e-12).min(2.0);
            let index = BucketIndex::build(&vertices, &groups[a].members, radius, &bounds, torus);
            let same = a == b;
            let found: Vec<Vec<(usize, usize)>> = groups[b]
                .members
                .par_chunks(512)
                .map(|chunk| {
                    let mut ranges = vec![Vec::new(); d];
                    let mut local = Vec::new();
                    for &q in chunk {
                        let vq = &vertices[q];
                        index.for_each_near(&vq.position, radius, &mut ranges, |m| {
                            if same && m >= q {
                                return;
                            }
                            if rule.threshold_adjacent(vq, &vertices[m]) {
                                local.push(if m < q { (m, q) } else { (q, m) });
                            }
                        });
                    }
                    local
                })
                .collect();
            for mut chunk in found {
                edges.append(&mut chunk);
            }
        }
    }
    edges.par_sort_unstable();
    Ok(Graph::assemble(params.clone(), vertices, edges))
}

/// The vertices of one grid cell mapped onto `[0, 1]^d`, together with the
/// parameters of the smaller model they form.
#[derive(Clone, Debug)]
pub struct CellSubgraph {
    /// Rescaled vertices, renumbered consecutively in original id order.
    pub vertices: Vec<WeightedPoint>,
    /// Original id of each rescaled vertex.
    pub original_ids: Vec<usize>,
    /// Parameters with `n_expected = Δ^d · n`.
    pub params: GirgParams,
    /// Edges of the induced subgraph, in the renumbered ids.
    pub induced_edges: Vec<(usize, usize)>,
}

/// Maps the subgraph induced by `cell` to the unit cube via
/// `x ↦ (x - origin) / Δ` and shrinks the expected size to `Δ^d n`.
///
/// Under the threshold rule `λ w_u w_v / (n dist^d)` is unchanged by this
/// map, so regenerating edges on the result reproduces `induced_edges`.
pub fn rescale_cell_subgraph(graph: &Graph, cell: &CellSpec) -> Result<CellSubgraph> {
    let params = graph.params();
    if cell.dim() != params.d {
        return Err(Error::InvalidInput("cell dimension does not match the graph".into()));
    }
    if !cell.is_full() {
        return Err(Error::InvalidInput(format!(
            "cell {:?} is clipped by the boundary of the ground space",
            cell.index
        )));
    }
    let width = cell.grid_width;
    let whole = width >= 1.0;
    if params.ground_space == GroundSpace::Torus && !whole && width > 0.5 {
        return Err(Error::InvalidInput(
            "torus cells wider than 1/2 do not embed isometrically in the box".into(),
        ));
    }
    let (sub, original_ids) = graph.induced(|v| cell.contains(&v.position));
    let vertices = sub
        .vertices()
        .iter()
        .map(|v| WeightedPoint {
            id: v.id,
            position: v
                .position
                .iter()
                .zip(&cell.origin)
                .map(|(x, o)| if whole { *x } else { (x - o) / width })
                .collect(),
            weight: v.weight,
        })
        .collect();
    let mut scaled = params.clone();
    scaled.n_expected = pow_dim(width, params.d) * params.n_expected;
    if !whole {
        scaled.ground_space = GroundSpace::Box;
    }
    Ok(CellSubgraph {
        vertices,
        original_ids,
        params: scaled,
        induced_edges: sub.edges().to_vec(),
    })
}

/// Writes `u\tv` rows, smaller id first, sorted, with a header line.
pub fn write_edges_tsv<W: Write>(mut out: W, edges: &[(usize, usize)]) -> Result<()> {
    out.write_all(b"u\tv\n")?;
    let mut line = String::new();
    for &(u, v) in edges {
        line.clear();
        line.push_str(&u.to_string());
        line.push('\t');
        line.push_str(&v.to_string());
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses the output of [`write_edges_tsv`].
pub fn read_edges_tsv<R: BufRead>(input: R) -> Result<Vec<(usize, usize)>> {
    let malformed = |reason: String| Error::Malformed {
        file: "edge TSV".into(),
        reason,
    };
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == "u\tv" => {}
        Some(Ok(h)) => return Err(malformed(format!("unexpected header `{h}`"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(malformed("missing header".into())),
    }
    let mut edges = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let mut next = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| malformed(format!("row {} is short", row + 1)))?
                .parse()
                .map_err(|e| malformed(format!("row {}: {e}", row + 1)))
        };
        let u = next()?;
        let v = next()?;
        edges.push((u, v));
    }
    Ok(edges)
}

/// Whether every edge of `sub` is also an edge of `sup`. Both lists must
/// be sorted.
pub fn is_edge_subset(sub: &[(usize, usize)], sup: &[(usize, usize)]) -> bool {
    let mut j = 0;
    for e in sub {
        while j < sup.len() && sup[j] < *e {
            j += 1;
        }
        if j == sup.len() || sup[j] != *e {
            return false;
        }
    }
    true
}
