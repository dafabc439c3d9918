//! Component structure and the executable form of the connectivity
//! argument: the core clique, layer paths, high-weight connectivity inside
//! a cell and cell niceness.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Graph;
use crate::geometry::{self, layer_step_radius, linf, pow_dim, CellSpec};
use crate::model::{layer_of, GirgParams};

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grand = self.parent[self.parent[x]];
            self.parent[x] = grand;
            x = grand;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub component_count: usize,
    /// Component sizes in descending order.
    pub sizes: Vec<usize>,
    /// `sizes[0] / vertex count`, 0 for the empty graph.
    pub largest_fraction: f64,
    pub second_largest: usize,
}

/// Component label of every vertex. Labels are `0..k`, numbered by the
/// smallest vertex id in each component.
pub fn component_labels(graph: &Graph) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    for &(u, v) in graph.edges() {
        uf.union(u, v);
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for v in 0..n {
        let r = uf.find(v);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels.push(label_of_root[r]);
    }
    labels
}

/// Connected components via union-find.
pub fn components(graph: &Graph) -> ComponentSummary {
    summarize_labels(&component_labels(graph))
}

pub(crate) fn summarize_labels(labels: &[usize]) -> ComponentSummary {
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let largest_fraction = if labels.is_empty() {
        0.0
    } else {
        sizes[0] as f64 / labels.len() as f64
    };
    ComponentSummary {
        component_count: count,
        second_largest: sizes.get(1).copied().unwrap_or(0),
        sizes,
        largest_fraction,
    }
}

/// Ids of vertices with weight at least `√(n/λ)`, after checking that
/// they are pairwise adjacent.
pub fn core_vertices(graph: &Graph) -> Result<Vec<usize>> {
    let params = graph.params();
    if !params.is_threshold() {
        return Err(Error::Unsupported(
            "the core is a clique only in the threshold variant".into(),
        ));
    }
    let threshold = params.core_weight();
    let core: Vec<usize> = graph
        .vertices()
        .iter()
        .filter(|v| v.weight >= threshold)
        .map(|v| v.id)
        .collect();
    for (i, &u) in core.iter().enumerate() {
        for &v in &core[i + 1..] {
            if !graph.has_edge(u, v) {
                return Err(Error::CoreNotClique(u, v));
            }
        }
    }
    Ok(core)
}

/// Expected number of core vertices, `n (√(n/λ))^{-(τ-1)}`.
pub fn expected_core_size(params: &GirgParams) -> f64 {
    params.n_expected * params.core_weight().powf(-(params.tau - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// A step from layer ℓ to ℓ+1 must be an edge of length at most Δ_ℓ.
    StrictRadius,
    /// Any edge into the next layer is a step.
    Adjacency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPathResult {
    pub start_id: usize,
    /// Vertex ids from the start to the last vertex reached; for a
    /// successful search this ends in the target layer.
    pub path: Vec<usize>,
    pub reached_layer: u32,
    pub succeeded: bool,
    pub mode: PathMode,
}

/// Searches for a layer path from `start` up to `target_layer`: a path
/// whose every step is an edge into the next weight layer.
pub fn find_layer_path(
    graph: &Graph,
    start: usize,
    target_layer: u32,
    mode: PathMode,
) -> Result<LayerPathResult> {
    if start >= graph.vertex_count() {
        return Err(Error::InvalidInput(format!("no vertex {start}")));
    }
    let radii = StepRadii::new(graph.params());
    Ok(layer_path_where(graph, start, target_layer, mode, &radii, |_| true))
}

/// Δ_ℓ cache, since searches hit the same few layers repeatedly.
pub(crate) struct StepRadii {
    radii: Vec<f64>,
}

impl StepRadii {
    pub(crate) fn new(params: &GirgParams) -> Self {
        StepRadii {
            radii: (0..128).map(|l| layer_step_radius(l, params)).collect(),
        }
    }

    fn get(&self, params: &GirgParams, ell: u32) -> f64 {
        self.radii
            .get(ell as usize)
            .copied()
            .unwrap_or_else(|| layer_step_radius(ell, params))
    }
}

/// Breadth-first layer-path search restricted to vertices where `allowed`
/// holds. Every vertex reachable by ascending steps is visited once, so
/// the search finds a path whenever one exists.
pub(crate) fn layer_path_where<F>(
    graph: &Graph,
    start: usize,
    target_layer: u32,
    mode: PathMode,
    radii: &StepRadii,
    allowed: F,
) -> LayerPathResult
where
    F: Fn(usize) -> bool,
{
    let params = graph.params();
    let start_layer = graph.layer(start);
    if start_layer >= target_layer {
        return LayerPathResult {
            start_id: start,
            path: vec![start],
            reached_layer: start_layer,
            succeeded: true,
            mode,
        };
    }
    let mut parent: std::collections::HashMap<usize, usize> = Default::default();
    parent.insert(start, start);
    let mut queue = VecDeque::from([start]);
    let mut best = start;
    let mut found = None;
    while let Some(u) = queue.pop_front() {
        let layer = graph.layer(u);
        if layer > graph.layer(best) {
            best = u;
        }
        if layer >= target_layer {
            found = Some(u);
            break;
        }
        let radius = radii.get(params, layer);
        let pu = &graph.vertex(u).position;
        for &v in graph.neighbors(u) {
            if graph.layer(v) != layer + 1 || parent.contains_key(&v) || !allowed(v) {
                continue;
            }
            if mode == PathMode::StrictRadius
                && linf(pu, &graph.vertex(v).position, params.ground_space) > radius
            {
                continue;
            }
            parent.insert(v, u);
            queue.push_back(v);
        }
    }
    let end = found.unwrap_or(best);
    let mut path = vec![end];
    let mut cur = end;
    while cur != start {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    LayerPathResult {
        start_id: start,
        path,
        reached_layer: graph.layer(end),
        succeeded: found.is_some(),
        mode,
    }
}

/// Lower bound on the probability that the vertices of weight at least
/// `w` inside a cell of width `cell_width` induce a connected graph:
/// `1 - (2Δ)^d / (λ w²) · exp(-λ w^{3-τ} / 2^d) · n`, clamped to [0, 1].
pub fn connected_core_bound(cell_width: f64, w: f64, params: &GirgParams) -> f64 {
    let d = params.d;
    let two_d = pow_dim(2.0, d);
    let deficit = pow_dim(2.0 * cell_width, d) / (params.lambda * w * w)
        * (-params.lambda * w.powf(3.0 - params.tau) / two_d).exp()
        * params.n_expected;
    (1.0 - deficit).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighWeightConnectivity {
    /// Whether the induced graph is connected (vacuously true for at most
    /// one vertex).
    pub connected: bool,
    pub vertex_count: usize,
    pub bound: f64,
}

/// Checks whether the vertices of `cell` with weight at least `w` induce a
/// connected graph, using only edges with both endpoints in the cell.
pub fn analyze_high_weight_connectivity(
    graph: &Graph,
    cell: &CellSpec,
    w: f64,
) -> Result<HighWeightConnectivity> {
    let params = graph.params();
    if !params.is_threshold() {
        return Err(Error::Unsupported(
            "high-weight connectivity bounds hold for the threshold variant".into(),
        ));
    }
    if cell.dim() != params.d {
        return Err(Error::InvalidInput("cell dimension does not match the graph".into()));
    }
    let members: Vec<usize> = graph
        .vertices()
        .iter()
        .filter(|v| v.weight >= w && cell.contains(&v.position))
        .map(|v| v.id)
        .collect();
    Ok(HighWeightConnectivity {
        connected: induces_connected(graph, &members),
        vertex_count: members.len(),
        bound: connected_core_bound(cell.grid_width, w, params),
    })
}

fn induces_connected(graph: &Graph, members: &[usize]) -> bool {
    if members.len() <= 1 {
        return true;
    }
    let inside: std::collections::HashSet<usize> = members.iter().copied().collect();
    let mut seen = std::collections::HashSet::from([members[0]]);
    let mut stack = vec![members[0]];
    while let Some(u) = stack.pop() {
        for &v in graph.neighbors(u) {
            if inside.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == members.len()
}

/// `w̄ = (2^d ln n / λ)^{1/(3-τ)}`: the weight at which the connected-core
/// bound's exponent becomes `-ln n`.
pub fn bar_weight(params: &GirgParams) -> f64 {
    (pow_dim(2.0, params.d) * params.n_expected.ln() / params.lambda)
        .max(1.0)
        .powf(1.0 / (3.0 - params.tau))
}

/// Inset applied to a cell so that a layer path up to w̄'s layer starting
/// inside the inset cannot leave the cell: the largest step length,
/// `(λ e w̄² / n)^{1/d}`, times the number of steps, `layer(w̄) + 1`.
pub fn deviation_budget(params: &GirgParams) -> f64 {
    let bar = bar_weight(params);
    let step = (params.lambda * std::f64::consts::E * bar * bar / params.n_expected)
        .powf(1.0 / params.d as f64);
    let steps = layer_of(bar).map_or(1, |l| l + 1);
    step * steps as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: CellSpec,
    /// Some vertex in the cell has weight at least ŵ.
    pub has_core_vertex: bool,
    /// The vertices with weight at least w̄ exist and induce one component
    /// inside the cell.
    pub high_weight_connected: bool,
    pub high_weight_count: usize,
    /// Layer-0 vertices inside the inset region.
    pub first_layer_count: usize,
    /// How many of those have a strict layer path to w̄'s layer that stays
    /// inside the cell.
    pub internal_layerpath_successes: usize,
    pub nice: bool,
    pub w_hat: f64,
    pub w_bar: f64,
    pub fraction_c: f64,
    /// Expected vertex count `Δ^d n`.
    pub mu: f64,
    /// `μ ≥ ŵ^{τ-1}`.
    pub mu_condition_met: bool,
    /// `μ / ((ln n)^{2/(3-τ)} (ln ln n)^d)`; only meaningful for n > e.
    pub mu_growth_ratio: Option<f64>,
    /// `ŵ / (ln n)^{1/(3-τ)}`.
    pub w_hat_growth_ratio: Option<f64>,
    pub deviation_budget: f64,
    pub connectivity_bound: f64,
    pub reason: Option<String>,
}

/// Evaluates the three events that make a cell nice: a vertex of weight at
/// least `w_hat`, connected high-weight vertices, and at least a
/// `1 - fraction_c` share of inset layer-0 vertices reaching w̄'s layer
/// by strict layer paths inside the cell.
pub fn analyze_cell(graph: &Graph, cell: &CellSpec, w_hat: f64, fraction_c: f64) -> Result<CellReport> {
    analyze_cell_with_paths(graph, cell, w_hat, fraction_c).map(|(report, _)| report)
}

/// [`analyze_cell`] together with the layer-path search result of every
/// counted layer-0 vertex.
pub fn analyze_cell_with_paths(
    graph: &Graph,
    cell: &CellSpec,
    w_hat: f64,
    fraction_c: f64,
) -> Result<(CellReport, Vec<LayerPathResult>)> {
    let params = graph.params();
    if !params.is_threshold() {
        return Err(Error::Unsupported("cell niceness is defined for the threshold variant".into()));
    }
    if !(0.0..1.0).contains(&fraction_c) || fraction_c == 0.0 {
        return Err(Error::param("fraction_c", "must lie in (0, 1)"));
    }
    if !(w_hat >= 1.0) {
        return Err(Error::param("w_hat", "must be at least 1"));
    }
    if cell.dim() != params.d {
        return Err(Error::InvalidInput("cell dimension does not match the graph".into()));
    }
    if !cell.is_full() {
        return Err(Error::InvalidInput(format!(
            "cell {:?} is clipped by the boundary",
            cell.index
        )));
    }

    let d = params.d;
    let width = cell.grid_width;
    let mu = pow_dim(width, d) * params.n_expected;
    let w_bar = bar_weight(params);
    let target = layer_of(w_bar)?;
    let ln_n = params.n_expected.ln();
    let exponent = 1.0 / (3.0 - params.tau);
    let (mu_growth_ratio, w_hat_growth_ratio) = if ln_n > 1.0 {
        (
            Some(mu / (ln_n.powf(2.0 * exponent) * pow_dim(ln_n.ln(), d))),
            Some(w_hat / ln_n.powf(exponent)),
        )
    } else {
        (None, None)
    };

    let in_cell: Vec<bool> = graph
        .vertices()
        .iter()
        .map(|v| cell.contains(&v.position))
        .collect();
    let has_core_vertex = graph
        .vertices()
        .iter()
        .any(|v| in_cell[v.id] && v.weight >= w_hat);
    let high = analyze_high_weight_connectivity(graph, cell, w_bar)?;
    let high_weight_connected = high.connected && high.vertex_count > 0;

    let budget = deviation_budget(params);
    let mut report = CellReport {
        cell: cell.clone(),
        has_core_vertex,
        high_weight_connected,
        high_weight_count: high.vertex_count,
        first_layer_count: 0,
        internal_layerpath_successes: 0,
        nice: false,
        w_hat,
        w_bar,
        fraction_c,
        mu,
        mu_condition_met: mu >= w_hat.powf(params.tau - 1.0),
        mu_growth_ratio,
        w_hat_growth_ratio,
        deviation_budget: budget,
        connectivity_bound: high.bound,
        reason: None,
    };
    if 2.0 * budget >= width {
        report.reason = Some("deviation budget exceeds cell".into());
        return Ok((report, Vec::new()));
    }

    let inset = |x: &[f64]| {
        x.iter()
            .zip(&cell.origin)
            .all(|(xi, o)| *xi >= o + budget && *xi < o + width - budget)
    };
    let radii = StepRadii::new(params);
    let mut paths = Vec::new();
    for v in graph.vertices() {
        if !in_cell[v.id] || graph.layer(v.id) != 0 || !inset(&v.position) {
            continue;
        }
        let result = layer_path_where(graph, v.id, target, PathMode::StrictRadius, &radii, |u| in_cell[u]);
        report.first_layer_count += 1;
        if result.succeeded {
            report.internal_layerpath_successes += 1;
        }
        paths.push(result);
    }

    let share_ok = report.internal_layerpath_successes as f64
        >= (1.0 - fraction_c) * report.first_layer_count as f64;
    report.nice = has_core_vertex && high_weight_connected && report.first_layer_count > 0 && share_ok;
    if !report.nice {
        report.reason = Some(
            if !has_core_vertex {
                "no vertex of weight at least w_hat"
            } else if !high_weight_connected {
                "high-weight vertices are not connected inside the cell"
            } else if report.first_layer_count == 0 {
                "no layer-0 vertices in the inset region"
            } else {
                "too few layer paths stay inside the cell"
            }
            .into(),
        );
    }
    Ok((report, paths))
}

/// Cell width with `Δ^d n = ŵ^{τ-1}`, so each cell expects one vertex of
/// weight at least ŵ.
pub fn giant_cell_width(params: &GirgParams, w_hat: f64) -> Result<f64> {
    if !(w_hat >= 1.0) {
        return Err(Error::param("w_hat", "must be at least 1"));
    }
    let width = (w_hat.powf(params.tau - 1.0) / params.n_expected).powf(1.0 / params.d as f64);
    if width > 1.0 {
        return Err(Error::InvalidInput(format!(
            "cell width {width} exceeds the ground space"
        )));
    }
    Ok(width)
}

/// Number of full cells of [`giant_cell_width`]; grows like `n^{(3-τ)/2}`
/// for `ŵ = √(n/λ)`.
pub fn giant_cell_count(params: &GirgParams, w_hat: f64) -> Result<usize> {
    let width = giant_cell_width(params, w_hat)?;
    Ok(geometry::full_cells_per_dim(width).pow(params.d as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, Engine};
    use crate::geometry::GroundSpace;
    use crate::model::WeightedPoint;

    fn params(n: f64, d: usize) -> GirgParams {
        GirgParams::new(n, d, 2.5, 1.0).unwrap()
    }

    fn graph(p: GirgParams, vertices: Vec<(Vec<f64>, f64)>, edges: Vec<(usize, usize)>) -> Graph {
        let vs = vertices
            .into_iter()
            .enumerate()
            .map(|(id, (position, weight))| WeightedPoint { id, position, weight })
            .collect();
        Graph::from_edges(p, vs, edges).unwrap()
    }

    #[test]
    fn isolated_vertices() {
        let g = graph(params(100.0, 1), (0..5).map(|i| (vec![i as f64 / 5.0], 1.0)).collect(), vec![]);
        let s = components(&g);
        assert_eq!(s.sizes, vec![1; 5]);
        assert_eq!(s.component_count, 5);
        assert_eq!(s.second_largest, 1);
    }

    #[test]
    fn clique_plus_isolated() {
        let g = graph(
            params(100.0, 1),
            (0..5).map(|i| (vec![i as f64 / 5.0], 1.0)).collect(),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        );
        let s = components(&g);
        assert_eq!(s.sizes, vec![4, 1]);
        assert!((s.largest_fraction - 0.8).abs() < 1e-15);
    }

    #[test]
    fn empty_graph_summary() {
        let g = graph(params(100.0, 1), vec![], vec![]);
        let s = components(&g);
        assert_eq!(s.component_count, 0);
        assert_eq!(s.largest_fraction, 0.0);
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(6);
        assert!(uf.union(0, 1));
        assert!(uf.union(2, 3));
        assert!(uf.union(1, 3));
        assert!(!uf.union(0, 2));
        assert_eq!(uf.set_size(3), 4);
        assert_ne!(uf.find(4), uf.find(0));
    }

    #[test]
    fn core_vertices_are_heavy_and_adjacent() {
        let p = params(100.0, 2).with_seed(11);
        let g = generate(&p, Engine::Grid).unwrap();
        let core = core_vertices(&g).unwrap();
        for &c in &core {
            assert!(g.vertex(c).weight >= 10.0);
        }
        let heavy = g.vertices().iter().filter(|v| v.weight >= 10.0).count();
        assert_eq!(core.len(), heavy);
    }

    #[test]
    fn core_violation_is_reported() {
        let g = graph(params(100.0, 1), vec![(vec![0.0], 20.0), (vec![1.0], 20.0)], vec![]);
        assert!(matches!(core_vertices(&g), Err(Error::CoreNotClique(0, 1))));
    }

    #[test]
    fn expected_core_size_example() {
        assert!((expected_core_size(&params(1e4, 2)) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn layer_path_from_target_layer() {
        let g = graph(params(100.0, 1), vec![(vec![0.5], 3.0)], vec![]);
        let r = find_layer_path(&g, 0, 2, PathMode::StrictRadius).unwrap();
        assert!(r.succeeded);
        assert_eq!(r.path, vec![0]);
        assert_eq!(r.reached_layer, 2);
    }

    #[test]
    fn hand_placed_chain() {
        // n = 100, λ = 1, d = 1: Δ_ℓ = e^ℓ / 100
        let p = params(100.0, 1);
        let mut vertices = Vec::new();
        let mut x = 0.2;
        for ell in 0..4u32 {
            let w = (ell as f64 / 2.0).exp() * 1.01;
            vertices.push((vec![x], w));
            x += layer_step_radius(ell, &p) / 2.0;
        }
        // a distractor in layer 1 that is adjacent but too far for a strict step
        vertices.push((vec![0.2 + 0.9 * layer_step_radius(0, &p) * 1.6], 1.7));
        let vs: Vec<WeightedPoint> = vertices
            .into_iter()
            .enumerate()
            .map(|(id, (position, weight))| WeightedPoint { id, position, weight })
            .collect();
        let g = crate::generator::generate_grid(vs, &p).unwrap();
        let r = find_layer_path(&g, 0, 3, PathMode::StrictRadius).unwrap();
        assert!(r.succeeded);
        assert_eq!(r.path, vec![0, 1, 2, 3]);
        let layers: Vec<u32> = r.path.iter().map(|&v| g.layer(v)).collect();
        assert_eq!(layers, vec![0, 1, 2, 3]);
        assert!(find_layer_path(&g, 0, 3, PathMode::Adjacency).unwrap().succeeded);
    }

    #[test]
    fn strict_failure_reports_partial_path() {
        // two vertices in layers 0 and 1, adjacent but beyond Δ_0
        let p = params(100.0, 1);
        let g = graph(p, vec![(vec![0.1], 1.2), (vec![0.115], 1.9)], vec![(0, 1)]);
        let strict = find_layer_path(&g, 0, 1, PathMode::StrictRadius).unwrap();
        assert!(!strict.succeeded);
        assert_eq!(strict.path, vec![0]);
        let adj = find_layer_path(&g, 0, 1, PathMode::Adjacency).unwrap();
        assert!(adj.succeeded);
        assert_eq!(adj.path, vec![0, 1]);
    }

    #[test]
    fn connected_core_bound_example() {
        let p = GirgParams::new(1000.0, 1, 2.5, 1.0).unwrap();
        let bound = connected_core_bound(1.0, 100.0, &p);
        let expected = 1.0 - (2.0 / 1e4) * (-5.0f64).exp() * 1000.0;
        assert!((bound - expected).abs() < 1e-12);
    }

    #[test]
    fn large_weight_cell_is_a_clique() {
        let p = params(1000.0, 2).with_seed(5);
        let g = generate(&p, Engine::Grid).unwrap();
        let cell = CellSpec::new(0.25, vec![1, 2]).unwrap();
        // Δ_w ≥ Δ needs λ w² / n ≥ (2Δ)^d, i.e. w ≥ 15.8
        let w = 16.0;
        assert!(geometry::subcell_width(w, &p) >= 0.25);
        let r = analyze_high_weight_connectivity(&g, &cell, w).unwrap();
        assert!(r.connected);
        assert!(r.bound > 0.0 && r.bound <= 1.0);
    }

    #[test]
    fn giant_cell_width_examples() {
        let p1 = GirgParams::new(1e4, 1, 2.5, 1.0).unwrap();
        assert!((giant_cell_width(&p1, 100.0).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(giant_cell_count(&p1, 100.0).unwrap(), 10);
        let p2 = GirgParams::new(1e4, 2, 2.5, 1.0).unwrap();
        assert!((giant_cell_width(&p2, 100.0).unwrap() - 0.1f64.sqrt()).abs() < 1e-12);
        assert!(giant_cell_width(&p1, 1e4).is_err());
        // the count exponent (3-τ)/2 vanishes as τ → 3
        for tau in [2.9, 2.99, 2.999] {
            let p = GirgParams::new(1e6, 1, tau, 1.0).unwrap();
            let inv = 1.0 / giant_cell_width(&p, p.core_weight()).unwrap();
            assert!((inv.ln() / 1e6f64.ln() - (3.0 - tau) / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_cell_is_not_nice() {
        let p = params(1e4, 1);
        let g = graph(p, vec![(vec![0.9], 1.5)], vec![]);
        let cell = CellSpec::new(0.5, vec![0]).unwrap();
        let r = analyze_cell(&g, &cell, 100.0, 0.5).unwrap();
        assert!(!r.nice && !r.has_core_vertex && !r.high_weight_connected);
        assert_eq!(r.first_layer_count, 0);
        assert_eq!(r.internal_layerpath_successes, 0);
    }

    #[test]
    fn tiny_cell_exceeds_budget() {
        let p = params(1e4, 2).with_seed(1);
        let g = generate(&p, Engine::Grid).unwrap();
        let cell = CellSpec::new(0.01, vec![0, 0]).unwrap();
        let r = analyze_cell(&g, &cell, p.core_weight(), 0.5).unwrap();
        assert!(!r.nice);
        assert_eq!(r.reason.as_deref(), Some("deviation budget exceeds cell"));
    }

    #[test]
    fn hand_built_nice_cell() {
        // d = 1, n = 1e9, λ = 1, τ = 2.5: w̄ = (2 ln n)^2 ≈ 1717, layer 14
        let p = GirgParams::new(1e9, 1, 2.5, 1.0).unwrap();
        let w_bar = bar_weight(&p);
        let target = layer_of(w_bar).unwrap();
        let budget = deviation_budget(&p);
        assert!(2.0 * budget < 0.5);
        let cell = CellSpec::new(0.5, vec![0]).unwrap();
        let mut vertices: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut x = 0.25;
        for ell in 0..=target {
            vertices.push((vec![x], (ell as f64 / 2.0).exp() * 1.001));
            x += layer_step_radius(ell, &p) * 0.5;
        }
        vertices.push((vec![0.25 + layer_step_radius(0, &p) * 0.25], 1.1));
        // a core vertex beside the top of the chain
        vertices.push((vec![x], 2.0 * w_bar));
        let vs: Vec<WeightedPoint> = vertices
            .into_iter()
            .enumerate()
            .map(|(id, (position, weight))| WeightedPoint { id, position, weight })
            .collect();
        let g = crate::generator::generate_grid(vs, &p).unwrap();
        let (r, paths) = analyze_cell_with_paths(&g, &cell, 1000.0, 0.5).unwrap();
        assert!(r.has_core_vertex);
        assert!(r.high_weight_connected);
        assert_eq!(r.high_weight_count, 1);
        assert_eq!(r.first_layer_count, 2);
        assert_eq!(r.internal_layerpath_successes, 2);
        assert!(r.nice, "{r:?}");
        for path in paths {
            assert!(path.path.iter().all(|&v| cell.contains(&g.vertex(v).position)));
        }
    }

    #[test]
    fn torus_never_smaller_components() {
        for seed in 0..5 {
            let p = params(800.0, 2).with_seed(seed);
            let b = generate(&p, Engine::Grid).unwrap();
            let t = generate(&p.clone().with_ground_space(GroundSpace::Torus), Engine::Grid).unwrap();
            assert!(crate::generator::is_edge_subset(b.edges(), t.edges()));
            assert!(components(&b).sizes[0] <= components(&t).sizes[0]);
        }
    }
}
