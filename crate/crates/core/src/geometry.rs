//! Ground spaces, the regular cell grid and the radii used by the
//! connectivity arguments.
//!
//! All distances are L∞. On the torus each coordinate difference is
//! folded with `min(|a - b|, 1 - |a - b|)` before taking the maximum, so
//! torus distances never exceed box distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GirgParams;

/// Relative slack used when counting how many cells of a given width fit
/// into the unit interval, so that `1 / 0.1` counts as ten cells.
const GRID_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundSpace {
    /// The unit hypercube `[0, 1]^d`.
    Box,
    /// The unit torus: coordinates wrap around at 1.
    Torus,
}

impl std::fmt::Display for GroundSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroundSpace::Box => f.write_str("box"),
            GroundSpace::Torus => f.write_str("torus"),
        }
    }
}

impl std::str::FromStr for GroundSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(GroundSpace::Box),
            "torus" => Ok(GroundSpace::Torus),
            other => Err(Error::InvalidInput(format!(
                "unknown ground space `{other}` (expected box or torus)"
            ))),
        }
    }
}

/// L∞ distance between `x` and `y` in the given ground space.
pub fn distance(x: &[f64], y: &[f64], space: GroundSpace) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(linf(x, y, space))
}

#[inline]
pub(crate) fn linf(x: &[f64], y: &[f64], space: GroundSpace) -> f64 {
    let mut max = 0.0f64;
    for (a, b) in x.iter().zip(y) {
        let mut diff = (a - b).abs();
        if space == GroundSpace::Torus {
            diff = diff.min(1.0 - diff);
        }
        if diff > max {
            max = diff;
        }
    }
    max
}

/// `base^d` by repeated multiplication. Both generators use this so the
/// edge decision never depends on a `powf` implementation.
#[inline]
pub(crate) fn pow_dim(base: f64, d: usize) -> f64 {
    let mut acc = base;
    for _ in 1..d {
        acc *= base;
    }
    acc
}

/// An axis-aligned box inside `[0, 1]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn unit(d: usize) -> Self {
        Region {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidInput(
                "region bounds must have equal, positive dimension".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite()) || *lo < 0.0 || *hi > 1.0 || lo > hi {
                return Err(Error::InvalidInput(format!(
                    "region [{lo}, {hi}] is not inside [0, 1]"
                )));
            }
        }
        Ok(Region { lower, upper })
    }

    /// The cube `[0, width]^d`.
    pub fn corner_cube(d: usize, width: f64) -> Result<Self> {
        Region::new(vec![0.0; d], vec![width; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }
}

/// One cell of the regular grid of width `grid_width` over `[0, 1]^d`.
///
/// Cells are half-open, `[origin, origin + width)`, except that coordinate
/// 1 belongs to the last cell. When `1 / width` is not an integer the last
/// cell in each dimension is clipped at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub grid_width: f64,
    pub index: Vec<usize>,
    pub origin: Vec<f64>,
}

impl CellSpec {
    pub fn new(grid_width: f64, index: Vec<usize>) -> Result<Self> {
        check_width(grid_width)?;
        let per_dim = cells_per_dim(grid_width);
        if index.is_empty() || index.iter().any(|&i| i >= per_dim) {
            return Err(Error::InvalidInput(format!(
                "cell index {index:?} outside a grid of {per_dim} cells per dimension"
            )));
        }
        let origin = index.iter().map(|&i| i as f64 * grid_width).collect();
        Ok(CellSpec {
            grid_width,
            index,
            origin,
        })
    }

    /// The cell containing `x`.
    pub fn containing(x: &[f64], grid_width: f64) -> Result<Self> {
        check_width(grid_width)?;
        CellSpec::new(grid_width, cell_of(x, grid_width))
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Whether the cell lies completely inside `[0, 1]^d`.
    pub fn is_full(&self) -> bool {
        let full = full_cells_per_dim(self.grid_width);
        self.index.iter().all(|&i| i < full)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.index.len()
            && x.iter()
                .zip(&self.index)
                .all(|(&xi, &ci)| axis_cell(xi, self.grid_width) == ci)
    }

    /// The volume of the cell after clipping at 1.
    pub fn volume(&self) -> f64 {
        self.origin
            .iter()
            .map(|&o| (o + self.grid_width).min(1.0) - o)
            .product()
    }

    /// The cell as a region, clipped at 1.
    pub fn region(&self) -> Region {
        Region {
            lower: self.origin.clone(),
            upper: self
                .origin
                .iter()
                .map(|&o| (o + self.grid_width).min(1.0))
                .collect(),
        }
    }
}

fn check_width(grid_width: f64) -> Result<()> {
    if grid_width > 0.0 && grid_width <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("grid_width", "must lie in (0, 1]"))
    }
}

/// Number of cells per dimension, including a clipped last cell.
pub fn cells_per_dim(grid_width: f64) -> usize {
    ((1.0 / grid_width) * (1.0 - GRID_SLACK)).ceil().max(1.0) as usize
}

/// Number of cells per dimension that lie completely inside `[0, 1]`.
pub fn full_cells_per_dim(grid_width: f64) -> usize {
    ((1.0 / grid_width) * (1.0 + GRID_SLACK)).floor() as usize
}

#[inline]
fn axis_cell(x: f64, grid_width: f64) -> usize {
    let last = cells_per_dim(grid_width) - 1;
    let raw = (x / grid_width).floor();
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(last)
    }
}

/// Grid index of the cell containing `x`.
pub fn cell_of(x: &[f64], grid_width: f64) -> Vec<usize> {
    x.iter().map(|&xi| axis_cell(xi, grid_width)).collect()
}

/// All cells of the grid that lie completely inside `[0, 1]^d`, in
/// row-major order with the first coordinate varying slowest.
pub fn full_cells(grid_width: f64, d: usize) -> Result<Vec<CellSpec>> {
    check_width(grid_width)?;
    let per_dim = full_cells_per_dim(grid_width);
    let total = per_dim.pow(d as u32);
    let mut cells = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut index = vec![0; d];
        for slot in index.iter_mut().rev() {
            *slot = rest % per_dim;
            rest /= per_dim;
        }
        cells.push(CellSpec::new(grid_width, index)?);
    }
    Ok(cells)
}

/// Side length of the sub-cells used to discretize a cell for weight `w`:
/// `½ (λ w² / n)^{1/d}`. Two vertices of weight at least `w` in equal or
/// adjacent sub-cells are within threshold distance of each other.
pub fn subcell_width(w: f64, params: &GirgParams) -> f64 {
    0.5 * (params.lambda * w * w / params.n_expected).powf(1.0 / params.d as f64)
}

/// `Δ_ℓ = (λ e^ℓ / n)^{1/d}`: vertices of layers ℓ and ℓ+1 within this
/// distance are adjacent in the threshold model.
pub fn layer_step_radius(ell: u32, params: &GirgParams) -> f64 {
    (params.lambda * (ell as f64).exp() / params.n_expected).powf(1.0 / params.d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: f64, d: usize, lambda: f64) -> GirgParams {
        GirgParams::new(n, d, 2.5, lambda).unwrap()
    }

    #[test]
    fn distance_examples() {
        let box_d = distance(&[0.1], &[0.9], GroundSpace::Box).unwrap();
        let torus_d = distance(&[0.1], &[0.9], GroundSpace::Torus).unwrap();
        assert!((box_d - 0.8).abs() < 1e-12);
        assert!((torus_d - 0.2).abs() < 1e-12);
        assert_eq!(distance(&[0.3, 0.4], &[0.3, 0.4], GroundSpace::Box).unwrap(), 0.0);
        assert_eq!(distance(&[0.3, 0.4], &[0.3, 0.4], GroundSpace::Torus).unwrap(), 0.0);
        assert_eq!(distance(&[0.0, 0.0], &[0.3, 0.6], GroundSpace::Box).unwrap(), 0.6);
        assert!(distance(&[0.0], &[0.0, 1.0], GroundSpace::Box).is_err());
    }

    #[test]
    fn cell_of_examples() {
        assert_eq!(cell_of(&[0.25], 0.1), vec![2]);
        assert_eq!(cell_of(&[1.0], 0.25), vec![3]);
        assert_eq!(cell_of(&[0.7, 0.2], 0.5), vec![1, 0]);
        assert_eq!(cell_of(&[1.0], 0.3), vec![3]);
    }

    #[test]
    fn grid_counts() {
        assert_eq!(cells_per_dim(0.1), 10);
        assert_eq!(full_cells_per_dim(0.1), 10);
        assert_eq!(cells_per_dim(0.3), 4);
        assert_eq!(full_cells_per_dim(0.3), 3);
        assert_eq!(full_cells(0.25, 2).unwrap().len(), 16);
        assert!(!CellSpec::new(0.3, vec![3]).unwrap().is_full());
        assert!(CellSpec::new(0.3, vec![4]).is_err());
        assert!(CellSpec::new(1.5, vec![0]).is_err());
    }

    #[test]
    fn subcell_width_examples() {
        assert!((subcell_width(2.0, &params(64.0, 1, 1.0)) - 1.0 / 32.0).abs() < 1e-15);
        assert!((subcell_width(1.0, &params(100.0, 2, 1.0)) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn layer_step_radius_examples() {
        let p = params(100.0, 1, 1.0);
        assert!((layer_step_radius(0, &p) - 0.01).abs() < 1e-15);
        let p3 = params(1000.0, 3, 2.0);
        for ell in 0..8 {
            let ratio = layer_step_radius(ell + 1, &p3) / layer_step_radius(ell, &p3);
            assert!((ratio - (1.0f64 / 3.0).exp()).abs() < 1e-12);
        }
        // weights e^{ℓ/2} on both ends give exactly the threshold radius
        for ell in 0..6 {
            let w = (ell as f64 / 2.0).exp();
            let radius = (p.lambda * w * w / p.n_expected).powf(1.0);
            assert!((radius - layer_step_radius(ell, &p)).abs() < 1e-12 * radius.max(1.0));
        }
    }

    #[test]
    fn subcell_pairs_are_within_threshold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for d in 1..=3usize {
            let p = params(10_000.0, d, 1.5);
            for _ in 0..10_000 / 3 {
                let w = 1.0 + rng.random::<f64>() * 30.0;
                let width = subcell_width(w, &p);
                let radius = (p.lambda * w * w / p.n_expected).powf(1.0 / d as f64);
                // two adjacent sub-cells along a random axis, random offsets inside
                let axis = rng.random_range(0..d);
                let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * width).collect();
                let y: Vec<f64> = (0..d)
                    .map(|i| {
                        let base = if i == axis { width } else { 0.0 };
                        base + rng.random::<f64>() * width
                    })
                    .collect();
                assert!(linf(&x, &y, GroundSpace::Box) <= radius * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn full_cell_volumes_sum_to_one() {
        for &width in &[0.5, 0.25, 0.1, 0.2] {
            for d in 1..=3 {
                let cells = full_cells(width, d).unwrap();
                let total: f64 = cells.iter().map(CellSpec::volume).sum();
                let slack = cells.len() as f64 * f64::EPSILON * 4.0;
                assert!((total - 1.0).abs() <= slack, "width {width} d {d}: {total}");
            }
        }
    }

    fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..=1.0, d)
    }

    proptest! {
        #[test]
        fn metric_axioms((x, y, z) in (1usize..=3).prop_flat_map(|d| (point(d), point(d), point(d)))) {
            for space in [GroundSpace::Box, GroundSpace::Torus] {
                let xy = linf(&x, &y, space);
                let yx = linf(&y, &x, space);
                let xz = linf(&x, &z, space);
                let zy = linf(&z, &y, space);
                prop_assert!(xy >= 0.0);
                prop_assert_eq!(xy, yx);
                prop_assert!(xy <= xz + zy + 1e-12);
            }
            prop_assert!(linf(&x, &y, GroundSpace::Torus) <= linf(&x, &y, GroundSpace::Box));
        }

        #[test]
        fn cell_contains_its_points(x in point(3), width in 0.01f64..=1.0) {
            let cell = CellSpec::containing(&x, width).unwrap();
            prop_assert!(cell.contains(&x));
            for (xi, oi) in x.iter().zip(&cell.origin) {
                prop_assert!(*oi <= *xi + 1e-12);
                prop_assert!(*xi <= oi + width + 1e-12);
            }
        }
    }
}
