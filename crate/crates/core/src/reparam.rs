//! Random strictly increasing reparametrizations.
//!
//! A map is drawn by sampling a squared-exponential Gaussian-process path `f`
//! on a grid (length-scale drawn from an inverse-Gamma(5, 5)), shifting it so
//! its minimum is zero and integrating. The running integral of a
//! non-negative function is non-decreasing; a tiny linear ramp makes it strict.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_SIZE: usize = 128;
pub const MIN_GRID_SIZE: usize = 16;

const LENGTHSCALE_SHAPE: f64 = 5.0;
const LENGTHSCALE_SCALE: f64 = 5.0;
const CHOLESKY_JITTER: f64 = 1e-8;
const CHOLESKY_RETRIES: usize = 3;
const RAMP_SCALE: f64 = 1e-9;

/// Strictly increasing piecewise-linear function.
///
/// Evaluation interpolates linearly between grid nodes and extrapolates with
/// the slope of the first/last segment outside `[grid[0], grid[G-1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneMap {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneMap {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} nodes but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < MIN_GRID_SIZE {
            return Err(Error::InvalidInput(format!(
                "monotone map needs at least {MIN_GRID_SIZE} nodes, got {}",
                grid.len()
            )));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("map nodes must be finite".into()));
        }
        if !strictly_increasing(&grid) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        if !strictly_increasing(&values) {
            return Err(Error::InvalidInput(
                "map values must be strictly increasing".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// The identity on `[lo, hi]`.
    pub fn identity(lo: f64, hi: f64, grid_size: usize) -> Result<Self> {
        let grid = uniform_grid(lo, hi, grid_size)?;
        Self::new(grid.clone(), grid)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest gap between consecutive values; positive for every valid map.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let last = g.len() - 1;
        // segment index k such that g[k] <= x < g[k+1], clamped to valid segments
        let k = match g.partition_point(|&node| node <= x) {
            0 => 0,
            p => (p - 1).min(last - 1),
        };
        let (x0, x1) = (g[k], g[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Elementwise application of `map`; see [`MonotoneMap::apply`].
pub fn apply_map(map: &MonotoneMap, v: &[f64]) -> Vec<f64> {
    map.apply(v)
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn uniform_grid(lo: f64, hi: f64, size: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    if size < MIN_GRID_SIZE {
        return Err(Error::InvalidInput(format!(
            "grid size must be at least {MIN_GRID_SIZE}, got {size}"
        )));
    }
    let step = (hi - lo) / (size - 1) as f64;
    let mut grid: Vec<f64> = (0..size).map(|j| lo + step * j as f64).collect();
    grid[size - 1] = hi;
    Ok(grid)
}

/// Draws a GP length-scale `gamma ~ InvGamma(shape 5, scale 5)` as `5 / Gamma(5, 1)`.
pub fn sample_lengthscale<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let gamma = Gamma::new(LENGTHSCALE_SHAPE, 1.0).expect("valid gamma parameters");
    LENGTHSCALE_SCALE / gamma.sample(rng)
}

/// Draws a zero-mean GP path on `grid` with covariance
/// `k(x, x') = exp(-(x - x')^2 / (2 * lengthscale))`.
///
/// The Cholesky factorization uses diagonal jitter `1e-8`, retried with ten
/// times more jitter up to three times.
pub fn sample_gp_path<R: Rng + ?Sized>(
    grid: &[f64],
    lengthscale: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let kernel = DMatrix::from_fn(n, n, |i, j| {
        let d = grid[i] - grid[j];
        (-d * d / (2.0 * lengthscale)).exp()
    });
    let mut jitter = CHOLESKY_JITTER;
    for attempt in 0..=CHOLESKY_RETRIES {
        let mut k = kernel.clone();
        for i in 0..n {
            k[(i, i)] += jitter;
        }
        if let Some(chol) = k.cholesky() {
            let l = chol.l();
            let white = nalgebra::DVector::from_fn(n, |_, _| {
                let e: f64 = StandardNormal.sample(rng);
                e
            });
            return Ok((l * white).iter().copied().collect());
        }
        log::debug!("GP Cholesky failed (attempt {attempt}, jitter {jitter:e})");
        jitter *= 10.0;
    }
    Err(Error::NumericalFailure(format!(
        "GP covariance not positive definite (lengthscale {lengthscale}, {n} nodes)"
    )))
}

/// Integrates a path into increasing map values:
/// `F(g_j) = min f + trapz_{g_0..g_j}(f - min f) + eps * (g_j - g_0)`.
pub(crate) fn integrate_to_monotone(grid: &[f64], path: &[f64]) -> Vec<f64> {
    let lo = grid[0];
    let eps = RAMP_SCALE * (grid[grid.len() - 1] - lo);
    let floor = path.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values = Vec::with_capacity(grid.len());
    let mut running = 0.0;
    values.push(floor);
    for j in 1..grid.len() {
        let h = grid[j] - grid[j - 1];
        running += 0.5 * h * ((path[j - 1] - floor) + (path[j] - floor));
        values.push(floor + running + eps * (grid[j] - lo));
    }
    values
}

/// Draws a random strictly increasing map on `[lo, hi]`.
pub fn sample_monotone_map<R: Rng + ?Sized>(
    lo: f64,
    hi: f64,
    grid_size: usize,
    rng: &mut R,
) -> Result<MonotoneMap> {
    let grid = uniform_grid(lo, hi, grid_size)?;
    let lengthscale = sample_lengthscale(rng);
    let path = sample_gp_path(&grid, lengthscale, rng)?;
    let values = integrate_to_monotone(&grid, &path);
    MonotoneMap::new(grid, values)
}

/// Draws a map spanning the observed range of `v`.
pub fn sample_map_for<R: Rng + ?Sized>(
    v: &[f64],
    grid_size: usize,
    rng: &mut R,
) -> Result<MonotoneMap> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !(lo < hi) {
        return Err(Error::DegenerateInput(
            "cannot span a map over a constant variable".into(),
        ));
    }
    sample_monotone_map(lo, hi, grid_size, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qv::{mean_and_std, mqv_score_directed, SamplePair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lengthscale_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_lengthscale(&mut rng)).collect();
        assert!(draws.iter().all(|&g| g > 0.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        // InvGamma(5, 5) mean: 5 / (5 - 1)
        assert!((mean - 1.25).abs() < 0.05, "mean {mean}");

        let a = sample_lengthscale(&mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_lengthscale(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_maps_are_strictly_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let map = sample_monotone_map(-3.0, 2.5, DEFAULT_GRID_SIZE, &mut rng).unwrap();
            assert!(map.min_gap() > 0.0);
            assert_eq!(map.grid().len(), DEFAULT_GRID_SIZE);
        }
    }

    #[test]
    fn constant_path_reduces_to_ramp() {
        let grid = uniform_grid(0.0, 2.0, 16).unwrap();
        let values = integrate_to_monotone(&grid, &[0.7; 16]);
        for (g, v) in grid.iter().zip(&values) {
            assert!((v - (0.7 + 2e-9 * g)).abs() < 1e-15);
        }
        let map = MonotoneMap::new(grid, values).unwrap();
        assert!(map.min_gap() > 0.0);
    }

    #[test]
    fn trapezoid_of_linear_path() {
        // f(g) = g on [0, 1]; the trapezoid rule integrates it exactly to g^2 / 2
        let grid = uniform_grid(0.0, 1.0, 16).unwrap();
        let values = integrate_to_monotone(&grid, &grid);
        for (g, v) in grid.iter().zip(&values) {
            assert!((v - (g * g / 2.0 + 1e-9 * g)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_map_returns_input() {
        let map = MonotoneMap::identity(-1.0, 1.0, 32).unwrap();
        let v = [-2.0, -1.0, -0.3, 0.0, 0.77, 1.0, 3.5];
        for (a, b) in v.iter().zip(apply_map(&map, &v)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn map_preserves_ranks_and_mqv() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..300).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|a| a.sin() + 0.3 * rng.random::<f64>()).collect();
        let map = sample_monotone_map(-2.5, 2.5, 64, &mut rng).unwrap();
        let fx = map.apply(&x);
        let rank = |v: &[f64]| crate::qv::sort_order(v);
        assert_eq!(rank(&x), rank(&fx));

        let before = mqv_score_directed(&SamplePair::new(x, y.clone()).unwrap()).unwrap();
        let after = mqv_score_directed(&SamplePair::new(fx, y).unwrap()).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn extrapolation_is_linear_and_increasing() {
        let grid = uniform_grid(0.0, 15.0, 16).unwrap();
        let values: Vec<f64> = grid.iter().map(|g| 2.0 * g + 1.0).collect();
        let map = MonotoneMap::new(grid, values).unwrap();
        assert!((map.eval(-1.0) - (-1.0)).abs() < 1e-12);
        assert!((map.eval(20.0) - 41.0).abs() < 1e-12);
        assert!(map.eval(15.0) < map.eval(15.0 + 1e-6));
    }

    #[test]
    fn gp_marginal_variance_is_one() {
        let grid = uniform_grid(-3.0, 3.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let draws: Vec<Vec<f64>> = (0..10_000)
            .map(|_| sample_gp_path(&grid, 1.25, &mut rng).unwrap())
            .collect();
        for j in [0, 5, 15] {
            let col: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            let (_, std) = mean_and_std(&col);
            assert!((std * std - 1.0).abs() < 0.05, "node {j}: var {}", std * std);
        }
    }

    #[test]
    fn invalid_ranges_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_monotone_map(1.0, 1.0, 32, &mut rng).is_err());
        assert!(sample_monotone_map(0.0, 1.0, 8, &mut rng).is_err());
        assert!(MonotoneMap::new(vec![0.0; 16], vec![0.0; 16]).is_err());
        assert!(matches!(
            sample_map_for(&[2.0, 2.0], 32, &mut rng),
            Err(Error::DegenerateInput(_))
        ));
    }
}
