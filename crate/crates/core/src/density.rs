//! Product-Gaussian kernel density estimate and smoothed bootstrap.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qv::mean_and_std;

/// Gaussian KDE over `D`-dimensional points with a diagonal bandwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct KdeModel<const D: usize> {
    points: Vec<[f64; D]>,
    bandwidths: [f64; D],
}

impl<const D: usize> KdeModel<D> {
    /// Builds a model with explicit bandwidths.
    pub fn new(points: Vec<[f64; D]>, bandwidths: [f64; D]) -> Result<Self> {
        if D == 0 {
            return Err(Error::InvalidInput("zero-dimensional KDE".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("KDE needs at least one point".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("KDE points must be finite".into()));
        }
        if bandwidths.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "bandwidths must be positive and finite, got {bandwidths:?}"
            )));
        }
        Ok(Self { points, bandwidths })
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn bandwidths(&self) -> &[f64; D] {
        &self.bandwidths
    }

    /// Draws `n` points from the estimated density: a uniformly chosen data
    /// point plus independent kernel noise in each coordinate.
    pub fn resample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<[f64; D]> {
        let count = self.points.len();
        (0..n)
            .map(|_| {
                let base = &self.points[rng.random_range(0..count)];
                let mut out = [0.0; D];
                for (d, o) in out.iter_mut().enumerate() {
                    let eps: f64 = StandardNormal.sample(rng);
                    *o = base[d] + self.bandwidths[d] * eps;
                }
                out
            })
            .collect()
    }
}

/// Silverman's rule for a product kernel in `d` dimensions:
/// `h_i = sigma_i * (4/(d+2))^(1/(d+4)) * N^(-1/(d+4))`.
pub fn silverman_bandwidth(std: f64, d: usize, n: usize) -> f64 {
    let d = d as f64;
    let expo = 1.0 / (d + 4.0);
    std * (4.0 / (d + 2.0)).powf(expo) * (n as f64).powf(-expo)
}

/// Fits a KDE with Silverman bandwidths per dimension.
pub fn fit_kde<const D: usize>(points: &[[f64; D]]) -> Result<KdeModel<D>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "KDE fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    let mut bandwidths = [0.0; D];
    let mut column = Vec::with_capacity(points.len());
    for (d, h) in bandwidths.iter_mut().enumerate() {
        column.clear();
        column.extend(points.iter().map(|p| p[d]));
        let (_, std) = mean_and_std(&column);
        if !(std > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "dimension {d} has zero variance"
            )));
        }
        *h = silverman_bandwidth(std, D, points.len());
    }
    KdeModel::new(points.to_vec(), bandwidths)
}

/// Zips two columns into 2-D points.
pub fn zip_points(x: &[f64], y: &[f64]) -> Vec<[f64; 2]> {
    x.iter().zip(y).map(|(&a, &b)| [a, b]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_points(n: usize, sx: f64, sy: f64) -> Vec<[f64; 2]> {
        // +-1 pattern scaled so each coordinate has sample std exactly s
        let scale = ((n - 1) as f64 / n as f64).sqrt();
        (0..n)
            .map(|i| {
                let a = if i % 2 == 0 { 1.0 } else { -1.0 };
                let b = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
                [a * sx * scale, b * sy * scale]
            })
            .collect()
    }

    #[test]
    fn silverman_two_dimensional() {
        let kde = fit_kde(&grid_points(64, 1.0, 1.0)).unwrap();
        assert!((kde.bandwidths()[0] - 0.5).abs() < 1e-12);
        assert!((kde.bandwidths()[1] - 0.5).abs() < 1e-12);

        let kde = fit_kde(&grid_points(64, 2.0, 1.0)).unwrap();
        assert!((kde.bandwidths()[0] - 1.0).abs() < 1e-12);
        assert!((kde.bandwidths()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_dimension_is_degenerate() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 3.0]).collect();
        assert!(matches!(fit_kde(&pts), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn resample_single_point_moments() {
        let kde = KdeModel::new(vec![[1.0, -2.0, 0.5]], [0.3, 0.1, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = kde.resample(100_000, &mut rng);
        for d in 0..3 {
            let col: Vec<f64> = draws.iter().map(|p| p[d]).collect();
            let (mean, std) = mean_and_std(&col);
            let h = kde.bandwidths()[d];
            assert!((mean - kde.points()[0][d]).abs() < 0.02 * h.max(1.0));
            assert!((std / h - 1.0).abs() < 0.02, "dim {d}: {std} vs {h}");
        }
    }

    #[test]
    fn tiny_bandwidth_reproduces_empirical_support() {
        let pts = vec![[0.0, 0.0], [10.0, 5.0], [-4.0, 2.0]];
        let kde = KdeModel::new(pts.clone(), [1e-12, 1e-12]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in kde.resample(200, &mut rng) {
            assert!(pts
                .iter()
                .any(|p| (p[0] - s[0]).abs() < 1e-9 && (p[1] - s[1]).abs() < 1e-9));
        }
    }

    #[test]
    fn resample_is_deterministic() {
        let kde = fit_kde(&grid_points(20, 1.0, 3.0)).unwrap();
        let a = kde.resample(50, &mut ChaCha8Rng::seed_from_u64(3));
        let b = kde.resample(50, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(KdeModel::<2>::new(vec![], [1.0, 1.0]).is_err());
        assert!(KdeModel::new(vec![[0.0, 0.0]], [0.0, 1.0]).is_err());
        assert!(fit_kde(&[[0.0, 1.0]]).is_err());
    }
}
