//! Ordered quadratic-variation estimators.
//!
//! Sorting the sample by one variable turns the other into a discretely
//! observed process; the mean of its squared increments estimates twice the
//! expected conditional variance. From that we get the MQV causal score
//! `C_{X->Y} = 1 - (1 / (2(N-1))) * sum (y_{i+1} - y_i)^2` for standardized `y`,
//! and by polarization the mean co-quadratic variation, an estimate of
//! `E[Cov(X, Y | Z)]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Jitter scale (relative to `std(x)`) used to break ties before sorting.
pub const DEFAULT_JITTER_SCALE: f64 = 1e-9;

/// Paired observations `(x_i, y_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SamplePair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "x has {} observations but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 observations, got {}",
                x.len()
            )));
        }
        check_finite("x", &x)?;
        check_finite("y", &y)?;
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same observations with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}

/// Observations `(x_i, y_i, z_i)` for conditional statistics given a scalar `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl Triplet {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(Error::InvalidInput(format!(
                "triplet columns have lengths {}, {}, {}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 observations, got {}",
                x.len()
            )));
        }
        check_finite("x", &x)?;
        check_finite("y", &y)?;
        check_finite("z", &z)?;
        Ok(Self { x, y, z })
    }

    /// Builds a triplet from data columns laid out as `x, y, z_1, ..., z_k`.
    ///
    /// Only `k = 1` is supported; wider conditioning sets are rejected with
    /// [`Error::UnsupportedDimension`].
    pub fn from_columns(mut columns: Vec<Vec<f64>>) -> Result<Self> {
        match columns.len() {
            0..=2 => Err(Error::InvalidInput(format!(
                "expected x, y and z columns, got {} column(s)",
                columns.len()
            ))),
            3 => {
                let z = columns.pop().unwrap();
                let y = columns.pop().unwrap();
                let x = columns.pop().unwrap();
                Self::new(x, y, z)
            }
            n => Err(Error::UnsupportedDimension(n - 2)),
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|a| !a.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!(
            "{name}[{i}] is not finite ({})",
            v[i]
        ))),
        None => Ok(()),
    }
}

/// A series rescaled to sample mean 0 and sample standard deviation 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizedSeries {
    pub values: Vec<f64>,
    pub original_mean: f64,
    pub original_std: f64,
}

/// Sample mean and sample standard deviation (divisor `N - 1`).
pub fn mean_and_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|a| (a - mean) * (a - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn standardize(v: &[f64]) -> Result<StandardizedSeries> {
    if v.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "standardization needs at least 2 values, got {}",
            v.len()
        )));
    }
    let (mean, std) = mean_and_std(v);
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::DegenerateInput(
            "variable has zero variance".to_string(),
        ));
    }
    Ok(StandardizedSeries {
        values: v.iter().map(|a| (a - mean) / std).collect(),
        original_mean: mean,
        original_std: std,
    })
}

/// Indices that stably sort `keys` ascending.
pub(crate) fn sort_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    idx
}

/// Sorts the pair by `x`, breaking ties with uniform jitter in
/// `[-j, j]`, `j = jitter_scale * std(x)`, added to `x` before sorting.
///
/// The returned `x` is the jittered ordering variable; `y` is permuted
/// consistently and otherwise untouched.
pub fn sort_pair_by_x<R: Rng + ?Sized>(
    pair: &SamplePair,
    jitter_scale: f64,
    rng: &mut R,
) -> SamplePair {
    let (_, std) = mean_and_std(&pair.x);
    let half_width = jitter_scale * std;
    let x: Vec<f64> = if half_width > 0.0 {
        pair.x
            .iter()
            .map(|&a| a + rng.random_range(-half_width..=half_width))
            .collect()
    } else {
        pair.x.clone()
    };
    let order = sort_order(&x);
    SamplePair {
        x: order.iter().map(|&i| x[i]).collect(),
        y: order.iter().map(|&i| pair.y[i]).collect(),
    }
}

/// Mean of squared consecutive differences of `y` after ordering by `x`,
/// `(1/(N-1)) * sum (y_{i+1} - y_i)^2`, without any standardization.
///
/// Converges to `2 E[Var(Y|X)]`.
pub fn ordered_sq_diff_mean(x: &[f64], y: &[f64]) -> f64 {
    let order = sort_order(x);
    sq_diff_sum(&order, y) / (x.len() - 1) as f64
}

fn sq_diff_sum(order: &[usize], y: &[f64]) -> f64 {
    order
        .windows(2)
        .map(|w| {
            let d = y[w[1]] - y[w[0]];
            d * d
        })
        .sum()
}

/// MQV score `C_{X->Y}`: one minus half the mean squared increment of
/// standardized `y` ordered by `x`.
///
/// Ties in `x` keep their input order. Finite-sample values can fall outside
/// `[0, 1]` and are returned unclamped.
pub fn mqv_score_directed(pair: &SamplePair) -> Result<f64> {
    directed_score(&pair.x, &pair.y)
}

pub(crate) fn directed_score(x: &[f64], y: &[f64]) -> Result<f64> {
    let ys = standardize(y)?;
    let order = sort_order(x);
    let n = x.len() as f64;
    Ok(1.0 - sq_diff_sum(&order, &ys.values) / (2.0 * (n - 1.0)))
}

/// `C_{X->Y}` and `C_{Y->X}` for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqvScore {
    pub c_xy: f64,
    pub c_yx: f64,
}

pub fn mqv_score(pair: &SamplePair) -> Result<MqvScore> {
    score_columns(&pair.x, &pair.y)
}

pub(crate) fn score_columns(x: &[f64], y: &[f64]) -> Result<MqvScore> {
    Ok(MqvScore {
        c_xy: directed_score(x, y)?,
        c_yx: directed_score(y, x)?,
    })
}

/// Mean co-quadratic variation of `x` and `y` ordered by `z`.
///
/// Both `x` and `y` are standardized first. With `s = x + y` and `t = x - y`
/// the value is `(1/(8(N-1))) * sum [(s_{i+1}-s_i)^2 - (t_{i+1}-t_i)^2]`,
/// which tends to `E[Cov(X, Y | Z)]` of the standardized variables.
pub fn co_quadratic_variation(t: &Triplet) -> Result<f64> {
    let order = sort_order(&t.z);
    co_qv_in_order(&order, &t.x, &t.y)
}

/// Co-quadratic variation with a precomputed ordering of the conditioning
/// variable.
pub(crate) fn co_qv_in_order(order: &[usize], x: &[f64], y: &[f64]) -> Result<f64> {
    let xs = standardize(x)?.values;
    let ys = standardize(y)?.values;
    let total: f64 = order
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let ds = (xs[b] + ys[b]) - (xs[a] + ys[a]);
            let dt = (xs[b] - ys[b]) - (xs[a] - ys[a]);
            ds * ds - dt * dt
        })
        .sum();
    Ok(total / (8.0 * (order.len() - 1) as f64))
}
