//! Quadrature on round spheres `S^{n-1}` and extrapolation of shell
//! integrals to infinite radius.
//!
//! The sphere grid is a product rule in hyperspherical angles: each polar
//! angle `theta_j` carries the weight `sin^{d}(theta_j)` and gets a
//! Gauss-Gegenbauer rule in `cos(theta_j)`, the azimuth gets the trapezoid
//! rule. With `floor(D/2) + 1` polar nodes and `D + 1` azimuthal nodes the rule
//! is exact on polynomials of total degree `<= D`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// `|S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => std::f64::consts::TAU,
        _ => std::f64::consts::TAU / (d - 1) as f64 * sphere_area(d - 2),
    }
}

/// `int_{-1}^{1} (1 - t^2)^a dt` for `2a` a non-negative integer.
fn gegenbauer_mass(two_a: usize) -> f64 {
    match two_a {
        0 => 2.0,
        1 => std::f64::consts::FRAC_PI_2,
        _ => {
            let a = two_a as f64 / 2.0;
            gegenbauer_mass(two_a - 2) * 2.0 * a / (2.0 * a + 1.0)
        }
    }
}

/// Gauss rule for the weight `(1 - t^2)^{two_a/2}` on `[-1, 1]` (Golub-Welsch).
pub fn gauss_gegenbauer(points: usize, two_a: usize) -> (Vec<f64>, Vec<f64>) {
    let a = two_a as f64 / 2.0;
    let jacobi = DMatrix::from_fn(points, points, |i, j| {
        if i + 1 == j || j + 1 == i {
            let m = i.max(j) as f64;
            (m * (m + 2.0 * a) / ((2.0 * m + 2.0 * a + 1.0) * (2.0 * m + 2.0 * a - 1.0))).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mass = gegenbauer_mass(two_a);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // enforce the reflection symmetry of the exact rule
    for i in 0..points / 2 {
        let j = points - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if points % 2 == 1 {
        pairs[points / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Gauss-Legendre rule mapped to `[lo, hi]`.
pub fn gauss_legendre(points: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_gegenbauer(points, 0);
    let half = 0.5 * (hi - lo);
    (t.iter().map(|t| lo + half * (t + 1.0)).collect(), w.iter().map(|w| w * half).collect())
}

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 8;
pub const MAX_DEGREE: usize = 30;

pub fn default_degree(n: usize) -> usize {
    if n <= 6 {
        15
    } else {
        11
    }
}

/// Product quadrature on the unit sphere `S^{n-1} in R^n`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    degree: usize,
    /// Row-major unit vectors, `n` entries per node.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::Domain(format!("sphere grids support n in {MIN_DIM}..={MAX_DIM}, got {n}")));
        }
        if degree > MAX_DEGREE {
            return Err(Error::Domain(format!("grid degree {degree} exceeds {MAX_DEGREE}")));
        }
        Ok(Self::build(n, degree))
    }

    pub fn with_default_degree(n: usize) -> Result<Self> {
        Self::new(n, default_degree(n))
    }

    fn build(n: usize, degree: usize) -> Self {
        let polar = degree / 2 + 1;
        // theta_j for j = 1..=n-2 carries sin^{n-1-j}
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (1..=n - 2).map(|j| gauss_gegenbauer(polar, n - 2 - j)).collect();
        let az = degree + 1;
        let az_weight = std::f64::consts::TAU / az as f64;
        let total = polar.pow((n - 2) as u32) * az;
        let mut nodes = Vec::with_capacity(total * n);
        let mut weights = Vec::with_capacity(total);
        let mut index = vec![0usize; n - 2];
        loop {
            let mut w = az_weight;
            let mut point = vec![0.0; n];
            let mut sin_prod = 1.0;
            for (j, &i) in index.iter().enumerate() {
                let t = rules[j].0[i];
                w *= rules[j].1[i];
                point[j] = sin_prod * t;
                sin_prod *= (1.0 - t * t).max(0.0).sqrt();
            }
            for a in 0..az {
                let phi = std::f64::consts::TAU * a as f64 / az as f64;
                point[n - 2] = sin_prod * phi.cos();
                point[n - 1] = sin_prod * phi.sin();
                nodes.extend_from_slice(&point);
                weights.push(w);
            }
            // odometer over the polar indices
            let mut pos = n - 2;
            loop {
                if pos == 0 {
                    return Self { n, degree, nodes, weights };
                }
                pos -= 1;
                index[pos] += 1;
                if index[pos] < polar {
                    break;
                }
                index[pos] = 0;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Evaluates `f` at every node in parallel and returns the values in
    /// node order; the first failing node's error wins.
    pub fn map_nodes<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[f64]) -> Result<T> + Sync,
    {
        (0..self.len()).into_par_iter().map(|i| f(self.node(i))).collect()
    }

    /// `sum_i w_i values_i` in node order.
    pub fn weighted_sum(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// `r^{n-1} sum_i w_i f(r theta_i)` over the sphere of radius `r` about the origin.
///
/// Node values are computed in parallel and summed sequentially in node
/// order, so the result does not depend on the thread count.
pub fn surface_integral<F>(f: F, grid: &SphereGrid, r: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let values = grid.map_nodes(|theta| {
        let x: Vec<f64> = theta.iter().map(|t| r * t).collect();
        f(&x)
    })?;
    Ok(r.powi(grid.dim() as i32 - 1) * grid.weighted_sum(&values))
}

/// Increasing radii for a limit `r -> infinity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSchedule {
    pub radii: Vec<f64>,
}

/// Target relative size of the leading correction at the first radius.
const AUTO_FIRST_CORRECTION: f64 = 0.005;
const AUTO_COUNT: usize = 5;

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 3 {
            return Err(Error::Domain(format!("need at least 3 radii, got {}", radii.len())));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("radii must be positive, finite and strictly increasing".into()));
        }
        Ok(Self { radii })
    }

    /// `count` radii from `r0` to `rmax` in geometric progression.
    pub fn geometric(r0: f64, rmax: f64, count: usize) -> Result<Self> {
        if count < 3 || !(r0 > 0.0) || !(rmax > r0) {
            return Err(Error::Domain(format!("bad geometric schedule {r0},{rmax},{count}")));
        }
        let q = (rmax / r0).powf(1.0 / (count - 1) as f64);
        let mut radii: Vec<f64> = (0..count).map(|i| r0 * q.powi(i as i32)).collect();
        radii[count - 1] = rmax;
        Self::new(radii)
    }

    /// Parses `geometric:<r0>,<rmax>,<count>`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("expected geometric:<r0>,<rmax>,<count>, got `{text}`"));
        let body = text.strip_prefix("geometric:").ok_or_else(bad)?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let r0 = parts[0].parse::<f64>().map_err(|_| bad())?;
        let rmax = parts[1].parse::<f64>().map_err(|_| bad())?;
        let count = parts[2].parse::<usize>().map_err(|_| bad())?;
        Self::geometric(r0, rmax, count)
    }

    /// Schedule adapted to the convergence exponent `p`: the leading
    /// correction `(scale/r)^p` is about half a percent at the first radius
    /// and each step shrinks it by at least a factor 2.
    pub fn auto(scale: f64, p: Option<f64>) -> Self {
        let (start, ratio) = match p {
            Some(p) if p.is_finite() && p > 0.0 => {
                ((scale * AUTO_FIRST_CORRECTION.powf(-1.0 / p)).max(10.0), 2f64.max(2f64.powf(1.0 / p)))
            }
            _ => ((4.0 * scale).max(10.0), 2.0),
        };
        Self { radii: (0..AUTO_COUNT).map(|i| start * ratio.powi(i as i32)).collect() }
    }
}

/// Result of [`extrapolate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub error: f64,
    /// Largest absolute fit residual.
    pub residual: f64,
    /// Exponent `p` of the model in `x = r^{-p}`.
    pub exponent: f64,
    pub low_confidence: bool,
}

fn fit_c0(xs: &[f64], ys: &[f64], terms: usize) -> (f64, f64) {
    let xmax = xs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), terms + 1, |i, j| (xs[i] / xmax).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(terms + 1));
    let residual = (&a * &c - &b).amax();
    (c[0], residual)
}

fn max_terms(count: usize) -> usize {
    (count.saturating_sub(2)).clamp(1, 3)
}

/// Limit of `values` at `r -> infinity` by least squares on
/// `c0 + sum_{j=1}^{J} c_j x^j`, `x = r^{-p}`, `J = min(count - 2, 3)`.
///
/// With `p = None` the exponent is fitted. The error is the larger of the
/// largest residual and the change in `c0` when the smallest radius is dropped.
pub fn extrapolate(radii: &[f64], values: &[f64], p: Option<f64>) -> Result<Extrapolation> {
    if radii.len() != values.len() || radii.len() < 3 {
        return Err(Error::Domain("extrapolation needs at least 3 (radius, value) pairs".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("extrapolation input contains non-finite values".into()));
    }
    let spread = values.iter().fold(0.0f64, |a, &v| a.max((v - values[0]).abs()));
    let magnitude = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if spread <= 1e-15 * magnitude {
        return Ok(Extrapolation {
            limit: values[values.len() - 1],
            error: spread,
            residual: spread,
            exponent: p.unwrap_or(f64::NAN),
            low_confidence: false,
        });
    }
    let exponent = match p {
        Some(p) => p,
        None => fit_exponent(radii, values),
    };
    let xs: Vec<f64> = radii.iter().map(|r| r.powf(-exponent)).collect();
    let terms = max_terms(xs.len());
    let (limit, residual) = fit_c0(&xs, values, terms);
    let (dropped, _) = fit_c0(&xs[1..], &values[1..], max_terms(xs.len() - 1).min(terms));
    let error = residual.max((limit - dropped).abs());
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let non_monotone = diffs.windows(2).any(|d| d[0] * d[1] < 0.0);
    let wild = error > 0.1 * limit.abs().max(spread);
    Ok(Extrapolation { limit, error, residual, exponent, low_confidence: non_monotone || wild })
}

/// Exponent minimizing the residual of the two-term model.
fn fit_exponent(radii: &[f64], values: &[f64]) -> f64 {
    let cost = |p: f64| {
        let xs: Vec<f64> = radii.iter().map(|r| r.powf(-p)).collect();
        fit_c0(&xs, values, 1).1
    };
    let grid: Vec<f64> = (1..=60).map(|i| 0.1 * i as f64).collect();
    let mut best = grid[0];
    let mut best_cost = f64::INFINITY;
    for &p in &grid {
        let c = cost(p);
        if c < best_cost {
            best_cost = c;
            best = p;
        }
    }
    let (mut lo, mut hi) = ((best - 0.1).max(0.01), best + 0.1);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if cost(m1) < cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Per-radius flux values and their extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassEstimate {
    pub evaluator: String,
    pub radii: Vec<f64>,
    pub flux: Vec<f64>,
    pub limit: f64,
    pub error: f64,
    pub residual: f64,
    pub exponent: f64,
    pub low_confidence: bool,
}

/// Relative rounding floor of a summed flux value.
pub const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

impl MassEstimate {
    /// Extrapolates `flux`; the error is at least [`ROUNDOFF_FLOOR`] times the largest flux value.
    pub fn from_series(evaluator: &str, radii: Vec<f64>, flux: Vec<f64>, p: Option<f64>) -> Result<Self> {
        let e = extrapolate(&radii, &flux, p)?;
        let floor = ROUNDOFF_FLOOR * flux.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Self {
            evaluator: evaluator.to_string(),
            radii,
            flux,
            limit: e.limit,
            error: e.error.max(floor),
            residual: e.residual,
            exponent: e.exponent,
            low_confidence: e.low_confidence,
        })
    }
}
