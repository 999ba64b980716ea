//! Boundary geometry of the excised domain and the Penrose-type inequalities.
//!
//! Surfaces are star-shaped about a center and parametrized radially by the
//! unit sphere, `x = c + rho(theta) theta`, so surface integrals reuse
//! [`SphereGrid`] with the area element `rho^{n-1} / <nu, theta>`.
//! The second fundamental form `L` is taken with the sign making round
//! spheres `L = I / r`, and `nu` is the normal pointing to infinity.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mass::{default_schedule, equivalent_constant, evaluate, mass_lower_bound, Evaluator, LowerBound};
use crate::profile::{norm, MetricSpec};
use crate::quadrature::{sphere_area, SphereGrid};
use crate::symfun::{cone_membership, newton_tensor, ConeLabel, EigenvalueVector, SymMatrix, CONE_TOL};

/// Relative tolerance of the horizon equation `H = (n-1) <du, nu>`.
pub const HORIZON_TOL: f64 = 1e-8;
/// Relative tolerance on the variation of `u` along a boundary surface.
pub const CONSTANT_TOL: f64 = 1e-9;
/// Minimum gap between components, as a fraction of the larger diameter.
pub const SEPARATION_FRACTION: f64 = 0.1;

/// A closed hypersurface star-shaped about its center.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StarSurface {
    Sphere { center: Vec<f64>, radius: f64 },
    /// `y_1^2/a^2 + sum_{j>1} y_j^2/b^2 = 1` with `y = x - center`.
    Ellipsoid { center: Vec<f64>, a: f64, b: f64 },
}

impl StarSurface {
    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        let s = StarSurface::Sphere { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn ellipsoid(center: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let s = StarSurface::Ellipsoid { center, a, b };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            StarSurface::Sphere { radius, .. } => *radius > 0.0 && radius.is_finite(),
            StarSurface::Ellipsoid { a, b, .. } => *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if !ok {
            return Err(Error::Domain(format!("degenerate surface {self:?}")));
        }
        Ok(())
    }

    pub fn center(&self) -> &[f64] {
        match self {
            StarSurface::Sphere { center, .. } | StarSurface::Ellipsoid { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    /// Radius of the smallest centered ball containing the surface.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            StarSurface::Sphere { radius, .. } => *radius,
            StarSurface::Ellipsoid { a, b, .. } => a.max(*b),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.bounding_radius()
    }

    /// Radial support `rho(theta)` for a unit vector `theta`.
    pub fn support(&self, theta: &[f64]) -> f64 {
        match self {
            StarSurface::Sphere { radius, .. } => *radius,
            StarSurface::Ellipsoid { a, b, .. } => {
                let q = theta[0] * theta[0] / (a * a) + theta[1..].iter().map(|t| t * t).sum::<f64>() / (b * b);
                1.0 / q.sqrt()
            }
        }
    }

    pub fn point(&self, theta: &[f64]) -> Vec<f64> {
        let rho = self.support(theta);
        self.center().iter().zip(theta).map(|(c, t)| c + rho * t).collect()
    }

    /// Gradient and Hessian of a defining function `F` with `F < 0` inside.
    fn level_derivatives(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let y: Vec<f64> = x.iter().zip(self.center()).map(|(a, c)| a - c).collect();
        let diag: Vec<f64> = match self {
            StarSurface::Sphere { .. } => vec![2.0; n],
            StarSurface::Ellipsoid { a, b, .. } => {
                (0..n).map(|i| if i == 0 { 2.0 / (a * a) } else { 2.0 / (b * b) }).collect()
            }
        };
        let grad = DVector::from_fn(n, |i, _| diag[i] * y[i]);
        (grad, DMatrix::from_diagonal(&DVector::from_vec(diag)))
    }

    /// Same surface scaled by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> Self {
        let c: Vec<f64> = self.center().iter().map(|v| v * lambda).collect();
        match self {
            StarSurface::Sphere { radius, .. } => StarSurface::Sphere { center: c, radius: radius * lambda },
            StarSurface::Ellipsoid { a, b, .. } => StarSurface::Ellipsoid { center: c, a: a * lambda, b: b * lambda },
        }
    }
}

/// Unit normal, orthonormal tangent frame and second fundamental form at a
/// surface point.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    pub point: Vec<f64>,
    pub normal: DVector<f64>,
    /// Columns `e_1 .. e_{n-1}`.
    pub tangents: DMatrix<f64>,
    pub l: SymMatrix,
}

impl SurfaceFrame {
    pub fn mean_curvature(&self) -> f64 {
        self.l.trace()
    }

    /// `sigma_0(L) .. sigma_{n-1}(L)`.
    pub fn sigma_l(&self) -> Vec<f64> {
        self.l.sigmas()
    }

    pub fn principal_curvatures(&self) -> EigenvalueVector {
        self.l.eigenvalues()
    }
}

/// Orthonormal basis of the complement of the unit vector `nu`, from the
/// Householder reflection taking `e_n` to `nu`.
fn tangent_basis(nu: &DVector<f64>) -> DMatrix<f64> {
    let n = nu.len();
    let mut v = -nu.clone();
    v[n - 1] += 1.0;
    let vv = v.norm_squared();
    let h = if vv < 1e-24 { DMatrix::identity(n, n) } else { DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv) };
    h.columns(0, n - 1).into_owned()
}

/// `L = P D^2F P / |DF|` restricted to the tangent space, outward normal
/// `DF / |DF|`.
pub fn second_fundamental_form(surface: &StarSurface, point: &[f64]) -> Result<SurfaceFrame> {
    let (grad, hess) = surface.level_derivatives(point);
    let g = grad.norm();
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("surface is degenerate at {point:?}")));
    }
    let normal = grad / g;
    let tangents = tangent_basis(&normal);
    let l = tangents.transpose() * hess * &tangents / g;
    Ok(SurfaceFrame { point: point.to_vec(), normal, tangents, l: SymMatrix::from_symmetric((&l + l.transpose()) * 0.5) })
}

/// Surface data combined with the 2-jet of `u`.
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    pub surface: SurfaceFrame,
    pub u: f64,
    pub gradient: DVector<f64>,
    pub hessian: SymMatrix,
    /// `<du, nu>`.
    pub du_normal: f64,
    /// Tangential block `B'` of `D^2u`.
    pub tangential_hessian: SymMatrix,
}

impl BoundaryFrame {
    pub fn new(spec: &MetricSpec, surface: &StarSurface, point: &[f64]) -> Result<Self> {
        let frame = second_fundamental_form(surface, point)?;
        let jet = spec.jet_at(point)?;
        let du_normal = jet.gradient.dot(&frame.normal);
        let b = frame.tangents.transpose() * jet.hessian.matrix() * &frame.tangents;
        Ok(Self {
            u: jet.value,
            du_normal,
            tangential_hessian: SymMatrix::from_symmetric((&b + b.transpose()) * 0.5),
            gradient: jet.gradient,
            hessian: jet.hessian,
            surface: frame,
        })
    }

    /// `H - (n-1) <du, nu>`.
    pub fn horizon_residual(&self) -> f64 {
        let n = self.gradient.len();
        self.surface.mean_curvature() - (n - 1) as f64 * self.du_normal
    }

    /// `T_{k-1}(D^2u)^{ij} u_j nu_i`.
    pub fn flux_hessian_route(&self, k: usize) -> Result<f64> {
        let t = newton_tensor(k - 1, &self.hessian)?;
        Ok((t.matrix() * &self.gradient).dot(&self.surface.normal))
    }

    /// `<du, nu>^k sigma_{k-1}(L)`, valid when `u` is constant on the surface.
    pub fn flux_curvature_route(&self, k: usize) -> Result<f64> {
        Ok(self.du_normal.powi(k as i32) * self.surface.l.sigma(k - 1)?)
    }

    /// `sup |B' - <du, nu> L|`, zero when `u` is constant on the surface.
    pub fn boundary_hessian_defect(&self) -> f64 {
        (self.tangential_hessian.matrix() - self.surface.l.matrix() * self.du_normal).amax()
    }
}

/// Grid nodes mapped onto `surface` with their area weights.
pub struct SurfaceSamples {
    pub points: Vec<Vec<f64>>,
    /// `w_i rho^{n-1} / <nu, theta>`.
    pub weights: Vec<f64>,
}

impl SurfaceSamples {
    pub fn new(surface: &StarSurface, grid: &SphereGrid) -> Result<Self> {
        if grid.dim() != surface.dim() {
            return Err(Error::Domain(format!("grid dimension {} differs from surface dimension {}", grid.dim(), surface.dim())));
        }
        let n = surface.dim();
        let pairs = grid.map_nodes(|theta| {
            let x = surface.point(theta);
            let frame = second_fundamental_form(surface, &x)?;
            let cos = frame.normal.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
            Ok((x, surface.support(theta).powi(n as i32 - 1) / cos))
        })?;
        let (points, elements): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let weights = elements.iter().zip(grid.weights()).map(|(e, w)| e * w).collect();
        Ok(Self { points, weights })
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn frames(&self, spec: &MetricSpec, surface: &StarSurface) -> Result<Vec<BoundaryFrame>> {
        use rayon::prelude::*;
        self.points.par_iter().map(|x| BoundaryFrame::new(spec, surface, x)).collect()
    }
}

/// Horizon equation residual at each sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonCheck {
    pub max_residual: f64,
    pub max_mean_curvature: f64,
    pub is_horizon: bool,
}

pub fn horizon_residual(spec: &MetricSpec, surface: &StarSurface, grid: &SphereGrid) -> Result<Vec<f64>> {
    let samples = SurfaceSamples::new(surface, grid)?;
    Ok(samples.frames(spec, surface)?.iter().map(BoundaryFrame::horizon_residual).collect())
}

fn horizon_check(frames: &[BoundaryFrame]) -> HorizonCheck {
    let max_residual = frames.iter().map(|f| f.horizon_residual().abs()).fold(0.0, f64::max);
    let max_h = frames.iter().map(|f| f.surface.mean_curvature().abs()).fold(0.0, f64::max);
    HorizonCheck { max_residual, max_mean_curvature: max_h, is_horizon: max_residual <= HORIZON_TOL * (1.0 + max_h) }
}

/// Largest `|u(x) - u(x_0)|` over the samples, with the point attaining it.
fn u_variation(frames: &[BoundaryFrame]) -> (f64, Vec<f64>) {
    let u0 = frames[0].u;
    let mut worst = (0.0, frames[0].surface.point.clone());
    for f in frames {
        let d = (f.u - u0).abs();
        if d > worst.0 {
            worst = (d, f.surface.point.clone());
        }
    }
    worst
}

fn u_is_constant(frames: &[BoundaryFrame], deviation: f64) -> bool {
    deviation <= CONSTANT_TOL * (1.0 + frames[0].u.abs())
}

/// Both sides of `T_{k-1}(D^2u)^{ij} u_j nu_i = <du, nu>^k sigma_{k-1}(L)`
/// integrated over the surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFlux {
    pub hessian_route: f64,
    pub curvature_route: f64,
    /// Largest pointwise `|lhs - rhs| / (1 + |lhs|)`.
    pub max_pointwise_defect: f64,
    pub area: f64,
}

pub fn boundary_flux(spec: &MetricSpec, surface: &StarSurface, k: usize, grid: &SphereGrid) -> Result<BoundaryFlux> {
    let samples = SurfaceSamples::new(surface, grid)?;
    let frames = samples.frames(spec, surface)?;
    boundary_flux_from(&samples, &frames, k)
}

fn boundary_flux_from(samples: &SurfaceSamples, frames: &[BoundaryFrame], k: usize) -> Result<BoundaryFlux> {
    let (deviation, point) = u_variation(frames);
    if !u_is_constant(frames, deviation) {
        return Err(Error::NotConstantOnSurface { deviation, point });
    }
    let lhs = frames.iter().map(|f| f.flux_hessian_route(k)).collect::<Result<Vec<f64>>>()?;
    let rhs = frames.iter().map(|f| f.flux_curvature_route(k)).collect::<Result<Vec<f64>>>()?;
    let defect = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs() / (1.0 + a.abs())).fold(0.0, f64::max);
    Ok(BoundaryFlux {
        hessian_route: samples.integrate(&lhs),
        curvature_route: samples.integrate(&rhs),
        max_pointwise_defect: defect,
        area: samples.area(),
    })
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|x| x as f64).product()
}

/// Successive lower bounds for `int T_{k-1}(D^2u)^{ij} u_j nu_i dS` on a
/// horizon, in the order they appear in the chain of inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureChain {
    /// `int (n-1)^{-k} sigma_1(L)^k sigma_{k-1}(L)`.
    pub curvature_integral: f64,
    /// Area chain: Holder-type steps (absent for `k = 1`), then
    /// `(n-1)!/((k-1)!(n-k)!) omega^{(2k-1)/(n-1)} |S|^{(n-2k)/(n-1)}`.
    pub area_steps: Vec<f64>,
    /// Scalar chain: `(2k-1)!(n-2k)!/((k-1)!(n-k)!) int sigma_{2k-1}(L)`, then
    /// `(n-1)!/((k-1)!(n-k)!) omega^{(2k-3)/(n-3)} (int 2 sigma_2(L)/((n-1)(n-2)))^{(n-2k)/(n-3)}`.
    /// Empty for `n <= 3`.
    pub scalar_steps: Vec<f64>,
    pub area: f64,
    /// `int 2 sigma_2(L) dS`.
    pub scalar_integral: f64,
}

impl CurvatureChain {
    /// Each step is no larger than the previous one, up to `tol` relative.
    pub fn is_monotone(&self, tol: f64) -> bool {
        let ok = |steps: &[f64]| {
            let mut prev = self.curvature_integral;
            steps.iter().all(|&s| {
                let r = s <= prev + tol * (1.0 + prev.abs());
                prev = s;
                r
            })
        };
        ok(&self.area_steps) && ok(&self.scalar_steps)
    }
}

pub fn curvature_chain(samples: &SurfaceSamples, frames: &[BoundaryFrame], n: usize, k: usize) -> Result<CurvatureChain> {
    let omega = sphere_area(n - 1);
    let sig: Vec<Vec<f64>> = frames.iter().map(|f| f.surface.sigma_l()).collect();
    let nf = (n - 1) as f64;
    let curv: Vec<f64> = sig.iter().map(|s| s[1].powi(k as i32) * s[k - 1] / nf.powi(k as i32)).collect();
    let area = samples.area();
    let binom = factorial(n - 1) / (factorial(k - 1) * factorial(n - k));
    let mut area_steps = Vec::new();
    if k >= 2 {
        let falling: f64 = ((n - k + 1)..n).map(|x| x as f64).product();
        let kf = k as f64;
        let c_h = (factorial(k - 1) / falling).powf(kf / (kf - 1.0));
        let e = (2.0 * kf - 1.0) / (kf - 1.0);
        let powered: Vec<f64> = sig.iter().map(|s| s[k - 1].max(0.0).powf(e)).collect();
        let plain: Vec<f64> = sig.iter().map(|s| s[k - 1]).collect();
        area_steps.push(c_h * samples.integrate(&powered));
        area_steps.push(c_h * samples.integrate(&plain).max(0.0).powf(e) * area.powf(-kf / (kf - 1.0)));
    }
    let ef = (n - 2 * k) as f64 / nf;
    area_steps.push(binom * omega.powf((2 * k - 1) as f64 / nf) * area.powf(ef));
    let s2: Vec<f64> = sig.iter().map(|s| 2.0 * s.get(2).copied().unwrap_or(0.0)).collect();
    let scalar_integral = samples.integrate(&s2);
    let mut scalar_steps = Vec::new();
    if n > 3 {
        let s_top: Vec<f64> = sig.iter().map(|s| s[2 * k - 1]).collect();
        let c_nm = factorial(2 * k - 1) * factorial(n - 2 * k) / (factorial(k - 1) * factorial(n - k));
        scalar_steps.push(c_nm * samples.integrate(&s_top));
        let m = (n - 3) as f64;
        let base = scalar_integral / ((n - 1) * (n - 2)) as f64;
        scalar_steps.push(binom * omega.powf((2.0 * k as f64 - 3.0) / m) * base.max(0.0).powf((n - 2 * k) as f64 / m));
    }
    Ok(CurvatureChain { curvature_integral: samples.integrate(&curv), area_steps, scalar_steps, area, scalar_integral })
}

/// `(|S| / omega)^{(n-2k)/(n-1)}`.
pub fn rhs_area(area: f64, n: usize, k: usize) -> f64 {
    (area / sphere_area(n - 1)).powf((n - 2 * k) as f64 / (n - 1) as f64)
}

/// `(int R / ((n-1)(n-2) omega))^{(n-2k)/(n-3)}` with `R = 2 sigma_2(L)`.
pub fn rhs_scalar(scalar_integral: f64, n: usize, k: usize) -> Option<f64> {
    if n <= 3 {
        return None;
    }
    let base = scalar_integral / (((n - 1) * (n - 2)) as f64 * sphere_area(n - 1));
    Some(base.max(0.0).powf((n - 2 * k) as f64 / (n - 3) as f64))
}

/// Hypotheses of the Penrose-type inequalities checked on one surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceCertificate {
    pub surface: StarSurface,
    pub area: f64,
    pub horizon: HorizonCheck,
    pub u_deviation: f64,
    pub u_constant: bool,
    /// `L` in `Gamma_{k-1}^+` at every sample (vacuous for `k = 1`).
    pub l_in_cone_k_minus_1: bool,
    /// `L` in `Gamma_{2k-1}` at every sample.
    pub l_in_cone_2k_minus_1: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<BoundaryFlux>,
    pub chain: CurvatureChain,
    pub rhs_area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_scalar: Option<f64>,
}

pub fn certify_surface(spec: &MetricSpec, surface: &StarSurface, grid: &SphereGrid) -> Result<SurfaceCertificate> {
    let (n, k) = (spec.n, spec.k);
    let samples = SurfaceSamples::new(surface, grid)?;
    let frames = samples.frames(spec, surface)?;
    let horizon = horizon_check(&frames);
    let (u_deviation, _) = u_variation(&frames);
    let u_constant = u_is_constant(&frames, u_deviation);
    let in_cone = |label: ConeLabel| -> Result<bool> {
        if label.k == 0 {
            return Ok(true);
        }
        for f in &frames {
            if !cone_membership(&f.surface.principal_curvatures(), label, CONE_TOL)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let l_in_cone_k_minus_1 = in_cone(ConeLabel::open(k - 1))?;
    let l_in_cone_2k_minus_1 = in_cone(ConeLabel::closed(2 * k - 1))?;
    let flux = if u_constant { Some(boundary_flux_from(&samples, &frames, k)?) } else { None };
    let chain = curvature_chain(&samples, &frames, n, k)?;
    Ok(SurfaceCertificate {
        surface: surface.clone(),
        area: chain.area,
        horizon,
        u_deviation,
        u_constant,
        l_in_cone_k_minus_1,
        l_in_cone_2k_minus_1,
        flux,
        rhs_area: rhs_area(chain.area, n, k),
        rhs_scalar: rhs_scalar(chain.scalar_integral, n, k),
        chain,
    })
}

/// Smallest gap between distinct components minus the required separation;
/// negative when two components are too close.
pub fn separation_margin(surfaces: &[StarSurface]) -> f64 {
    let mut margin = f64::INFINITY;
    for (i, a) in surfaces.iter().enumerate() {
        for b in &surfaces[i + 1..] {
            let d: Vec<f64> = a.center().iter().zip(b.center()).map(|(x, y)| x - y).collect();
            let gap = norm(&d) - a.bounding_radius() - b.bounding_radius();
            margin = margin.min(gap - SEPARATION_FRACTION * a.diameter().max(b.diameter()));
        }
    }
    margin
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Withheld,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub reasons: Vec<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

/// `lk_term + grad_term + sum_i rhs_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiddleTerms {
    pub lk_term: f64,
    pub grad_term: f64,
    /// `(k-1)!(n-k)!/((n-1)! omega) sum_i int_{S_i} T_{k-1}(D^2u)^{ij} u_j nu_i`,
    /// when `u` is constant on every surface.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_term: Option<f64>,
    pub area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub area: Verdict,
    pub scalar: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenroseReport {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub mass: f64,
    pub mass_error: f64,
    pub mass_evaluator: String,
    pub rhs_area: Vec<f64>,
    pub rhs_scalar: Vec<Option<f64>>,
    pub rhs_area_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_scalar_total: Option<f64>,
    /// `(sum_i |S_i| / omega)^{(n-2k)/(n-1)}`.
    pub rhs_area_aggregate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_scalar_aggregate: Option<f64>,
    pub ratio_area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_scalar: Option<f64>,
    pub middle_terms: MiddleTerms,
    pub lower_bound: LowerBound,
    pub separation_margin: f64,
    pub verdicts: Verdicts,
    pub hypothesis_certificates: Vec<SurfaceCertificate>,
}

/// Relative slack used by the verdicts.
pub const VERDICT_TOL: f64 = 1e-6;

/// The boundary spheres of the excised balls of `spec`.
pub fn excised_surfaces(spec: &MetricSpec) -> Result<Vec<StarSurface>> {
    spec.excised.iter().map(|b| StarSurface::sphere(b.center.clone(), b.radius)).collect()
}

/// Checks both Penrose-type inequalities for the surfaces bounding the
/// excised domain.
pub fn penrose_check(spec: &MetricSpec, surfaces: &[StarSurface], grid: &SphereGrid, r_max: f64) -> Result<PenroseReport> {
    let (n, k) = (spec.n, spec.k);
    if surfaces.is_empty() {
        return Err(Error::Precondition("Penrose check needs at least one boundary surface".into()));
    }
    spec.check_well_defined()?;
    let evaluator = if spec.is_radial() { Evaluator::Spherical } else { Evaluator::Equivalent };
    let mass = evaluate(spec, evaluator, grid, &default_schedule(spec))?;
    let volume_grid = SphereGrid::new(n, crate::mass::volume_grid_degree(n))?;
    let lower_bound = mass_lower_bound(spec, r_max, &volume_grid)?;
    let certs = surfaces.iter().map(|s| certify_surface(spec, s, grid)).collect::<Result<Vec<_>>>()?;

    let rhs_area_v: Vec<f64> = certs.iter().map(|c| c.rhs_area).collect();
    let rhs_scalar_v: Vec<Option<f64>> = certs.iter().map(|c| c.rhs_scalar).collect();
    let rhs_area_total: f64 = rhs_area_v.iter().sum();
    let rhs_scalar_total: Option<f64> = rhs_scalar_v.iter().copied().sum();
    let total_area: f64 = certs.iter().map(|c| c.area).sum();
    let total_scalar: f64 = certs.iter().map(|c| c.chain.scalar_integral).sum();
    let volume = lower_bound.sum();
    let boundary_term = certs
        .iter()
        .map(|c| c.flux.as_ref().map(|f| f.hessian_route))
        .sum::<Option<f64>>()
        .map(|s| equivalent_constant(n, k) * s);
    let middle = MiddleTerms {
        lk_term: lower_bound.lk_term,
        grad_term: lower_bound.grad_term,
        boundary_term,
        area: volume + rhs_area_total,
        scalar: rhs_scalar_total.map(|r| volume + r),
    };
    let separation = separation_margin(surfaces);

    let mut common = Vec::new();
    if !lower_bound.guaranteed {
        common.push(format!("sigma_j(A) >= 0 fails at {} sample points", lower_bound.violation_count));
    }
    if separation < 0.0 {
        common.push("components are not separated by 10% of their diameters".to_string());
    }
    for (i, c) in certs.iter().enumerate() {
        if !c.horizon.is_horizon {
            common.push(format!("surface {i} is not a horizon (residual {:e})", c.horizon.max_residual));
        }
        if !c.u_constant {
            common.push(format!("u is not constant on surface {i} (deviation {:e})", c.u_deviation));
        }
        if !c.l_in_cone_k_minus_1 {
            common.push(format!("L is not in Gamma_{}^+ on surface {i}", k - 1));
        }
    }
    let mut scalar_reasons = common.clone();
    for (i, c) in certs.iter().enumerate() {
        if !c.l_in_cone_2k_minus_1 {
            scalar_reasons.push(format!("L is not in Gamma_{} on surface {i}", 2 * k - 1));
        }
    }
    if rhs_scalar_total.is_none() {
        scalar_reasons.push(format!("scalar form needs n > 3, got n = {n}"));
    }
    let slack = mass.error.max(VERDICT_TOL * (1.0 + mass.mass.abs()));
    let decide = |reasons: Vec<String>, middle: Option<f64>| -> Verdict {
        if !reasons.is_empty() {
            return Verdict { status: VerdictStatus::Withheld, reasons };
        }
        match middle {
            Some(m) if mass.mass + slack >= m => Verdict { status: VerdictStatus::Pass, reasons },
            Some(m) => Verdict {
                status: VerdictStatus::Fail,
                reasons: vec![format!("mass {} is below the lower bound {m}", mass.mass)],
            },
            None => Verdict { status: VerdictStatus::Withheld, reasons },
        }
    };
    let verdicts = Verdicts { area: decide(common, Some(middle.area)), scalar: decide(scalar_reasons, middle.scalar) };
    if lower_bound.violation_count > 0 {
        log::warn!("{}: Penrose verdicts withheld, metric leaves the cone at sample points", spec.label);
    }

    Ok(PenroseReport {
        label: spec.label.clone(),
        n,
        k,
        ratio_area: mass.mass / rhs_area_total,
        ratio_scalar: rhs_scalar_total.map(|r| mass.mass / r),
        mass: mass.mass,
        mass_error: mass.error,
        mass_evaluator: mass.evaluator,
        rhs_area: rhs_area_v,
        rhs_scalar: rhs_scalar_v,
        rhs_area_total,
        rhs_scalar_total,
        rhs_area_aggregate: rhs_area(total_area, n, k),
        rhs_scalar_aggregate: rhs_scalar(total_scalar, n, k),
        middle_terms: middle,
        lower_bound,
        separation_margin: separation,
        verdicts,
        hypothesis_certificates: certs,
    })
}
