//! Gauss-Bonnet-Chern mass `m_k` of `(R^n \ Omega, e^{-2u} delta)`.
//!
//! Three evaluators produce per-radius flux values that are extrapolated to
//! `r -> infinity`:
//!
//! * `definition`: `c(n,k) int_{S_r} P_(k)^{ijlm} d_m g_{jl} nu_i dS` with
//!   `c(n,k) = (n-2k)! / (2^{k-1} (n-1)! omega_{n-1})`;
//! * `equivalent`: `(k-1)!(n-k)!/((n-1)! omega_{n-1}) int_{S_r} T_{k-1}(A)^{ij} u_j nu_i dS`,
//!   with the `T_{k-1}(D^2u)` variant computed alongside;
//! * `spherical`: `r^{n-k} u_r^k` for radial `u`.

use serde::Serialize;

use crate::confgeom::{lk_conformal, riemann_from_schouten, schouten, to_metric_frame, CurvatureFrame};
use crate::error::{Error, Result};
use crate::profile::MetricSpec;
use crate::quadrature::{gauss_legendre, sphere_area, surface_integral, MassEstimate, RadiusSchedule, SphereGrid};
use crate::symfun::{newton_tensor, SymMatrix};
use crate::tensor::pk_trace;

/// Absolute tolerance on `sigma_j(A)` when certifying cone hypotheses.
pub const HYPOTHESIS_TOL: f64 = 1e-9;
pub const DEFAULT_R_MAX: f64 = 160.0;

fn factorial(m: usize) -> f64 {
    (1..=m).map(|x| x as f64).product()
}

/// `c(n,k) = (n-2k)! / (2^{k-1} (n-1)! omega_{n-1})`.
pub fn definition_constant(n: usize, k: usize) -> f64 {
    factorial(n - 2 * k) / (2f64.powi(k as i32 - 1) * factorial(n - 1) * sphere_area(n - 1))
}

/// `(k-1)! (n-k)! / ((n-1)! omega_{n-1})`.
pub fn equivalent_constant(n: usize, k: usize) -> f64 {
    factorial(k - 1) * factorial(n - k) / (factorial(n - 1) * sphere_area(n - 1))
}

/// Decay exponent of `flux(r) - m_k`: `(k+1) tau - (n-2k)`, or `None` when
/// the field decays faster than any power.
pub fn convergence_exponent(spec: &MetricSpec) -> Option<f64> {
    if spec.tau.is_finite() {
        Some((spec.k + 1) as f64 * spec.tau - (spec.n - 2 * spec.k) as f64)
    } else {
        None
    }
}

pub fn default_schedule(spec: &MetricSpec) -> RadiusSchedule {
    RadiusSchedule::auto(spec.scale(), convergence_exponent(spec))
}

fn unit_normal(x: &[f64]) -> Vec<f64> {
    let r = crate::profile::norm(x);
    x.iter().map(|v| v / r).collect()
}

fn series(
    spec: &MetricSpec,
    evaluator: &str,
    schedule: &RadiusSchedule,
    flux_at: impl Fn(f64) -> Result<f64>,
) -> Result<MassEstimate> {
    spec.check_well_defined()?;
    let flux = schedule.radii.iter().map(|&r| flux_at(r)).collect::<Result<Vec<f64>>>()?;
    MassEstimate::from_series(evaluator, schedule.radii.clone(), flux, convergence_exponent(spec))
}

/// `P_(k)^{ijlm} d_m g_{jl} nu_i` at `x` on the sphere through `x`.
///
/// For `g = e^{-2u} delta`: `d_m g_{jl} = -2 u_m e^{-2u} delta_{jl}` and
/// `P^{ijlm} = e^{4u} P^{ij}_{lm}` (indices raised with `g^{-1} = e^{2u} delta`).
pub fn definition_integrand(spec: &MetricSpec, x: &[f64], k: usize) -> Result<f64> {
    let jet = spec.jet_at(x)?;
    let riem = riemann_from_schouten(&to_metric_frame(&schouten(&jet), jet.value));
    let n = x.len();
    let q = pk_trace(&riem, k)?;
    let nu = unit_normal(x);
    let du = jet.gradient.as_slice();
    let u = jet.value;
    let mut s = 0.0;
    for i in 0..n {
        for m in 0..n {
            s += q[(i, m)] * du[m] * nu[i];
        }
    }
    Ok((4.0 * u).exp() * (-2.0 * (-2.0 * u).exp()) * s)
}

/// `T_{k-1}(M)^{ij} u_j nu_i` for `M = A` (Schouten) or `M = D^2u`.
pub fn equivalent_integrand(spec: &MetricSpec, x: &[f64], k: usize, hessian_variant: bool) -> Result<f64> {
    let jet = spec.jet_at(x)?;
    let m: SymMatrix = if hessian_variant { jet.hessian.clone() } else { schouten(&jet) };
    let t = newton_tensor(k - 1, &m)?;
    let nu = unit_normal(x);
    let tu = t.matrix() * &jet.gradient;
    Ok(nu.iter().zip(tu.iter()).map(|(a, b)| a * b).sum())
}

pub fn mass_definition_form(spec: &MetricSpec, grid: &SphereGrid, schedule: &RadiusSchedule) -> Result<MassEstimate> {
    let (n, k) = (spec.n, spec.k);
    let c = definition_constant(n, k);
    series(spec, "definition", schedule, |r| {
        Ok(c * surface_integral(|x| definition_integrand(spec, x, k), grid, r)?)
    })
}

/// Schouten variant, then the `D^2u` variant.
pub fn mass_equivalent_form(
    spec: &MetricSpec,
    grid: &SphereGrid,
    schedule: &RadiusSchedule,
) -> Result<(MassEstimate, MassEstimate)> {
    let (n, k) = (spec.n, spec.k);
    let c = equivalent_constant(n, k);
    let a = series(spec, "equivalent", schedule, |r| {
        Ok(c * surface_integral(|x| equivalent_integrand(spec, x, k, false), grid, r)?)
    })?;
    let h = series(spec, "equivalent_hessian", schedule, |r| {
        Ok(c * surface_integral(|x| equivalent_integrand(spec, x, k, true), grid, r)?)
    })?;
    Ok((a, h))
}

/// Per-radius value `r^{n-k} u_r^k`.
pub fn spherical_flux(spec: &MetricSpec, r: f64) -> Result<f64> {
    let d = spec.field.radial_derivs(r)?;
    Ok(r.powi((spec.n - spec.k) as i32) * d[1].powi(spec.k as i32))
}

pub fn mass_spherical(spec: &MetricSpec, schedule: &RadiusSchedule) -> Result<MassEstimate> {
    if !spec.is_radial() {
        return Err(Error::Domain(format!("spherical evaluator needs a radial metric, `{}` is not", spec.label)));
    }
    series(spec, "spherical", schedule, |r| spherical_flux(spec, r))
}

/// A sample point where a cone hypothesis fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisViolation {
    pub point: Vec<f64>,
    pub j: usize,
    pub sigma: f64,
}

/// Truncated volume terms of the mass lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub lk_term: f64,
    pub grad_term: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_degree: usize,
    pub sample_points: usize,
    /// First few points where `sigma_j(A) < -tol` for some `j <= k`.
    pub violations: Vec<HypothesisViolation>,
    pub violation_count: usize,
    /// The hypotheses held at every sample point.
    pub guaranteed: bool,
}

impl LowerBound {
    pub fn sum(&self) -> f64 {
        self.lk_term + self.grad_term
    }
}

const SHELL_RATIO: f64 = 1.5;
const SHELL_POINTS: usize = 8;
const MAX_REPORTED_VIOLATIONS: usize = 5;

/// Degree of the angular grid used for volume integrals.
pub fn volume_grid_degree(n: usize) -> usize {
    if n <= 6 {
        7
    } else {
        5
    }
}

/// Radial shells `[a, b]` covering `[r_min, r_max]` geometrically, preceded by
/// the ball `[0, r_min]` when nothing is excised.
fn shells(r_min: f64, r_max: f64, include_core: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if include_core {
        out.push((0.0, r_min));
    }
    let count = ((r_max / r_min).ln() / SHELL_RATIO.ln()).ceil().max(1.0) as usize;
    let q = (r_max / r_min).powf(1.0 / count as f64);
    for i in 0..count {
        out.push((r_min * q.powi(i as i32), r_min * q.powi(i as i32 + 1)));
    }
    out
}

/// Truncated lower bound
/// `(n-2k)!/(2^k (n-1)! omega) int e^{(n-2k)u} L_k dvol_g
///  + (n-2k)/(2^k omega) int e^{(n-2k)u} |du|_g^{2k} dvol_g`
/// over `r_min <= |x| <= r_max` outside the excised balls.
///
/// `|du|_g^{2k} = e^{2ku} |du|^{2k}` and `dvol_g = e^{-nu} dx`. Points with
/// `sigma_j(A) < -tol` for some `j <= k` are recorded; the bound is then not
/// guaranteed but still computed.
pub fn mass_lower_bound(spec: &MetricSpec, r_max: f64, grid: &SphereGrid) -> Result<LowerBound> {
    let (n, k) = (spec.n, spec.k);
    let nf = n as f64;
    let kf = k as f64;
    let horizon = spec.excised.iter().map(|b| crate::profile::norm(&b.center) + b.radius).fold(0.0, f64::max);
    let r_min = (horizon * 1.01).max(0.5);
    if !(r_max > r_min) {
        return Err(Error::Domain(format!("r_max = {r_max} must exceed the inner radius {r_min}")));
    }
    let omega = sphere_area(n - 1);
    let c_l = factorial(n - 2 * k) / (2f64.powi(k as i32) * factorial(n - 1) * omega);
    let c_g = (nf - 2.0 * kf) / (2f64.powi(k as i32) * omega);
    let mut lk_term = 0.0;
    let mut grad_term = 0.0;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut samples = 0;
    for (a, b) in shells(r_min, r_max, spec.excised.is_empty()) {
        let (rs, ws) = gauss_legendre(SHELL_POINTS, a, b);
        for (&r, &wr) in rs.iter().zip(&ws) {
            let values = grid.map_nodes(|theta| {
                let x: Vec<f64> = theta.iter().map(|t| r * t).collect();
                if spec.is_excised(&x) {
                    return Ok((0.0, 0.0, None));
                }
                let frame = CurvatureFrame::at(spec, &x)?;
                let u = frame.jet.value;
                let dvol = (-nf * u).exp();
                let weight = ((nf - 2.0 * kf) * u).exp();
                let lk = lk_conformal(&frame.jet, k)?;
                let grad_g = (2.0 * kf * u).exp() * frame.jet.grad_norm_sq().powi(k as i32);
                let bad = (1..=k).find(|&j| frame.sigma_a[j] < -HYPOTHESIS_TOL).map(|j| (x.clone(), j, frame.sigma_a[j]));
                Ok((weight * lk * dvol, weight * grad_g * dvol, bad))
            })?;
            let shell = wr * r.powi(n as i32 - 1);
            for (i, (l, g, bad)) in values.into_iter().enumerate() {
                let w = shell * grid.weight(i);
                lk_term += w * l;
                grad_term += w * g;
                samples += 1;
                if let Some((point, j, sigma)) = bad {
                    violation_count += 1;
                    if violations.len() < MAX_REPORTED_VIOLATIONS {
                        violations.push(HypothesisViolation { point, j, sigma });
                    }
                }
            }
        }
    }
    if violation_count > 0 {
        log::warn!(
            "{}: cone hypothesis fails at {violation_count} of {samples} sample points; lower bound not guaranteed",
            spec.label
        );
    }
    Ok(LowerBound {
        lk_term: c_l * lk_term,
        grad_term: c_g * grad_term,
        r_min,
        r_max,
        grid_degree: grid.degree(),
        sample_points: samples,
        violations,
        violation_count,
        guaranteed: violation_count == 0,
    })
}

/// `int_{S_r} T_{k-1}(D^2u)^{ij} u_j nu_i dS - k int_{B_r} sigma_k(D^2u) dx`.
pub fn green_defect(spec: &MetricSpec, r: f64, grid: &SphereGrid, shells_count: usize) -> Result<(f64, f64)> {
    let k = spec.k;
    let surface = surface_integral(|x| equivalent_integrand(spec, x, k, true), grid, r)?;
    let mut volume = 0.0;
    for s in 0..shells_count {
        let (a, b) = (r * s as f64 / shells_count as f64, r * (s + 1) as f64 / shells_count as f64);
        let (rs, ws) = gauss_legendre(SHELL_POINTS, a, b);
        for (&rr, &wr) in rs.iter().zip(&ws) {
            volume += wr * surface_integral(|x| spec.jet_at(x)?.hessian.sigma(k), grid, rr)?;
        }
    }
    Ok((surface, k as f64 * volume))
}

/// Which positive-mass hypothesis family a metric satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `sigma_j(A) >= 0` for all `j <= k`.
    GardingCone,
    /// `k` even and `(-1)^j sigma_j(A) >= 0` for all `j <= k`.
    AlternatingCone,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityAudit {
    pub regime: Regime,
    /// Radii where the hypotheses were checked.
    pub r_min: f64,
    pub r_max: f64,
    pub radii_checked: usize,
    /// `min_r sigma_j(A)` for `j = 1..=k`.
    pub min_sigma: Vec<f64>,
    /// `min_r (-1)^j sigma_j(A)` for `j = 1..=k`.
    pub min_alternating: Vec<f64>,
    pub mass: Option<f64>,
    pub mass_error: Option<f64>,
    pub mass_nonnegative: Option<bool>,
    pub gradient_vanishes: bool,
    /// With `du = 0` everywhere the mass must vanish.
    pub rigidity_consistent: Option<bool>,
}

const AUDIT_RADII: usize = 200;

/// Classifies a radial metric against the positive-mass hypotheses on a
/// geometric grid of radii and checks the sign of the mass.
pub fn positivity_audit(spec: &MetricSpec, r_max: f64) -> Result<PositivityAudit> {
    if !spec.is_radial() {
        return Err(Error::Domain(format!("positivity audit needs a radial metric, `{}` is not", spec.label)));
    }
    let (n, k) = (spec.n, spec.k);
    let horizon = spec.excised.iter().map(|b| b.radius).fold(0.0, f64::max);
    let r_min = if horizon > 0.0 { horizon } else { 1e-3 };
    let q = (r_max / r_min).powf(1.0 / (AUDIT_RADII - 1) as f64);
    let mut min_sigma = vec![f64::INFINITY; k];
    let mut min_alt = vec![f64::INFINITY; k];
    let mut max_grad: f64 = 0.0;
    for i in 0..AUDIT_RADII {
        let r = r_min * q.powi(i as i32);
        let mut x = vec![0.0; n];
        x[0] = r;
        let jet = spec.jet_at(&x)?;
        max_grad = max_grad.max(jet.gradient.amax());
        let sig = schouten(&jet).sigmas();
        for j in 1..=k {
            min_sigma[j - 1] = min_sigma[j - 1].min(sig[j]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            min_alt[j - 1] = min_alt[j - 1].min(sign * sig[j]);
        }
    }
    let regime = if min_sigma.iter().all(|&s| s >= -HYPOTHESIS_TOL) {
        Regime::GardingCone
    } else if k % 2 == 0 && min_alt.iter().all(|&s| s >= -HYPOTHESIS_TOL) {
        Regime::AlternatingCone
    } else {
        Regime::NotApplicable
    };
    let gradient_vanishes = max_grad == 0.0;
    let (mass, mass_error) = match regime {
        Regime::NotApplicable => (None, None),
        _ => {
            let est = mass_spherical(spec, &default_schedule(spec))?;
            (Some(est.limit), Some(est.error))
        }
    };
    let tol = |err: f64| err.max(1e-10);
    Ok(PositivityAudit {
        regime,
        r_min,
        r_max,
        radii_checked: AUDIT_RADII,
        min_sigma,
        min_alternating: min_alt,
        mass,
        mass_error,
        mass_nonnegative: mass.zip(mass_error).map(|(m, e)| m >= -tol(e)),
        gradient_vanishes,
        rigidity_consistent: if gradient_vanishes {
            mass.zip(mass_error).map(|(m, e)| m.abs() <= tol(e))
        } else {
            None
        },
    })
}

/// Selectable evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    Definition,
    Equivalent,
    Spherical,
}

impl Evaluator {
    pub const ALL: [Evaluator; 3] = [Evaluator::Definition, Evaluator::Equivalent, Evaluator::Spherical];

    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Definition => "definition",
            Evaluator::Equivalent => "equivalent",
            Evaluator::Spherical => "spherical",
        }
    }

    pub fn parse(s: &str) -> Result<Vec<Evaluator>> {
        match s {
            "definition" => Ok(vec![Evaluator::Definition]),
            "equivalent" => Ok(vec![Evaluator::Equivalent]),
            "spherical" => Ok(vec![Evaluator::Spherical]),
            "all" => Ok(Self::ALL.to_vec()),
            other => Err(Error::Domain(format!(
                "unknown evaluator `{other}`; expected definition, equivalent, spherical or all"
            ))),
        }
    }

    /// Whether the evaluator can run on `spec`.
    pub fn applicable(self, spec: &MetricSpec) -> bool {
        match self {
            Evaluator::Spherical => spec.is_radial(),
            _ => (crate::quadrature::MIN_DIM..=crate::quadrature::MAX_DIM).contains(&spec.n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub c_nk: f64,
    pub equivalent: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassReport {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub evaluator: String,
    pub radii: Vec<f64>,
    pub flux: Vec<f64>,
    pub mass: f64,
    pub error: f64,
    pub fit_residual: f64,
    pub fit_exponent: f64,
    pub low_confidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_mass: Option<f64>,
    /// The `T_{k-1}(D^2u)` variant of the equivalent form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_variant: Option<MassEstimate>,
    pub constants: Constants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<LowerBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<PositivityAudit>,
}

impl MassReport {
    pub fn new(spec: &MetricSpec, estimate: MassEstimate) -> Self {
        Self {
            label: spec.label.clone(),
            n: spec.n,
            k: spec.k,
            evaluator: estimate.evaluator.clone(),
            radii: estimate.radii,
            flux: estimate.flux,
            mass: estimate.limit,
            error: estimate.error,
            fit_residual: estimate.residual,
            fit_exponent: estimate.exponent,
            low_confidence: estimate.low_confidence,
            expected_mass: spec.expected_mass(),
            hessian_variant: None,
            constants: Constants {
                c_nk: definition_constant(spec.n, spec.k),
                equivalent: equivalent_constant(spec.n, spec.k),
                omega: sphere_area(spec.n - 1),
            },
            lower_bound: None,
            hypotheses: None,
        }
    }
}

/// Runs one evaluator with the given grid and schedule.
pub fn evaluate(
    spec: &MetricSpec,
    evaluator: Evaluator,
    grid: &SphereGrid,
    schedule: &RadiusSchedule,
) -> Result<MassReport> {
    match evaluator {
        Evaluator::Definition => Ok(MassReport::new(spec, mass_definition_form(spec, grid, schedule)?)),
        Evaluator::Equivalent => {
            let (a, h) = mass_equivalent_form(spec, grid, schedule)?;
            let mut report = MassReport::new(spec, a);
            report.hessian_variant = Some(h);
            Ok(report)
        }
        Evaluator::Spherical => Ok(MassReport::new(spec, mass_spherical(spec, schedule)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{builtin, schwarzschild_profile, Field};

    #[test]
    fn constants() {
        // c(5,1) = 3! / (1 * 4! * omega_4)
        assert!((definition_constant(5, 1) - 6.0 / (24.0 * sphere_area(4))).abs() < 1e-15);
        assert!((equivalent_constant(6, 2) - 24.0 / (120.0 * sphere_area(5))).abs() < 1e-15);
    }

    #[test]
    fn spherical_examples() {
        let s = schwarzschild_profile(5, 1, 2.0).unwrap();
        let v = spherical_flux(&s, 10.0).unwrap();
        assert!((v - 2.0 / (1.0 + 1e-3)).abs() < 1e-12);
        for (n, k, m) in [(5, 1, 2.0), (7, 3, 1.0), (6, 2, 1.0)] {
            let s = schwarzschild_profile(n, k, m).unwrap();
            let est = mass_spherical(&s, &default_schedule(&s)).unwrap();
            let want = m.powi(k as i32);
            assert!((est.limit - want).abs() < 1e-3 * want, "({n},{k},{m}): {est:?}");
        }
        let flat = MetricSpec::flat(6, 2).unwrap();
        assert_eq!(mass_spherical(&flat, &default_schedule(&flat)).unwrap().limit, 0.0);
        assert!(mass_spherical(&builtin("gaussian_bump", 6, 2).unwrap(), &default_schedule(&flat)).is_err());
    }

    #[test]
    fn definition_and_equivalent_on_schwarzschild() {
        let s = schwarzschild_profile(5, 1, 2.0).unwrap();
        let grid = SphereGrid::new(5, 3).unwrap();
        let sched = default_schedule(&s);
        let d = mass_definition_form(&s, &grid, &sched).unwrap();
        let (a, h) = mass_equivalent_form(&s, &grid, &sched).unwrap();
        for e in [&d, &a, &h] {
            assert!((e.limit - 2.0).abs() < 0.02, "{e:?}");
        }
    }

    #[test]
    fn gate_refuses_slow_decay() {
        let s = builtin("sine_product", 6, 2).unwrap();
        let grid = SphereGrid::new(6, 3).unwrap();
        let r = mass_definition_form(&s, &grid, &default_schedule(&s));
        assert!(matches!(r, Err(Error::NotWellDefined { .. })));
    }

    #[test]
    fn green_identity_for_compact_field() {
        let s = builtin("gaussian_bump", 5, 2).unwrap();
        let grid = SphereGrid::new(5, 15).unwrap();
        let (surface, volume) = green_defect(&s, 5.0, &grid, 6).unwrap();
        assert!((surface - volume).abs() < 1e-6, "{surface} vs {volume}");
    }

    #[test]
    fn audit_classifies() {
        let flat = MetricSpec::flat(5, 1).unwrap();
        let a = positivity_audit(&flat, 100.0).unwrap();
        assert_eq!(a.regime, Regime::GardingCone);
        assert_eq!(a.rigidity_consistent, Some(true));
        let bad = builtin("radial_gaussian", 5, 1).unwrap();
        let a = positivity_audit(&bad, 100.0).unwrap();
        assert_eq!(a.regime, Regime::NotApplicable);
        assert!(a.mass.is_none());
        let s = schwarzschild_profile(6, 2, 1.0).unwrap();
        let a = positivity_audit(&s, 160.0).unwrap();
        assert_eq!(a.mass_nonnegative, Some(true));
    }

    #[test]
    fn lower_bound_flat_and_adm() {
        let flat = MetricSpec::flat(5, 1).unwrap();
        let lb = mass_lower_bound(&flat, 160.0, &SphereGrid::new(5, 3).unwrap()).unwrap();
        assert_eq!((lb.lk_term, lb.grad_term), (0.0, 0.0));
        let s = schwarzschild_profile(5, 1, 2.0).unwrap();
        let lb = mass_lower_bound(&s, 160.0, &SphereGrid::new(5, 5).unwrap()).unwrap();
        assert!(lb.lk_term.abs() < 1e-8 && lb.grad_term > 0.0 && lb.grad_term < 2.0, "{lb:?}");
        assert!(lb.guaranteed);
        let _ = Field::Flat;
    }
}
