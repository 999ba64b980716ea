//! Conformal factors `u` for metrics `g = e^{-2u} delta` on `R^n` minus a
//! union of balls.
//!
//! Radial profiles are written in a small expression language ([`expr`]) and
//! differentiated exactly with Taylor jets ([`jet`]); anisotropic test fields
//! are compiled in ([`Field`]). [`MetricSpec`] bundles a field with the
//! dimension, curvature order, decay order and excised domain.

pub mod expr;
pub mod jet;
mod spec_file;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symfun::SymMatrix;
use expr::Expr;

pub use spec_file::{load_spec, spec_from_json, MetricDoc};

/// Value, gradient and Hessian of `u` at a point, in Euclidean coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: SymMatrix,
}

impl JetPoint {
    pub fn zero(n: usize) -> Self {
        Self { value: 0.0, gradient: DVector::zeros(n), hessian: SymMatrix::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.gradient.norm_squared()
    }

    pub fn laplacian(&self) -> f64 {
        self.hessian.trace()
    }

    fn add(&self, other: &JetPoint) -> JetPoint {
        JetPoint {
            value: self.value + other.value,
            gradient: &self.gradient + &other.gradient,
            hessian: self.hessian.add(&other.hessian),
        }
    }

    /// Radial chain rule: `D^2u = u'' x^ x^T + (u'/r)(I - x^ x^T)`.
    pub fn from_radial(x: &[f64], d: [f64; 3]) -> JetPoint {
        let n = x.len();
        let r = norm(x);
        let xhat = DVector::from_iterator(n, x.iter().map(|v| v / r));
        let tangential = d[1] / r;
        let hessian = DMatrix::from_fn(n, n, |i, j| {
            let outer = xhat[i] * xhat[j];
            d[2] * outer + tangential * (if i == j { 1.0 } else { 0.0 } - outer)
        });
        JetPoint { value: d[0], gradient: xhat * d[1], hessian: SymMatrix::from_symmetric(hessian) }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One term `amp * sin(freq . x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: Vec<f64>,
    pub phase: f64,
}

/// A smooth conformal factor on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Flat,
    /// `u(|x|)` given by an expression in `r`.
    Radial(Expr),
    /// `amp * exp(-sum_i w_i (x_i - c_i)^2)`.
    Gaussian { amp: f64, center: Vec<f64>, weights: Vec<f64> },
    /// `-coeff * ln(1 + sum_i m_i / (2 |x - c_i|^power))`.
    MultiPole { coeff: f64, power: f64, masses: Vec<f64>, centers: Vec<Vec<f64>> },
    Trig(Vec<TrigTerm>),
    /// `b . x + x^T H x / 2`.
    Quadratic { linear: Vec<f64>, hessian: DMatrix<f64> },
    /// `amp * sin(x_1) * x_2^2`.
    SineProduct { amp: f64 },
    Sum(Vec<Field>),
}

impl Field {
    pub fn is_radial(&self) -> bool {
        matches!(self, Field::Flat | Field::Radial(_))
    }

    /// `(u, u', u'', u''')` of a radial field at radius `r`.
    pub fn radial_derivs(&self, r: f64) -> Result<[f64; 4]> {
        match self {
            Field::Flat => Ok([0.0; 4]),
            Field::Radial(e) => Ok(e.eval_jet(jet::Jet3::variable(r))?.derivatives()),
            _ => Err(Error::Domain("field is not radial".into())),
        }
    }

    pub fn jet(&self, x: &[f64]) -> Result<JetPoint> {
        let n = x.len();
        match self {
            Field::Flat => Ok(JetPoint::zero(n)),
            Field::Radial(e) => {
                let r = norm(x);
                if r == 0.0 {
                    return Err(Error::Domain("radial profile evaluated at the origin".into()));
                }
                let d = e.eval_jet(jet::Jet3::variable(r))?.derivatives();
                Ok(JetPoint::from_radial(x, [d[0], d[1], d[2]]))
            }
            Field::Gaussian { amp, center, weights } => {
                let y: Vec<f64> = (0..n).map(|i| x[i] - center[i]).collect();
                let q: f64 = (0..n).map(|i| weights[i] * y[i] * y[i]).sum();
                let u = amp * (-q).exp();
                let g = DVector::from_fn(n, |i, _| -2.0 * weights[i] * y[i] * u);
                let h = DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { 2.0 * weights[i] } else { 0.0 };
                    u * (4.0 * weights[i] * weights[j] * y[i] * y[j] - diag)
                });
                Ok(JetPoint { value: u, gradient: g, hessian: SymMatrix::from_symmetric(h) })
            }
            Field::MultiPole { coeff, power, masses, centers } => {
                let p = *power;
                let mut s = 1.0;
                let mut ds = DVector::<f64>::zeros(n);
                let mut dds = DMatrix::<f64>::zeros(n, n);
                for (m, c) in masses.iter().zip(centers) {
                    let y: Vec<f64> = (0..n).map(|i| x[i] - c[i]).collect();
                    let rho = norm(&y);
                    if rho == 0.0 {
                        return Err(Error::Domain("multipole field evaluated at a pole".into()));
                    }
                    let half = 0.5 * m;
                    let rp = rho.powf(-p);
                    s += half * rp;
                    let a = -p * rp / (rho * rho);
                    let b = p * (p + 2.0) * rp / rho.powi(4);
                    for i in 0..n {
                        ds[i] += half * a * y[i];
                        for j in 0..n {
                            dds[(i, j)] += half * (b * y[i] * y[j] + if i == j { a } else { 0.0 });
                        }
                    }
                }
                let g = &ds * (-coeff / s);
                let h = DMatrix::from_fn(n, n, |i, j| -coeff * (dds[(i, j)] / s - ds[i] * ds[j] / (s * s)));
                Ok(JetPoint { value: -coeff * s.ln(), gradient: g, hessian: SymMatrix::from_symmetric(h) })
            }
            Field::Trig(terms) => {
                let mut out = JetPoint::zero(n);
                for t in terms {
                    let phase: f64 = t.phase + (0..n).map(|i| t.freq[i] * x[i]).sum::<f64>();
                    let (s, c) = phase.sin_cos();
                    out.value += t.amp * s;
                    let w = DVector::from_column_slice(&t.freq);
                    out.gradient += &w * (t.amp * c);
                    let h = &w * w.transpose() * (-t.amp * s);
                    out.hessian = out.hessian.add(&SymMatrix::from_symmetric(h));
                }
                Ok(out)
            }
            Field::Quadratic { linear, hessian } => {
                let xv = DVector::from_column_slice(x);
                let b = DVector::from_column_slice(linear);
                let hx = hessian * &xv;
                Ok(JetPoint {
                    value: b.dot(&xv) + 0.5 * xv.dot(&hx),
                    gradient: b + hx,
                    hessian: SymMatrix::from_symmetric(hessian.clone()),
                })
            }
            Field::SineProduct { amp } => {
                if n < 2 {
                    return Err(Error::Domain("sine product needs n >= 2".into()));
                }
                let (s, c) = x[0].sin_cos();
                let mut g = DVector::<f64>::zeros(n);
                g[0] = amp * c * x[1] * x[1];
                g[1] = 2.0 * amp * s * x[1];
                let mut h = DMatrix::<f64>::zeros(n, n);
                h[(0, 0)] = -amp * s * x[1] * x[1];
                h[(0, 1)] = 2.0 * amp * c * x[1];
                h[(1, 0)] = h[(0, 1)];
                h[(1, 1)] = 2.0 * amp * s;
                Ok(JetPoint { value: amp * s * x[1] * x[1], gradient: g, hessian: SymMatrix::from_symmetric(h) })
            }
            Field::Sum(parts) => {
                let mut out = JetPoint::zero(n);
                for p in parts {
                    out = out.add(&p.jet(x)?);
                }
                Ok(out)
            }
        }
    }

    /// Random trigonometric field with `terms` terms, frequencies in `[-1.5, 1.5]`.
    pub fn random_trig<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Field {
        Field::Trig(
            (0..terms)
                .map(|_| TrigTerm {
                    amp: rng.gen_range(-0.4..0.4),
                    freq: (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect(),
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                })
                .collect(),
        )
    }

    /// Random quadratic polynomial field.
    pub fn random_quadratic<R: Rng>(rng: &mut R, n: usize) -> Field {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
        Field::Quadratic {
            linear: (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            hessian: (&raw + raw.transpose()) * 0.5,
        }
    }
}

/// A closed ball removed from `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn centered(n: usize, radius: f64) -> Self {
        Self { center: vec![0.0; n], radius }
    }
}

/// Closed-form data attached to catalog metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogInfo {
    /// Curvature order the metric was built for.
    pub metric_k: usize,
    pub mass_param: f64,
    /// Horizon radius of each excised component.
    pub horizon_radii: Vec<f64>,
    /// `m^k` summed over components.
    pub expected_mass: f64,
}

#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    /// Decay order; `f64::INFINITY` for fields decaying faster than any power.
    pub tau: f64,
    pub excised: Vec<Ball>,
    pub label: String,
    pub catalog: Option<CatalogInfo>,
    pub doc: MetricDoc,
}

/// Slack below which a point on an excised sphere counts as outside.
const EXCISION_SLACK: f64 = 1e-12;

impl MetricSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Spec(format!("dimension {} is below 3", self.n)));
        }
        if self.k == 0 || 2 * self.k >= self.n {
            return Err(Error::Spec(format!("need 1 <= k and 2k < n, got k = {}, n = {}", self.k, self.n)));
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::Spec(format!("decay order {} must be non-negative", self.tau)));
        }
        for b in &self.excised {
            if b.center.len() != self.n || !(b.radius > 0.0) {
                return Err(Error::Spec("excised ball has wrong dimension or non-positive radius".into()));
            }
        }
        Ok(())
    }

    pub fn flat(n: usize, k: usize) -> Result<MetricSpec> {
        let spec = MetricSpec {
            n,
            k,
            field: Field::Flat,
            tau: f64::INFINITY,
            excised: vec![],
            label: format!("flat(n={n},k={k})"),
            catalog: None,
            doc: MetricDoc::new(n, k, "flat"),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec for a user field with no catalog data.
    pub fn custom(n: usize, k: usize, field: Field, tau: f64, label: &str) -> Result<MetricSpec> {
        let spec = MetricSpec {
            n,
            k,
            field,
            tau,
            excised: vec![],
            label: label.to_string(),
            catalog: None,
            doc: MetricDoc::new(n, k, "internal"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn is_radial(&self) -> bool {
        self.field.is_radial() && self.excised.iter().all(|b| b.center.iter().all(|&c| c == 0.0))
    }

    /// `(n - 2k) / (k + 1)`, the decay order the mass needs to exceed.
    pub fn decay_threshold(&self) -> f64 {
        (self.n - 2 * self.k) as f64 / (self.k + 1) as f64
    }

    pub fn check_well_defined(&self) -> Result<()> {
        let threshold = self.decay_threshold();
        if self.tau > threshold {
            Ok(())
        } else {
            Err(Error::NotWellDefined { n: self.n, k: self.k, tau: self.tau, threshold })
        }
    }

    /// Length scale of the excised region, 1 if nothing is excised.
    pub fn scale(&self) -> f64 {
        if self.excised.is_empty() {
            return 1.0;
        }
        self.excised.iter().map(|b| norm(&b.center) + b.radius).fold(0.0, f64::max)
    }

    pub fn is_excised(&self, x: &[f64]) -> bool {
        self.excised.iter().any(|b| {
            let d: Vec<f64> = x.iter().zip(&b.center).map(|(a, c)| a - c).collect();
            norm(&d) < b.radius * (1.0 - EXCISION_SLACK)
        })
    }

    pub fn jet_at(&self, x: &[f64]) -> Result<JetPoint> {
        if x.len() != self.n {
            return Err(Error::Domain(format!("point has dimension {}, metric has {}", x.len(), self.n)));
        }
        if self.is_excised(x) {
            return Err(Error::Excised { point: x.to_vec() });
        }
        self.field.jet(x)
    }

    /// Same metric, mass of a different order.
    pub fn with_k(&self, k: usize) -> Result<MetricSpec> {
        let mut s = self.clone();
        s.k = k;
        s.doc.k = k;
        s.validate()?;
        Ok(s)
    }

    /// Expected mass of order `self.k`, when known in closed form.
    pub fn expected_mass(&self) -> Option<f64> {
        match (&self.field, &self.catalog) {
            (Field::Flat, _) => Some(0.0),
            (_, Some(c)) if c.metric_k == self.k => Some(c.expected_mass),
            _ => None,
        }
    }
}

/// `p = (n - 2k) / k`, the exponent in the generalized Schwarzschild factor.
pub fn schwarzschild_power(n: usize, k: usize) -> f64 {
    (n - 2 * k) as f64 / k as f64
}

/// Horizon radius `(m/2)^{k/(n-2k)}`.
pub fn schwarzschild_horizon(n: usize, k: usize, m: f64) -> f64 {
    (0.5 * m).powf(1.0 / schwarzschild_power(n, k))
}

/// Radial expression `-(2k/(n-2k)) ln(1 + m / (2 r^p))`.
pub fn schwarzschild_expr(n: usize, k: usize, m: f64) -> Expr {
    use expr::BinOp::*;
    let b = |op, l, r| Expr::Bin(op, Box::new(l), Box::new(r));
    let coeff = 2.0 * k as f64 / (n - 2 * k) as f64;
    let p = schwarzschild_power(n, k);
    let inner = b(Add, Expr::Num(1.0), b(Mul, Expr::Num(0.5 * m), b(Pow, Expr::Var, Expr::Neg(Box::new(Expr::Num(p))))));
    Expr::Neg(Box::new(b(Mul, Expr::Num(coeff), Expr::Call(expr::Func::Ln, Box::new(inner)))))
}

/// Generalized Schwarzschild metric of order `k` with mass parameter `m`,
/// excised at its horizon.
pub fn schwarzschild_profile(n: usize, k: usize, m: f64) -> Result<MetricSpec> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Spec(format!("mass parameter must be positive, got {m}")));
    }
    if k == 0 || 2 * k >= n {
        return Err(Error::Spec(format!("need 1 <= k and 2k < n, got k = {k}, n = {n}")));
    }
    let r0 = schwarzschild_horizon(n, k, m);
    let mut doc = MetricDoc::new(n, k, "schwarzschild");
    doc.mass_param = Some(m);
    let spec = MetricSpec {
        n,
        k,
        field: Field::Radial(schwarzschild_expr(n, k, m)),
        tau: schwarzschild_power(n, k),
        excised: vec![Ball::centered(n, r0)],
        label: format!("schwarzschild(n={n},k={k},m={m})"),
        catalog: Some(CatalogInfo {
            metric_k: k,
            mass_param: m,
            horizon_radii: vec![r0],
            expected_mass: m.powi(k as i32),
        }),
        doc,
    };
    spec.validate()?;
    Ok(spec)
}

/// Names accepted by `builtin:<name>`.
pub const BUILTINS: &[&str] =
    &["gaussian_bump", "ellipsoidal", "radial_gaussian", "schwarzschild_bump", "two_center", "sine_product"];

fn axis_point(n: usize, coords: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[..coords.len()].copy_from_slice(coords);
    v
}

/// Compiled-in test fields with fixed parameters.
pub fn builtin(name: &str, n: usize, k: usize) -> Result<MetricSpec> {
    if n < 3 || k == 0 || 2 * k >= n {
        return Err(Error::Spec(format!("need n >= 3, 1 <= k and 2k < n, got n = {n}, k = {k}")));
    }
    let mut spec = MetricSpec::custom(n, k, Field::Flat, f64::INFINITY, &format!("{name}(n={n},k={k})"))?;
    spec.doc = MetricDoc::new(n, k, &format!("builtin:{name}"));
    let schw_coeff = 2.0 * k as f64 / (n - 2 * k) as f64;
    let p = schwarzschild_power(n, k);
    match name {
        "gaussian_bump" => {
            spec.field = Field::Gaussian { amp: 0.3, center: axis_point(n, &[0.4, -0.2]), weights: vec![1.0; n] };
        }
        "ellipsoidal" => {
            spec.field =
                Field::Gaussian { amp: 0.3, center: vec![0.0; n], weights: (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect() };
        }
        "radial_gaussian" => {
            spec.field = Field::Radial(expr::parse("0.5*exp(-r^2)")?);
        }
        "schwarzschild_bump" => {
            let r0 = schwarzschild_horizon(n, k, 1.0);
            spec.field = Field::Sum(vec![
                Field::MultiPole { coeff: schw_coeff, power: p, masses: vec![1.0], centers: vec![vec![0.0; n]] },
                Field::Gaussian { amp: 0.05, center: axis_point(n, &[2.5, 0.5]), weights: vec![1.0; n] },
            ]);
            spec.tau = p;
            spec.excised = vec![Ball::centered(n, r0)];
            spec.catalog =
                Some(CatalogInfo { metric_k: k, mass_param: 1.0, horizon_radii: vec![r0], expected_mass: 1.0 });
        }
        "two_center" => {
            let masses = vec![1.0, 0.5];
            let centers = vec![axis_point(n, &[3.0]), axis_point(n, &[-3.0])];
            let radii: Vec<f64> = masses.iter().map(|&m| schwarzschild_horizon(n, k, m)).collect();
            spec.excised =
                centers.iter().zip(&radii).map(|(c, &radius)| Ball { center: c.clone(), radius }).collect();
            let total: f64 = masses.iter().sum();
            spec.field = Field::MultiPole { coeff: schw_coeff, power: p, masses, centers };
            spec.tau = p;
            spec.catalog = Some(CatalogInfo {
                metric_k: k,
                mass_param: total,
                horizon_radii: radii,
                expected_mass: total.powi(k as i32),
            });
        }
        "sine_product" => {
            spec.field = Field::SineProduct { amp: 0.2 };
            spec.tau = 0.0;
        }
        _ => return Err(Error::Spec(format!("unknown builtin `{name}`; known: {}", BUILTINS.join(", ")))),
    }
    spec.validate()?;
    Ok(spec)
}
