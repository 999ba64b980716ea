//! Pointwise curvature of `g = e^{-2u} delta`.
//!
//! Two frames appear. *Euclidean* quantities are the `(0,2)` components in
//! the coordinate basis, which is what the flux integrands use: the Schouten
//! tensor there is `A = D^2u - |du|^2/2 I + du (x) du`. *Metric-frame*
//! quantities are endomorphisms `g^{-1} A`, whose eigenvalues define
//! `sigma_k(g)`. Since `g^{-1} = e^{2u} delta`, the only conversion is
//! multiplication by `e^{2u}`, done in [`to_metric_frame`].

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::profile::{JetPoint, MetricSpec};
use crate::symfun::{newton_tensor, sigma_all, SymMatrix};
use crate::tensor::{christoffel_conformal, lk_contract, pk_tensor, Riemann4, Tensor4};

fn du_outer(jet: &JetPoint) -> DMatrix<f64> {
    &jet.gradient * jet.gradient.transpose()
}

/// Schouten tensor in the Euclidean frame.
pub fn schouten(jet: &JetPoint) -> SymMatrix {
    let n = jet.dim();
    let m = jet.hessian.matrix() - DMatrix::identity(n, n) * (0.5 * jet.grad_norm_sq()) + du_outer(jet);
    SymMatrix::from_symmetric(m)
}

/// `B = |du|^2/2 I - du (x) du`, so that `D^2u = A + B`.
pub fn b_split(jet: &JetPoint) -> SymMatrix {
    let n = jet.dim();
    SymMatrix::from_symmetric(DMatrix::identity(n, n) * (0.5 * jet.grad_norm_sq()) - du_outer(jet))
}

/// Euclidean-frame `(0,2)` tensor to the `g`-endomorphism: `e^{2u} T`.
pub fn to_metric_frame(euclidean: &SymMatrix, u: f64) -> SymMatrix {
    euclidean.scale((2.0 * u).exp())
}

/// `g = e^{-2u} delta` as a matrix.
pub fn metric_at(jet: &JetPoint) -> SymMatrix {
    SymMatrix::identity(jet.dim()).scale((-2.0 * jet.value).exp())
}

/// Ricci `(0,2)` components and scalar curvature of `g`.
pub fn ricci_scalar(jet: &JetPoint) -> (SymMatrix, f64) {
    let n = jet.dim() as f64;
    let lap = jet.laplacian();
    let g2 = jet.grad_norm_sq();
    let dim = jet.dim();
    let ric = (jet.hessian.matrix() + du_outer(jet)) * (n - 2.0)
        + DMatrix::identity(dim, dim) * (lap - (n - 2.0) * g2);
    let scalar = (2.0 * jet.value).exp() * (2.0 * (n - 1.0) * lap - (n - 1.0) * (n - 2.0) * g2);
    (SymMatrix::from_symmetric(ric), scalar)
}

/// Riemann tensor `R_{ij}^{lm}` of a locally conformally flat metric from its
/// metric-frame Schouten endomorphism `a`.
pub fn riemann_from_schouten(a: &SymMatrix) -> Riemann4 {
    let n = a.dim();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    Riemann4::from_fn(n, |i, j, l, m| {
        a.get(i, l) * d(j, m) + d(i, l) * a.get(j, m) - a.get(i, m) * d(j, l) - d(i, m) * a.get(j, l)
    })
}

fn falling(n: usize, k: usize) -> f64 {
    ((n - 2 * k + 1)..=(n - k)).map(|x| x as f64).product()
}

/// `L_k = 2^k k! (n-k)!/(n-2k)! sigma_k(g)` with `sigma_k(g) = e^{2ku} sigma_k(A)`.
pub fn lk_conformal(jet: &JetPoint, k: usize) -> Result<f64> {
    let n = jet.dim();
    if k == 0 || 2 * k >= n {
        return domain(format!("need 1 <= k and 2k < n, got k = {k}, n = {n}"));
    }
    let sigma_g = (2.0 * k as f64 * jet.value).exp() * schouten(jet).sigma(k)?;
    let k_fact: f64 = (1..=k).map(|x| x as f64).product();
    Ok(2f64.powi(k as i32) * k_fact * falling(n, k) * sigma_g)
}

/// `sigma_j(B)` in closed form and from the eigenvalues of `B`.
pub fn b_split_sigma(jet: &JetPoint, j: usize) -> Result<(f64, f64)> {
    let n = jet.dim();
    if 2 * j > n {
        return domain(format!("sigma_{j}(B) needs j <= n/2, n = {n}"));
    }
    let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
    let closed = fact(n - 1) * (n as f64 - 2.0 * j as f64) / (2f64.powi(j as i32) * fact(j) * fact(n - j))
        * jet.grad_norm_sq().powi(j as i32);
    Ok((closed, b_split(jet).sigma(j)?))
}

/// Everything curvature-related at one point.
#[derive(Debug, Clone)]
pub struct CurvatureFrame {
    pub jet: JetPoint,
    /// Euclidean frame.
    pub schouten: SymMatrix,
    /// Euclidean `(0,2)` components.
    pub ricci: SymMatrix,
    pub scalar: f64,
    pub riemann: Riemann4,
    /// `sigma_j` of the Euclidean Schouten matrix, `j = 0..=n`.
    pub sigma_a: Vec<f64>,
    pub b_split: SymMatrix,
}

impl CurvatureFrame {
    pub fn from_jet(jet: JetPoint) -> Self {
        let a = schouten(&jet);
        let (ricci, scalar) = ricci_scalar(&jet);
        let riemann = riemann_from_schouten(&to_metric_frame(&a, jet.value));
        let sigma_a = sigma_all(a.eigenvalues().as_slice());
        let b_split = b_split(&jet);
        Self { jet, schouten: a, ricci, scalar, riemann, sigma_a, b_split }
    }

    pub fn at(spec: &MetricSpec, x: &[f64]) -> Result<Self> {
        Ok(Self::from_jet(spec.jet_at(x)?))
    }

    /// `sigma_j(g) = e^{2ju} sigma_j(A)`.
    pub fn sigma_g(&self, j: usize) -> f64 {
        (2.0 * j as f64 * self.jet.value).exp() * self.sigma_a[j]
    }

    pub fn lk_conformal(&self, k: usize) -> Result<f64> {
        lk_conformal(&self.jet, k)
    }

    pub fn lk_contract(&self, k: usize) -> Result<f64> {
        lk_contract(&self.riemann, k)
    }

    pub fn pk(&self, k: usize) -> Result<Tensor4> {
        pk_tensor(&self.riemann, &metric_at(&self.jet), k)
    }
}

/// Contravariant `P_(k)` of `spec` at `x`.
pub fn pk_at(spec: &MetricSpec, x: &[f64], k: usize) -> Result<Tensor4> {
    CurvatureFrame::at(spec, x)?.pk(k)
}

/// Covariant divergence `nabla_i T_{k}(g^{-1}A)^i_j` in `g`, partial
/// derivatives by central differences of step `h`.
pub fn divergence_residual_schouten_newton(spec: &MetricSpec, k: usize, x: &[f64], h: f64) -> Result<DVector<f64>> {
    let n = x.len();
    if k >= n {
        return domain(format!("T_{k} requires k <= n-1 = {}", n - 1));
    }
    let t_at = |y: &[f64]| -> Result<SymMatrix> {
        let jet = spec.jet_at(y)?;
        newton_tensor(k, &to_metric_frame(&schouten(&jet), jet.value))
    };
    let center = t_at(x)?;
    let jet = spec.jet_at(x)?;
    let gamma = christoffel_conformal(jet.gradient.as_slice());
    let mut div = DVector::zeros(n);
    let mut y = x.to_vec();
    for i in 0..n {
        y[i] = x[i] + h;
        let plus = t_at(&y)?;
        y[i] = x[i] - h;
        let minus = t_at(&y)?;
        y[i] = x[i];
        for j in 0..n {
            div[j] += (plus.get(i, j) - minus.get(i, j)) / (2.0 * h);
        }
    }
    for j in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            let trace: f64 = (0..n).map(|i| gamma[i][i][a]).sum();
            s += trace * center.get(a, j);
            for i in 0..n {
                s -= gamma[a][i][j] * center.get(i, a);
            }
        }
        div[j] += s;
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{schwarzschild_profile, Field};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_jet(n: usize, a: f64, x1: f64) -> JetPoint {
        let mut g = DVector::zeros(n);
        g[0] = a;
        JetPoint { value: a * x1, gradient: g, hessian: SymMatrix::zeros(n) }
    }

    fn random_jet(rng: &mut ChaCha8Rng, n: usize) -> JetPoint {
        let spec = MetricSpec::custom(n, 1, Field::random_trig(rng, n, 3), 0.0, "t").unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        spec.jet_at(&x).unwrap()
    }

    #[test]
    fn linear_field_schouten_and_scalar() {
        let a = 0.7;
        let jet = linear_jet(5, a, 0.3);
        let s = schouten(&jet);
        assert!((s.get(0, 0) - a * a / 2.0).abs() < 1e-15);
        for i in 1..5 {
            assert!((s.get(i, i) + a * a / 2.0).abs() < 1e-15);
        }
        let (_, r) = ricci_scalar(&jet);
        assert!((r + 12.0 * a * a * (2.0 * a * 0.3f64).exp()).abs() < 1e-13);
        let l1 = lk_contract(&CurvatureFrame::from_jet(jet).riemann, 1).unwrap();
        assert!((l1 - r).abs() < 1e-13);
    }

    #[test]
    fn flat_is_zero() {
        let f = CurvatureFrame::from_jet(JetPoint::zero(6));
        assert_eq!(f.scalar, 0.0);
        assert_eq!(f.lk_conformal(2).unwrap(), 0.0);
        assert_eq!(riemann_from_schouten(&SymMatrix::zeros(4)).as_tensor().max_abs(), 0.0);
    }

    #[test]
    fn identity_schouten_gives_two() {
        let r = riemann_from_schouten(&SymMatrix::identity(4));
        assert_eq!(r.get(0, 1, 0, 1), 2.0);
        assert_eq!(r.get(0, 1, 1, 0), -2.0);
    }

    #[test]
    fn schouten_reconstructed_from_ricci_and_contraction_gives_ricci() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.gen_range(4..=7);
            let jet = random_jet(&mut rng, n);
            let frame = CurvatureFrame::from_jet(jet.clone());
            let nf = n as f64;
            // A_{(0,2)} = (Ric - R g / (2(n-1))) / (n-2), g = e^{-2u} delta
            let g = (-2.0 * jet.value).exp();
            let rebuilt = (frame.ricci.matrix() - DMatrix::identity(n, n) * (frame.scalar * g / (2.0 * (nf - 1.0))))
                / (nf - 2.0);
            assert!((rebuilt - frame.schouten.matrix()).amax() < 1e-10 * (1.0 + frame.schouten.matrix().amax()));
            // R_{ij}^{lj} = Ric_i^l = e^{2u} Ric_{il}
            let ric_mixed = frame.riemann.ricci_mixed();
            let want = frame.ricci.matrix() * (2.0 * jet.value).exp();
            assert!((ric_mixed - &want).amax() < 1e-10 * (1.0 + want.amax()));
            assert!((frame.lk_contract(1).unwrap() - frame.scalar).abs() < 1e-10 * (1.0 + frame.scalar.abs()));
        }
    }

    #[test]
    fn hessian_splits_into_schouten_plus_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let jet = random_jet(&mut rng, 6);
            let sum = schouten(&jet).add(&b_split(&jet));
            assert!((sum.matrix() - jet.hessian.matrix()).amax() < 1e-14);
        }
    }

    #[test]
    fn b_split_sigma_examples() {
        let jet = linear_jet(5, 1.0, 0.0);
        let (c, e) = b_split_sigma(&jet, 1).unwrap();
        assert!((c - 1.5).abs() < 1e-15 && (e - 1.5).abs() < 1e-12);
        let (c, e) = b_split_sigma(&jet, 2).unwrap();
        assert!((c - 0.5).abs() < 1e-15 && (e - 0.5).abs() < 1e-12);
        let (c, e) = b_split_sigma(&JetPoint::zero(5), 1).unwrap();
        assert_eq!((c, e), (0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.gen_range(5..=8);
            let jet = random_jet(&mut rng, n);
            for j in 1..=n / 2 {
                let (c, e) = b_split_sigma(&jet, j).unwrap();
                assert!((c - e).abs() < 1e-12 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn schwarzschild_is_lk_flat_and_agrees_with_contraction() {
        for (n, k, m) in [(5, 1, 2.0), (6, 2, 1.0), (7, 2, 1.0), (7, 3, 1.0), (5, 2, 1.0)] {
            let spec = schwarzschild_profile(n, k, m).unwrap();
            let r0 = spec.catalog.as_ref().unwrap().horizon_radii[0];
            for r in [1.3 * r0, 2.0 * r0, 5.0 * r0] {
                let mut x = vec![0.0; n];
                x[0] = r * 0.6;
                x[1] = r * 0.8;
                let f = CurvatureFrame::at(&spec, &x).unwrap();
                let contract = f.lk_contract(k).unwrap();
                let conformal = f.lk_conformal(k).unwrap();
                let scale = f.riemann.as_tensor().max_abs().powi(k as i32);
                assert!(contract.abs() < 1e-8 * scale, "({n},{k}) r={r}: {contract}");
                assert!((contract - conformal).abs() < 1e-8 * scale);
                if k == 1 {
                    assert!(f.scalar.abs() < 1e-8 * scale);
                }
            }
        }
    }

    #[test]
    fn lk_routes_agree_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..60 {
            let n = rng.gen_range(5..=7);
            let jet = random_jet(&mut rng, n);
            let f = CurvatureFrame::from_jet(jet);
            for k in 1..=(n - 1) / 2 {
                let (a, b) = (f.lk_contract(k).unwrap(), f.lk_conformal(k).unwrap());
                assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "n={n} k={k}: {a} vs {b}");
                let lowered = f.riemann.lowered(&metric_at(&f.jet));
                assert!(lowered.riemann_symmetry_defect() < 1e-10 * (1.0 + lowered.max_abs()));
                let via_p = f.pk(k).unwrap().full_contract(&lowered);
                assert!((via_p - b).abs() <= 1e-8 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn schouten_newton_tensor_is_divergence_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spec = MetricSpec::custom(6, 2, Field::random_trig(&mut rng, 6, 3), 0.0, "t").unwrap();
        let x = [0.3, -0.5, 0.8, 0.1, -0.2, 0.6];
        for k in 0..=2 {
            let coarse = divergence_residual_schouten_newton(&spec, k, &x, 1e-2).unwrap().amax();
            let fine = divergence_residual_schouten_newton(&spec, k, &x, 5e-3).unwrap().amax();
            if k == 0 {
                assert!(coarse < 1e-12);
            } else {
                let ratio = coarse / fine;
                assert!((3.5..=4.5).contains(&ratio), "k={k}: {coarse} {fine}");
            }
        }
    }
}
