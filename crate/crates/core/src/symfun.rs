//! Elementary symmetric functions, Newton transformations and Garding cones.
//!
//! `sigma_j` of an eigenvalue vector is the coefficient of `t^j` in
//! `prod_i (1 + lambda_i t)`, accumulated one factor at a time. For symmetric
//! matrices the eigenvalues come from a symmetric eigensolver and are then fed
//! through the same recursion.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Ordered list of real eigenvalues `(lambda_1, ..., lambda_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueVector(Vec<f64>);

impl EigenvalueVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("eigenvalue vector must have at least one entry");
        }
        Ok(Self(entries))
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// All of `sigma_0, ..., sigma_N`.
    pub fn sigmas(&self) -> Vec<f64> {
        sigma_all(&self.0)
    }
}

/// `[sigma_0, ..., sigma_N]` of a slice of reals.
pub fn sigma_all(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (count, &x) in values.iter().enumerate() {
        for j in (1..=count + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `sigma_j(lambda)`; `sigma_0 = 1`.
pub fn sigma(j: usize, lambda: &EigenvalueVector) -> Result<f64> {
    if j > lambda.len() {
        return domain(format!("sigma_{j} undefined for a vector of length {}", lambda.len()));
    }
    Ok(sigma_all(&lambda.0)[j])
}

/// Real symmetric `N x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m` after checking symmetry to `1e-10` relative; the stored
    /// matrix is the exact symmetric part.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return domain(format!("matrix must be square and non-empty, got {}x{}", m.nrows(), m.ncols()));
        }
        let scale = 1.0 + m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-10 * scale {
            return domain(format!("matrix is not symmetric (max asymmetry {asym:e})"));
        }
        Ok(Self((&m + m.transpose()) * 0.5))
    }

    /// Symmetrizes without checking; for matrices symmetric by construction.
    pub fn from_symmetric(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        Self((&m + m.transpose()) * 0.5)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_symmetric(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> EigenvalueVector {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        EigenvalueVector(ev)
    }

    /// `[sigma_0, ..., sigma_N]` of the eigenvalues.
    pub fn sigmas(&self) -> Vec<f64> {
        self.eigenvalues().sigmas()
    }

    pub fn sigma(&self, j: usize) -> Result<f64> {
        sigma(j, &self.eigenvalues())
    }
}

/// Newton transformation `T_j(B) = sum_{i=0}^{j} sigma_{j-i}(B) (-B)^i`.
pub fn newton_tensor(j: usize, b: &SymMatrix) -> Result<SymMatrix> {
    let n = b.dim();
    if j >= n {
        return domain(format!("T_{j} requires j <= N-1 = {}", n - 1));
    }
    let sig = b.sigmas();
    Ok(newton_tensor_with(j, b, &sig))
}

/// Horner form of the alternating sum, `T_i = sigma_i I - T_{i-1} B`, with
/// the `sigma` values supplied by the caller.
pub(crate) fn newton_tensor_with(j: usize, b: &SymMatrix, sig: &[f64]) -> SymMatrix {
    let n = b.dim();
    let mut t = DMatrix::<f64>::identity(n, n);
    for s in sig.iter().take(j + 1).skip(1) {
        t = DMatrix::identity(n, n) * *s - &t * &b.0;
    }
    SymMatrix::from_symmetric(t)
}

/// A Garding cone `Gamma_k^+` (strict) or `Gamma_k` (closed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeLabel {
    pub k: usize,
    pub strict: bool,
}

impl ConeLabel {
    pub fn open(k: usize) -> Self {
        Self { k, strict: true }
    }

    pub fn closed(k: usize) -> Self {
        Self { k, strict: false }
    }
}

/// Default tolerance for cone tests.
pub const CONE_TOL: f64 = 1e-10;

/// Strict cones need `sigma_1..sigma_k > tol`; closed cones `>= -tol`.
/// Values within `+-tol` of zero therefore count only for the closed cone.
pub fn cone_membership(lambda: &EigenvalueVector, cone: ConeLabel, tol: f64) -> Result<bool> {
    if cone.k == 0 || cone.k > lambda.len() {
        return domain(format!("cone index k = {} outside 1..={}", cone.k, lambda.len()));
    }
    let sig = lambda.sigmas();
    Ok(sig[1..=cone.k].iter().all(|&s| if cone.strict { s > tol } else { s >= -tol }))
}

/// Gaps of the Newton-MacLaurin inequalities for `lambda` in `Gamma_m^+`.
///
/// The constants are those for hypersurfaces of `R^n`, whose second
/// fundamental forms carry `N = n - 1` eigenvalues, so `n = N + 1` here.
/// Returns `(b1 - s_{m-1} s_{m+1} / s_m^2, s_1 s_{m-1} / s_m - b2)` with
/// `b1 = m(n-m-1)/((m+1)(n-m))` and `b2 = m(n-1)/(n-m)`.
pub fn newton_maclaurin_gap(lambda: &EigenvalueVector, m: usize) -> Result<(f64, f64)> {
    let big_n = lambda.len();
    if m == 0 || m + 1 > big_n {
        return domain(format!("Newton-MacLaurin index m = {m} outside 1..={}", big_n.saturating_sub(1)));
    }
    let sig = lambda.sigmas();
    if sig[m] <= 0.0 {
        return Err(Error::Precondition(format!("sigma_{m} = {:e} is not positive", sig[m])));
    }
    let n = (big_n + 1) as f64;
    let mf = m as f64;
    let b1 = mf * (n - mf - 1.0) / ((mf + 1.0) * (n - mf));
    let b2 = mf * (n - 1.0) / (n - mf);
    let ratio1 = sig[m - 1] * sig[m + 1] / (sig[m] * sig[m]);
    let ratio2 = sig[1] * sig[m - 1] / sig[m];
    Ok((b1 - ratio1, ratio2 - b2))
}

/// `sigma_k(A + B) - sigma_k(A) - sigma_k(B)`; non-negative on `Gamma_k`.
pub fn superadditivity_gap(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return domain(format!("dimension mismatch {} vs {}", a.dim(), b.dim()));
    }
    if k > a.dim() {
        return domain(format!("sigma_{k} undefined in dimension {}", a.dim()));
    }
    Ok(a.add(b).sigma(k)? - a.sigma(k)? - b.sigma(k)?)
}

/// Rejection sampler for vectors in a Garding cone.
///
/// Entries are drawn i.i.d. uniform on `[-1, 2]` and the draw is kept once it
/// lies in the cone with a margin of `1e-3` on every `sigma_j`. A fixed seed
/// therefore reproduces the whole sample stream.
pub fn sample_cone_vector<R: Rng>(rng: &mut R, len: usize, cone: ConeLabel) -> EigenvalueVector {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let sig = sigma_all(&v);
        if sig[1..=cone.k].iter().all(|&s| s > 1e-3) {
            return EigenvalueVector(v);
        }
    }
}

/// Orthogonal factor of the QR decomposition of a matrix with uniform
/// `[-1, 1]` entries.
pub fn sample_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// `Q diag(mu) Q^T` with `mu` drawn from the cone sampler.
pub fn sample_cone_matrix<R: Rng>(rng: &mut R, n: usize, cone: ConeLabel) -> SymMatrix {
    let mu = sample_cone_vector(rng, n, cone);
    let q = sample_orthogonal(rng, n);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mu.as_slice()));
    SymMatrix::from_symmetric(&q * d * q.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> EigenvalueVector {
        EigenvalueVector::new(x.to_vec()).unwrap()
    }

    /// Subset enumeration; the oracle for `sigma`.
    fn sigma_brute(j: usize, x: &[f64]) -> f64 {
        let n = x.len();
        (0u32..(1 << n))
            .filter(|mask| mask.count_ones() as usize == j)
            .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).product::<f64>())
            .sum()
    }

    #[test]
    fn sigma_examples() {
        let (a, b, c) = (0.3, -1.7, 2.25);
        assert!((sigma(1, &v(&[a, b, c])).unwrap() - (a + b + c)).abs() < 1e-15);
        assert_eq!(sigma(3, &v(&[1.0; 4])).unwrap(), 4.0);
        assert_eq!(sigma(2, &v(&[1.0, 2.0, 3.0])).unwrap(), 11.0);
        assert_eq!(sigma(0, &v(&[5.0])).unwrap(), 1.0);
        assert!(matches!(sigma(4, &v(&[1.0, 2.0, 3.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn sigma_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s = sigma_all(&x);
            for j in 0..=n {
                let b = sigma_brute(j, &x);
                assert!((s[j] - b).abs() < 1e-12 * (1.0 + b.abs()), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn newton_tensor_examples() {
        let b = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(newton_tensor(0, &b).unwrap(), SymMatrix::identity(3));
        let t1 = newton_tensor(1, &b).unwrap();
        for (i, want) in [5.0, 4.0, 3.0].iter().enumerate() {
            assert!((t1.get(i, i) - want).abs() < 1e-13);
        }
        // brute-force contraction T_1^{ij} B_{ji}
        let mut tr = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                tr += t1.get(i, j) * b.get(j, i);
            }
        }
        assert!((tr - 22.0).abs() < 1e-12);
        assert!(newton_tensor(3, &b).is_err());
    }

    #[test]
    fn cone_examples() {
        assert!(cone_membership(&v(&[1.0; 5]), ConeLabel::open(5), CONE_TOL).unwrap());
        assert!(!cone_membership(&v(&[-1.0, 1.0, 1.0]), ConeLabel::open(2), CONE_TOL).unwrap());
        let zero = v(&[0.0; 4]);
        assert!(cone_membership(&zero, ConeLabel::closed(3), CONE_TOL).unwrap());
        assert!(!cone_membership(&zero, ConeLabel::open(3), CONE_TOL).unwrap());
        assert!(cone_membership(&zero, ConeLabel::open(5), CONE_TOL).is_err());
    }

    #[test]
    fn newton_maclaurin_examples() {
        let (g1, g2) = newton_maclaurin_gap(&v(&[1.0; 4]), 2).unwrap();
        assert!(g1.abs() < 1e-15 && g2.abs() < 1e-15);
        let (_, g2) = newton_maclaurin_gap(&v(&[2.0, 1.0, 1.0]), 2).unwrap();
        assert!((g2 - 0.2).abs() < 1e-14);
        // N = 2, m = 1: b1 = 1/4 and sigma_0 sigma_2 / sigma_1^2 = 1/4.
        let (g1, g2) = newton_maclaurin_gap(&v(&[1.0, 1.0]), 1).unwrap();
        assert!(g1.abs() < 1e-15 && g2.abs() < 1e-15);
        assert!(matches!(newton_maclaurin_gap(&v(&[-1.0, -1.0, 0.5]), 1), Err(Error::Precondition(_))));
        assert!(newton_maclaurin_gap(&v(&[1.0, 1.0]), 2).is_err());
    }

    #[test]
    fn superadditivity_examples() {
        let i5 = SymMatrix::identity(5);
        assert!((superadditivity_gap(&i5, &i5, 2).unwrap() - 20.0).abs() < 1e-11);
        for k in 1..=5 {
            assert!(superadditivity_gap(&i5, &SymMatrix::zeros(5), k).unwrap().abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dd = |rng: &mut ChaCha8Rng| {
                let m = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-0.2..0.2));
                let m = (&m + m.transpose()) * 0.5 + DMatrix::identity(5, 5) * 2.0;
                SymMatrix::new(m).unwrap()
            };
            let (a, b) = (dd(&mut rng), dd(&mut rng));
            assert!(superadditivity_gap(&a, &b, 2).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(SymMatrix::new(m).is_err());
    }
}
