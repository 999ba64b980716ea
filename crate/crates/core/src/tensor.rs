//! Generalized Kronecker deltas and the Gauss-Bonnet contractions `L_k`,
//! `P_(k)`.
//!
//! Index conventions, fixed once for the whole crate:
//!
//! * [`Riemann4`] stores the mixed tensor `R_{ij}^{lm}` (two lower, two upper)
//!   in coordinate components, with `R_{ij}^{ij}` summed giving the scalar
//!   curvature, so `L_1 = R`. For conformally flat metrics it is produced by
//!   [`crate::confgeom::riemann_from_schouten`].
//! * The fully lowered tensor is `R_{ijlm} = R_{ij}^{ab} g_{al} g_{bm}`.
//! * `P_(k)^{stlm}` is contravariant; `P_(k)^{ijlm} R_{ijlm} = L_k`.
//!
//! Contractions never expand the `n^{4k}` index sums. The generalized delta is
//! non-zero only when the upper and lower index tuples enumerate the same set,
//! so the sums run over `2k`-subsets of `{0..n}` and, inside a subset, over
//! pairings of the indices. Antisymmetry of `R` in each index pair and the
//! freedom to permute (upper, lower) pair couples simultaneously reduce the
//! `(2k)!^2` orderings to `(2k-1)!! * (2k)!/2^k` representatives, each
//! standing for `k! 4^k` equal terms.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::profile::MetricSpec;
use crate::symfun::{newton_tensor, SymMatrix};

#[inline]
fn idx4(n: usize, i: usize, j: usize, l: usize, m: usize) -> usize {
    ((i * n + j) * n + l) * n + m
}

/// Dense rank-4 array over `{0..n}^4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        t.data[idx4(n, i, j, l, m)] = f(i, j, l, m);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize, m: usize) -> f64 {
        self.data[idx4(self.n, i, j, l, m)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, l: usize, m: usize, v: f64) {
        self.data[idx4(self.n, i, j, l, m)] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// `sum_{ijlm} self^{ijlm} other_{ijlm}`.
    pub fn full_contract(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Largest violation of `T_{ijlm} = -T_{jilm} = -T_{ijml} = T_{lmij}`.
    pub fn riemann_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let v = self.get(i, j, l, m);
                        worst = worst
                            .max((v + self.get(j, i, l, m)).abs())
                            .max((v + self.get(i, j, m, l)).abs())
                            .max((v - self.get(l, m, i, j)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Mixed Riemann tensor `R_{ij}^{lm}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann4(Tensor4);

impl Riemann4 {
    pub fn zeros(n: usize) -> Self {
        Self(Tensor4::zeros(n))
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        Self(Tensor4::from_fn(n, f))
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize, m: usize) -> f64 {
        self.0.get(i, j, l, m)
    }

    pub fn as_tensor(&self) -> &Tensor4 {
        &self.0
    }

    /// Largest violation of antisymmetry in `(i, j)` and in `(l, m)`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let v = self.get(i, j, l, m);
                        worst = worst.max((v + self.get(j, i, l, m)).abs()).max((v + self.get(i, j, m, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `R_{ijlm} = R_{ij}^{ab} g_{al} g_{bm}`.
    pub fn lowered(&self, metric: &SymMatrix) -> Tensor4 {
        let n = self.dim();
        let g = metric.matrix();
        // contract one upper slot at a time: n^5 instead of n^6
        let mut half = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    for m in 0..n {
                        let s: f64 = (0..n).map(|b| self.get(i, j, a, b) * g[(b, m)]).sum();
                        half.set(i, j, a, m, s);
                    }
                }
            }
        }
        Tensor4::from_fn(n, |i, j, l, m| (0..n).map(|a| half.get(i, j, a, m) * g[(a, l)]).sum())
    }

    /// Ricci contraction `R_{ij}^{lj}` (mixed, first index down).
    pub fn ricci_mixed(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, l| (0..n).map(|j| self.get(i, j, l, j)).sum())
    }
}

/// Parity of a sequence of distinct integers: `+1` even, `-1` odd.
fn perm_sign(seq: &[usize]) -> i32 {
    let mut inversions = 0;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `delta^{upper}_{lower}`: the determinant of `(delta^{upper_a}_{lower_b})`.
pub fn kron_delta(upper: &[usize], lower: &[usize]) -> Result<i32> {
    if upper.len() != lower.len() {
        return domain(format!("index lists differ in length: {} vs {}", upper.len(), lower.len()));
    }
    let distinct = |s: &[usize]| (0..s.len()).all(|a| (a + 1..s.len()).all(|b| s[a] != s[b]));
    if !distinct(upper) || !distinct(lower) {
        return Ok(0);
    }
    let mut su = upper.to_vec();
    let mut sl = lower.to_vec();
    su.sort_unstable();
    sl.sort_unstable();
    if su != sl {
        return Ok(0);
    }
    Ok(perm_sign(upper) * perm_sign(lower))
}

type Pairing = (Vec<(usize, usize)>, f64);

/// Representative pairings of the positions `0..2m`.
struct PairPatterns {
    /// Pairs increasing, pairs sorted by first element.
    upper: Vec<Pairing>,
    /// Pairs increasing, any pair order.
    lower: Vec<Pairing>,
}

impl PairPatterns {
    fn new(m: usize) -> Self {
        let positions: Vec<usize> = (0..2 * m).collect();
        let mut upper = Vec::new();
        partitions(&positions, &mut Vec::new(), &mut upper);
        let mut lower = Vec::new();
        sequences(&positions, &mut Vec::new(), &mut lower);
        Self { upper, lower }
    }
}

fn flatten(pairs: &[(usize, usize)]) -> Vec<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn partitions(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
    if rest.is_empty() {
        out.push((acc.clone(), perm_sign(&flatten(acc)) as f64));
        return;
    }
    let a = rest[0];
    for bi in 1..rest.len() {
        let b = rest[bi];
        let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != b).collect();
        acc.push((a, b));
        partitions(&remaining, acc, out);
        acc.pop();
    }
}

fn sequences(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
    if rest.is_empty() {
        out.push((acc.clone(), perm_sign(&flatten(acc)) as f64));
        return;
    }
    for ai in 0..rest.len() {
        for bi in ai + 1..rest.len() {
            let (a, b) = (rest[ai], rest[bi]);
            let remaining: Vec<usize> = rest.iter().copied().filter(|&x| x != a && x != b).collect();
            acc.push((a, b));
            sequences(&remaining, acc, out);
            acc.pop();
        }
    }
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == size {
            out.push(acc.clone());
            return;
        }
        for i in start..n {
            if n - i < size - acc.len() {
                break;
            }
            acc.push(i);
            rec(i + 1, n, size, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Sum over representative pairings of `sgn * prod_c R_{U pair c}^{V pair c}`,
/// with offset buffers reused across calls.
struct PairingSum {
    m: usize,
    upper: Vec<(usize, usize)>,
    upper_sign: Vec<f64>,
    lower: Vec<(usize, usize)>,
    lower_sign: Vec<f64>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl PairingSum {
    fn new(m: usize) -> Self {
        let pats = PairPatterns::new(m);
        let (upper, upper_sign) = (
            pats.upper.iter().flat_map(|(p, _)| p.iter().copied()).collect::<Vec<_>>(),
            pats.upper.iter().map(|(_, s)| *s).collect::<Vec<_>>(),
        );
        let (lower, lower_sign) = (
            pats.lower.iter().flat_map(|(p, _)| p.iter().copied()).collect::<Vec<_>>(),
            pats.lower.iter().map(|(_, s)| *s).collect::<Vec<_>>(),
        );
        Self { m, rows: vec![0; upper.len()], cols: vec![0; lower.len()], upper, upper_sign, lower, lower_sign }
    }

    fn eval(&mut self, riem: &Riemann4, upper_set: &[usize], lower_set: &[usize]) -> f64 {
        let n = riem.dim();
        let data = &riem.0.data;
        for (row, &(a, b)) in self.rows.iter_mut().zip(&self.upper) {
            *row = (upper_set[a] * n + upper_set[b]) * n * n;
        }
        for (col, &(a, b)) in self.cols.iter_mut().zip(&self.lower) {
            *col = lower_set[a] * n + lower_set[b];
        }
        let m = self.m;
        let mut acc = 0.0;
        for (p, su) in self.upper_sign.iter().enumerate() {
            let rows = &self.rows[p * m..(p + 1) * m];
            for (l, sl) in self.lower_sign.iter().enumerate() {
                let cols = &self.cols[l * m..(l + 1) * m];
                let mut prod = su * sl;
                for (r, c) in rows.iter().zip(cols) {
                    prod *= data[r + c];
                }
                acc += prod;
            }
        }
        acc
    }
}

/// `L_k = 2^{-k} delta^{i_1..i_2k}_{j_1..j_2k} R_{i1 i2}^{j1 j2} ... R_{i(2k-1) i2k}^{j(2k-1) j2k}`.
///
/// Cost `C(n, 2k) (2k-1)!! (2k)!/2^k` products of `k` factors; the reduction
/// order is fixed, so results are bit-stable.
pub fn lk_contract(riem: &Riemann4, k: usize) -> Result<f64> {
    let n = riem.dim();
    if k == 0 || 2 * k > n {
        return domain(format!("L_k needs 1 <= k and 2k <= n, got k = {k}, n = {n}"));
    }
    let mut pairings = PairingSum::new(k);
    let mut total = 0.0;
    for set in combinations(n, 2 * k) {
        total += pairings.eval(riem, &set, &set);
    }
    Ok(factorial(k) * 2f64.powi(k as i32) * total)
}

/// Lazily filled exterior power `W_U^V` of `R` on `2(k-1)`-subsets, from
/// which single entries of `P_(k)^{st}_{ab}` are assembled.
struct PkEntries<'a> {
    riem: &'a Riemann4,
    k: usize,
    pairings: PairingSum,
    slot: Vec<usize>,
    count: usize,
    w: Vec<f64>,
    big_sets: Vec<u32>,
}

fn mask_of(s: &[usize]) -> u32 {
    s.iter().fold(0u32, |acc, &i| acc | (1 << i))
}

impl<'a> PkEntries<'a> {
    fn new(riem: &'a Riemann4, k: usize) -> Result<Self> {
        let n = riem.dim();
        if k == 0 || 2 * k > n {
            return domain(format!("P_(k) needs 1 <= k and 2k <= n, got k = {k}, n = {n}"));
        }
        let small_sets = combinations(n, 2 * (k - 1));
        let mut slot = vec![usize::MAX; 1 << n];
        for (pos, s) in small_sets.iter().enumerate() {
            slot[mask_of(s) as usize] = pos;
        }
        let count = small_sets.len();
        Ok(Self {
            riem,
            k,
            pairings: PairingSum::new(k - 1),
            slot,
            count,
            w: vec![f64::NAN; count * count],
            big_sets: combinations(n, 2 * k).iter().map(|s| mask_of(s)).collect(),
        })
    }

    fn members(mut mask: u32, out: &mut [usize; 32]) -> usize {
        let mut len = 0;
        while mask != 0 {
            out[len] = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            len += 1;
        }
        len
    }

    /// `W_U^V`, each pairing representative standing for `m! 4^m` orderings.
    fn w(&mut self, u: u32, v: u32) -> f64 {
        let idx = self.slot[u as usize] * self.count + self.slot[v as usize];
        if self.w[idx].is_nan() {
            let m = self.k - 1;
            let weight = factorial(m) * 4f64.powi(m as i32);
            let (mut us, mut vs) = ([0; 32], [0; 32]);
            let (lu, lv) = (Self::members(u, &mut us), Self::members(v, &mut vs));
            self.w[idx] = weight * self.pairings.eval(self.riem, &us[..lu], &vs[..lv]);
        }
        self.w[idx]
    }

    /// `P^{st}_{ab}` for `s != t`, `a != b`.
    fn entry(&mut self, s: usize, t: usize, a: usize, b: usize) -> f64 {
        let above = |mask: u32, i: usize| (mask >> (i + 1)).count_ones();
        let top = (1u32 << s) | (1 << t);
        let bottom = (1u32 << a) | (1 << b);
        let need = top | bottom;
        let mut acc = 0.0;
        for bi in 0..self.big_sets.len() {
            let big = self.big_sets[bi];
            if big & need != need {
                continue;
            }
            let (u, v) = (big & !top, big & !bottom);
            // sign of sorting (U.., s, t) and (V.., a, b)
            let parity = above(u, s) + above(u, t) + above(v, a) + above(v, b) + u32::from(s > t) + u32::from(a > b);
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.w(u, v);
        }
        0.5f64.powi(self.k as i32) * acc
    }
}

/// Mixed `P_(k)^{st}_{ab} = 2^{-k} delta^{i_1..i_{2k-2} s t}_{j_1..j_{2k-2} a b} R ... R`
/// (`k - 1` curvature factors).
pub fn pk_mixed(riem: &Riemann4, k: usize) -> Result<Tensor4> {
    let n = riem.dim();
    let mut entries = PkEntries::new(riem, k)?;
    let mut p = Tensor4::zeros(n);
    for s in 0..n {
        for t in s + 1..n {
            for a in 0..n {
                for b in a + 1..n {
                    let val = entries.entry(s, t, a, b);
                    p.set(s, t, a, b, val);
                    p.set(t, s, a, b, -val);
                    p.set(s, t, b, a, -val);
                    p.set(t, s, b, a, val);
                }
            }
        }
    }
    Ok(p)
}

/// `Q^s_b = sum_j P_(k)^{sj}_{jb} = -(n-2k+1) 2^{-k} delta^{i_1..i_{2k-2} s}_{j_1..j_{2k-2} b} R ... R`.
pub fn pk_trace(riem: &Riemann4, k: usize) -> Result<DMatrix<f64>> {
    let n = riem.dim();
    let mut entries = PkEntries::new(riem, k)?;
    let above = |mask: u32, i: usize| (mask >> (i + 1)).count_ones();
    let mid_sets: Vec<u32> = combinations(n, 2 * k - 1).iter().map(|s| mask_of(s)).collect();
    let scale = -((n + 1 - 2 * k) as f64) * 0.5f64.powi(k as i32);
    let mut q = DMatrix::zeros(n, n);
    for s in 0..n {
        for b in 0..n {
            let need = (1u32 << s) | (1 << b);
            let mut acc = 0.0;
            for &mid in &mid_sets {
                if mid & need != need {
                    continue;
                }
                let (u, v) = (mid & !(1 << s), mid & !(1 << b));
                let sign = if (above(u, s) + above(v, b)) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * entries.w(u, v);
            }
            q[(s, b)] = scale * acc;
        }
    }
    Ok(q)
}

/// Contravariant `P_(k)^{stlm} = P_(k)^{st}_{ab} g^{al} g^{bm}`.
pub fn pk_tensor(riem: &Riemann4, metric: &SymMatrix, k: usize) -> Result<Tensor4> {
    let n = riem.dim();
    if metric.dim() != n {
        return domain(format!("metric dimension {} does not match tensor dimension {n}", metric.dim()));
    }
    let ginv = metric
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| crate::Error::Domain("metric is singular".into()))?;
    let mixed = pk_mixed(riem, k)?;
    let mut half = Tensor4::zeros(n);
    for s in 0..n {
        for t in 0..n {
            for a in 0..n {
                for mm in 0..n {
                    let v: f64 = (0..n).map(|b| mixed.get(s, t, a, b) * ginv[(b, mm)]).sum();
                    half.set(s, t, a, mm, v);
                }
            }
        }
    }
    Ok(Tensor4::from_fn(n, |s, t, l, mm| (0..n).map(|a| half.get(s, t, a, mm) * ginv[(a, l)]).sum()))
}

/// Central-difference Euclidean divergence `sum_i d_i T_k^{ij}(D^2 u)` at `x`.
///
/// The exact divergence vanishes for every smooth `u`, so the returned vector
/// is pure truncation error, `O(h^2)`.
pub fn divergence_residual_tk(spec: &MetricSpec, k: usize, x: &[f64], h: f64) -> Result<DVector<f64>> {
    let n = x.len();
    if k >= n {
        return domain(format!("T_{k} requires k <= n-1 = {}", n - 1));
    }
    let mut div = DVector::zeros(n);
    let mut y = x.to_vec();
    for i in 0..n {
        y[i] = x[i] + h;
        let plus = newton_tensor(k, &spec.jet_at(&y)?.hessian)?;
        y[i] = x[i] - h;
        let minus = newton_tensor(k, &spec.jet_at(&y)?.hessian)?;
        y[i] = x[i];
        for j in 0..n {
            div[j] += (plus.get(i, j) - minus.get(i, j)) / (2.0 * h);
        }
    }
    Ok(div)
}

/// Christoffel symbols of `g = e^{-2u} delta`:
/// `Gamma^c_{ab} = -(u_a delta_bc + u_b delta_ac - u_c delta_ab)`, stored `[c][a][b]`.
pub fn christoffel_conformal(grad: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = grad.len();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    (0..n)
        .map(|c| {
            (0..n)
                .map(|a| (0..n).map(|b| -(grad[a] * d(b, c) + grad[b] * d(a, c) - grad[c] * d(a, b))).collect())
                .collect()
        })
        .collect()
}

/// Covariant divergence `nabla_i P_(k)^{ijlm}` in `g = e^{-2u} delta`, with the
/// partial derivatives taken by central differences. Returned flattened as
/// `[(j * n + l) * n + m]`.
pub fn divergence_residual_pk(spec: &MetricSpec, k: usize, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let p_at = |y: &[f64]| crate::confgeom::pk_at(spec, y, k);
    let center = p_at(x)?;
    let jet = spec.jet_at(x)?;
    let gamma = christoffel_conformal(jet.gradient.as_slice());
    let mut out = vec![0.0; n * n * n];
    let mut y = x.to_vec();
    for i in 0..n {
        y[i] = x[i] + h;
        let plus = p_at(&y)?;
        y[i] = x[i] - h;
        let minus = p_at(&y)?;
        y[i] = x[i];
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    out[(j * n + l) * n + m] += (plus.get(i, j, l, m) - minus.get(i, j, l, m)) / (2.0 * h);
                }
            }
        }
    }
    // connection terms; Gamma^i_{ia} = -n u_a
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    let trace: f64 = (0..n).map(|i| gamma[i][i][a]).sum();
                    s += trace * center.get(a, j, l, m);
                    for i in 0..n {
                        s += gamma[j][i][a] * center.get(i, a, l, m)
                            + gamma[l][i][a] * center.get(i, j, a, m)
                            + gamma[m][i][a] * center.get(i, j, l, a);
                    }
                }
                out[(j * n + l) * n + m] += s;
            }
        }
    }
    Ok(out)
}
