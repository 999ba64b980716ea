use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gbc_core::confgeom::riemann_from_schouten;
use gbc_core::horizon::{rhs_area, StarSurface, SurfaceSamples};
use gbc_core::profile::expr::{self, jet_eval};
use gbc_core::quadrature::{extrapolate, sphere_area, SphereGrid};
use gbc_core::symfun::{
    cone_membership, newton_maclaurin_gap, newton_tensor, sample_cone_vector, sample_orthogonal, sigma_all,
    superadditivity_gap, ConeLabel, EigenvalueVector, SymMatrix, CONE_TOL,
};
use gbc_core::tensor::{kron_delta, lk_contract};

fn sym_matrix(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        SymMatrix::from_symmetric((&m + m.transpose()) * 0.5)
    })
}

fn dim_and_matrix() -> impl Strategy<Value = (usize, SymMatrix)> {
    (3usize..=7).prop_flat_map(|n| (Just(n), sym_matrix(n)))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_conjugation_invariant((n, b) in dim_and_matrix(), seed in any::<u64>()) {
        let q = sample_orthogonal(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let c = SymMatrix::from_symmetric(&q * b.matrix() * q.transpose());
        for (x, y) in b.sigmas().iter().zip(c.sigmas()) {
            prop_assert!(close(*x, y, 1e-10));
        }
    }

    #[test]
    fn sigmas_match_characteristic_polynomial(values in prop::collection::vec(-3.0f64..3.0, 1..8), t in -2.0f64..2.0) {
        let prod: f64 = values.iter().map(|v| 1.0 + t * v).product();
        let series: f64 = sigma_all(&values).iter().enumerate().map(|(j, s)| s * t.powi(j as i32)).sum();
        prop_assert!(close(prod, series, 1e-10));
    }

    #[test]
    fn newton_tensor_trace((n, b) in dim_and_matrix(), j in 0usize..6) {
        prop_assume!(j < n);
        let t = newton_tensor(j, &b).unwrap();
        prop_assert!(close(t.trace(), (n - j) as f64 * b.sigma(j).unwrap(), 1e-9));
    }

    #[test]
    fn cones_are_nested(values in prop::collection::vec(-1.0f64..2.0, 2..8), k in 2usize..8) {
        let lambda = EigenvalueVector::new(values).unwrap();
        prop_assume!(k <= lambda.len());
        if cone_membership(&lambda, ConeLabel::open(k), CONE_TOL).unwrap() {
            prop_assert!(cone_membership(&lambda, ConeLabel::open(k - 1), CONE_TOL).unwrap());
            prop_assert!(cone_membership(&lambda, ConeLabel::closed(k), CONE_TOL).unwrap());
        }
    }

    #[test]
    fn newton_maclaurin_in_cone(len in 3usize..8, m in 1usize..7, seed in any::<u64>()) {
        prop_assume!(m < len);
        let lambda = sample_cone_vector(&mut ChaCha8Rng::seed_from_u64(seed), len, ConeLabel::open(m));
        let (g1, g2) = newton_maclaurin_gap(&lambda, m).unwrap();
        prop_assert!(g1 >= -1e-10 && g2 >= -1e-10, "gaps {g1} {g2} for {lambda:?}");
    }

    #[test]
    fn superadditive_on_diagonal_cone(len in 2usize..7, k in 1usize..7, seed in any::<u64>()) {
        prop_assume!(k <= len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SymMatrix::diagonal(sample_cone_vector(&mut rng, len, ConeLabel::open(k)).as_slice());
        let b = SymMatrix::diagonal(sample_cone_vector(&mut rng, len, ConeLabel::open(k)).as_slice());
        prop_assert!(superadditivity_gap(&a, &b, k).unwrap() >= -1e-10);
    }

    #[test]
    fn kron_delta_is_alternating(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), i in 0usize..3) {
        let lower = [0usize, 1, 2, 3];
        let d = kron_delta(&perm, &lower).unwrap();
        let mut swapped = perm.clone();
        swapped.swap(i, i + 1);
        prop_assert_eq!(d.abs(), 1);
        prop_assert_eq!(kron_delta(&swapped, &lower).unwrap(), -d);
        let mut repeated = perm.clone();
        repeated[i + 1] = repeated[i];
        prop_assert_eq!(kron_delta(&repeated, &lower).unwrap(), 0);
    }

    #[test]
    fn schouten_riemann_symmetries_and_trace((n, a) in (4usize..=7).prop_flat_map(|n| (Just(n), sym_matrix(n)))) {
        let riem = riemann_from_schouten(&a);
        prop_assert!(riem.as_tensor().riemann_symmetry_defect() <= 1e-12);
        let scalar = lk_contract(&riem, 1).unwrap();
        prop_assert!(close(scalar, 2.0 * (n - 1) as f64 * a.trace(), 1e-12));
    }

    #[test]
    fn extrapolation_recovers_limit(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, p in 0.5f64..4.0) {
        let radii: Vec<f64> = (0..6).map(|i| 10.0 * 2f64.powi(i)).collect();
        let values: Vec<f64> = radii.iter().map(|r| c0 + c1 * r.powf(-p) + c2 * r.powf(-2.0 * p)).collect();
        let e = extrapolate(&radii, &values, Some(p)).unwrap();
        prop_assert!((e.limit - c0).abs() <= 1e-8 * (1.0 + c1.abs() + c2.abs()), "{e:?}");
    }

    #[test]
    fn expression_display_round_trip(a in -3.0f64..3.0, b in 0.1f64..2.0, c in 0.5f64..3.0, r in 0.2f64..5.0) {
        let params = [("a", a), ("b", b), ("c", c)];
        let e = expr::parse_with_params("a*exp(-b*r^2) - ln(1 + c/r)^2 / (1 + r)^c + sqrt(r)*sin(b*r) - 0.5^-r", &params).unwrap();
        let again = expr::parse_with_params(&e.to_string(), &params).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), e.to_string());
        prop_assert!(close(e.eval(r).unwrap(), again.eval(r).unwrap(), 1e-14));
    }

    #[test]
    fn jets_match_finite_differences(a in -2.0f64..2.0, b in 0.2f64..2.0, r in 0.5f64..4.0) {
        let e = expr::parse_with_params("a*exp(-b*r^2) + 1/(1+r^2)^b", &[("a", a), ("b", b)]).unwrap();
        let d = jet_eval(&e, r, 2).unwrap();
        let h = 1e-4;
        let f = |x: f64| e.eval(x).unwrap();
        prop_assert!(close(d[1], (f(r + h) - f(r - h)) / (2.0 * h), 1e-6));
        prop_assert!(close(d[2], (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h), 1e-4));
    }

    #[test]
    fn area_rhs_scaling(n in 5usize..=8, k in 1usize..4, lambda in 0.2f64..5.0) {
        prop_assume!(2 * k < n);
        let area = sphere_area(n - 1);
        let scaled = rhs_area(area * lambda.powi(n as i32 - 1), n, k);
        prop_assert!(close(scaled, lambda.powi((n - 2 * k) as i32), 1e-12));
    }

    #[test]
    fn ellipsoid_area_below_bounding_sphere(a in 0.3f64..2.0, b in 0.3f64..2.0) {
        let grid = SphereGrid::new(5, 9).unwrap();
        let ell = SurfaceSamples::new(&StarSurface::ellipsoid(vec![0.0; 5], a, b).unwrap(), &grid).unwrap().area();
        let lo = a.min(b).powi(4) * sphere_area(4);
        let hi = a.max(b).powi(4) * sphere_area(4);
        prop_assert!(ell >= lo * (1.0 - 1e-9) && ell <= hi * (1.0 + 1e-9));
    }
}

#[test]
fn sphere_area_recursion() {
    assert!(close(sphere_area(1), 2.0 * std::f64::consts::PI, 1e-15));
    assert!(close(sphere_area(2), 4.0 * std::f64::consts::PI, 1e-15));
    for d in 3..10 {
        assert!(close(sphere_area(d), 2.0 * std::f64::consts::PI / (d - 1) as f64 * sphere_area(d - 2), 1e-14));
    }
}
