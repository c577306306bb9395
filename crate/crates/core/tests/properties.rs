use std::sync::Arc;

use proptest::prelude::*;
use realdec::cpmap::{choi, is_cp, kraus_apply, kraus_from_choi, CpStatus};
use realdec::decnorm::{cb_norm, dec_norm, jordan_split};
use realdec::mat::{
    c_form, max_eigenvalue, op_norm, partial_trace, realify, sym_eigenvalues, ComplexMatrix,
    TraceOut,
};
use realdec::opsys::{canonical_map, complexify_map, Canonical};
use realdec::{LinearMap, MatrixSystem, RealMatrix};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(-2.0f64..2.0, rows * cols)
        .prop_map(move |v| RealMatrix::new(rows, cols, v).unwrap())
}

fn m(n: usize) -> Arc<MatrixSystem> {
    Arc::new(MatrixSystem::full_real(n).unwrap())
}

fn map_m2_m2() -> impl Strategy<Value = LinearMap> {
    prop::collection::vec(matrix(2, 2), 4)
        .prop_map(|imgs| LinearMap::new(&m(2), &m(2), imgs).unwrap())
}

fn kraus_map(n: usize, k: usize) -> impl Strategy<Value = (Vec<RealMatrix>, LinearMap)> {
    prop::collection::vec(matrix(n, k), 1..4).prop_map(move |ks| {
        let map = LinearMap::from_fn(&m(n), &m(k), |x| kraus_apply(&ks, x)).unwrap();
        (ks, map)
    })
}

/// Closed-form eigenvalues of the Hermitian matrix `[[a, b + ic], [b − ic, d]]`.
fn hermitian_2x2_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b + c * c).sqrt();
    (mean - rad, mean + rad)
}

/// Largest singular value by power iteration on `AᵀA`.
fn power_norm(a: &RealMatrix) -> f64 {
    let g = a.tr_matmul(a);
    let n = g.rows();
    let mut v = RealMatrix::new(n, 1, (0..n).map(|i| 1.0 + 0.1 * i as f64).collect()).unwrap();
    let mut lam = 0.0;
    for _ in 0..2000 {
        let w = g.matmul(&v);
        let nw = w.frobenius_norm();
        if nw == 0.0 {
            return 0.0;
        }
        lam = nw / v.frobenius_norm();
        v = w.scale(1.0 / nw);
    }
    lam.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realified_hermitian_spectrum_is_doubled(a in -2.0f64..2.0, b in -2.0f64..2.0,
                                               c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let re = RealMatrix::from_rows(&[vec![a, b], vec![b, d]]).unwrap();
        let im = RealMatrix::from_rows(&[vec![0.0, c], vec![-c, 0.0]]).unwrap();
        let r = realify(&ComplexMatrix::new(re, im).unwrap()).unwrap();
        let ev = sym_eigenvalues(&r);
        let (lo, hi) = hermitian_2x2_eigenvalues(a, b, c, d);
        for (got, want) in ev.iter().zip([lo, lo, hi, hi]) {
            prop_assert!((got - want).abs() < 1e-10, "{ev:?} vs {lo} {hi}");
        }
        // PSD over C exactly when PSD after realification.
        prop_assert_eq!(lo >= -1e-12, ev[0] >= -1e-12);
    }

    #[test]
    fn op_norm_matches_power_iteration(a in matrix(3, 4)) {
        let n = op_norm(&a);
        prop_assert!((n - power_norm(&a)).abs() <= 1e-8 * n.max(1.0));
    }

    #[test]
    fn op_norm_is_submultiplicative(a in matrix(3, 3), b in matrix(3, 3)) {
        prop_assert!(op_norm(&a.matmul(&b)) <= op_norm(&a) * op_norm(&b) * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn op_norm_is_orthogonally_invariant(a in matrix(3, 3), v in matrix(3, 1), w in matrix(3, 1)) {
        prop_assume!(v.frobenius_norm() > 1e-3 && w.frobenius_norm() > 1e-3);
        let householder = |v: &RealMatrix| {
            let vv = v.matmul(&v.transpose()).scale(2.0 / v.dot(v));
            &RealMatrix::identity(3) - &vv
        };
        let (q1, q2) = (householder(&v), householder(&w));
        let n = op_norm(&a);
        prop_assert!((op_norm(&q1.matmul(&a).matmul(&q2)) - n).abs() <= 1e-10 * n.max(1.0));
    }

    #[test]
    fn involution_transposes_the_choi_matrix(u in map_m2_m2()) {
        let c = choi(&u).unwrap().matrix;
        let cs = choi(&u.involute()).unwrap().matrix;
        prop_assert!((&cs - &c.transpose()).max_abs() < 1e-12);
    }

    #[test]
    fn choi_partial_trace_is_value_at_identity(u in map_m2_m2()) {
        let c = choi(&u).unwrap().matrix;
        let pt = partial_trace(&c, (2, 2), TraceOut::First).unwrap();
        prop_assert!((&pt - &u.at_identity()).max_abs() < 1e-12);
    }

    #[test]
    fn kraus_round_trip((_, u) in kraus_map(2, 3)) {
        let c = choi(&u).unwrap().matrix;
        let ks = kraus_from_choi(&c, 2).unwrap();
        prop_assert!(ks.len() <= 6);
        for b in u.domain().basis() {
            let diff = &kraus_apply(&ks, b) - &u.apply(b).unwrap();
            prop_assert!(diff.max_abs() < 1e-9 * u.size().max(1.0));
        }
    }

    #[test]
    fn jordan_parts_are_selfadjoint_and_skew(u in map_m2_m2()) {
        let (sa, skew) = jordan_split(&u);
        prop_assert!(sa.is_selfadjoint(1e-14));
        prop_assert!(skew.is_skew(1e-14));
        prop_assert!(sa.add(&skew).unwrap().distance(&u).unwrap() <= 1e-14 * u.size().max(1.0));
    }

    #[test]
    fn complexification_is_functorial(u in map_m2_m2(), v in map_m2_m2()) {
        let lhs = complexify_map(&v.compose(&u).unwrap()).unwrap();
        let rhs = complexify_map(&v).unwrap().compose(&complexify_map(&u).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        prop_assert!(lhs.commutes_with_complex_structure(1e-12).unwrap());
    }

    #[test]
    fn conjugation_theta_preserves_positivity(x in matrix(2, 2), y in matrix(2, 2)) {
        // c(x, y) with x symmetric and y antisymmetric is Hermitian; make it PSD.
        let z = c_form(&x, &y);
        let p = z.tr_matmul(&z);
        let v = Arc::new(MatrixSystem::complex_full(2).unwrap());
        let theta = canonical_map(Canonical::Theta, &v).unwrap();
        let tp = theta.apply(&p).unwrap();
        prop_assert!(sym_eigenvalues(&tp)[0] >= -1e-10 * max_eigenvalue(&p).max(1.0));
        // θ is an involution.
        prop_assert!((&theta.apply(&tp).unwrap() - &p).max_abs() < 1e-12);
    }

    #[test]
    fn coordinates_round_trip(coeffs in prop::collection::vec(-3.0f64..3.0, 4)) {
        let h = MatrixSystem::quaternion().unwrap();
        let x = h.combine(&coeffs);
        let back = h.coordinates(&x).unwrap();
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dec_norm_axioms(u in map_m2_m2(), v in map_m2_m2(), s in -3.0f64..3.0) {
        let du = dec_norm(&u).unwrap().value().unwrap();
        let dv = dec_norm(&v).unwrap().value().unwrap();
        let dsum = dec_norm(&u.add(&v).unwrap()).unwrap().value().unwrap();
        prop_assert!(dsum <= du + dv + 1e-7);
        let dscaled = dec_norm(&u.scale(s)).unwrap().value().unwrap();
        prop_assert!((dscaled - s.abs() * du).abs() <= 1e-6 * du.max(1.0));
        let dstar = dec_norm(&u.involute()).unwrap().value().unwrap();
        prop_assert!((dstar - du).abs() <= 1e-6 * du.max(1.0));
        let cb = cb_norm(&u).unwrap();
        prop_assert!(cb <= du + 1e-7);
        // Over a full codomain both norms dominate the norm of u(I).
        prop_assert!(op_norm(&u.at_identity()) <= cb + 1e-7);
    }

    #[test]
    fn cp_maps_pass_the_cp_test((_, u) in kraus_map(2, 2)) {
        prop_assert_eq!(is_cp(&u, 1e-9).unwrap().status, CpStatus::Cp);
        let d = dec_norm(&u).unwrap().value().unwrap();
        prop_assert!((d - op_norm(&u.at_identity())).abs() <= 1e-6 * d.max(1.0));
    }
}
