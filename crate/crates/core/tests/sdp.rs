use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realdec::mat::{max_eigenvalue, RealMatrix};
use realdec::par::Execution;
use realdec::sdp::{solve, SdpProblem, SdpStatus, SolverOptions, SparseSym};

fn symmetric(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let a = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    a.symmetric_part()
}

fn lambda_max_problem(a: &RealMatrix) -> SdpProblem {
    let n = a.rows();
    let mut p = SdpProblem::new(vec![n]);
    p.set_constant(SparseSym::from_dense(0, &a.scale(-1.0)).unwrap());
    p.add_variable(
        1.0,
        SparseSym::from_dense(0, &RealMatrix::identity(n)).unwrap(),
    );
    p
}

/// λ_max by shifted power iteration.
fn power_lambda_max(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let shift = a.as_slice().iter().map(|x| x.abs()).sum::<f64>();
    let mut b = a.clone();
    for i in 0..n {
        b[(i, i)] += shift;
    }
    let mut v = RealMatrix::new(n, 1, (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect()).unwrap();
    let mut prev = f64::NAN;
    for _ in 0..20000 {
        let w = b.matmul(&v);
        let lam = v.dot(&w) / v.dot(&v);
        v = w.scale(1.0 / w.frobenius_norm());
        if (lam - prev).abs() < 1e-15 * lam.abs() {
            break;
        }
        prev = lam;
    }
    v.dot(&b.matmul(&v)) / v.dot(&v) - shift
}

#[test]
fn lambda_max_battery() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..50 {
        let n = 2 + k % 7;
        let a = symmetric(&mut rng, n);
        let sol = solve(&lambda_max_problem(&a), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let jacobi = max_eigenvalue(&a);
        assert!(
            (sol.objective_value - jacobi).abs() <= 1e-7,
            "case {k}: {} vs {jacobi}",
            sol.objective_value
        );
        assert!((jacobi - power_lambda_max(&a)).abs() <= 1e-8, "case {k}");
    }
}

#[test]
fn weak_duality_holds_at_returned_points() {
    // min c·y s.t. F0 + Σ y_i F_i ⪰ 0 over two blocks.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let a = symmetric(&mut rng, 3);
        let b = symmetric(&mut rng, 2);
        let mut p = SdpProblem::new(vec![3, 2]);
        let mut f0 = SparseSym::from_dense(0, &a.scale(-1.0)).unwrap();
        f0.add_dense(1, &b.scale(-1.0)).unwrap();
        p.set_constant(f0);
        let mut f1 = SparseSym::from_dense(0, &RealMatrix::identity(3)).unwrap();
        f1.add_dense(1, &RealMatrix::identity(2)).unwrap();
        p.add_variable(1.0, f1);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        // Dual objective −<F0, X> never exceeds the primal one.
        let dual_obj = -p.constant().dot(&sol.dual);
        assert!(dual_obj <= sol.objective_value + 1e-8);
        assert!((sol.objective_value - max_eigenvalue(&a).max(max_eigenvalue(&b))).abs() < 1e-7);
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let a = symmetric(&mut rng, 6);
    let p = lambda_max_problem(&a);
    let seq = SolverOptions {
        execution: Execution::Sequential,
        ..SolverOptions::default()
    };
    let par = SolverOptions {
        execution: Execution::Parallel,
        ..SolverOptions::default()
    };
    let first = solve(&p, &par).unwrap();
    let second = solve(&p, &par).unwrap();
    let third = solve(&p, &seq).unwrap();
    for s in [&second, &third] {
        assert_eq!(first.objective_value.to_bits(), s.objective_value.to_bits());
        assert_eq!(first.y.len(), s.y.len());
        for (x, y) in first.y.iter().zip(&s.y) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn unbounded_below_is_not_reported_optimal() {
    // min −y s.t. y ≥ 0 only, so y can grow without bound.
    let mut p = SdpProblem::new(vec![1]);
    let mut f1 = SparseSym::new();
    f1.add(0, 0, 0, 1.0);
    p.add_variable(-1.0, f1);
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_ne!(sol.status, SdpStatus::Optimal);
}
