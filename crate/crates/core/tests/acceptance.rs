//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realdec::cpmap::{is_cp, CpStatus};
use realdec::decnorm::{cb_norm, dec_norm};
use realdec::mat::{max_eigenvalue, RealMatrix};
use realdec::sdp::{solve, SdpProblem, SolverOptions, SparseSym};
use realdec::suite::{paulsen_map, run_suite, run_suite_with, SuiteOptions, SuiteReport};
use realdec::{Execution, LinearMap, MatrixSystem};

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite(name: &str, trials: usize, all: &mut Vec<SuiteReport>) -> SuiteReport {
    let r = run_suite(name, SEED, trials, None).expect("catalogue suite");
    all.push(r.clone());
    r
}

fn max_of(r: &SuiteReport, key: &str) -> f64 {
    r.max_measured(key).unwrap_or(f64::NAN)
}

fn summary(r: &SuiteReport) -> String {
    let mut s = format!("{}/{} trials", r.passed(), r.records.len());
    for rec in r.records.iter().filter(|r| !r.pass) {
        for n in &rec.notes {
            s.push_str(&format!("; trial {}: {n}", rec.trial));
        }
    }
    s
}

fn main() {
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut outcomes: Vec<(&str, Outcome)> = Vec::new();

    let r = suite("cp_norms", 25, &mut reports);
    outcomes.push((
        "CP collapse: dec = cb = ‖u(I)‖ on 25 Kraus maps M2 → M3",
        Outcome {
            pass: r.pass && r.wall_time <= 60.0,
            detail: format!(
                "{}, max |dec − cb| {:.2e}, max |dec − ‖u(I)‖| {:.2e}, {:.2} s",
                summary(&r),
                max_of(&r, "abs_dec_minus_cb"),
                max_of(&r, "abs_dec_minus_norm_u1"),
                r.wall_time
            ),
        },
    ));

    let r = suite("complexification", 25, &mut reports);
    outcomes.push((
        "complexification isometry on 25 maps M2 → M2",
        Outcome {
            pass: r.pass,
            detail: format!(
                "{}, max |dec(u) − dec(u_c)| {:.2e}",
                summary(&r),
                max_of(&r, "abs_difference")
            ),
        },
    ));

    // Criterion 3 is evaluated after every suite has contributed its pairs.
    let r = suite("injective_collapse", 25, &mut reports);
    let injective = Outcome {
        pass: r.pass,
        detail: format!(
            "{}, max |dec − cb| {:.2e}",
            summary(&r),
            max_of(&r, "abs_dec_minus_cb")
        ),
    };

    let r = suite("quaternion_dims", 3, &mut reports);
    let quaternion = Outcome {
        pass: r.pass,
        detail: format!(
            "(sa, as) = ({}, {}) over {} bases",
            max_of(&r, "dim_selfadjoint"),
            max_of(&r, "dim_skew"),
            r.records.len()
        ),
    };

    let r = suite("jordan", 25, &mut reports);
    let jordan = Outcome {
        pass: r.pass,
        detail: format!(
            "{}, recombination ≤ {} ulp, sa gap {:.2e}, skew gap {:.2e}",
            summary(&r),
            max_of(&r, "recombination_ulps"),
            max_of(&r, "abs_sa_difference"),
            max_of(&r, "abs_skew_difference")
        ),
    };

    let r = suite("skew", 25, &mut reports);
    let skew = Outcome {
        pass: r.pass,
        detail: format!(
            "{}, block identity gap {:.2e}, ‖c(I,x)‖ gap {:.2e}",
            summary(&r),
            max_of(&r, "abs_block_norm_identity"),
            max_of(&r, "abs_c_identity_skew")
        ),
    };

    let r = suite("scp_stinespring", 10, &mut reports);
    let stinespring = Outcome {
        pass: r.pass,
        detail: format!(
            "{}, residual {:.2e}, ‖T‖² gap {:.2e}",
            summary(&r),
            max_of(&r, "reconstruction_residual"),
            max_of(&r, "abs_t_norm_identity")
        ),
    };

    let r = suite("real_gap", 3, &mut reports);
    let first = &r.records[0].measured;
    let real_gap = Outcome {
        pass: r.pass && first["scale"] == 1.0,
        detail: format!(
            "Im on M2(C): dec {:.9}, cb {:.9}, skew defect {:.1e}, sa part {:.1e}",
            first["dec"], first["cb"], first["skew_defect"], first["sa_part_norm"]
        ),
    };

    let transpose = transpose_benchmark(&mut reports);

    let r = suite("ruan", 25, &mut reports);
    let r2 = suite("direct_sum", 25, &mut reports);
    let ruan = Outcome {
        pass: r.pass && r2.pass,
        detail: format!(
            "ruan {}, direct_sum {}, conjugation excess {:.2e}, composition excess {:.2e}, sum gap {:.2e}",
            summary(&r),
            summary(&r2),
            max_of(&r, "conjugation_excess"),
            max_of(&r, "composition_excess"),
            max_of(&r, "abs_direct_sum_minus_max").max(max_of(&r2, "abs_sum_minus_max"))
        ),
    };

    let r = suite("delta", 10, &mut reports);
    let delta = Outcome {
        pass: r.pass,
        detail: format!(
            "{}, max (dec − δ) {:.2e}",
            summary(&r),
            max_of(&r, "dec_minus_min_delta")
        ),
    };

    let r = suite("ordering", 128, &mut reports);
    suite("paulsen", 6, &mut reports);
    let subsystem_pairs = r
        .records
        .iter()
        .filter(|rec| rec.measured.get("codomain_dim") == Some(&3.0))
        .count();
    let pairs: Vec<(f64, f64)> = reports.iter().flat_map(|r| r.norm_pairs()).collect();
    let violations = pairs
        .iter()
        .filter(|(cb, dec)| cb.is_nan() || dec.is_nan() || *cb > dec + 1e-7)
        .count();
    let worst = pairs
        .iter()
        .map(|(cb, dec)| cb - dec)
        .fold(f64::NEG_INFINITY, f64::max);
    let ordering = Outcome {
        pass: r.pass && pairs.len() >= 150 && subsystem_pairs > 0 && violations == 0,
        detail: format!(
            "{} (cb, dec) pairs, {subsystem_pairs} with subsystem codomains, {violations} violations, max cb − dec {worst:.2e}",
            pairs.len()
        ),
    };

    let battery = solver_battery();

    outcomes.push((
        "ordering cb ≤ dec + 1e-7 over all computed instances",
        ordering,
    ));
    outcomes.push((
        "injective codomain: dec = cb on 25 maps into M2/M3",
        injective,
    ));
    outcomes.push(("quaternion involution eigenspaces (10, 6)", quaternion));
    outcomes.push(("Jordan coherence on 25 maps", jordan));
    outcomes.push(("skew identities on 25 maps and 25 skew matrices", skew));
    outcomes.push(("skew cp Stinespring data on 10 maps", stinespring));
    outcomes.push(("real gap exhibit Im on M2(C)", real_gap));
    outcomes.push(("transpose on M2: dec = cb = 2", transpose));
    outcomes.push(("Ruan / direct sum on 25 triples", ruan));
    outcomes.push(("δ bound on 10 maps l∞3 → M2 × 5 factorizations", delta));

    let elapsed = start.elapsed().as_secs_f64();
    let battery = Outcome {
        pass: battery.pass && elapsed < 600.0,
        detail: format!("{}, total {elapsed:.1} s", battery.detail),
    };
    outcomes.push(("solver battery, determinism, runtime", battery));

    let mut failed = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn transpose_benchmark(reports: &mut Vec<SuiteReport>) -> Outcome {
    let m2 = Arc::new(MatrixSystem::full_real(2).unwrap());
    let t = LinearMap::from_fn(&m2, &m2, |x| x.transpose()).unwrap();
    let dec = dec_norm(&t).unwrap().value().unwrap();
    let cb = cb_norm(&t).unwrap();
    // Independent route: the Paulsen map is cp exactly above the cb norm.
    let above = is_cp(&paulsen_map(&t, 2.0 + 1e-4).unwrap(), 1e-8)
        .unwrap()
        .status;
    let below = is_cp(&paulsen_map(&t, 2.0 - 1e-4).unwrap(), 1e-8)
        .unwrap()
        .status;
    let r = run_suite("paulsen", SEED, 1, None).unwrap();
    reports.push(r.clone());
    Outcome {
        pass: (dec - 2.0).abs() <= 1e-4
            && (cb - 2.0).abs() <= 1e-4
            && above == CpStatus::Cp
            && below == CpStatus::NotCp
            && r.pass,
        detail: format!("dec {dec:.9}, cb {cb:.9}, Paulsen map at 2 ± 1e-4: {above:?} / {below:?}"),
    }
}

fn solver_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let n = 2 + k % 9;
        let a = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).symmetric_part();
        let mut p = SdpProblem::new(vec![n]);
        p.set_constant(SparseSym::from_dense(0, &a.scale(-1.0)).unwrap());
        p.add_variable(
            1.0,
            SparseSym::from_dense(0, &RealMatrix::identity(n)).unwrap(),
        );
        let v = solve(&p, &SolverOptions::default())
            .map(|s| s.objective_value)
            .unwrap_or(f64::NAN);
        let err = (v - max_eigenvalue(&a)).abs();
        worst = if err.is_nan() {
            f64::NAN
        } else {
            worst.max(err)
        };
    }

    let seq = SuiteOptions {
        execution: Execution::Sequential,
        ..SuiteOptions::new(SEED, 4)
    };
    let par = SuiteOptions {
        execution: Execution::Parallel,
        ..SuiteOptions::new(SEED, 4)
    };
    let mut identical = true;
    for name in ["cp_norms", "jordan", "ordering"] {
        let a = run_suite_with(name, &par).unwrap();
        let b = run_suite_with(name, &par).unwrap();
        let c = run_suite_with(name, &seq).unwrap();
        let bits = |r: &SuiteReport| serde_json::to_string(&r.records).unwrap();
        identical &= bits(&a) == bits(&b) && bits(&a) == bits(&c);
    }
    Outcome {
        pass: worst <= 1e-7 && identical,
        detail: format!(
            "50 λ_max programs, max error {worst:.2e}; reruns {}",
            if identical {
                "bitwise identical"
            } else {
                "differ"
            }
        ),
    }
}
