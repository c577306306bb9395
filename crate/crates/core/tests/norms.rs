use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realdec::cpmap::{block_map, is_cp};
use realdec::decnorm::{cb_norm, dec_norm, dec_norm_hermitian, jordan_split, skew_witness};
use realdec::mat::op_norm;
use realdec::suite::random;
use realdec::{LinearMap, MatrixSystem, RealMatrix};

fn ell(n: usize) -> Arc<MatrixSystem> {
    Arc::new(MatrixSystem::ell_inf(n).unwrap())
}

/// Checks the returned witnesses make `[[S1, u], [u*, S2]]` cp with
/// `max ‖S_k(1)‖` equal to the reported value.
fn assert_witnesses(u: &LinearMap, value: f64) {
    let r = dec_norm(u).unwrap();
    let (s1, s2) = (r.s1.as_ref().unwrap(), r.s2.as_ref().unwrap());
    let bm = block_map(s1, u, s2).unwrap();
    let v = is_cp(&bm, 1e-7).unwrap();
    assert!(v.is_cp(), "witness block map not cp: margin {:?}", v.margin);
    let wn = op_norm(&s1.at_identity()).max(op_norm(&s2.at_identity()));
    assert!(
        (wn - value).abs() <= 1e-6 * value.max(1.0),
        "{wn} vs {value}"
    );
    assert!(
        r.bracket() <= 1e-6 * value.max(1.0),
        "bracket {}",
        r.bracket()
    );
}

#[test]
fn diagonal_codomain_norms_are_row_sums() {
    // For u : l∞_n → l∞_m every norm equals the ℓ∞ operator norm of the
    // coefficient matrix, max_i Σ_k |a_ik|.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, m) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
        let a = random::gaussian(&mut rng, m, n);
        let images = (0..n)
            .map(|k| RealMatrix::diag(&(0..m).map(|i| a[(i, k)]).collect::<Vec<_>>()))
            .collect();
        let u = LinearMap::new(&ell(n), &ell(m), images).unwrap();
        let oracle = (0..m)
            .map(|i| (0..n).map(|k| a[(i, k)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let dec = dec_norm(&u).unwrap().value().unwrap();
        let cb = cb_norm(&u).unwrap();
        assert!(
            (dec - oracle).abs() < 1e-6,
            "{n}->{m}: dec {dec} vs {oracle}"
        );
        assert!((cb - oracle).abs() < 1e-6, "{n}->{m}: cb {cb} vs {oracle}");
        assert_witnesses(&u, dec);
    }
}

#[test]
fn subsystem_codomain_witnesses_certify_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let w = random::subsystem_m3(&mut rng).unwrap();
        let dom = Arc::new(MatrixSystem::full_real(2).unwrap());
        let u = random::general_map(&mut rng, &dom, &w).unwrap();
        let dec = dec_norm(&u).unwrap().value().unwrap();
        let cb = cb_norm(&u).unwrap();
        assert!(cb <= dec + 1e-7);
        assert_witnesses(&u, dec);
    }
}

#[test]
fn full_codomain_witnesses_certify_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = Arc::new(MatrixSystem::quaternion().unwrap());
    let m3 = Arc::new(MatrixSystem::full_real(3).unwrap());
    for dom in [h, ell(3)] {
        let u = random::general_map(&mut rng, &dom, &m3).unwrap();
        let dec = dec_norm(&u).unwrap().value().unwrap();
        assert_witnesses(&u, dec);
    }
}

#[test]
fn restriction_does_not_increase_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m2 = Arc::new(MatrixSystem::full_real(2).unwrap());
    let u = random::general_map(&mut rng, &m2, &m2).unwrap();
    let r = u.restrict(&ell(2)).unwrap();
    let du = dec_norm(&u).unwrap().value().unwrap();
    let dr = dec_norm(&r).unwrap().value().unwrap();
    assert!(dr <= du + 1e-7);
}

#[test]
fn hermitian_route_agrees_with_the_real_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for terms in 1..=3 {
        let phi = random::complex_linear_map(&mut rng, 2, terms).unwrap();
        let real = dec_norm(&phi).unwrap().value().unwrap();
        let herm = dec_norm_hermitian(&phi).unwrap();
        assert!((real - herm).abs() < 1e-5, "{real} vs {herm}");
    }
}

#[test]
fn skew_witness_averages_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let m2 = Arc::new(MatrixSystem::full_real(2).unwrap());
    let u = random::skew_map(&mut rng, &m2, &m2).unwrap();
    let (sa, _) = jordan_split(&u);
    assert!(sa.size() < 1e-14);
    let dec = dec_norm(&u).unwrap();
    let avg = dec.averaged_witness().unwrap();
    let sw = skew_witness(&u).unwrap();
    assert!((sw.value - dec.value().unwrap()).abs() < 1e-6);
    // The averaged pair is itself a single witness.
    let bm = block_map(&avg, &u, &avg).unwrap();
    assert!(is_cp(&bm, 1e-7).unwrap().is_cp());
}
