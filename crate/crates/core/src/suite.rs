//! Seeded verification suites.
//!
//! Each suite draws random instances from a ChaCha stream keyed by
//! `(seed, trial)`, measures the quantities of one identity or inequality,
//! and records them with the tolerance used. Trials are independent and may
//! run in parallel; records are collected in trial order, so reports are
//! reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cpmap::{is_cp, CpStatus};
use crate::decnorm::{
    cb_norm, dec_norm, dec_norm_hermitian, delta_value, imaginary_part_map, jordan_split,
    sa_difference_norm, scp_complete, skew_witness, stinespring_scp, Factorization,
};
use crate::error::{Error, Result};
use crate::mat::{c_form, op_norm, sym_eigenvalues, RealMatrix};
use crate::opsys::{
    complexify_map, direct_sum, paulsen_system, LinearMap, MatrixSystem, PaulsenDiagonal,
};
use crate::par::{map_indices, Execution};

/// Suite names and the statement each one checks.
pub const CATALOGUE: [(&str, &str); 13] = [
    ("cp_norms", "for completely positive u: ‖u‖_dec = ‖u‖_cb = ‖u(1)‖"),
    ("complexification", "complexification is a dec-norm isometry: ‖u‖_dec = ‖u_c‖_dec; complex-linear maps have the same real and complex dec norm"),
    ("injective_collapse", "into an injective codomain (a full matrix algebra) the dec and cb norms coincide"),
    ("ordering", "‖u‖_cb ≤ ‖u‖_dec for every map"),
    ("ruan", "‖α u β‖_dec ≤ ‖α‖ ‖u‖_dec ‖β‖, ‖u′∘u‖_dec ≤ ‖u′‖_dec ‖u‖_dec, ‖u ⊕ v‖_dec = max(‖u‖_dec, ‖v‖_dec)"),
    ("jordan", "u = (u + u*)/2 + (u − u*)/2; selfadjoint parts: dec norm = inf ‖u1 + u2‖ over u = u1 − u2; skew parts: single-witness norm = dec norm"),
    ("skew", "skew decomposable u completes to a cp c(s, u) with ‖c(s(1), u(1))‖ = ‖u‖_dec + ‖u(1)‖; ‖c(1, x)‖ = 1 + ‖x‖ for skew x"),
    ("scp_stinespring", "skew decomposable u(a) is the imaginary part of T* π(a) T with ‖T‖² = ‖u‖_cb + ‖u(1)‖"),
    ("paulsen", "‖u‖_cb ≤ t if and only if the Paulsen map Θ_t is completely positive"),
    ("delta", "‖u‖_dec ≤ ‖Σ a_k a_k*‖^{1/2} ‖Σ b_k* b_k‖^{1/2} whenever u(e_k) = a_k b_k"),
    ("quaternion_dims", "the selfadjoint maps H → H form a 10 dimensional space and the skew maps a 6 dimensional space"),
    ("real_gap", "Im on M_n(C) is skew, has zero selfadjoint part and dec norm 1, so Dec is not the span of CP over the reals"),
    ("direct_sum", "‖u ⊕ v‖_dec = max(‖u‖_dec, ‖v‖_dec) and the coordinate projections are cp"),
];

pub fn suite_names() -> Vec<&'static str> {
    CATALOGUE.iter().map(|(n, _)| *n).collect()
}

pub fn citation(name: &str) -> Option<&'static str> {
    CATALOGUE.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

/// Per-trial evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// SHA-256 prefix of the sampled inputs.
    pub inputs_digest: String,
    pub measured: BTreeMap<String, f64>,
    /// Bound each checked quantity was held to.
    pub tolerances: BTreeMap<String, f64>,
    /// `(cb, dec)` pairs computed in this trial.
    pub norm_pairs: Vec<(f64, f64)>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub citation: String,
    pub seed: u64,
    pub trials: usize,
    /// Comparison tolerance override, if one was given.
    pub tol: Option<f64>,
    pub records: Vec<TrialRecord>,
    pub pass: bool,
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    /// All `(cb, dec)` pairs measured in this run.
    pub fn norm_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.records
            .iter()
            .flat_map(|r| r.norm_pairs.iter().copied())
    }

    /// Largest value of `key` across records.
    pub fn max_measured(&self, key: &str) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.measured.get(key).copied())
            .reduce(f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    fn columns(&self) -> Vec<String> {
        let mut keys: Vec<String> = Vec::new();
        for r in &self.records {
            for k in r.measured.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
        keys
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "## {}", self.suite);
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", self.citation);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "seed {} · trials {} · passed {}/{} · {} · {:.2} s",
            self.seed,
            self.trials,
            self.passed(),
            self.records.len(),
            if self.pass { "PASS" } else { "FAIL" },
            self.wall_time
        );
        let _ = writeln!(out);
        let cols = self.columns();
        let _ = write!(out, "| trial | digest |");
        for c in &cols {
            let _ = write!(out, " {c} |");
        }
        let _ = writeln!(out, " pass |");
        let _ = write!(out, "|---|---|");
        for _ in &cols {
            let _ = write!(out, "---|");
        }
        let _ = writeln!(out, "---|");
        for r in &self.records {
            let _ = write!(out, "| {} | `{}` |", r.trial, r.inputs_digest);
            for c in &cols {
                match r.measured.get(c) {
                    Some(v) => {
                        let _ = write!(out, " {} |", fmt_num(*v));
                    }
                    None => {
                        let _ = write!(out, " |");
                    }
                }
            }
            let _ = writeln!(out, " {} |", if r.pass { "yes" } else { "no" });
        }
        let notes: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| {
                r.notes
                    .iter()
                    .map(move |n| format!("trial {}: {n}", r.trial))
            })
            .collect();
        if !notes.is_empty() {
            let _ = writeln!(out);
            for n in notes {
                let _ = writeln!(out, "- {n}");
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = String::from("suite,seed,trial,digest");
        for c in &cols {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",pass\n");
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{}",
                self.suite, self.seed, r.trial, r.inputs_digest
            );
            for c in &cols {
                out.push(',');
                if let Some(v) = r.measured.get(c) {
                    out.push_str(&fmt_num(*v));
                }
            }
            let _ = writeln!(out, ",{}", r.pass);
        }
        out
    }
}

/// 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.11e}");
    // Prefer plain notation in a readable range.
    if (1e-4..1e6).contains(&v.abs()) {
        let digits = 11 - v.abs().log10().floor() as i32;
        let d = digits.max(0) as usize;
        let plain = format!("{v:.d$}");
        let trimmed = if plain.contains('.') {
            plain
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            plain
        };
        return trimmed;
    }
    s
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: usize,
    /// Overrides each suite's main comparison tolerance.
    pub tol: Option<f64>,
    pub execution: Execution,
}

impl SuiteOptions {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            tol: None,
            execution: Execution::default(),
        }
    }
}

/// Runs a named suite.
pub fn run_suite(name: &str, seed: u64, trials: usize, tol: Option<f64>) -> Result<SuiteReport> {
    run_suite_with(
        name,
        &SuiteOptions {
            seed,
            trials,
            tol,
            execution: Execution::default(),
        },
    )
}

pub fn run_suite_with(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let Some(cite) = citation(name) else {
        return Err(Error::UnknownSuite {
            name: name.to_string(),
            valid: suite_names().join(", "),
        });
    };
    if let Some(t) = opts.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Precondition(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    let body: fn(&mut Trial, &mut ChaCha8Rng, f64) -> Result<()> = match name {
        "cp_norms" => cp_norms,
        "complexification" => complexification,
        "injective_collapse" => injective_collapse,
        "ordering" => ordering,
        "ruan" => ruan,
        "jordan" => jordan,
        "skew" => skew,
        "scp_stinespring" => scp_stinespring,
        "paulsen" => paulsen,
        "delta" => delta,
        "quaternion_dims" => quaternion_dims,
        "real_gap" => real_gap,
        "direct_sum" => direct_sum_suite,
        _ => unreachable!("catalogue checked above"),
    };
    let main_tol = opts.tol.unwrap_or(1e-5);
    let start = Instant::now();
    let records = map_indices(opts.trials, opts.execution, |k| {
        let mut rng = trial_rng(opts.seed, k);
        let mut trial = Trial::new(k);
        if let Err(e) = body(&mut trial, &mut rng, main_tol) {
            trial.fail(e.to_string());
        }
        trial.finish()
    });
    let pass = records.iter().all(|r| r.pass);
    Ok(SuiteReport {
        suite: name.to_string(),
        citation: cite.to_string(),
        seed: opts.seed,
        trials: opts.trials,
        tol: opts.tol,
        records,
        pass,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Deterministic generator for `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Trial {
    index: usize,
    hasher: Sha256,
    measured: BTreeMap<String, f64>,
    tolerances: BTreeMap<String, f64>,
    pairs: Vec<(f64, f64)>,
    pass: bool,
    notes: Vec<String>,
}

impl Trial {
    fn new(index: usize) -> Self {
        Self {
            index,
            hasher: Sha256::new(),
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            pairs: Vec::new(),
            pass: true,
            notes: Vec::new(),
        }
    }

    fn absorb(&mut self, u: &LinearMap) {
        for img in u.images() {
            for v in img.as_slice() {
                self.hasher.update(v.to_le_bytes());
            }
        }
    }

    fn absorb_matrix(&mut self, x: &RealMatrix) {
        for v in x.as_slice() {
            self.hasher.update(v.to_le_bytes());
        }
    }

    fn measure(&mut self, key: &str, v: f64) {
        self.measured.insert(key.to_string(), v);
    }

    /// Records `value` under `key` and requires `value ≤ bound`.
    fn check_le(&mut self, key: &str, value: f64, bound: f64) {
        self.measured.insert(key.to_string(), value);
        self.tolerances.insert(key.to_string(), bound);
        if !(value <= bound) {
            self.pass = false;
            self.notes
                .push(format!("{key} = {value:.3e} exceeds {bound:.1e}"));
        }
    }

    fn check(&mut self, key: &str, ok: bool) {
        self.measured
            .insert(key.to_string(), if ok { 1.0 } else { 0.0 });
        if !ok {
            self.pass = false;
            self.notes.push(format!("{key} failed"));
        }
    }

    fn pair(&mut self, cb: f64, dec: f64) {
        self.pairs.push((cb, dec));
    }

    fn fail(&mut self, note: String) {
        self.pass = false;
        self.notes.push(note);
    }

    fn finish(self) -> TrialRecord {
        let digest = self.hasher.finalize();
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        TrialRecord {
            trial: self.index,
            inputs_digest: hex,
            measured: self.measured,
            tolerances: self.tolerances,
            norm_pairs: self.pairs,
            pass: self.pass,
            notes: self.notes,
        }
    }
}

fn dec_value(u: &LinearMap) -> Result<f64> {
    dec_norm(u)?
        .value()
        .ok_or_else(|| Error::Indeterminate("map reported not decomposable".into()))
}

/// Random instance generators shared by suites, tests and benches.
pub mod random {
    use super::*;

    pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> RealMatrix {
        RealMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    pub fn gaussian_symmetric(rng: &mut impl Rng, n: usize) -> RealMatrix {
        gaussian(rng, n, n).symmetric_part()
    }

    pub fn gaussian_antisymmetric(rng: &mut impl Rng, n: usize) -> RealMatrix {
        gaussian(rng, n, n).antisymmetric_part()
    }

    pub fn full(n: usize) -> Arc<MatrixSystem> {
        Arc::new(MatrixSystem::full_real(n).expect("valid size"))
    }

    /// `x ↦ Σ K_kᵀ x K_k` with `r ∈ {1..4}` Gaussian Kraus factors, scaled by `1/r`.
    pub fn cp_map(
        rng: &mut impl Rng,
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
    ) -> Result<LinearMap> {
        let n = domain.ambient();
        let m = codomain.ambient();
        let r = rng.random_range(1..=4);
        let kraus: Vec<RealMatrix> = (0..r).map(|_| gaussian(rng, n, m)).collect();
        let s = 1.0 / r as f64;
        LinearMap::from_fn(domain, codomain, |x| {
            let mut out = RealMatrix::zeros(m, m);
            for k in &kraus {
                out.axpy(s, &k.tr_matmul(&x.matmul(k)));
            }
            codomain.project(&out)
        })
    }

    /// Independent Gaussian images (Gaussian coordinates in an orthonormal
    /// basis of the codomain).
    pub fn general_map(
        rng: &mut impl Rng,
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
    ) -> Result<LinearMap> {
        let m = codomain.ambient();
        let basis: Vec<RealMatrix> = codomain
            .sym_basis()
            .iter()
            .chain(codomain.anti_basis())
            .cloned()
            .collect();
        let images = (0..domain.dim())
            .map(|_| {
                let mut out = RealMatrix::zeros(m, m);
                for b in &basis {
                    out.axpy(rng.sample::<f64, _>(StandardNormal), b);
                }
                out
            })
            .collect();
        LinearMap::new(domain, codomain, images)
    }

    /// `(u − u*)/2` for a Gaussian `u`.
    pub fn skew_map(
        rng: &mut impl Rng,
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
    ) -> Result<LinearMap> {
        Ok(jordan_split(&general_map(rng, domain, codomain)?).1)
    }

    /// `{I, S, K}` or `{I, S1, S2}` inside `M_3`, with Gaussian `S`, `K`.
    pub fn subsystem_m3(rng: &mut impl Rng) -> Result<Arc<MatrixSystem>> {
        let with_anti = rng.random_bool(0.5);
        let s = gaussian_symmetric(rng, 3);
        let second = if with_anti {
            gaussian_antisymmetric(rng, 3)
        } else {
            gaussian_symmetric(rng, 3)
        };
        let sys = MatrixSystem::span(
            "random 3-dim subsystem of M3",
            vec![RealMatrix::identity(3), s, second],
        )?;
        Ok(Arc::new(sys))
    }

    /// `z ↦ Σ a_k z b_k` with complex Gaussian `a_k, b_k`, on realified `M_n(ℂ)`.
    pub fn complex_linear_map(rng: &mut impl Rng, n: usize, terms: usize) -> Result<LinearMap> {
        let c = Arc::new(MatrixSystem::complex_full(n)?);
        let factors: Vec<(RealMatrix, RealMatrix)> = (0..terms)
            .map(|_| {
                let a = c_form(&gaussian(rng, n, n), &gaussian(rng, n, n));
                let b = c_form(&gaussian(rng, n, n), &gaussian(rng, n, n));
                (a, b)
            })
            .collect();
        LinearMap::from_fn(&c, &c, |z| {
            let mut out = RealMatrix::zeros(2 * n, 2 * n);
            for (a, b) in &factors {
                out += &a.matmul(z).matmul(b);
            }
            out
        })
    }
}

use random::{full, gaussian};

fn cp_norms(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let u = random::cp_map(rng, &full(2), &full(3))?;
    t.absorb(&u);
    let dec = dec_value(&u)?;
    let cb = cb_norm(&u)?;
    let ui = op_norm(&u.at_identity());
    t.measure("dec", dec);
    t.measure("cb", cb);
    t.measure("norm_u1", ui);
    t.pair(cb, dec);
    t.check_le("abs_dec_minus_cb", (dec - cb).abs(), tol);
    t.check_le("abs_dec_minus_norm_u1", (dec - ui).abs(), tol);
    Ok(())
}

fn complexification(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let u = random::general_map(rng, &full(2), &full(2))?;
    t.absorb(&u);
    let dec = dec_value(&u)?;
    let dec_c = dec_value(&complexify_map(&u)?)?;
    t.measure("dec", dec);
    t.measure("dec_complexified", dec_c);
    t.check_le("abs_difference", (dec - dec_c).abs(), tol);

    let phi = random::complex_linear_map(rng, 2, 2)?;
    t.absorb(&phi);
    let real_route = dec_value(&phi)?;
    let herm_route = dec_norm_hermitian(&phi)?;
    t.measure("complex_linear_dec_real", real_route);
    t.measure("complex_linear_dec_hermitian", herm_route);
    t.check_le("abs_route_difference", (real_route - herm_route).abs(), tol);
    Ok(())
}

fn injective_collapse(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let domain = match t.index % 4 {
        0 => full(2),
        1 => Arc::new(MatrixSystem::ell_inf(3)?),
        2 => Arc::new(MatrixSystem::quaternion()?),
        _ => full(3),
    };
    let codomain = if t.index.is_multiple_of(2) {
        full(2)
    } else {
        full(3)
    };
    let u = random::general_map(rng, &domain, &codomain)?;
    t.absorb(&u);
    let dec = dec_value(&u)?;
    let cb = cb_norm(&u)?;
    t.measure("dec", dec);
    t.measure("cb", cb);
    t.pair(cb, dec);
    t.check_le("abs_dec_minus_cb", (dec - cb).abs(), tol);
    Ok(())
}

fn ordering(t: &mut Trial, rng: &mut ChaCha8Rng, _tol: f64) -> Result<()> {
    let domain = match t.index % 4 {
        0 => full(2),
        1 => Arc::new(MatrixSystem::ell_inf(3)?),
        2 => Arc::new(MatrixSystem::quaternion()?),
        _ => full(3),
    };
    let codomain = match (t.index / 4) % 4 {
        0 => full(2),
        1 => full(3),
        2 => Arc::new(MatrixSystem::quaternion()?),
        _ => random::subsystem_m3(rng)?,
    };
    let kind = t.index % 3;
    let u = match kind {
        0 => random::general_map(rng, &domain, &codomain)?,
        1 => random::skew_map(rng, &domain, &codomain)?,
        _ => jordan_split(&random::general_map(rng, &domain, &codomain)?).0,
    };
    t.absorb(&u);
    let dec = dec_value(&u)?;
    let cb = cb_norm(&u)?;
    t.measure("dec", dec);
    t.measure("cb", cb);
    t.measure("dec_minus_cb", dec - cb);
    t.measure("codomain_dim", codomain.dim() as f64);
    t.pair(cb, dec);
    t.check_le("cb_minus_dec", cb - dec, 1e-7);
    Ok(())
}

fn ruan(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let m2 = full(2);
    let u = random::general_map(rng, &m2, &m2)?;
    let v = random::general_map(rng, &m2, &m2)?;
    let alpha = gaussian(rng, 2, 2);
    let beta = gaussian(rng, 2, 2);
    t.absorb(&u);
    t.absorb(&v);
    t.absorb_matrix(&alpha);
    t.absorb_matrix(&beta);
    let du = dec_value(&u)?;
    let dv = dec_value(&v)?;
    t.measure("dec_u", du);
    t.measure("dec_v", dv);

    let sandwiched = dec_value(&u.sandwich(&alpha, &beta)?)?;
    let bound = op_norm(&alpha) * du * op_norm(&beta);
    t.measure("dec_alpha_u_beta", sandwiched);
    t.check_le("conjugation_excess", sandwiched - bound, 1e-7);

    let composed = dec_value(&v.compose(&u)?)?;
    t.measure("dec_v_after_u", composed);
    t.check_le("composition_excess", composed - du * dv, 1e-7);

    let sum = direct_sum_map(&u, &v)?;
    let ds = dec_value(&sum)?;
    t.measure("dec_direct_sum", ds);
    t.check_le("abs_direct_sum_minus_max", (ds - du.max(dv)).abs(), tol);
    Ok(())
}

/// `u ⊕ v` between the direct-sum systems.
pub fn direct_sum_map(u: &LinearMap, v: &LinearMap) -> Result<LinearMap> {
    let dom = Arc::new(direct_sum(u.domain(), v.domain())?);
    let cod = Arc::new(direct_sum(u.codomain(), v.codomain())?);
    let (mu, mv) = (u.codomain().ambient(), v.codomain().ambient());
    let zu = RealMatrix::zeros(mu, mu);
    let zv = RealMatrix::zeros(mv, mv);
    let mut images: Vec<RealMatrix> = u.images().iter().map(|x| x.direct_sum(&zv)).collect();
    images.extend(v.images().iter().map(|x| zu.direct_sum(x)));
    LinearMap::new(&dom, &cod, images)
}

fn jordan(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let m2 = full(2);
    let u = random::general_map(rng, &m2, &m2)?;
    t.absorb(&u);
    let (sa, skew) = jordan_split(&u);
    // Recombination is exact up to the rounding of one addition per entry.
    let mut worst_ulps: f64 = 0.0;
    for ((a, b), c) in sa.images().iter().zip(skew.images()).zip(u.images()) {
        for ((x, y), z) in a.as_slice().iter().zip(b.as_slice()).zip(c.as_slice()) {
            let err = (x + y - z).abs();
            let ulp = f64::EPSILON * z.abs().max(x.abs()).max(y.abs()).max(f64::MIN_POSITIVE);
            worst_ulps = worst_ulps.max(err / ulp);
        }
    }
    t.check_le("recombination_ulps", worst_ulps, 4.0);
    t.check("sa_part_selfadjoint", sa.is_selfadjoint(1e-12));
    t.check("as_part_skew", skew.is_skew(1e-12));

    let sa_dec = dec_value(&sa)?;
    let sa_diff = sa_difference_norm(&sa)?;
    t.measure("dec_sa", sa_dec);
    t.measure("sa_difference_norm", sa_diff);
    t.check_le("abs_sa_difference", (sa_dec - sa_diff).abs(), tol);

    let as_dec = dec_value(&skew)?;
    let as_single = skew_witness(&skew)?.value;
    t.measure("dec_as", as_dec);
    t.measure("skew_witness_value", as_single);
    t.check_le("abs_skew_difference", (as_dec - as_single).abs(), tol);
    Ok(())
}

fn skew(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let codomain = if t.index.is_multiple_of(2) {
        full(2)
    } else {
        full(3)
    };
    let u = random::skew_map(rng, &full(2), &codomain)?;
    t.absorb(&u);
    let dec = dec_value(&u)?;
    let comp = scp_complete(&u)?;
    t.measure("dec", dec);
    t.measure("norm_u1", comp.u_identity_norm);
    t.measure("block_norm", comp.block_norm);
    t.check_le(
        "abs_block_norm_identity",
        (comp.block_norm - (dec + comp.u_identity_norm)).abs(),
        tol,
    );
    let bm = crate::cpmap::c_block_map(&comp.s, &u)?;
    let cp = is_cp(&bm, 1e-7)?;
    t.check("completion_cp", cp.status == CpStatus::Cp);

    let x = random::gaussian_antisymmetric(rng, 3);
    t.absorb_matrix(&x);
    let lhs = op_norm(&c_form(&RealMatrix::identity(3), &x));
    t.check_le("abs_c_identity_skew", (lhs - 1.0 - op_norm(&x)).abs(), 1e-8);
    Ok(())
}

fn scp_stinespring(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let m2 = full(2);
    let u = random::skew_map(rng, &m2, &m2)?;
    t.absorb(&u);
    let st = stinespring_scp(&u)?;
    let cb = cb_norm(&u)?;
    let ui = op_norm(&u.at_identity());
    t.measure("cb", cb);
    t.measure("norm_u1", ui);
    t.measure("t_norm_sq", st.t_norm_sq);
    t.measure("dilation_dim", st.dilation_dim as f64);
    t.check_le("reconstruction_residual", st.residual, 1e-6);
    t.check_le("abs_t_norm_identity", (st.t_norm_sq - (cb + ui)).abs(), tol);
    Ok(())
}

/// `Θ_t : [[λI, x], [yᵀ, μI]] ↦ [[λ t I, u(x)], [u(y)ᵀ, μ t I]]` on the
/// scalar-diagonal Paulsen system of the domain.
pub fn paulsen_map(u: &LinearMap, t: f64) -> Result<LinearMap> {
    let v = u.domain();
    let n = v.ambient();
    let m = u.codomain().ambient();
    let s = Arc::new(paulsen_system(n, n, v.basis(), PaulsenDiagonal::Scalar)?);
    let target = full(2 * m);
    LinearMap::from_fn(&s, &target, |z| {
        let lam = z[(0, 0)];
        let mu = z[(n, n)];
        let x = z.block(0, n, n, n);
        let y = z.block(n, 0, n, n).transpose();
        let mut out = RealMatrix::zeros(2 * m, 2 * m);
        out.set_block(0, 0, &RealMatrix::identity(m).scale(lam * t));
        out.set_block(m, m, &RealMatrix::identity(m).scale(mu * t));
        let ux = if x.max_abs() == 0.0 {
            RealMatrix::zeros(m, m)
        } else {
            u.apply_unchecked(&x)
        };
        let uy = if y.max_abs() == 0.0 {
            RealMatrix::zeros(m, m)
        } else {
            u.apply_unchecked(&y)
        };
        out.set_block(0, m, &ux);
        out.set_block(m, 0, &uy.transpose());
        out
    })
}

fn paulsen(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let m2 = full(2);
    let u = if t.index == 0 {
        LinearMap::from_fn(&m2, &m2, |x| x.transpose())?
    } else {
        random::general_map(rng, &m2, &m2)?
    };
    t.absorb(&u);
    let cb = cb_norm(&u)?;
    let dec = dec_value(&u)?;
    t.measure("cb", cb);
    t.measure("dec", dec);
    t.pair(cb, dec);
    if t.index == 0 {
        t.check_le("abs_transpose_cb_minus_2", (cb - 2.0).abs(), 1e-4);
        t.check_le("abs_transpose_dec_minus_2", (dec - 2.0).abs(), 1e-4);
    }
    let above = paulsen_map(&u, cb * (1.0 + tol))?;
    let below = paulsen_map(&u, cb * (1.0 - 1e-3))?;
    let va = is_cp(&above, 1e-8)?;
    let vb = is_cp(&below, 1e-8)?;
    t.measure("margin_above", va.margin.unwrap_or(f64::NAN));
    t.measure("margin_below", vb.margin.unwrap_or(f64::NAN));
    t.check("theta_cp_above_cb", va.status == CpStatus::Cp);
    t.check("theta_not_cp_below_cb", vb.status == CpStatus::NotCp);
    Ok(())
}

fn delta(t: &mut Trial, rng: &mut ChaCha8Rng, _tol: f64) -> Result<()> {
    let l3 = Arc::new(MatrixSystem::ell_inf(3)?);
    let m2 = full(2);
    let u = random::general_map(rng, &l3, &m2)?;
    t.absorb(&u);
    let dec = dec_value(&u)?;
    t.measure("dec", dec);
    let mut min_delta = f64::INFINITY;
    for j in 0..5 {
        let pairs: Vec<(RealMatrix, RealMatrix)> = u
            .images()
            .iter()
            .map(|img| {
                let a = loop {
                    let a = gaussian(rng, 2, 2);
                    if let Some(ai) = crate::mat::spd_inverse(&a.matmul(&a.transpose())) {
                        // a⁻¹ = aᵀ (a aᵀ)⁻¹, kept well conditioned.
                        let inv = a.transpose().matmul(&ai);
                        if op_norm(&a) * op_norm(&inv) <= 100.0 {
                            break (a, inv);
                        }
                    }
                };
                let (a, a_inv) = a;
                let b = a_inv.matmul(img);
                (a, b)
            })
            .collect();
        let f = Factorization::new(&u, pairs)?;
        let d = delta_value(&f);
        t.measure(&format!("delta_{j}"), d);
        min_delta = min_delta.min(d);
    }
    t.check_le("dec_minus_min_delta", dec - min_delta, 1e-7);
    Ok(())
}

/// Dimensions of the `±1` eigenspaces of `u ↦ u*` on all maps `V → V`.
///
/// The involution is written in the matrix units of an orthonormal basis of
/// `V`, where it is an orthogonal symmetry, so the ranks of `(I ± P)/2` are
/// eigenvalue counts above `rank_tol`.
pub fn involution_dimensions(v: &Arc<MatrixSystem>, rank_tol: f64) -> Result<(usize, usize)> {
    let ob: Vec<RealMatrix> = v
        .sym_basis()
        .iter()
        .chain(v.anti_basis())
        .cloned()
        .collect();
    let d = ob.len();
    let mut p = RealMatrix::zeros(d * d, d * d);
    for s in 0..d {
        for r in 0..d {
            // e(x) = <ob_s, x> ob_r
            let e = LinearMap::from_fn(v, v, |x| ob[r].scale(ob[s].dot(x)))?;
            let star = e.involute();
            for i in 0..d {
                let img = star.apply_unchecked(&ob[i]);
                for j in 0..d {
                    p[(j * d + i, s * d + r)] = ob[j].dot(&img);
                }
            }
        }
    }
    let id = RealMatrix::identity(d * d);
    let rank = |m: RealMatrix| {
        sym_eigenvalues(&m.symmetric_part())
            .iter()
            .filter(|&&l| l > rank_tol)
            .count()
    };
    let plus = rank((&id + &p).scale(0.5));
    let minus = rank((&id - &p).scale(0.5));
    Ok((plus, minus))
}

fn quaternion_dims(t: &mut Trial, rng: &mut ChaCha8Rng, _tol: f64) -> Result<()> {
    let h = MatrixSystem::quaternion()?;
    // Any basis of the span gives the same dimensions; later trials use a
    // random one.
    let sys = if t.index == 0 {
        Arc::new(h)
    } else {
        let mix = loop {
            let g = gaussian(rng, 4, 4);
            if crate::mat::spd_inverse(&g.tr_matmul(&g)).is_some() {
                break g;
            }
        };
        let basis = (0..4)
            .map(|i| {
                let c: Vec<f64> = (0..4).map(|j| mix[(i, j)]).collect();
                h.combine(&c)
            })
            .collect();
        Arc::new(MatrixSystem::span("H, random basis", basis)?)
    };
    for b in sys.basis() {
        t.absorb_matrix(b);
    }
    let (sa, skew) = involution_dimensions(&sys, 1e-8)?;
    t.measure("map_space_dim", (sys.dim() * sys.dim()) as f64);
    t.measure("dim_selfadjoint", sa as f64);
    t.measure("dim_skew", skew as f64);
    t.check("dims_are_10_and_6", sa == 10 && skew == 6);
    Ok(())
}

fn real_gap(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let scale = if t.index == 0 {
        1.0
    } else {
        rng.random_range(0.5..2.0)
    };
    let im = imaginary_part_map(2)?.scale(scale);
    t.absorb(&im);
    let defect = im.involute().combine(1.0, &im, 1.0)?.size();
    let (sa, _) = jordan_split(&im);
    let dec = dec_value(&im)?;
    let cb = cb_norm(&im)?;
    t.measure("scale", scale);
    t.measure("dec", dec);
    t.measure("cb", cb);
    t.pair(cb, dec);
    t.check_le("skew_defect", defect, 1e-10);
    t.check_le("sa_part_norm", sa.size(), 1e-10);
    t.check_le("abs_dec_minus_scale", (dec - scale).abs(), tol);
    t.check_le("abs_cb_minus_scale", (cb - scale).abs(), tol);
    Ok(())
}

fn direct_sum_suite(t: &mut Trial, rng: &mut ChaCha8Rng, tol: f64) -> Result<()> {
    let (dv, dw) = match t.index % 3 {
        0 => (full(2), full(2)),
        1 => (Arc::new(MatrixSystem::ell_inf(2)?), full(2)),
        _ => (full(2), Arc::new(MatrixSystem::ell_inf(2)?)),
    };
    let u = random::general_map(rng, &dv, &full(2))?;
    let v = random::general_map(rng, &dw, &full(2))?;
    t.absorb(&u);
    t.absorb(&v);
    let du = dec_value(&u)?;
    let dvv = dec_value(&v)?;
    let sum = direct_sum_map(&u, &v)?;
    let ds = dec_value(&sum)?;
    t.measure("dec_u", du);
    t.measure("dec_v", dvv);
    t.measure("dec_sum", ds);
    t.check_le("abs_sum_minus_max", (ds - du.max(dvv)).abs(), tol);
    let (_, p1, p2) = crate::opsys::direct_sum_projections(&dv, &dw)?;
    let c1 = is_cp(&p1, 1e-8)?;
    let c2 = is_cp(&p2, 1e-8)?;
    t.check("projections_cp", c1.is_cp() && c2.is_cp());
    let unital = &p1.at_identity() - &RealMatrix::identity(dv.ambient());
    t.check_le("projection_unital_defect", unital.max_abs(), 1e-12);
    Ok(())
}
