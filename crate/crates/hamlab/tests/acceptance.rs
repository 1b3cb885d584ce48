//! End-to-end acceptance gate: brute-force equivalence on every small group,
//! zero-tolerance exact identities, certificate plateaus with pinned
//! thresholds, and byte-level determinism of every suite's CSV output.

use hamlab::bounds::{run_suite, CertificateReport, SuiteConfig, Verdict};
use hamlab::combin::{binom_big, Workspace};
use hamlab::group::{rep_conv_table, DenseDomain, GroupFunction};
use hamlab::krawtchouk::{
    diff_multiplier, distant_diff_multiplier_mag, kraw_sum, KrawtchoukTable,
};
use hamlab::radial::{
    b_weights, cesaro_kernel, kernel_multiplier, kraw_matrix, noise_profile, sigma_profile,
    CesaroParams, Family, NuMeasure, RadialProfile,
};
use hamlab::scalar::{rat_int, RealScalar};
use hamlab::{GroupParams, Rat};
use num::{One, Signed, Zero};
use std::time::Instant;

/// Floating brute-force comparisons must agree to this sup-norm.
const ORACLE_FLOAT_TOL: f64 = 1e-10;
/// Wall-clock budget for the full small-group equivalence sweep.
const ORACLE_RUNTIME_LIMIT_SECS: f64 = 600.0;
/// Wall-clock budget for the full operator-norm search grid.
const NORMS_RUNTIME_LIMIT_SECS: f64 = 1800.0;
/// Alphabet sizes the exact-identity sweeps cover.
const EXACT_MS: [u32; 3] = [2, 3, 4];
/// Dimension ladder for the identity sweeps that cost more than O(N²):
/// every small dimension (where edge cases live) plus a doubling tail
/// up to the 64 cap.
const LADDER: [usize; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 24, 32, 48, 64];
/// Float noise-multiplier comparisons must agree to this tolerance.
const NOISE_FLOAT_TOL: f64 = 1e-12;
/// The time-averaging measure must have unit mass to this tolerance.
const NU_MASS_TOL: f64 = 1e-10;
/// Reparameterization profile match tolerance (sup over radii).
const REPARAM_SUP_TOL: f64 = 1e-8;
/// Dimension-stability threshold (max/median of the measured series).
const PLATEAU_THRESHOLD: f64 = 3.0;
/// Stricter plateau threshold for the norm-search exhibit.
const NORMS_PLATEAU_THRESHOLD: f64 = 2.0;

fn cfg(ms: &[u32], ns: &[usize]) -> SuiteConfig {
    SuiteConfig::new(ms.to_vec(), ns.to_vec())
}

fn assert_pass(report: &CertificateReport) {
    assert!(
        report.verdict == Verdict::Pass,
        "suite '{}' failed on grid [{}]:\n  {}",
        report.suite,
        report.grid,
        report.failures.join("\n  ")
    );
}

fn csv_blob(report: &CertificateReport) -> String {
    report
        .tables
        .iter()
        .map(|t| format!("== {} ==\n{}", t.name, t.to_csv_string()))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn oracle_sweep_matches_brute_force_on_every_small_group() {
    let start = Instant::now();
    let ms: Vec<u32> = (1..=9).collect();
    let ns: Vec<usize> = (1..=16).collect();
    let config = cfg(&ms, &ns);
    let report = run_suite("oracle", &config).expect("oracle suite runs");
    assert_pass(&report);

    // Every group with at most 100000 elements is covered.
    let expected: usize = ms
        .iter()
        .flat_map(|&m| ns.iter().map(move |&n| (m, n)))
        .filter(|&(m, n)| {
            GroupParams::new(m, n)
                .unwrap()
                .size_checked()
                .is_some_and(|s| s <= 100_000)
        })
        .count();
    assert_eq!(expected, 67, "small-group census changed");
    let table = report
        .tables
        .iter()
        .find(|t| t.name == "oracle")
        .expect("oracle csv");
    assert_eq!(table.rows.len(), expected, "configurations compared");

    let (_, dev) = report
        .measured
        .iter()
        .find(|(k, _)| k == "float_dev_max")
        .expect("float deviation measured");
    assert!(
        *dev <= ORACLE_FLOAT_TOL,
        "float lane deviates by {dev} > {ORACLE_FLOAT_TOL}"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < ORACLE_RUNTIME_LIMIT_SECS,
        "oracle sweep took {elapsed:.1}s, budget {ORACLE_RUNTIME_LIMIT_SECS}s"
    );
}

#[test]
fn krawtchouk_symmetry_and_unit_edges_exact() {
    let ws = Workspace::new(65);
    for &m in &EXACT_MS {
        for n in 1..=64usize {
            let params = GroupParams::new(m, n).unwrap();
            for k in 0..=n {
                assert_eq!(
                    kraw_sum(&ws.bin, params, k as i64, 0),
                    Rat::one(),
                    "κ_k(0) = 1 fails at m={m} n={n} k={k}"
                );
                assert_eq!(
                    kraw_sum(&ws.bin, params, 0, k as i64),
                    Rat::one(),
                    "κ_0(r) = 1 fails at m={m} n={n} r={k}"
                );
                for r in 0..=k {
                    assert_eq!(
                        kraw_sum(&ws.bin, params, k as i64, r as i64),
                        kraw_sum(&ws.bin, params, r as i64, k as i64),
                        "κ_k(r) = κ_r(k) fails at m={m} n={n} k={k} r={r}"
                    );
                }
            }
        }
    }
}

#[test]
fn difference_multipliers_match_literal_differences() {
    let ws = Workspace::new(65);
    for &m in &EXACT_MS {
        for &n in &LADDER {
            let params = GroupParams::new(m, n).unwrap();
            let table = KrawtchoukTable::new(&ws.bin, params);
            for t in 1..=3usize {
                for k in t..=n {
                    for r in 0..=n {
                        // Local family: signed closed form.
                        let mut local = Rat::zero();
                        // Distant family averages σ_{N−k}; its t-th backward
                        // difference walks the index up instead of down.
                        let mut distant = Rat::zero();
                        for j in 0..=t {
                            let mut c = Rat::from_integer(binom_big(t, j));
                            if j % 2 == 1 {
                                c = -c;
                            }
                            local += &c * table.get(r, k - j);
                            if n - k + j <= n {
                                distant += &c * table.get(r, n - k + j);
                            }
                        }
                        assert_eq!(
                            diff_multiplier(&ws.bin, params, t, k, r).unwrap(),
                            local,
                            "local difference closed form fails at m={m} n={n} t={t} k={k} r={r}"
                        );
                        assert_eq!(
                            distant_diff_multiplier_mag(&ws.bin, params, t, k, r).unwrap(),
                            distant.abs(),
                            "distant difference magnitude fails at m={m} n={n} t={t} k={k} r={r}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn negative_order_cesaro_kernels_are_difference_kernels() {
    let ws = Workspace::new(65);
    for &m in &EXACT_MS {
        for &n in &LADDER {
            let params = GroupParams::new(m, n).unwrap();
            for t in 1..=3usize {
                let lambda = rat_int(-(t as i64) - 1);
                for family in [Family::Local, Family::Distant] {
                    for k in 0..=family.cutoff(params) {
                        let kernel = cesaro_kernel(
                            params,
                            &ws.bin,
                            &CesaroParams {
                                lambda: lambda.clone(),
                                n: k,
                                family,
                            },
                        )
                        .unwrap();
                        let mut literal = RadialProfile::<Rat>::zeros(params);
                        for j in 0..=t.min(k) {
                            let mut c = Rat::from_integer(binom_big(t, j));
                            if j % 2 == 1 {
                                c = -c;
                            }
                            let radius = family.sphere_radius(params, k - j) as i64;
                            let sigma = sigma_profile::<Rat>(params, &ws.bin, radius).unwrap();
                            literal.axpy(&c, &sigma);
                        }
                        assert_eq!(
                            kernel.vals, literal.vals,
                            "order −{} kernel is not the literal t-th difference at \
                             m={m} n={n} {} k={k}",
                            t + 1,
                            family.label()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn collision_weights_match_dense_convolution_and_sum_to_one() {
    // Probability identity: each weight family is a probability vector.
    for &m in &EXACT_MS {
        for k in 0..=64usize {
            let w = b_weights(m, k);
            let total: Rat = w.iter().sum();
            assert_eq!(total, Rat::one(), "Σ_d b_k(d) = 1 fails at m={m} k={k}");
            assert!(w.iter().all(|v| !v.is_negative()));
        }
    }
    // Oracle identity: convolving σ_k with the full sphere σ_N on the dense
    // group reproduces the closed form on every sphere, exactly.
    let n = 6usize;
    let ws = Workspace::new(n + 1);
    for &m in &EXACT_MS {
        let params = GroupParams::new(m, n).unwrap();
        let dom = DenseDomain::new(params, 100_000).unwrap();
        let sigma_full = sigma_profile::<Rat>(params, &ws.bin, n as i64).unwrap();
        let dense = GroupFunction::from_radial(&sigma_full, &dom).unwrap();
        let reps = rep_conv_table(&dense, &dom, &ws.bin).unwrap();
        let sizes = params.sphere_sizes(&ws.bin);
        for rc in &reps {
            let d = n - rc.radius;
            for k in 0..=n {
                let expect = if d <= k {
                    b_weights(m, k)[d].clone() / Rat::from_integer(sizes[rc.radius].clone())
                } else {
                    Rat::zero()
                };
                assert_eq!(
                    rc.convs[k], expect,
                    "(σ_k ∗ σ_N) value fails at m={m} k={k} |x|={}",
                    rc.radius
                );
            }
        }
    }
}

#[test]
fn time_measure_has_unit_mass() {
    for &m in &EXACT_MS {
        let params = GroupParams::new(m, 16).unwrap();
        let c_m = params.c_m();
        for p_cap in [&c_m / rat_int(4), &c_m / rat_int(2), c_m.clone()] {
            let nu = NuMeasure::new(params, &p_cap).unwrap();
            let mass = nu.mass_quadrature(1e-12).unwrap();
            assert!(
                (mass - 1.0).abs() <= NU_MASS_TOL,
                "ν mass deviates from 1 by {} at m={m} P={p_cap}",
                (mass - 1.0).abs()
            );
            assert!(
                (nu.mass_analytic() - 1.0).abs() <= 1e-9,
                "closed-form ν mass deviates at m={m} P={p_cap}"
            );
        }
    }
}

#[test]
fn noise_kernel_multiplier_is_geometric() {
    let ws = Workspace::new(65);
    for &m in &EXACT_MS {
        for &n in &LADDER {
            let params = GroupParams::new(m, n).unwrap();
            let c_m = params.c_m();
            let kmat_x = kraw_matrix::<Rat>(params, &ws.bin, &ws.lf);
            let kmat_f = kraw_matrix::<f64>(params, &ws.bin, &ws.lf);
            for p in [&c_m / rat_int(4), &c_m / rat_int(2)] {
                // Exact lane: the eigenvalues are the geometric sequence
                // (1 − p/c_m)^r, with equality of rationals.
                let kernel_x = noise_profile::<Rat>(params, &p).unwrap();
                let eig_x = kernel_multiplier(&kernel_x, &ws.bin, &kmat_x);
                let base_x = Rat::one() - &p / &c_m;
                for r in 0..=n {
                    assert_eq!(
                        eig_x.eig[r],
                        base_x.pow(r as i32),
                        "exact noise multiplier fails at m={m} n={n} r={r} p={p}"
                    );
                }
                // Float lane through the cancellation-safe table.
                let kernel_f = noise_profile::<f64>(params, &p).unwrap();
                let eig_f = kernel_multiplier(&kernel_f, &ws.bin, &kmat_f);
                let base_f = 1.0 - RealScalar::to_f64(&p) / params.c_m_f64();
                for r in 0..=n {
                    let dev = (eig_f.eig[r] - base_f.powi(r as i32)).abs();
                    assert!(
                        dev <= NOISE_FLOAT_TOL,
                        "float noise multiplier deviates by {dev} at m={m} n={n} r={r} p={p}"
                    );
                }
            }
        }
    }
}

#[test]
fn dominant_summand_bound_certificate_is_exhaustive() {
    let ns: Vec<usize> = (1..=40).collect();
    let report = run_suite("dominant", &cfg(&[2, 3], &ns)).expect("dominant suite runs");
    assert_pass(&report);
    let (_, eps) = report
        .measured
        .iter()
        .find(|(k, _)| k == "epsilon_min")
        .expect("peak-separation constant measured");
    assert!(*eps > 0.0, "peak-separation constant must be positive");
}

#[test]
fn spectral_decay_constant_plateaus_below_ln_m() {
    let report = run_suite("decay", &cfg(&[2, 3, 4], &[16, 32, 64, 128, 256]))
        .expect("decay suite runs");
    assert_pass(&report);
    let table = report
        .tables
        .iter()
        .find(|t| t.name == "decay")
        .expect("decay csv");
    assert_eq!(table.rows.len(), 15);
    for row in &table.rows {
        let m: f64 = row[0].parse().unwrap();
        let d_min: f64 = row[2].parse().unwrap();
        assert!(
            d_min > 0.0 && d_min <= (m + f64::EPSILON).ln() + 1e-12,
            "decay constant out of (0, ln m] at m={} n={}: {d_min}",
            row[0],
            row[1]
        );
    }
}

/// Dimension stability of the square-function multiplier sums at the
/// default threshold. The distant second-difference family carries a known
/// small-N transient: its sup series starts high at N = 8..16 and settles
/// from N = 32 on, so the max/median statistic lands near 4.6–4.9 against
/// the configured 3. The check is asserted at the configured default
/// anyway; `--threshold square-sum=5` gates on the stabilized level when
/// the transient is understood and accepted.
#[test]
fn square_sum_plateau_is_dimension_stable() {
    let report = run_suite("square-sum", &cfg(&[2, 3], &[8, 16, 32, 64, 128, 256]))
        .expect("square-sum suite runs");
    assert_eq!(report.threshold, PLATEAU_THRESHOLD);
    assert!(
        report.verdict == Verdict::Pass,
        "square-sum plateau exceeded max/median {} (see doc comment on this \
         test: the distant t=2 series is transient-dominated below N=32):\n  {}",
        PLATEAU_THRESHOLD,
        report.failures.join("\n  ")
    );
}

#[test]
fn lemma_certificates_hold_with_stable_constants() {
    let grids: [(&str, Vec<u32>, Vec<usize>); 6] = [
        ("bigkchoice", vec![2, 3], vec![8, 16, 32, 64]),
        ("blbound", vec![2, 3], vec![16, 32, 64, 128]),
        ("transfer", vec![2, 3], vec![8, 16, 32, 64]),
        ("reparam", vec![2, 3], vec![6, 8, 12, 16]),
        ("ns", vec![2, 3], vec![8, 16, 32, 64]),
        ("weak11", vec![2, 3], vec![16, 32, 64, 128, 256]),
    ];
    for (id, ms, ns) in grids {
        let report = run_suite(id, &cfg(&ms, &ns)).expect("suite runs");
        assert_pass(&report);
        for (key, value) in &report.measured {
            assert!(
                value.is_finite(),
                "suite '{id}' measured a non-finite constant {key}"
            );
            // Sharp constants of the lower-bound kind must be strictly
            // positive; residuals (sup differences) and constants whose
            // inequality can hold with a vanishing coefficient (c3: the
            // companion term may dominate outright) only need to be
            // nonnegative.
            let requires_positive = key.starts_with("c_star")
                || key.starts_with("witness")
                || key == "c1_max"
                || key == "c2_max";
            if requires_positive {
                assert!(
                    *value > 0.0,
                    "suite '{id}' measured a non-positive constant {key}={value}"
                );
            } else {
                assert!(
                    *value >= 0.0,
                    "suite '{id}' measured a negative constant {key}={value}"
                );
            }
        }
        if id == "reparam" {
            assert_eq!(report.threshold, REPARAM_SUP_TOL);
            let table = report
                .tables
                .iter()
                .find(|t| t.name == "reparam")
                .expect("reparam csv");
            // The binomial-mixture profile and its time-averaged form agree
            // on the hexagon instance at both averaging caps.
            for p_label in ["1/6", "1/3"] {
                let row = table
                    .rows
                    .iter()
                    .find(|r| r[0] == "2" && r[1] == "6" && r[2] == p_label)
                    .unwrap_or_else(|| panic!("missing reparam row m=2 n=6 P={p_label}"));
                let sup: f64 = row[3].parse().unwrap();
                assert!(
                    sup <= REPARAM_SUP_TOL,
                    "profile mismatch {sup} at m=2 n=6 P={p_label}"
                );
            }
        } else {
            assert_eq!(report.threshold, PLATEAU_THRESHOLD);
        }
    }
}

#[test]
fn norm_search_plateaus_dimension_free() {
    let start = Instant::now();
    let report = run_suite("norms", &cfg(&[2, 3], &[8, 16, 32, 64, 128, 256]))
        .expect("norms suite runs");
    assert_pass(&report);
    assert_eq!(report.threshold, NORMS_PLATEAU_THRESHOLD);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < NORMS_RUNTIME_LIMIT_SECS,
        "norm search took {elapsed:.1}s, budget {NORMS_RUNTIME_LIMIT_SECS}s"
    );
    // Same seed, same grid: the search must reproduce its estimates.
    let small = cfg(&[2], &[8, 16]);
    let a = run_suite("norms", &small).expect("norms rerun");
    let b = run_suite("norms", &small).expect("norms rerun");
    assert_eq!(csv_blob(&a), csv_blob(&b), "norm search is seed-deterministic");
}

#[test]
fn rerunning_suites_reproduces_csv_bytes() {
    let grids: [(&str, Vec<u32>, Vec<usize>); 11] = [
        ("oracle", vec![1, 2], vec![3, 4]),
        ("dominant", vec![2], vec![6, 8]),
        ("decay", vec![2], vec![8, 16]),
        ("square-sum", vec![2], vec![8, 16]),
        ("reparam", vec![2], vec![4, 6]),
        ("bigkchoice", vec![2], vec![6, 8]),
        ("blbound", vec![2], vec![8, 16]),
        ("transfer", vec![2], vec![8, 16]),
        ("ns", vec![2], vec![6, 8]),
        ("weak11", vec![2], vec![8, 16]),
        ("norms", vec![2], vec![6, 8]),
    ];
    for (id, ms, ns) in grids {
        let config = cfg(&ms, &ns);
        let a = run_suite(id, &config).unwrap_or_else(|e| panic!("suite {id} errors: {e}"));
        let b = run_suite(id, &config).unwrap_or_else(|e| panic!("suite {id} errors: {e}"));
        assert_eq!(
            csv_blob(&a),
            csv_blob(&b),
            "suite '{id}' CSVs changed between identical runs"
        );
        assert_eq!(a.measured, b.measured, "suite '{id}' measured constants drifted");
    }
}
