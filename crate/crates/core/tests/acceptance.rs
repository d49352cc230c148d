//! Acceptance runs: every exit criterion at its stated tolerance, one
//! pass/fail line per criterion (run with `--nocapture` to see them).
//!
//! Everything here is exact-arithmetic except the eigen demo, whose
//! tolerances are the stated relative thresholds.

use std::time::{Duration, Instant};

use hqd_core::eigen::{convergence_report, expected_rate, qd_eigen_float, EigenVariable};
use hqd_core::elliptic::{
    hadt_sigma_terms, hhadt_residual, hhadt_terms, lax_compatibility_residual_elliptic,
    qqd_residual, verify_relation, wave_vector_check_elliptic, DetFamilies, EllipticScheme,
    ALL_RELATIONS,
};
use hqd_core::gram::{random_point_measure, EllipticMeasure};
use hqd_core::laurent::{LaurentMatrix, LaurentPoly};
use hqd_core::measure::{random_measure, tau_moment_budget, DiscreteMeasure, SplitMix64};
use hqd_core::qd::{
    biorthogonality_report, build_lax, evolve_dhqd, hirota_residual, lax_compatibility_residual,
    qd_var, recurrence_coeffs, scheme_residuals, wave_vector_check, Family, QdScheme, QdVarKind,
    SchemeWindow, TauLattice,
};
use hqd_core::scalar::Scalar;
use hqd_core::Rat;
use num_traits::{One, Zero};

fn finish(name: &str, started: Instant, budget: Duration) {
    let dt = started.elapsed();
    println!("PASS {name} in {:.2}s (budget {:.0}s)", dt.as_secs_f64(), budget.as_secs_f64());
    assert!(
        dt <= budget,
        "{name}: exceeded time budget: {:.2}s > {:.0}s",
        dt.as_secs_f64(),
        budget.as_secs_f64()
    );
}

fn tau_lattice(seed: u64, m: u32, size: usize, n_max: u32, l_max: u32) -> TauLattice<Rat> {
    let meas: DiscreteMeasure<Rat> = random_measure(seed, size, true).unwrap();
    let count = tau_moment_budget(m, n_max, l_max);
    TauLattice::new(meas.moments(count, m))
}

fn det_families(seed: u64, m: u32, points: usize, k_hi: u32, l_hi: i64) -> DetFamilies<Rat> {
    let meas: EllipticMeasure<Rat> = random_point_measure(seed, points).unwrap();
    let row_max = l_hi + 2 * m as i64 + 4 + (k_hi as i64 + 3) * m as i64;
    let col_max = k_hi as i64 + 5;
    DetFamilies::new(meas.gram(row_max.max(col_max)).unwrap(), m)
}

/// Criterion 1: bi-orthogonality -- off-diagonal pairings exactly zero,
/// diagonal h_k^l equal to tau_{k+1}^l / tau_k^l, m in {1,2,3}, N = 5.
#[test]
fn criterion_01_biorthogonality() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..10u64 {
            let lat = tau_lattice(100 + i, m, 8, 9, 12);
            for l in 0..=1i64 {
                let rep = biorthogonality_report(&lat, 5, l).unwrap();
                assert!(rep.pass(), "m={m} seed={} l={l}", 100 + i);
                for k in 0..=5u32 {
                    let expect = lat.tau(k + 1, l).unwrap() / lat.tau(k, l).unwrap();
                    assert_eq!(rep.h[k as usize], expect, "h ratio m={m} k={k}");
                }
            }
        }
    }
    finish("criterion 1 (bi-orthogonality)", t0, Duration::from_secs(5));
}

/// Criterion 2: m+2-term recurrences -- a_{n,i} = b_{n,i} = 0 for
/// i <= n-m-1, n <= 6, exact.
#[test]
fn criterion_02_recurrences() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..5u64 {
            let lat = tau_lattice(200 + i, m, 9, 10, 14);
            for n in m + 1..=6 {
                for fam in [Family::P, Family::Q] {
                    let exp = recurrence_coeffs(&lat, fam, n, 0).unwrap();
                    assert!(
                        exp.tail_violations(m).is_empty(),
                        "m={m} n={n} {fam:?}: {:?}",
                        exp.coeffs
                    );
                    assert_eq!(exp.leading, Rat::one(), "monic m={m} n={n} {fam:?}");
                }
            }
        }
    }
    finish("criterion 2 (m+2-term recurrences)", t0, Duration::from_secs(5));
}

/// Criterion 3: scheme identities -- dhLV-related and dhQD residuals
/// exactly zero on determinant-ratio lattices, m in {1,2,3}, n <= 4,
/// l <= 3m+6, 100 seeds.
#[test]
fn criterion_03_scheme_identities() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        let l_hi = 3 * m as i64 + 6;
        for i in 0..100u64 {
            let lat = tau_lattice(300 + i, m, 8, 7, (l_hi + m as i64 + 2) as u32);
            for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
                for n in 0..=4u32 {
                    for l in 0..=l_hi {
                        let (r1, r2) = scheme_residuals(&lat, scheme, n, l).unwrap();
                        assert!(
                            r1.is_zero() && r2.is_zero(),
                            "{scheme:?} m={m} n={n} l={l} seed={}",
                            300 + i
                        );
                    }
                }
            }
        }
    }
    finish("criterion 3 (scheme identities)", t0, Duration::from_secs(60));
}

/// Criterion 4: evolution equals the determinant-ratio oracle cell for
/// cell, same windows as criterion 3.
#[test]
fn criterion_04_evolution_vs_oracle() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        let steps = 3 * m + 6;
        for i in 0..100u64 {
            let lat = tau_lattice(300 + i, m, 8, 7, steps + m + 2);
            let init = SchemeWindow::oracle_initial(&lat, 4, false).unwrap();
            let evolved = evolve_dhqd(&init, steps).unwrap();
            let mut cells = 0usize;
            for (&(n, l), val) in &evolved.vt {
                let oracle = qd_var(&lat, QdVarKind::VTilde, n as u32, l).unwrap();
                assert_eq!(val, &oracle, "vt m={m} n={n} l={l} seed={}", 300 + i);
                cells += 1;
            }
            for (&(n, l), val) in &evolved.wt {
                let oracle = qd_var(&lat, QdVarKind::WTilde, n as u32, l).unwrap();
                assert_eq!(val, &oracle, "wt m={m} n={n} l={l} seed={}", 300 + i);
                cells += 1;
            }
            assert!(cells > 20, "window too small: {cells}");
        }
    }
    finish("criterion 4 (evolution vs oracle)", t0, Duration::from_secs(60));
}

/// Criterion 5: the two tau-side Lax pairs have exactly zero compatibility
/// residual, m in {1,2,3}, n <= 3, l <= 8; the m = 1 dhLV-related pair
/// matches the displayed 2x2 reduction entry for entry.
#[test]
fn criterion_05_lax_compatibility_tau() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..3u64 {
            let lat = tau_lattice(500 + i, m, 8, 8, 14 + m);
            for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
                let n_lo = match scheme {
                    QdScheme::DhlvRelated => 0,
                    QdScheme::Dhqd => 1,
                };
                for n in n_lo..=3u32 {
                    for l in 0..=8i64 {
                        let res = lax_compatibility_residual(&lat, scheme, n, l).unwrap();
                        assert!(res.is_zero(), "{scheme:?} m={m} n={n} l={l}");
                    }
                }
            }
        }
    }
    // m = 1 displayed reduction.
    let lat = tau_lattice(555, 1, 7, 6, 12);
    let (n, l) = (1u32, 1i64);
    let (lmat, mmat) = build_lax(&lat, QdScheme::DhlvRelated, n, l).unwrap();
    let v = qd_var(&lat, QdVarKind::V, n, l).unwrap();
    let w = qd_var(&lat, QdVarKind::W, n, l).unwrap();
    let v_up = qd_var(&lat, QdVarKind::V, n, l + 1).unwrap();
    let mut l_ref: LaurentMatrix<Rat> = LaurentMatrix::zero(2, 2);
    l_ref.set(0, 0, LaurentPoly::lambda_pow(1).add(&LaurentPoly::constant(-w.clone())));
    l_ref.set(0, 1, LaurentPoly::constant(-v.clone()));
    l_ref.set(1, 0, LaurentPoly::lambda_pow(1));
    l_ref.set(1, 1, LaurentPoly::constant(-v.clone()));
    assert_eq!(lmat, l_ref, "m=1 displayed L");
    let mut m_ref: LaurentMatrix<Rat> = LaurentMatrix::zero(2, 2);
    m_ref.set(0, 0, LaurentPoly::one().add(&LaurentPoly::term(v_up - w, -1)));
    m_ref.set(0, 1, LaurentPoly::term(-v, -1));
    m_ref.set(1, 0, LaurentPoly::one());
    assert_eq!(mmat, m_ref, "m=1 displayed M");
    finish("criterion 5 (tau-side Lax compatibility)", t0, Duration::from_secs(60));
}

/// Criterion 6: the m = 1 bilinear identity
/// tau_{k+1}^{l-1} tau_{k-1}^{l+1} - tau_k^{l-1} tau_k^{l+1} + (tau_k^l)^2 = 0
/// for k <= 4, l <= 6.
#[test]
fn criterion_06_bilinear_identity() {
    let t0 = Instant::now();
    for i in 0..10u64 {
        let lat = tau_lattice(600 + i, 1, 7, 6, 9);
        for k in 1..=4u32 {
            for l in 1..=6i64 {
                assert!(
                    hirota_residual(&lat, k, l).unwrap().is_zero(),
                    "k={k} l={l} seed={}",
                    600 + i
                );
            }
        }
    }
    finish("criterion 6 (bilinear identity)", t0, Duration::from_secs(10));
}

/// Criterion 7: the full elliptic relation catalogue (R13-R19, A26-A37)
/// vanishes exactly for generic point measures (16 points), m in {1,2,3},
/// k <= 6, 2 <= l <= 10, 100 seeds.
#[test]
fn criterion_07_elliptic_relations() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..100u64 {
            let fam = det_families(700 + i, m, 16, 6, 10);
            for id in ALL_RELATIONS {
                for k in id.min_k()..=6 {
                    for l in 2..=10i64 {
                        let r = verify_relation(&fam, id, k, l).unwrap();
                        assert!(
                            r.is_zero(),
                            "{} m={m} k={k} l={l} seed={}: {}",
                            id.name(),
                            700 + i,
                            r.render()
                        );
                    }
                }
            }
        }
    }
    finish("criterion 7 (elliptic relation suite)", t0, Duration::from_secs(300));
}

/// Criterion 8: the hungry HADT residual vanishes exactly on the same
/// grid; at m = 1 its six products coincide term by term with the plain
/// HADT equation under sigma_a^b = Delta_a^{b+2}.
#[test]
fn criterion_08_hhadt() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..100u64 {
            let fam = det_families(800 + i, m, 16, 6, 10);
            for k in 3..=6u32 {
                for l in 2..=10i64 {
                    assert!(
                        hhadt_residual(&fam, k, l).unwrap().is_zero(),
                        "m={m} k={k} l={l} seed={}",
                        800 + i
                    );
                    if m == 1 {
                        let hungry = hhadt_terms(&fam, k, l).unwrap();
                        let plain = hadt_sigma_terms(&fam, k, l).unwrap();
                        assert_eq!(hungry, plain, "HADT term match k={k} l={l}");
                    }
                }
            }
        }
    }
    finish("criterion 8 (hungry HADT)", t0, Duration::from_secs(300));
}

/// Criterion 9: all three hQQD residuals vanish exactly; at m = 1 the
/// scheme's printed form is the QQD scheme (identical residuals).
#[test]
fn criterion_09_hqqd() {
    let t0 = Instant::now();
    for m in [1u32, 2, 3] {
        for i in 0..100u64 {
            let fam = det_families(900 + i, m, 16, 6, 10);
            for k in 2..=5u32 {
                for l in 2..=10i64 {
                    let rs = hqd_core::elliptic::hqqd_residual(&fam, k, l).unwrap();
                    assert!(
                        rs.iter().all(Rat::is_zero),
                        "m={m} k={k} l={l} seed={}",
                        900 + i
                    );
                    if m == 1 {
                        let qq = qqd_residual(&fam, k, l).unwrap();
                        assert_eq!(rs, qq, "QQD printed form k={k} l={l}");
                    }
                }
            }
        }
    }
    finish("criterion 9 (hQQD scheme)", t0, Duration::from_secs(300));
}

/// Criterion 10: elliptic Lax compatibility -- zero residual matrices for
/// the coupled pair (size 4(m+2)) and the hQQD pair (size 3(m+2)),
/// m in {1,2}, n <= 2, 2 <= l <= 6.
#[test]
fn criterion_10_elliptic_lax_compatibility() {
    let t0 = Instant::now();
    for m in [1u32, 2] {
        for i in 0..5u64 {
            let fam = det_families(1000 + i, m, 16, 6, 9);
            for scheme in [EllipticScheme::Coupled, EllipticScheme::Hqqd] {
                let expected_size = scheme.blocks() * (m as usize + 2);
                for l in 2..=6i64 {
                    let res = lax_compatibility_residual_elliptic(&fam, scheme, 2, l).unwrap();
                    assert_eq!(res.rows(), expected_size);
                    assert!(res.is_zero(), "{scheme:?} m={m} l={l} seed={}", 1000 + i);
                }
            }
        }
    }
    finish("criterion 10 (elliptic Lax compatibility)", t0, Duration::from_secs(120));
}

/// Criterion 11: wave-vector functional checks at five random evaluation
/// points per site, all four Lax pairs, exact.
#[test]
fn criterion_11_wave_vectors() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(0x11AE);
    // Tau side.
    for m in [1u32, 2, 3] {
        let lat = tau_lattice(1100 + m as u64, m, 8, 8, 12 + m);
        for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
            for n in 1..=2u32 {
                for l in [0i64, 1, 2] {
                    for _ in 0..5 {
                        let x0 = Rat::from_ratio(rng.next_signed(9, false), 1 + rng.next_range(7) as i64);
                        let res = wave_vector_check(&lat, scheme, n, l, &x0).unwrap();
                        assert!(
                            res.iter().all(Rat::is_zero),
                            "{scheme:?} m={m} n={n} l={l} x0={x0}"
                        );
                    }
                }
            }
        }
    }
    // Elliptic side.
    for m in [1u32, 2] {
        let fam = det_families(1150 + m as u64, m, 16, 6, 7);
        for scheme in [EllipticScheme::Coupled, EllipticScheme::Hqqd] {
            for l in [2i64, 3] {
                for _ in 0..5 {
                    let x0 = Rat::from_ratio(rng.next_signed(9, true), 1 + rng.next_range(5) as i64);
                    let y0 = Rat::from_ratio(rng.next_signed(9, true), 1 + rng.next_range(5) as i64);
                    let res = wave_vector_check_elliptic(&fam, scheme, 2, l, (&x0, &y0)).unwrap();
                    assert!(
                        res.iter().all(Rat::is_zero),
                        "{scheme:?} m={m} l={l} at ({x0},{y0})"
                    );
                }
            }
        }
    }
    finish("criterion 11 (wave-vector checks)", t0, Duration::from_secs(120));
}

/// Criterion 12: eigen demo on nodes {4,2,1} -- relative error < 1e-6 at
/// l = 60 in float mode for vt -> (4,2,1) and, at m = 2, v -> (16,4,1);
/// the empirical geometric rate is within 20% of the node-gap ratio.
#[test]
fn criterion_12_eigen_demo() {
    let t0 = Instant::now();
    let measure = DiscreteMeasure::new(vec![4.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap();

    let traces = qd_eigen_float(&measure, 1, 60, EigenVariable::VTilde).unwrap();
    let rep = convergence_report(&traces, 1e-6).unwrap();
    assert!(rep.pass, "vt traces: {rep:?}");
    for (tr, target) in rep.traces.iter().zip([4.0, 2.0, 1.0]) {
        assert_eq!(tr.target, target);
        assert!(tr.relative_error < 1e-6, "vt n={}: {tr:?}", tr.node_index);
        let gap = expected_rate(&measure, tr.node_index);
        assert!(
            (tr.rate - gap).abs() <= 0.2 * gap,
            "vt rate n={}: {} vs gap {gap}",
            tr.node_index,
            tr.rate
        );
    }

    let traces = qd_eigen_float(&measure, 2, 60, EigenVariable::V).unwrap();
    let rep = convergence_report(&traces, 1e-6).unwrap();
    assert!(rep.pass, "v traces: {rep:?}");
    for (tr, target) in rep.traces.iter().zip([16.0, 4.0, 1.0]) {
        assert_eq!(tr.target, target);
        assert!(tr.relative_error < 1e-6, "v n={}: {tr:?}", tr.node_index);
        let gap = expected_rate(&measure, tr.node_index);
        assert!(
            (tr.rate - gap).abs() <= 0.2 * gap,
            "v rate n={}: {} vs gap {gap}",
            tr.node_index,
            tr.rate
        );
    }
    finish("criterion 12 (eigen demo)", t0, Duration::from_secs(10));
}
