//! Spectral matrix pairs for the dhQD algorithm and the dhLV-related
//! system, their compatibility residual, and wave-vector functional checks.
//!
//! For either scheme the wave vector stacks `m + 1` adjacent polynomials,
//! `Psi_n^l = (P_n^{l+m}, ..., P_n^l)^T` (P for dhLV-related, Q for dhQD),
//! and the pair `(L, M)` realizes `Psi_{n+1}^l = L_n^l Psi_n^l`,
//! `Psi_n^{l+1} = M_n^l Psi_n^l`. Compatibility
//! `L_n^{l+1} M_n^l - M_{n+1}^l L_n^l = 0` holds as an exact Laurent-matrix
//! identity whenever the variables come from a moment lattice.

use crate::error::Error;
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::scalar::Scalar;
use crate::Result;

use super::{build_poly, qd_var, Family, PolyX, QdScheme, TauLattice};

/// Both members of the pair, `(L_n^l, M_n^l)`, size `(m+1) x (m+1)`.
///
/// The dhQD `M` uses variables at `n - 1` and divides by `wt_{n-1}^l`, so it
/// needs `n >= 1`; a vanishing `wt_{n-1}^l` is a singular construction.
pub fn build_lax<T: Scalar>(
    lat: &TauLattice<T>,
    scheme: QdScheme,
    n: u32,
    l: i64,
) -> Result<(LaurentMatrix<T>, LaurentMatrix<T>)> {
    let m = lat.m() as usize;
    let size = m + 1;
    let lm = lat.m() as i64;
    let mut lmat = LaurentMatrix::zero(size, size);
    let mut mmat = LaurentMatrix::zero(size, size);
    match scheme {
        QdScheme::DhlvRelated => {
            let v = qd_var(lat, super::QdVarKind::V, n, l)?;
            for i in 0..size {
                lmat.add_into(i, 0, LaurentPoly::lambda_pow(1));
                lmat.add_into(i, m, LaurentPoly::constant(-v.clone()));
            }
            lmat.add_into(
                0,
                0,
                LaurentPoly::constant(-qd_var(lat, super::QdVarKind::W, n, l + lm - 1)?),
            );
            for j in 1..m {
                let w = qd_var(lat, super::QdVarKind::W, n, l + lm - 1 - j as i64)?;
                for i in 0..=j {
                    lmat.add_into(i, j, LaurentPoly::constant(-w.clone()));
                }
            }

            let v_up = qd_var(lat, super::QdVarKind::V, n, l + 1)?;
            let w_here = qd_var(lat, super::QdVarKind::W, n, l)?;
            mmat.add_into(0, 0, LaurentPoly::one());
            mmat.add_into(0, m - 1, LaurentPoly::term(v_up - w_here, -1));
            mmat.add_into(0, m, LaurentPoly::term(-v, -1));
            for i in 1..size {
                mmat.add_into(i, i - 1, LaurentPoly::one());
            }
        }
        QdScheme::Dhqd => {
            let vt = qd_var(lat, super::QdVarKind::VTilde, n, l)?;
            let wt = qd_var(lat, super::QdVarKind::WTilde, n, l)?;
            lmat.add_into(0, 0, LaurentPoly::constant(-wt));
            lmat.add_into(0, m - 1, LaurentPoly::lambda_pow(1));
            lmat.add_into(0, m, LaurentPoly::constant(-vt));
            for p in 1..size {
                lmat.add_into(p, p - 1, LaurentPoly::lambda_pow(1));
                let vtp = qd_var(lat, super::QdVarKind::VTilde, n, l + lm - p as i64)?;
                lmat.add_into(p, p, LaurentPoly::constant(-vtp));
            }

            if n == 0 {
                return Err(Error::Precondition(
                    "dhQD M is built from variables at n - 1; need n >= 1".into(),
                ));
            }
            let wt_prev = qd_var(lat, super::QdVarKind::WTilde, n - 1, l)?;
            if wt_prev.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "dhqd M singular construction (wt_{n-1}^l = 0)",
                    n: n as i64 - 1,
                    l,
                });
            }
            let wt_prev_up = qd_var(lat, super::QdVarKind::WTilde, n - 1, l + 1)?;
            let vt_prev_m = qd_var(lat, super::QdVarKind::VTilde, n - 1, l + lm)?;
            let corner = -wt_prev_up.clone()
                * (T::one() - vt_prev_m.clone() / wt_prev.clone());
            mmat.add_into(0, 0, LaurentPoly::term(corner, -1));
            mmat.add_into(0, m - 1, LaurentPoly::one());
            mmat.add_into(
                0,
                m,
                LaurentPoly::term(-wt_prev_up * vt_prev_m / wt_prev, -1),
            );
            for i in 1..size {
                mmat.add_into(i, i - 1, LaurentPoly::one());
            }
        }
    }
    Ok((lmat, mmat))
}

/// `L_n^{l+1} M_n^l - M_{n+1}^l L_n^l`, the compatibility residual; the
/// zero Laurent matrix on any moment lattice.
pub fn lax_compatibility_residual<T: Scalar>(
    lat: &TauLattice<T>,
    scheme: QdScheme,
    n: u32,
    l: i64,
) -> Result<LaurentMatrix<T>> {
    let (_, m_here) = build_lax(lat, scheme, n, l)?;
    let (l_up, _) = build_lax(lat, scheme, n, l + 1)?;
    let (l_here, _) = build_lax(lat, scheme, n, l)?;
    let (_, m_next) = build_lax(lat, scheme, n + 1, l)?;
    l_up.matmul(&m_here)?.sub(&m_next.matmul(&l_here)?)
}

/// The wave vector `Psi_n^l` as polynomials, highest superscript first.
pub fn wave_vector<T: Scalar>(
    lat: &TauLattice<T>,
    scheme: QdScheme,
    n: u32,
    l: i64,
) -> Result<Vec<PolyX<T>>> {
    let m = lat.m() as i64;
    let family = match scheme {
        QdScheme::DhlvRelated => Family::P,
        QdScheme::Dhqd => Family::Q,
    };
    (0..=m)
        .map(|p| build_poly(lat, family, n, l + m - p))
        .collect()
}

/// Residuals of `Psi_{n+1}^l = L Psi_n^l` and `Psi_n^{l+1} = M Psi_n^l`
/// with the spectral parameter instantiated at `x0` (which is also the
/// evaluation point of the polynomials). Each relation is first multiplied
/// through by `lambda^s`, `s` the pole order of the matrix, so `x0 = 0` is
/// a legitimate evaluation point (it checks the constant-term relations).
pub fn wave_vector_check<T: Scalar>(
    lat: &TauLattice<T>,
    scheme: QdScheme,
    n: u32,
    l: i64,
    x0: &T,
) -> Result<Vec<T>> {
    let (lmat, mmat) = build_lax(lat, scheme, n, l)?;
    let eval = |polys: Vec<PolyX<T>>| -> Vec<T> { polys.iter().map(|p| p.eval(x0)).collect() };
    let psi = eval(wave_vector(lat, scheme, n, l)?);
    let psi_up_n = eval(wave_vector(lat, scheme, n + 1, l)?);
    let psi_up_l = eval(wave_vector(lat, scheme, n, l + 1)?);
    Ok(lax_point_residuals(
        &[(&lmat, &psi_up_n), (&mmat, &psi_up_l)],
        &psi,
        x0,
    ))
}

/// Shared evaluator: for each `(mat, target)` pair, the per-row residual of
/// `target = mat * psi` at `lambda = x0`, poles cleared structurally.
pub(crate) fn lax_point_residuals<T: Scalar>(
    relations: &[(&LaurentMatrix<T>, &Vec<T>)],
    psi: &[T],
    x0: &T,
) -> Vec<T> {
    let mut residuals = Vec::new();
    for (mat, target) in relations {
        let clear = mat.pole_order();
        for p in 0..mat.rows() {
            let mut row = LaurentPoly::zero();
            for (j, v) in psi.iter().enumerate() {
                row = row.add(&mat.get(p, j).scale(v));
            }
            let res = row
                .sub(&LaurentPoly::constant(target[p].clone()))
                .shift_exp(clear);
            residuals.push(res.eval(x0));
        }
    }
    residuals
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{random_measure, DiscreteMeasure};
    use crate::qd::QdVarKind;
    use crate::Rat;
    use num_traits::Zero;

    fn random_lattice(seed: u64, m: u32, size: usize, count: usize) -> TauLattice<Rat> {
        let meas: DiscreteMeasure<Rat> = random_measure(seed, size, true).unwrap();
        TauLattice::new(meas.moments(count, m))
    }

    #[test]
    fn m1_dhlv_pair_matches_displayed_two_by_two() {
        let lat = random_lattice(201, 1, 6, 80);
        let (n, l) = (1u32, 2i64);
        let (lmat, mmat) = build_lax(&lat, QdScheme::DhlvRelated, n, l).unwrap();
        let v = qd_var(&lat, QdVarKind::V, n, l).unwrap();
        let w = qd_var(&lat, QdVarKind::W, n, l).unwrap();
        let v_up = qd_var(&lat, QdVarKind::V, n, l + 1).unwrap();

        let mut l_ref = LaurentMatrix::zero(2, 2);
        l_ref.set(
            0,
            0,
            LaurentPoly::lambda_pow(1).add(&LaurentPoly::constant(-w.clone())),
        );
        l_ref.set(0, 1, LaurentPoly::constant(-v.clone()));
        l_ref.set(1, 0, LaurentPoly::lambda_pow(1));
        l_ref.set(1, 1, LaurentPoly::constant(-v.clone()));
        assert_eq!(lmat, l_ref);

        let mut m_ref = LaurentMatrix::zero(2, 2);
        m_ref.set(
            0,
            0,
            LaurentPoly::one().add(&LaurentPoly::term(v_up - w, -1)),
        );
        m_ref.set(0, 1, LaurentPoly::term(-v, -1));
        m_ref.set(1, 0, LaurentPoly::one());
        assert_eq!(mmat, m_ref);
    }

    #[test]
    fn lax_entry_exponents_are_banded() {
        let lat = random_lattice(203, 3, 7, 200);
        for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
            let (lmat, mmat) = build_lax(&lat, scheme, 1, 2).unwrap();
            assert_eq!(lmat.rows(), 4);
            assert!(lmat.exponent_support().iter().all(|e| (0..=1).contains(e)));
            assert!(mmat
                .exponent_support()
                .iter()
                .all(|e| (-1..=0).contains(e)));
        }
    }

    #[test]
    fn compatibility_residual_is_zero_matrix() {
        for (seed, m) in [(301u64, 1u32), (302, 2), (303, 3)] {
            let lat = random_lattice(seed, m, 8, 300);
            for n in 1..=3u32 {
                for l in 0..=4i64 {
                    for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
                        let r = lax_compatibility_residual(&lat, scheme, n, l).unwrap();
                        assert!(r.is_zero(), "{scheme:?} m={m} n={n} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn perturbed_variable_breaks_compatibility() {
        // Sensitivity: build the product with one L entry nudged.
        let lat = random_lattice(305, 2, 6, 120);
        let (n, l) = (1u32, 1i64);
        let (_, m_here) = build_lax(&lat, QdScheme::Dhqd, n, l).unwrap();
        let (l_up, _) = build_lax(&lat, QdScheme::Dhqd, n, l + 1).unwrap();
        let (mut l_here, _) = build_lax(&lat, QdScheme::Dhqd, n, l).unwrap();
        let (_, m_next) = build_lax(&lat, QdScheme::Dhqd, n + 1, l).unwrap();
        l_here.add_into(0, 0, LaurentPoly::constant(Rat::from_ratio(1, 7)));
        let res = l_up
            .matmul(&m_here)
            .unwrap()
            .sub(&m_next.matmul(&l_here).unwrap())
            .unwrap();
        assert!(!res.is_zero());
    }

    #[test]
    fn dhqd_m_needs_n_at_least_one() {
        let lat = random_lattice(307, 2, 6, 120);
        assert!(build_lax(&lat, QdScheme::Dhqd, 0, 1).is_err());
    }

    #[test]
    fn dhqd_m_with_vanishing_wt_is_singular_construction() {
        // A 1-node measure has wt_0 = 0, so M at n = 1 divides by zero.
        let meas = DiscreteMeasure::new(vec![Rat::from_i64(3)], vec![Rat::from_i64(1)]).unwrap();
        let lat = TauLattice::new(meas.moments(40, 2));
        let err = build_lax(&lat, QdScheme::Dhqd, 1, 0).unwrap_err();
        assert!(matches!(err, crate::error::Error::Breakdown { .. }));
    }

    #[test]
    fn wave_vector_relations_hold() {
        for (seed, m) in [(401u64, 2u32), (402, 3)] {
            let lat = random_lattice(seed, m, 8, 300);
            for scheme in [QdScheme::DhlvRelated, QdScheme::Dhqd] {
                for x0 in [
                    Rat::from_i64(0),
                    Rat::from_ratio(3, 7),
                    Rat::from_i64(2),
                ] {
                    let res = wave_vector_check(&lat, scheme, 2, 1, &x0).unwrap();
                    assert!(
                        res.iter().all(Rat::is_zero),
                        "{scheme:?} m={m} x0={x0} res={res:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn wave_vector_holds_at_measure_node() {
        // The identities are polynomial in x, so nodes are fine too.
        let meas: DiscreteMeasure<Rat> = random_measure(77, 6, true).unwrap();
        let node = meas.nodes()[2].clone();
        let lat = TauLattice::new(meas.moments(200, 2));
        let res = wave_vector_check(&lat, QdScheme::Dhqd, 1, 2, &node).unwrap();
        assert!(res.iter().all(Rat::is_zero));
    }
}
