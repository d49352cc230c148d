//! The dhQD algorithm and the QD-type dhLV-related system: residual checks
//! on determinant-ratio lattices, and dhQD run as an actual evolution.
//!
//! dhLV-related system:
//! `w_n^{l+m} v_n^{l+1} = w_n^l v_{n+1}^l`
//! `w_{n-1}^{l+m} + v_n^{l+1} = w_n^l + v_n^l`
//!
//! dhQD algorithm:
//! `wt_n^{l+1} vt_n^{l+m} = wt_n^l vt_{n+1}^l`
//! `wt_{n-1}^{l+1} + vt_n^{l+m} = wt_n^l + vt_n^l`
//!
//! with the left boundary `w_{-1} = wt_{-1} = 0`. At `m = 1` the two
//! coincide and are the classical QD rhombus rules.

use std::collections::HashMap;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

use super::{qd_var, qd_var_or_boundary, QdVarKind, TauLattice};

/// The two evolution schemes of the moment lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdScheme {
    DhlvRelated,
    Dhqd,
}

/// Residuals of the two scheme equations at `(n, l)`, from determinant
/// ratios. Exactly zero on any valid lattice.
pub fn scheme_residuals<T: Scalar>(
    lat: &TauLattice<T>,
    scheme: QdScheme,
    n: u32,
    l: i64,
) -> Result<(T, T)> {
    let m = lat.m() as i64;
    match scheme {
        QdScheme::DhlvRelated => {
            let w_n_lm = qd_var(lat, QdVarKind::W, n, l + m)?;
            let v_n_l1 = qd_var(lat, QdVarKind::V, n, l + 1)?;
            let w_n_l = qd_var(lat, QdVarKind::W, n, l)?;
            let v_n1_l = qd_var(lat, QdVarKind::V, n + 1, l)?;
            let v_n_l = qd_var(lat, QdVarKind::V, n, l)?;
            let w_prev = qd_var_or_boundary(lat, QdVarKind::W, n as i64 - 1, l + m)?;
            let r1 = w_n_lm * v_n_l1.clone() - w_n_l.clone() * v_n1_l;
            let r2 = w_prev + v_n_l1 - w_n_l - v_n_l;
            Ok((r1, r2))
        }
        QdScheme::Dhqd => {
            let wt_n_l1 = qd_var(lat, QdVarKind::WTilde, n, l + 1)?;
            let vt_n_lm = qd_var(lat, QdVarKind::VTilde, n, l + m)?;
            let wt_n_l = qd_var(lat, QdVarKind::WTilde, n, l)?;
            let vt_n1_l = qd_var(lat, QdVarKind::VTilde, n + 1, l)?;
            let vt_n_l = qd_var(lat, QdVarKind::VTilde, n, l)?;
            let wt_prev = qd_var_or_boundary(lat, QdVarKind::WTilde, n as i64 - 1, l + 1)?;
            let r1 = wt_n_l1 * vt_n_lm.clone() - wt_n_l.clone() * vt_n1_l;
            let r2 = wt_prev + vt_n_lm - wt_n_l - vt_n_l;
            Ok((r1, r2))
        }
    }
}

/// Classical QD rhombus residuals at `m = 1` under `q_k^l = vt_{k-1}^l`,
/// `e_k^l = wt_{k-1}^l` (so `e_0 = 0` is the usual boundary). Vanishes
/// identically; used to pin the m = 1 reduction to the classical rules.
pub fn qd_rhombus_residuals<T: Scalar>(lat: &TauLattice<T>, k: u32, l: i64) -> Result<(T, T)> {
    if lat.m() != 1 {
        return Err(Error::Precondition("QD rhombus rules need m = 1".into()));
    }
    if k == 0 {
        return Err(Error::Precondition("QD rhombus rules start at k = 1".into()));
    }
    let e = |k: i64, l: i64| qd_var_or_boundary(lat, QdVarKind::WTilde, k - 1, l);
    let q = |k: i64, l: i64| qd_var_or_boundary(lat, QdVarKind::VTilde, k - 1, l);
    let k = k as i64;
    let r1 = e(k, l + 1)? * q(k, l + 1)? - e(k, l)? * q(k + 1, l)?;
    let r2 = e(k, l + 1)? + q(k + 1, l + 1)? - e(k + 1, l)? - q(k + 1, l)?;
    Ok((r1, r2))
}

/// Discrete-time Toda bilinear residual
/// `tau_{k+1}^{l-1} tau_{k-1}^{l+1} - tau_k^{l-1} tau_k^{l+1} + (tau_k^l)^2`
/// at `m = 1`, for `k >= 1`, `l >= 1`.
pub fn hirota_residual<T: Scalar>(lat: &TauLattice<T>, k: u32, l: i64) -> Result<T> {
    if lat.m() != 1 {
        return Err(Error::Precondition(
            "the bilinear identity is the m = 1 reduction".into(),
        ));
    }
    if k < 1 || l < 1 {
        return Err(Error::Precondition(
            "bilinear window starts at k = 1, l = 1".into(),
        ));
    }
    let t = |n: u32, l: i64| lat.tau(n, l);
    Ok(t(k + 1, l - 1)? * t(k - 1, l + 1)? - t(k, l - 1)? * t(k, l + 1)?
        + t(k, l)?.clone() * t(k, l)?)
}

/// Sum of the additive dhQD equation over `n = 0..=n_max`; telescopes to
/// zero exactly on any determinant-ratio lattice.
pub fn telescope_residual<T: Scalar>(lat: &TauLattice<T>, n_max: u32, l: i64) -> Result<T> {
    let m = lat.m() as i64;
    let mut acc = T::zero();
    for n in 0..=n_max {
        let wt_prev = qd_var_or_boundary(lat, QdVarKind::WTilde, n as i64 - 1, l + 1)?;
        let vt_lm = qd_var(lat, QdVarKind::VTilde, n, l + m)?;
        let wt = qd_var(lat, QdVarKind::WTilde, n, l)?;
        let vt = qd_var(lat, QdVarKind::VTilde, n, l)?;
        acc = acc + wt_prev + vt_lm - wt - vt;
    }
    Ok(acc)
}

/// Whether window values came from determinant ratios or from stepping the
/// recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Oracle,
    Evolved,
}

/// A rectangular-ish window of dhQD data: `vt_n^l` and `wt_n^l` keyed by
/// `(n, l)`.
#[derive(Debug, Clone)]
pub struct SchemeWindow<T> {
    pub m: u32,
    /// Largest n of the initial data.
    pub n_max: u32,
    pub vt: HashMap<(i64, i64), T>,
    pub wt: HashMap<(i64, i64), T>,
    pub origin: Origin,
    /// When set, `wt_{n_max}` is pinned to zero and the window does not
    /// shrink while stepping; valid when the measure has `n_max + 1` nodes,
    /// which makes `tau_{n_max+2} = 0` hence `wt_{n_max} = 0` exactly.
    pub closed_top: bool,
}

impl<T: Scalar> SchemeWindow<T> {
    /// Initial data for the dhQD evolution from determinant ratios:
    /// `vt_n^l` for `l = 0..m-1` and `wt_n^0`, for `n = 0..=n_max`.
    pub fn oracle_initial(lat: &TauLattice<T>, n_max: u32, closed_top: bool) -> Result<Self> {
        let m = lat.m();
        let mut vt = HashMap::new();
        let mut wt = HashMap::new();
        for n in 0..=n_max {
            for l in 0..m as i64 {
                vt.insert((n as i64, l), qd_var(lat, QdVarKind::VTilde, n, l)?);
            }
            let w = if closed_top && n == n_max {
                T::zero()
            } else {
                qd_var(lat, QdVarKind::WTilde, n, 0)?
            };
            wt.insert((n as i64, 0), w);
        }
        Ok(SchemeWindow {
            m,
            n_max,
            vt,
            wt,
            origin: Origin::Oracle,
            closed_top,
        })
    }

    pub fn vt_at(&self, n: i64, l: i64) -> Option<&T> {
        self.vt.get(&(n, l))
    }

    pub fn wt_at(&self, n: i64, l: i64) -> Option<&T> {
        self.wt.get(&(n, l))
    }
}

/// Run the dhQD recurrence upward in `l` for `l_steps` sweeps.
///
/// Sweep `l` processes `n` ascending (the data dependency
/// `wt_{n-1}^{l+1}` forces that order):
/// `vt_n^{l+m} = wt_n^l + vt_n^l - wt_{n-1}^{l+1}` (with `wt_{-1} = 0`),
/// then `wt_n^{l+1} = wt_n^l * vt_{n+1}^l / vt_n^{l+m}`.
///
/// In the generic (staircase) mode every sweep shrinks the usable `n` range
/// by one because `wt_n^{l+1}` consumes `vt_{n+1}^l`. A `closed_top` window
/// keeps its width, pinning the top `wt` row to zero.
pub fn evolve_dhqd<T: Scalar>(initial: &SchemeWindow<T>, l_steps: u32) -> Result<SchemeWindow<T>> {
    let m = initial.m as i64;
    let n_max = initial.n_max as i64;
    let mut out = initial.clone();
    out.origin = Origin::Evolved;
    for l in 0..l_steps as i64 {
        let n_hi = if out.closed_top { n_max } else { n_max - l };
        if n_hi < 0 {
            break;
        }
        for n in 0..=n_hi {
            let wt_up_prev = if n == 0 {
                T::zero()
            } else {
                out.wt
                    .get(&(n - 1, l + 1))
                    .cloned()
                    .ok_or(Error::Breakdown {
                        what: "evolve missing wt",
                        n: n - 1,
                        l: l + 1,
                    })?
            };
            let wt_here = out.wt.get(&(n, l)).cloned().ok_or(Error::Breakdown {
                what: "evolve missing wt",
                n,
                l,
            })?;
            let vt_here = out.vt.get(&(n, l)).cloned().ok_or(Error::Breakdown {
                what: "evolve missing vt",
                n,
                l,
            })?;
            let vt_next = wt_here.clone() + vt_here - wt_up_prev;
            if vt_next.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "evolution hit vt = 0",
                    n,
                    l: l + m,
                });
            }
            out.vt.insert((n, l + m), vt_next.clone());

            let top = out.closed_top && n == n_max;
            if top {
                out.wt.insert((n, l + 1), T::zero());
            } else if n < n_hi || out.closed_top {
                let vt_right = out.vt.get(&(n + 1, l)).cloned().ok_or(Error::Breakdown {
                    what: "evolve missing vt",
                    n: n + 1,
                    l,
                })?;
                out.wt.insert((n, l + 1), wt_here * vt_right / vt_next);
            }
        }
    }
    Ok(out)
}
