//! Striped moment determinants and the hungry quotient-difference family.
//!
//! For a hunger parameter `m`, the tau lattice is
//! `tau_n^l = det(c_{l+m*i+j})_{i,j=0..n-1}` with `tau_0^l = 1`. Everything
//! in this module is a ratio or bilinear combination of those determinants:
//! the scheme variables `v, w` (from the P polynomial family) and
//! `vt, wt` (from the Q family), the monic bi-orthogonal polynomials
//! themselves, the dhQD and dhLV-related evolution equations, and both
//! spectral matrix pairs.

mod lax;
mod poly;
mod scheme;

pub use lax::{build_lax, lax_compatibility_residual, wave_vector, wave_vector_check};
pub(crate) use lax::lax_point_residuals;
pub use poly::{
    biorthogonality_report, build_poly, pairing, recurrence_coeffs, verify_linear_relations,
    BiorthReport, Family, PolyX, RecurrenceExpansion, RelationPair,
};
pub use scheme::{
    evolve_dhqd, hirota_residual, qd_rhombus_residuals, scheme_residuals, telescope_residual,
    Origin, QdScheme, SchemeWindow,
};

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::Error;
use crate::matrix::Matrix;
use crate::measure::MomentSequence;
use crate::scalar::Scalar;
use crate::Result;

/// Memoized lattice of striped moment determinants.
///
/// The memo table is internally synchronized, so distinct cells may be
/// filled from several workers; values never change once cached.
#[derive(Debug)]
pub struct TauLattice<T> {
    moments: MomentSequence<T>,
    cache: Mutex<HashMap<(u32, i64), T>>,
}

impl<T: Scalar> TauLattice<T> {
    pub fn new(moments: MomentSequence<T>) -> Self {
        TauLattice {
            moments,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn m(&self) -> u32 {
        self.moments.m()
    }

    pub fn moments(&self) -> &MomentSequence<T> {
        &self.moments
    }

    /// `tau_n^l`; `tau_0^l = 1` by the empty-determinant convention.
    pub fn tau(&self, n: u32, l: i64) -> Result<T> {
        if l < 0 {
            return Err(Error::Precondition(format!("tau with negative l = {l}")));
        }
        if n == 0 {
            return Ok(T::one());
        }
        if let Some(v) = self.cache.lock().unwrap().get(&(n, l)) {
            return Ok(v.clone());
        }
        let m = self.m() as i64;
        let size = n as usize;
        let mut rows = Vec::with_capacity(size);
        for i in 0..size as i64 {
            let mut row = Vec::with_capacity(size);
            for j in 0..size as i64 {
                row.push(self.moments.get(l + m * i + j)?);
            }
            rows.push(row);
        }
        let det = Matrix::from_rows(rows).det()?;
        self.cache
            .lock()
            .unwrap()
            .insert((n, l), det.clone());
        Ok(det)
    }
}

/// The four determinant-ratio lattice variables.
///
/// `V`/`W` come from the P-family relations, `VTilde`/`WTilde` from the
/// Q-family ones; at `m = 1` the pairs coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QdVarKind {
    V,
    W,
    VTilde,
    WTilde,
}

impl QdVarKind {
    fn name(self) -> &'static str {
        match self {
            QdVarKind::V => "v",
            QdVarKind::W => "w",
            QdVarKind::VTilde => "vt",
            QdVarKind::WTilde => "wt",
        }
    }
}

/// Determinant-ratio value of a lattice variable at `(n, l)`.
///
/// `v_n^l  = tau_{n+1}^{l+m} tau_n^l / (tau_n^{l+m} tau_{n+1}^l)`
/// `w_n^l  = tau_{n+2}^{l}   tau_n^{l+1} / (tau_{n+1}^{l+1} tau_{n+1}^l)`
/// `vt_n^l = tau_{n+1}^{l+1} tau_n^l / (tau_n^{l+1} tau_{n+1}^l)`
/// `wt_n^l = tau_{n+2}^{l}   tau_n^{l+m} / (tau_{n+1}^{l+m} tau_{n+1}^l)`
pub fn qd_var<T: Scalar>(lat: &TauLattice<T>, kind: QdVarKind, n: u32, l: i64) -> Result<T> {
    let m = lat.m() as i64;
    let (num1, num2, den1, den2) = match kind {
        QdVarKind::V => (
            lat.tau(n + 1, l + m)?,
            lat.tau(n, l)?,
            lat.tau(n, l + m)?,
            lat.tau(n + 1, l)?,
        ),
        QdVarKind::W => (
            lat.tau(n + 2, l)?,
            lat.tau(n, l + 1)?,
            lat.tau(n + 1, l + 1)?,
            lat.tau(n + 1, l)?,
        ),
        QdVarKind::VTilde => (
            lat.tau(n + 1, l + 1)?,
            lat.tau(n, l)?,
            lat.tau(n, l + 1)?,
            lat.tau(n + 1, l)?,
        ),
        QdVarKind::WTilde => (
            lat.tau(n + 2, l)?,
            lat.tau(n, l + m)?,
            lat.tau(n + 1, l + m)?,
            lat.tau(n + 1, l)?,
        ),
    };
    let den = den1 * den2;
    if den.is_effectively_zero() {
        return Err(Error::Breakdown {
            what: kind.name(),
            n: n as i64,
            l,
        });
    }
    Ok(num1 * num2 / den)
}

/// Variable with the left boundary convention `w_{-1}^l = wt_{-1}^l = 0`.
pub fn qd_var_or_boundary<T: Scalar>(
    lat: &TauLattice<T>,
    kind: QdVarKind,
    n: i64,
    l: i64,
) -> Result<T> {
    if n == -1 && matches!(kind, QdVarKind::W | QdVarKind::WTilde) {
        return Ok(T::zero());
    }
    if n < 0 {
        return Err(Error::Precondition(format!(
            "variable {} at negative n = {n}",
            kind.name()
        )));
    }
    qd_var(lat, kind, n as u32, l)
}
