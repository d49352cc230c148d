//! Elliptic-basis determinant lattices and the hungry HADT / QQD systems.
//!
//! Four determinant families live over one Gram matrix, all with columns
//! running over the admissible basis (positions, so the missing `e_1` can
//! cause no off-by-one):
//!
//! * `Delta_k^l`: rows `l, l+m, ..., l+(k-1)m`, columns `e_0, e_2, ..., e_k`
//! * `Theta_k^l`: rows `l, l+2m, l+3m, ..., l+km` (the second row skips
//!   `l+m`), same columns
//! * `Pi_k^l`:    rows as `Delta`, columns `e_2, ..., e_{k+1}`
//! * `Sigma_k^l`: rows as `Theta`, columns `e_2, ..., e_{k+1}`
//!
//! Size-0 members are 1; every superscript must stay `>= 2`. The scheme
//! variables are ratios of these determinants.

mod families;
mod lax;
mod poly;
mod relations;

pub use families::{DetFamilies, DetFamily};
pub use lax::{
    build_lax_elliptic, lax_compatibility_residual_elliptic, wave_residual_polys,
    wave_vector_check_elliptic, wave_vector_elliptic, EllipticScheme,
};
pub use poly::{build_elliptic_poly, EllipticPoly, PolyFamily};
pub use relations::{
    hadt_sigma_terms, hhadt_residual, hhadt_terms, hqqd_hhadt_product_residual, hqqd_residual,
    qqd_residual, telescoping_check, verify_relation, RelationId, Residual, ALL_RELATIONS,
};

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// `U_k^l = Delta_{k+1}^l Delta_{k-1}^{l+m} / (Delta_k^l Delta_k^{l+m})`,
/// written `u` in the hQQD scheme.
pub fn var_u<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    if k == 0 {
        return Err(Error::Precondition("U needs k >= 1".into()));
    }
    let m = fam.m() as i64;
    let num = fam.delta(k + 1, l)? * fam.delta(k - 1, l + m)?;
    let den = fam.delta(k, l)? * fam.delta(k, l + m)?;
    ratio(num, den, "U", k, l)
}

/// `V_k^l = Delta_k^l Delta_k^{l+m+2} / (Delta_{k+1}^l Delta_{k-1}^{l+m+2})`.
pub fn var_v<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    if k == 0 {
        return Err(Error::Precondition("V needs k >= 1".into()));
    }
    let m = fam.m() as i64;
    let num = fam.delta(k, l)? * fam.delta(k, l + m + 2)?;
    let den = fam.delta(k + 1, l)? * fam.delta(k - 1, l + m + 2)?;
    ratio(num, den, "V", k, l)
}

/// `W_k^l = Delta_k^{l+m} Delta_k^{l+2} / (Delta_{k+1}^l Delta_{k-1}^{l+m+2})`.
pub fn var_w<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    if k == 0 {
        return Err(Error::Precondition("W needs k >= 1".into()));
    }
    let m = fam.m() as i64;
    let num = fam.delta(k, l + m)? * fam.delta(k, l + 2)?;
    let den = fam.delta(k + 1, l)? * fam.delta(k - 1, l + m + 2)?;
    ratio(num, den, "W", k, l)
}

/// `Gamma_k^l = Theta_k^l / Delta_k^{l+m}`.
pub fn var_gamma<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    let m = fam.m() as i64;
    let num = fam.theta(k, l)?;
    let den = fam.delta(k, l + m)?;
    ratio(num, den, "Gamma", k, l)
}

/// `X_k^l = Delta_k^l Delta_{k-1}^{l+2m} / (Delta_{k-1}^{l+m} Delta_k^{l+m})`.
pub fn var_x<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    if k == 0 {
        return Err(Error::Precondition("X needs k >= 1".into()));
    }
    let m = fam.m() as i64;
    let num = fam.delta(k, l)? * fam.delta(k - 1, l + 2 * m)?;
    let den = fam.delta(k - 1, l + m)? * fam.delta(k, l + m)?;
    ratio(num, den, "X", k, l)
}

/// `Y_k^l = (Delta_k^l Delta_{k-3}^{l+2m+2} - Delta_{k-1}^l Delta_{k-2}^{l+2m+2})
///          / (Delta_{k-2}^{l+m+2} Delta_{k-1}^{l+m})`.
pub fn var_y<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    if k < 3 {
        return Err(Error::Precondition("Y needs k >= 3".into()));
    }
    let m = fam.m() as i64;
    let num = fam.delta(k, l)? * fam.delta(k - 3, l + 2 * m + 2)?
        - fam.delta(k - 1, l)? * fam.delta(k - 2, l + 2 * m + 2)?;
    let den = fam.delta(k - 2, l + m + 2)? * fam.delta(k - 1, l + m)?;
    ratio(num, den, "Y", k, l)
}

fn ratio<T: Scalar>(num: T, den: T, what: &'static str, k: u32, l: i64) -> Result<T> {
    if den.is_effectively_zero() {
        return Err(Error::Breakdown {
            what,
            n: k as i64,
            l,
        });
    }
    Ok(num / den)
}
