//! The verified identity catalogue of the elliptic lattice: the seven main
//! relations R13-R19, the appendix relations A26-A37, the hungry HADT
//! equation, the telescoping derivation behind it, and the hQQD scheme.
//!
//! Polynomial-valued relations are checked coefficient-wise in the
//! admissible basis, with multiplication by `x` as the index shift; scalar
//! determinant relations are checked as scalars. Every residual returned
//! here is exactly zero on any Gram lattice.

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

use super::families::DetFamilies;
use super::poly::{build_elliptic_poly, EllipticPoly, PolyFamily};
use super::{var_gamma, var_u, var_v, var_w, var_x, var_y};

/// Identifier of one checkable relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[allow(clippy::upper_case_acronyms)]
pub enum RelationId {
    R13,
    R14,
    R15,
    R16,
    R17,
    R18,
    R19,
    A26,
    A27,
    A28,
    A30,
    A31,
    A32,
    A33,
    A34,
    A35,
    A36,
    A37,
}

/// Every relation id, in catalogue order.
pub const ALL_RELATIONS: [RelationId; 18] = [
    RelationId::R13,
    RelationId::R14,
    RelationId::R15,
    RelationId::R16,
    RelationId::R17,
    RelationId::R18,
    RelationId::R19,
    RelationId::A26,
    RelationId::A27,
    RelationId::A28,
    RelationId::A30,
    RelationId::A31,
    RelationId::A32,
    RelationId::A33,
    RelationId::A34,
    RelationId::A35,
    RelationId::A36,
    RelationId::A37,
];

impl RelationId {
    pub fn name(self) -> &'static str {
        match self {
            RelationId::R13 => "R13",
            RelationId::R14 => "R14",
            RelationId::R15 => "R15",
            RelationId::R16 => "R16",
            RelationId::R17 => "R17",
            RelationId::R18 => "R18",
            RelationId::R19 => "R19",
            RelationId::A26 => "A26",
            RelationId::A27 => "A27",
            RelationId::A28 => "A28",
            RelationId::A30 => "A30",
            RelationId::A31 => "A31",
            RelationId::A32 => "A32",
            RelationId::A33 => "A33",
            RelationId::A34 => "A34",
            RelationId::A35 => "A35",
            RelationId::A36 => "A36",
            RelationId::A37 => "A37",
        }
    }

    /// Smallest order at which the relation holds: below these the
    /// order-1 polynomials and determinants degenerate to constants and the
    /// displayed forms lose their leading terms.
    pub fn min_k(self) -> u32 {
        match self {
            RelationId::R13 | RelationId::R15 | RelationId::R18 => 4,
            RelationId::R17 | RelationId::A33 => 3,
            _ => 2,
        }
    }
}

/// A relation residual: scalar or basis-coefficient vector.
#[derive(Debug, Clone)]
pub enum Residual<T: Scalar> {
    Scalar(T),
    Poly(EllipticPoly<T>),
}

impl<T: Scalar> Residual<T> {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Scalar(s) => s.is_effectively_zero(),
            Residual::Poly(p) => p.is_zero(),
        }
    }

    /// Compact rendering for failure reports.
    pub fn render(&self) -> String {
        match self {
            Residual::Scalar(s) => s.render_ratio(),
            Residual::Poly(p) => {
                let mut parts = Vec::new();
                let top = p.top_position().unwrap_or(0);
                for pos in 0..=top {
                    let c = p.coeff_at(pos);
                    if !c.is_effectively_zero() {
                        parts.push(format!(
                            "e{}:{}",
                            crate::gram::index_at_position(pos),
                            c.render_ratio()
                        ));
                    }
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" ")
                }
            }
        }
    }
}

/// Evaluate `LHS - RHS` of one catalogued relation at site `(k, l)`.
pub fn verify_relation<T: Scalar>(
    fam: &DetFamilies<T>,
    id: RelationId,
    k: u32,
    l: i64,
) -> Result<Residual<T>> {
    if k < id.min_k() {
        return Err(Error::Precondition(format!(
            "{} needs k >= {}, got {k}",
            id.name(),
            id.min_k()
        )));
    }
    let m = fam.m() as i64;
    let poly = |family: PolyFamily, k: u32, l: i64| build_elliptic_poly(fam, family, k, l);
    use PolyFamily::{P, Q, S, T as Tf};
    let res = match id {
        RelationId::R13 => {
            let v = var_v(fam, k - 2, l)?;
            let w = var_w(fam, k - 2, l)?;
            let lhs = poly(P, k, l)?;
            let rhs = poly(P, k - 2, l + m + 2)?
                .x_shift()
                .sub(&poly(P, k - 1, l)?.scale(&v))
                .add(&poly(P, k - 1, l + m)?.scale(&w));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::R14 => {
            let u = var_u(fam, k - 1, l)?;
            let lhs = poly(P, k, l)?;
            let rhs = poly(P, k, l + m)?.add(&poly(P, k - 1, l + m)?.scale(&u));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::R15 => {
            let den = fam.delta(k - 1, l)? * fam.theta(k - 3, l + 2)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "R15 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c1 = fam.delta(k - 2, l)? * fam.theta(k - 2, l + 2)? / den.clone();
            let c2 = fam.delta(k - 2, l + 2)? * fam.theta(k - 2, l)? / den;
            let lhs = poly(P, k, l)?;
            let rhs = poly(Q, k - 2, l + 2)?
                .x_shift()
                .sub(&poly(P, k - 1, l)?.scale(&c1))
                .add(&poly(Q, k - 1, l)?.scale(&c2));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::R16 => {
            let den = fam.delta(k - 1, l + m)? * fam.theta(k - 1, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "R16 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.delta(k, l)? * fam.delta(k - 2, l + 2 * m)? / den;
            let lhs = poly(Q, k, l)?;
            let rhs = poly(P, k, l + m)?.add(&poly(P, k - 1, l + 2 * m)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::R17 => {
            let den = fam.delta(k - 1, l)? * fam.theta(k - 1, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "R17 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.delta(k, l)? * fam.theta(k - 2, l)? / den;
            let lhs = poly(Q, k, l)?;
            let rhs = poly(P, k, l)?.sub(&poly(Q, k - 1, l)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::R18 => Residual::Scalar(
            fam.delta(k, l)? * fam.delta(k - 3, l + 2 * m + 2)?
                - fam.delta(k - 1, l)? * fam.delta(k - 2, l + 2 * m + 2)?
                + fam.theta(k - 1, l)? * fam.delta(k - 2, l + m + 2)?
                - fam.delta(k - 1, l + m)? * fam.theta(k - 2, l + 2)?,
        ),
        RelationId::R19 => Residual::Scalar(
            fam.delta(k, l)? * fam.delta(k - 1, l + 2 * m)?
                - fam.theta(k, l)? * fam.delta(k - 1, l + m)?
                + fam.delta(k, l + m)? * fam.theta(k - 1, l)?,
        ),
        RelationId::A26 => {
            let den = fam.delta(k - 1, l)? * fam.pi(k - 2, l + m)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "A26 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.delta(k - 2, l + m)? * fam.pi(k - 1, l)? / den;
            let lhs = poly(P, k, l)?;
            let rhs = poly(Tf, k - 1, l + m)?.sub(&poly(P, k - 1, l + m)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::A27 => {
            let den = fam.delta(k - 1, l)? * fam.pi(k - 2, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "A27 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.delta(k - 2, l)? * fam.pi(k - 1, l)? / den;
            let lhs = poly(P, k, l)?;
            let rhs = poly(Tf, k - 1, l)?.sub(&poly(P, k - 1, l)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::A28 => {
            let den = fam.pi(k - 2, l + 2 * m)? * fam.theta(k - 1, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "A28 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.delta(k - 2, l + 2 * m)? * fam.sigma(k - 1, l)? / den;
            let lhs = poly(Q, k, l)?;
            let rhs = poly(Tf, k - 1, l + 2 * m)?.sub(&poly(P, k - 1, l + 2 * m)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::A30 => Residual::Scalar(
            fam.delta(k, l)? * fam.pi(k - 2, l + m)?
                - fam.delta(k - 1, l)? * fam.pi(k - 1, l + m)?
                + fam.delta(k - 1, l + m)? * fam.pi(k - 1, l)?,
        ),
        RelationId::A31 => {
            let den = fam.sigma(k - 2, l)? * fam.theta(k - 1, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "A31 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.sigma(k - 1, l)? * fam.theta(k - 2, l)? / den;
            let lhs = poly(Q, k, l)?;
            let rhs = poly(S, k - 1, l)?.sub(&poly(Q, k - 1, l)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::A32 => {
            let den = fam.sigma(k - 2, l)? * fam.delta(k - 1, l)?;
            if den.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "A32 denominator",
                    n: k as i64,
                    l,
                });
            }
            let c = fam.pi(k - 1, l)? * fam.theta(k - 2, l)? / den;
            let lhs = poly(P, k, l)?;
            let rhs = poly(S, k - 1, l)?.sub(&poly(Q, k - 1, l)?.scale(&c));
            Residual::Poly(lhs.sub(&rhs))
        }
        RelationId::A33 => Residual::Scalar(
            fam.delta(k, l)? * fam.sigma(k - 2, l)?
                - fam.delta(k - 1, l)? * fam.sigma(k - 1, l)?
                + fam.pi(k - 1, l)? * fam.theta(k - 1, l)?,
        ),
        RelationId::A34 => Residual::Scalar(
            fam.delta(k, l)? * fam.pi(k - 2, l + 2 * m)?
                - fam.pi(k - 1, l + m)? * fam.theta(k - 1, l)?
                + fam.sigma(k - 1, l)? * fam.delta(k - 1, l + m)?,
        ),
        RelationId::A35 => Residual::Scalar(
            fam.theta(k, l)? * fam.pi(k - 2, l + 2 * m)?
                - fam.pi(k - 1, l + 2 * m)? * fam.theta(k - 1, l)?
                + fam.sigma(k - 1, l)? * fam.delta(k - 1, l + 2 * m)?,
        ),
        RelationId::A36 => Residual::Scalar(
            fam.delta(k - 1, l + m)?
                * (fam.pi(k - 1, l + 2 * m)? * fam.theta(k - 1, l)?
                    - fam.theta(k, l)? * fam.pi(k - 2, l + 2 * m)?)
                - fam.delta(k - 1, l + 2 * m)?
                    * (fam.pi(k - 1, l + m)? * fam.theta(k - 1, l)?
                        - fam.delta(k, l)? * fam.pi(k - 2, l + 2 * m)?),
        ),
        RelationId::A37 => Residual::Scalar(
            fam.delta(k - 1, l + m)?
                * (fam.pi(k - 1, l + 2 * m)? * fam.theta(k - 1, l)?
                    - fam.theta(k, l)? * fam.pi(k - 2, l + 2 * m)?)
                - fam.theta(k - 1, l)?
                    * (fam.delta(k - 1, l + m)? * fam.pi(k - 1, l + 2 * m)?
                        - fam.delta(k, l + m)? * fam.pi(k - 2, l + 2 * m)?)
                + fam.delta(k - 1, l + 2 * m)? * fam.delta(k, l)? * fam.pi(k - 2, l + 2 * m)?,
        ),
    };
    Ok(res)
}

/// The six quadruple products of the hungry HADT equation at `(k, l)`;
/// the residual is `t1 - t2 + t3 - t4 + t5 - t6`.
pub fn hhadt_terms<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<[T; 6]> {
    if k < 3 {
        return Err(Error::Precondition("hHADT needs k >= 3".into()));
    }
    let m = fam.m() as i64;
    let d = |k: u32, l: i64| fam.delta(k, l);
    let left = d(k + 1, l)?;
    let right = d(k - 1, l + 2 * m + 2)?;
    Ok([
        left.clone() * d(k - 1, l + m + 2)? * d(k, l + 2 * m + 2)? * d(k, l + m)?,
        left.clone() * d(k - 1, l + m + 2)? * d(k, l + m + 2)? * d(k, l + 2 * m)?,
        left * d(k - 2, l + 2 * m + 2)? * d(k, l + m + 2)? * d(k + 1, l + m)?,
        right.clone() * d(k, l + m)? * d(k - 1, l + m + 2)? * d(k + 2, l)?,
        right.clone() * d(k, l + m)? * d(k, l + 2)? * d(k + 1, l + m)?,
        right * d(k, l + m + 2)? * d(k + 1, l + m)? * d(k, l)?,
    ])
}

/// `LHS - RHS` of the hungry HADT equation at `(k, l)`.
pub fn hhadt_residual<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<T> {
    let [t1, t2, t3, t4, t5, t6] = hhadt_terms(fam, k, l)?;
    Ok(t1 - t2 + t3 - t4 + t5 - t6)
}

/// The six products of the plain (non-hungry) HADT equation evaluated with
/// `sigma_a^b := Delta_a^{b+2}` of an `m = 1` lattice. Term-for-term equal
/// to [`hhadt_terms`] at the same `(k, l)` when `m = 1`.
pub fn hadt_sigma_terms<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<[T; 6]> {
    if fam.m() != 1 {
        return Err(Error::Precondition(
            "the HADT comparison is the m = 1 reduction".into(),
        ));
    }
    if k < 3 {
        return Err(Error::Precondition("HADT needs k >= 3".into()));
    }
    let s = |a: u32, b: i64| fam.delta(a, b + 2);
    Ok([
        s(k + 1, l - 2)? * s(k - 1, l + 1)? * s(k, l + 2)? * s(k, l - 1)?,
        s(k + 1, l - 2)? * s(k - 1, l + 1)? * s(k, l)? * s(k, l + 1)?,
        s(k + 1, l - 2)? * s(k - 2, l + 2)? * s(k, l + 1)? * s(k + 1, l - 1)?,
        s(k - 1, l + 2)? * s(k, l - 1)? * s(k - 1, l + 1)? * s(k + 2, l - 2)?,
        s(k - 1, l + 2)? * s(k, l - 1)? * s(k, l)? * s(k + 1, l - 1)?,
        s(k - 1, l + 2)? * s(k, l + 1)? * s(k + 1, l - 1)? * s(k, l - 2)?,
    ])
}

/// Residuals of the telescoping derivation:
/// `X_k^l - (Gamma_k^l - Gamma_{k-1}^l)`,
/// `Y_k^l - (Gamma_{k-2}^{l+2} - Gamma_{k-1}^l)`, and
/// `Y_{k+2}^l + X_{k+1}^l - X_k^{l+2} - Y_{k+1}^l`.
pub fn telescoping_check<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<[T; 3]> {
    if k < 4 {
        return Err(Error::Precondition("telescoping check needs k >= 4".into()));
    }
    let r1 = var_x(fam, k, l)? - (var_gamma(fam, k, l)? - var_gamma(fam, k - 1, l)?);
    let r2 = var_y(fam, k, l)? - (var_gamma(fam, k - 2, l + 2)? - var_gamma(fam, k - 1, l)?);
    let r3 = var_y(fam, k + 2, l)? + var_x(fam, k + 1, l)?
        - var_x(fam, k, l + 2)?
        - var_y(fam, k + 1, l)?;
    Ok([r1, r2, r3])
}

/// Residuals of the three hQQD equations at `(k, l)`:
/// `u_k^{l+3} w_k^{l+1} = u_{k+1}^{l+1} w_{k+1}^{l+1}`,
/// `u_k^{l+2+m} v_k^{l+m} = u_{k+1}^l v_{k+1}^l`,
/// `u_k^{l+2+m} + v_{k+1}^{l+m} + w_{k+1}^l = u_{k+2}^l + v_{k+1}^l + w_{k+1}^{l+m}`.
pub fn hqqd_residual<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<[T; 3]> {
    if k < 2 {
        return Err(Error::Precondition("hQQD needs k >= 2".into()));
    }
    let m = fam.m() as i64;
    let r1 = var_u(fam, k, l + 3)? * var_w(fam, k, l + 1)?
        - var_u(fam, k + 1, l + 1)? * var_w(fam, k + 1, l + 1)?;
    let r2 = var_u(fam, k, l + 2 + m)? * var_v(fam, k, l + m)?
        - var_u(fam, k + 1, l)? * var_v(fam, k + 1, l)?;
    let r3 = var_u(fam, k, l + 2 + m)? + var_v(fam, k + 1, l + m)? + var_w(fam, k + 1, l)?
        - var_u(fam, k + 2, l)?
        - var_v(fam, k + 1, l)?
        - var_w(fam, k + 1, l + m)?;
    Ok([r1, r2, r3])
}

/// Residuals of the plain QQD scheme (an independent shift table; only
/// meaningful on an `m = 1` lattice, where it must agree with
/// [`hqqd_residual`] because the printed forms coincide).
pub fn qqd_residual<T: Scalar>(fam: &DetFamilies<T>, k: u32, l: i64) -> Result<[T; 3]> {
    if fam.m() != 1 {
        return Err(Error::Precondition(
            "the QQD scheme is the m = 1 reduction".into(),
        ));
    }
    if k < 2 {
        return Err(Error::Precondition("QQD needs k >= 2".into()));
    }
    let r1 = var_u(fam, k, l + 3)? * var_w(fam, k, l + 1)?
        - var_u(fam, k + 1, l + 1)? * var_w(fam, k + 1, l + 1)?;
    let r2 = var_u(fam, k, l + 3)? * var_v(fam, k, l + 1)?
        - var_u(fam, k + 1, l)? * var_v(fam, k + 1, l)?;
    let r3 = var_u(fam, k, l + 3)? + var_v(fam, k + 1, l + 1)? + var_w(fam, k + 1, l)?
        - var_u(fam, k + 2, l)?
        - var_v(fam, k + 1, l)?
        - var_w(fam, k + 1, l + 1)?;
    Ok([r1, r2, r3])
}

/// The additive hQQD equation, cleared of denominators, minus the hungry
/// HADT residual at the translated site `(k + 1, l)`:
/// `r3 * Delta_k^{l+m+2} Delta_k^{l+2m+2} Delta_{k+2}^l Delta_{k+2}^{l+m}
///  - hhadt_residual(k+1, l)`. Zero identically, which exhibits the
/// equivalence of the two statements.
pub fn hqqd_hhadt_product_residual<T: Scalar>(
    fam: &DetFamilies<T>,
    k: u32,
    l: i64,
) -> Result<T> {
    let m = fam.m() as i64;
    let [_, _, r3] = hqqd_residual(fam, k, l)?;
    let lcd = fam.delta(k, l + m + 2)?
        * fam.delta(k, l + 2 * m + 2)?
        * fam.delta(k + 2, l)?
        * fam.delta(k + 2, l + m)?;
    Ok(r3 * lcd - hhadt_residual(fam, k + 1, l)?)
}
