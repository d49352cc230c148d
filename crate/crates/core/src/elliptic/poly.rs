//! Polynomials over the admissible elliptic basis and the four determinant-
//! normalized families P, Q, T, S.
//!
//! Coefficients are stored densely by basis *position* (position 0 holds
//! `e_0`, position `p >= 1` holds `e_{p+1}`). Multiplication by `x` is the
//! pure index shift `e_0 -> e_2`, `e_j -> e_{j+2}`; no curve reduction is
//! ever needed because multiplication by `y` never occurs in the verified
//! relations.

use crate::error::Error;
use crate::gram::{eval_basis, index_at_position, GramMatrix};
use crate::scalar::Scalar;
use crate::Result;

use super::families::{DetFamilies, DetFamily};

/// Element of the span of `{e_0, e_2, e_3, ...}` with scalar coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> EllipticPoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_effectively_zero()) {
            coeffs.pop();
        }
        EllipticPoly { coeffs }
    }

    pub fn zero() -> Self {
        EllipticPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        EllipticPoly {
            coeffs: vec![T::one()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at dense position `pos`.
    pub fn coeff_at(&self, pos: usize) -> T {
        self.coeffs.get(pos).cloned().unwrap_or_else(T::zero)
    }

    /// Coefficient of the basis element with index `idx`.
    pub fn coeff_of_index(&self, idx: i64) -> Result<T> {
        Ok(self.coeff_at(crate::gram::position_of_index(idx)?))
    }

    /// Position of the top non-zero coefficient.
    pub fn top_position(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        EllipticPoly::new(
            (0..len)
                .map(|i| self.coeff_at(i) + other.coeff_at(i))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        EllipticPoly::new(
            (0..len)
                .map(|i| self.coeff_at(i) - other.coeff_at(i))
                .collect(),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        EllipticPoly::new(
            self.coeffs
                .iter()
                .map(|v| v.clone() * c.clone())
                .collect(),
        )
    }

    /// Multiplication by `x` as the index shift: position 0 moves to 1,
    /// position `p >= 1` moves to `p + 2`.
    pub fn x_shift(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + 2];
        for (p, c) in self.coeffs.iter().enumerate() {
            let target = if p == 0 { 1 } else { p + 2 };
            out[target] = c.clone();
        }
        EllipticPoly::new(out)
    }

    /// Value at a point.
    pub fn eval(&self, x: &T, y: &T) -> Result<T> {
        let mut acc = T::zero();
        for (p, c) in self.coeffs.iter().enumerate() {
            if c.is_effectively_zero() {
                continue;
            }
            acc = acc + c.clone() * eval_basis(index_at_position(p), x, y)?;
        }
        Ok(acc)
    }

    /// `<e_r, self> = sum_pos coeff * <e_r, e_{index(pos)}>`.
    pub fn pair_with_row(&self, gram: &GramMatrix<T>, r: i64) -> Result<T> {
        let mut acc = T::zero();
        for (p, c) in self.coeffs.iter().enumerate() {
            if c.is_effectively_zero() {
                continue;
            }
            acc = acc + c.clone() * gram.get(r, index_at_position(p))?;
        }
        Ok(acc)
    }
}

/// The four families of determinant-normalized polynomials.
///
/// `P`/`Q` expand over columns `e_0, e_2, ..., e_k` with Gram rows striding
/// as `Delta`/`Theta`; `T`/`S` expand over `e_2, ..., e_{k+1}` with rows as
/// `Pi`/`Sigma`. Each is monic in its top basis element after division by
/// the size-`(k-1)` member of its row family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyFamily {
    P,
    Q,
    T,
    S,
}

impl PolyFamily {
    fn det_family(self) -> DetFamily {
        match self {
            PolyFamily::P => DetFamily::Delta,
            PolyFamily::Q => DetFamily::Theta,
            PolyFamily::T => DetFamily::Pi,
            PolyFamily::S => DetFamily::Sigma,
        }
    }
}

/// Build `P_k^l`, `Q_k^l`, `T_k^l`, or `S_k^l` by expanding the monomial
/// bottom row of the displayed determinant and dividing by the normalizer.
pub fn build_elliptic_poly<T: Scalar>(
    fam: &DetFamilies<T>,
    family: PolyFamily,
    k: u32,
    l: i64,
) -> Result<EllipticPoly<T>> {
    if l < 2 {
        return Err(Error::Precondition(format!(
            "elliptic polynomial needs l >= 2, got {l}"
        )));
    }
    match family {
        PolyFamily::P | PolyFamily::Q => {
            if k == 0 {
                return Ok(EllipticPoly::one());
            }
        }
        PolyFamily::T | PolyFamily::S => {
            if k == 0 {
                return Err(Error::Precondition(
                    "T/S families start at k = 1".into(),
                ));
            }
        }
    }
    let det_family = family.det_family();
    let normalizer = fam.det(det_family, k - 1, l)?;
    if normalizer.is_effectively_zero() {
        return Err(Error::Breakdown {
            what: "elliptic polynomial normalizer",
            n: k as i64 - 1,
            l,
        });
    }
    // Gram rows: the size-k row list of the family, minus its last row
    // (the bottom row of the display is the monomial row instead).
    let mut rows = fam.row_indices(det_family, k, l);
    rows.pop();
    let cols = DetFamilies::<T>::col_positions(det_family, k);
    let size = k as usize;
    let mut coeffs_by_position: Vec<(usize, T)> = Vec::with_capacity(size);
    for (c_idx, &col_pos) in cols.iter().enumerate() {
        let kept: Vec<usize> = cols
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| *i != c_idx)
            .map(|(_, p)| p)
            .collect();
        let minor = fam.gram_minor(&rows, &kept)?;
        let sign_flip = (size - 1 + c_idx) % 2 == 1;
        let val = minor / normalizer.clone();
        coeffs_by_position.push((col_pos, if sign_flip { -val } else { val }));
    }
    let top = coeffs_by_position.iter().map(|(p, _)| *p).max().unwrap();
    let mut dense = vec![T::zero(); top + 1];
    for (p, v) in coeffs_by_position {
        dense[p] = v;
    }
    Ok(EllipticPoly::new(dense))
}
