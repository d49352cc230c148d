//! Monic bi-orthogonal polynomial families over a striped moment sequence.
//!
//! `P_n^l` puts the monomial column on the right of the striped moment
//! block, `Q_n^l` puts the monomial row at the bottom; both are divided by
//! `tau_n^l`, which makes them monic of degree `n`. They are dual under the
//! bilinear form `<f, g>_l = sum_{i,j} f_i g_j c_{l+m*i+j}`, computed from
//! the moments directly so the check is independent of how the measure was
//! realized.

use crate::error::Error;
use crate::matrix::Matrix;
use crate::measure::MomentSequence;
use crate::scalar::Scalar;
use crate::Result;

use super::{qd_var, qd_var_or_boundary, QdVarKind, TauLattice};

/// Dense polynomial in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyX<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PolyX<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_effectively_zero()) {
            coeffs.pop();
        }
        PolyX { coeffs }
    }

    pub fn zero() -> Self {
        PolyX { coeffs: vec![] }
    }

    pub fn one() -> Self {
        PolyX {
            coeffs: vec![T::one()],
        }
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyX::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyX::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        PolyX::new(self.coeffs.iter().map(|v| v.clone() * c.clone()).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        PolyX { coeffs }
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}

/// The two adjacent families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    P,
    Q,
}

/// Monic `P_n^l` or `Q_n^l` as a dense polynomial, via bottom/right
/// cofactor expansion of the displayed determinant divided by `tau_n^l`.
pub fn build_poly<T: Scalar>(
    lat: &TauLattice<T>,
    family: Family,
    n: u32,
    l: i64,
) -> Result<PolyX<T>> {
    let tau = lat.tau(n, l)?;
    if tau.is_effectively_zero() {
        return Err(Error::Breakdown {
            what: "build_poly normalizer",
            n: n as i64,
            l,
        });
    }
    if n == 0 {
        return Ok(PolyX::one());
    }
    let m = lat.m() as i64;
    let size = n as usize;
    let mut coeffs = Vec::with_capacity(size + 1);
    match family {
        Family::P => {
            // Rows i = 0..n of moments c_{l+m*i+j}, j = 0..n-1; the x^i
            // coefficient is the signed minor dropping row i.
            let block: Vec<Vec<T>> = (0..=size as i64)
                .map(|i| {
                    (0..size as i64)
                        .map(|j| lat.moments().get(l + m * i + j))
                        .collect::<Result<Vec<T>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for i in 0..=size {
                let rows: Vec<Vec<T>> = (0..=size)
                    .filter(|&r| r != i)
                    .map(|r| block[r].clone())
                    .collect();
                let minor = Matrix::from_rows(rows).det()?;
                let sign_flip = (size - i) % 2 == 1;
                let val = minor / tau.clone();
                coeffs.push(if sign_flip { -val } else { val });
            }
        }
        Family::Q => {
            // Rows i = 0..n-1 of moments c_{l+m*i+j}, j = 0..n; the x^j
            // coefficient is the signed minor dropping column j.
            let block: Vec<Vec<T>> = (0..size as i64)
                .map(|i| {
                    (0..=size as i64)
                        .map(|j| lat.moments().get(l + m * i + j))
                        .collect::<Result<Vec<T>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for j in 0..=size {
                let rows: Vec<Vec<T>> = block
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let minor = Matrix::from_rows(rows).det()?;
                let sign_flip = (size - j) % 2 == 1;
                let val = minor / tau.clone();
                coeffs.push(if sign_flip { -val } else { val });
            }
        }
    }
    Ok(PolyX::new(coeffs))
}

/// `<f, g>_l = sum_{i,j} f_i g_j c_{l+m*i+j}`.
pub fn pairing<T: Scalar>(
    moments: &MomentSequence<T>,
    l: i64,
    f: &PolyX<T>,
    g: &PolyX<T>,
) -> Result<T> {
    let m = moments.m() as i64;
    let mut acc = T::zero();
    for i in 0..=f.degree().map_or(0, |d| d) {
        let fi = f.coeff(i);
        if fi.is_effectively_zero() {
            continue;
        }
        for j in 0..=g.degree().map_or(0, |d| d) {
            let gj = g.coeff(j);
            if gj.is_effectively_zero() {
                continue;
            }
            acc = acc + fi.clone() * gj * moments.get(l + m * i as i64 + j as i64)?;
        }
    }
    Ok(acc)
}

/// Result of pairing every `P_k^l` against every `Q_n^l` for `k, n <= N`.
#[derive(Debug, Clone)]
pub struct BiorthReport<T> {
    /// Diagonal normalizations `h_k^l`.
    pub h: Vec<T>,
    /// Off-diagonal pairings that failed to vanish: `(k, n, value)`.
    pub off_diagonal_failures: Vec<(u32, u32, T)>,
    /// Diagonal entries that vanished (they must not).
    pub zero_diagonal: Vec<u32>,
}

impl<T> BiorthReport<T> {
    pub fn pass(&self) -> bool {
        self.off_diagonal_failures.is_empty() && self.zero_diagonal.is_empty()
    }
}

/// Pair the families up to order `n_max` at superscript `l`.
pub fn biorthogonality_report<T: Scalar>(
    lat: &TauLattice<T>,
    n_max: u32,
    l: i64,
) -> Result<BiorthReport<T>> {
    let ps: Vec<PolyX<T>> = (0..=n_max)
        .map(|k| build_poly(lat, Family::P, k, l))
        .collect::<Result<Vec<_>>>()?;
    let qs: Vec<PolyX<T>> = (0..=n_max)
        .map(|k| build_poly(lat, Family::Q, k, l))
        .collect::<Result<Vec<_>>>()?;
    let mut h = Vec::with_capacity(n_max as usize + 1);
    let mut off = Vec::new();
    let mut zero_diag = Vec::new();
    for k in 0..=n_max {
        for n in 0..=n_max {
            let val = pairing(lat.moments(), l, &ps[k as usize], &qs[n as usize])?;
            if k == n {
                if val.is_effectively_zero() {
                    zero_diag.push(k);
                }
                h.push(val);
            } else if !val.is_effectively_zero() {
                off.push((k, n, val));
            }
        }
    }
    Ok(BiorthReport {
        h,
        off_diagonal_failures: off,
        zero_diagonal: zero_diag,
    })
}

/// Expansion of `x P_n^l` over the P family (`a_{n,i}`) or of
/// `x^m Q_{n-m+1}^l` over the Q family (`b_{n,i}`), coefficients obtained
/// by exact duality: `a_{n,i} = <x P_n, Q_i> / h_i`.
#[derive(Debug, Clone)]
pub struct RecurrenceExpansion<T> {
    pub family: Family,
    pub n: u32,
    pub l: i64,
    /// Coefficient of the family member of order `i`, for `i = 0..=n`.
    pub coeffs: Vec<T>,
    /// Coefficient of the order `n+1` member; 1 exactly, both families
    /// being monic.
    pub leading: T,
}

impl<T: Scalar> RecurrenceExpansion<T> {
    /// Indices `i <= n - m - 1` whose coefficient failed to vanish.
    pub fn tail_violations(&self, m: u32) -> Vec<u32> {
        let cutoff = self.n as i64 - m as i64 - 1;
        (0..=cutoff.min(self.coeffs.len() as i64 - 1))
            .filter(|&i| i >= 0 && !self.coeffs[i as usize].is_effectively_zero())
            .map(|i| i as u32)
            .collect()
    }
}

pub fn recurrence_coeffs<T: Scalar>(
    lat: &TauLattice<T>,
    family: Family,
    n: u32,
    l: i64,
) -> Result<RecurrenceExpansion<T>> {
    let m = lat.m();
    let expanded = match family {
        Family::P => build_poly(lat, Family::P, n, l)?.shift(1),
        Family::Q => {
            if n + 1 < m {
                return Err(Error::Precondition(format!(
                    "Q expansion needs n >= m - 1, got n = {n}, m = {m}"
                )));
            }
            build_poly(lat, Family::Q, n + 1 - m, l)?.shift(m as usize)
        }
    };
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    let mut leading = T::zero();
    for i in 0..=n + 1 {
        let h_i = {
            let tau_i = lat.tau(i, l)?;
            let tau_i1 = lat.tau(i + 1, l)?;
            if tau_i.is_effectively_zero() {
                return Err(Error::Breakdown {
                    what: "recurrence h",
                    n: i as i64,
                    l,
                });
            }
            tau_i1 / tau_i
        };
        if h_i.is_effectively_zero() {
            return Err(Error::Breakdown {
                what: "recurrence h",
                n: i as i64,
                l,
            });
        }
        let dual = match family {
            Family::P => build_poly(lat, Family::Q, i, l)?,
            Family::Q => build_poly(lat, Family::P, i, l)?,
        };
        let num = match family {
            Family::P => pairing(lat.moments(), l, &expanded, &dual)?,
            Family::Q => pairing(lat.moments(), l, &dual, &expanded)?,
        };
        let c = num / h_i;
        if i == n + 1 {
            leading = c;
        } else {
            coeffs.push(c);
        }
    }
    Ok(RecurrenceExpansion {
        family,
        n,
        l,
        coeffs,
        leading,
    })
}

/// Which pair of linear relations to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationPair {
    /// `x P_n^{l+m} = P_{n+1}^l + v_n^l P_n^l` and
    /// `P_{n+1}^l = P_{n+1}^{l+1} + w_n^l P_n^{l+1}`.
    P,
    /// `x Q_n^{l+1} = Q_{n+1}^l + vt_n^l Q_n^l` and
    /// `Q_n^l = Q_n^{l+m} + wt_{n-1}^l Q_{n-1}^{l+m}`.
    Q,
}

/// Residual polynomials of the chosen relation pair at `(n, l)`; both are
/// the zero polynomial on any lattice of determinant ratios.
pub fn verify_linear_relations<T: Scalar>(
    lat: &TauLattice<T>,
    which: RelationPair,
    n: u32,
    l: i64,
) -> Result<[PolyX<T>; 2]> {
    let m = lat.m() as i64;
    match which {
        RelationPair::P => {
            let v = qd_var(lat, QdVarKind::V, n, l)?;
            let w = qd_var(lat, QdVarKind::W, n, l)?;
            let p_n_lm = build_poly(lat, Family::P, n, l + m)?;
            let p_n1_l = build_poly(lat, Family::P, n + 1, l)?;
            let p_n_l = build_poly(lat, Family::P, n, l)?;
            let r1 = p_n_lm
                .shift(1)
                .sub(&p_n1_l)
                .sub(&p_n_l.scale(&v));
            let p_n1_l1 = build_poly(lat, Family::P, n + 1, l + 1)?;
            let p_n_l1 = build_poly(lat, Family::P, n, l + 1)?;
            let r2 = p_n1_l.sub(&p_n1_l1).sub(&p_n_l1.scale(&w));
            Ok([r1, r2])
        }
        RelationPair::Q => {
            let vt = qd_var(lat, QdVarKind::VTilde, n, l)?;
            let q_n_l1 = build_poly(lat, Family::Q, n, l + 1)?;
            let q_n1_l = build_poly(lat, Family::Q, n + 1, l)?;
            let q_n_l = build_poly(lat, Family::Q, n, l)?;
            let r1 = q_n_l1
                .shift(1)
                .sub(&q_n1_l)
                .sub(&q_n_l.scale(&vt));
            let wt = qd_var_or_boundary(lat, QdVarKind::WTilde, n as i64 - 1, l)?;
            let q_n_lm = build_poly(lat, Family::Q, n, l + m)?;
            let r2 = if n == 0 {
                q_n_l.sub(&q_n_lm)
            } else {
                let q_prev = build_poly(lat, Family::Q, n - 1, l + m)?;
                q_n_l.sub(&q_n_lm).sub(&q_prev.scale(&wt))
            };
            Ok([r1, r2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{random_measure, DiscreteMeasure};
    use crate::Rat;
    use num_traits::One;

    fn lattice_12(m: u32, count: usize) -> TauLattice<Rat> {
        let meas = DiscreteMeasure::new(
            vec![Rat::from_i64(1), Rat::from_i64(2)],
            vec![Rat::from_i64(1), Rat::from_i64(1)],
        )
        .unwrap();
        TauLattice::new(meas.moments(count, m))
    }

    fn random_lattice(seed: u64, m: u32, size: usize, count: usize) -> TauLattice<Rat> {
        let meas: DiscreteMeasure<Rat> = random_measure(seed, size, true).unwrap();
        TauLattice::new(meas.moments(count, m))
    }

    #[test]
    fn poly_order_zero_is_one() {
        let lat = lattice_12(2, 8);
        assert_eq!(build_poly(&lat, Family::P, 0, 3).unwrap(), PolyX::one());
        assert_eq!(build_poly(&lat, Family::Q, 0, 3).unwrap(), PolyX::one());
    }

    #[test]
    fn first_order_polys_are_moment_ratios() {
        // P_1^l = x - c_{l+m}/c_l, Q_1^l = x - c_{l+1}/c_l.
        let lat = lattice_12(1, 8);
        let p = build_poly(&lat, Family::P, 1, 0).unwrap();
        assert_eq!(p.coeff(1), Rat::one());
        assert_eq!(p.coeff(0), -Rat::from_ratio(3, 2));
        let lat2 = lattice_12(2, 8);
        let q = build_poly(&lat2, Family::Q, 1, 0).unwrap();
        assert_eq!(q.coeff(0), -Rat::from_ratio(3, 2));
        let p2 = build_poly(&lat2, Family::P, 1, 0).unwrap();
        assert_eq!(p2.coeff(0), -Rat::from_ratio(5, 2));
    }

    #[test]
    fn polys_are_monic_of_full_degree() {
        let lat = random_lattice(5, 2, 6, 60);
        for n in 0..5u32 {
            for fam in [Family::P, Family::Q] {
                let p = build_poly(&lat, fam, n, 2).unwrap();
                assert_eq!(p.degree(), Some(n as usize));
                assert_eq!(p.leading(), Some(&Rat::one()));
            }
        }
    }

    #[test]
    fn biorthogonality_and_h_ratio() {
        for (seed, m) in [(1u64, 1u32), (2, 2), (3, 3)] {
            let lat = random_lattice(seed, m, 6, 80);
            let rep = biorthogonality_report(&lat, 4, 1).unwrap();
            assert!(rep.pass());
            // h_0^l = c_l.
            assert_eq!(rep.h[0], lat.moments().get(1).unwrap());
            // h_k^l = tau_{k+1}^l / tau_k^l.
            for k in 0..=4u32 {
                let expect = lat.tau(k + 1, 1).unwrap() / lat.tau(k, 1).unwrap();
                assert_eq!(rep.h[k as usize], expect);
            }
        }
    }

    #[test]
    fn recurrence_has_m_plus_two_terms() {
        for (seed, m) in [(11u64, 1u32), (12, 2), (13, 3)] {
            let lat = random_lattice(seed, m, 7, 120);
            for n in m + 1..=5 {
                for fam in [Family::P, Family::Q] {
                    let exp = recurrence_coeffs(&lat, fam, n, 0).unwrap();
                    assert_eq!(exp.leading, Rat::one(), "monic leading term");
                    assert!(
                        exp.tail_violations(m).is_empty(),
                        "m={m} n={n} fam={fam:?} coeffs={:?}",
                        exp.coeffs
                    );
                }
            }
        }
    }

    #[test]
    fn m2_specific_zero_pattern() {
        // m = 2, n = 4: a_{4,0} = a_{4,1} = 0.
        let lat = random_lattice(21, 2, 7, 120);
        let exp = recurrence_coeffs(&lat, Family::P, 4, 0).unwrap();
        assert!(exp.coeffs[0].is_effectively_zero());
        assert!(exp.coeffs[1].is_effectively_zero());
        assert!(!exp.coeffs[2].is_effectively_zero());
    }

    #[test]
    fn linear_relations_vanish() {
        for (seed, m) in [(31u64, 1u32), (32, 2), (33, 3)] {
            let lat = random_lattice(seed, m, 7, 140);
            for n in 0..4u32 {
                for l in 0..4i64 {
                    for which in [RelationPair::P, RelationPair::Q] {
                        let [r1, r2] = verify_linear_relations(&lat, which, n, l).unwrap();
                        assert!(r1.is_zero(), "r1 {which:?} m={m} n={n} l={l}");
                        assert!(r2.is_zero(), "r2 {which:?} m={m} n={n} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn relation_pairs_coincide_at_m1() {
        // At m = 1 the P and Q relation pairs are the same statements.
        let lat = random_lattice(41, 1, 6, 80);
        let n = 2;
        let l = 1;
        let vp = qd_var(&lat, QdVarKind::V, n, l).unwrap();
        let vq = qd_var(&lat, QdVarKind::VTilde, n, l).unwrap();
        assert_eq!(vp, vq);
        let [r1, r2] = verify_linear_relations(&lat, RelationPair::P, n, l).unwrap();
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn n0_relation_is_trivial_identity() {
        // x P_0^{l+m} = P_1^l + v_0^l with v_0^l = c_{l+m}/c_l.
        let lat = lattice_12(2, 12);
        let [r1, _] = verify_linear_relations(&lat, RelationPair::P, 0, 1).unwrap();
        assert!(r1.is_zero());
    }
}
