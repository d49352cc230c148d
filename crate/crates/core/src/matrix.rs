//! Dense scalar matrices, fraction-free determinants, and the two- and
//! three-row/column Sylvester identity checkers.
//!
//! Determinants use Bareiss elimination: with integer entries every
//! intermediate value stays integral, and over rationals the divisions are
//! exact, so exact mode never leaves the ring it started in. Cofactor
//! expansion is kept out of the library on purpose; tests use it as an
//! independent oracle for small sizes.

use std::ops::Index;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Dense row-major matrix over a [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "shape/data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    /// Submatrix picking the listed rows and columns, order preserved.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let data = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| self[(r, c)].clone()))
            .collect();
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Submatrix with the listed rows and columns removed.
    pub fn minor_removing(&self, drop_rows: &[usize], drop_cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|r| !drop_rows.contains(r)).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|c| !drop_cols.contains(c)).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Determinant by Bareiss fraction-free elimination with row pivoting.
    /// The empty matrix has determinant 1.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "det of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(T::one());
        }
        let mut a: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)].clone()).collect())
            .collect();
        let mut negate = false;
        let mut prev = T::one();
        for k in 0..n - 1 {
            let pivot = pick_pivot(&a, k, n);
            let Some(p) = pivot else {
                return Ok(T::zero());
            };
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num =
                        a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                    a[i][j] = num / prev.clone();
                }
                a[i][k] = T::zero();
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { -d } else { d })
    }
}

/// Pivot row for column `k`: first non-zero entry in exact mode, largest
/// magnitude in float mode. `None` means the column is exhausted.
fn pick_pivot<T: Scalar>(a: &[Vec<T>], k: usize, n: usize) -> Option<usize> {
    if T::EXACT {
        (k..n).find(|&r| !a[r][k].is_zero())
    } else {
        let best = (k..n).max_by(|&r, &s| {
            a[r][k]
                .to_f64()
                .abs()
                .partial_cmp(&a[s][k].to_f64().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[best][k].is_effectively_zero() {
            None
        } else {
            Some(best)
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

fn validate_indices(n: usize, idx: &[usize]) -> Result<()> {
    if !(idx.len() == 2 || idx.len() == 3) {
        return Err(Error::Precondition(format!(
            "sylvester index count must be 2 or 3, got {}",
            idx.len()
        )));
    }
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Precondition(
                "sylvester indices must be strictly increasing".into(),
            ));
        }
    }
    if idx.iter().any(|&i| i >= n) {
        return Err(Error::Precondition(format!(
            "sylvester index out of range for size {n}"
        )));
    }
    Ok(())
}

/// Residual of the two- or three-row/column Sylvester identity on `m`.
///
/// With `D(R; C)` the determinant after removing rows `R` and columns `C`,
/// the two-index form is
/// `D * D(i1,i2; j1,j2) - [D(i1;j1) D(i2;j2) - D(i1;j2) D(i2;j1)]`
/// and the three-index form is
/// `D * D(i1,i2,i3; j1,j2,j3) - [D(i1,i2;j1,j2) D(i3;j3) - D(i1,i3;j1,j2) D(i2;j3) + D(i2,i3;j1,j2) D(i1;j3)]`.
///
/// Both vanish identically for every square matrix; the returned scalar is
/// the left-hand side minus the right-hand side.
pub fn sylvester_check<T: Scalar>(m: &Matrix<T>, rows: &[usize], cols: &[usize]) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Dimension("sylvester_check needs a square matrix".into()));
    }
    if rows.len() != cols.len() {
        return Err(Error::Precondition(
            "row and column index lists must have equal length".into(),
        ));
    }
    validate_indices(m.rows(), rows)?;
    validate_indices(m.rows(), cols)?;

    let full = m.det()?;
    match rows.len() {
        2 => {
            let (i1, i2) = (rows[0], rows[1]);
            let (j1, j2) = (cols[0], cols[1]);
            let inner = m.minor_removing(rows, cols).det()?;
            let a = m.minor_removing(&[i1], &[j1]).det()?;
            let b = m.minor_removing(&[i2], &[j2]).det()?;
            let c = m.minor_removing(&[i1], &[j2]).det()?;
            let d = m.minor_removing(&[i2], &[j1]).det()?;
            Ok(full * inner - (a * b - c * d))
        }
        3 => {
            let (i1, i2, i3) = (rows[0], rows[1], rows[2]);
            let (j1, j2, j3) = (cols[0], cols[1], cols[2]);
            let inner = m.minor_removing(rows, cols).det()?;
            let m12 = m.minor_removing(&[i1, i2], &[j1, j2]).det()?;
            let m13 = m.minor_removing(&[i1, i3], &[j1, j2]).det()?;
            let m23 = m.minor_removing(&[i2, i3], &[j1, j2]).det()?;
            let s1 = m.minor_removing(&[i1], &[j3]).det()?;
            let s2 = m.minor_removing(&[i2], &[j3]).det()?;
            let s3 = m.minor_removing(&[i3], &[j3]).det()?;
            Ok(full * inner - (m12 * s3 - m13 * s2 + m23 * s1))
        }
        _ => unreachable!("validated above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SplitMix64;
    use crate::Rat;
    use num_traits::Zero;

    fn rat(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    fn rat_mat(rows: Vec<Vec<i64>>) -> Matrix<Rat> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat).collect())
                .collect(),
        )
    }

    /// Cofactor-expansion determinant, the independent oracle for n <= 3.
    fn det_cofactor(m: &Matrix<Rat>) -> Rat {
        let n = m.rows();
        assert!(n <= 3, "oracle only covers n <= 3");
        match n {
            0 => Rat::from_i64(1),
            1 => m[(0, 0)].clone(),
            2 => m[(0, 0)].clone() * m[(1, 1)].clone() - m[(0, 1)].clone() * m[(1, 0)].clone(),
            _ => {
                let mut acc = Rat::zero();
                for j in 0..3 {
                    let minor = m.minor_removing(&[0], &[j]);
                    let term = m[(0, j)].clone() * det_cofactor(&minor);
                    acc = if j % 2 == 0 { acc + term } else { acc - term };
                }
                acc
            }
        }
    }

    fn random_matrix(rng: &mut SplitMix64, n: usize) -> Matrix<Rat> {
        Matrix::from_rows(
            (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let num = rng.next_range(19) as i64 - 9;
                            let den = 1 + rng.next_range(4) as i64;
                            Rat::from_ratio(num, den)
                        })
                        .collect()
                })
                .collect(),
        )
    }

    #[test]
    fn det_empty_matrix_is_one() {
        let m: Matrix<Rat> = Matrix::zero(0, 0);
        assert_eq!(m.det().unwrap(), rat(1));
    }

    #[test]
    fn det_two_by_two_examples() {
        // Frozen from cofactor expansion: 2*5 - 3*3 = 1 and 2*9 - 3*5 = 3.
        let a = rat_mat(vec![vec![2, 3], vec![3, 5]]);
        assert_eq!(a.det().unwrap(), rat(1));
        assert_eq!(det_cofactor(&a), rat(1));
        let b = rat_mat(vec![vec![2, 3], vec![5, 9]]);
        assert_eq!(b.det().unwrap(), rat(3));
        assert_eq!(det_cofactor(&b), rat(3));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = rat_mat(vec![vec![1, 2, 3], vec![4, 5, 6]]);
        assert!(matches!(m.det(), Err(Error::Dimension(_))));
    }

    #[test]
    fn det_matches_cofactor_oracle_up_to_three() {
        let mut rng = SplitMix64::new(0x5eed);
        for n in 0..=3 {
            for _ in 0..50 {
                let m = random_matrix(&mut rng, n);
                assert_eq!(m.det().unwrap(), det_cofactor(&m));
            }
        }
    }

    #[test]
    fn det_zero_for_duplicated_rows() {
        let mut rng = SplitMix64::new(7);
        for n in 2..=8usize {
            for _ in 0..10 {
                let mut m = random_matrix(&mut rng, n);
                let src = rng.next_range(n as u64) as usize;
                let mut dst = rng.next_range(n as u64) as usize;
                if dst == src {
                    dst = (dst + 1) % n;
                }
                for j in 0..n {
                    m.set(dst, j, m[(src, j)].clone());
                }
                assert!(m.det().unwrap().is_zero());
            }
        }
    }

    #[test]
    fn det_is_multiplicative() {
        let mut rng = SplitMix64::new(42);
        for n in 1..=5usize {
            for _ in 0..10 {
                let a = random_matrix(&mut rng, n);
                let b = random_matrix(&mut rng, n);
                let ab = a.matmul(&b).unwrap();
                assert_eq!(ab.det().unwrap(), a.det().unwrap() * b.det().unwrap());
            }
        }
    }

    #[test]
    fn sylvester_two_index_desnanot_jacobi() {
        let mut rng = SplitMix64::new(99);
        let m = random_matrix(&mut rng, 3);
        assert!(sylvester_check(&m, &[0, 2], &[0, 2]).unwrap().is_zero());
    }

    #[test]
    fn sylvester_vanishes_on_random_matrices() {
        // 200 random matrices per size, both variants, random increasing
        // index lists. Exact zeros only.
        let mut rng = SplitMix64::new(0xabcdef);
        for n in 3..=7usize {
            for _ in 0..200 {
                let m = random_matrix(&mut rng, n);
                for count in [2usize, 3] {
                    let rows = random_increasing(&mut rng, n, count);
                    let cols = random_increasing(&mut rng, n, count);
                    let res = sylvester_check(&m, &rows, &cols).unwrap();
                    assert!(res.is_zero(), "size {n} rows {rows:?} cols {cols:?}");
                }
            }
        }
    }

    fn random_increasing(rng: &mut SplitMix64, n: usize, count: usize) -> Vec<usize> {
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < count {
            let v = rng.next_range(n as u64) as usize;
            if !picked.contains(&v) {
                picked.push(v);
            }
        }
        picked.sort_unstable();
        picked
    }

    #[test]
    fn sylvester_rejects_bad_indices() {
        let m = rat_mat(vec![vec![1, 2], vec![3, 4]]);
        // Three indices cannot fit in a 2x2 matrix.
        assert!(sylvester_check(&m, &[0, 1, 2], &[0, 1, 2]).is_err());
        assert!(sylvester_check(&m, &[0], &[0]).is_err());
        assert!(sylvester_check(&m, &[1, 0], &[0, 1]).is_err());
        assert!(sylvester_check(&m, &[0, 1], &[0]).is_err());
    }
}
