//! Laurent polynomials in the spectral parameter and matrices over them.
//!
//! The spectral matrices of every Lax pair here have entries that are
//! polynomial in `lambda` and `1/lambda`, so the entry type is a map from
//! integer exponent to scalar coefficient. Zero coefficients are never
//! stored; equality and the zero test are structural after that
//! normalization (with the float tolerance folded into
//! [`Scalar::is_effectively_zero`]).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Laurent polynomial in the spectral parameter `lambda`.
#[derive(Clone, PartialEq, Default)]
pub struct LaurentPoly<T> {
    coeffs: BTreeMap<i64, T>,
}

impl<T: Scalar> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::term(c, 0)
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// `c * lambda^exp`.
    pub fn term(c: T, exp: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_effectively_zero() {
            coeffs.insert(exp, c);
        }
        LaurentPoly { coeffs }
    }

    /// `lambda^exp`.
    pub fn lambda_pow(exp: i64) -> Self {
        Self::term(T::one(), exp)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> T {
        self.coeffs.get(&exp).cloned().unwrap_or_else(T::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Exponents with non-zero coefficients, ascending.
    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    fn insert_add(&mut self, exp: i64, c: T) {
        let entry = self.coeffs.remove(&exp);
        let sum = match entry {
            Some(prev) => prev + c,
            None => c,
        };
        if !sum.is_effectively_zero() {
            self.coeffs.insert(exp, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            out.insert_add(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            out.insert_add(e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    /// Exact coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                out.insert_add(ea + eb, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero();
        for (&e, v) in &self.coeffs {
            out.insert_add(e, v.clone() * c.clone());
        }
        out
    }

    /// Multiply by `lambda^k`.
    pub fn shift_exp(&self, k: i64) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Evaluate at `lambda = x0`.
    ///
    /// At `x0 = 0` a Laurent polynomial with poles cannot be evaluated
    /// directly; callers that need a value there clear the poles first
    /// (see [`Self::shift_exp`]). With surviving poles the value returned
    /// is `(lambda^s * p)(0)` for `s = -min_exp`.
    pub fn eval(&self, x0: &T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        if !x0.is_zero() {
            let mut acc = T::zero();
            for (&e, c) in &self.coeffs {
                acc = acc + c.clone() * x0.pow_i(e);
            }
            acc
        } else {
            let lowest = self.min_exp().unwrap().min(0);
            self.coeff(lowest)
        }
    }
}

impl<T: Scalar> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| match e {
                0 => format!("{c}"),
                1 => format!("({c})L"),
                _ => format!("({c})L^{e}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Dense matrix with [`LaurentPoly`] entries.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<LaurentPoly<T>>,
}

impl<T: Scalar> LaurentMatrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        LaurentMatrix {
            rows,
            cols,
            data: vec![LaurentPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &LaurentPoly<T> {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: LaurentPoly<T>) {
        self.data[r * self.cols + c] = v;
    }

    /// Add `v` into entry `(r, c)`. Lets builders place colliding terms
    /// additively, which is exactly what the m = 1 reductions need.
    pub fn add_into(&mut self, r: usize, c: usize, v: LaurentPoly<T>) {
        let cur = self.get(r, c).add(&v);
        self.set(r, c, cur);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(LaurentPoly::is_zero)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "laurent matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = LaurentPoly::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("laurent matrix subtraction".into()));
        }
        let mut out = Self::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).sub(other.get(i, j)));
            }
        }
        Ok(out)
    }

    /// Apply `v -> M v` to a vector of evaluated entries, with `lambda = x0`.
    pub fn apply_at(&self, v: &[T], x0: &T) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension("laurent apply length".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut row = LaurentPoly::zero();
                for (j, vj) in v.iter().enumerate() {
                    row = row.add(&self.get(i, j).scale(vj));
                }
                row.eval(x0)
            })
            .collect())
    }

    /// Worst pole order over all entries: `max(0, -min_exp)`.
    pub fn pole_order(&self) -> i64 {
        self.data
            .iter()
            .filter_map(LaurentPoly::min_exp)
            .map(|e| (-e).max(0))
            .max()
            .unwrap_or(0)
    }

    /// Union of the exponent supports of all entries.
    pub fn exponent_support(&self) -> Vec<i64> {
        let mut all: Vec<i64> = self.data.iter().flat_map(|p| p.support()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn lam() -> LaurentPoly<Rat> {
        LaurentPoly::lambda_pow(1)
    }

    #[test]
    fn identity_times_anything_is_identity_on_it() {
        let mut b = LaurentMatrix::<Rat>::zero(2, 2);
        b.set(0, 0, lam());
        b.set(0, 1, LaurentPoly::constant(Rat::from_ratio(3, 5)));
        b.set(1, 0, LaurentPoly::lambda_pow(-2));
        let i = LaurentMatrix::identity(2);
        assert_eq!(i.matmul(&b).unwrap(), b);
    }

    #[test]
    fn exponents_add_under_multiplication() {
        let mut a = LaurentMatrix::<Rat>::zero(1, 1);
        a.set(0, 0, lam());
        let mut b = LaurentMatrix::<Rat>::zero(1, 1);
        b.set(0, 0, LaurentPoly::lambda_pow(-1));
        let prod = a.matmul(&b).unwrap();
        assert_eq!(prod.get(0, 0), &LaurentPoly::one());
    }

    #[test]
    fn unipotent_product_is_identity() {
        // [[1, L], [0, 1]] * [[1, -L], [0, 1]] = I by direct convolution.
        let mut a = LaurentMatrix::<Rat>::identity(2);
        a.set(0, 1, lam());
        let mut b = LaurentMatrix::<Rat>::identity(2);
        b.set(0, 1, lam().neg());
        assert_eq!(a.matmul(&b).unwrap(), LaurentMatrix::identity(2));
    }

    #[test]
    fn eval_at_zero_clears_poles() {
        // p = 2/L + 3 + 5L; after clearing by L the value at 0 is 2.
        let p = LaurentPoly::term(Rat::from_i64(2), -1)
            .add(&LaurentPoly::constant(Rat::from_i64(3)))
            .add(&LaurentPoly::term(Rat::from_i64(5), 1));
        assert_eq!(p.eval(&Rat::from_i64(0)), Rat::from_i64(2));
        assert_eq!(
            p.eval(&Rat::from_i64(2)),
            Rat::from_i64(1) + Rat::from_i64(3) + Rat::from_i64(10)
        );
    }

    #[test]
    fn normalization_drops_cancelled_terms() {
        let p = lam().sub(&lam());
        assert!(p.is_zero());
        assert!(p.support().is_empty());
    }
}
