//! Memoized caches of the four determinant families over one Gram matrix.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::Error;
use crate::gram::{index_at_position, GramMatrix};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::Result;

/// The four determinant families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetFamily {
    Delta,
    Theta,
    Pi,
    Sigma,
}

impl DetFamily {
    pub fn name(self) -> &'static str {
        match self {
            DetFamily::Delta => "delta",
            DetFamily::Theta => "theta",
            DetFamily::Pi => "pi",
            DetFamily::Sigma => "sigma",
        }
    }
}

/// Gram matrix plus per-family `(k, l) -> value` memo tables.
#[derive(Debug)]
pub struct DetFamilies<T> {
    gram: GramMatrix<T>,
    m: u32,
    cache: Mutex<HashMap<(DetFamily, u32, i64), T>>,
}

impl<T: Scalar> DetFamilies<T> {
    pub fn new(gram: GramMatrix<T>, m: u32) -> Self {
        assert!(m >= 1, "hunger parameter m must be positive");
        DetFamilies {
            gram,
            m,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn gram(&self) -> &GramMatrix<T> {
        &self.gram
    }

    /// Row superscripts of a size-`k` member: consecutive `m`-strides for
    /// `Delta`/`Pi`, the second stride doubled for `Theta`/`Sigma`.
    pub fn row_indices(&self, which: DetFamily, k: u32, l: i64) -> Vec<i64> {
        let m = self.m as i64;
        match which {
            DetFamily::Delta | DetFamily::Pi => (0..k as i64).map(|i| l + i * m).collect(),
            DetFamily::Theta | DetFamily::Sigma => std::iter::once(l)
                .chain((2..=k as i64).map(|i| l + i * m))
                .collect(),
        }
    }

    /// Column positions: `e_0..e_k` for `Delta`/`Theta`, `e_2..e_{k+1}` for
    /// `Pi`/`Sigma`.
    pub fn col_positions(which: DetFamily, k: u32) -> Vec<usize> {
        match which {
            DetFamily::Delta | DetFamily::Theta => (0..k as usize).collect(),
            DetFamily::Pi | DetFamily::Sigma => (1..=k as usize).collect(),
        }
    }

    /// Memoized `Delta_k^l`, `Theta_k^l`, `Pi_k^l`, or `Sigma_k^l`.
    pub fn det(&self, which: DetFamily, k: u32, l: i64) -> Result<T> {
        if l < 2 {
            return Err(Error::Precondition(format!(
                "{} needs l >= 2, got l = {l}",
                which.name()
            )));
        }
        if k == 0 {
            return Ok(T::one());
        }
        if let Some(v) = self.cache.lock().unwrap().get(&(which, k, l)) {
            return Ok(v.clone());
        }
        let rows = self.row_indices(which, k, l);
        let cols = Self::col_positions(which, k);
        let det = self.gram_minor(&rows, &cols)?;
        self.cache.lock().unwrap().insert((which, k, l), det.clone());
        Ok(det)
    }

    /// Determinant of the Gram submatrix with the given row superscripts
    /// and column positions.
    pub fn gram_minor(&self, rows: &[i64], col_positions: &[usize]) -> Result<T> {
        let data = rows
            .iter()
            .map(|&r| {
                col_positions
                    .iter()
                    .map(|&c| self.gram.get(r, index_at_position(c)))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(data).det()
    }

    pub fn delta(&self, k: u32, l: i64) -> Result<T> {
        self.det(DetFamily::Delta, k, l)
    }

    pub fn theta(&self, k: u32, l: i64) -> Result<T> {
        self.det(DetFamily::Theta, k, l)
    }

    pub fn pi(&self, k: u32, l: i64) -> Result<T> {
        self.det(DetFamily::Pi, k, l)
    }

    pub fn sigma(&self, k: u32, l: i64) -> Result<T> {
        self.det(DetFamily::Sigma, k, l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{random_point_measure, EllipticMeasure};
    use crate::Rat;

    fn families(seed: u64, m: u32) -> DetFamilies<Rat> {
        let meas: EllipticMeasure<Rat> = random_point_measure(seed, 10).unwrap();
        DetFamilies::new(meas.gram(30).unwrap(), m)
    }

    #[test]
    fn size_zero_is_one_and_l_below_two_rejected() {
        let fam = families(1, 2);
        assert_eq!(fam.delta(0, 5).unwrap(), Rat::from_i64(1));
        assert!(fam.delta(1, 1).is_err());
    }

    #[test]
    fn delta_size_one_is_gram_entry() {
        let fam = families(2, 2);
        assert_eq!(fam.delta(1, 4).unwrap(), fam.gram().get(4, 0).unwrap());
        // With a single row the skipped stride does not bite: Theta_1 = Delta_1.
        assert_eq!(fam.theta(1, 4).unwrap(), fam.delta(1, 4).unwrap());
        assert_eq!(fam.sigma(1, 4).unwrap(), fam.pi(1, 4).unwrap());
    }

    #[test]
    fn delta_two_by_two_hand_value() {
        // m=1, points {(0,1),(2,3)}, weights 1: Delta_2^2 = det [[2,4],[4,6]] = -4.
        let meas = EllipticMeasure::new(
            vec![
                (Rat::from_i64(0), Rat::from_i64(1)),
                (Rat::from_i64(2), Rat::from_i64(3)),
            ],
            vec![Rat::from_i64(1), Rat::from_i64(1)],
            None,
        )
        .unwrap();
        let fam = DetFamilies::new(meas.gram(8).unwrap(), 1);
        assert_eq!(fam.delta(2, 2).unwrap(), Rat::from_i64(-4));
    }

    #[test]
    fn theta_rows_skip_the_first_stride() {
        let fam = families(3, 3);
        assert_eq!(fam.row_indices(DetFamily::Theta, 4, 2), vec![2, 8, 11, 14]);
        assert_eq!(fam.row_indices(DetFamily::Delta, 4, 2), vec![2, 5, 8, 11]);
    }

    #[test]
    fn cache_agrees_with_direct_recomputation() {
        let fam = families(4, 2);
        for which in [
            DetFamily::Delta,
            DetFamily::Theta,
            DetFamily::Pi,
            DetFamily::Sigma,
        ] {
            for k in 1..=4u32 {
                for l in [2i64, 5] {
                    let cached = fam.det(which, k, l).unwrap();
                    let rows = fam.row_indices(which, k, l);
                    let cols = DetFamilies::<Rat>::col_positions(which, k);
                    let direct = fam.gram_minor(&rows, &cols).unwrap();
                    assert_eq!(cached, direct);
                }
            }
        }
    }

    #[test]
    fn budget_exceeded_surfaces() {
        let meas: EllipticMeasure<Rat> = random_point_measure(5, 6).unwrap();
        let fam = DetFamilies::new(meas.gram(8).unwrap(), 3);
        assert!(fam.delta(4, 2).is_err());
    }
}
