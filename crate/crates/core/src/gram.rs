//! Elliptic monomial basis, point measures on (or off) a Weierstrass curve,
//! and the Gram matrices feeding the elliptic determinant lattices.
//!
//! The basis is `e_0 = 1`, `e_{2k} = x^k`, `e_{2k+1} = x^{k-1} y` for
//! `k >= 1`; index 1 does not exist. To avoid off-by-one traps around the
//! missing `e_1`, dense storage is addressed by *position*: position 0 is
//! index 0 and position `p >= 1` is index `p + 1`.
//!
//! Identities downstream only use the Gram entries and the shift symmetry
//! `<x e_i, e_j> = <e_i, x e_j>`, which any point measure satisfies, so
//! generic exact measures need not lie on a curve. Curve membership is still
//! validated when a curve is attached, since on-curve float measures are the
//! paper-faithful configuration for demos.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::measure::SplitMix64;
use crate::scalar::Scalar;
use crate::Result;

/// Basis index at dense position `pos`.
pub fn index_at_position(pos: usize) -> i64 {
    if pos == 0 {
        0
    } else {
        pos as i64 + 1
    }
}

/// Dense position of an admissible basis index.
pub fn position_of_index(index: i64) -> Result<usize> {
    match index {
        0 => Ok(0),
        i if i >= 2 => Ok(i as usize - 1),
        i => Err(Error::InadmissibleIndex(i)),
    }
}

/// Evaluate `e_k` at a point. Index 1 (and negatives) are inadmissible.
pub fn eval_basis<T: Scalar>(k: i64, x: &T, y: &T) -> Result<T> {
    if k == 0 {
        return Ok(T::one());
    }
    if k < 2 {
        return Err(Error::InadmissibleIndex(k));
    }
    let half = k / 2;
    if k % 2 == 0 {
        Ok(x.pow_i(half))
    } else {
        Ok(x.pow_i(half - 1) * y.clone())
    }
}

/// The curve `y^2 = x^3 - a x - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> CurveSpec<T> {
    /// Membership test: exact equality in exact mode, `1e-12` relative in
    /// float mode.
    pub fn contains(&self, x: &T, y: &T) -> bool {
        let lhs = y.clone() * y.clone();
        let rhs = x.pow_i(3) - self.a.clone() * x.clone() - self.b.clone();
        if T::EXACT {
            lhs == rhs
        } else {
            let diff = (lhs.to_f64() - rhs.to_f64()).abs();
            let scale = lhs.to_f64().abs().max(rhs.to_f64().abs()).max(1.0);
            diff <= 1e-12 * scale
        }
    }
}

/// Weighted points in the plane, optionally tied to a curve.
#[derive(Debug, Clone)]
pub struct EllipticMeasure<T> {
    points: Vec<(T, T)>,
    weights: Vec<T>,
    curve: Option<CurveSpec<T>>,
}

impl<T: Scalar> EllipticMeasure<T> {
    /// Build a point measure. Points must be pairwise distinct as pairs;
    /// when `curve` is supplied every point must lie on it.
    pub fn new(points: Vec<(T, T)>, weights: Vec<T>, curve: Option<CurveSpec<T>>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points vs {} weights",
                points.len(),
                weights.len()
            )));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidMeasure("duplicate point".into()));
                }
            }
        }
        if let Some(c) = &curve {
            for (x, y) in &points {
                if !c.contains(x, y) {
                    return Err(Error::InvalidMeasure(format!(
                        "point ({x}, {y}) is not on the curve"
                    )));
                }
            }
        }
        Ok(EllipticMeasure {
            points,
            weights,
            curve,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn curve(&self) -> Option<&CurveSpec<T>> {
        self.curve.as_ref()
    }

    /// `<e_i, e_j> = sum_p w_p e_i(P_p) e_j(P_p)` for admissible `i, j` up to
    /// `max_index`.
    pub fn gram(&self, max_index: i64) -> Result<GramMatrix<T>> {
        let npos = position_of_index(max_index.max(0))? + 1;
        let evals: Vec<Vec<T>> = self
            .points
            .iter()
            .map(|(x, y)| {
                (0..npos)
                    .map(|pos| eval_basis(index_at_position(pos), x, y))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut entries = vec![T::zero(); npos * npos];
        for (p, ev) in evals.iter().enumerate() {
            for i in 0..npos {
                for j in 0..npos {
                    entries[i * npos + j] = entries[i * npos + j].clone()
                        + self.weights[p].clone() * ev[i].clone() * ev[j].clone();
                }
            }
        }
        Ok(GramMatrix {
            npos,
            max_index,
            entries,
        })
    }
}

/// Symmetric array `<e_i, e_j>` over the admissible index set.
#[derive(Debug, Clone)]
pub struct GramMatrix<T> {
    npos: usize,
    max_index: i64,
    entries: Vec<T>,
}

impl<T: Scalar> GramMatrix<T> {
    pub fn max_index(&self) -> i64 {
        self.max_index
    }

    /// Entry by basis indices, with budget enforcement.
    pub fn get(&self, i: i64, j: i64) -> Result<T> {
        if i > self.max_index || j > self.max_index {
            return Err(Error::BudgetExceeded {
                what: "gram entry",
                needed: i.max(j),
                budget: self.max_index,
            });
        }
        let pi = position_of_index(i)?;
        let pj = position_of_index(j)?;
        Ok(self.entries[pi * self.npos + pj].clone())
    }
}

/// Random generic point measure: small rationals, pairwise-distinct points,
/// non-zero weights. Deterministic per seed. Not required to lie on any
/// curve; all verified identities are determinant identities in the Gram
/// entries, which hold for any point measure.
pub fn random_point_measure<T: Scalar>(seed: u64, size: usize) -> Result<EllipticMeasure<T>> {
    if size == 0 {
        return Err(Error::InvalidMeasure("random point measure of size 0".into()));
    }
    let mut rng = SplitMix64::new(seed ^ 0xE11F);
    let mut points: Vec<(T, T)> = Vec::with_capacity(size);
    while points.len() < size {
        let x = T::from_ratio(rng.next_signed(12, true), 1 + rng.next_range(3) as i64);
        let y = T::from_ratio(rng.next_signed(12, true), 1 + rng.next_range(3) as i64);
        let p = (x, y);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let weights = (0..size)
        .map(|_| T::from_ratio(rng.next_signed(6, true), 1 + rng.next_range(3) as i64))
        .collect();
    EllipticMeasure::new(points, weights, None)
}

/// Float measure with every point exactly on `y^2 = x^3 - a x - b`:
/// sample x until the right side is positive, then take `y = +-sqrt`.
pub fn on_curve_float_measure(
    seed: u64,
    size: usize,
    a: f64,
    b: f64,
) -> Result<EllipticMeasure<f64>> {
    if size == 0 {
        return Err(Error::InvalidMeasure("random point measure of size 0".into()));
    }
    let mut rng = SplitMix64::new(seed ^ 0xC0DE);
    let curve = CurveSpec { a, b };
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(size);
    while points.len() < size {
        let x = rng.next_signed(40, true) as f64 / 8.0;
        let rhs = x * x * x - a * x - b;
        if rhs <= 0.0 {
            continue;
        }
        let y = rhs.sqrt() * if rng.next_range(2) == 0 { 1.0 } else { -1.0 };
        let p = (x, y);
        if !points.iter().any(|q| q == &p) {
            points.push(p);
        }
    }
    let weights = (0..size)
        .map(|_| rng.next_signed(6, true) as f64 / (1 + rng.next_range(3)) as f64)
        .collect();
    EllipticMeasure::new(points, weights, Some(curve))
}

/// JSON shape for an elliptic measure: explicit points (rationals as
/// `"p/q"` strings) with an optional curve, or a seeded random request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EllipticSpec {
    Inline {
        points: Vec<(String, String)>,
        weights: Vec<String>,
        #[serde(default)]
        curve: Option<CurveSpecJson>,
    },
    Random { seed: u64, size: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpecJson {
    pub a: String,
    pub b: String,
}

impl EllipticSpec {
    pub fn build<T: Scalar>(&self) -> Result<EllipticMeasure<T>> {
        match self {
            EllipticSpec::Inline {
                points,
                weights,
                curve,
            } => {
                let parse = |s: &String| -> Result<T> {
                    T::parse_ratio(s)
                        .ok_or_else(|| Error::InvalidMeasure(format!("bad literal {s:?}")))
                };
                let pts = points
                    .iter()
                    .map(|(x, y)| Ok((parse(x)?, parse(y)?)))
                    .collect::<Result<Vec<_>>>()?;
                let ws = weights.iter().map(parse).collect::<Result<Vec<_>>>()?;
                let curve = match curve {
                    Some(c) => Some(CurveSpec {
                        a: parse(&c.a)?,
                        b: parse(&c.b)?,
                    }),
                    None => None,
                };
                EllipticMeasure::new(pts, ws, curve)
            }
            EllipticSpec::Random { seed, size } => random_point_measure(*seed, *size),
        }
    }
}
