//! One-variable discrete measures and their moment sequences.
//!
//! Every verified statement downstream depends on the measure only through
//! its moments `c_i = sum_j w_j * node_j^i`, so a finite node/weight list is
//! the whole input language. Random measures come from a seedable split-mix
//! generator (the 64-bit SplitMix finalizer: state advances by the constant
//! `0x9E3779B97F4A7C15`, then two xor-shift/multiply rounds with
//! `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`), so a seed printed in a
//! report reproduces the measure anywhere.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Deterministic split-mix 64-bit generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in `0..n`. Bias is irrelevant at these ranges.
    pub fn next_range(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    /// Signed draw in `-n..=n`, excluding zero when `nonzero` is set.
    pub fn next_signed(&mut self, n: u64, nonzero: bool) -> i64 {
        loop {
            let v = self.next_range(2 * n + 1) as i64 - n as i64;
            if v != 0 || !nonzero {
                return v;
            }
        }
    }
}

/// Finite measure: distinct nodes with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Build a measure, rejecting duplicate nodes or mismatched lengths.
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes vs {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i] == nodes[j] {
                    return Err(Error::InvalidMeasure(format!(
                        "duplicate node {}",
                        nodes[i]
                    )));
                }
            }
        }
        Ok(DiscreteMeasure { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// All nodes and weights positive, nodes strictly descending.
    pub fn is_positive_ordered(&self) -> bool {
        self.nodes.iter().all(|x| x > &T::zero())
            && self.weights.iter().all(|w| w > &T::zero())
            && self.nodes.windows(2).all(|w| w[0] > w[1])
    }

    /// `c_i = sum_j w_j node_j^i` for `0 <= i < count`.
    pub fn moments(&self, count: usize, m: u32) -> MomentSequence<T> {
        let mut values = vec![T::zero(); count];
        let mut powers: Vec<T> = vec![T::one(); self.nodes.len()];
        for value in values.iter_mut() {
            let mut acc = T::zero();
            for (j, p) in powers.iter_mut().enumerate() {
                acc = acc + self.weights[j].clone() * p.clone();
                *p = p.clone() * self.nodes[j].clone();
            }
            *value = acc;
        }
        MomentSequence { values, m }
    }
}

/// Moments `c_0..c_N` together with the hunger parameter `m`.
#[derive(Debug, Clone)]
pub struct MomentSequence<T> {
    values: Vec<T>,
    m: u32,
}

impl<T: Scalar> MomentSequence<T> {
    pub fn from_values(values: Vec<T>, m: u32) -> Self {
        MomentSequence { values, m }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c_idx`, failing fast when the index is out of budget.
    pub fn get(&self, idx: i64) -> Result<T> {
        if idx < 0 || idx as usize >= self.values.len() {
            return Err(Error::BudgetExceeded {
                what: "moment",
                needed: idx,
                budget: self.values.len() as i64 - 1,
            });
        }
        Ok(self.values[idx as usize].clone())
    }
}

/// Moment count needed so that every `tau_n^l` with `n <= n_max`,
/// `l <= l_max` stays in budget: the largest index touched is
/// `l_max + m*(n_max - 1) + n_max - 1`.
pub fn tau_moment_budget(m: u32, n_max: u32, l_max: u32) -> usize {
    if n_max == 0 {
        return l_max as usize + 1;
    }
    (l_max + (m + 1) * (n_max - 1)) as usize + 1
}

/// Random measure with small-height rational nodes and weights.
///
/// Positive mode draws distinct positive nodes, sorts them descending, and
/// makes every weight positive, matching what the convergence statements
/// assume. Deterministic for a fixed seed.
pub fn random_measure<T: Scalar>(seed: u64, size: usize, positive: bool) -> Result<DiscreteMeasure<T>> {
    if size == 0 {
        return Err(Error::InvalidMeasure("random measure of size 0".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut nodes: Vec<T> = Vec::with_capacity(size);
    while nodes.len() < size {
        let candidate = if positive {
            let num = 1 + rng.next_range(60) as i64;
            let den = 1 + rng.next_range(4) as i64;
            T::from_ratio(num, den)
        } else {
            let num = rng.next_signed(30, true);
            let den = 1 + rng.next_range(4) as i64;
            T::from_ratio(num, den)
        };
        if !nodes.contains(&candidate) {
            nodes.push(candidate);
        }
    }
    if positive {
        nodes.sort_by(|a, b| b.partial_cmp(a).expect("ordered scalars"));
    }
    let weights: Vec<T> = (0..size)
        .map(|_| {
            let num = if positive {
                1 + rng.next_range(8) as i64
            } else {
                rng.next_signed(8, true)
            };
            let den = 1 + rng.next_range(4) as i64;
            T::from_ratio(num, den)
        })
        .collect();
    DiscreteMeasure::new(nodes, weights)
}

/// JSON shape for a one-variable measure: either inline nodes/weights with
/// rationals as `"p/q"` strings, or a seeded random request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Inline {
        nodes: Vec<String>,
        weights: Vec<String>,
    },
    Random {
        seed: u64,
        size: usize,
        #[serde(default)]
        positive: bool,
    },
}

impl MeasureSpec {
    pub fn build<T: Scalar>(&self) -> Result<DiscreteMeasure<T>> {
        match self {
            MeasureSpec::Inline { nodes, weights } => {
                let parse = |items: &[String], what: &str| -> Result<Vec<T>> {
                    items
                        .iter()
                        .map(|s| {
                            T::parse_ratio(s).ok_or_else(|| {
                                Error::InvalidMeasure(format!("bad {what} literal {s:?}"))
                            })
                        })
                        .collect()
                };
                DiscreteMeasure::new(parse(nodes, "node")?, parse(weights, "weight")?)
            }
            MeasureSpec::Random {
                seed,
                size,
                positive,
            } => random_measure(*seed, *size, *positive),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_traits::Zero;

    fn measure_12() -> DiscreteMeasure<Rat> {
        DiscreteMeasure::new(
            vec![Rat::from_i64(1), Rat::from_i64(2)],
            vec![Rat::from_i64(1), Rat::from_i64(1)],
        )
        .unwrap()
    }

    #[test]
    fn moments_of_two_node_measure() {
        // c_i = 1 + 2^i: (2, 3, 5, 9).
        let c = measure_12().moments(4, 1);
        let expect = [2, 3, 5, 9];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(c.get(i as i64).unwrap(), Rat::from_i64(*e));
        }
    }

    #[test]
    fn single_node_measure_has_unit_moments() {
        let meas =
            DiscreteMeasure::new(vec![Rat::from_i64(1)], vec![Rat::from_i64(1)]).unwrap();
        let c = meas.moments(6, 1);
        for i in 0..6 {
            assert_eq!(c.get(i).unwrap(), Rat::from_i64(1));
        }
    }

    #[test]
    fn empty_measure_has_zero_moments() {
        let meas = DiscreteMeasure::<Rat>::new(vec![], vec![]).unwrap();
        let c = meas.moments(3, 2);
        for i in 0..3 {
            assert!(c.get(i).unwrap().is_zero());
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let err = DiscreteMeasure::new(
            vec![Rat::from_ratio(2, 1), Rat::from_ratio(4, 2)],
            vec![Rat::from_i64(1), Rat::from_i64(1)],
        );
        assert!(matches!(err, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn moment_budget_enforced() {
        let c = measure_12().moments(4, 1);
        assert!(matches!(c.get(4), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(c.get(-1), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn random_measure_contract() {
        let m: DiscreteMeasure<Rat> = random_measure(7, 3, true).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.is_positive_ordered());
        let again: DiscreteMeasure<Rat> = random_measure(7, 3, true).unwrap();
        assert_eq!(m, again);
        let single: DiscreteMeasure<Rat> = random_measure(11, 1, true).unwrap();
        assert_eq!(single.len(), 1);
        assert!(random_measure::<Rat>(3, 0, true).is_err());
    }

    #[test]
    fn moments_linear_in_weights() {
        let m: DiscreteMeasure<Rat> = random_measure(19, 4, false).unwrap();
        let doubled = DiscreteMeasure::new(
            m.nodes().to_vec(),
            m.weights()
                .iter()
                .map(|w| w.clone() * Rat::from_i64(2))
                .collect(),
        )
        .unwrap();
        let c1 = m.moments(10, 1);
        let c2 = doubled.moments(10, 1);
        for i in 0..10 {
            assert_eq!(
                c2.get(i).unwrap(),
                Rat::from_i64(2) * c1.get(i).unwrap()
            );
        }
    }

    #[test]
    fn measure_spec_round_trip() {
        let spec: MeasureSpec =
            serde_json::from_str(r#"{"nodes":["3/2","2"],"weights":["1","5/3"]}"#).unwrap();
        let m: DiscreteMeasure<Rat> = spec.build().unwrap();
        assert_eq!(m.nodes()[0], Rat::from_ratio(3, 2));
        assert_eq!(m.weights()[1], Rat::from_ratio(5, 3));

        let spec: MeasureSpec =
            serde_json::from_str(r#"{"seed":7,"size":3,"positive":true}"#).unwrap();
        let m: DiscreteMeasure<Rat> = spec.build().unwrap();
        assert!(m.is_positive_ordered());
    }
}
