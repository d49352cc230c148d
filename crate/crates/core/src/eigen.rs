//! Desk-scale eigenvalue demonstration: the dhQD lattice variables of a
//! positive measure converge, as `l` grows, to the measure's nodes (for
//! `vt`) or their `m`-th powers (for `v`).
//!
//! Those targets are a derived claim, not a given: the module treats them
//! as hypotheses and reports the observed error and empirical rate against
//! them. Exact mode reads the variables straight off the determinant-ratio
//! oracle; float mode runs the dhQD recurrence itself (a closed window,
//! since an `r`-node measure has `wt_{r-1} = 0` exactly), seeded from
//! log-domain determinant ratios so large `l` cannot overflow.

use serde::Serialize;

use crate::error::Error;
use crate::measure::{DiscreteMeasure, MomentSequence};
use crate::qd::{evolve_dhqd, qd_var, QdVarKind, SchemeWindow, TauLattice};
use crate::scalar::Scalar;
use crate::{Rat, Result};

/// Which lattice variable a trace follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenVariable {
    /// `vt_n^l`, converging to the node `lambda_{n+1}`.
    #[serde(rename = "vt")]
    VTilde,
    /// `v_n^l`, converging to `lambda_{n+1}^m`.
    #[serde(rename = "v")]
    V,
}

/// One node's convergence trace: estimates indexed by `l = 0..=l_max`.
#[derive(Debug, Clone)]
pub struct EigenTrace<T> {
    pub m: u32,
    pub node_index: usize,
    pub variable: EigenVariable,
    pub target: T,
    pub estimates: Vec<T>,
}

impl<T: Scalar> EigenTrace<T> {
    pub fn abs_error_at(&self, l: usize) -> T {
        (self.estimates[l].clone() - self.target.clone()).abs()
    }

    pub fn final_error(&self) -> T {
        self.abs_error_at(self.estimates.len() - 1)
    }
}

/// Exact-mode traces from the determinant-ratio oracle.
///
/// `v_n^l` is read directly off tau ratios; `vt_n^l` likewise. Capped by
/// default at `l_max <= 48` (rational heights grow quickly past that).
pub fn qd_eigen_exact(
    measure: &DiscreteMeasure<Rat>,
    m: u32,
    l_max: u32,
    variable: EigenVariable,
) -> Result<Vec<EigenTrace<Rat>>> {
    if !measure.is_positive_ordered() {
        return Err(Error::InvalidMeasure(
            "eigen traces need a positive measure with distinct descending nodes".into(),
        ));
    }
    if l_max > 48 {
        return Err(Error::Precondition(
            "exact mode is capped at l_max <= 48; use float mode".into(),
        ));
    }
    let r = measure.len();
    let count = moment_budget(m, r as u32, l_max);
    let lat = TauLattice::new(measure.moments(count, m));
    let kind = match variable {
        EigenVariable::VTilde => QdVarKind::VTilde,
        EigenVariable::V => QdVarKind::V,
    };
    (0..r)
        .map(|n| {
            let estimates = (0..=l_max as i64)
                .map(|l| qd_var(&lat, kind, n as u32, l))
                .collect::<Result<Vec<_>>>()?;
            Ok(EigenTrace {
                m,
                node_index: n,
                variable,
                target: target_value(measure, m, n, variable),
                estimates,
            })
        })
        .collect()
}

/// Float-mode traces: run the dhQD recurrence on a closed window seeded
/// with log-domain determinant ratios. For the `v` variable the evolved
/// `vt` values are combined through the telescoping product
/// `v_n^l = prod_{j=0..m-1} vt_n^{l+j}`.
pub fn qd_eigen_float(
    measure: &DiscreteMeasure<f64>,
    m: u32,
    l_max: u32,
    variable: EigenVariable,
) -> Result<Vec<EigenTrace<f64>>> {
    if !measure.is_positive_ordered() {
        return Err(Error::InvalidMeasure(
            "eigen traces need a positive measure with distinct descending nodes".into(),
        ));
    }
    let r = measure.len();
    let n_max = r as u32 - 1;
    // Initial data never reaches past l = m, so the moment budget is small.
    let count = moment_budget(m, r as u32 + 1, m + 2);
    let moments = measure.moments(count, m);
    let mut window = SchemeWindow {
        m,
        n_max,
        vt: Default::default(),
        wt: Default::default(),
        origin: crate::qd::Origin::Oracle,
        closed_top: true,
    };
    for n in 0..=n_max {
        for l in 0..m as i64 {
            window
                .vt
                .insert((n as i64, l), log_domain_var(&moments, QdVarKind::VTilde, n, l)?);
        }
        let w0 = if n == n_max {
            0.0
        } else {
            log_domain_var(&moments, QdVarKind::WTilde, n, 0)?
        };
        window.wt.insert((n as i64, 0), w0);
    }
    let steps = l_max + m;
    let evolved = evolve_dhqd(&window, steps)?;
    (0..r)
        .map(|n| {
            let estimates = (0..=l_max as i64)
                .map(|l| -> Result<f64> {
                    match variable {
                        EigenVariable::VTilde => {
                            evolved.vt_at(n as i64, l).copied().ok_or(Error::Breakdown {
                                what: "missing evolved cell",
                                n: n as i64,
                                l,
                            })
                        }
                        EigenVariable::V => {
                            let mut acc = 1.0;
                            for j in 0..m as i64 {
                                acc *= evolved.vt_at(n as i64, l + j).copied().ok_or(
                                    Error::Breakdown {
                                        what: "missing evolved cell",
                                        n: n as i64,
                                        l: l + j,
                                    },
                                )?;
                            }
                            Ok(acc)
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EigenTrace {
                m,
                node_index: n,
                variable,
                target: target_value(measure, m, n, variable),
                estimates,
            })
        })
        .collect()
}

fn target_value<T: Scalar>(
    measure: &DiscreteMeasure<T>,
    m: u32,
    n: usize,
    variable: EigenVariable,
) -> T {
    let node = measure.nodes()[n].clone();
    match variable {
        EigenVariable::VTilde => node,
        EigenVariable::V => node.pow_i(m as i64),
    }
}

/// Node-gap ratio governing the geometric error decay of trace `n`.
pub fn expected_rate<T: Scalar>(measure: &DiscreteMeasure<T>, n: usize) -> f64 {
    let nodes = measure.nodes();
    if n + 1 < nodes.len() {
        nodes[n + 1].to_f64() / nodes[n].to_f64()
    } else {
        nodes[n].to_f64() / nodes[n - 1].to_f64()
    }
}

fn moment_budget(m: u32, n_max: u32, l_max: u32) -> usize {
    // Covers every tau_{n}^{l} with n <= n_max + 2, l <= l_max + m + 1.
    crate::measure::tau_moment_budget(m, n_max + 2, l_max + m + 1)
}

/// Sign and log-magnitude of the striped determinant `tau_n^l` over f64
/// moments, via row-scaled elimination.
fn tau_log_det(moments: &MomentSequence<f64>, n: u32, l: i64) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    let m = moments.m() as i64;
    let size = n as usize;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(size);
    let mut log_scale = 0.0;
    for i in 0..size as i64 {
        let mut row: Vec<f64> = (0..size as i64)
            .map(|j| moments.get(l + m * i + j))
            .collect::<Result<Vec<_>>>()?;
        let max = row.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if max == 0.0 {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        for v in &mut row {
            *v /= max;
        }
        log_scale += max.ln();
        rows.push(row);
    }
    let mut sign = 1.0f64;
    let mut log_abs = log_scale;
    for k in 0..size {
        let pivot = (k..size)
            .max_by(|&a, &b| rows[a][k].abs().partial_cmp(&rows[b][k].abs()).unwrap())
            .unwrap();
        if rows[pivot][k] == 0.0 {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        if pivot != k {
            rows.swap(pivot, k);
            sign = -sign;
        }
        let p = rows[k][k];
        log_abs += p.abs().ln();
        if p < 0.0 {
            sign = -sign;
        }
        for i in k + 1..size {
            let f = rows[i][k] / p;
            for j in k..size {
                rows[i][j] -= f * rows[k][j];
            }
        }
    }
    Ok((sign, log_abs))
}

/// A lattice variable as a product/quotient of four log-domain taus.
fn log_domain_var(
    moments: &MomentSequence<f64>,
    kind: QdVarKind,
    n: u32,
    l: i64,
) -> Result<f64> {
    let m = moments.m() as i64;
    let quad = match kind {
        QdVarKind::VTilde => [(n + 1, l + 1), (n, l), (n, l + 1), (n + 1, l)],
        QdVarKind::V => [(n + 1, l + m), (n, l), (n, l + m), (n + 1, l)],
        QdVarKind::W => [(n + 2, l), (n, l + 1), (n + 1, l + 1), (n + 1, l)],
        QdVarKind::WTilde => [(n + 2, l), (n, l + m), (n + 1, l + m), (n + 1, l)],
    };
    let mut sign = 1.0;
    let mut log = 0.0;
    for (idx, &(nn, ll)) in quad.iter().enumerate() {
        let (s, la) = tau_log_det(moments, nn, ll)?;
        if idx < 2 {
            if s == 0.0 {
                return Ok(0.0);
            }
            sign *= s;
            log += la;
        } else {
            if s == 0.0 {
                return Err(Error::Breakdown {
                    what: "float tau ratio denominator",
                    n: nn as i64,
                    l: ll,
                });
            }
            sign *= s;
            log -= la;
        }
    }
    Ok(sign * log.exp())
}

/// Per-trace convergence verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub node_index: usize,
    pub target: f64,
    pub final_error: f64,
    pub relative_error: f64,
    /// Geometric rate from a least-squares fit of `ln(err)` over the last
    /// ten decaying steps above the roundoff floor; 0 for exactly-converged
    /// (all-zero-error) traces.
    pub rate: f64,
    pub pass: bool,
}

/// Summary over a trace set.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub variable: EigenVariable,
    pub m: u32,
    pub tolerance: f64,
    pub traces: Vec<TraceReport>,
    pub pass: bool,
}

/// Judge each trace against `|final - target| < tol * |target|` and
/// estimate the empirical geometric rate.
pub fn convergence_report<T: Scalar>(
    traces: &[EigenTrace<T>],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    let Some(first) = traces.first() else {
        return Err(Error::Precondition("no traces to report on".into()));
    };
    let mut out = Vec::with_capacity(traces.len());
    let mut all_pass = true;
    for tr in traces {
        if tr.estimates.len() < 3 {
            return Err(Error::Precondition(
                "rate estimation needs a trace of length >= 3".into(),
            ));
        }
        let errs: Vec<f64> = (0..tr.estimates.len())
            .map(|l| tr.abs_error_at(l).to_f64())
            .collect();
        let target = tr.target.to_f64();
        let final_error = *errs.last().unwrap();
        let relative_error = if target != 0.0 {
            final_error / target.abs()
        } else {
            final_error
        };
        let rate = fit_rate(&errs, target.abs());
        let pass = final_error < tolerance * target.abs();
        all_pass &= pass;
        out.push(TraceReport {
            node_index: tr.node_index,
            target,
            final_error,
            relative_error,
            rate,
            pass,
        });
    }
    Ok(ConvergenceReport {
        variable: first.variable,
        m: first.m,
        tolerance,
        traces: out,
        pass: all_pass,
    })
}

/// Least-squares slope of `ln(err_l)`, exponentiated, fitted over the last
/// ten steps of the decaying segment. In float mode the error bottoms out
/// at the roundoff plateau long before large `l`, so steps at or below
/// that floor are excluded; fitting them would measure noise, not decay.
fn fit_rate(errs: &[f64], scale: f64) -> f64 {
    let floor = 1e-13 * scale.max(1.0);
    let Some(end) = errs.iter().rposition(|e| *e > floor) else {
        return 0.0;
    };
    let tail: Vec<f64> = errs[..=end]
        .iter()
        .rev()
        .take(10)
        .rev()
        .copied()
        .collect();
    if tail.iter().all(|e| *e == 0.0) {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0)
        .map(|(i, e)| (i as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return 0.0;
    }
    ((n * sxy - sx * sy) / denom).exp()
}

/// CSV rows `n,l,estimate,target,abs_error`, exact values rendered as
/// ratio strings is exact mode, decimals in float mode.
pub fn traces_to_csv<T: Scalar>(traces: &[EigenTrace<T>]) -> String {
    let mut out = String::from("n,l,estimate,target,abs_error\n");
    for tr in traces {
        for (l, est) in tr.estimates.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                tr.node_index,
                l,
                est.render_ratio(),
                tr.target.render_ratio(),
                tr.abs_error_at(l).render_ratio()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure_421_f64() -> DiscreteMeasure<f64> {
        DiscreteMeasure::new(vec![4.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap()
    }

    fn measure_421_rat() -> DiscreteMeasure<Rat> {
        DiscreteMeasure::new(
            vec![Rat::from_i64(4), Rat::from_i64(2), Rat::from_i64(1)],
            vec![Rat::from_i64(1), Rat::from_i64(1), Rat::from_i64(1)],
        )
        .unwrap()
    }

    #[test]
    fn float_traces_converge_to_nodes() {
        let traces = qd_eigen_float(&measure_421_f64(), 1, 60, EigenVariable::VTilde).unwrap();
        let rep = convergence_report(&traces, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
        for (tr, target) in rep.traces.iter().zip([4.0, 2.0, 1.0]) {
            assert_eq!(tr.target, target);
            // Node-gap ratio is 1/2 for every trace of this measure.
            assert!((tr.rate - 0.5).abs() < 0.1, "rate {}", tr.rate);
        }
    }

    #[test]
    fn float_v_traces_converge_to_node_powers() {
        let traces = qd_eigen_float(&measure_421_f64(), 2, 60, EigenVariable::V).unwrap();
        let rep = convergence_report(&traces, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.traces[0].target, 16.0);
        assert_eq!(rep.traces[1].target, 4.0);
        assert_eq!(rep.traces[2].target, 1.0);
    }

    #[test]
    fn exact_spot_check_at_l40() {
        // |vt_0^40 - 4| < 1e-6 * 4 by exact cross-multiplied comparison.
        let traces = qd_eigen_exact(&measure_421_rat(), 1, 40, EigenVariable::VTilde).unwrap();
        let err = traces[0].abs_error_at(40);
        assert!(err < Rat::from_ratio(4, 1_000_000));
    }

    #[test]
    fn single_node_trace_is_exact_with_zero_rate() {
        let meas = DiscreteMeasure::new(vec![Rat::from_i64(5)], vec![Rat::from_i64(2)]).unwrap();
        let traces = qd_eigen_exact(&meas, 1, 10, EigenVariable::VTilde).unwrap();
        for l in 0..=10usize {
            assert_eq!(traces[0].estimates[l], Rat::from_i64(5));
        }
        let rep = convergence_report(&traces, 1e-6).unwrap();
        assert_eq!(rep.traces[0].rate, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn diverging_trace_fails() {
        let fake = EigenTrace {
            m: 1,
            node_index: 0,
            variable: EigenVariable::VTilde,
            target: 1.0,
            estimates: (0..20).map(|l| 1.0 + (l as f64) * 0.5).collect(),
        };
        let rep = convergence_report(&[fake], 1e-6).unwrap();
        assert!(!rep.pass);
        assert!(rep.traces[0].rate > 1.0);
    }

    #[test]
    fn short_trace_is_rejected() {
        let fake = EigenTrace {
            m: 1,
            node_index: 0,
            variable: EigenVariable::VTilde,
            target: 1.0,
            estimates: vec![1.0, 1.0],
        };
        assert!(convergence_report(&[fake], 1e-6).is_err());
    }

    #[test]
    fn exact_mode_is_capped() {
        assert!(qd_eigen_exact(&measure_421_rat(), 1, 60, EigenVariable::VTilde).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let traces = qd_eigen_float(&measure_421_f64(), 1, 5, EigenVariable::VTilde).unwrap();
        let csv = traces_to_csv(&traces);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,l,estimate,target,abs_error");
        assert_eq!(lines.len(), 1 + 3 * 6);
    }
}
