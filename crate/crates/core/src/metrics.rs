//! Absolute and relative performance indices and the combined index J.
//!
//! Discrete definitions at the loop rate (rectangular rule):
//! - IAE  = sum ts * |r_k - y_k| over the window
//! - ITAE = sum ts * (t_k - tc) * |r_k - y_k| over [tc, tc + ts_window)
//! - IAVU = sum |u_k - u_{k-1}| over the window (total variation of the
//!   applied, saturated input)
//!
//! Relative indices divide the candidate's value by the baseline's; J is the
//! weighted average of the eight relative indices.

use crate::error::{Error, Result};
use crate::sim::SimTrace;

/// Row order of the eight relative indices.
pub const INDEX_NAMES: [&str; 8] = [
    "RIAE1", "RIAE2", "RITAE1", "RITAE2", "RITAE3", "RITAE4", "RIAVU1", "RIAVU2",
];

/// Nonnegative weights applied to the eight indices, in `INDEX_NAMES` order.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IndexWeights(pub [f64; 8]);

impl IndexWeights {
    pub fn new(w: [f64; 8]) -> Result<Self> {
        if w.iter().any(|&x| x < 0.0) {
            return Err(Error::Metrics("weights must be nonnegative".into()));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Metrics("weights must not all be zero".into()));
        }
        Ok(IndexWeights(w))
    }

    pub fn equal() -> Self {
        IndexWeights([1.0; 8])
    }

    /// Weights reconstructed from the benchmark's published index tables:
    /// unit weight on the error indices, 0.3 on the two control-effort
    /// indices.
    pub fn reconstructed() -> Self {
        IndexWeights([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 0.3])
    }
}

/// One time-weighted-error window: which loop, the task-change time, and the
/// window length.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RitaeWindow {
    pub loop_idx: u8,
    pub tc: f64,
    pub ts_window: f64,
}

/// The four RITAE windows of the combined index.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IndexWindows(pub [RitaeWindow; 4]);

fn loop_error(trace: &SimTrace, loop_idx: u8, k: usize) -> Result<f64> {
    match loop_idx {
        1 => Ok(trace.r1[k] - trace.y1[k]),
        2 => Ok(trace.r2[k] - trace.y2[k]),
        other => Err(Error::Metrics(format!("loop index {other} out of range"))),
    }
}

fn loop_input(trace: &SimTrace, loop_idx: u8, k: usize) -> Result<f64> {
    match loop_idx {
        1 => Ok(trace.av[k]),
        2 => Ok(trace.n[k]),
        other => Err(Error::Metrics(format!("loop index {other} out of range"))),
    }
}

/// Sample indices with t0 <= t < t1 (half-open, so adjacent windows add).
fn window_indices(trace: &SimTrace, t0: f64, t1: f64) -> Result<std::ops::Range<usize>> {
    let start = trace.time.partition_point(|&t| t < t0);
    let end = trace.time.partition_point(|&t| t < t1);
    if start >= end {
        return Err(Error::Metrics(format!("empty index window [{t0}, {t1})")));
    }
    Ok(start..end)
}

/// Integral of absolute error over [t0, t1).
pub fn iae(trace: &SimTrace, loop_idx: u8, t0: f64, t1: f64) -> Result<f64> {
    let mut acc = 0.0;
    for k in window_indices(trace, t0, t1)? {
        acc += trace.ts * loop_error(trace, loop_idx, k)?.abs();
    }
    Ok(acc)
}

/// Time-weighted integral of absolute error over [tc, tc + ts_window); the
/// weight is zero at t = tc.
pub fn itae(trace: &SimTrace, loop_idx: u8, tc: f64, ts_window: f64) -> Result<f64> {
    let mut acc = 0.0;
    for k in window_indices(trace, tc, tc + ts_window)? {
        acc += trace.ts * (trace.time[k] - tc) * loop_error(trace, loop_idx, k)?.abs();
    }
    Ok(acc)
}

/// Total variation of the applied (saturated) input over [t0, t1).
pub fn iavu(trace: &SimTrace, loop_idx: u8, t0: f64, t1: f64) -> Result<f64> {
    let range = window_indices(trace, t0, t1)?;
    let mut acc = 0.0;
    for k in range {
        if k == 0 {
            continue;
        }
        acc += (loop_input(trace, loop_idx, k)? - loop_input(trace, loop_idx, k - 1)?).abs();
    }
    Ok(acc)
}

/// The eight relative indices and the combined index for a controller pair.
#[derive(Debug, Clone)]
pub struct IndexReport {
    /// Relative indices in `INDEX_NAMES` order.
    pub relative: [f64; 8],
    pub j: f64,
    pub candidate_abs: [f64; 8],
    pub baseline_abs: [f64; 8],
    pub weights: IndexWeights,
    pub notes: Vec<String>,
}

/// Weighted average of the eight relative indices.
pub fn combined_index(values: &[f64; 8], weights: &IndexWeights) -> f64 {
    let wsum: f64 = weights.0.iter().sum();
    values.iter().zip(weights.0.iter()).map(|(v, w)| v * w).sum::<f64>() / wsum
}

/// Compute the eight absolute indices of one trace.
pub fn absolute_indices(trace: &SimTrace, windows: &IndexWindows) -> Result<[f64; 8]> {
    let t_end = trace.time.last().copied().unwrap_or(0.0) + trace.ts;
    let mut out = [0.0; 8];
    out[0] = iae(trace, 1, 0.0, t_end)?;
    out[1] = iae(trace, 2, 0.0, t_end)?;
    for (i, w) in windows.0.iter().enumerate() {
        out[2 + i] = itae(trace, w.loop_idx, w.tc, w.ts_window)?;
    }
    out[6] = iavu(trace, 1, 0.0, t_end)?;
    out[7] = iavu(trace, 2, 0.0, t_end)?;
    Ok(out)
}

/// Relative index report of `candidate` against `baseline`.
pub fn relative_report(
    candidate: &SimTrace,
    baseline: &SimTrace,
    windows: &IndexWindows,
    weights: &IndexWeights,
) -> Result<IndexReport> {
    if candidate.time.len() != baseline.time.len() || candidate.ts != baseline.ts {
        return Err(Error::Metrics(
            "candidate and baseline traces do not share a scenario grid".into(),
        ));
    }
    let candidate_abs = absolute_indices(candidate, windows)?;
    let baseline_abs = absolute_indices(baseline, windows)?;
    let mut relative = [0.0; 8];
    for i in 0..8 {
        if baseline_abs[i] == 0.0 {
            return Err(Error::Metrics(format!(
                "baseline index {} is zero; relative index undefined",
                INDEX_NAMES[i]
            )));
        }
        relative[i] = candidate_abs[i] / baseline_abs[i];
    }
    let j = combined_index(&relative, weights);
    Ok(IndexReport {
        relative,
        j,
        candidate_abs,
        baseline_abs,
        weights: *weights,
        notes: Vec::new(),
    })
}

impl IndexReport {
    /// Aligned text table mirroring the benchmark's published layout.
    pub fn render_table(&self, candidate: &str, baseline: &str) -> String {
        let mut s = String::new();
        s.push_str(&format!("{:<28} {:>12}\n", "Index", "Value"));
        let args = [
            String::new(),
            String::new(),
            ",tc1,ts1".into(),
            ",tc2,ts2".into(),
            ",tc3,ts3".into(),
            ",tc4,ts4".into(),
        ];
        for i in 0..8 {
            let arg = if (2..6).contains(&i) { args[i].as_str() } else { "" };
            let label = format!("{}({},{}{})", INDEX_NAMES[i], candidate, baseline, arg);
            s.push_str(&format!("{:<28} {:>12.4}\n", label, self.relative[i]));
        }
        s.push_str(&format!("{:<28} {:>12.4}\n", format!("J({candidate},{baseline})"), self.j));
        for note in &self.notes {
            s.push_str(&format!("note: {note}\n"));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,relative,candidate_abs,baseline_abs,weight\n");
        for (i, name) in INDEX_NAMES.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                name,
                self.relative[i],
                self.candidate_abs[i],
                self.baseline_abs[i],
                self.weights.0[i]
            ));
        }
        s.push_str(&format!("J,{},,,\n", self.j));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trace_from_errors(e1: &[f64], u1: &[f64]) -> SimTrace {
        let n = e1.len();
        SimTrace {
            ts: 1.0,
            time: (0..n).map(|k| k as f64).collect(),
            r1: vec![0.0; n],
            y1: e1.iter().map(|e| -e).collect(),
            r2: vec![0.0; n],
            y2: e1.iter().map(|e| -e).collect(),
            av: u1.to_vec(),
            n: u1.to_vec(),
            d1: vec![0.0; n],
            d2: vec![0.0; n],
            ff_av: vec![0.0; n],
            ff_n: vec![0.0; n],
            ci1: vec![0.0; n],
            ci2: vec![0.0; n],
            av_unsat: u1.to_vec(),
            n_unsat: u1.to_vec(),
        }
    }

    #[test]
    fn iae_rectangle() {
        let t = trace_from_errors(&[1.0; 10], &[0.0; 10]);
        assert_relative_eq!(iae(&t, 1, 0.0, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn iae_zero_error() {
        let t = trace_from_errors(&[0.0; 10], &[0.0; 10]);
        assert_eq!(iae(&t, 1, 0.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn iae_window_additivity() {
        let e: Vec<f64> = (0..20).map(|k| (k as f64 * 0.7).sin()).collect();
        let t = trace_from_errors(&e, &[0.0; 20]);
        let whole = iae(&t, 1, 0.0, 20.0).unwrap();
        let parts = iae(&t, 1, 0.0, 7.0).unwrap() + iae(&t, 1, 7.0, 20.0).unwrap();
        assert_relative_eq!(whole, parts, epsilon = 1e-12);
    }

    #[test]
    fn itae_arithmetic_series() {
        let t = trace_from_errors(&[1.0; 3], &[0.0; 3]);
        assert_relative_eq!(itae(&t, 1, 0.0, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn itae_shifted_tc_weights_less() {
        let t = trace_from_errors(&[1.0; 10], &[0.0; 10]);
        let a = itae(&t, 1, 0.0, 5.0).unwrap();
        let b = itae(&t, 1, 1.0, 5.0).unwrap();
        assert!(b <= a);
    }

    #[test]
    fn iavu_total_variation() {
        let t = trace_from_errors(&[0.0; 4], &[0.0, 1.0, 0.0, 1.0]);
        assert_relative_eq!(iavu(&t, 1, 0.0, 4.0).unwrap(), 3.0);
        let c = trace_from_errors(&[0.0; 4], &[2.0; 4]);
        assert_eq!(iavu(&c, 1, 0.0, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let t = trace_from_errors(&[1.0; 4], &[0.0; 4]);
        assert!(iae(&t, 1, 10.0, 12.0).is_err());
    }

    #[test]
    fn self_comparison_is_all_ones() {
        let e: Vec<f64> = (0..100).map(|k| (k as f64 * 0.3).cos() + 0.1).collect();
        let u: Vec<f64> = (0..100).map(|k| (k as f64 * 0.2).sin()).collect();
        let t = trace_from_errors(&e, &u);
        let windows = IndexWindows([
            RitaeWindow { loop_idx: 1, tc: 10.0, ts_window: 20.0 },
            RitaeWindow { loop_idx: 2, tc: 10.0, ts_window: 20.0 },
            RitaeWindow { loop_idx: 1, tc: 50.0, ts_window: 20.0 },
            RitaeWindow { loop_idx: 2, tc: 50.0, ts_window: 20.0 },
        ]);
        let rep = relative_report(&t, &t, &windows, &IndexWeights::equal()).unwrap();
        for v in rep.relative {
            assert_eq!(v, 1.0);
        }
        assert!((rep.j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn j_invariant_to_weight_scaling() {
        let vals = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2];
        let w1 = IndexWeights([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 0.3]);
        let w2 = IndexWeights([10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 3.0, 3.0]);
        assert_relative_eq!(
            combined_index(&vals, &w1),
            combined_index(&vals, &w2),
            epsilon = 1e-14
        );
    }
}
