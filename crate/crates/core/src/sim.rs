//! Fixed-step closed-loop scenario engine.
//!
//! Each sample: read the scheduled reference and disturbances, let the
//! controller act on the previous measurement (one-sample loop delay), add
//! the operating-point bias, then update the plant with the saturated
//! commands.

use crate::control::{CiConfig, CiLoop, Controller, ControllerKind, FeedforwardBank, PidConfig};
use crate::error::{Error, Result};
use crate::metrics::{relative_report, IndexWeights, IndexWindows};
use crate::plant::PlantModel;

/// Piecewise-constant schedule defined by (time, value) steps.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct StepSchedule {
    entries: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for StepSchedule {
    type Error = Error;
    fn try_from(entries: Vec<(f64, f64)>) -> Result<Self> {
        StepSchedule::new(entries)
    }
}

impl From<StepSchedule> for Vec<(f64, f64)> {
    fn from(s: StepSchedule) -> Self {
        s.entries
    }
}

impl StepSchedule {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() || entries[0].0 != 0.0 {
            return Err(Error::Config("schedule must start with a value at t = 0".into()));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Config("schedule step times must be strictly increasing".into()));
        }
        Ok(StepSchedule { entries })
    }

    pub fn constant(value: f64) -> Self {
        StepSchedule { entries: vec![(0.0, value)] }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Value held at time t (last step at or before t).
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.entries.partition_point(|&(time, _)| time <= t);
        self.entries[idx.saturating_sub(1)].1
    }
}

/// Timed reference and disturbance schedule plus the index windows used to
/// score the run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scenario {
    pub ts: f64,
    pub horizon: f64,
    pub ref1: StepSchedule,
    pub ref2: StepSchedule,
    pub dist1: StepSchedule,
    pub dist2: StepSchedule,
    pub windows: IndexWindows,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::Config("scenario: ts and horizon must be positive".into()));
        }
        for (name, sched) in [
            ("ref1", &self.ref1),
            ("ref2", &self.ref2),
            ("dist1", &self.dist1),
            ("dist2", &self.dist2),
        ] {
            if let Some(&(t, _)) = sched.entries().iter().find(|&&(t, _)| t >= self.horizon) {
                return Err(Error::Config(format!(
                    "scenario: {name} step at t={t} is not before the horizon"
                )));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.horizon / self.ts).floor() as usize + 1
    }
}

/// All recorded signals of one run, sharing a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub ts: f64,
    pub time: Vec<f64>,
    pub r1: Vec<f64>,
    pub y1: Vec<f64>,
    pub r2: Vec<f64>,
    pub y2: Vec<f64>,
    /// Applied (saturated) valve opening, %.
    pub av: Vec<f64>,
    /// Applied (saturated) compressor speed, Hz.
    pub n: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub ff_av: Vec<f64>,
    pub ff_n: Vec<f64>,
    pub ci1: Vec<f64>,
    pub ci2: Vec<f64>,
    /// Pre-saturation controller outputs.
    pub av_unsat: Vec<f64>,
    pub n_unsat: Vec<f64>,
}

impl SimTrace {
    fn with_capacity(ts: f64, n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        SimTrace {
            ts,
            time: v(),
            r1: v(),
            y1: v(),
            r2: v(),
            y2: v(),
            av: v(),
            n: v(),
            d1: v(),
            d2: v(),
            ff_av: v(),
            ff_n: v(),
            ci1: v(),
            ci2: v(),
            av_unsat: v(),
            n_unsat: v(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// CSV export with a fixed column order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,r1,y1,r2,y2,av,n,d1,d2,ff_av,ff_n,ci1,ci2\n");
        for k in 0..self.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                self.time[k],
                self.r1[k],
                self.y1[k],
                self.r2[k],
                self.y2[k],
                self.av[k],
                self.n[k],
                self.d1[k],
                self.d2[k],
                self.ff_av[k],
                self.ff_n[k],
                self.ci1[k],
                self.ci2[k]
            ));
        }
        s
    }

    /// Number of samples in [t0, t1) where either applied input sits on a
    /// saturation bound.
    pub fn saturated_samples(&self, model: &PlantModel, t0: f64, t1: f64) -> usize {
        (0..self.len())
            .filter(|&k| self.time[k] >= t0 && self.time[k] < t1)
            .filter(|&k| {
                self.av[k] <= model.limits.av_min
                    || self.av[k] >= model.limits.av_max
                    || self.n[k] <= model.limits.n_min
                    || self.n[k] >= model.limits.n_max
            })
            .count()
    }
}

/// Run one closed-loop scenario. Deterministic: identical inputs give
/// identical traces.
pub fn run_scenario(
    scenario: &Scenario,
    model: &PlantModel,
    controller: &mut Controller,
) -> Result<SimTrace> {
    scenario.validate()?;
    model.validate()?;
    let mut plant = model.init_state(scenario.ts)?;
    let samples = scenario.samples();
    let mut trace = SimTrace::with_capacity(scenario.ts, samples);

    let mut y1 = model.op.te_sec_out0;
    let mut y2 = model.op.tsh0;

    for k in 0..samples {
        let t = k as f64 * scenario.ts;
        let r1 = scenario.ref1.value_at(t);
        let r2 = scenario.ref2.value_at(t);
        let d1 = scenario.dist1.value_at(t);
        let d2 = scenario.dist2.value_at(t);

        let out = controller.step(
            r1,
            y1,
            r2,
            y2,
            d1 - model.op.te_sec_in0,
            d2 - model.op.tc_sec_in0,
        );
        let av_cmd = model.op.av0 + out.av;
        let n_cmd = model.op.n0 + out.n;
        for (name, v) in [("av", av_cmd), ("n", n_cmd)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { step: k, signal: name.into() });
            }
        }

        let pout = plant.step(model, av_cmd, n_cmd, d1, d2);
        for (name, v) in [("y1", pout.te_sec_out), ("y2", pout.tsh)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { step: k, signal: name.into() });
            }
        }

        trace.time.push(t);
        trace.r1.push(r1);
        trace.y1.push(y1);
        trace.r2.push(r2);
        trace.y2.push(y2);
        trace.av.push(pout.av_applied);
        trace.n.push(pout.n_applied);
        trace.d1.push(d1);
        trace.d2.push(d2);
        trace.ff_av.push(out.ff_av);
        trace.ff_n.push(out.ff_n);
        trace.ci1.push(out.ci1);
        trace.ci2.push(out.ci2);
        trace.av_unsat.push(av_cmd);
        trace.n_unsat.push(n_cmd);

        y1 = pout.te_sec_out;
        y2 = pout.tsh;
    }
    Ok(trace)
}

/// One evaluated grid cell: per-loop (delta, w) pairs and the resulting J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub delta: (f64, f64),
    pub w: (f64, f64),
    pub j: f64,
}

/// Result of the conditional-integrator grid search.
#[derive(Debug, Clone)]
pub struct CiGridSearch {
    pub best_delta: (f64, f64),
    pub best_w: (f64, f64),
    pub best_j: f64,
    pub surface: Vec<GridCell>,
}

/// Exhaustively evaluate J(C3(delta, w), C2) over per-loop (delta, w) grids.
///
/// Each grid entry carries one value per loop. Ties are broken by smaller w,
/// then smaller delta (lexicographically per loop pair).
#[allow(clippy::too_many_arguments)]
pub fn grid_search_ci(
    scenario: &Scenario,
    model: &PlantModel,
    pid1: PidConfig,
    pid2: PidConfig,
    bank: &FeedforwardBank,
    ci_directions: (f64, f64),
    delta_grid: &[(f64, f64)],
    w_grid: &[(f64, f64)],
    weights: &IndexWeights,
) -> Result<CiGridSearch> {
    if delta_grid.is_empty() || w_grid.is_empty() {
        return Err(Error::Config("grid search requires nonempty grids".into()));
    }
    let mut baseline_ctrl =
        Controller::compose(ControllerKind::C2, pid1, pid2, Some(bank.clone()), None)?;
    let baseline = run_scenario(scenario, model, &mut baseline_ctrl)?;

    let mut surface = Vec::with_capacity(delta_grid.len() * w_grid.len());
    let mut best: Option<GridCell> = None;
    for &delta in delta_grid {
        for &w in w_grid {
            let ci1 = CiLoop {
                cfg: CiConfig { delta: delta.0, w: w.0, ts: scenario.ts, zero_eps: 1e-9 },
                direction: ci_directions.0,
            };
            let ci2 = CiLoop {
                cfg: CiConfig { delta: delta.1, w: w.1, ts: scenario.ts, zero_eps: 1e-9 },
                direction: ci_directions.1,
            };
            let mut ctrl = Controller::compose(
                ControllerKind::C3,
                pid1,
                pid2,
                Some(bank.clone()),
                Some((ci1, ci2)),
            )?;
            let trace = run_scenario(scenario, model, &mut ctrl)?;
            let j = relative_report(&trace, &baseline, &scenario.windows, weights)?.j;
            let cell = GridCell { delta, w, j };
            surface.push(cell);
            let better = match &best {
                None => true,
                Some(b) => {
                    (j, w.0, w.1, delta.0, delta.1)
                        < (b.j, b.w.0, b.w.1, b.delta.0, b.delta.1)
                }
            };
            if better {
                best = Some(cell);
            }
        }
    }
    let best = best.unwrap();
    Ok(CiGridSearch {
        best_delta: best.delta,
        best_w: best.w,
        best_j: best.j,
        surface,
    })
}
