//! Surrogate of the two-loop refrigeration benchmark plant: two identified
//! manipulated-variable channels with steady-state-gain scheduling, four
//! disturbance paths, operating-point offsets and actuator saturation.

use crate::error::{Error, Result};
use crate::lti::{c2d, DiscreteFilter, Method, RationalTf};

/// Initial operating point of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OperatingPoint {
    /// Expansion valve opening, %.
    pub av0: f64,
    /// Compressor speed, Hz.
    pub n0: f64,
    /// Evaporator secondary flux outlet temperature, deg C.
    pub te_sec_out0: f64,
    /// Superheat, deg C.
    pub tsh0: f64,
    /// Condenser secondary flux inlet temperature, deg C.
    pub tc_sec_in0: f64,
    /// Evaporator secondary flux inlet temperature, deg C.
    pub te_sec_in0: f64,
}

impl OperatingPoint {
    pub fn validate(&self, limits: &ActuatorLimits) -> Result<()> {
        if self.av0 < limits.av_min || self.av0 > limits.av_max {
            return Err(Error::InvalidModel(format!(
                "valve operating point {} outside [{}, {}]",
                self.av0, limits.av_min, limits.av_max
            )));
        }
        if self.n0 < limits.n_min || self.n0 > limits.n_max {
            return Err(Error::InvalidModel(format!(
                "compressor operating point {} outside [{}, {}]",
                self.n0, limits.n_min, limits.n_max
            )));
        }
        Ok(())
    }
}

/// Actuator saturation bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ActuatorLimits {
    pub av_min: f64,
    pub av_max: f64,
    pub n_min: f64,
    pub n_max: f64,
}

impl ActuatorLimits {
    pub fn saturate_av(&self, av: f64) -> f64 {
        av.clamp(self.av_min, self.av_max)
    }

    pub fn saturate_n(&self, n: f64) -> f64 {
        n.clamp(self.n_min, self.n_max)
    }
}

/// 1-D breakpoint lookup table with linear interpolation, clamped at the ends.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct GainSchedule {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RawSchedule {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSchedule> for GainSchedule {
    type Error = Error;
    fn try_from(raw: RawSchedule) -> Result<Self> {
        GainSchedule::new(raw.breakpoints, raw.values)
    }
}

impl From<GainSchedule> for RawSchedule {
    fn from(s: GainSchedule) -> Self {
        RawSchedule { breakpoints: s.breakpoints, values: s.values }
    }
}

impl GainSchedule {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidModel(
                "gain schedule needs equally many breakpoints and values".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel(
                "gain schedule breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(GainSchedule { breakpoints, values })
    }

    /// Unit schedule (multiplier 1 everywhere); degenerates the surrogate to
    /// pure LTI behaviour.
    pub fn unity() -> Self {
        GainSchedule { breakpoints: vec![0.0], values: vec![1.0] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear interpolation; exact at breakpoints, clamped outside.
    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if x <= bp[0] {
            return self.values[0];
        }
        if x >= *bp.last().unwrap() {
            return *self.values.last().unwrap();
        }
        // x is inside; find the containing segment
        let hi = bp.partition_point(|&b| b < x);
        if bp[hi] == x {
            return self.values[hi];
        }
        let lo = hi - 1;
        let t = (x - bp[lo]) / (bp[hi] - bp[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }
}

/// The complete surrogate model: channel and disturbance-path transfer
/// functions, gain schedules, operating point and saturation limits.
///
/// Disturbance-path index convention: first index = output, second =
/// disturbance (d21 maps disturbance 1 to output 2).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PlantModel {
    /// Valve opening -> evaporator outlet temperature.
    pub g11: RationalTf,
    /// Compressor speed -> superheat.
    pub g22: RationalTf,
    pub d11: RationalTf,
    pub d21: RationalTf,
    pub d12: RationalTf,
    pub d22: RationalTf,
    pub lut1: GainSchedule,
    pub lut2: GainSchedule,
    pub op: OperatingPoint,
    pub limits: ActuatorLimits,
}

impl PlantModel {
    pub fn validate(&self) -> Result<()> {
        self.op.validate(&self.limits)?;
        for (name, tf) in [
            ("g11", &self.g11),
            ("g22", &self.g22),
            ("d11", &self.d11),
            ("d21", &self.d21),
            ("d12", &self.d12),
            ("d22", &self.d22),
        ] {
            if !tf.is_stable() {
                return Err(Error::InvalidModel(format!("plant block {name} is unstable")));
            }
        }
        Ok(())
    }

    /// Zero-deviation runtime state at the operating point.
    pub fn init_state(&self, ts: f64) -> Result<PlantState> {
        Ok(PlantState {
            f_g11: c2d(&self.g11, ts, Method::Zoh)?,
            f_g22: c2d(&self.g22, ts, Method::Zoh)?,
            f_d11: c2d(&self.d11, ts, Method::Zoh)?,
            f_d21: c2d(&self.d21, ts, Method::Zoh)?,
            f_d12: c2d(&self.d12, ts, Method::Zoh)?,
            f_d22: c2d(&self.d22, ts, Method::Zoh)?,
            last_av: self.op.av0,
            last_n: self.op.n0,
        })
    }
}

/// Applied inputs and resulting outputs of one plant update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantOutputs {
    pub te_sec_out: f64,
    pub tsh: f64,
    /// Saturated valve command actually applied, %.
    pub av_applied: f64,
    /// Saturated compressor command actually applied, Hz.
    pub n_applied: f64,
}

/// Discrete states of the six block filters plus the last applied inputs.
#[derive(Debug, Clone)]
pub struct PlantState {
    f_g11: DiscreteFilter,
    f_g22: DiscreteFilter,
    f_d11: DiscreteFilter,
    f_d21: DiscreteFilter,
    f_d12: DiscreteFilter,
    f_d22: DiscreteFilter,
    last_av: f64,
    last_n: f64,
}

impl PlantState {
    pub fn last_applied(&self) -> (f64, f64) {
        (self.last_av, self.last_n)
    }

    /// Advance the surrogate one sample.
    ///
    /// Inputs are absolute values; they are saturated, converted to
    /// deviations from the operating point, filtered through the identified
    /// blocks, gain-scheduled, and offset back to absolute outputs.
    pub fn step(
        &mut self,
        model: &PlantModel,
        av: f64,
        n: f64,
        te_sec_in: f64,
        tc_sec_in: f64,
    ) -> PlantOutputs {
        let av_applied = model.limits.saturate_av(av);
        let n_applied = model.limits.saturate_n(n);
        let d_av = av_applied - model.op.av0;
        let d_n = n_applied - model.op.n0;
        let d_e = te_sec_in - model.op.te_sec_in0;
        let d_c = tc_sec_in - model.op.tc_sec_in0;

        let y1_ctrl = model.lut1.eval(d_av) * self.f_g11.step(d_av);
        let y2_ctrl = model.lut2.eval(d_n) * self.f_g22.step(d_n);
        let y1_dist = self.f_d11.step(d_e) + self.f_d12.step(d_c);
        let y2_dist = self.f_d21.step(d_e) + self.f_d22.step(d_c);

        self.last_av = av_applied;
        self.last_n = n_applied;
        PlantOutputs {
            te_sec_out: model.op.te_sec_out0 + y1_ctrl + y1_dist,
            tsh: model.op.tsh0 + y2_ctrl + y2_dist,
            av_applied,
            n_applied,
        }
    }
}
