//! Controller stack: discrete PID with anti-windup, feedforward compensator
//! bank, conditional (reset) integrator, and the C1/C2/C3 compositions.

use crate::error::{Error, Result};
use crate::lti::DiscreteFilter;

/// Standard-form PID parameters: u = kp (e + (1/ti) int e + td-term).
/// `ti = f64::INFINITY` disables the integral term; `td = 0` disables the
/// derivative. kp multiplies all three terms, so a reverse-acting loop only
/// needs a negative kp.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PidConfig {
    pub kp: f64,
    /// Integral time, seconds. The integral gain is kp/ti.
    pub ti: f64,
    /// Derivative time, seconds.
    pub td: f64,
    /// Derivative filter ratio N; the filter pole sits at td/N.
    pub n_filter: f64,
    pub ts: f64,
    pub out_min: f64,
    pub out_max: f64,
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0) {
            return Err(Error::Config("pid: ts must be positive".into()));
        }
        if self.out_min >= self.out_max {
            return Err(Error::Config("pid: out_min must be below out_max".into()));
        }
        if self.td > 0.0 && !(self.n_filter > 0.0) {
            return Err(Error::Config("pid: n_filter must be positive when td > 0".into()));
        }
        Ok(())
    }
}

/// Mutable PID state: integral accumulator, filtered derivative, previous
/// measurement.
#[derive(Debug, Clone, Default)]
pub struct PidState {
    integral: f64,
    deriv: f64,
    prev_meas: Option<f64>,
}

impl PidState {
    pub fn integral(&self) -> f64 {
        self.integral
    }
}

/// One sample of the standard-form PID with filtered derivative on the
/// measurement. The output is clamped to [out_min, out_max]; the integrator
/// is frozen whenever committing the update would push the output further
/// into saturation.
pub fn pid_step(cfg: &PidConfig, state: &mut PidState, r: f64, y: f64) -> f64 {
    let e = r - y;

    let deriv = if cfg.td > 0.0 {
        let dy = match state.prev_meas {
            Some(prev) => y - prev,
            None => 0.0,
        };
        let denom = cfg.td + cfg.n_filter * cfg.ts;
        cfg.td / denom * state.deriv - cfg.td * cfg.n_filter / denom * dy
    } else {
        0.0
    };
    state.deriv = deriv;
    state.prev_meas = Some(y);

    let di = if cfg.ti.is_finite() { cfg.ts / cfg.ti * e } else { 0.0 };
    let candidate = state.integral + di;
    let u_raw = cfg.kp * (e + candidate + deriv);
    // conditional integration: the accumulator may walk the output onto a
    // limit but never past it, so the command reaches the rail exactly
    let pushing_up = u_raw > cfg.out_max && cfg.kp * di > 0.0;
    let pushing_down = u_raw < cfg.out_min && cfg.kp * di < 0.0;
    state.integral = if pushing_up || pushing_down {
        let rail = if pushing_up { cfg.out_max } else { cfg.out_min };
        // accumulator value that puts the output exactly on the rail
        let bound = rail / cfg.kp - e - deriv;
        let (lo, hi) = if bound < state.integral { (bound, state.integral) } else { (state.integral, bound) };
        candidate.clamp(lo, hi)
    } else {
        candidate
    };
    let u = cfg.kp * (e + state.integral + deriv);
    u.clamp(cfg.out_min, cfg.out_max)
}

/// How feedforward outputs are routed to the two actuators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FfRouting {
    /// Index convention: f11, f12 compensate the valve; f21, f22 the
    /// compressor (first filter index = affected output/loop).
    ByIndex,
    /// Alternative pairing in which both evaporator-driven filters act on the
    /// valve and both condenser-driven filters on the compressor.
    ByDisturbance,
}

/// Bank of four discrete feedforward compensators. f11/f21 are driven by the
/// evaporator inlet deviation, f12/f22 by the condenser inlet deviation.
#[derive(Debug, Clone)]
pub struct FeedforwardBank {
    pub f11: DiscreteFilter,
    pub f21: DiscreteFilter,
    pub f12: DiscreteFilter,
    pub f22: DiscreteFilter,
    /// The condenser-to-valve compensator defaults to disabled: its output is
    /// still computed for inspection but not injected.
    pub enable_f12: bool,
    pub routing: FfRouting,
}

/// Per-sample feedforward contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FfOutput {
    pub d_av: f64,
    pub d_n: f64,
    pub f11: f64,
    pub f21: f64,
    pub f12: f64,
    pub f22: f64,
}

impl FeedforwardBank {
    pub fn validate(&self) -> Result<()> {
        let ts = self.f11.ts();
        for f in [&self.f21, &self.f12, &self.f22] {
            if (f.ts() - ts).abs() > 0.0 {
                return Err(Error::Config("feedforward bank filters must share ts".into()));
            }
        }
        Ok(())
    }

    /// Advance all four filters by one sample of the disturbance deviations
    /// and return the actuator corrections.
    pub fn step(&mut self, d_te_sec_in: f64, d_tc_sec_in: f64) -> FfOutput {
        let f11 = self.f11.step(d_te_sec_in);
        let f21 = self.f21.step(d_te_sec_in);
        let f12 = self.f12.step(d_tc_sec_in);
        let f22 = self.f22.step(d_tc_sec_in);
        let f12_used = if self.enable_f12 { f12 } else { 0.0 };
        let (d_av, d_n) = match self.routing {
            FfRouting::ByIndex => (f11 + f12_used, f21 + f22),
            FfRouting::ByDisturbance => (f11 + f21, f12_used + f22),
        };
        FfOutput { d_av, d_n, f11, f21, f12, f22 }
    }

    pub fn reset(&mut self) {
        self.f11.reset();
        self.f21.reset();
        self.f12.reset();
        self.f22.reset();
    }
}

/// Conditional (Clegg-style) integrator parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CiConfig {
    /// Dead-band threshold: only errors with |e| <= delta are integrated.
    pub delta: f64,
    /// Output weight.
    pub w: f64,
    pub ts: f64,
    /// Errors with |e| <= zero_eps count as exactly zero (output reset).
    pub zero_eps: f64,
}

impl CiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::Config("ci: delta must be positive".into()));
        }
        if self.w < 0.0 {
            return Err(Error::Config("ci: w must be nonnegative".into()));
        }
        if self.zero_eps < 0.0 || self.zero_eps >= self.delta {
            return Err(Error::Config("ci: zero_eps must lie in [0, delta)".into()));
        }
        if !(self.ts > 0.0) {
            return Err(Error::Config("ci: ts must be positive".into()));
        }
        Ok(())
    }
}

/// Conditional integrator state.
#[derive(Debug, Clone, Default)]
pub struct CiState {
    integral: f64,
    prev_sign: i8,
}

impl CiState {
    pub fn integral(&self) -> f64 {
        self.integral
    }
}

/// One step of the conditional integrator.
///
/// Zero error resets the output; a sign change resets the accumulated
/// integral even when the error is outside the dead-band; accumulation only
/// happens inside the dead-band |e| <= delta. `inhibit` skips accumulation
/// for this sample (anti-windup while the actuator is railed); resets still
/// fire.
pub fn ci_step(cfg: &CiConfig, state: &mut CiState, e: f64, inhibit: bool) -> f64 {
    if e.abs() <= cfg.zero_eps {
        state.integral = 0.0;
        state.prev_sign = 0;
        return 0.0;
    }
    let sign: i8 = if e > 0.0 { 1 } else { -1 };
    if state.prev_sign != 0 && sign != state.prev_sign {
        state.integral = 0.0;
    }
    state.prev_sign = sign;
    if e.abs() <= cfg.delta && !inhibit {
        state.integral += cfg.ts * e;
    }
    cfg.w * state.integral
}

/// Which blocks a composed controller runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum ControllerKind {
    /// Two PID loops.
    #[default]
    C1,
    /// C1 plus feedforward compensation.
    C2,
    /// C2 plus conditional integrators.
    C3,
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(ControllerKind::C1),
            "C2" => Ok(ControllerKind::C2),
            "C3" => Ok(ControllerKind::C3),
            other => Err(Error::Config(format!("unknown controller kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControllerKind::C1 => write!(f, "C1"),
            ControllerKind::C2 => write!(f, "C2"),
            ControllerKind::C3 => write!(f, "C3"),
        }
    }
}

/// Conditional-integrator setup for one loop: parameters plus the sign with
/// which its output enters the control signal (the loop action direction;
/// -1 for the reverse-acting valve loop).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CiLoop {
    pub cfg: CiConfig,
    pub direction: f64,
}

/// Per-sample controller output with the individual block contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOutput {
    /// Valve command, %, before plant saturation.
    pub av: f64,
    /// Compressor command, Hz, before plant saturation.
    pub n: f64,
    pub ff_av: f64,
    pub ff_n: f64,
    pub ci1: f64,
    pub ci2: f64,
}

/// A composed two-loop controller (C1, C2 or C3).
#[derive(Debug, Clone)]
pub struct Controller {
    kind: ControllerKind,
    pid1: PidConfig,
    pid2: PidConfig,
    pid1_state: PidState,
    pid2_state: PidState,
    ff: Option<FeedforwardBank>,
    ci1: Option<CiLoop>,
    ci2: Option<CiLoop>,
    ci1_state: CiState,
    ci2_state: CiState,
    // composed-command saturation signs from the previous sample
    // (+1 high rail, -1 low rail, 0 free); gate CI accumulation
    sat1: i8,
    sat2: i8,
}

impl Controller {
    /// Compose a controller of the requested kind. C2 requires a feedforward
    /// bank; C3 additionally requires both conditional integrators.
    pub fn compose(
        kind: ControllerKind,
        pid1: PidConfig,
        pid2: PidConfig,
        ff: Option<FeedforwardBank>,
        ci: Option<(CiLoop, CiLoop)>,
    ) -> Result<Self> {
        pid1.validate()?;
        pid2.validate()?;
        let ff = match kind {
            ControllerKind::C1 => None,
            ControllerKind::C2 | ControllerKind::C3 => Some(ff.ok_or_else(|| {
                Error::Config(format!("{kind} requires a feedforward bank"))
            })?),
        };
        if let Some(bank) = &ff {
            bank.validate()?;
        }
        let (ci1, ci2) = match kind {
            ControllerKind::C3 => {
                let (a, b) = ci.ok_or_else(|| {
                    Error::Config("C3 requires conditional integrator configs".into())
                })?;
                a.cfg.validate()?;
                b.cfg.validate()?;
                (Some(a), Some(b))
            }
            _ => (None, None),
        };
        Ok(Controller {
            kind,
            pid1,
            pid2,
            pid1_state: PidState::default(),
            pid2_state: PidState::default(),
            ff,
            ci1,
            ci2,
            ci1_state: CiState::default(),
            ci2_state: CiState::default(),
            sat1: 0,
            sat2: 0,
        })
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    /// One control sample: PID on each loop, plus feedforward driven by the
    /// disturbance deviations, plus conditional-integrator corrections.
    pub fn step(
        &mut self,
        r1: f64,
        y1: f64,
        r2: f64,
        y2: f64,
        d_te_sec_in: f64,
        d_tc_sec_in: f64,
    ) -> ControlOutput {
        let u1 = pid_step(&self.pid1, &mut self.pid1_state, r1, y1);
        let u2 = pid_step(&self.pid2, &mut self.pid2_state, r2, y2);
        let ff = match &mut self.ff {
            Some(bank) => bank.step(d_te_sec_in, d_tc_sec_in),
            None => FfOutput::default(),
        };
        // a loop's CI may not accumulate further into a rail it already sits on
        let gate = |sat: i8, direction: f64, e: f64| {
            (sat > 0 && direction * e > 0.0) || (sat < 0 && direction * e < 0.0)
        };
        let ci1 = match &self.ci1 {
            Some(l) => {
                let e = r1 - y1;
                l.direction * ci_step(&l.cfg, &mut self.ci1_state, e, gate(self.sat1, l.direction, e))
            }
            None => 0.0,
        };
        let ci2 = match &self.ci2 {
            Some(l) => {
                let e = r2 - y2;
                l.direction * ci_step(&l.cfg, &mut self.ci2_state, e, gate(self.sat2, l.direction, e))
            }
            None => 0.0,
        };
        let av = u1 + ff.d_av + ci1;
        let n = u2 + ff.d_n + ci2;
        let sat = |v: f64, cfg: &PidConfig| {
            if v >= cfg.out_max {
                1
            } else if v <= cfg.out_min {
                -1
            } else {
                0
            }
        };
        self.sat1 = sat(av, &self.pid1);
        self.sat2 = sat(n, &self.pid2);
        ControlOutput {
            av,
            n,
            ff_av: ff.d_av,
            ff_n: ff.d_n,
            ci1,
            ci2,
        }
    }
}
