//! Command implementations behind the binary: run, compare, synth, fit.
//! The binary itself only parses flags and maps errors to exit codes.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{FfChoice, RunConfig};
use crate::control::ControllerKind;
use crate::error::{Error, Result};
use crate::ffsynth::{synthesize_ff, SynthesisResult};
use crate::lti::{Method, RationalTf};
use crate::metrics::{relative_report, IndexReport};
use crate::presets;
use crate::sim::{run_scenario, SimTrace};
use crate::sysid::{fit_first_order, fit_second_order, FitResult, StepExperiment};

/// Exit code contract: 0 success, 2 configuration, 3 numeric failure,
/// 4 infeasible synthesis, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidModel(_) | Error::Metrics(_) | Error::Io(_) => 2,
        Error::Identification(_) => 2,
        Error::NonFinite { .. } | Error::Discretization(_) => 3,
        Error::Improper { .. } | Error::InfeasibleSynthesis(_) => 4,
    }
}

/// Flag-level overrides applied on top of an optional config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    /// Named presets to apply; each routes by what it names.
    pub presets: Vec<String>,
    pub controller: Option<ControllerKind>,
    pub scenario_file: Option<PathBuf>,
    pub ts: Option<f64>,
    pub horizon: Option<f64>,
    pub enable_f12: bool,
    pub weights: Option<[f64; 8]>,
}

impl RunOverrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        for name in &self.presets {
            match name.as_str() {
                "pid2018-surrogate" => cfg.plant.preset = name.clone(),
                "pid2018-default" => {
                    cfg.scenario.preset = Some(name.clone());
                    cfg.scenario.file = None;
                }
                "paper-ff" => cfg.controller.ff = FfChoice::Paper,
                "synth-ff" => cfg.controller.ff = FfChoice::Synthesized,
                // the compiled-in PID defaults; nothing to change, but the
                // name must be recognized
                "c1-default" => {
                    cfg.controller.pid1 = Default::default();
                    cfg.controller.pid2 = Default::default();
                }
                other => return Err(Error::Config(format!("unknown preset '{other}'"))),
            }
        }
        if let Some(kind) = self.controller {
            cfg.controller.kind = kind;
        }
        if let Some(file) = &self.scenario_file {
            cfg.scenario.file = Some(file.display().to_string());
            cfg.scenario.preset = None;
        }
        if let Some(ts) = self.ts {
            cfg.scenario.ts = Some(ts);
        }
        if let Some(horizon) = self.horizon {
            cfg.scenario.horizon = Some(horizon);
        }
        if self.enable_f12 {
            cfg.controller.enable_f12 = true;
        }
        if let Some(w) = self.weights {
            cfg.weights = Some(w);
        }
        Ok(())
    }
}

fn load_or_default(config: Option<&Path>) -> Result<RunConfig> {
    match config {
        Some(path) => crate::config::load_run_config(path),
        None => Ok(RunConfig::default()),
    }
}

fn resolved(cfg: &RunConfig) -> Result<(crate::sim::Scenario, crate::plant::PlantModel)> {
    Ok((cfg.scenario.resolve()?, cfg.plant.resolve()?))
}

fn run_once(cfg: &RunConfig) -> Result<(crate::sim::Scenario, SimTrace)> {
    let (scenario, model) = resolved(cfg)?;
    let mut controller = cfg.controller.build(&model, scenario.ts)?;
    let trace = run_scenario(&scenario, &model, &mut controller)?;
    Ok((scenario, trace))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn summary_text(cfg: &RunConfig, scenario: &crate::sim::Scenario, trace: &SimTrace) -> String {
    let mut s = String::new();
    s.push_str(&format!("controller: {}\n", cfg.controller.kind));
    s.push_str(&format!("plant preset: {}\n", cfg.plant.preset));
    s.push_str(&format!(
        "grid: ts={} s, horizon={} s, {} samples\n",
        scenario.ts,
        scenario.horizon,
        trace.len()
    ));
    if cfg.controller.kind != ControllerKind::C1 {
        let ff = match cfg.controller.ff {
            FfChoice::Synthesized => "synthesized from plant models",
            FfChoice::Paper => "published coefficients",
        };
        s.push_str(&format!(
            "feedforward: {ff}, condenser-to-valve path {}\n",
            if cfg.controller.enable_f12 { "enabled" } else { "disabled" }
        ));
    }
    if cfg.controller.kind == ControllerKind::C3 {
        let (mut ci1, mut ci2) = presets::ci_default(scenario.ts);
        cfg.controller.ci1.apply(&mut ci1);
        cfg.controller.ci2.apply(&mut ci2);
        s.push_str(&format!(
            "conditional integrator loop 1: delta={} w={}\n",
            ci1.cfg.delta, ci1.cfg.w
        ));
        s.push_str(&format!(
            "conditional integrator loop 2: delta={} w={}\n",
            ci2.cfg.delta, ci2.cfg.w
        ));
    }
    let last = trace.len() - 1;
    s.push_str(&format!(
        "final outputs: y1={:.4} y2={:.4}\n",
        trace.y1[last], trace.y2[last]
    ));
    s
}

/// Run one scenario and write trace.csv and summary.txt under `out`.
pub fn cmd_run(config: Option<&Path>, overrides: &RunOverrides, out: &Path) -> Result<PathBuf> {
    let mut cfg = load_or_default(config)?;
    overrides.apply(&mut cfg)?;
    let (scenario, trace) = run_once(&cfg)?;
    std::fs::create_dir_all(out)?;
    let trace_path = out.join("trace.csv");
    write_atomic(&trace_path, &trace.to_csv())?;
    write_atomic(&out.join("summary.txt"), &summary_text(&cfg, &scenario, &trace))?;
    Ok(trace_path)
}

/// Run candidate and baseline controllers on the same scenario and write the
/// relative index report. The two simulations run in parallel.
pub fn cmd_compare(
    config: Option<&Path>,
    overrides: &RunOverrides,
    candidate: ControllerKind,
    baseline: ControllerKind,
    out: &Path,
) -> Result<IndexReport> {
    let mut cfg = load_or_default(config)?;
    overrides.apply(&mut cfg)?;
    let mut cand_cfg = cfg.clone();
    cand_cfg.controller.kind = candidate;
    let mut base_cfg = cfg.clone();
    base_cfg.controller.kind = baseline;

    let (cand_res, base_res) = std::thread::scope(|scope| {
        let cand = scope.spawn(|| run_once(&cand_cfg));
        let base = scope.spawn(|| run_once(&base_cfg));
        (cand.join().expect("candidate run panicked"), base.join().expect("baseline run panicked"))
    });
    let (scenario, cand_trace) = cand_res?;
    let (_, base_trace) = base_res?;

    let weights = cfg.weights()?;
    let report = relative_report(&cand_trace, &base_trace, &scenario.windows, &weights)?;

    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("candidate_trace.csv"), &cand_trace.to_csv())?;
    write_atomic(&out.join("baseline_trace.csv"), &base_trace.to_csv())?;
    write_atomic(
        &out.join("report.txt"),
        &report.render_table(&candidate.to_string(), &baseline.to_string()),
    )?;
    write_atomic(&out.join("report.csv"), &report.to_csv())?;
    Ok(report)
}

fn named_model(name: &str) -> Result<RationalTf> {
    match name.to_ascii_uppercase().as_str() {
        "G11" => Ok(presets::valve_to_evap_out()),
        "G22" => Ok(presets::speed_to_superheat()),
        "D11" => Ok(presets::dist_evap_to_out()),
        "D21" => Ok(presets::dist_evap_to_superheat()),
        "D12" => Ok(presets::dist_cond_to_out()),
        "D22" => Ok(presets::dist_cond_to_superheat()),
        other => Err(Error::Config(format!(
            "unknown model '{other}' (expected G11, G22, D11, D21, D12, D22)"
        ))),
    }
}

#[derive(Serialize)]
struct TfRecord {
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(Serialize)]
struct SynthRecord {
    d: String,
    g: String,
    ts: f64,
    method: String,
    stable: bool,
    dc_gain: f64,
    continuous: TfRecord,
    discrete: Option<TfRecord>,
    notes: Vec<String>,
}

/// Synthesize a feedforward compensator for a named (disturbance, channel)
/// pair and write its coefficients.
pub fn cmd_synth(
    d_name: &str,
    g_name: &str,
    ts: f64,
    method: Method,
    out: &Path,
) -> Result<SynthesisResult> {
    let d = named_model(d_name)?;
    let g = named_model(g_name)?;
    let result = synthesize_ff(&d, &g, ts, method)?;
    let record = SynthRecord {
        d: d_name.to_ascii_uppercase(),
        g: g_name.to_ascii_uppercase(),
        ts,
        method: format!("{method:?}").to_ascii_lowercase(),
        stable: result.stable,
        dc_gain: result.continuous.dc_gain(),
        continuous: TfRecord {
            num: result.continuous.num().to_vec(),
            den: result.continuous.den().to_vec(),
        },
        discrete: result.discrete.as_ref().map(|f| TfRecord {
            num: f.num_z().to_vec(),
            den: f.den_z().to_vec(),
        }),
        notes: result.notes.clone(),
    };
    std::fs::create_dir_all(out)?;
    let text = toml::to_string_pretty(&record)
        .map_err(|e| Error::Config(format!("serializing synthesis result: {e}")))?;
    write_atomic(&out.join("compensator.toml"), &text)?;
    Ok(result)
}

/// Parse a two-column (time, value) CSV into a step experiment. A header row
/// is skipped if present; the time grid must be uniform.
pub fn read_step_csv(path: &Path, amplitude: f64) -> Result<StepExperiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (t, v) = match (fields.next(), fields.next()) {
            (Some(t), Some(v)) => (t.trim(), v.trim()),
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: expected two comma-separated columns",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        match (t.parse::<f64>(), v.parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                times.push(t);
                values.push(v);
            }
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: non-numeric sample",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if times.len() < 2 {
        return Err(Error::Config(format!(
            "{}: need at least two samples",
            path.display()
        )));
    }
    let ts = times[1] - times[0];
    for k in 1..times.len() {
        if ((times[k] - times[k - 1]) - ts).abs() > 1e-9 * ts.abs().max(1.0) {
            return Err(Error::Config(format!(
                "{}: time grid is not uniform near row {}",
                path.display(),
                k + 1
            )));
        }
    }
    Ok(StepExperiment { ts, amplitude, response: values })
}

#[derive(Serialize)]
struct FitRecord {
    order: usize,
    ts: f64,
    amplitude: f64,
    model: TfRecord,
    rms: f64,
    warnings: Vec<String>,
}

/// Fit a first- or second-order model to a recorded step response CSV and
/// write the coefficients.
pub fn cmd_fit(order: usize, input: &Path, amplitude: f64, out: &Path) -> Result<FitResult> {
    let exp = read_step_csv(input, amplitude)?;
    let fit = match order {
        1 => fit_first_order(&exp)?,
        2 => fit_second_order(&exp)?,
        other => return Err(Error::Config(format!("unsupported fit order {other}"))),
    };
    let record = FitRecord {
        order,
        ts: exp.ts,
        amplitude: exp.amplitude,
        model: TfRecord {
            num: fit.model.num().to_vec(),
            den: fit.model.den().to_vec(),
        },
        rms: fit.rms,
        warnings: fit.warnings.clone(),
    };
    std::fs::create_dir_all(out)?;
    let text = toml::to_string_pretty(&record)
        .map_err(|e| Error::Config(format!("serializing fit result: {e}")))?;
    write_atomic(&out.join("fit.toml"), &text)?;
    Ok(fit)
}
