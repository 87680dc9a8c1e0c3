//! Step-response identification of low-order continuous models.
//!
//! Fits (b1 s + b0)/(s^2 + a1 s + a0) or b0/(s + a0) to a recorded step
//! response by derivative-free simplex search over the coefficients, with
//! denominator coefficients kept positive through a log parameterization so
//! every candidate is stable.

use crate::error::{Error, Result};
use crate::lti::{c2d, Method, RationalTf};

/// A recorded step experiment: the input steps by `amplitude` at t = 0 and
/// `response` holds the output deviation sampled every `ts` seconds.
#[derive(Debug, Clone)]
pub struct StepExperiment {
    pub ts: f64,
    pub amplitude: f64,
    pub response: Vec<f64>,
}

/// Fraction of the final value the response tail must stay within for the
/// experiment to count as settled.
const SETTLE_TOL: f64 = 0.01;

impl StepExperiment {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::Identification("sample time must be positive".into()));
        }
        if self.amplitude == 0.0 || !self.amplitude.is_finite() {
            return Err(Error::Identification("step amplitude must be nonzero".into()));
        }
        if self.response.len() < 10 {
            return Err(Error::Identification(format!(
                "need at least 10 samples, got {}",
                self.response.len()
            )));
        }
        if self.response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Identification("response contains non-finite samples".into()));
        }
        if self.response[0].abs() > 1e-9 * self.scale() {
            return Err(Error::Identification(
                "response must start at 0 (deviation form)".into(),
            ));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.response.iter().fold(1e-300, |m, v| m.max(v.abs()))
    }

    /// Final value estimated from the tail of the record.
    pub fn final_value(&self) -> f64 {
        let n = self.response.len();
        let tail = n / 20 + 1;
        self.response[n - tail..].iter().sum::<f64>() / tail as f64
    }

    /// The record must end within 1% of its final value (checked over the
    /// last tenth of the horizon, against the response scale).
    fn check_settled(&self) -> Result<f64> {
        let fv = self.final_value();
        let n = self.response.len();
        let band = SETTLE_TOL * fv.abs().max(self.scale() * 1e-3);
        for &v in &self.response[n - n / 10 - 1..] {
            if (v - fv).abs() > band {
                return Err(Error::Identification(
                    "response has not settled within 1% of its final value".into(),
                ));
            }
        }
        Ok(fv)
    }

    /// Time of the first crossing of 63% of the final value, a dominant
    /// time-constant estimate.
    fn tau_estimate(&self, fv: f64) -> f64 {
        let target = 0.632 * fv;
        for (k, &v) in self.response.iter().enumerate() {
            let crossed = if fv >= 0.0 { v >= target } else { v <= target };
            if crossed && k > 0 {
                return (k as f64 * self.ts).max(self.ts);
            }
        }
        (self.response.len() as f64 * self.ts / 4.0).max(self.ts)
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: RationalTf,
    /// Root-mean-square residual between the recorded and simulated step
    /// responses, normalized to a unit step.
    pub rms: f64,
    pub warnings: Vec<String>,
}

/// For a fixed denominator the numerator coefficients enter the sampled step
/// response linearly, so the best numerator is an exact least-squares solve.
/// Returns (numerator, sse) for the given monic denominator.
///
/// In the controllable canonical realization of 1/den the step response of
/// s^k/den is the state component at index order-1-k, so one ZOH
/// discretization and one state trajectory yield every basis response.
fn best_numerator(den: &[f64], ts: f64, target: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = target.len();
    let order = den.len() - 1;
    let base = RationalTf::new(vec![1.0], den.to_vec()).ok()?;
    let ss = crate::lti::tf_to_ss(&base);
    let (ad, bd) = crate::lti::zoh_ab(&ss.a, &ss.b, ts).ok()?;
    // basis[i] is the step response of s^(order-1-i)/den, which is state i
    let mut basis = vec![Vec::with_capacity(n); order];
    let mut x = nalgebra::DVector::<f64>::zeros(order);
    for k in 0..n {
        if k > 0 {
            x = &ad * &x + bd.column(0);
        }
        for i in 0..order {
            if !x[i].is_finite() {
                return None;
            }
            basis[i].push(x[i]);
        }
    }
    let m = basis.len();
    let mut ata = nalgebra::DMatrix::zeros(m, m);
    let mut atb = nalgebra::DVector::zeros(m);
    for i in 0..m {
        for j in i..m {
            let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
            ata[(i, j)] = dot;
            ata[(j, i)] = dot;
        }
        atb[i] = basis[i].iter().zip(target).map(|(a, b)| a * b).sum();
    }
    let coeffs = ata.lu().solve(&atb)?;
    let mut sse = 0.0;
    for s in 0..n {
        let mut y = 0.0;
        for i in 0..m {
            y += coeffs[i] * basis[i][s];
        }
        let e = y - target[s];
        sse += e * e;
    }
    if !sse.is_finite() {
        return None;
    }
    Some((coeffs.iter().copied().collect(), sse))
}

/// Nelder-Mead simplex minimization. Deterministic; returns the best vertex.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        let h = if x[i].abs() > 1e-8 { initial_step * x[i].abs() } else { initial_step };
        x[i] += h;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        // the minimum sits at the bottom of a very shallow valley, so the
        // spread test is absolute-tiny rather than relative to 1
        if worst - best <= 1e-12 * best.abs() + 1e-300 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += x[i] / n as f64;
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n].0[i]))
            .collect();
        let fr = f(&reflect);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (simplex[n].0[i] - centroid[i]))
                .collect();
            let fc = f(&contract);
            if fc < simplex[n].1 {
                simplex[n] = (contract, fc);
            } else {
                let x0v = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (vi, x0i) in v.0.iter_mut().zip(&x0v) {
                        *vi = x0i + sigma * (*vi - x0i);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Nelder-Mead with restart polish: the simplex tends to collapse early in
/// the flat valley these objectives have, so re-seed a fresh small simplex
/// at the converged point until it stops improving.
fn nelder_mead_polished<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let (mut x, mut fx) = nelder_mead(&mut f, x0, 0.25, max_iter);
    for _ in 0..5 {
        let (xp, fp) = nelder_mead(&mut f, &x, 0.02, max_iter);
        let improved = fp < fx * (1.0 - 1e-9);
        if fp < fx {
            x = xp;
            fx = fp;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Acceptable normalized RMS before restarts kick in.
const GOOD_RMS_FRAC: f64 = 1e-4;

fn finish(
    exp: &StepExperiment,
    target: &[f64],
    model: RationalTf,
    sse: f64,
    mut warnings: Vec<String>,
) -> FitResult {
    let rms = (sse / target.len() as f64).sqrt();
    let scale = exp.scale() / exp.amplitude.abs();
    if rms > GOOD_RMS_FRAC * scale.max(1e-12) * 100.0 {
        warnings.push(format!(
            "fit residual rms {rms:.3e} is large relative to the response scale {scale:.3e}"
        ));
    }
    FitResult { model, rms, warnings }
}

/// Fit b0/(s + a0) to a step experiment.
pub fn fit_first_order(exp: &StepExperiment) -> Result<FitResult> {
    exp.validate()?;
    let target: Vec<f64> = exp.response.iter().map(|v| v / exp.amplitude).collect();

    if exp.scale() < 1e-12 * exp.amplitude.abs() {
        return Ok(FitResult {
            model: RationalTf::new(vec![0.0], vec![1.0, 1.0])?,
            rms: 0.0,
            warnings: vec!["response is identically zero, fitted zero-gain model".into()],
        });
    }

    let fv = exp.check_settled()? / exp.amplitude;
    let tau = exp.tau_estimate(fv * exp.amplitude);
    let a0 = 1.0 / tau;

    // search is over ln a0 only; b0 is solved exactly per candidate
    let objective = |x: &[f64], target: &[f64], ts: f64| -> f64 {
        best_numerator(&[1.0, x[0].exp()], ts, target).map_or(f64::INFINITY, |(_, sse)| sse)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mult in [1.0, 0.25, 4.0, 16.0] {
        let start = vec![(a0 * mult).ln()];
        let (x, sse) = nelder_mead_polished(|x| objective(x, &target, exp.ts), &start, 2000);
        if best.as_ref().is_none_or(|(_, b)| sse < *b) {
            best = Some((x, sse));
        }
        if best.as_ref().unwrap().1 < (1e-12 * exp.scale()).powi(2) * target.len() as f64 {
            break;
        }
    }
    let (x, sse) = best.unwrap();
    let den = vec![1.0, x[0].exp()];
    let (num, _) = best_numerator(&den, exp.ts, &target)
        .ok_or_else(|| Error::Identification("numerator solve failed".into()))?;
    let model = RationalTf::new(num, den)?;
    Ok(finish(exp, &target, model, sse, Vec::new()))
}

/// Fit (b1 s + b0)/(s^2 + a1 s + a0) to a step experiment.
pub fn fit_second_order(exp: &StepExperiment) -> Result<FitResult> {
    exp.validate()?;
    let target: Vec<f64> = exp.response.iter().map(|v| v / exp.amplitude).collect();

    if exp.scale() < 1e-12 * exp.amplitude.abs() {
        return Ok(FitResult {
            model: RationalTf::new(vec![0.0], vec![1.0, 2.0, 1.0])?,
            rms: 0.0,
            warnings: vec!["response is identically zero, fitted zero-gain model".into()],
        });
    }

    let fv = exp.check_settled()? / exp.amplitude;
    let tau = exp.tau_estimate(fv * exp.amplitude);

    // search is over [ln a1, ln a0]; the numerator pair is solved exactly
    // per candidate denominator. Restarts seed the second pole at different
    // speeds relative to the dominant one and to the sample rate.
    let objective = |x: &[f64], target: &[f64], ts: f64| -> f64 {
        best_numerator(&[1.0, x[0].exp(), x[1].exp()], ts, target)
            .map_or(f64::INFINITY, |(_, sse)| sse)
    };
    let p1 = 1.0 / tau;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for p2 in [10.0 * p1, 2.0 * p1, 1.0 / exp.ts, 20.0 / exp.ts, 100.0 * p1] {
        let start = vec![(p1 + p2).ln(), (p1 * p2).ln()];
        let (x, sse) = nelder_mead_polished(|x| objective(x, &target, exp.ts), &start, 2000);
        if best.as_ref().is_none_or(|(_, b)| sse < *b) {
            best = Some((x, sse));
        }
        if best.as_ref().unwrap().1 < (1e-12 * exp.scale()).powi(2) * target.len() as f64 {
            break;
        }
    }
    let (x, sse) = best.unwrap();
    let den = vec![1.0, x[0].exp(), x[1].exp()];
    let (num, _) = best_numerator(&den, exp.ts, &target)
        .ok_or_else(|| Error::Identification("numerator solve failed".into()))?;
    let model = RationalTf::new(num, den)?;
    Ok(finish(exp, &target, model, sse, Vec::new()))
}

/// Generate a noiseless step experiment from a known model, for round-trip
/// testing and the CLI demo path.
pub fn simulate_experiment(
    tf: &RationalTf,
    ts: f64,
    amplitude: f64,
    samples: usize,
) -> Result<StepExperiment> {
    let mut filt = c2d(tf, ts, Method::Zoh)?;
    let response: Vec<f64> = (0..samples).map(|_| filt.step(amplitude)).collect();
    Ok(StepExperiment { ts, amplitude, response })
}
