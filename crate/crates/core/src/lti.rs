//! Continuous-time rational transfer functions, state-space realization,
//! discretization and sample-by-sample filtering.
//!
//! Coefficient vectors are in descending powers of s (or z). Denominators of
//! discrete filters are normalized monic.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;

/// Margin used when classifying discrete poles: |z| < 1 - MARGIN is stable.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Continuous-to-discrete conversion method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Zero-order hold: exact for staircase inputs.
    Zoh,
    /// Bilinear (trapezoidal) transform.
    Tustin,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zoh" => Ok(Method::Zoh),
            "tustin" => Ok(Method::Tustin),
            other => Err(Error::Config(format!("unknown discretization method '{other}'"))),
        }
    }
}

/// Proper rational transfer function in the Laplace variable.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "RawTf", into = "RawTf")]
pub struct RationalTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RawTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<RawTf> for RationalTf {
    type Error = Error;
    fn try_from(raw: RawTf) -> Result<Self> {
        RationalTf::new(raw.num, raw.den)
    }
}

impl From<RationalTf> for RawTf {
    fn from(tf: RationalTf) -> Self {
        RawTf { num: tf.num, den: tf.den }
    }
}

impl RationalTf {
    /// Build a transfer function, normalizing away leading zeros and checking
    /// properness.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let den = poly::trim_leading(&den);
        if den == [0.0] {
            return Err(Error::InvalidModel("denominator is zero".into()));
        }
        let num = poly::trim_leading(&num);
        if num.len() > den.len() {
            return Err(Error::Improper { excess: num.len() - den.len() });
        }
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        Ok(RationalTf { num, den })
    }

    /// Static gain k (num = [k], den = [1]).
    pub fn constant(k: f64) -> Self {
        RationalTf { num: vec![k], den: vec![1.0] }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.den.len() == 1
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    /// Gain at s = 0. Infinite when the denominator has a root at the origin.
    pub fn dc_gain(&self) -> f64 {
        self.num.last().unwrap() / self.den.last().unwrap()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly::roots(&self.num)
    }

    /// All poles strictly in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }
}

/// State-space realization (controllable canonical form for SISO models).
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Frequency response C (sI - A)^-1 B + D at one complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let n = self.order();
        if n == 0 {
            return Complex64::new(self.d[(0, 0)], 0.0);
        }
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::new(-self.a[(i, j)], 0.0);
            }
            m[(i, i)] += Complex::new(s.re, s.im);
        }
        let b: DMatrix<Complex<f64>> = self.b.map(|x| Complex::new(x, 0.0));
        let x = m.lu().solve(&b).expect("sI - A singular at evaluation point");
        let mut acc = Complex::new(self.d[(0, 0)], 0.0);
        for j in 0..n {
            acc += Complex::new(self.c[(0, j)], 0.0) * x[(j, 0)];
        }
        Complex64::new(acc.re, acc.im)
    }
}

/// Controllable canonical realization of a proper SISO transfer function.
pub fn tf_to_ss(tf: &RationalTf) -> StateSpace {
    let den_lead = tf.den[0];
    let den: Vec<f64> = tf.den.iter().map(|c| c / den_lead).collect();
    let mut num: Vec<f64> = vec![0.0; den.len() - tf.num.len()];
    num.extend(tf.num.iter().map(|c| c / den_lead));

    let n = den.len() - 1;
    let d_term = num[0];
    // strictly proper remainder: num - d * den, dropping the leading (zero) term
    let sp: Vec<f64> = (1..=n).map(|i| num[i] - d_term * den[i]).collect();

    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -den[j + 1];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = DMatrix::<f64>::zeros(n, 1);
    if n > 0 {
        b[(0, 0)] = 1.0;
    }
    let mut c = DMatrix::<f64>::zeros(1, n);
    for j in 0..n {
        c[(0, j)] = sp[j];
    }
    let d = DMatrix::<f64>::from_element(1, 1, d_term);
    StateSpace { a, b, c, d }
}

/// Characteristic polynomial and numerator of C (zI - A)^-1 B via the
/// Faddeev-LeVerrier recursion. Returns (num, den) in descending powers.
fn ss_to_tf_polys(ss: &StateSpace) -> (Vec<f64>, Vec<f64>) {
    let n = ss.order();
    let d = ss.d[(0, 0)];
    if n == 0 {
        return (vec![d], vec![1.0]);
    }
    let mut den = vec![1.0];
    let mut num_sp = Vec::with_capacity(n);
    let mut m = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        num_sp.push((&ss.c * &m * &ss.b)[(0, 0)]);
        let am = &ss.a * &m;
        let ck = -am.trace() / k as f64;
        den.push(ck);
        m = am + DMatrix::<f64>::identity(n, n) * ck;
    }
    // num = d * den + [0, num_sp...]
    let mut num = poly::scale(&den, d);
    for (i, v) in num_sp.iter().enumerate() {
        num[i + 1] += v;
    }
    (num, den)
}

/// Discrete filter (difference equation) with internal delay-line state.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiscreteFilter {
    num_z: Vec<f64>,
    den_z: Vec<f64>,
    ts: f64,
    #[serde(skip)]
    state: Vec<f64>,
}

impl DiscreteFilter {
    /// Build a causal filter. The denominator is normalized monic and the
    /// numerator left-padded to the same length.
    pub fn new(num_z: Vec<f64>, den_z: Vec<f64>, ts: f64) -> Result<Self> {
        if !(ts > 0.0) {
            return Err(Error::InvalidModel("sampling period must be positive".into()));
        }
        let den = poly::trim_leading(&den_z);
        if den == [0.0] {
            return Err(Error::InvalidModel("discrete denominator is zero".into()));
        }
        let num = poly::trim_leading(&num_z);
        if num.len() > den.len() {
            return Err(Error::InvalidModel(
                "discrete filter would be non-causal (numerator degree exceeds denominator)".into(),
            ));
        }
        let lead = den[0];
        let den: Vec<f64> = den.iter().map(|c| c / lead).collect();
        let mut padded = vec![0.0; den.len() - num.len()];
        padded.extend(num.iter().map(|c| c / lead));
        let n = den.len() - 1;
        Ok(DiscreteFilter { num_z: padded, den_z: den, ts, state: vec![0.0; n] })
    }

    pub fn num_z(&self) -> &[f64] {
        &self.num_z
    }

    pub fn den_z(&self) -> &[f64] {
        &self.den_z
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    /// One step of the difference equation (direct form II transposed).
    pub fn step(&mut self, u: f64) -> f64 {
        let n = self.state.len();
        let y = self.num_z[0] * u + if n > 0 { self.state[0] } else { 0.0 };
        for i in 0..n {
            let next = if i + 1 < n { self.state[i + 1] } else { 0.0 };
            self.state[i] = self.num_z[i + 1] * u - self.den_z[i + 1] * y + next;
        }
        y
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = 0.0);
    }

    /// Gain at z = 1.
    pub fn dc_gain(&self) -> f64 {
        let num: f64 = self.num_z.iter().sum();
        let den: f64 = self.den_z.iter().sum();
        num / den
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den_z)
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0 - STABILITY_MARGIN)
    }
}

/// Discretize a proper transfer function at sampling period `ts`.
pub fn c2d(tf: &RationalTf, ts: f64, method: Method) -> Result<DiscreteFilter> {
    if !(ts > 0.0) {
        return Err(Error::Discretization("sampling period must be positive".into()));
    }
    match method {
        Method::Zoh => c2d_zoh(tf, ts),
        Method::Tustin => c2d_tustin(tf, ts),
    }
}

/// ZOH discretization of an (A, B) pair via the augmented-matrix exponential:
/// exp([[A, B], [0, 0]] * ts) carries Ad in the top-left block and Bd in the
/// top-right column.
pub(crate) fn zoh_ab(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    ts: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[(i, j)] * ts;
        }
        m[(i, n)] = b[(i, 0)] * ts;
    }
    let em = m.exp();
    if em.iter().any(|x| !x.is_finite()) {
        return Err(Error::Discretization(
            "matrix exponential produced non-finite entries".into(),
        ));
    }
    Ok((em.view((0, 0), (n, n)).into_owned(), em.view((0, n), (n, 1)).into_owned()))
}

fn c2d_zoh(tf: &RationalTf, ts: f64) -> Result<DiscreteFilter> {
    let ss = tf_to_ss(tf);
    let n = ss.order();
    if n == 0 {
        return DiscreteFilter::new(vec![ss.d[(0, 0)]], vec![1.0], ts);
    }
    let (ad, bd) = zoh_ab(&ss.a, &ss.b, ts)?;
    let dss = StateSpace { a: ad, b: bd, c: ss.c.clone(), d: ss.d.clone() };
    let (num, den) = ss_to_tf_polys(&dss);
    DiscreteFilter::new(num, den, ts)
}

fn c2d_tustin(tf: &RationalTf, ts: f64) -> Result<DiscreteFilter> {
    // s -> (2/ts) (z - 1) / (z + 1), multiplied through by (z + 1)^n.
    let n = tf.den.len() - 1;
    let k = 2.0 / ts;
    let mut num_padded = vec![0.0; tf.den.len() - tf.num.len()];
    num_padded.extend_from_slice(&tf.num);

    let substitute = |coeffs: &[f64]| -> Vec<f64> {
        let mut acc = vec![0.0];
        for (j, &c) in coeffs.iter().enumerate() {
            let p = n - j; // power of s carried by this coefficient
            let term = poly::mul(&poly::binomial_power(-1.0, p), &poly::binomial_power(1.0, n - p));
            acc = poly::add(&acc, &poly::scale(&term, c * k.powi(p as i32)));
        }
        acc
    };

    let num_z = substitute(&num_padded);
    let den_z = substitute(&tf.den);
    if poly::trim_leading(&den_z) == [0.0] {
        return Err(Error::Discretization(
            "bilinear transform produced a zero denominator (pole at 2/ts)".into(),
        ));
    }
    DiscreteFilter::new(num_z, den_z, ts)
}

/// Uniformly sampled response of `amplitude * step`.
#[derive(Debug, Clone)]
pub struct StepResponse {
    pub ts: f64,
    pub values: Vec<f64>,
    /// False when the continuous model has poles outside the open left
    /// half-plane; the response is still computed.
    pub stable: bool,
}

impl StepResponse {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.ts)
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Simulate the step response by exact ZOH discretization of the realization.
pub fn step_response(tf: &RationalTf, ts: f64, horizon: f64, amplitude: f64) -> Result<StepResponse> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidModel("horizon must be positive".into()));
    }
    let mut filt = c2d(tf, ts, Method::Zoh)?;
    let samples = (horizon / ts).floor() as usize + 1;
    let values: Vec<f64> = (0..samples).map(|_| filt.step(amplitude)).collect();
    Ok(StepResponse { ts, values, stable: tf.is_stable() })
}
