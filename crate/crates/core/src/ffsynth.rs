//! Feedforward compensator synthesis: FF = -D/G with rational algebra,
//! common-factor cancellation and feasibility checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{c2d, DiscreteFilter, Method, RationalTf};
use crate::poly;

/// Tolerance for cancelling near-coincident pole/zero pairs, scaled by the
/// largest root magnitude of the composed rational function.
pub const CANCEL_TOL: f64 = 1e-7;

/// Outcome of a feedforward synthesis.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub continuous: RationalTf,
    /// Present only when the compensator is stable (and proper, which is
    /// guaranteed when synthesis returned at all).
    pub discrete: Option<DiscreteFilter>,
    pub stable: bool,
    pub proper: bool,
    pub notes: Vec<String>,
}

/// Compute -d/g as a reduced rational function.
///
/// Near-coincident factors of the composed numerator and denominator are
/// cancelled. An improper result (the causality obstacle) is an error naming
/// the degree excess. Stability of the result is *not* checked here; see
/// `synthesize_ff`.
pub fn rational_divide_negate(d: &RationalTf, g: &RationalTf) -> Result<RationalTf> {
    if poly::trim_leading(g.num()) == [0.0] {
        return Err(Error::InfeasibleSynthesis("plant model has zero numerator".into()));
    }
    let num_raw = poly::scale(&poly::mul(d.num(), g.den()), -1.0);
    let den_raw = poly::mul(d.den(), g.num());

    if poly::trim_leading(&num_raw) == [0.0] {
        // zero disturbance path: zero compensator
        return RationalTf::new(vec![0.0], vec![1.0]);
    }

    let mut num_roots = poly::roots(&num_raw);
    let mut den_roots = poly::roots(&den_raw);
    cancel_common_roots(&mut num_roots, &mut den_roots);

    let num_lead = poly::trim_leading(&num_raw)[0];
    let den_lead = poly::trim_leading(&den_raw)[0];
    if num_roots.len() > den_roots.len() {
        return Err(Error::InfeasibleSynthesis(format!(
            "compensator is improper by degree {} (disturbance path responds faster than the plant channel)",
            num_roots.len() - den_roots.len()
        )));
    }
    let num = poly::scale(&poly::from_roots(&num_roots), num_lead);
    let den = poly::scale(&poly::from_roots(&den_roots), den_lead);
    // normalize the denominator leading coefficient
    let lead = den[0];
    RationalTf::new(poly::scale(&num, 1.0 / lead), poly::scale(&den, 1.0 / lead))
}

fn cancel_common_roots(num_roots: &mut Vec<Complex64>, den_roots: &mut Vec<Complex64>) {
    let max_mag = num_roots
        .iter()
        .chain(den_roots.iter())
        .fold(0.0f64, |m, r| m.max(r.norm()));
    if max_mag == 0.0 {
        return;
    }
    let tol = CANCEL_TOL * max_mag;
    let mut i = 0;
    while i < num_roots.len() {
        let mut matched = None;
        for (j, dr) in den_roots.iter().enumerate() {
            if (num_roots[i] - dr).norm() < tol {
                matched = Some(j);
                break;
            }
        }
        match matched {
            Some(j) => {
                num_roots.remove(i);
                den_roots.remove(j);
            }
            None => i += 1,
        }
    }
}

/// Full synthesis pipeline: continuous compensator via -d/g, then the
/// requested discretization when the result is stable.
pub fn synthesize_ff(
    d: &RationalTf,
    g: &RationalTf,
    ts: f64,
    method: Method,
) -> Result<SynthesisResult> {
    let continuous = rational_divide_negate(d, g)?;
    let mut notes = Vec::new();

    let poles = continuous.poles();
    let zeros = continuous.zeros();
    notes.push(format!("poles: {}", fmt_roots(&poles)));
    notes.push(format!("zeros: {}", fmt_roots(&zeros)));

    let stable = poles.iter().all(|p| p.re < 0.0);
    if !stable {
        notes.push(
            "unstable compensator: the plant channel has right-half-plane zeros; \
             stable/causal approximation is out of scope"
                .into(),
        );
    }

    let discrete = if stable { Some(c2d(&continuous, ts, method)?) } else { None };
    Ok(SynthesisResult { continuous, discrete, stable, proper: true, notes })
}

fn fmt_roots(roots: &[Complex64]) -> String {
    if roots.is_empty() {
        return "none".into();
    }
    roots
        .iter()
        .map(|r| {
            if r.im.abs() < 1e-12 {
                format!("{:.6}", r.re)
            } else {
                format!("{:.6}{:+.6}i", r.re, r.im)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    #[test]
    fn self_division_cancels_to_minus_one() {
        let g = RationalTf::new(vec![-0.6325, -0.01147], vec![1.0, 16.87, 0.6216]).unwrap();
        let ff = rational_divide_negate(&g, &g).unwrap();
        assert_eq!(ff.num().len(), 1);
        assert_eq!(ff.den().len(), 1);
        assert_relative_eq!(ff.dc_gain(), -1.0, epsilon = 1e-8);
    }

    #[test]
    fn evaporator_to_valve_compensator_dc_gain() {
        let d = presets::dist_evap_to_out();
        let g = presets::valve_to_evap_out();
        let ff = rational_divide_negate(&d, &g).unwrap();
        let expected = (44.84 * 0.6216) / (45.58 * 0.01147);
        assert_relative_eq!(ff.dc_gain(), expected, max_relative = 1e-10);
        assert_eq!(ff.num().len() - 1, 2);
        assert_eq!(ff.den().len() - 1, 2);
    }

    #[test]
    fn rhp_plant_zero_flags_unstable() {
        // plant numerator zero at s = +1
        let g = RationalTf::new(vec![1.0, -1.0], vec![1.0, 3.0, 2.0]).unwrap();
        let d = RationalTf::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let res = synthesize_ff(&d, &g, 1.0, Method::Tustin).unwrap();
        assert!(!res.stable);
        assert!(res.discrete.is_none());
    }

    #[test]
    fn improper_pair_is_rejected_with_degree() {
        // d relative degree 0, g relative degree 2: excess 2
        let d = RationalTf::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let g = RationalTf::new(vec![1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let err = rational_divide_negate(&d, &g).unwrap_err();
        assert!(err.to_string().contains("degree 2"), "{err}");
    }

    #[test]
    fn zero_disturbance_gives_zero_compensator() {
        let d = RationalTf::new(vec![0.0], vec![1.0, 1.0]).unwrap();
        let g = RationalTf::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let ff = rational_divide_negate(&d, &g).unwrap();
        assert_eq!(ff.num(), &[0.0]);
    }

    #[test]
    fn dc_consistency_for_all_paper_pairs() {
        for (d, g) in presets::disturbance_plant_pairs() {
            let ff = rational_divide_negate(&d, &g).unwrap();
            let residual = ff.dc_gain() * g.dc_gain() + d.dc_gain();
            assert!(
                residual.abs() <= 1e-10 * d.dc_gain().abs(),
                "dc residual {residual} for pair"
            );
        }
    }

    #[test]
    fn degree_bookkeeping() {
        for (d, g) in presets::disturbance_plant_pairs() {
            let ff = rational_divide_negate(&d, &g).unwrap();
            let rel_ff = (ff.den().len() - 1) as isize - (ff.num().len() - 1) as isize;
            let expected = (g.num().len() as isize - g.den().len() as isize)
                + (d.den().len() as isize - d.num().len() as isize);
            assert_eq!(rel_ff, expected);
        }
    }

    #[test]
    fn discrete_cancellation_is_exact_under_tustin() {
        // when the model equals the plant, injecting the synthesized output
        // through the plant path removes the disturbance from the output
        for (d, g) in presets::disturbance_plant_pairs() {
            let res = synthesize_ff(&d, &g, 1.0, Method::Tustin).unwrap();
            let mut ff = res.discrete.unwrap();
            let mut plant = c2d(&g, 1.0, Method::Tustin).unwrap();
            let mut path = c2d(&d, 1.0, Method::Tustin).unwrap();
            let step = -3.0;
            for k in 0..600 {
                let u = ff.step(step);
                let y = plant.step(u) + path.step(step);
                assert!(
                    y.abs() < 1e-8 * step.abs(),
                    "residual {y} at sample {k}"
                );
            }
        }
    }
}
