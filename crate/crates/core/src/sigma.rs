//! Two-scale convergence diagnostics.
//!
//! A sequence `u_eps` converges weakly two-scale to `u_0(x, y)` when
//!
//! ```text
//! int u_eps(x) psi(x, x/eps) dx  ->  int int u_0(x, y) psi(x, y) dx dy
//! ```
//!
//! for every admissible `psi`. Only a finite family of separable test
//! functions `phi(x) w(y) chi(t)` can be checked, so every report here is a
//! statement about the configured family and nothing more.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::convolve::{conv_macro, double_conv};
use crate::error::{invalid, Error, Result};
use crate::grid::{sample_trace, MacroField, TwoScaleField};
use crate::micro::MicroFunction;
use crate::profile::Profile;
use crate::sum::pairwise_sum_by;

/// Tolerance for integrality of `t / eps` and `t / h`.
const INTEGRALITY: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeFactor {
    /// `sum_k coeffs[k] t^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `cos(omega t + phase)`.
    Cosine {
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl Default for TimeFactor {
    fn default() -> Self {
        TimeFactor::Polynomial { coeffs: vec![1.0] }
    }
}

impl TimeFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFactor::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            TimeFactor::Cosine { omega, phase } => (omega * t + phase).cos(),
        }
    }
}

/// Separable test function `phi(x) w(y) chi(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub label: String,
    pub macro_factor: Profile,
    pub micro: MicroFunction,
    pub time: TimeFactor,
}

impl TestFunction {
    pub fn new(label: impl Into<String>, macro_factor: Profile, micro: MicroFunction) -> Self {
        TestFunction {
            label: label.into(),
            macro_factor,
            micro,
            time: TimeFactor::default(),
        }
    }

    pub fn with_time(mut self, time: TimeFactor) -> Self {
        self.time = time;
        self
    }

    /// `psi^eps(x_i) = phi(x_i) w(x_i / eps)` on the grid of `like`.
    pub fn trace(&self, eps: f64, like: &MacroField) -> Result<MacroField> {
        sample_trace(&self.macro_factor, &self.micro, eps, like.grid())
    }

    /// `phi(x_i) w(y_j)` on the product grid of `like`.
    pub fn two_scale(&self, like: &TwoScaleField) -> Result<TwoScaleField> {
        let w = self.micro.cell_samples(like.cell())?;
        let phi = MacroField::sample(*like.macro_grid(), &self.macro_factor);
        TwoScaleField::tensor(&phi, *like.cell(), &w)
    }
}

/// `int u(x) psi^eps(x) dx`.
pub fn weak_sigma_pairing(u: &MacroField, psi: &TestFunction, eps: f64) -> Result<f64> {
    u.dot(&psi.trace(eps, u)?)
}

/// `int int u0(x, y) phi(x) w(y) dx dy`.
pub fn limit_pairing(u0: &TwoScaleField, psi: &TestFunction) -> Result<f64> {
    two_scale_dot(u0, &psi.two_scale(u0)?)
}

/// Product-grid inner product.
pub fn two_scale_dot(a: &TwoScaleField, b: &TwoScaleField) -> Result<f64> {
    a.same_grids(b)?;
    let (x, y) = (a.values(), b.values());
    Ok(a.node_weight() * pairwise_sum_by(x.len(), &|i| x[i] * y[i]))
}

/// Composite trapezoid rule on equi-spaced `times`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return invalid("times and values differ in length");
    }
    if times.len() < 2 {
        return Ok(0.0);
    }
    let dt = times[1] - times[0];
    if dt.is_nan() || dt <= 0.0 || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return invalid("trapezoid rule needs strictly increasing equi-spaced times");
    }
    let n = values.len();
    let inner = pairwise_sum_by(n, &|i| {
        if i == 0 || i == n - 1 {
            0.5 * values[i]
        } else {
            values[i]
        }
    });
    Ok(dt * inner)
}

/// `int_0^T int u_eps(x, t) psi(x, t, x/eps) dx dt` by the trapezoid rule in time.
pub fn spacetime_pairing(times: &[f64], states: &[MacroField], psi: &TestFunction, eps: f64) -> Result<f64> {
    if states.is_empty() {
        return invalid("empty trajectory");
    }
    if times.len() != states.len() {
        return invalid("one time per state is required");
    }
    let trace = psi.trace(eps, &states[0])?;
    let slices = states
        .iter()
        .zip(times)
        .map(|(u, t)| Ok(psi.time.eval(*t) * u.dot(&trace)?))
        .collect::<Result<Vec<f64>>>()?;
    trapezoid(times, &slices)
}

/// `int_0^T int int u0(x, t, y) psi(x, t, y) dx dy dt` by the trapezoid rule in time.
pub fn spacetime_limit_pairing(times: &[f64], states: &[TwoScaleField], psi: &TestFunction) -> Result<f64> {
    if states.is_empty() {
        return invalid("empty trajectory");
    }
    if times.len() != states.len() {
        return invalid("one time per state is required");
    }
    let test = psi.two_scale(&states[0])?;
    let slices = states
        .iter()
        .zip(times)
        .map(|(u, t)| Ok(psi.time.eval(*t) * two_scale_dot(u, &test)?))
        .collect::<Result<Vec<f64>>>()?;
    trapezoid(times, &slices)
}

/// Pairings, their limits and the errors along a schedule of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    pub label: String,
    pub eps: Vec<f64>,
    pub pairings: Vec<f64>,
    pub limits: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log eps`, first point dropped.
    pub rate: Option<f64>,
    /// Errors strictly decrease after the first entry.
    pub pass: bool,
}

impl PairingReport {
    pub fn new(label: impl Into<String>, eps: Vec<f64>, pairings: Vec<f64>, limits: Vec<f64>) -> Result<Self> {
        if eps.len() != pairings.len() || eps.len() != limits.len() {
            return invalid("schedule, pairings and limits differ in length");
        }
        check_schedule(&eps)?;
        let errors: Vec<f64> = pairings.iter().zip(&limits).map(|(p, l)| (p - l).abs()).collect();
        let rate = fit_rate(&eps, &errors);
        let pass = strictly_decreasing(&errors, 1);
        Ok(PairingReport {
            label: label.into(),
            eps,
            pairings,
            limits,
            errors,
            rate,
            pass,
        })
    }

    pub fn final_error(&self) -> f64 {
        *self.errors.last().unwrap_or(&0.0)
    }

    /// `eps,pairing,limit,abs_error` table with round-trip float formatting.
    pub fn csv(&self) -> String {
        let mut out = String::from("eps,pairing,limit,abs_error\n");
        for i in 0..self.eps.len() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.eps[i], self.pairings[i], self.limits[i], self.errors[i]
            );
        }
        out
    }

    /// `key=value` summary lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "label={}", self.label);
        let _ = writeln!(out, "points={}", self.eps.len());
        let _ = writeln!(out, "final_error={:.17e}", self.final_error());
        match self.rate {
            Some(r) => {
                let _ = writeln!(out, "rate={r:.6}");
            }
            None => out.push_str("rate=none\n"),
        }
        let _ = writeln!(out, "strictly_decreasing={}", self.pass);
        out.push_str("scope=verified on the configured test family only\n");
        out
    }
}

fn check_schedule(eps: &[f64]) -> Result<()> {
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return invalid("scales must be positive and finite");
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("scale schedule must be strictly decreasing");
    }
    Ok(())
}

/// `values[skip..]` is strictly decreasing.
pub fn strictly_decreasing(values: &[f64], skip: usize) -> bool {
    values
        .iter()
        .skip(skip)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] < w[0])
}

/// Each step after the first either decreases or is already within `tol`, and the last value is within `tol`.
fn settles(values: &[f64], tol: f64) -> bool {
    let steps_ok = values
        .iter()
        .skip(1)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] < w[0] || *w[1] <= tol);
    steps_ok && values.last().is_none_or(|v| *v <= tol)
}

fn fit_rate(eps: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(errors)
        .skip(1)
        .filter(|(_, e)| **e > 0.0)
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 2 || pts.len() + 1 < eps.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn check_sequence(seq: &[(f64, MacroField)]) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return invalid("empty sequence");
    }
    let eps: Vec<f64> = seq.iter().map(|(e, _)| *e).collect();
    check_schedule(&eps)?;
    Ok(eps)
}

/// Weak pairings against `psi` along `seq`, compared with the limit pairing of `u0`.
pub fn weak_sigma_check(seq: &[(f64, MacroField)], u0: &TwoScaleField, psi: &TestFunction) -> Result<PairingReport> {
    let eps = check_sequence(seq)?;
    let limit = limit_pairing(u0, psi)?;
    let pairings = seq
        .iter()
        .map(|(e, u)| weak_sigma_pairing(u, psi, *e))
        .collect::<Result<Vec<f64>>>()?;
    PairingReport::new(psi.label.clone(), eps.clone(), pairings, vec![limit; eps.len()])
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongSigmaReport {
    pub weak: Vec<PairingReport>,
    /// `||u_eps||_p` against `||u0||_{L^p(Q x Y)}`.
    pub norms: PairingReport,
    pub tolerance: f64,
    pub pass: bool,
}

/// Weak pairings over `family` together with the norm gap `| ||u_eps||_p - ||u0||_p |`.
pub fn strong_sigma_check(
    seq: &[(f64, MacroField)],
    u0: &TwoScaleField,
    p: f64,
    family: &[TestFunction],
    tolerance: f64,
) -> Result<StrongSigmaReport> {
    if p < 1.0 {
        return invalid(format!("norm exponent must be >= 1, got {p}"));
    }
    let eps = check_sequence(seq)?;
    let weak = family
        .iter()
        .map(|psi| weak_sigma_check(seq, u0, psi))
        .collect::<Result<Vec<_>>>()?;
    let target = u0.lp_norm(p);
    let norms = PairingReport::new(
        format!("L{p} norm"),
        eps.clone(),
        seq.iter().map(|(_, u)| u.lp_norm(p)).collect(),
        vec![target; eps.len()],
    )?;
    let pass = weak.iter().all(|r| settles(&r.errors, tolerance)) && settles(&norms.errors, tolerance);
    Ok(StrongSigmaReport {
        weak,
        norms,
        tolerance,
        pass,
    })
}

fn integral_ratio(a: f64, b: f64) -> Option<i64> {
    let r = a / b;
    let n = r.round();
    ((r - n).abs() <= INTEGRALITY * r.abs().max(1.0)).then_some(n as i64)
}

/// Pairs the translates `u_eps(. + t)` against `psi` and compares with the
/// pairing of `u0(. + t, .)`.
///
/// Every `t / eps` must be an integer vector, so the micro phase of the
/// translation vanishes on the torus, and `t` must be a whole number of grid
/// steps.
pub fn translate_limit_check(
    seq: &[(f64, MacroField)],
    u0: &TwoScaleField,
    shift: &[f64],
    psi: &TestFunction,
) -> Result<PairingReport> {
    let eps = check_sequence(seq)?;
    let grid = *u0.macro_grid();
    if shift.len() != grid.dim() {
        return invalid("shift has the wrong dimension");
    }
    for (e, _) in seq {
        if let Some(t) = shift.iter().find(|t| integral_ratio(**t, *e).is_none()) {
            return invalid(format!("t / eps = {} is not an integer at eps = {e}", t / e));
        }
    }
    let steps = shift
        .iter()
        .map(|t| integral_ratio(*t, grid.spacing()))
        .collect::<Option<Vec<i64>>>()
        .ok_or_else(|| Error::InvalidInput("shift is not a whole number of grid steps".into()))?;
    let limit = limit_pairing(&u0.roll_macro(&steps), psi)?;
    let pairings = seq
        .iter()
        .map(|(e, u)| weak_sigma_pairing(&u.roll(&steps), psi, *e))
        .collect::<Result<Vec<f64>>>()?;
    PairingReport::new(
        format!("translate {}", psi.label),
        eps.clone(),
        pairings,
        vec![limit; eps.len()],
    )
}

/// Pairs `u_eps * v_eps` against `psi` and compares with the pairing of `u0 ** v0`.
pub fn convolution_limit_check(
    seq_u: &[(f64, MacroField)],
    seq_v: &[(f64, MacroField)],
    u0: &TwoScaleField,
    v0: &TwoScaleField,
    psi: &TestFunction,
) -> Result<PairingReport> {
    let eps = check_sequence(seq_u)?;
    if seq_v.len() != seq_u.len() || seq_v.iter().zip(seq_u).any(|(a, b)| a.0 != b.0) {
        return invalid("both sequences must share the same schedule");
    }
    let limit = limit_pairing(&double_conv(u0, v0)?, psi)?;
    let pairings = seq_u
        .iter()
        .zip(seq_v)
        .map(|((e, u), (_, v))| weak_sigma_pairing(&conv_macro(u, v)?, psi, *e))
        .collect::<Result<Vec<f64>>>()?;
    PairingReport::new(
        format!("convolution {}", psi.label),
        eps.clone(),
        pairings,
        vec![limit; eps.len()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellGrid, MacroGrid};

    #[test]
    fn time_factor_eval() {
        let p = TimeFactor::Polynomial {
            coeffs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(TimeFactor::default().eval(5.0), 1.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &v).unwrap() - 2.5).abs() < 1e-14);
        assert!(trapezoid(&[0.0, 0.1, 0.3], &[1.0; 3]).is_err());
    }

    #[test]
    fn report_rejects_non_decreasing_schedule() {
        assert!(PairingReport::new("x", vec![0.25, 0.5], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn rate_of_power_law() {
        let eps = vec![0.5, 0.25, 0.125, 0.0625];
        let err: Vec<f64> = eps.iter().map(|e: &f64| 3.0 * e * e).collect();
        let r = PairingReport::new("p", eps, err, vec![0.0; 4]).unwrap();
        assert!((r.rate.unwrap() - 2.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn csv_header_and_rows() {
        let r = PairingReport::new("p", vec![0.5, 0.25], vec![1.0, 0.5], vec![0.0, 0.0]).unwrap();
        let csv = r.csv();
        assert!(csv.starts_with("eps,pairing,limit,abs_error\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn translate_rejects_non_integral_schedule() {
        let g = MacroGrid::new(1, 8.0, 256).unwrap();
        let c = CellGrid::new(1, 16).unwrap();
        let u0 = TwoScaleField::zeros(g, c).unwrap();
        let seq: Vec<(f64, MacroField)> = [1.0 / 1.5, 1.0 / 2.5]
            .iter()
            .map(|e| (*e, MacroField::zeros(g)))
            .collect();
        let psi = TestFunction::new("one", Profile::bump(0.0, 1.0), MicroFunction::constant(1, 1.0));
        assert!(translate_limit_check(&seq, &u0, &[1.0], &psi).is_err());
    }
}
