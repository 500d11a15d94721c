//! Time integration of `du/dt = -u + drive(u)`.
//!
//! [`Integrator::Picard`] iterates the integral map
//!
//! ```text
//! K(phi)(t) = phi(t_k) + int_{t_k}^t (drive(phi) - phi)(s) ds
//! ```
//!
//! on consecutive subintervals of length `rho`, with the time integral taken
//! by the composite trapezoid rule on the step mesh, and chains the
//! subintervals through their endpoint states. [`Integrator::Rk4`] is the
//! classical four-stage method on the same right-hand side.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::grid::{lp, CellGrid, MacroField, MacroGrid, TwoScaleField};
use crate::model::{Dynamics, FiringRate, HeteroOperator, HomogOperator, KernelSpec};

/// Consecutive sweeps with ratio at least one before a subinterval is declared non-contracting.
const NON_CONTRACTING_SWEEPS: usize = 3;

/// Differences below this multiple of the state size are rounding noise and
/// are not used to form contraction ratios.
const RATIO_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    step: f64,
    stride: usize,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, step: f64, stride: usize) -> Result<Self> {
        if !(step > 0.0 && step <= horizon && horizon.is_finite()) {
            return invalid(format!("time grid needs 0 < dt <= T, got dt = {step}, T = {horizon}"));
        }
        let ratio = horizon / step;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return invalid(format!("T / dt = {ratio} is not an integer"));
        }
        if stride == 0 {
            return invalid("output stride must be at least 1");
        }
        Ok(TimeGrid {
            horizon,
            step,
            stride,
            steps: steps as usize,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.step
    }

    /// Steps at which states are reported: every `stride`-th step and the last one.
    pub fn is_output(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride) || step == self.steps
    }

    pub fn output_steps(&self) -> Vec<usize> {
        (0..=self.steps).filter(|s| self.is_output(*s)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardConfig {
    /// Subinterval length.
    pub rho: f64,
    pub max_sweeps: usize,
    /// Stop once successive sweeps differ by less than this in the `max_t (L1 + L2)` norm.
    pub tolerance: f64,
    /// Reject configurations with `2 (k1 + 1) rho >= 1` before iterating.
    pub enforce_bound: bool,
}

impl PicardConfig {
    /// `rho = 0.9 / (2 (k1 + 1))`.
    pub fn default_for(k1: f64) -> Self {
        PicardConfig {
            rho: 0.9 / (2.0 * (k1 + 1.0)),
            max_sweeps: 200,
            tolerance: 1e-11,
            enforce_bound: true,
        }
    }

    /// `2 (k1 + 1) rho`.
    pub fn contraction_bound(&self, k1: f64) -> f64 {
        2.0 * (k1 + 1.0) * self.rho
    }

    pub fn validate(&self, k1: f64) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return invalid(format!("subinterval length must be positive, got {}", self.rho));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return invalid("fixed-point tolerance must be positive");
        }
        if self.max_sweeps < 2 {
            return invalid("at least two sweeps are needed to measure convergence");
        }
        let bound = self.contraction_bound(k1);
        if self.enforce_bound && bound >= 1.0 {
            return Err(Error::Config(format!(
                "subinterval length violates 2(k1+1)ρ<1: 2({k1}+1)*{} = {bound}",
                self.rho
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    Picard(PicardConfig),
    Rk4,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Picard(_) => "picard",
            Integrator::Rk4 => "rk4",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubintervalRecord {
    pub start: f64,
    pub end: f64,
    pub sweeps: usize,
    /// `||phi^{j+1} - phi^j||_X / ||phi^j - phi^{j-1}||_X` for every sweep where the denominator is above rounding.
    pub ratios: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub integrator: &'static str,
    pub times: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub subintervals: Vec<SubintervalRecord>,
    /// Smallest nodal value over all reported states.
    pub min_value: f64,
    pub rhs_evaluations: usize,
    pub wall_time: f64,
}

impl SolveReport {
    fn new(integrator: &'static str) -> Self {
        SolveReport {
            integrator,
            times: Vec::new(),
            l1: Vec::new(),
            l2: Vec::new(),
            subintervals: Vec::new(),
            min_value: f64::INFINITY,
            rhs_evaluations: 0,
            wall_time: 0.0,
        }
    }

    /// `sup_t (||u||_1 + ||u||_2)` over the reported times.
    pub fn sup_l1_l2(&self) -> f64 {
        self.l1.iter().zip(&self.l2).map(|(a, b)| a + b).fold(0.0, f64::max)
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.subintervals
            .iter()
            .flat_map(|s| s.ratios.iter().copied())
            .reduce(f64::max)
    }

    pub fn total_sweeps(&self) -> usize {
        self.subintervals.iter().map(|s| s.sweeps).sum()
    }

    fn record(&mut self, t: f64, state: &[f64], weight: f64) {
        self.times.push(t);
        self.l1.push(lp(state, weight, 1.0));
        self.l2.push(lp(state, weight, 2.0));
        self.min_value = state.iter().fold(self.min_value, |m, v| m.min(*v));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<F> {
    pub times: Vec<f64>,
    pub states: Vec<F>,
    pub report: SolveReport,
}

impl<F> Trajectory<F> {
    pub fn last(&self) -> &F {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }
}

fn x_norm(a: &[f64], b: &[f64], weight: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(a.iter().zip(b).map(|(x, y)| x - y));
    lp(scratch, weight, 1.0) + lp(scratch, weight, 2.0)
}

fn check_finite(state: &[f64], t: f64) -> Result<()> {
    if state.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlowUp { time: t })
    }
}

/// Integrates `dynamics` from `init`, calling `observer(t, state)` at every output step.
pub fn integrate<D: Dynamics + ?Sized>(
    dynamics: &D,
    init: &[f64],
    tg: &TimeGrid,
    integrator: &Integrator,
    mut observer: impl FnMut(f64, &[f64]) -> Result<()>,
) -> Result<SolveReport> {
    if init.len() != dynamics.len() {
        return Err(Error::GridMismatch(format!(
            "initial state has {} values, dynamics expects {}",
            init.len(),
            dynamics.len()
        )));
    }
    check_finite(init, 0.0)?;
    let clock = Instant::now();
    let mut report = SolveReport::new(integrator.name());
    let weight = dynamics.weight();
    report.record(0.0, init, weight);
    observer(0.0, init)?;
    let mut emit = |report: &mut SolveReport, step: usize, state: &[f64]| -> Result<()> {
        let t = tg.time(step);
        report.record(t, state, weight);
        observer(t, state)
    };
    match integrator {
        Integrator::Rk4 => rk4_loop(dynamics, init, tg, &mut report, &mut emit)?,
        Integrator::Picard(pc) => picard_loop(dynamics, init, tg, pc, &mut report, &mut emit)?,
    }
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok(report)
}

type Emit<'a> = dyn FnMut(&mut SolveReport, usize, &[f64]) -> Result<()> + 'a;

fn rk4_loop<D: Dynamics + ?Sized>(
    d: &D,
    init: &[f64],
    tg: &TimeGrid,
    report: &mut SolveReport,
    emit: &mut Emit<'_>,
) -> Result<()> {
    let dt = tg.step();
    let mut u = init.to_vec();
    let n = u.len();
    let mut stage = vec![0.0; n];
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for step in 1..=tg.steps() {
        d.rhs_into(&u, &mut k[0]);
        for (s, (u, k)) in stage.iter_mut().zip(u.iter().zip(&k[0])) {
            *s = u + 0.5 * dt * k;
        }
        d.rhs_into(&stage, &mut k[1]);
        for (s, (u, k)) in stage.iter_mut().zip(u.iter().zip(&k[1])) {
            *s = u + 0.5 * dt * k;
        }
        d.rhs_into(&stage, &mut k[2]);
        for (s, (u, k)) in stage.iter_mut().zip(u.iter().zip(&k[2])) {
            *s = u + dt * k;
        }
        d.rhs_into(&stage, &mut k[3]);
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        report.rhs_evaluations += 4;
        check_finite(&u, tg.time(step))?;
        if tg.is_output(step) {
            emit(report, step, &u)?;
        }
    }
    Ok(())
}

fn picard_loop<D: Dynamics + ?Sized>(
    d: &D,
    init: &[f64],
    tg: &TimeGrid,
    pc: &PicardConfig,
    report: &mut SolveReport,
    emit: &mut Emit<'_>,
) -> Result<()> {
    let k1 = d.lipschitz();
    pc.validate(k1)?;
    let bound = pc.contraction_bound(k1);
    let dt = tg.step();
    let per_sub = ((pc.rho / dt) * (1.0 + 1e-12)).floor().max(1.0) as usize;
    let weight = d.weight();
    let mut scratch = Vec::new();
    let mut f_prev = vec![0.0; init.len()];
    let mut f_m = vec![0.0; init.len()];
    let mut left = init.to_vec();
    let mut step0 = 0;
    while step0 < tg.steps() {
        let n = per_sub.min(tg.steps() - step0);
        let (start, end) = (tg.time(step0), tg.time(step0 + n));
        let f0 = d.rhs(&left);
        report.rhs_evaluations += 1;
        let mut phi: Vec<Vec<f64>> = vec![left.clone(); n + 1];
        let mut next = phi.clone();
        let scale = RATIO_FLOOR * (1.0 + lp(&left, weight, 1.0) + lp(&left, weight, 2.0));
        let mut prev_diff: Option<f64> = None;
        let mut ratios = Vec::new();
        let mut over_one = 0;
        let mut sweeps = 0;
        let residual = loop {
            sweeps += 1;
            f_prev.copy_from_slice(&f0);
            let mut diff = 0.0_f64;
            for m in 1..=n {
                d.rhs_into(&phi[m], &mut f_m);
                let (head, tail) = next.split_at_mut(m);
                for (i, v) in tail[0].iter_mut().enumerate() {
                    *v = head[m - 1][i] + 0.5 * dt * (f_prev[i] + f_m[i]);
                }
                check_finite(&tail[0], tg.time(step0 + m))?;
                diff = diff.max(x_norm(&tail[0], &phi[m], weight, &mut scratch));
                std::mem::swap(&mut f_prev, &mut f_m);
            }
            report.rhs_evaluations += n;
            std::mem::swap(&mut phi, &mut next);
            if let Some(p) = prev_diff.filter(|p| *p > scale) {
                let r = diff / p;
                ratios.push(r);
                over_one = if r >= 1.0 { over_one + 1 } else { 0 };
                if over_one >= NON_CONTRACTING_SWEEPS {
                    return Err(Error::NonContraction {
                        start,
                        end,
                        ratio: r,
                        bound,
                    });
                }
            }
            if diff < pc.tolerance {
                break diff;
            }
            if sweeps >= pc.max_sweeps {
                return Err(Error::NotConverged {
                    start,
                    end,
                    sweeps,
                    residual: diff,
                });
            }
            prev_diff = Some(diff);
        };
        report.subintervals.push(SubintervalRecord {
            start,
            end,
            sweeps,
            ratios,
            residual,
        });
        for (m, state) in phi.iter().enumerate().skip(1) {
            if tg.is_output(step0 + m) {
                emit(report, step0 + m, state)?;
            }
        }
        left = phi.swap_remove(n);
        step0 += n;
    }
    Ok(())
}

fn macro_trajectory(
    op: &HeteroOperator,
    u0: &MacroField,
    tg: &TimeGrid,
    integrator: &Integrator,
) -> Result<Trajectory<MacroField>> {
    if u0.grid() != op.grid() {
        return Err(Error::GridMismatch("initial datum lives on another grid".into()));
    }
    let grid = *op.grid();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let report = integrate(op, u0.values(), tg, integrator, |t, s| {
        times.push(t);
        states.push(MacroField::from_raw(grid, s.to_vec()));
        Ok(())
    })?;
    Ok(Trajectory { times, states, report })
}

/// Solves the heterogeneous equation at scale `eps` by Picard iteration.
pub fn picard_solve(
    kernel: &KernelSpec,
    firing: &FiringRate,
    eps: f64,
    u0: &MacroField,
    tg: &TimeGrid,
    pc: &PicardConfig,
) -> Result<Trajectory<MacroField>> {
    let op = HeteroOperator::new(kernel, firing, eps, u0.grid())?;
    macro_trajectory(&op, u0, tg, &Integrator::Picard(*pc))
}

/// Solves the heterogeneous equation at scale `eps` with classical RK4.
pub fn rk4_solve(
    kernel: &KernelSpec,
    firing: &FiringRate,
    eps: f64,
    u0: &MacroField,
    tg: &TimeGrid,
) -> Result<Trajectory<MacroField>> {
    let op = HeteroOperator::new(kernel, firing, eps, u0.grid())?;
    macro_trajectory(&op, u0, tg, &Integrator::Rk4)
}

/// Solves the homogenized equation from the `y`-constant lift of `u0`.
pub fn homog_solve(
    kernel: &KernelSpec,
    firing: &FiringRate,
    u0: &MacroField,
    tg: &TimeGrid,
    integrator: &Integrator,
    cell: &CellGrid,
) -> Result<Trajectory<TwoScaleField>> {
    let grid: MacroGrid = *u0.grid();
    let op = HomogOperator::new(kernel, firing, &grid, cell)?;
    let init = TwoScaleField::lift(u0, *cell)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let report = integrate(&op, init.values(), tg, integrator, |t, s| {
        times.push(t);
        states.push(TwoScaleField::from_raw(grid, *cell, s.to_vec()));
        Ok(())
    })?;
    Ok(Trajectory { times, states, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AprioriReport {
    pub k1: f64,
    pub c1: f64,
    /// `2 c1 / k1`, below which the norm is not required to follow the exponential envelope.
    pub threshold: f64,
    /// `(t, ||u(t)||_2, bound(t))` wherever the bound fails.
    pub violations: Vec<(f64, f64, f64)>,
    pub sup_l1_l2: f64,
    pub pass: bool,
}

/// Checks `||u(t)||_2 <= max(2 c1 / k1, exp(1.5 k1 t) ||u(0)||_2) (1 + 1e-6)` along a solve.
pub fn apriori_monitor(report: &SolveReport, firing: &FiringRate, eps: f64, grid: &MacroGrid) -> Result<AprioriReport> {
    if report.times.is_empty() {
        return invalid("a priori monitor needs a nonempty trajectory");
    }
    let k1 = firing.k1();
    let c1 = firing.c1(eps, grid)?;
    let threshold = if k1 > 0.0 {
        2.0 * c1 / k1
    } else if c1 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let n0 = report.l2[0];
    let violations: Vec<(f64, f64, f64)> = report
        .times
        .iter()
        .zip(&report.l2)
        .filter_map(|(&t, &n)| {
            let bound = threshold.max((1.5 * k1 * t).exp() * n0) * (1.0 + 1e-6);
            (n > bound).then_some((t, n, bound))
        })
        .collect();
    Ok(AprioriReport {
        k1,
        c1,
        threshold,
        pass: violations.is_empty(),
        violations,
        sup_l1_l2: report.sup_l1_l2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::micro::MicroFunction;
    use crate::model::{Activation, KernelTerm};
    use crate::profile::Profile;

    /// `du/dt = -a u` in one scalar unknown.
    struct Decay(f64);

    impl Dynamics for Decay {
        fn len(&self) -> usize {
            1
        }
        fn weight(&self) -> f64 {
            1.0
        }
        fn lipschitz(&self) -> f64 {
            0.0
        }
        fn drive_into(&self, state: &[f64], out: &mut [f64]) {
            out[0] = (1.0 - self.0) * state[0];
        }
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(1.0, 0.3, 1).is_err());
        assert!(TimeGrid::new(1.0, 2.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 0.1, 0).is_err());
        let tg = TimeGrid::new(1.0, 0.1, 3).unwrap();
        assert_eq!(tg.output_steps(), vec![0, 3, 6, 9, 10]);
    }

    #[test]
    fn scalar_decay_both_integrators() {
        let tg = TimeGrid::new(1.0, 1e-3, 100).unwrap();
        for integ in [Integrator::Rk4, Integrator::Picard(PicardConfig::default_for(0.0))] {
            let mut last = 0.0;
            let r = integrate(&Decay(1.0), &[1.0], &tg, &integ, |_, s| {
                last = s[0];
                Ok(())
            })
            .unwrap();
            assert_eq!(r.times.len(), 11);
            assert!((last - (-1.0_f64).exp()).abs() < 1e-7, "{}: {last}", integ.name());
        }
    }

    #[test]
    fn oversized_subinterval_is_rejected_or_detected() {
        let tg = TimeGrid::new(10.0, 1e-2, 100).unwrap();
        let mut pc = PicardConfig::default_for(0.0);
        pc.rho = 1.0;
        let err = integrate(&Decay(1.0), &[1.0], &tg, &Integrator::Picard(pc), |_, _| Ok(())).unwrap_err();
        assert!(err.to_string().contains("2(k1+1)ρ<1"));
        pc.rho = 8.0;
        pc.enforce_bound = false;
        let err = integrate(&Decay(1.0), &[1.0], &tg, &Integrator::Picard(pc), |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::NonContraction { .. }), "{err}");
        assert!(err.to_string().contains("2(k1+1)ρ<1"));
    }

    #[test]
    fn sweep_budget() {
        let tg = TimeGrid::new(1.0, 1e-2, 10).unwrap();
        let pc = PicardConfig {
            max_sweeps: 2,
            tolerance: 1e-300,
            ..PicardConfig::default_for(0.0)
        };
        let err = integrate(&Decay(1.0), &[1.0], &tg, &Integrator::Picard(pc), |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    #[test]
    fn blow_up_is_reported() {
        let tg = TimeGrid::new(1.0, 0.5, 1).unwrap();
        let err = integrate(&Decay(-1e308), &[1e308], &tg, &Integrator::Rk4, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }

    #[test]
    fn zero_gain_apriori() {
        let grid = MacroGrid::new(1, 8.0, 64).unwrap();
        let kernel = KernelSpec::new(
            vec![KernelTerm {
                profile: Profile::gaussian(0.5),
                micro: MicroFunction::constant(1, 1.0),
            }],
            0.5,
        )
        .unwrap();
        let firing = FiringRate::new(MicroFunction::constant(1, 0.0), Activation::sigmoid(2.0, 0.5)).unwrap();
        let u0 = MacroField::sample(grid, &Profile::gaussian(1.0));
        let tg = TimeGrid::new(1.0, 1e-2, 10).unwrap();
        let traj = rk4_solve(&kernel, &firing, 0.5, &u0, &tg).unwrap();
        let rep = apriori_monitor(&traj.report, &firing, 0.5, &grid).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.threshold, 0.0);
        let expected = (-1.0_f64).exp() * u0.lp_norm(2.0);
        assert!((traj.report.l2.last().unwrap() - expected).abs() < 1e-9);
    }
}
