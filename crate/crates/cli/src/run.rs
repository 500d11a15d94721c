//! Orchestration of the five modes and their artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use neurohom::sigma::{trapezoid, two_scale_dot};
use neurohom::solver::integrate;
use neurohom::{
    apriori_monitor, picard_solve, rk4_solve, AprioriReport, HomogOperator, Integrator, MacroField, PairingReport,
    SolveReport, Trajectory, TwoScaleField,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, IntegratorChoice, Mode};
use crate::report::{norms_csv, num, slug, solve_record, subintervals_csv, write_dump, write_text};
use crate::validate::validate;
use crate::{verify, CliError, Outcome};

/// Largest relative spread of `sup_t (||u||_1 + ||u||_2)` across scales still counted as uniform.
pub const UNIFORM_SPREAD: f64 = 0.2;

/// Pairing errors below this multiple of `1 + |limit|` are rounding noise.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Every error of `r` is at the rounding floor, so strict decrease is not observable.
pub fn at_rounding_floor(r: &PairingReport) -> bool {
    r.errors
        .iter()
        .zip(&r.limits)
        .all(|(e, l)| *e <= ROUNDING_FLOOR * (1.0 + l.abs()))
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Seed for the randomized property suites.
    pub seed: u64,
}

/// One heterogeneous solve inside a sweep.
#[derive(Clone, Debug)]
pub struct EpsRecord {
    pub eps: f64,
    pub report: SolveReport,
    pub apriori: AprioriReport,
    /// `sup_t ||u_eps(t) - u_0(t, ., ./eps)||_2`.
    pub corrector_l2_sup: f64,
    /// The same difference at the final time.
    pub corrector_l2_final: f64,
    /// Largest space-time pairing of the difference against the test family.
    pub corrector_weak: f64,
    pub final_state: MacroField,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub homog: SolveReport,
    pub homog_final: TwoScaleField,
    /// Primary integrator first; with `both`, the second integrator follows.
    pub records: Vec<Vec<EpsRecord>>,
    /// `sup_t ||u_picard - u_rk4||_2` per scale when both integrators ran.
    pub integrator_gap: Option<Vec<f64>>,
    pub pairings: Vec<PairingReport>,
    /// Relative spread of `sup_t (||u||_1 + ||u||_2)` across scales.
    pub norm_spread: f64,
}

impl SweepResult {
    pub fn primary(&self) -> &[EpsRecord] {
        &self.records[0]
    }

    /// Every pairing decreases strictly, or sits at the rounding floor throughout.
    pub fn pairings_pass(&self) -> bool {
        self.pairings.iter().all(|r| r.pass || at_rounding_floor(r))
    }

    pub fn apriori_pass(&self) -> bool {
        self.records.iter().flatten().all(|r| r.apriori.pass)
    }

    pub fn uniform_pass(&self) -> bool {
        self.norm_spread <= UNIFORM_SPREAD
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in self.pairings.iter().filter(|r| !r.pass && !at_rounding_floor(r)) {
            out.push(format!(
                "pairing errors for {} are not strictly decreasing: {:?}",
                r.label, r.errors
            ));
        }
        for r in self.records.iter().flatten().filter(|r| !r.apriori.pass) {
            out.push(format!(
                "a priori bound fails at eps = {} ({} times)",
                r.eps,
                r.apriori.violations.len()
            ));
        }
        if !self.uniform_pass() {
            out.push(format!(
                "norm spread {} across eps exceeds {UNIFORM_SPREAD}",
                self.norm_spread
            ));
        }
        out
    }
}

fn hetero(exp: &Experiment, eps: f64, integrator: &Integrator) -> Result<Trajectory<MacroField>, CliError> {
    let u0 = MacroField::sample(exp.grid, &exp.config.initial);
    let solved = match integrator {
        Integrator::Picard(pc) => picard_solve(&exp.kernel, &exp.firing, eps, &u0, &exp.time, pc),
        Integrator::Rk4 => rk4_solve(&exp.kernel, &exp.firing, eps, &u0, &exp.time),
    };
    solved.map_err(|source| CliError::Solve { eps, source })
}

/// Integrator for the homogenized problem; Picard keeps every state of a
/// subinterval on the product grid, so it is used only when requested alone.
fn homog_integrator(exp: &Experiment) -> Integrator {
    match exp.config.integrator {
        IntegratorChoice::Picard => Integrator::Picard(exp.picard),
        _ => Integrator::Rk4,
    }
}

/// Homogenized solve with the observables a sweep needs: limit pairings per
/// test function and corrector traces per scale at every output time.
struct HomogRun {
    report: SolveReport,
    final_state: TwoScaleField,
    limits: Vec<Vec<f64>>,
    traces: Vec<Vec<Vec<f64>>>,
}

fn homog_observed(exp: &Experiment) -> Result<HomogRun, CliError> {
    let u0 = MacroField::sample(exp.grid, &exp.config.initial);
    let init = TwoScaleField::lift(&u0, exp.cell)?;
    let op = HomogOperator::new(&exp.kernel, &exp.firing, &exp.grid, &exp.cell)?;
    let psis = exp
        .family
        .iter()
        .map(|p| p.two_scale(&init))
        .collect::<neurohom::Result<Vec<_>>>()?;
    let schedule = &exp.config.schedule;
    let mut limits = vec![Vec::new(); psis.len()];
    let mut traces = vec![Vec::new(); schedule.len()];
    let mut last = init.clone();
    let report = integrate(&op, init.values(), &exp.time, &homog_integrator(exp), |t, s| {
        let state = TwoScaleField::new(exp.grid, exp.cell, s.to_vec())?;
        for ((lim, psi), tf) in limits.iter_mut().zip(&psis).zip(&exp.family) {
            lim.push(tf.time.eval(t) * two_scale_dot(&state, psi)?);
        }
        for (tr, eps) in traces.iter_mut().zip(schedule) {
            tr.push(state.corrector_trace(*eps)?.into_values());
        }
        last = state;
        Ok(())
    })?;
    Ok(HomogRun {
        report,
        final_state: last,
        limits,
        traces,
    })
}

fn l2_diff(exp: &Experiment, a: &MacroField, b: &[f64]) -> Result<MacroField, CliError> {
    let d: Vec<f64> = a.values().iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(MacroField::new(exp.grid, d)?)
}

/// Solves every scale and the homogenized problem, then assembles the pairing reports.
pub fn sweep(exp: &Experiment) -> Result<SweepResult, CliError> {
    let schedule = exp.config.schedule.clone();
    let integrators = exp.config.integrators(exp.firing.k1());
    let jobs: Vec<(usize, f64, Integrator)> = integrators
        .iter()
        .enumerate()
        .flat_map(|(k, i)| schedule.iter().map(move |e| (k, *e, *i)))
        .collect();
    let (homog, solved) = rayon::join(
        || homog_observed(exp),
        || {
            jobs.par_iter()
                .map(|(_, eps, integ)| hetero(exp, *eps, integ))
                .collect::<Result<Vec<_>, CliError>>()
        },
    );
    let homog = homog.map_err(|e| match e {
        CliError::Core(source) => CliError::Config(format!("homogenized solve: {source}")),
        other => other,
    })?;
    let solved = solved?;
    let times = homog.report.times.clone();

    let mut records: Vec<Vec<EpsRecord>> = vec![Vec::new(); integrators.len()];
    let mut pair_values = vec![vec![0.0; schedule.len()]; exp.family.len()];
    for ((k, eps, _), traj) in jobs.iter().zip(&solved) {
        let e_idx = schedule.iter().position(|e| e == eps).expect("scale from the schedule");
        let mut l2 = Vec::with_capacity(times.len());
        let mut weak_series = vec![Vec::with_capacity(times.len()); exp.family.len()];
        let mut pair_series = vec![Vec::with_capacity(times.len()); exp.family.len()];
        let traces: Vec<MacroField> = exp
            .family
            .iter()
            .map(|psi| psi.trace(*eps, &traj.states[0]))
            .collect::<neurohom::Result<_>>()?;
        for (n, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
            let diff = l2_diff(exp, u, &homog.traces[e_idx][n])?;
            l2.push(diff.lp_norm(2.0));
            for (p, (psi, tr)) in exp.family.iter().zip(&traces).enumerate() {
                let chi = psi.time.eval(*t);
                pair_series[p].push(chi * u.dot(tr)?);
                weak_series[p].push(chi * diff.dot(tr)?);
            }
        }
        let mut weak: f64 = 0.0;
        for p in 0..exp.family.len() {
            weak = weak.max(trapezoid(&traj.times, &weak_series[p])?.abs());
            if *k == 0 {
                pair_values[p][e_idx] = trapezoid(&traj.times, &pair_series[p])?;
            }
        }
        records[*k].push(EpsRecord {
            eps: *eps,
            apriori: apriori_monitor(&traj.report, &exp.firing, *eps, &exp.grid)?,
            report: traj.report.clone(),
            corrector_l2_sup: l2.iter().copied().fold(0.0, f64::max),
            corrector_l2_final: *l2.last().unwrap_or(&0.0),
            corrector_weak: weak,
            final_state: traj.last().clone(),
        });
    }

    let integrator_gap = if integrators.len() == 2 {
        let n = schedule.len();
        let mut gaps = Vec::with_capacity(n);
        for e in 0..n {
            let (a, b) = (&solved[e], &solved[n + e]);
            let mut g: f64 = 0.0;
            for (x, y) in a.states.iter().zip(&b.states) {
                g = g.max(l2_diff(exp, x, y.values())?.lp_norm(2.0));
            }
            gaps.push(g);
        }
        Some(gaps)
    } else {
        None
    };

    let mut pairings = Vec::with_capacity(exp.family.len());
    for (p, psi) in exp.family.iter().enumerate() {
        let limit = trapezoid(&times, &homog.limits[p])?;
        pairings.push(PairingReport::new(
            psi.label.clone(),
            schedule.clone(),
            pair_values[p].clone(),
            vec![limit; schedule.len()],
        )?);
    }

    let sups: Vec<f64> = records[0].iter().map(|r| r.report.sup_l1_l2()).collect();
    let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sups.iter().copied().fold(0.0, f64::max);
    Ok(SweepResult {
        homog: homog.report,
        homog_final: homog.final_state,
        records,
        integrator_gap,
        pairings,
        norm_spread: (hi - lo) / lo,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_config(exp: &Experiment, dir: &Path) -> Result<(), CliError> {
    let text = toml::to_string(&exp.config).map_err(|e| CliError::Config(e.to_string()))?;
    write_text(&dir.join("config.toml"), &text)
}

/// Writes every artifact of a sweep under `dir`.
pub fn write_sweep(exp: &Experiment, result: &SweepResult, dir: &Path) -> Result<(), CliError> {
    for sub in ["pairing", "norms", "fields"] {
        ensure_dir(&dir.join(sub))?;
    }
    write_config(exp, dir)?;

    let mut solves = String::from(
        "eps,integrator,rhs_evaluations,sweeps,max_ratio,sup_l1_l2,min_value,apriori_pass,\
         corrector_l2_sup,corrector_l2_final,corrector_weak\n",
    );
    for (k, recs) in result.records.iter().enumerate() {
        for (e, r) in recs.iter().enumerate() {
            let name = r.report.integrator;
            let _ = writeln!(
                solves,
                "{},{},{},{},{},{},{},{},{},{},{}",
                num(r.eps),
                name,
                r.report.rhs_evaluations,
                r.report.total_sweeps(),
                r.report.max_ratio().map_or("nan".to_string(), num),
                num(r.report.sup_l1_l2()),
                num(r.report.min_value),
                r.apriori.pass,
                num(r.corrector_l2_sup),
                num(r.corrector_l2_final),
                num(r.corrector_weak)
            );
            write_text(&dir.join(format!("norms/eps{e}_{name}.csv")), &norms_csv(&r.report))?;
            if !r.report.subintervals.is_empty() {
                write_text(
                    &dir.join(format!("norms/eps{e}_{name}_subintervals.csv")),
                    &subintervals_csv(&r.report),
                )?;
            }
            if k == 0 || name == "rk4" {
                write_dump(
                    &dir.join(format!("fields/hetero_eps{e}_{name}_final.nfh")),
                    r.final_state.clone().into(),
                    &[
                        ("eps", num(r.eps)),
                        ("t", num(*r.report.times.last().unwrap_or(&0.0))),
                        ("integrator", name.to_string()),
                    ],
                )?;
            }
        }
    }
    write_text(&dir.join("solves.csv"), &solves)?;
    write_text(&dir.join("norms/homog.csv"), &norms_csv(&result.homog))?;
    write_dump(
        &dir.join("fields/homog_final.nfh"),
        result.homog_final.clone().into(),
        &[
            ("t", num(*result.homog.times.last().unwrap_or(&0.0))),
            ("integrator", result.homog.integrator.to_string()),
        ],
    )?;
    for r in &result.pairings {
        write_text(&dir.join(format!("pairing/{}.csv", slug(&r.label))), &r.csv())?;
    }
    write_text(&dir.join("summary.txt"), &sweep_summary(exp, result))
}

fn sweep_summary(exp: &Experiment, result: &SweepResult) -> String {
    let mut out = String::from("[sweep]\n");
    let _ = writeln!(out, "dimension={}", exp.config.dimension);
    let _ = writeln!(out, "points={}", exp.grid.points_per_axis());
    let _ = writeln!(out, "cell_points={}", exp.cell.points_per_axis());
    let _ = writeln!(
        out,
        "schedule={}",
        exp.config
            .schedule
            .iter()
            .map(|e| num(*e))
            .collect::<Vec<_>>()
            .join(";")
    );
    let _ = writeln!(out, "kernel_scale={}", num(exp.kernel.scale()));
    let _ = writeln!(out, "k1={}", num(exp.firing.k1()));
    let _ = writeln!(out, "test_functions={}", exp.family.len());
    let _ = writeln!(out, "pairings_converge={}", result.pairings_pass());
    let _ = writeln!(out, "apriori_bound_holds={}", result.apriori_pass());
    let _ = writeln!(out, "norm_spread={}", num(result.norm_spread));
    let _ = writeln!(out, "norms_uniform={}", result.uniform_pass());
    if let Some(g) = &result.integrator_gap {
        let _ = writeln!(
            out,
            "integrator_gap={}",
            g.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
        );
    }
    let _ = writeln!(
        out,
        "verdict={}",
        if result.failures().is_empty() { "pass" } else { "fail" }
    );
    out.push_str("\n[homog]\n");
    out.push_str(&solve_record(&result.homog));
    for recs in &result.records {
        for r in recs {
            let _ = writeln!(out, "\n[hetero eps={}]", num(r.eps));
            out.push_str(&solve_record(&r.report));
            let _ = writeln!(out, "c1={}", num(r.apriori.c1));
            let _ = writeln!(out, "apriori_threshold={}", num(r.apriori.threshold));
            let _ = writeln!(out, "apriori_pass={}", r.apriori.pass);
            let _ = writeln!(out, "corrector_l2_sup={}", num(r.corrector_l2_sup));
            let _ = writeln!(out, "corrector_l2_final={}", num(r.corrector_l2_final));
            let _ = writeln!(out, "corrector_weak={}", num(r.corrector_weak));
        }
    }
    for r in &result.pairings {
        let _ = writeln!(out, "\n[pairing {}]", r.label);
        out.push_str(&r.summary());
        let _ = writeln!(out, "at_rounding_floor={}", at_rounding_floor(r));
    }
    out
}

fn single_solves(exp: &Experiment, dir: &Path) -> Result<Outcome, CliError> {
    let integrators = exp.config.integrators(exp.firing.k1());
    let dumps_all = exp.config.output.trajectory_dumps;
    write_config(exp, dir)?;
    let jobs: Vec<(usize, f64, Integrator)> = exp
        .config
        .schedule
        .iter()
        .enumerate()
        .flat_map(|(e, eps)| integrators.iter().map(move |i| (e, *eps, *i)))
        .collect();
    let solved = jobs
        .par_iter()
        .map(|(_, eps, integ)| hetero(exp, *eps, integ))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut failures = Vec::new();
    for ((e, eps, integ), traj) in jobs.iter().zip(&solved) {
        let sub = dir.join(format!("eps{e}_{}", integ.name()));
        ensure_dir(&sub)?;
        let last = traj.states.len() - 1;
        for (n, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
            if dumps_all || n == 0 || n == last {
                write_dump(
                    &sub.join(format!("u_{n:05}.nfh")),
                    u.clone().into(),
                    &[
                        ("eps", num(*eps)),
                        ("t", num(*t)),
                        ("integrator", integ.name().to_string()),
                    ],
                )?;
            }
        }
        let apriori = apriori_monitor(&traj.report, &exp.firing, *eps, &exp.grid)?;
        let mut rec = format!("eps={}\n", num(*eps));
        rec.push_str(&solve_record(&traj.report));
        let _ = writeln!(rec, "apriori_pass={}", apriori.pass);
        write_text(&sub.join("report.txt"), &rec)?;
        write_text(&sub.join("norms.csv"), &norms_csv(&traj.report))?;
        if !traj.report.subintervals.is_empty() {
            write_text(&sub.join("subintervals.csv"), &subintervals_csv(&traj.report))?;
        }
        if !apriori.pass {
            failures.push(format!("a priori bound fails at eps = {eps}"));
        }
    }
    Ok(outcome(failures))
}

fn homog_solve_mode(exp: &Experiment, dir: &Path) -> Result<Outcome, CliError> {
    write_config(exp, dir)?;
    let u0 = MacroField::sample(exp.grid, &exp.config.initial);
    let init = TwoScaleField::lift(&u0, exp.cell)?;
    let op = HomogOperator::new(&exp.kernel, &exp.firing, &exp.grid, &exp.cell)?;
    let dumps_all = exp.config.output.trajectory_dumps;
    let last = exp.time.output_steps().len() - 1;
    let mut n = 0usize;
    let integrator = homog_integrator(exp);
    let report = integrate(&op, init.values(), &exp.time, &integrator, |t, s| {
        if dumps_all || n == 0 || n == last {
            let field = TwoScaleField::new(exp.grid, exp.cell, s.to_vec())?;
            write_dump(
                &dir.join(format!("u0_{n:05}.nfh")),
                field.into(),
                &[("t", num(t)), ("integrator", integrator.name().to_string())],
            )
            .map_err(|e| neurohom::Error::InvalidInput(e.to_string()))?;
        }
        n += 1;
        Ok(())
    })?;
    let mut rec = solve_record(&report);
    let _ = writeln!(
        rec,
        "active_cell_modes={}",
        op.active_modes().map_or("all".to_string(), |m| m.to_string())
    );
    write_text(&dir.join("report.txt"), &rec)?;
    write_text(&dir.join("norms.csv"), &norms_csv(&report))?;
    Ok(Outcome::Passed)
}

fn outcome(failures: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Outcome::Passed
    } else {
        Outcome::Failed(failures)
    }
}

/// Validates `cfg`, runs its mode and writes the artifacts under `opts.out`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let violations = validate(cfg);
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    let exp = cfg.build()?;
    let dir = opts.out.as_path();
    ensure_dir(dir)?;
    match cfg.mode {
        Mode::SolveHetero => single_solves(&exp, dir),
        Mode::SolveHomog => homog_solve_mode(&exp, dir),
        Mode::Sweep => {
            let result = sweep(&exp)?;
            write_sweep(&exp, &result, dir)?;
            Ok(outcome(result.failures()))
        }
        Mode::Verify => {
            let suites = verify::verify_suites(&exp, opts.seed);
            verify::write_suites(&suites, &dir.join("verify.txt"))?;
            Ok(verify::outcome(&suites))
        }
        Mode::Oracle => {
            let suites = verify::oracle_suites(&exp, opts.seed);
            verify::write_suites(&suites, &dir.join("oracle.txt"))?;
            Ok(verify::outcome(&suites))
        }
    }
}
