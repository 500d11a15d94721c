//! Invariant and oracle suites run by the `verify` and `oracle` modes.

use std::fmt::Write as _;
use std::path::Path;

use neurohom::io::{decode, encode, FieldData};
use neurohom::sigma::weak_sigma_pairing;
use neurohom::{
    conv_macro, double_conv, double_conv_direct, young_check, CellGrid, HeteroOperator, HomogOperator, Integrator,
    KernelSpec, KernelTerm, MacroField, MacroGrid, MicroFunction, PicardConfig, TimeGrid, TwoScaleField,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::Experiment;
use crate::fixtures::{self, rng};
use crate::report::write_text;
use crate::{CliError, Outcome};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suite {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            checks: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `value <= limit`.
    fn at_most(&mut self, name: &str, value: neurohom::Result<f64>, limit: f64) {
        match value {
            Ok(v) => self.checks.push(Check {
                name: name.into(),
                pass: v <= limit,
                detail: format!("{v:.3e} <= {limit:.1e}"),
            }),
            Err(e) => self.error(name, e),
        }
    }

    fn holds(&mut self, name: &str, value: neurohom::Result<bool>, detail: impl Into<String>) {
        match value {
            Ok(b) => self.checks.push(Check {
                name: name.into(),
                pass: b,
                detail: detail.into(),
            }),
            Err(e) => self.error(name, e),
        }
    }

    fn error(&mut self, name: &str, e: neurohom::Error) {
        self.checks.push(Check {
            name: name.into(),
            pass: false,
            detail: format!("error: {e}"),
        });
    }
}

pub fn outcome(suites: &[Suite]) -> Outcome {
    let failed: Vec<String> = suites
        .iter()
        .flat_map(|s| {
            s.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("{}/{}: {}", s.name, c.name, c.detail))
        })
        .collect();
    if failed.is_empty() {
        Outcome::Passed
    } else {
        Outcome::Failed(failed)
    }
}

pub fn render(suites: &[Suite]) -> String {
    let mut out = String::new();
    for s in suites {
        let _ = writeln!(out, "[{}] {}", s.name, if s.pass() { "pass" } else { "FAIL" });
        for c in &s.checks {
            let _ = writeln!(
                out,
                "  {} {}: {}",
                if c.pass { "ok  " } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    out
}

pub fn write_suites(suites: &[Suite], path: &Path) -> Result<(), CliError> {
    let text = render(suites);
    print!("{text}");
    write_text(path, &text)
}

fn random_field(grid: MacroGrid, rng: &mut ChaCha8Rng, lo: f64) -> MacroField {
    let v = (0..grid.len()).map(|_| rng.gen_range(lo..1.0)).collect();
    MacroField::new(grid, v).expect("grid-sized values")
}

/// Reduced grid for the experiment's own objects, so suites stay quick.
fn small_grid(exp: &Experiment) -> neurohom::Result<MacroGrid> {
    let points = exp
        .grid
        .points_per_axis()
        .min(if exp.grid.dim() == 1 { 1024 } else { 64 });
    MacroGrid::new(exp.grid.dim(), exp.grid.half_width(), points)
}

fn micro_suite(exp: &Experiment, rng: &mut ChaCha8Rng) -> Suite {
    let mut s = Suite::new("micro");
    let mut functions = vec![exp.firing.g().clone()];
    functions.extend(exp.kernel.terms().iter().map(|t| t.micro.clone()));
    match fixtures::mean_value_checks(&functions, rng) {
        Ok((one, shift, ball)) => {
            s.holds("mean of one", Ok(one == 1.0), format!("M(1) = {one}"));
            s.at_most("translation invariance", Ok(shift), 1e-12);
            s.at_most("ball average at R = 100", Ok(ball), 1e-2);
        }
        Err(e) => s.error("mean values", e),
    }
    let dim = exp.config.dimension;
    let mut lin: f64 = 0.0;
    for u in &functions {
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let w = MicroFunction::one_plus_cos(dim, 0.3, 0.2);
        let cell = CellGrid::new(dim, 64).expect("valid cell");
        if let (Ok(us), Ok(ws)) = (u.cell_samples(&cell), w.cell_samples(&cell)) {
            let mix: f64 = us.iter().zip(&ws).map(|(x, y)| a * x + b * y).sum::<f64>() / cell.len() as f64;
            lin = lin.max((mix - (a * u.mean_value() + b * w.mean_value())).abs());
        }
    }
    s.at_most("linearity of the mean", Ok(lin), 1e-12);
    let p = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    s.at_most(
        "seminorm of 1 + cos/2",
        p.besicovitch_seminorm(2.0).map(|v| (v - (9.0_f64 / 8.0).sqrt()).abs()),
        1e-12,
    );
    s
}

fn grid_suite(exp: &Experiment, rng: &mut ChaCha8Rng) -> Suite {
    let mut s = Suite::new("grid");
    let grid = match small_grid(exp) {
        Ok(g) => g,
        Err(e) => {
            s.error("grid", e);
            return s;
        }
    };
    let mut triangle = true;
    for _ in 0..20 {
        let (u, v) = (random_field(grid, rng, -1.0), random_field(grid, rng, -1.0));
        let sum = u.lin_comb(1.0, &v, 1.0).expect("same grid");
        for p in [1.0, 2.0] {
            triangle &= sum.lp_norm(p) <= u.lp_norm(p) + v.lp_norm(p) + 1e-12;
        }
    }
    s.holds("triangle inequality", Ok(triangle), "L1 and L2 on 20 random pairs");
    let u = random_field(grid, rng, -1.0);
    let back = decode(&encode(&FieldData::Macro(u.clone())));
    s.holds(
        "macro dump round trip",
        back.map(|b| b == FieldData::Macro(u)),
        "bit-exact",
    );
    let cell = CellGrid::new(grid.dim(), 8).expect("valid cell");
    let t = TwoScaleField::from_fn(grid, cell, |x, y| x[0].sin() + y[0]).expect("valid field");
    let back = decode(&encode(&FieldData::TwoScale(t.clone())));
    s.holds(
        "two-scale dump round trip",
        back.map(|b| b == FieldData::TwoScale(t)),
        "bit-exact",
    );
    let a = MacroField::sample(grid, &exp.config.initial);
    let lift = TwoScaleField::lift(&a, cell).expect("valid lift");
    s.at_most(
        "lift integrates like its profile",
        Ok((lift.integrate() - a.integrate()).abs()),
        1e-12 * (1.0 + a.integrate().abs()),
    );
    s
}

fn convolve_suite(rng: &mut ChaCha8Rng) -> Suite {
    let mut s = Suite::new("convolve");
    s.at_most("fft against direct, 1D", fixtures::conv_oracle(1, 64, 100, rng), 1e-12);
    s.at_most("fft against direct, 2D", fixtures::conv_oracle(2, 32, 20, rng), 1e-12);
    s.at_most(
        "double convolution separability",
        fixtures::separability_error(rng),
        1e-11,
    );
    let grid = MacroGrid::new(1, 4.0, 64).expect("valid grid");
    let mut comm: f64 = 0.0;
    let mut bilin: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut neg: f64 = 0.0;
    for _ in 0..20 {
        let (u, v, w) = (
            random_field(grid, rng, -1.0),
            random_field(grid, rng, -1.0),
            random_field(grid, rng, -1.0),
        );
        let a = rng.gen_range(-2.0..2.0);
        let uv = conv_macro(&u, &v).expect("same grid");
        let vu = conv_macro(&v, &u).expect("same grid");
        comm = comm.max(uv.lin_comb(1.0, &vu, -1.0).expect("same grid").max_abs());
        let lhs = conv_macro(&u.lin_comb(a, &w, 1.0).expect("same grid"), &v).expect("same grid");
        let rhs = uv
            .lin_comb(a, &conv_macro(&w, &v).expect("same grid"), 1.0)
            .expect("same grid");
        bilin = bilin.max(lhs.lin_comb(1.0, &rhs, -1.0).expect("same grid").max_abs());
        mass = mass.max((uv.integrate() - u.integrate() * v.integrate()).abs());
        let (p, q) = (random_field(grid, rng, 0.0), random_field(grid, rng, 0.0));
        neg = neg.max(-conv_macro(&p, &q).expect("same grid").min());
    }
    s.at_most("commutativity", Ok(comm), 1e-12);
    s.at_most("bilinearity", Ok(bilin), 1e-12);
    s.at_most("mass multiplicativity", Ok(mass), 1e-11);
    s.at_most("nonnegativity", Ok(neg), 1e-13);
    let cell = CellGrid::new(1, 8).expect("valid cell");
    let small = MacroGrid::new(1, 2.0, 16).expect("valid grid");
    let mk = |rng: &mut ChaCha8Rng| {
        let v = (0..small.len() * cell.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        TwoScaleField::new(small, cell, v).expect("valid field")
    };
    let (u0, v0) = (mk(rng), mk(rng));
    let gap = double_conv(&u0, &v0).and_then(|f| {
        let d = double_conv_direct(&u0, &v0)?;
        Ok(f.values()
            .iter()
            .zip(d.values())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())))
    });
    s.at_most("double convolution against direct", gap, 1e-12);
    for p in [1.0, 2.0] {
        s.holds(
            &format!("Young inequality p = {p}"),
            young_check(&u0, &v0, p).map(|r| r.pass),
            "||u ** v||_p <= ||u||_p ||v||_1",
        );
    }
    s
}

fn model_suite(exp: &Experiment, rng: &mut ChaCha8Rng) -> Suite {
    let mut s = Suite::new("model");
    let grid = match small_grid(exp) {
        Ok(g) => g,
        Err(e) => {
            s.error("grid", e);
            return s;
        }
    };
    let firing = &exp.firing;
    let k1 = firing.k1();
    let eps = exp.config.schedule[0];
    let mut lip = true;
    let mut bound = true;
    for _ in 0..10 {
        let u = random_field(grid, rng, -3.0);
        let v = random_field(grid, rng, -3.0);
        match (firing.apply(eps, &u), firing.apply(eps, &v), firing.c1(eps, &grid)) {
            (Ok(fu), Ok(fv), Ok(c1)) => {
                for i in 0..grid.len() {
                    lip &=
                        (fu.values()[i] - fv.values()[i]).abs() <= k1 * (u.values()[i] - v.values()[i]).abs() + 1e-14;
                }
                bound &= fu.lp_norm(2.0) <= k1 * u.lp_norm(2.0) + c1 + 1e-10;
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                s.error("firing rate", e);
                return s;
            }
        }
    }
    s.holds(
        "Lipschitz bound",
        Ok(lip),
        format!("|f(u) - f(v)| <= {k1} |u - v| pointwise"),
    );
    s.holds("growth bound", Ok(bound), "||f(u)||_2 <= k1 ||u||_2 + c1");
    let masses: neurohom::Result<f64> = exp
        .config
        .schedule
        .iter()
        .map(|e| exp.kernel.mass(*e, &exp.grid))
        .try_fold(0.0_f64, |m, v| Ok(m.max(v?)));
    s.at_most("kernel mass over the schedule", masses, 1.0);
    // y-independent data collapse the homogenized right-hand side onto the heterogeneous one
    let flat = KernelSpec::new(
        exp.kernel
            .terms()
            .iter()
            .map(|t| KernelTerm {
                profile: t.profile.clone(),
                micro: MicroFunction::constant(grid.dim(), 1.0),
            })
            .collect(),
        exp.kernel.scale(),
    );
    let gap = flat.and_then(|k| {
        let f = neurohom::FiringRate::new(MicroFunction::constant(grid.dim(), 1.0), firing.activation())?;
        let cell = CellGrid::new(grid.dim(), 8)?;
        let u = MacroField::sample(grid, &exp.config.initial);
        let hom = HomogOperator::new(&k, &f, &grid, &cell)?.rhs_field(&TwoScaleField::lift(&u, cell)?)?;
        let het = HeteroOperator::new(&k, &f, eps, &grid)?.rhs_field(&u)?;
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            for v in hom.slice(i) {
                worst = worst.max((v - het.values()[i]).abs());
            }
        }
        Ok(worst)
    });
    s.at_most("y-degenerate collapse", gap, 1e-12);
    s
}

fn solver_checks(s: &mut Suite) {
    let pc = |k1: f64| Integrator::Picard(PicardConfig::default_for(k1));
    type Fixture = fn(&Integrator) -> neurohom::Result<fixtures::FixtureRun>;
    let cases: [(&str, Fixture, f64, f64, f64); 3] = [
        ("decay", fixtures::decay_fixture, 0.5, 1e-6, 1e-8),
        ("Fourier symbol", fixtures::fourier_fixture, 1.0, 1e-6, 1e-8),
        ("scalar ODE", fixtures::scalar_ode_fixture, 0.5, 1e-7, 1e-9),
    ];
    for (name, f, k1, tol_picard, tol_rk4) in cases {
        let (a, b) = (f(&pc(k1)), f(&Integrator::Rk4));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                s.at_most(&format!("{name}: picard against exact"), Ok(a.oracle_error), tol_picard);
                s.at_most(&format!("{name}: rk4 against exact"), Ok(b.oracle_error), tol_rk4);
                s.at_most(
                    &format!("{name}: picard against rk4"),
                    fixtures::trajectory_gap(&a.trajectory, &b.trajectory),
                    1e-6,
                );
            }
            (Err(e), _) | (_, Err(e)) => s.error(name, e),
        }
    }
}

fn solver_suite(exp: &Experiment) -> Suite {
    let mut s = Suite::new("solver");
    solver_checks(&mut s);
    let grid = match small_grid(exp) {
        Ok(g) => g,
        Err(e) => {
            s.error("grid", e);
            return s;
        }
    };
    let u0 = MacroField::sample(grid, &exp.config.initial);
    let kernel = KernelSpec::normalized(exp.kernel_terms_owned(), 0.9, &grid, &exp.config.schedule);
    let tg = TimeGrid::new(1.0, 1e-2, 10).expect("valid time grid");
    match kernel {
        Ok(k) => {
            match fixtures::contraction_fixture(&k, &exp.firing, exp.config.schedule[0], &u0, &tg) {
                Ok((worst, bound, _)) => s.at_most("Picard contraction ratio", Ok(worst), bound + 0.05),
                Err(e) => s.error("Picard contraction ratio", e),
            }
            let msg = fixtures::bad_rho_message(&k, &exp.firing, &u0, &tg).unwrap_or_default();
            s.holds(
                "rho at the bound is rejected",
                Ok(msg.contains("2(k1+1)ρ<1")),
                if msg.is_empty() { "accepted".to_string() } else { msg },
            );
        }
        Err(e) => s.error("kernel", e),
    }
    s
}

fn sigma_suite(exp: &Experiment, rng: &mut ChaCha8Rng) -> Suite {
    let mut s = Suite::new("sigma");
    match fixtures::translate_fixture() {
        Ok(r) => {
            let scale = r.limits[0].abs();
            s.holds("translate errors decrease", Ok(r.pass), format!("{:?}", r.errors));
            s.at_most("translate final relative error", Ok(r.final_error() / scale), 1e-3);
        }
        Err(e) => s.error("translate", e),
    }
    s.holds(
        "non-integral translate schedule rejected",
        Ok(fixtures::translate_non_integral().is_err()),
        "t / eps must be an integer",
    );
    match small_grid(exp) {
        Ok(grid) => {
            let mut holder = true;
            for psi in exp.family.iter().take(6) {
                for eps in &exp.config.schedule {
                    let u = random_field(grid, rng, -1.0);
                    match (weak_sigma_pairing(&u, psi, *eps), psi.trace(*eps, &u)) {
                        (Ok(p), Ok(t)) => holder &= p.abs() <= u.lp_norm(2.0) * t.lp_norm(2.0) + 1e-12,
                        (Err(e), _) | (_, Err(e)) => {
                            s.error("pairing", e);
                            return s;
                        }
                    }
                }
            }
            s.holds(
                "Hoelder bound on pairings",
                Ok(holder),
                "|<u, psi^eps>| <= ||u||_2 ||psi^eps||_2",
            );
        }
        Err(e) => s.error("grid", e),
    }
    s
}

/// Every invariant suite, on reduced grids derived from the experiment.
pub fn verify_suites(exp: &Experiment, seed: u64) -> Vec<Suite> {
    let mut r = rng(seed);
    vec![
        micro_suite(exp, &mut r),
        grid_suite(exp, &mut r),
        convolve_suite(&mut r),
        model_suite(exp, &mut r),
        solver_suite(exp),
        sigma_suite(exp, &mut r),
    ]
}

/// Fast paths against brute force and integrators against exact solutions.
pub fn oracle_suites(_exp: &Experiment, seed: u64) -> Vec<Suite> {
    let mut r = rng(seed);
    let mut conv = Suite::new("convolution oracle");
    conv.at_most(
        "fft against direct, 1D",
        fixtures::conv_oracle(1, 64, 100, &mut r),
        1e-12,
    );
    conv.at_most(
        "fft against direct, 2D",
        fixtures::conv_oracle(2, 32, 20, &mut r),
        1e-12,
    );
    conv.at_most(
        "double convolution separability",
        fixtures::separability_error(&mut r),
        1e-11,
    );
    let mut solve = Suite::new("integrator oracle");
    solver_checks(&mut solve);
    vec![conv, solve]
}

impl Experiment {
    /// Owned copies of the kernel terms, for rebuilding the kernel on another grid.
    pub fn kernel_terms_owned(&self) -> Vec<KernelTerm> {
        self.kernel.terms().to_vec()
    }
}
