//! Reference problems with independent answers: closed forms, brute-force
//! sums and an adaptive scalar integrator.

use neurohom::oracle::{ball_average, dopri_scalar, fourier_symbol};
use neurohom::sigma::{convolution_limit_check, translate_limit_check};
use neurohom::{
    conv_direct, conv_macro, double_conv, picard_solve, rk4_solve, sample_trace, Activation, CellGrid, FiringRate,
    Integrator, KernelSpec, KernelTerm, MacroField, MacroGrid, MicroFunction, PairingReport, PicardConfig, Profile,
    TestFunction, TimeGrid, Trajectory, TwoScaleField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Res<T> = neurohom::Result<T>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_field(grid: MacroGrid, rng: &mut ChaCha8Rng) -> MacroField {
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    MacroField::new(grid, v).expect("grid-sized values")
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Largest relative L2 gap between the FFT and brute-force convolutions over `count` random pairs.
pub fn conv_oracle(dim: usize, points: usize, count: usize, rng: &mut ChaCha8Rng) -> Res<f64> {
    let grid = MacroGrid::new(dim, 4.0, points)?;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let (u, v) = (random_field(grid, rng), random_field(grid, rng));
        let fast = conv_macro(&u, &v)?;
        let slow = conv_direct(&u, &v)?;
        worst = worst.max(rel_err(fast.values(), slow.values()));
    }
    Ok(worst)
}

/// Relative gap between `(a (x) p) ** (b (x) q)` and `(a * b) (x) (p (*) q)`.
pub fn separability_error(rng: &mut ChaCha8Rng) -> Res<f64> {
    let grid = MacroGrid::new(1, 4.0, 128)?;
    let cell = CellGrid::new(1, 16)?;
    let (a, b) = (random_field(grid, rng), random_field(grid, rng));
    let p: Vec<f64> = (0..cell.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let q: Vec<f64> = (0..cell.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let joint = double_conv(
        &TwoScaleField::tensor(&a, cell, &p)?,
        &TwoScaleField::tensor(&b, cell, &q)?,
    )?;
    let pq = neurohom::cell_conv_direct(&p, &q, &cell)?;
    let expected = TwoScaleField::tensor(&conv_macro(&a, &b)?, cell, &pq)?;
    Ok(rel_err(joint.values(), expected.values()))
}

fn solve(
    kernel: &KernelSpec,
    firing: &FiringRate,
    u0: &MacroField,
    tg: &TimeGrid,
    integrator: &Integrator,
) -> Res<Trajectory<MacroField>> {
    match integrator {
        Integrator::Picard(pc) => picard_solve(kernel, firing, 1.0, u0, tg, pc),
        Integrator::Rk4 => rk4_solve(kernel, firing, 1.0, u0, tg),
    }
}

/// A solver fixture: the trajectory of one integrator and its distance to the exact solution.
#[derive(Clone, Debug)]
pub struct FixtureRun {
    pub trajectory: Trajectory<MacroField>,
    /// `sup_t ||u(t) - exact(t)||` in the fixture's norm.
    pub oracle_error: f64,
}

/// `sup_t ||a(t) - b(t)||_2` for two trajectories on the same output times.
pub fn trajectory_gap(a: &Trajectory<MacroField>, b: &Trajectory<MacroField>) -> Res<f64> {
    let mut g: f64 = 0.0;
    for (x, y) in a.states.iter().zip(&b.states) {
        g = g.max(x.lin_comb(1.0, y, -1.0)?.lp_norm(2.0));
    }
    Ok(g)
}

fn sup_l2_error(traj: &Trajectory<MacroField>, exact: impl Fn(f64, &MacroField) -> MacroField) -> Res<f64> {
    let u0 = &traj.states[0];
    let mut e: f64 = 0.0;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        e = e.max(u.lin_comb(1.0, &exact(*t, u0), -1.0)?.lp_norm(2.0));
    }
    Ok(e)
}

fn fixture_grid() -> Res<MacroGrid> {
    MacroGrid::new(1, 8.0, 256)
}

fn fixture_time() -> Res<TimeGrid> {
    TimeGrid::new(2.0, 1e-3, 50)
}

fn flat_kernel(mass: f64, grid: &MacroGrid) -> Res<KernelSpec> {
    let term = KernelTerm {
        profile: Profile::Gaussian {
            center: Vec::new(),
            width: 0.5,
            amplitude: 1.0,
            cutoff: Some(3.0),
        },
        micro: MicroFunction::constant(1, 1.0),
    };
    KernelSpec::normalized(vec![term], mass, grid, &[1.0])
}

/// Pure decay `u' = -u` (zero kernel); exact `exp(-t) u(0)`.
pub fn decay_fixture(integrator: &Integrator) -> Res<FixtureRun> {
    let grid = fixture_grid()?;
    let firing = FiringRate::new(MicroFunction::constant(1, 1.0), Activation::sigmoid(2.0, 0.5))?;
    let u0 = MacroField::sample(grid, &Profile::bump(0.0, 2.0));
    let traj = solve(&KernelSpec::zero(), &firing, &u0, &fixture_time()?, integrator)?;
    let oracle_error = sup_l2_error(&traj, |t, u0| {
        MacroField::new(grid, u0.values().iter().map(|v| v * (-t).exp()).collect()).expect("same grid")
    })?;
    Ok(FixtureRun {
        trajectory: traj,
        oracle_error,
    })
}

/// Linear response on a plane wave: `u(t) = exp((J^(m) - 1) t) cos(pi m x / L)` with the
/// symbol `J^(m)` summed directly.
pub fn fourier_fixture(integrator: &Integrator) -> Res<FixtureRun> {
    let grid = fixture_grid()?;
    let kernel = flat_kernel(0.5, &grid)?;
    let firing = FiringRate::new(MicroFunction::constant(1, 1.0), Activation::Linear)?;
    let m = 8;
    let xi = std::f64::consts::PI * m as f64 / grid.half_width();
    let u0 = MacroField::sample(grid, &|x: &[f64]| (xi * x[0]).cos());
    let (re, _) = fourier_symbol(&kernel.trace(1.0, &grid)?, &[m])?;
    let lambda = re - 1.0;
    let traj = solve(&kernel, &firing, &u0, &fixture_time()?, integrator)?;
    let oracle_error = sup_l2_error(&traj, |t, u0| {
        MacroField::new(grid, u0.values().iter().map(|v| v * (lambda * t).exp()).collect()).expect("same grid")
    })?;
    Ok(FixtureRun {
        trajectory: traj,
        oracle_error,
    })
}

/// Spatially constant state: `u' = -u + a h(u)` with kernel mass `a = 0.8` and `u(0) = 0.2`,
/// compared pointwise with an adaptive Dormand-Prince solution.
pub fn scalar_ode_fixture(integrator: &Integrator) -> Res<FixtureRun> {
    let grid = fixture_grid()?;
    let a = 0.8;
    let kernel = flat_kernel(a, &grid)?;
    let h = Activation::sigmoid(2.0, 0.5);
    let firing = FiringRate::new(MicroFunction::constant(1, 1.0), h)?;
    let u0 = MacroField::constant(grid, 0.2);
    let traj = solve(&kernel, &firing, &u0, &fixture_time()?, integrator)?;
    let mass = kernel.mass(1.0, &grid)?;
    let rhs = |_: f64, y: f64| -y + mass * h.eval(y);
    let (mut t_prev, mut y) = (0.0, 0.2);
    let mut e: f64 = 0.0;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        y = dopri_scalar(rhs, t_prev, y, *t, 1e-13)?;
        t_prev = *t;
        e = e.max(u.values().iter().fold(0.0_f64, |m, v| m.max((v - y).abs())));
    }
    Ok(FixtureRun {
        trajectory: traj,
        oracle_error: e,
    })
}

/// Largest observed Picard contraction ratio and the bound `2 (k1 + 1) rho` on
/// the heterogeneous problem of an experiment at scale `eps`.
pub fn contraction_fixture(
    kernel: &KernelSpec,
    firing: &FiringRate,
    eps: f64,
    u0: &MacroField,
    tg: &TimeGrid,
) -> Res<(f64, f64, usize)> {
    let pc = PicardConfig::default_for(firing.k1());
    let traj = picard_solve(kernel, firing, eps, u0, tg, &pc)?;
    let worst = traj.report.max_ratio().unwrap_or(0.0);
    Ok((worst, pc.contraction_bound(firing.k1()), traj.report.subintervals.len()))
}

/// Runs Picard with `rho = 1 / (k1 + 1)`, which breaks the contraction bound; returns the error text.
pub fn bad_rho_message(kernel: &KernelSpec, firing: &FiringRate, u0: &MacroField, tg: &TimeGrid) -> Option<String> {
    let mut pc = PicardConfig::default_for(firing.k1());
    pc.rho = 1.0 / (firing.k1() + 1.0);
    picard_solve(kernel, firing, 1.0, u0, tg, &pc)
        .err()
        .map(|e| e.to_string())
}

/// Mean-value checks on `functions`: `M(1)`, the largest change of `M` under
/// random shifts, and the largest gap to a ball average of radius 100.
pub fn mean_value_checks(functions: &[MicroFunction], rng: &mut ChaCha8Rng) -> Res<(f64, f64, f64)> {
    let one = MicroFunction::constant(1, 1.0).mean_value();
    let mut shift_dev: f64 = 0.0;
    let mut ball_dev: f64 = 0.0;
    for u in functions {
        let m = u.mean_value();
        for _ in 0..20 {
            let a: Vec<f64> = (0..u.dim()).map(|_| rng.gen_range(-50.0..50.0)).collect();
            shift_dev = shift_dev.max((u.shift(&a)?.mean_value() - m).abs());
        }
        let per_unit = if u.dim() == 1 { 64 } else { 8 };
        ball_dev = ball_dev.max((ball_average(u, 100.0, per_unit)? - m).abs());
    }
    Ok((one, shift_dev, ball_dev))
}

/// Pairings of `(a p(./eps)) * (b q(./eps))` against `phi w(./eps)` for narrow Gaussians
/// `a, b` and `p = q = 1 + cos/2`, over the schedule `1/4 .. 1/32`.
pub fn convolution_limit_fixture() -> Res<Vec<PairingReport>> {
    let grid = MacroGrid::new(1, 8.0, 8192)?;
    let cell = CellGrid::new(1, 64)?;
    let p = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    let gauss = |c: f64| Profile::Gaussian {
        center: vec![c],
        width: 0.05,
        amplitude: 1.0,
        cutoff: None,
    };
    let (a, b) = (gauss(0.3), gauss(-0.2));
    let schedule = [0.25, 0.125, 0.0625, 0.03125];
    let seq = |prof: &Profile| -> Res<Vec<(f64, MacroField)>> {
        schedule
            .iter()
            .map(|e| Ok((*e, sample_trace(prof, &p, *e, &grid)?)))
            .collect()
    };
    let (su, sv) = (seq(&a)?, seq(&b)?);
    let ps = p.cell_samples(&cell)?;
    let u0 = TwoScaleField::tensor(&MacroField::sample(grid, &a), cell, &ps)?;
    let v0 = TwoScaleField::tensor(&MacroField::sample(grid, &b), cell, &ps)?;
    let family = [
        ("1", MicroFunction::constant(1, 1.0)),
        ("cos1", MicroFunction::periodic_cosines(1, &[(vec![1], 1.0, 0.0)])?),
        ("cos2", MicroFunction::periodic_cosines(1, &[(vec![2], 1.0, 0.0)])?),
    ];
    family
        .into_iter()
        .map(|(tag, w)| {
            convolution_limit_check(&su, &sv, &u0, &v0, &TestFunction::new(tag, Profile::bump(0.1, 1.0), w))
        })
        .collect()
}

type Sequence = Vec<(f64, MacroField)>;

fn translate_setup(schedule: &[f64]) -> Res<(Sequence, TwoScaleField, TestFunction)> {
    let grid = MacroGrid::new(1, 8.0, 2048)?;
    let cell = CellGrid::new(1, 64)?;
    let c = MicroFunction::periodic_cosines(1, &[(vec![1], 1.0, 0.0)])?;
    let a = Profile::CosineTaper {
        center: Vec::new(),
        radius: 2.0,
        amplitude: 1.0,
    };
    let seq = schedule
        .iter()
        .map(|e| Ok((*e, sample_trace(&a, &c, *e, &grid)?)))
        .collect::<Res<Vec<_>>>()?;
    let u0 = TwoScaleField::tensor(&MacroField::sample(grid, &a), cell, &c.cell_samples(&cell)?)?;
    let phi = Profile::CosineTaper {
        center: vec![0.2],
        radius: 1.5,
        amplitude: 1.0,
    };
    Ok((seq, u0, TestFunction::new("taper cos", phi, c)))
}

/// Translates by `t = 1` of `a(x) cos(2 pi x / eps)` over `eps = 1 .. 1/16`.
pub fn translate_fixture() -> Res<PairingReport> {
    let (seq, u0, psi) = translate_setup(&[1.0, 0.5, 0.25, 0.125, 0.0625])?;
    translate_limit_check(&seq, &u0, &[1.0], &psi)
}

/// The same check on a schedule where `t / eps` is not an integer; must fail.
pub fn translate_non_integral() -> Res<PairingReport> {
    let (seq, u0, psi) = translate_setup(&[1.0, 0.4])?;
    translate_limit_check(&seq, &u0, &[1.0], &psi)
}
