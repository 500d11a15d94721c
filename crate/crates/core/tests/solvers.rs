use neurohom::solver::integrate;
use neurohom::{
    apriori_monitor, double_conv_direct, homog_solve, picard_solve, rk4_solve, Activation, CellGrid, Dynamics,
    FiringRate, Integrator, KernelSpec, KernelTerm, MacroField, MacroGrid, MicroFunction, PicardConfig, Profile,
    TimeGrid, TwoScaleField,
};

fn kernel(micro: MicroFunction) -> KernelSpec {
    let term = KernelTerm {
        profile: Profile::Gaussian {
            center: Vec::new(),
            width: 0.5,
            amplitude: 1.0,
            cutoff: Some(2.0),
        },
        micro,
    };
    KernelSpec::new(vec![term], 0.6).unwrap()
}

fn firing(g: MicroFunction) -> FiringRate {
    FiringRate::new(g, Activation::sigmoid(2.0, 0.5)).unwrap()
}

fn bump(grid: MacroGrid) -> MacroField {
    MacroField::sample(grid, &Profile::bump(0.0, 1.5))
}

/// Homogenized right-hand side assembled from the direct double-convolution sum.
struct DirectHomog {
    kernel: TwoScaleField,
    firing: FiringRate,
}

impl Dynamics for DirectHomog {
    fn len(&self) -> usize {
        self.kernel.values().len()
    }

    fn weight(&self) -> f64 {
        self.kernel.node_weight()
    }

    fn lipschitz(&self) -> f64 {
        self.firing.k1()
    }

    fn drive_into(&self, state: &[f64], out: &mut [f64]) {
        let u0 = TwoScaleField::new(*self.kernel.macro_grid(), *self.kernel.cell(), state.to_vec()).unwrap();
        let f = self.firing.apply_two_scale(&u0).unwrap();
        out.copy_from_slice(double_conv_direct(&self.kernel, &f).unwrap().values());
    }
}

#[test]
fn small_homog_solve_matches_direct_quadrature() {
    let g = MacroGrid::new(1, 4.0, 32).unwrap();
    let c = CellGrid::new(1, 16).unwrap();
    let micro = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    let (k, f) = (kernel(micro.clone()), firing(micro));
    let tg = TimeGrid::new(1.0, 1e-2, 25).unwrap();
    let u0 = bump(g);
    let fast = homog_solve(&k, &f, &u0, &tg, &Integrator::Rk4, &c).unwrap();
    let oracle = DirectHomog {
        kernel: k.two_scale(&g, &c).unwrap(),
        firing: f.clone(),
    };
    let mut states = Vec::new();
    let init = TwoScaleField::lift(&u0, c).unwrap();
    integrate(&oracle, init.values(), &tg, &Integrator::Rk4, |_, s| {
        states.push(s.to_vec());
        Ok(())
    })
    .unwrap();
    assert_eq!(states.len(), fast.states.len());
    for (a, b) in fast.states.iter().zip(&states) {
        let gap = a.values().iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-8, "{gap}");
    }
}

#[test]
fn y_independent_data_collapse_to_the_macro_problem() {
    let g = MacroGrid::new(1, 8.0, 256).unwrap();
    let c = CellGrid::new(1, 8).unwrap();
    let one = MicroFunction::constant(1, 1.0);
    let (k, f) = (kernel(one.clone()), firing(one));
    let tg = TimeGrid::new(1.0, 1e-2, 20).unwrap();
    let u0 = bump(g);
    let homog = homog_solve(&k, &f, &u0, &tg, &Integrator::Rk4, &c).unwrap();
    for eps in [0.5, 0.125] {
        let hetero = rk4_solve(&k, &f, eps, &u0, &tg).unwrap();
        for (h, u) in homog.states.iter().zip(&hetero.states) {
            let gap = u
                .lin_comb(1.0, &h.corrector_trace(eps).unwrap(), -1.0)
                .unwrap()
                .max_abs();
            assert!(gap < 1e-12, "{gap}");
            let spread = (0..g.len())
                .map(|i| {
                    let s = h.slice(i);
                    s.iter().fold(0.0f64, |m, v| m.max((v - s[0]).abs()))
                })
                .fold(0.0, f64::max);
            assert_eq!(spread, 0.0);
        }
    }
}

#[test]
fn picard_and_rk4_agree_and_contract() {
    let g = MacroGrid::new(1, 8.0, 512).unwrap();
    let micro = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    let (k, f) = (kernel(micro.clone()), firing(micro));
    let tg = TimeGrid::new(1.0, 1e-3, 100).unwrap();
    let u0 = bump(g);
    let pc = PicardConfig::default_for(f.k1());
    let picard = picard_solve(&k, &f, 0.25, &u0, &tg, &pc).unwrap();
    let rk4 = rk4_solve(&k, &f, 0.25, &u0, &tg).unwrap();
    for (a, b) in picard.states.iter().zip(&rk4.states) {
        assert!(a.lin_comb(1.0, b, -1.0).unwrap().max_abs() < 1e-6);
    }
    let worst = picard.report.max_ratio().unwrap();
    assert!(worst <= pc.contraction_bound(f.k1()) + 0.05, "{worst}");
    assert_eq!(picard.report.subintervals.len(), (1.0 / pc.rho).ceil() as usize);
}

#[test]
fn sigmoid_solve_respects_the_a_priori_bound() {
    let g = MacroGrid::new(1, 8.0, 512).unwrap();
    let micro = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    let f = firing(micro.clone());
    let tg = TimeGrid::new(2.0, 1e-2, 10).unwrap();
    for eps in [0.5, 0.25, 0.125] {
        let traj = rk4_solve(&kernel(micro.clone()), &f, eps, &bump(g), &tg).unwrap();
        let report = apriori_monitor(&traj.report, &f, eps, &g).unwrap();
        assert!(report.pass, "{:?}", report.violations);
    }
}

#[test]
fn oversized_picard_step_is_rejected() {
    let g = MacroGrid::new(1, 8.0, 256).unwrap();
    let micro = MicroFunction::one_plus_cos(1, 1.0, 0.5);
    let f = firing(micro.clone());
    let tg = TimeGrid::new(1.0, 1e-2, 10).unwrap();
    let pc = PicardConfig {
        rho: 1.0 / (f.k1() + 1.0),
        ..PicardConfig::default_for(f.k1())
    };
    let err = picard_solve(&kernel(micro), &f, 0.25, &bump(g), &tg, &pc).unwrap_err();
    assert!(err.to_string().contains("2(k1+1)ρ<1"), "{err}");
}
