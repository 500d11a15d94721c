use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use neurohom::{
    conv_macro, rk4_solve, Activation, CellGrid, ConvPlan, FiringRate, HeteroOperator, HomogOperator, KernelSpec,
    KernelTerm, MacroField, MacroGrid, MicroFunction, Profile, TimeGrid, TwoScaleField,
};

fn kernel() -> KernelSpec {
    let term = KernelTerm {
        profile: Profile::Gaussian {
            center: Vec::new(),
            width: 0.5,
            amplitude: 1.0,
            cutoff: Some(3.0),
        },
        micro: MicroFunction::one_plus_cos(1, 1.0, 0.5),
    };
    KernelSpec::new(vec![term], 0.5).unwrap()
}

fn firing() -> FiringRate {
    FiringRate::new(MicroFunction::one_plus_cos(1, 1.0, 0.5), Activation::sigmoid(2.0, 0.5)).unwrap()
}

fn bump(grid: MacroGrid) -> MacroField {
    MacroField::sample(grid, &Profile::bump(0.0, 1.5))
}

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("conv_macro");
    for m in [1024, 8192] {
        let g = MacroGrid::new(1, 8.0, m).unwrap();
        let u = bump(g);
        let v = MacroField::sample(g, &Profile::gaussian(0.5));
        group.bench_with_input(BenchmarkId::new("oneshot", m), &m, |b, _| {
            b.iter(|| conv_macro(&u, &v).unwrap())
        });
        let plan = ConvPlan::new(g);
        let spectrum = plan.spectrum(&v).unwrap();
        group.bench_with_input(BenchmarkId::new("planned", m), &m, |b, _| {
            b.iter(|| plan.apply(&spectrum, &u).unwrap())
        });
    }
    group.finish();
}

fn right_hand_sides(c: &mut Criterion) {
    let g = MacroGrid::new(1, 8.0, 8192).unwrap();
    let (k, f) = (kernel(), firing());
    let u = bump(g);
    let hetero = HeteroOperator::new(&k, &f, 0.125, &g).unwrap();
    c.bench_function("hetero_rhs/8192", |b| b.iter(|| hetero.rhs_field(&u).unwrap()));

    let cell = CellGrid::new(1, 64).unwrap();
    let homog = HomogOperator::new(&k, &f, &g, &cell).unwrap();
    let u0 = TwoScaleField::lift(&u, cell).unwrap();
    c.bench_function("homog_rhs/8192x64", |b| b.iter(|| homog.rhs_field(&u0).unwrap()));
}

fn short_solve(c: &mut Criterion) {
    let g = MacroGrid::new(1, 8.0, 2048).unwrap();
    let (k, f) = (kernel(), firing());
    let u = bump(g);
    let tg = TimeGrid::new(0.1, 1e-3, 10).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("rk4/2048/100 steps", |b| {
        b.iter(|| rk4_solve(&k, &f, 0.125, &u, &tg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, convolution, right_hand_sides, short_solve);
criterion_main!(benches);
