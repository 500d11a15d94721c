use neurohom::io::{decode, encode, FieldData};
use neurohom::{
    conv_macro, double_conv, young_check, Activation, CellGrid, FiringRate, MacroField, MacroGrid, MicroFunction,
    TwoScaleField,
};
use proptest::prelude::*;

const M: usize = 64;

fn line() -> MacroGrid {
    MacroGrid::new(1, 4.0, M).unwrap()
}

fn field(values: Vec<f64>) -> MacroField {
    MacroField::new(line(), values).unwrap()
}

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

fn close(a: &MacroField, b: &MacroField, tol: f64) -> bool {
    let scale = 1.0 + a.max_abs().max(b.max_abs());
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_is_bilinear(u in values(M), w in values(M), v in values(M), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (u, w, v) = (field(u), field(w), field(v));
        let lhs = conv_macro(&u.lin_comb(a, &w, b).unwrap(), &v).unwrap();
        let rhs = conv_macro(&u, &v).unwrap().lin_comb(a, &conv_macro(&w, &v).unwrap(), b).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn convolution_commutes(u in values(M), v in values(M)) {
        let (u, v) = (field(u), field(v));
        prop_assert!(close(&conv_macro(&u, &v).unwrap(), &conv_macro(&v, &u).unwrap(), 1e-12));
    }

    #[test]
    fn convolution_multiplies_integrals(u in values(M), v in values(M)) {
        let (u, v) = (field(u), field(v));
        let lhs = conv_macro(&u, &v).unwrap().integrate();
        let rhs = u.integrate() * v.integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn convolution_of_nonnegative_fields_is_nonnegative(u in prop::collection::vec(0.0..1.0f64, M), v in prop::collection::vec(0.0..1.0f64, M)) {
        let w = conv_macro(&field(u), &field(v)).unwrap();
        prop_assert!(w.min() >= -1e-13);
    }

    #[test]
    fn young_inequality_holds(u in values(32 * 8), v in values(32 * 8)) {
        let g = MacroGrid::new(1, 2.0, 32).unwrap();
        let c = CellGrid::new(1, 8).unwrap();
        let u0 = TwoScaleField::new(g, c, u).unwrap();
        let v0 = TwoScaleField::new(g, c, v).unwrap();
        for p in [1.0, 2.0] {
            prop_assert!(young_check(&u0, &v0, p).unwrap().pass);
        }
    }

    #[test]
    fn double_convolution_commutes(u in values(16 * 8), v in values(16 * 8)) {
        let g = MacroGrid::new(1, 2.0, 16).unwrap();
        let c = CellGrid::new(1, 8).unwrap();
        let u0 = TwoScaleField::new(g, c, u).unwrap();
        let v0 = TwoScaleField::new(g, c, v).unwrap();
        let a = double_conv(&u0, &v0).unwrap();
        let b = double_conv(&v0, &u0).unwrap();
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn mean_value_is_linear(a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, b0 in -2.0..2.0f64, b1 in -2.0..2.0f64, s in -3.0..3.0f64) {
        let u = MicroFunction::periodic_cosines(1, &[(vec![0], a0, 0.0), (vec![1], a1, 0.3)]).unwrap();
        let v = MicroFunction::periodic_cosines(1, &[(vec![0], b0, 0.0), (vec![2], b1, 0.0)]).unwrap();
        let sum = MicroFunction::periodic_cosines(
            1,
            &[(vec![0], a0 + s * b0, 0.0), (vec![1], a1, 0.3), (vec![2], s * b1, 0.0)],
        )
        .unwrap();
        let expected = u.mean_value() + s * v.mean_value();
        prop_assert!((sum.mean_value() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn mean_value_is_translation_invariant(amp in -1.0..1.0f64, phase in -3.0..3.0f64, a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let u = MicroFunction::periodic_cosines(
            2,
            &[(vec![0, 0], 0.7, 0.0), (vec![1, 2], amp, phase), (vec![3, -1], 0.25, 0.0)],
        )
        .unwrap();
        let shifted = u.shift(&[a, b]).unwrap();
        prop_assert!((shifted.mean_value() - u.mean_value()).abs() <= 1e-12);
    }

    #[test]
    fn lp_norms_obey_the_triangle_inequality(u in values(M), v in values(M)) {
        let (u, v) = (field(u), field(v));
        let w = u.lin_comb(1.0, &v, 1.0).unwrap();
        for p in [1.0, 2.0, 3.5] {
            prop_assert!(w.lp_norm(p) <= (u.lp_norm(p) + v.lp_norm(p)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn firing_rate_is_lipschitz_with_linear_growth(u in values(M), v in values(M), gain in 0.1..8.0f64, theta in -1.0..1.0f64) {
        let g = MicroFunction::one_plus_cos(1, 1.0, 0.5);
        let f = FiringRate::new(g, Activation::sigmoid(gain, theta)).unwrap();
        let eps = 0.25;
        let (u, v) = (field(u.iter().map(|x| 4.0 * x).collect()), field(v));
        let (fu, fv) = (f.apply(eps, &u).unwrap(), f.apply(eps, &v).unwrap());
        for ((a, b), (x, y)) in fu.values().iter().zip(fv.values()).zip(u.values().iter().zip(v.values())) {
            prop_assert!((a - b).abs() <= f.k1() * (x - y).abs() * (1.0 + 1e-12) + 1e-15);
        }
        let c1 = f.c1(eps, &line()).unwrap();
        prop_assert!(fu.lp_norm(2.0) <= (f.k1() * u.lp_norm(2.0) + c1) * (1.0 + 1e-12));
    }

    #[test]
    fn macro_dumps_round_trip(v in prop::collection::vec(prop::num::f64::NORMAL, M)) {
        let data: FieldData = field(v).into();
        prop_assert_eq!(decode(&encode(&data)).unwrap(), data);
    }

    #[test]
    fn two_scale_dumps_round_trip(v in prop::collection::vec(prop::num::f64::ANY.prop_filter("finite", |x| x.is_finite()), 16 * 8)) {
        let g = MacroGrid::new(1, 1.0, 16).unwrap();
        let c = CellGrid::new(1, 8).unwrap();
        let r = TwoScaleField::new(g, c, v);
        prop_assume!(r.is_ok());
        let data: FieldData = r.unwrap().into();
        prop_assert_eq!(decode(&encode(&data)).unwrap(), data);
    }

    #[test]
    fn pairwise_sum_matches_the_naive_sum(v in prop::collection::vec(-1e3..1e3f64, 1..500)) {
        let naive: f64 = v.iter().sum();
        let s = neurohom::pairwise_sum(&v);
        prop_assert!((s - naive).abs() <= 1e-9 * (1.0 + v.iter().map(|x| x.abs()).sum::<f64>()));
    }
}
