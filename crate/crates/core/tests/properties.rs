use proptest::prelude::*;

use plfilter::geometry::{geodesic_displacement, FilteredSpace, GeodesicSpec};
use plfilter::io::fmt_f64;
use plfilter::model::{
    combine_objectives, indicator, ConstraintSet, HalfSpace, LinearObjective, Objective, PressureVector, ProblemSpec,
    QuadraticObjective,
};
use plfilter::polytope::{polytope_volume, slice_volume};
use plfilter::quadrature::integrate_piecewise;
use plfilter::sampler::{metropolis_chain, ChainConfig};
use plfilter::transform::{lp_mode_sum, lp_partition_function};

/// Box `[0,a]×[0,b]` with one corner cut by a line through the interior.
fn cut_box(a: f64, b: f64, nx: f64, ny: f64, frac: f64) -> ConstraintSet {
    let d = -(frac * (nx * a + ny * b) + (1.0 - frac) * 0.5 * (nx * a + ny * b));
    ConstraintSet::new(
        vec![
            HalfSpace::new(vec![-1.0, 0.0], 0.0).unwrap(),
            HalfSpace::new(vec![0.0, -1.0], 0.0).unwrap(),
            HalfSpace::new(vec![1.0, 0.0], -a).unwrap(),
            HalfSpace::new(vec![0.0, 1.0], -b).unwrap(),
            HalfSpace::new(vec![nx, ny], d).unwrap(),
        ],
        None,
    )
    .unwrap()
}

fn translate(cs: &ConstraintSet, t: &[f64]) -> ConstraintSet {
    let rows = cs
        .rows()
        .iter()
        .map(|r| {
            let shift: f64 = r.h.iter().zip(t).map(|(h, t)| h * t).sum();
            HalfSpace::new(r.h.clone(), r.d - shift).unwrap()
        })
        .collect();
    ConstraintSet::new(rows, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn combined_objective_is_linear_in_pressures(
        p in prop::collection::vec(0.01..3.0f64, 2),
        x in prop::collection::vec(-2.0..2.0f64, 2),
        c in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        prop_assume!(c[0].abs() + c[1].abs() > 1e-3);
        let lin = Objective::from(LinearObjective::new(c.clone(), 0.5).unwrap());
        let quad = Objective::from(QuadraticObjective::new(vec![vec![2.0, 0.3], vec![0.3, 1.0]], vec![0.1, -0.2]).unwrap());
        let objs = [lin.clone(), quad.clone()];
        let combined = combine_objectives(&objs, &PressureVector::new(p.clone()).unwrap()).unwrap();
        let expect = p[0] * lin.eval(&x) + p[1] * quad.eval(&x);
        prop_assert!((combined.eval(&x) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn relaxing_constraints_never_excludes(
        x in prop::collection::vec(-3.0..3.0f64, 2),
        slack in prop::collection::vec(0.0..2.0f64, 5),
    ) {
        let cs = cut_box(2.0, 3.0, 1.0, 1.0, 0.3);
        let relaxed: Vec<f64> = cs.rows().iter().zip(&slack).map(|(r, s)| r.d - s).collect();
        let loose = cs.with_offsets(&relaxed).unwrap();
        prop_assert!(indicator(&loose, &x) >= indicator(&cs, &x));
    }

    #[test]
    fn slice_volume_integrates_to_scaled_area(
        a in 0.5..4.0f64, b in 0.5..4.0f64,
        nx in 0.2..2.0f64, ny in 0.2..2.0f64, frac in 0.0..0.9f64,
        c in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        prop_assume!(c[0].abs() + c[1].abs() > 0.1);
        let cs = cut_box(a, b, nx, ny, frac);
        let obj = LinearObjective::new(c, 0.0).unwrap();
        let sv = slice_volume(&cs, &obj).unwrap();
        let area = polytope_volume(&cs, 2).unwrap();
        prop_assert!((sv.integral() - obj.norm() * area).abs() <= 1e-8 * obj.norm() * area);
    }

    #[test]
    fn mode_sum_matches_quadrature_of_slices(
        a in 0.5..4.0f64, b in 0.5..4.0f64, frac in 0.0..0.9f64,
        c in prop::collection::vec(-3.0..3.0f64, 2),
        beta in 0.05..5.0f64,
    ) {
        prop_assume!(c[0].abs() + c[1].abs() > 0.1);
        let cs = cut_box(a, b, 1.0, 0.7, frac);
        let obj = LinearObjective::new(c, 1.0).unwrap();
        let sv = slice_volume(&cs, &obj).unwrap();
        let z = lp_partition_function(&sv).eval_z(beta).unwrap();
        let quad = integrate_piecewise(|o| (-beta * o).exp() * sv.eval(o), sv.breakpoints(), 1e-300, 1e-12).value;
        prop_assert!((z - quad).abs() <= 1e-8 * quad, "{} vs {}", z, quad);
    }

    #[test]
    fn transverse_translation_leaves_modes(
        s in -5.0..5.0f64,
        c in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        prop_assume!(c[0].abs() + c[1].abs() > 0.1);
        let cs = cut_box(2.0, 3.0, 1.0, 0.5, 0.4);
        let obj = LinearObjective::new(c.clone(), 0.0).unwrap();
        // direction orthogonal to c
        let t = [-c[1] * s, c[0] * s];
        let m1 = lp_mode_sum(&cs, &obj).unwrap();
        let m2 = lp_mode_sum(&translate(&cs, &t), &obj).unwrap();
        for beta in [0.2, 1.0, 3.0] {
            let (z1, z2) = (m1.eval_z(beta).unwrap(), m2.eval_z(beta).unwrap());
            prop_assert!((z1 - z2).abs() <= 1e-8 * z1);
        }
    }

    #[test]
    fn mean_decreases_with_beta(b1 in 0.05..5.0f64, db in 0.01..3.0f64) {
        let cs = cut_box(2.0, 3.0, 1.0, 1.0, 0.2);
        let m = lp_mode_sum(&cs, &LinearObjective::new(vec![1.0, -2.0], 0.0).unwrap()).unwrap();
        prop_assert!(m.variance(b1).unwrap() >= 0.0);
        prop_assert!(m.mean_objective(b1 + db).unwrap() <= m.mean_objective(b1).unwrap() + 1e-12);
    }

    #[test]
    fn shifts_compose(d1 in -5.0..5.0f64, d2 in -5.0..5.0f64, beta in 0.1..3.0f64) {
        let cs = cut_box(1.0, 2.0, 1.0, 1.0, 0.5);
        let m = lp_mode_sum(&cs, &LinearObjective::new(vec![1.0, 1.0], 0.0).unwrap()).unwrap();
        let a = m.shift(d1).shift(d2).eval_z(beta).unwrap();
        let b = m.shift(d1 + d2).eval_z(beta).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn geodesic_displacement_monotone(
        n in 2usize..8, beta in 0.0..4.0f64, o1 in -2.0..2.0f64,
        d1 in 0.01..3.0f64, d2 in 0.0..1.0f64,
        a1 in 0.0..1.4f64, da in 0.0..0.15f64,
    ) {
        let fs = FilteredSpace::new(n, beta).unwrap();
        let base = geodesic_displacement(&fs, &GeodesicSpec::planar(o1, o1 + d1, a1).unwrap());
        let steeper = geodesic_displacement(&fs, &GeodesicSpec::planar(o1, o1 + d1, a1 + da).unwrap());
        prop_assert!(base >= 0.0);
        prop_assert!(steeper >= base - 1e-12 * base.abs());
        // a longer climb ending at the same O₂ at the same angle covers more ground
        let longer = geodesic_displacement(&fs, &GeodesicSpec::planar(o1 - d2, o1 + d1, a1).unwrap());
        prop_assert!(longer >= base - 1e-12 * base.abs());
    }

    #[test]
    fn report_numbers_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn chains_are_deterministic(seed in any::<u64>()) {
        let cs = cut_box(2.0, 2.0, 1.0, 1.0, 0.2);
        let p = ProblemSpec::single(LinearObjective::new(vec![1.0, 1.0], 0.0).unwrap(), cs).unwrap();
        let cfg = ChainConfig { n_steps: 600, burn_in: 100, n_chains: 3, seed, ..ChainConfig::default() };
        let a = metropolis_chain(&p, &[1.0], &cfg).unwrap();
        let b = metropolis_chain(&p, &[1.0], &cfg).unwrap();
        prop_assert_eq!(&a.points, &b.points);
        prop_assert!(a.points.iter().all(|x| p.is_feasible(x)));
    }
}
