//! Randomized structural properties of norms, exponents and the energy.

use proptest::prelude::*;

use double_phase::energy::Functional;
use double_phase::exponent_fields::{CriticalExponent, ExponentField, HypothesisSet, ProblemSpec};
use double_phase::modular_norms::{holder_check, luxemburg_norm, modular_eval, Modular, LUXEMBURG_TOL};
use double_phase::radial::{RadialFunction, RadialGrid, Spacing};

fn grid() -> RadialGrid {
    RadialGrid::new(1.0, 3, 64, Spacing::Uniform).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 64).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

/// Linear exponent profile between two endpoint values.
fn ramp(a: f64, b: f64) -> ExponentField {
    ExponentField::from_fn(1.0, move |s| a + (b - a) * s)
}

fn norm(p: &ExponentField, v: &[f64]) -> f64 {
    luxemburg_norm(&Modular::value(p.clone()), &RadialFunction::from_values(v.to_vec()), &grid(), LUXEMBURG_TOL)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_absolutely_homogeneous(v in values(), a in 1.2f64..4.0, b in 1.2f64..4.0, c in -20.0f64..20.0) {
        let p = ramp(a, b);
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let (n, ns) = (norm(&p, &v), norm(&p, &scaled));
        prop_assert!((ns - c.abs() * n).abs() <= 1e-8 * (1.0 + ns));
    }

    #[test]
    fn norm_satisfies_triangle_inequality(u in values(), v in values(), a in 1.2f64..4.0, b in 1.2f64..4.0) {
        let p = ramp(a, b);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
        prop_assert!(norm(&p, &sum) <= norm(&p, &u) + norm(&p, &v) + 1e-9);
    }

    #[test]
    fn unit_sphere_has_unit_modular(v in values(), a in 1.2f64..4.0, b in 1.2f64..4.0) {
        let p = ramp(a, b);
        let n = norm(&p, &v);
        let u = RadialFunction::from_values(v.iter().map(|x| x / n).collect());
        let rho = modular_eval(&Modular::value(p), &u, &grid()).unwrap();
        prop_assert!((rho - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn holder_inequality_holds(u in values(), v in values(), a in 1.1f64..5.0, b in 1.1f64..5.0) {
        let rep = holder_check(
            &RadialFunction::from_values(u),
            &RadialFunction::from_values(v),
            &ramp(a, b),
            &grid(),
            1e-10,
        ).unwrap();
        prop_assert!(rep.holds, "{} > {}", rep.lhs, rep.rhs);
    }

    #[test]
    fn critical_exponent_increases_with_p(p in 1.01f64..2.99, dp in 1e-3f64..1.0) {
        let lo = CriticalExponent::of(p, 3).unwrap();
        let hi = CriticalExponent::of(p + dp, 3).unwrap();
        match (lo.finite(), hi.finite()) {
            (Some(x), Some(y)) => prop_assert!(y > x && x > p),
            (Some(_), None) => prop_assert!(p + dp >= 3.0),
            _ => prop_assert!(false, "p = {p} below the dimension must be finite"),
        }
    }

    #[test]
    fn energy_parts_scale_with_constant_exponents(
        p in 1.3f64..3.0, m in 1.3f64..3.0, q in 1.5f64..6.0, t in 0.1f64..5.0,
    ) {
        let mut spec = ProblemSpec::constant(p, q, m.max(p), 1.0, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        spec.a = ExponentField::constant(0.7, 1.0);
        let g = grid();
        let f = Functional::new(&spec, &g);
        let u = RadialFunction::from_fn(&g, |s| (1.0 - s * s) * (1.0 + s));
        let e1 = f.energy(&u).unwrap();
        let et = f.energy(&u.scaled(t)).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(close(et.gradient_part_p, t.powf(p) * e1.gradient_part_p));
        prop_assert!(close(et.gradient_part_m, t.powf(m.max(p)) * e1.gradient_part_m));
        prop_assert!(close(et.reaction_part, t.powf(q) * e1.reaction_part));
    }
}
