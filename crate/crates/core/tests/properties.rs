use egdeg::degree::kronecker_degree;
use egdeg::domain::DomainExpr;
use egdeg::factory::orbit_normal;
use egdeg::group::FiniteGroupRep;
use egdeg::linalg::{vector, Matrix, Vector};
use egdeg::numerics::{BumpKind, Numerics};
use egdeg::perturbation::{bump_mu, well_omega};
use egdeg::theta::{first_perturbation, theta, theta_add, Setting, ThetaVector};
use proptest::prelude::*;

fn theta_vec() -> impl Strategy<Value = ThetaVector> {
    let keys = prop::sample::select(vec![("(e)", "q0"), ("(e)", "q1"), ("(Z2)", "q0"), ("(D3)", "q0")]);
    (prop::collection::vec((keys, -5i64..=5), 0..5), prop::option::of(0u8..=0)).prop_map(|(es, t11)| {
        let mut v = ThetaVector::zero(t11);
        for ((o, c), x) in es {
            *v.entries.entry((o.to_string(), c.to_string())).or_insert(0) += x;
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_commutative_and_associative(a in theta_vec(), b in theta_vec(), c in theta_vec()) {
        prop_assert_eq!(theta_add(&a, &b).unwrap(), theta_add(&b, &a).unwrap());
        let l = theta_add(&theta_add(&a, &b).unwrap(), &c).unwrap();
        let r = theta_add(&a, &theta_add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        prop_assert!(theta_add(&a, &a.negated()).unwrap().is_zero());
    }

    #[test]
    fn omega_is_c1_and_mu_is_monotone(eps in 0.01f64..2.0, u in 0.0f64..0.999) {
        let s = u * eps;
        let h = 1e-6 * eps;
        if s > h && s + h < eps {
            let d1 = (well_omega(s, eps).unwrap() - well_omega(s - h, eps).unwrap()) / h;
            let d2 = (well_omega(s + h, eps).unwrap() - well_omega(s, eps).unwrap()) / h;
            prop_assert!((d1 - d2).abs() < 1e-4 * eps.max(1.0));
        }
        for kind in [BumpKind::Cubic, BumpKind::Quintic] {
            let m = bump_mu(s, eps, kind).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(bump_mu((s + 0.001 * eps).min(eps), eps, kind).unwrap() >= m);
            if s <= 2.0 * eps / 3.0 {
                prop_assert_eq!(m, 0.0);
            }
        }
    }

    #[test]
    fn orbits_are_group_invariant(x in -2.0f64..2.0, y in -2.0f64..2.0, n in 2usize..7) {
        let g = FiniteGroupRep::dihedral(n).unwrap();
        let p = vector(&[x, y]);
        let orbit = g.orbit(&p).unwrap();
        prop_assert_eq!(g.order() % orbit.len(), 0);
        for e in 0..g.order() {
            let q = g.act(e, &p);
            prop_assert!(orbit.iter().any(|o| (o - &q).norm() < 1e-9));
        }
    }

    #[test]
    fn degree_of_a_linear_field_is_the_sign_of_its_determinant(
        entries in prop::collection::vec(-1.0f64..1.0, 9),
        d in 1usize..=3,
    ) {
        let a = Matrix::from_fn(d, d, |i, j| entries[3 * i + j] + if i == j { 0.1 } else { 0.0 });
        let det = a.determinant();
        prop_assume!(det.abs() > 1e-2);
        let deg = kronecker_degree(&|z: &Vector| &a * z, &vec![-1.0; d], &vec![1.0; d]).unwrap();
        prop_assert_eq!(deg, det.signum() as i64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn orbit_normal_maps_are_units(r in 0.6f64..1.6, angle in 0.15f64..0.9) {
        // generic points of the fundamental sector of D3
        let num = Numerics::default();
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let setting = Setting::new(g.clone(), DomainExpr::FullSpace, num).unwrap();
        let x = vector(&[r * angle.cos(), r * angle.sin()]);
        let f = orbit_normal(&g, &DomainExpr::FullSpace, &x, 0.1).unwrap();
        let (t, _) = theta(&setting, &f).unwrap();
        let (o, c) = setting.locate(&x).unwrap();
        prop_assert_eq!(t, ThetaVector::unit(Some(0), &o, &c));
    }

    #[test]
    fn perturbed_maps_stay_equivariant(x in 0.7f64..1.3, dx in -0.05f64..0.05, dy in -0.05f64..0.05) {
        let num = Numerics::default();
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let setting = Setting::new(g.clone(), DomainExpr::FullSpace, num).unwrap();
        let f = orbit_normal(&g, &DomainExpr::FullSpace, &vector(&[x, 0.0]), 0.2).unwrap();
        let step = first_perturbation(&setting, &f).unwrap().unwrap();
        let z = vector(&[x + dx, dy]);
        if let Ok(v) = step.perturbed.grad(&z) {
            for e in 0..g.order() {
                let w = step.perturbed.grad(&g.act(e, &z)).unwrap();
                prop_assert!((w - g.matrix(e) * &v).norm() < 1e-9);
            }
        }
    }
}
