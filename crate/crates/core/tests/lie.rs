mod common;

use common::{conjugate_oracle, models, rng};
use nalgebra::DVector;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use qhm_core::lie::*;
use rand::Rng;

#[test]
fn su2_bracket_matches_matrix_commutator() {
    let m = LieGroupModel::su2();
    let (x1, x2) = (m.unit(0), m.unit(1));
    let b = m.bracket(&x1, &x2);
    let a = m.to_matrix(&x1);
    let c = m.to_matrix(&x2);
    let oracle = m.coords(&(&a * &c - &c * &a));
    assert!((&b - &oracle).amax() < 1e-15);
    assert!((b - m.unit(2)).amax() < 1e-15);
}

#[test]
fn brackets_vanish_where_expected() {
    let mut r = rng();
    for m in models() {
        let x = m.random_algebra(&mut r, 1.0);
        assert!(m.bracket(&x, &x).amax() < 1e-15);
    }
    let t = LieGroupModel::torus(2);
    let (x, y) = (t.random_algebra(&mut r, 1.0), t.random_algebra(&mut r, 1.0));
    assert_eq!(t.bracket(&x, &y), t.zero());
}

#[test]
fn adjoint_examples() {
    let mut r = rng();
    for m in models() {
        let x = m.random_algebra(&mut r, 1.0);
        assert!((m.adjoint(&m.identity(), &x) - &x).amax() < 1e-15);
        assert!((m.adjoint(&m.exp(&x), &x) - &x).amax() < 1e-13);
        for _ in 0..20 {
            let g = m.random_element(&mut r);
            let y = m.random_algebra(&mut r, 1.0);
            assert!((m.adjoint(&g, &y) - conjugate_oracle(&m, &g, &y)).amax() < 1e-12);
        }
    }
}

#[test]
fn exponential_examples() {
    let su2 = LieGroupModel::su2();
    assert!(su2.exp(&su2.zero()).distance(&su2.identity()) < 1e-15);
    // exp(θX₃) = diag(e^{−iθ/2}, e^{iθ/2}), so θ = 2π gives −I.
    let g = su2.exp(&(su2.unit(2) * (2.0 * std::f64::consts::PI)));
    let minus = GroupElement::new(-su2.identity().matrix);
    assert!(g.distance(&minus) < 1e-14);

    let sl = LieGroupModel::sl2r();
    let n = nalgebra::Matrix2::new(0.0, 2.5, 0.0, 0.0).map(C::from);
    let n = nalgebra::DMatrix::from_iterator(2, 2, n.iter().copied());
    let xi = sl.coords(&n);
    let expect = sl.identity().matrix + &n;
    assert!((sl.exp(&xi).matrix - expect).camax() < 1e-15);
}

#[test]
fn eta_examples() {
    let su2 = LieGroupModel::su2();
    let e = su2.identity();
    let v = su2.eta_at(&e, &su2.unit(0), &su2.unit(1), &su2.unit(2));
    assert!((v - 0.25).abs() < 1e-15);
    let mut r = rng();
    for m in models() {
        let g = m.random_element(&mut r);
        let (u, w) = (m.random_algebra(&mut r, 1.0), m.random_algebra(&mut r, 1.0));
        assert!(m.eta_at(&g, &u, &u, &w).abs() < 1e-15);
    }
    let t = LieGroupModel::torus(2);
    let g = t.random_element(&mut r);
    assert_eq!(t.eta_at(&g, &t.unit(0), &t.unit(1), &t.unit(0)), 0.0);
}

#[test]
fn beta_examples() {
    let mut r = rng();
    for m in models() {
        let e = m.identity();
        let u = (m.random_algebra(&mut r, 1.0), m.random_algebra(&mut r, 1.0));
        let w = (m.random_algebra(&mut r, 1.0), m.random_algebra(&mut r, 1.0));
        let at_e = 0.5 * (m.inner(&u.0, &w.1) - m.inner(&w.0, &u.1));
        assert!((m.beta_at(&e, &e, (&u.0, &u.1), (&w.0, &w.1)) - at_e).abs() < 1e-15);
        let z = m.zero();
        let v = m.beta_at(&e, &e, (&u.0, &z), (&z, &w.1));
        assert!((v - 0.5 * m.inner(&u.0, &w.1)).abs() < 1e-15);

        // β = ½ pr₁*θ^L · pr₂*θ^R with θ^R = Ad_g θ^L, antisymmetrized.
        let (g1, g2) = (m.random_element(&mut r), m.random_element(&mut r));
        let tl = |x: &(AlgebraVector, AlgebraVector)| x.0.clone();
        let tr = |x: &(AlgebraVector, AlgebraVector)| conjugate_oracle(&m, &g2, &x.1);
        let oracle = 0.5 * (m.inner(&tl(&u), &tr(&w)) - m.inner(&tl(&w), &tr(&u)));
        let val = m.beta_at(&g1, &g2, (&u.0, &u.1), (&w.0, &w.1));
        assert!((val - oracle).abs() < 1e-12);
        assert!((val + m.beta_at(&g1, &g2, (&w.0, &w.1), (&u.0, &u.1))).abs() < 1e-15);
    }
}

#[test]
fn phi_dot_examples() {
    let mut r = rng();
    let su2 = LieGroupModel::su2();
    let constant = FnInvariant(|_: &GroupElement| 3.0);
    let g = su2.random_element(&mut r);
    assert!(phi_dot(&su2, &constant, &g).unwrap().amax() < 1e-10);
    assert!(phi_dot(&su2, &ReTrace, &su2.identity()).unwrap().amax() < 1e-15);
    for m in models() {
        for phi in [&ReTrace as &dyn InvariantFunction, &ReTracePower(3)] {
            for _ in 0..10 {
                let g = m.random_element(&mut r);
                let h = m.random_element(&mut r);
                let closed = phi_dot(&m, phi, &g).unwrap();
                let fd = phi_dot_fd(&m, phi, &g, 1e-5);
                assert!((&closed - &fd).amax() < 1e-8, "{} closed form vs FD", m.name());
                let moved = h.mul(&g).mul(&m.inverse(&h));
                let lhs = phi_dot_fd(&m, phi, &moved, 1e-5);
                let rhs = m.adjoint(&h, &fd);
                assert!((lhs - rhs).amax() < 1e-6, "{} equivariance", m.name());
            }
        }
    }
    let bad = NonInvariant(|g: &GroupElement| g.matrix[(0, 0)].re);
    assert!(matches!(phi_dot(&su2, &bad, &g), Err(qhm_core::error::Error::NotInvariant { .. })));
    assert!(invariance_defect(&su2, &ReTrace, &mut r, 20) < 1e-12);
    let probe = FnInvariant(|g: &GroupElement| g.matrix[(0, 0)].im);
    assert!(invariance_defect(&su2, &probe, &mut r, 20) > 1e-3);
}

#[test]
fn random_element_is_deterministic_and_valid() {
    for m in models() {
        let a = m.random_element(&mut rng());
        let b = m.random_element(&mut rng());
        assert_eq!(a, b);
        let mut r = rng();
        for _ in 0..100 {
            let g = m.random_element(&mut r);
            assert!(m.constraint_residual(&g.matrix) < 1e-10);
        }
    }
    // Abelian replay: the element is exp of the recorded coordinates.
    let t = LieGroupModel::torus(2);
    let mut r = rng();
    let recorded: Vec<f64> = (0..2).map(|_| r.gen_range(-1.0..=1.0)).collect();
    let g = t.random_element(&mut rng());
    for (k, x) in recorded.iter().enumerate() {
        assert!((g.matrix[(k, k)] - C::new(0.0, *x).exp()).norm() < 1e-15);
    }
}

#[test]
fn model_invariants() {
    for m in models().into_iter().chain([LieGroupModel::so3()]) {
        let d = m.dim();
        let g = m.gram();
        assert!((g - g.transpose()).amax() < 1e-15);
        assert!(g.determinant().abs() > 1e-12);
        for i in 0..d {
            for j in 0..d {
                let (x, y) = (m.unit(i), m.unit(j));
                assert!((m.bracket(&x, &y) + m.bracket(&y, &x)).amax() < 1e-14);
                for k in 0..d {
                    let z = m.unit(k);
                    let inv = m.inner(&m.bracket(&x, &y), &z) + m.inner(&y, &m.bracket(&x, &z));
                    assert!(inv.abs() < 1e-12);
                    let jac = m.bracket(&x, &m.bracket(&y, &z))
                        + m.bracket(&y, &m.bracket(&z, &x))
                        + m.bracket(&z, &m.bracket(&x, &y));
                    assert!(jac.amax() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn ad_is_metric_orthogonal() {
    let mut r = rng();
    for m in models() {
        for _ in 0..100 {
            let g = m.random_element(&mut r);
            let a = m.ad_group_matrix(&g);
            assert!((a.transpose() * m.gram() * &a - m.gram()).amax() < 1e-10);
        }
    }
}

#[test]
fn retraction_keeps_long_products_in_group() {
    let mut r = rng();
    for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
        let step = m.exp(&m.random_algebra(&mut r, 0.01));
        let mut g = m.identity();
        for k in 0..10_000 {
            g = g.mul(&step);
            if k % 100 == 99 {
                g = m.retract(&g);
            }
        }
        assert!(m.constraint_residual(&g.matrix) < 1e-10);
    }
}

/// `ι(ξ^L − ξ′^R)η = −d(½(θ^R·ξ′ + θ^L·ξ))`, the exterior derivative by
/// central differences along left-invariant fields.
#[test]
fn contraction_identity() {
    let mut r = rng();
    let h = 1e-4;
    for m in models() {
        for _ in 0..20 {
            let g = m.random_element(&mut r);
            let (xp, x) = (m.random_algebra(&mut r, 1.0), m.random_algebra(&mut r, 1.0));
            let (y, z) = (m.random_algebra(&mut r, 1.0), m.random_algebra(&mut r, 1.0));
            let alpha = |p: &GroupElement, u: &AlgebraVector| 0.5 * (m.inner(&m.adjoint(p, u), &xp) + m.inner(u, &x));
            let along = |dir: &AlgebraVector, u: &AlgebraVector| {
                let plus = g.mul(&m.exp(&(dir * h)));
                let minus = g.mul(&m.exp(&(dir * -h)));
                (alpha(&plus, u) - alpha(&minus, u)) / (2.0 * h)
            };
            let d_alpha = along(&y, &z) - along(&z, &y) - alpha(&g, &m.bracket(&y, &z));
            let field = &x - m.adjoint(&m.inverse(&g), &xp);
            let lhs = m.eta_at(&g, &field, &y, &z);
            assert!((lhs + d_alpha).abs() < 1e-5, "{}: {lhs} vs {}", m.name(), -d_alpha);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_one_parameter_law(c in proptest::collection::vec(-1.0f64..1.0, 3), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
            let xi = DVector::from_vec(c.clone());
            let lhs = m.exp(&(&xi * (s + t)));
            let rhs = m.exp(&(&xi * s)).mul(&m.exp(&(&xi * t)));
            prop_assert!(lhs.distance(&rhs) < 1e-10);
        }
    }

    #[test]
    fn adjoint_preserves_metric(c in proptest::collection::vec(-1.0f64..1.0, 9)) {
        for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
            let g = m.exp(&DVector::from_row_slice(&c[0..3]));
            let (x, y) = (DVector::from_row_slice(&c[3..6]), DVector::from_row_slice(&c[6..9]));
            let lhs = m.inner(&m.adjoint(&g, &x), &m.adjoint(&g, &y));
            prop_assert!((lhs - m.inner(&x, &y)).abs() < 1e-10);
        }
    }

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(c in proptest::collection::vec(-2.0f64..2.0, 7)) {
        let m = LieGroupModel::su2();
        let (x, y, z) = (DVector::from_row_slice(&c[0..3]), DVector::from_row_slice(&c[3..6]), m.unit(0));
        let a = c[6];
        prop_assert!((m.bracket(&x, &y) + m.bracket(&y, &x)).amax() < 1e-13);
        let lhs = m.bracket(&(&x * a + &z), &y);
        let rhs = m.bracket(&x, &y) * a + m.bracket(&z, &y);
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }
}
