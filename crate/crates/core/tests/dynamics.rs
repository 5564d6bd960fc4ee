mod common;

use common::{models, rng};
use nalgebra::DMatrix;
use qhm_core::dynamics::*;
use qhm_core::error::Error;
use qhm_core::forms::omega_at;
use qhm_core::lie::{phi_dot, LieGroupModel, ReTrace, ReTracePower};
use qhm_core::moduli::*;
use qhm_core::surface::stock;

fn chart(p: &qhm_core::surface::GluingPattern, m: &LieGroupModel) -> ModuliChart {
    build_chart(p, m, None).unwrap()
}

fn word(c: &ModuliChart, w: &str) -> GenWord {
    c.parse_word(w).unwrap()
}

fn max_dist(a: &ModuliPoint, b: &ModuliPoint) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| x.distance(y)).fold(0.0, f64::max)
}

/// Flow of `φ∘ev_a` on the one-holed torus moves `b` once across `a`.
fn a_flow_data(c: &ModuliChart) -> IntersectionData {
    IntersectionData { target: 1, segments: vec![word(c, "b"), vec![]], signs: vec![-1], loop_word: word(c, "a") }
}

/// Flow of `φ∘ev_b` moves `a` once across `b`.
fn b_flow_data(c: &ModuliChart) -> IntersectionData {
    IntersectionData { target: 0, segments: vec![word(c, "a"), vec![]], signs: vec![1], loop_word: word(c, "b") }
}

#[test]
fn constant_has_zero_hamiltonian_vector() {
    let mut r = rng();
    for m in models() {
        for (_, pat) in stock::grid() {
            let c = chart(&pat, &m);
            let v = hamiltonian_vector(&c, &c.random_point(&mut r), &Constant(2.5)).unwrap();
            assert_eq!(v.amax(), 0.0);
        }
    }
}

/// Independent solve of `Ωv = df`, `dΦ v = 0` by the SVD pseudoinverse.
fn pinv_oracle(c: &ModuliChart, p: &ModuliPoint, df: &TangentVector) -> TangentVector {
    let om = omega_at(c, p).unwrap();
    let (_, dphi) = boundary_jacobian(c, p);
    let mut a = DMatrix::zeros(om.nrows() + dphi.nrows(), om.ncols());
    a.view_mut((0, 0), om.shape()).copy_from(&om);
    a.view_mut((om.nrows(), 0), dphi.shape()).copy_from(&dphi);
    let mut rhs = TangentVector::zeros(a.nrows());
    rhs.rows_mut(0, df.len()).copy_from(df);
    a.pseudo_inverse(1e-10).unwrap() * rhs
}

#[test]
fn hamiltonian_vector_matches_pseudoinverse() {
    let mut r = rng();
    for m in models() {
        for (name, pat) in stock::grid() {
            let c = chart(&pat, &m);
            if !c.info().a3 {
                continue;
            }
            let ends = c.boundary_ends();
            for e in (0..ends.len()).filter(|&e| ends[e].0 == ends[e].1) {
                let f = LoopFunction::new(&c, c.boundary_words()[e].clone(), &ReTrace).unwrap();
                for _ in 0..3 {
                    let p = c.random_point(&mut r);
                    let v = hamiltonian_vector(&c, &p, &f).unwrap();
                    let oracle = pinv_oracle(&c, &p, &f.differential(&c, &p).unwrap());
                    assert!((v - oracle).amax() < 1e-8, "{name}");
                }
            }
        }
    }
}

#[test]
fn non_invariant_function_is_rejected() {
    let mut r = rng();
    let m = LieGroupModel::su2();
    let c = chart(&stock::torus_one_hole(), &m);
    let f = FnField(|_: &ModuliChart, p: &ModuliPoint| p.values[0].matrix[(0, 0)].im);
    let p = c.random_point(&mut r);
    assert!(gauge_invariance_defect(&c, &p, &f, &mut r, 5).unwrap() > 1e-3);
    assert!(matches!(hamiltonian_vector(&c, &p, &f), Err(Error::Solve { .. })));
}

/// On the cylinder `X_f = (0, φ̇(a))` and the flow is `(a, c·exp(tφ̇(a)))`.
#[test]
fn cylinder_boundary_flow() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::cylinder(), &m);
        assert_eq!(c.format_gen_word(&c.boundary_words()[0]), "a");
        let vertex = c.boundary_ends()[0].0;
        let f = boundary_loop_function(&c, vertex, &ReTrace).unwrap();
        for _ in 0..10 {
            let p = c.random_point(&mut r);
            let pd = phi_dot(&m, &ReTrace, &p.values[0]).unwrap();
            let v = hamiltonian_vector(&c, &p, &f).unwrap();
            assert!(c.block(&v, 0).amax() < 1e-12);
            assert!((c.block(&v, 1) - &pd).amax() < 1e-12);

            assert!(max_dist(&boundary_loop_flow(&c, &p, vertex, &ReTrace, 0.0).unwrap(), &p) < 1e-15);
            let t = 0.7;
            let q = boundary_loop_flow(&c, &p, vertex, &ReTrace, t).unwrap();
            assert!(q.values[0].distance(&p.values[0]) < 1e-13);
            assert!(q.values[1].distance(&p.values[1].mul(&m.exp(&(&pd * t)))) < 1e-12);

            let vel = curve_velocity(&c, &p, |s| boundary_loop_flow(&c, &p, vertex, &ReTrace, s), 1e-5).unwrap();
            assert!((vel - v).amax() < 1e-7);
        }
    }
    let c = chart(&stock::cylinder_multi(2), &LieGroupModel::su2());
    let p = c.random_point(&mut r);
    assert!(matches!(boundary_loop_flow(&c, &p, c.boundary_ends()[0].0, &ReTrace, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn goldman_flow_derivative_matches_hamiltonian_vector() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        for (data, lw) in [(a_flow_data(&c), "a"), (b_flow_data(&c), "b")] {
            let f = LoopFunction::new(&c, word(&c, lw), &ReTrace).unwrap();
            for _ in 0..50 {
                let p = c.random_point(&mut r);
                let v = hamiltonian_vector(&c, &p, &f).unwrap();
                let vel = curve_velocity(&c, &p, |s| goldman_flow(&c, &p, std::slice::from_ref(&data), &ReTrace, s), 1e-5).unwrap();
                assert!((vel - v).amax() <= 1e-7, "{lw}");
            }
        }
    }
}

#[test]
fn goldman_flow_examples_and_group_law() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        let data = a_flow_data(&c);
        for _ in 0..10 {
            let p = c.random_point(&mut r);
            let still = IntersectionData { target: 1, segments: vec![word(&c, "b")], signs: vec![], loop_word: word(&c, "a") };
            assert!(max_dist(&goldman_flow(&c, &p, &[still], &ReTrace, 1.3).unwrap(), &p) == 0.0);

            // One crossing at the start of b: left multiplication by exp(tφ̇(a)).
            let front = IntersectionData { target: 1, segments: vec![vec![], word(&c, "b")], signs: vec![1], loop_word: word(&c, "a") };
            let q = goldman_flow(&c, &p, &[front], &ReTrace, 0.4).unwrap();
            let pd = phi_dot(&m, &ReTrace, &p.values[0]).unwrap();
            assert!(q.values[1].distance(&m.exp(&(pd * 0.4)).mul(&p.values[1])) < 1e-13);

            let (s, t) = (0.3, 0.45);
            let once = goldman_flow(&c, &p, std::slice::from_ref(&data), &ReTrace, s + t).unwrap();
            let twice = goldman_flow(&c, &goldman_flow(&c, &p, std::slice::from_ref(&data), &ReTrace, s).unwrap(), std::slice::from_ref(&data), &ReTrace, t).unwrap();
            assert!(max_dist(&once, &twice) <= 1e-12);
            assert!(phi_drift(&c, &p, &once) <= 1e-10);

            let cyl = chart(&stock::cylinder(), &m);
            let vertex = cyl.boundary_ends()[0].0;
            let q = cyl.random_point(&mut r);
            let once = boundary_loop_flow(&cyl, &q, vertex, &ReTrace, s + t).unwrap();
            let mid = boundary_loop_flow(&cyl, &q, vertex, &ReTrace, s).unwrap();
            let twice = boundary_loop_flow(&cyl, &mid, vertex, &ReTrace, t).unwrap();
            assert!(max_dist(&once, &twice) <= 1e-12);
        }
    }
}

#[test]
fn inconsistent_intersection_data() {
    let m = LieGroupModel::su2();
    let c = chart(&stock::torus_one_hole(), &m);
    let p = c.identity_point();
    let wrong = IntersectionData { target: 1, segments: vec![word(&c, "a"), vec![]], signs: vec![1], loop_word: word(&c, "a") };
    assert!(goldman_flow(&c, &p, &[wrong], &ReTrace, 1.0).is_err());
    let short = IntersectionData { target: 1, segments: vec![word(&c, "b")], signs: vec![1], loop_word: word(&c, "a") };
    assert!(short.validate(&c).is_err());
    let sign = IntersectionData { target: 1, segments: vec![word(&c, "b"), vec![]], signs: vec![2], loop_word: word(&c, "a") };
    assert!(sign.validate(&c).is_err());
}

#[test]
fn rk4_matches_explicit_flows() {
    let mut r = rng();
    for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
        let c = chart(&stock::torus_one_hole(), &m);
        let f = LoopFunction::new(&c, word(&c, "a"), &ReTrace).unwrap();
        let p = c.random_point(&mut r);
        let exact = goldman_flow(&c, &p, &[a_flow_data(&c)], &ReTrace, 1.0).unwrap();
        let rk = flow_integrate(&c, &p, &f, 1.0, 1000).unwrap();
        assert!(max_dist(&exact, &rk) <= 1e-6, "{:e}", max_dist(&exact, &rk));
        assert!(phi_drift(&c, &p, &rk) <= 1e-6);

        let cyl = chart(&stock::cylinder(), &m);
        let vertex = cyl.boundary_ends()[0].0;
        let f = boundary_loop_function(&cyl, vertex, &ReTrace).unwrap();
        let q = cyl.random_point(&mut r);
        let exact = boundary_loop_flow(&cyl, &q, vertex, &ReTrace, 1.0).unwrap();
        let rk = flow_integrate(&cyl, &q, &f, 1.0, 1000).unwrap();
        assert!(max_dist(&exact, &rk) <= 1e-6);

        let still = flow_integrate(&c, &p, &Constant(1.0), 1.0, 10).unwrap();
        assert_eq!(max_dist(&still, &p), 0.0);
    }
}

#[test]
fn explicit_flow_preserves_omega() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        for _ in 0..5 {
            let p = c.random_point(&mut r);
            let flow = |q: &ModuliPoint| goldman_flow(&c, q, &[a_flow_data(&c)], &ReTrace, 0.8);
            assert!(omega_invariance_defect(&c, &p, flow, 1e-5).unwrap() <= 1e-5);
        }
    }
}

fn handle_bracket(c: &ModuliChart) -> BracketData {
    BracketData {
        alpha_loop: word(c, "a"),
        beta_loop: word(c, "b"),
        crossings: vec![Crossing { sign: -1, alpha_conjugator: vec![], beta_conjugator: vec![] }],
    }
}

#[test]
fn goldman_bracket_matches_numeric_bracket() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        let (phi, psi) = (ReTrace, ReTracePower(2));
        let fa = LoopFunction::new(&c, word(&c, "a"), &phi).unwrap();
        let gb = LoopFunction::new(&c, word(&c, "b"), &psi).unwrap();
        let data = handle_bracket(&c);
        for _ in 0..20 {
            let p = c.random_point(&mut r);
            let numeric = poisson_bracket_numeric(&c, &p, &fa, &gb).unwrap();
            let explicit = goldman_bracket(&c, &p, &data, &phi, &psi).unwrap();
            assert!((numeric - explicit).abs() <= 1e-8, "{}: {numeric} {explicit}", m.name());

            // Re-basing both loops along a common word.
            for g in ["b", "a b^-1", "a a"] {
                let gamma = word(&c, g);
                let mut moved = data.clone();
                moved.crossings[0].alpha_conjugator = gamma.clone();
                moved.crossings[0].beta_conjugator = gamma;
                assert!((goldman_bracket(&c, &p, &moved, &phi, &psi).unwrap() - explicit).abs() <= 1e-12);
            }
            let none = BracketData { crossings: vec![], ..data.clone() };
            assert_eq!(goldman_bracket(&c, &p, &none, &phi, &psi).unwrap(), 0.0);
        }
    }
}

#[test]
fn bracket_algebra() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        let f = LoopFunction::new(&c, word(&c, "a"), &ReTrace).unwrap();
        let g = LoopFunction::new(&c, word(&c, "a b"), &ReTrace).unwrap();
        let h = LoopFunction::new(&c, word(&c, "b"), &ReTracePower(2)).unwrap();
        for _ in 0..5 {
            let p = c.random_point(&mut r);
            assert!(poisson_bracket_numeric(&c, &p, &f, &f).unwrap().abs() < 1e-12);
            assert_eq!(poisson_bracket_numeric(&c, &p, &f, &Constant(3.0)).unwrap(), 0.0);
            let fg = poisson_bracket_numeric(&c, &p, &f, &g).unwrap();
            let gf = poisson_bracket_numeric(&c, &p, &g, &f).unwrap();
            assert!((fg + gf).abs() < 1e-12);
            let j = jacobi_defect(&c, &p, [&f, &g, &h], 1e-4).unwrap();
            assert!(j <= 1e-6, "{j:e}");
        }
    }
}
