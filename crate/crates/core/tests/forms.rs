mod common;

use common::{models, rng};
use nalgebra::DMatrix;
use qhm_core::forms::*;
use qhm_core::lie::{GroupElement, LieGroupModel};
use qhm_core::moduli::*;
use qhm_core::surface::{add_interior_vertex_cut, cut_diagonal, stock, GluingPattern};
use rand::Rng;

fn chart(p: &GluingPattern, m: &LieGroupModel) -> ModuliChart {
    build_chart(p, m, None).unwrap()
}

fn random_pair<R: Rng>(m: &LieGroupModel, n: usize, r: &mut R) -> SeveraPair {
    let a = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    SeveraPair {
        value: m.random_element(r),
        differential: DMatrix::from_fn(m.dim(), n, |_, _| r.gen_range(-1.0..1.0)),
        two_form: &a - a.transpose(),
    }
}

fn pair_defect(p: &SeveraPair, q: &SeveraPair) -> f64 {
    p.value
        .distance(&q.value)
        .max(max_abs(&(&p.differential - &q.differential)))
        .max(max_abs(&(&p.two_form - &q.two_form)))
}

#[test]
fn severa_group_laws() {
    let mut r = rng();
    for m in models() {
        for _ in 0..50 {
            let n = 5;
            let (p, q, s) = (random_pair(&m, n, &mut r), random_pair(&m, n, &mut r), random_pair(&m, n, &mut r));
            let unit = SeveraPair::unit(&m, n);
            assert!(pair_defect(&severa_mul(&m, &p, &unit).unwrap(), &p) < 1e-13);
            assert!(pair_defect(&severa_mul(&m, &unit, &p).unwrap(), &p) < 1e-13);
            let inv = severa_mul(&m, &p, &p.inverse(&m)).unwrap();
            assert!(pair_defect(&inv, &unit) < 1e-13);
            let left = severa_mul(&m, &severa_mul(&m, &p, &q).unwrap(), &s).unwrap();
            let right = severa_mul(&m, &p, &severa_mul(&m, &q, &s).unwrap()).unwrap();
            assert!(pair_defect(&left, &right) < 1e-12);
            let prod = severa_mul(&m, &p, &q).unwrap();
            assert!(max_abs(&(&prod.two_form + prod.two_form.transpose())) < 1e-13);
        }
        let bad = random_pair(&m, 4, &mut r);
        assert!(severa_mul(&m, &random_pair(&m, 5, &mut r), &bad).is_err());
    }
}

/// `(g,0)•(g⁻¹,0) = (e,0)` with the inverse map's own differential.
#[test]
fn product_with_inverse_map_is_unit() {
    let mut r = rng();
    for m in models() {
        for _ in 0..20 {
            let p = SeveraPair::from_map(m.random_element(&mut r), DMatrix::from_fn(m.dim(), 4, |_, _| r.gen_range(-1.0..1.0)));
            let q = severa_mul(&m, &p, &p.inverse(&m)).unwrap();
            assert!(q.value.distance(&m.identity()) < 1e-13);
            assert!(max_abs(&q.differential) < 1e-13);
            assert!(max_abs(&q.two_form) < 1e-13);
        }
    }
}

#[test]
fn cartan_identities() {
    let mut r = rng();
    for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
        for _ in 0..30 {
            let (g1, g2) = (m.random_element(&mut r), m.random_element(&mut r));
            let t = || nalgebra::DVector::from_fn(2 * m.dim(), |_, _| 0.0);
            let mut xs = [t(), t(), t()];
            for x in &mut xs {
                for v in x.iter_mut() {
                    *v = r.gen_range(-1.0..1.0);
                }
            }
            let (inv, mult) = cartan_identity_defects(&m, &g1, &g2, [&xs[0], &xs[1], &xs[2]], FD_STEP);
            assert!(inv < 1e-5 && mult < 1e-5, "{inv:e} {mult:e}");
        }
    }
}

/// Pair `(holonomy of w, 0)` as a function of the point.
fn word_pair<'a>(c: &'a ModuliChart, w: &'a GenWord) -> impl Fn(&ModuliPoint) -> SeveraPair + 'a {
    move |p: &ModuliPoint| {
        let (v, j) = word_jacobian(c, p, w);
        SeveraPair::from_map(v, j)
    }
}

#[test]
fn homomorphism_defect_is_additive() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        let (a, b) = (c.parse_word("a").unwrap(), c.parse_word("b a^-1").unwrap());
        let (pa, pb) = (word_pair(&c, &a), word_pair(&c, &b));
        for _ in 0..10 {
            let p = c.random_point(&mut r);
            let xs = random_triple(&c, &mut r);
            let xs = [&xs[0], &xs[1], &xs[2]];
            let prod = |q: &ModuliPoint| severa_mul(&m, &pa(q), &pb(q)).unwrap();
            let lhs = homomorphism_defect(&c, &p, prod, xs, FD_STEP);
            let da = homomorphism_defect(&c, &p, &pa, xs, FD_STEP);
            let db = homomorphism_defect(&c, &p, &pb, xs, FD_STEP);
            assert!((lhs - da - db).abs() < 1e-4, "{}", (lhs - da - db).abs());
            // A single generator has ω = 0, so the defect is −Φ*η.
            let here = pa(&p);
            let eta = m.eta_at(&here.value, &(&here.differential * xs[0]), &(&here.differential * xs[1]), &(&here.differential * xs[2]));
            assert!((da + eta).abs() < 1e-6);
            let unit = |_: &ModuliPoint| SeveraPair::unit(&m, c.tangent_dim());
            assert_eq!(homomorphism_defect(&c, &p, unit, xs, FD_STEP), 0.0);
            if m.is_abelian() {
                assert!(lhs.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn two_gon_has_zero_form() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::ngon(2), &m);
        for _ in 0..10 {
            assert_eq!(max_abs(&omega_at(&c, &c.random_point(&mut r)).unwrap()), 0.0);
        }
    }
}

/// `ω(v,w) = −½(⟨δ₁v, Ad_{g₂}δ₂w⟩ − ⟨δ₁w, Ad_{g₂}δ₂v⟩)` on the triangle.
#[test]
fn triangle_closed_form() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::ngon(3), &m);
        for _ in 0..20 {
            let p = c.random_point(&mut r);
            let (v, w) = (c.random_tangent(&mut r), c.random_tangent(&mut r));
            let g2 = &p.values[1];
            let oracle = -0.5
                * (m.inner(&c.block(&v, 0), &m.adjoint(g2, &c.block(&w, 1)))
                    - m.inner(&c.block(&w, 0), &m.adjoint(g2, &c.block(&v, 1))));
            let om = omega_at(&c, &p).unwrap();
            assert!((omega_eval(&om, &v, &w) - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn omega_is_antisymmetric() {
    let mut r = rng();
    for m in models() {
        for (name, pat) in stock::grid() {
            let c = chart(&pat, &m);
            let om = omega_at(&c, &c.random_point(&mut r)).unwrap();
            assert!(max_abs(&(&om + om.transpose())) < 1e-13, "{name}");
        }
    }
}

#[test]
fn d_omega_and_moment_on_grid() {
    let mut r = rng();
    for m in models() {
        for (name, pat) in stock::grid() {
            let c = chart(&pat, &m);
            let tol = if m.is_abelian() { 1e-12 } else { 1e-5 };
            for _ in 0..10 {
                let p = c.random_point(&mut r);
                let xs = random_triple(&c, &mut r);
                let d = verify_d_omega(&c, &p, [&xs[0], &xs[1], &xs[2]], FD_STEP).unwrap();
                assert!(d <= tol, "{name} {}: {d:e}", m.name());
                let xi = c.random_vertex_vector(&mut r);
                let mo = verify_moment(&c, &p, &xi, &xs[0]).unwrap();
                assert!(mo <= 1e-12, "{name} {}: {mo:e}", m.name());
                assert_eq!(verify_moment(&c, &p, &(xi * 0.0), &xs[0]).unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn kernel_and_rank_identities() {
    let mut r = rng();
    for m in models() {
        for (name, pat) in stock::grid() {
            let c = chart(&pat, &m);
            for _ in 0..10 {
                let rep = kernel_report(&c, &c.random_point(&mut r)).unwrap();
                if c.info().a3 {
                    assert!(rep.rank_identity_holds(), "{name}");
                    assert!(rep.min_degeneracy_sigma >= 1e-9, "{name}");
                    assert!(rep.kernel_angle.unwrap() <= 1e-7, "{name}");
                } else {
                    // An interior vertex acts without moving Φ.
                    assert!(!m.is_abelian() || rep.rank_dphi == 0);
                    assert!(rep.kernel_angle.is_none());
                }
            }
        }
    }
}

#[test]
fn rank_examples() {
    let mut r = rng();
    for m in [LieGroupModel::su2(), LieGroupModel::sl2r()] {
        for pat in [stock::torus_one_hole(), stock::genus_two_one_hole()] {
            let c = chart(&pat, &m);
            let rep = kernel_report(&c, &c.identity_point()).unwrap();
            assert_eq!(rep.rank_dphi, 0);
            let rep = kernel_report(&c, &c.random_point(&mut r)).unwrap();
            assert_eq!(rep.rank_dphi, 3 - rep.stabilizer_dim);
        }
    }
    let m = LieGroupModel::torus(2);
    let c = chart(&stock::torus_one_hole(), &m);
    let rep = kernel_report(&c, &c.random_point(&mut r)).unwrap();
    assert_eq!(rep.rank_dphi, 0);
    assert_eq!(max_abs(&rep.dphi_matrix), 0.0);
    // With Φ = e the condition reads ξ + ξ = 0, so every ξ_M vanishes and
    // ω is nondegenerate.
    assert_eq!(rep.kernel_basis.ncols(), 0);
    assert_eq!(rep.explicit_kernel.ncols(), 0);
}

#[test]
fn identity_map_compares_to_zero() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::genus_two_one_hole(), &m);
        let id = GeneratorMap::by_names(&c, &c, &[]).unwrap();
        assert_eq!(compare_patterns(&c, &c, &id, Some(&id), 5, &mut r).unwrap(), 0.0);
    }
}

#[test]
fn diagonal_cut_leaves_omega_unchanged() {
    let mut r = rng();
    for m in models() {
        for (base, i, j) in [(stock::torus_one_hole(), 0, 3), (stock::torus_one_hole(), 1, 3), (stock::ngon(5), 0, 2)] {
            let (cut, corr) = cut_diagonal(&base, 0, i, j).unwrap();
            let src = chart(&base, &m);
            let tgt = chart(&cut, &m);
            let map = GeneratorMap::by_names(&src, &tgt, &[(corr.new_letter, corr.word.clone())]).unwrap();
            let back = GeneratorMap::by_names(&tgt, &src, &[]).unwrap();
            let dev = compare_patterns(&src, &tgt, &map, Some(&back), 10, &mut r).unwrap();
            assert!(dev <= 1e-10, "{dev:e}");
        }
    }
}

#[test]
fn interior_vertex_does_not_contribute() {
    let mut r = rng();
    for m in models() {
        for (base, corner) in [(stock::torus_one_hole(), 0), (stock::torus_one_hole(), 2), (stock::ngon(4), 1)] {
            let (with, _) = add_interior_vertex_cut(&base, "x", 0, corner).unwrap();
            let big = chart(&with, &m);
            let small = chart(&base, &m);
            let forget = GeneratorMap::by_names(&big, &small, &[]).unwrap();
            let dev = compare_patterns(&big, &small, &forget, None, 10, &mut r).unwrap();
            assert!(dev <= 1e-10, "{dev:e}");
        }
    }
}

/// The fold follows the written word; a cyclic rotation gives the same ω.
#[test]
fn cyclic_rotation_invariance() {
    let mut r = rng();
    for m in models() {
        for (a, b) in [("a b a^-1 b^-1 c", "b^-1 c a b a^-1"), ("e1 e2 e3 e4", "e3 e4 e1 e2")] {
            let pa = GluingPattern::from_words(&[a]).unwrap();
            let pb = GluingPattern::from_words(&[b]).unwrap();
            let ca = build_chart(&pa, &m, None).unwrap();
            let hint: Vec<Option<&str>> = vec![Some(pa.name(ca.dependents()[0].letter))];
            let cb = build_chart(&pb, &m, Some(&hint)).unwrap();
            let map = GeneratorMap::by_names(&ca, &cb, &[]).unwrap();
            let back = GeneratorMap::by_names(&cb, &ca, &[]).unwrap();
            let dev = compare_patterns(&ca, &cb, &map, Some(&back), 10, &mut r).unwrap();
            assert!(dev <= 1e-10, "{a} / {b}: {dev:e}");
        }
    }
}

#[test]
fn mapping_class_invariance() {
    let mut r = rng();
    for m in models() {
        let c = chart(&stock::torus_one_hole(), &m);
        for (fwd, inv) in [(["a", "b a"], ["a", "b a^-1"]), (["a b^-1", "b"], ["a b", "b"])] {
            let s = Substitution::parse(&c, &fwd, &inv).unwrap();
            let there = GeneratorMap { images: s.forward.clone() };
            let back = GeneratorMap { images: s.inverse.clone() };
            let dev = compare_patterns(&c, &c, &there, Some(&back), 10, &mut r).unwrap();
            assert!(dev <= 1e-10, "{dev:e}");
        }
    }
}

/// A point of `Φ⁻¹(e)` on the genus-two chart: `a₂ = h b₁ h⁻¹`,
/// `b₂ = h a₁ h⁻¹` with `h` commuting with the first commutator.
fn closed_point<R: Rng>(c: &ModuliChart, r: &mut R, s: f64) -> ModuliPoint {
    let m = c.model();
    let (a1, b1) = (m.random_element(r), m.random_element(r));
    let g = m.mul(&m.mul(&a1, &b1), &m.mul(&m.inverse(&a1), &m.inverse(&b1)));
    let skew = (&g.matrix - g.matrix.adjoint()) * nalgebra::Complex::new(0.5, 0.0);
    let h = m.exp(&(m.coords(&skew) * s));
    let conj = |x: &GroupElement| m.mul(&m.mul(&h, x), &m.inverse(&h));
    let by_name = |n: &str| match n {
        "a1" => a1.clone(),
        "b1" => b1.clone(),
        "a2" => conj(&b1),
        "b2" => conj(&a1),
        _ => unreachable!(),
    };
    c.point(c.generator_names().iter().map(|n| by_name(n)).collect()).unwrap()
}

#[test]
fn reduction_on_capped_genus_two() {
    let mut r = rng();
    let m = LieGroupModel::su2();
    let c = chart(&stock::genus_two_one_hole(), &m);
    assert_eq!(c.generator_names(), ["a1", "b1", "a2", "b2"]);
    for _ in 0..5 {
        let p = closed_point(&c, &mut r, 0.7);
        let rep = reduction_kernel_check(&c, &p, &[0]).unwrap();
        assert!(rep.level_residual < 1e-12);
        assert!(rep.passed(1e-6), "{rep:?}");
    }
    let rep = reduction_kernel_check(&c, &c.identity_point(), &[0]).unwrap();
    assert!(!rep.regular && rep.angle.is_none());
    assert!(reduction_kernel_check(&c, &c.random_point(&mut r), &[0]).is_err());

    let t = LieGroupModel::torus(2);
    let c = chart(&stock::genus_two_one_hole(), &t);
    let rep = reduction_kernel_check(&c, &c.random_point(&mut r), &[0]).unwrap();
    assert!(rep.passed(1e-12), "{rep:?}");
}
