//! The cylinder quasi-symplectic groupoid `G × G ⇉ G` and the 2-forms on
//! its orbits.
//!
//! Arrows are `(a, c)` with `s(a,c) = a`, `t(a,c) = c a c⁻¹`; `q` then `p`
//! composes to `(q.a, p.c·q.c)`.

use alloc::{format, vec::Vec};
use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::{exterior_derivative_fd, omega_at};
use crate::lie::{AlgebraVector, GroupElement, LieGroupModel};
use crate::linalg;
use crate::moduli::{build_chart, word_jacobian, GenWord, ModuliChart, ModuliPoint, TangentVector, VertexVector};
use crate::surface::stock;

/// Composability tolerance.
pub const COMPOSE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderPoint {
    pub a: GroupElement,
    pub c: GroupElement,
}

/// Tangent `(v_a, v_c)`, left-trivialized.
pub type CylinderTangent = (AlgebraVector, AlgebraVector);

impl CylinderPoint {
    pub fn random<R: Rng + ?Sized>(model: &LieGroupModel, rng: &mut R) -> Self {
        CylinderPoint { a: model.random_element(rng), c: model.random_element(rng) }
    }

    pub fn as_moduli_point(&self) -> ModuliPoint {
        ModuliPoint { values: alloc::vec![self.a.clone(), self.c.clone()] }
    }
}

pub fn source(p: &CylinderPoint) -> GroupElement {
    p.a.clone()
}

pub fn target(model: &LieGroupModel, p: &CylinderPoint) -> GroupElement {
    p.c.mul(&p.a).mul(&model.inverse(&p.c))
}

pub fn unit(model: &LieGroupModel, a: &GroupElement) -> CylinderPoint {
    CylinderPoint { a: a.clone(), c: model.identity() }
}

pub fn inverse(model: &LieGroupModel, p: &CylinderPoint) -> CylinderPoint {
    CylinderPoint { a: target(model, p), c: model.inverse(&p.c) }
}

/// `p ∘ q`, defined when `s(p) = t(q)`.
pub fn compose(model: &LieGroupModel, p: &CylinderPoint, q: &CylinderPoint) -> Result<CylinderPoint> {
    let gap = p.a.distance(&target(model, q));
    if gap > COMPOSE_TOL {
        return Err(Error::Precondition(format!("arrows are not composable (gap {gap:e})")));
    }
    Ok(CylinderPoint { a: q.a.clone(), c: p.c.mul(&q.c) })
}

/// Dehn twist `(a, c) ↦ (a, c a)`.
pub fn dehn_twist(p: &CylinderPoint) -> CylinderPoint {
    CylinderPoint { a: p.a.clone(), c: p.c.mul(&p.a) }
}

/// Left-trivialized pushforward of a tangent under the Dehn twist.
pub fn dehn_twist_tangent(model: &LieGroupModel, p: &CylinderPoint, v: &CylinderTangent) -> CylinderTangent {
    (v.0.clone(), model.adjoint(&model.inverse(&p.a), &v.1) + &v.0)
}

/// `ω = −½ c*θ^L·(a*θ^L + a*θ^R) + ½ c*θ^L·Ad_a(c*θ^L)` with
/// `(α·γ)(v,w) = ⟨α(v),γ(w)⟩ − ⟨α(w),γ(v)⟩`.
pub fn cylinder_omega(model: &LieGroupModel, p: &CylinderPoint, v: &CylinderTangent, w: &CylinderTangent) -> f64 {
    let ad = |x: &AlgebraVector| model.adjoint(&p.a, x);
    let ip = |x: &AlgebraVector, y: &AlgebraVector| model.inner(x, y);
    let first = ip(&v.1, &(&w.0 + ad(&w.0))) - ip(&w.1, &(&v.0 + ad(&v.0)));
    let second = ip(&v.1, &ad(&w.1)) - ip(&w.1, &ad(&v.1));
    -0.5 * first + 0.5 * second
}

/// Matrix of `cylinder_omega` in the coordinates `(v_a, v_c)`.
pub fn cylinder_omega_matrix(model: &LieGroupModel, p: &CylinderPoint) -> DMatrix<f64> {
    let d = model.dim();
    let unit = |k: usize| -> CylinderTangent {
        let mut v = TangentVector::zeros(2 * d);
        v[k] = 1.0;
        split(d, &v)
    };
    DMatrix::from_fn(2 * d, 2 * d, |i, j| cylinder_omega(model, p, &unit(i), &unit(j)))
}

fn split(d: usize, v: &TangentVector) -> CylinderTangent {
    (v.rows(0, d).into_owned(), v.rows(d, d).into_owned())
}

fn join(v: &CylinderTangent) -> TangentVector {
    let d = v.0.len();
    let mut out = TangentVector::zeros(2 * d);
    out.rows_mut(0, d).copy_from(&v.0);
    out.rows_mut(d, d).copy_from(&v.1);
    out
}

/// Left-trivialized `dt` at `p`.
pub fn target_differential(model: &LieGroupModel, p: &CylinderPoint, v: &CylinderTangent) -> AlgebraVector {
    // δ(gh) = Ad_{h⁻¹}δg + δh and δ(g⁻¹) = −Ad_g δg along c·a·c⁻¹.
    let ca = model.adjoint(&model.inverse(&p.a), &v.1) + &v.0;
    model.adjoint(&p.c, &ca) - model.adjoint(&p.c, &v.1)
}

/// Largest `|ω(closed form) − ω(chart)|` entry on the chart `a c⁻¹ a' c`.
pub fn closed_form_vs_chart(model: &LieGroupModel, p: &CylinderPoint) -> Result<f64> {
    let chart = build_chart(&stock::cylinder(), model, None)?;
    let om = omega_at(&chart, &p.as_moduli_point())?;
    Ok((om - cylinder_omega_matrix(model, p)).amax())
}

/// Per-check maxima of the groupoid verification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupoidReport {
    pub multiplicativity: f64,
    pub d_omega: f64,
    pub min_nondegeneracy_sigma: f64,
    pub axioms: f64,
    pub dehn_phi: f64,
    pub dehn_omega: f64,
    pub closed_form: f64,
}

/// Random composable pair with tangent lifts `(δp, δq)` satisfying
/// `ds(δp) = dt(δq)`.
pub fn random_composable<R: Rng + ?Sized>(
    model: &LieGroupModel,
    rng: &mut R,
) -> (CylinderPoint, CylinderPoint, [(CylinderTangent, CylinderTangent); 2]) {
    let q = CylinderPoint::random(model, rng);
    let p = CylinderPoint { a: target(model, &q), c: model.random_element(rng) };
    let lift = |rng: &mut R| {
        let dq = (model.random_algebra(rng, 1.0), model.random_algebra(rng, 1.0));
        let dp = (target_differential(model, &q, &dq), model.random_algebra(rng, 1.0));
        (dp, dq)
    };
    let l1 = lift(rng);
    let l2 = lift(rng);
    (p, q, [l1, l2])
}

/// `|Mult*ω − pr₁*ω − pr₂*ω|` on a lifted pair.
pub fn multiplicativity_defect(
    model: &LieGroupModel,
    p: &CylinderPoint,
    q: &CylinderPoint,
    lifts: &[(CylinderTangent, CylinderTangent); 2],
) -> Result<f64> {
    let r = compose(model, p, q)?;
    let push = |(dp, dq): &(CylinderTangent, CylinderTangent)| -> CylinderTangent {
        (dq.0.clone(), model.adjoint(&model.inverse(&q.c), &dp.1) + &dq.1)
    };
    let lhs = cylinder_omega(model, &r, &push(&lifts[0]), &push(&lifts[1]));
    let rhs = cylinder_omega(model, p, &lifts[0].0, &lifts[1].0) + cylinder_omega(model, q, &lifts[0].1, &lifts[1].1);
    Ok((lhs - rhs).abs())
}

/// `|dω − t*η + s*η|` by central differences.
pub fn d_omega_defect(model: &LieGroupModel, p: &CylinderPoint, xs: [&TangentVector; 3], h: f64) -> f64 {
    let d = model.dim();
    let form = |pt: &[GroupElement], v: &TangentVector, w: &TangentVector| {
        let q = CylinderPoint { a: pt[0].clone(), c: pt[1].clone() };
        cylinder_omega(model, &q, &split(d, v), &split(d, w))
    };
    let dw = exterior_derivative_fd(model, &[p.a.clone(), p.c.clone()], xs, h, form);
    let [x, y, z] = xs;
    let (x, y, z) = (split(d, x), split(d, y), split(d, z));
    let s_eta = model.eta_at(&p.a, &x.0, &y.0, &z.0);
    let tt = |v: &CylinderTangent| target_differential(model, p, v);
    let t_eta = model.eta_at(&target(model, p), &tt(&x), &tt(&y), &tt(&z));
    (dw - t_eta + s_eta).abs()
}

/// Smallest singular value of `[ω; Ts; Tt]`.
pub fn nondegeneracy_sigma(model: &LieGroupModel, p: &CylinderPoint) -> f64 {
    let d = model.dim();
    let om = cylinder_omega_matrix(model, p);
    let mut ts = DMatrix::zeros(d, 2 * d);
    let mut tt = DMatrix::zeros(d, 2 * d);
    for k in 0..2 * d {
        let mut e = TangentVector::zeros(2 * d);
        e[k] = 1.0;
        let v = split(d, &e);
        ts.set_column(k, &v.0);
        tt.set_column(k, &target_differential(model, p, &v));
    }
    linalg::min_singular_value(&linalg::vstack(&[&om, &ts, &tt]))
}

/// Largest violation of the unit, inverse and associativity laws.
pub fn axioms_defect<R: Rng + ?Sized>(model: &LieGroupModel, rng: &mut R) -> Result<f64> {
    let dist = |x: &CylinderPoint, y: &CylinderPoint| x.a.distance(&y.a).max(x.c.distance(&y.c));
    let r = CylinderPoint::random(model, rng);
    let q = CylinderPoint { a: target(model, &r), c: model.random_element(rng) };
    let p = CylinderPoint { a: target(model, &q), c: model.random_element(rng) };
    let left = compose(model, &compose(model, &p, &q)?, &r)?;
    let right = compose(model, &p, &compose(model, &q, &r)?)?;
    let mut worst = dist(&left, &right);
    worst = worst.max(dist(&compose(model, &unit(model, &target(model, &q)), &q)?, &q));
    worst = worst.max(dist(&compose(model, &q, &unit(model, &source(&q)))?, &q));
    let qi = inverse(model, &q);
    worst = worst.max(dist(&compose(model, &q, &qi)?, &unit(model, &target(model, &q))));
    worst = worst.max(dist(&compose(model, &qi, &q)?, &unit(model, &source(&q))));
    Ok(worst)
}

/// `‖ω − twist*ω‖` and the change of `(s, t)` under the Dehn twist.
pub fn dehn_twist_defects(model: &LieGroupModel, p: &CylinderPoint) -> (f64, f64) {
    let d = model.dim();
    let tw = dehn_twist(p);
    let phi = p.a.distance(&tw.a).max(target(model, p).distance(&target(model, &tw)));
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..2 * d {
        let mut e = TangentVector::zeros(2 * d);
        e[k] = 1.0;
        j.set_column(k, &join(&dehn_twist_tangent(model, p, &split(d, &e))));
    }
    let pulled = j.transpose() * cylinder_omega_matrix(model, &tw) * &j;
    (phi, linalg::op_norm(&(cylinder_omega_matrix(model, p) - pulled)))
}

/// Run every groupoid check over `samples` random points.
pub fn verify_multiplicative<R: Rng + ?Sized>(
    model: &LieGroupModel,
    samples: usize,
    fd_step: f64,
    rng: &mut R,
) -> Result<GroupoidReport> {
    let d = model.dim();
    let mut rep = GroupoidReport { min_nondegeneracy_sigma: f64::INFINITY, ..Default::default() };
    for _ in 0..samples {
        let (p, q, lifts) = random_composable(model, rng);
        rep.multiplicativity = rep.multiplicativity.max(multiplicativity_defect(model, &p, &q, &lifts)?);
        let xs: Vec<TangentVector> = (0..3).map(|_| TangentVector::from_fn(2 * d, |_, _| rng.gen_range(-1.0..=1.0))).collect();
        rep.d_omega = rep.d_omega.max(d_omega_defect(model, &q, [&xs[0], &xs[1], &xs[2]], fd_step));
        rep.min_nondegeneracy_sigma = rep.min_nondegeneracy_sigma.min(nondegeneracy_sigma(model, &q));
        rep.axioms = rep.axioms.max(axioms_defect(model, rng)?);
        let (phi, om) = dehn_twist_defects(model, &q);
        rep.dehn_phi = rep.dehn_phi.max(phi);
        rep.dehn_omega = rep.dehn_omega.max(om);
        rep.closed_form = rep.closed_form.max(closed_form_vs_chart(model, &q)?);
    }
    Ok(rep)
}

/// A tuple `(a₁, …, a_n) ∈ G^E` on a boundary circle with `n` vertices, edge
/// `i` running from vertex `i+1` to vertex `i`, together with a
/// representative of the conjugacy class of the product.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub components: Vec<GroupElement>,
    pub representative: GroupElement,
}

impl OrbitPoint {
    pub fn new(components: Vec<GroupElement>) -> Self {
        let representative = components.iter().skip(1).fold(components[0].clone(), |acc, g| acc.mul(g));
        OrbitPoint { components, representative }
    }

    /// Largest difference of `tr(Pᵏ)` between the product and the
    /// representative, `k = 1..n`.
    pub fn class_defect(&self) -> f64 {
        let prod = self.components.iter().skip(1).fold(self.components[0].clone(), |acc, g| acc.mul(g));
        let n = prod.matrix.nrows();
        let (mut x, mut y) = (prod.matrix.clone(), self.representative.matrix.clone());
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            worst = worst.max((x.trace() - y.trace()).norm());
            x = &x * &prod.matrix;
            y = &y * &self.representative.matrix;
        }
        worst
    }
}

/// Generating vectors of `G^V` on the circle tuple:
/// `δa_i = ξ_{i+1} − Ad_{a_i⁻¹} ξ_i`.
pub fn orbit_generating_matrix(model: &LieGroupModel, a: &[GroupElement]) -> DMatrix<f64> {
    let d = model.dim();
    let n = a.len();
    let mut m = DMatrix::zeros(n * d, n * d);
    for (i, ai) in a.iter().enumerate() {
        let next = (i + 1) % n;
        let mut blk = m.view_mut((i * d, next * d), (d, d));
        for k in 0..d {
            blk[(k, k)] += 1.0;
        }
        let mut bi = m.view_mut((i * d, i * d), (d, d));
        bi -= model.ad_group_matrix(&model.inverse(ai));
    }
    m
}

fn check_orbit_args(model: &LieGroupModel, point: &OrbitPoint, xi: &VertexVector, zeta: &VertexVector) -> Result<()> {
    let n = point.components.len() * model.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty orbit tuple".into()));
    }
    for v in [xi, zeta] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    Ok(())
}

/// `ω_O(ξ_O, ζ_O) = −½ Σᵢ (⟨Ad_{a_i} ξ_{i+1}, ζ_i⟩ − ⟨Ad_{a_i⁻¹} ξ_i, ζ_{i+1}⟩)`,
/// indices cyclic. For `n = 1` this is `−½ ⟨(Ad_a − Ad_{a⁻¹})ξ, ζ⟩`.
pub fn orbit_form(model: &LieGroupModel, point: &OrbitPoint, xi: &VertexVector, zeta: &VertexVector) -> Result<f64> {
    check_orbit_args(model, point, xi, zeta)?;
    let d = model.dim();
    let n = point.components.len();
    let blk = |v: &VertexVector, i: usize| v.rows((i % n) * d, d).into_owned();
    let mut total = 0.0;
    for (i, a) in point.components.iter().enumerate() {
        total += model.inner(&model.adjoint(a, &blk(xi, i + 1)), &blk(zeta, i))
            - model.inner(&model.adjoint(&model.inverse(a), &blk(xi, i)), &blk(zeta, i + 1));
    }
    Ok(-0.5 * total)
}

/// `|ω_O(ξ_O, ζ_O) − Σ_e ⟨½(ξ_{s(e)} + Ad_{a_e⁻¹} ξ_{t(e)}), (ζ_O)_e⟩|`; for
/// `n = 1` the right side is `½ ι*(θ^L + θ^R)·ξ` evaluated on `ζ_O`.
pub fn orbit_momentum_defect(model: &LieGroupModel, point: &OrbitPoint, xi: &VertexVector, zeta: &VertexVector) -> Result<f64> {
    check_orbit_args(model, point, xi, zeta)?;
    let d = model.dim();
    let n = point.components.len();
    let zeta_o = orbit_generating_matrix(model, &point.components) * zeta;
    let blk = |v: &VertexVector, i: usize| v.rows((i % n) * d, d).into_owned();
    let mut rhs = 0.0;
    for (i, a) in point.components.iter().enumerate() {
        let cov = (blk(xi, i + 1) + model.adjoint(&model.inverse(a), &blk(xi, i))) * 0.5;
        rhs += model.inner(&cov, &blk(&zeta_o, i));
    }
    Ok((orbit_form(model, point, xi, zeta)? - rhs).abs())
}

/// The groupoid chart `a1 ⋯ an c⁻¹ a1' ⋯ an' c` with words for `s` and `t`:
/// `s_i = a_i`, `t_i = (a'_{n+1−i})⁻¹`.
pub struct CylinderGroupoidChart {
    pub chart: ModuliChart,
    pub source_words: Vec<GenWord>,
    pub target_words: Vec<GenWord>,
}

pub fn cylinder_groupoid_chart(model: &LieGroupModel, n: usize) -> Result<CylinderGroupoidChart> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one vertex per boundary circle".into()));
    }
    let chart = build_chart(&stock::cylinder_multi(n), model, None)?;
    let source_words = (1..=n).map(|i| chart.parse_word(&format!("a{i}"))).collect::<Result<Vec<_>>>()?;
    let target_words = (1..=n).map(|i| chart.parse_word(&format!("a{}'^-1", n + 1 - i))).collect::<Result<Vec<_>>>()?;
    Ok(CylinderGroupoidChart { chart, source_words, target_words })
}

/// Outcome of comparing the source-fiber pullback of ω with `ω_O`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescentReport {
    pub fiber_dim: usize,
    /// Largest residual of `dt(u) = ξ_O` over the fiber basis.
    pub orbit_residual: f64,
    /// Largest `|ω(u, w) − ω_O(ξ_u, ζ_w)|` over fiber basis pairs.
    pub defect: f64,
}

/// Pull ω back to the source fiber through `κ`, push fiber tangents to the
/// orbit of `t(κ)` and compare with `orbit_form`.
pub fn orbit_descent_check(g: &CylinderGroupoidChart, point: &ModuliPoint) -> Result<DescentReport> {
    let chart = &g.chart;
    let model = chart.model();
    let d = model.dim();
    let n = g.source_words.len();
    let stack = |words: &[GenWord]| -> (Vec<GroupElement>, DMatrix<f64>) {
        let mut vals = Vec::with_capacity(n);
        let mut j = DMatrix::zeros(n * d, chart.tangent_dim());
        for (i, w) in words.iter().enumerate() {
            let (v, jw) = word_jacobian(chart, point, w);
            j.view_mut((i * d, 0), (d, chart.tangent_dim())).copy_from(&jw);
            vals.push(v);
        }
        (vals, j)
    };
    let (_, ds) = stack(&g.source_words);
    let (b, dt) = stack(&g.target_words);
    let fiber = linalg::nullspace(&ds);
    let omega = omega_at(chart, point)?;
    let gen = orbit_generating_matrix(model, &b);
    let orbit_point = OrbitPoint::new(b);
    let mut xis = Vec::with_capacity(fiber.ncols());
    let mut orbit_residual: f64 = 0.0;
    for k in 0..fiber.ncols() {
        let (xi, res) = linalg::lstsq(&gen, &(&dt * fiber.column(k)));
        orbit_residual = orbit_residual.max(res);
        xis.push(xi);
    }
    let mut defect: f64 = 0.0;
    for i in 0..fiber.ncols() {
        for j in 0..fiber.ncols() {
            let lhs = fiber.column(i).dot(&(&omega * fiber.column(j)));
            let rhs = orbit_form(model, &orbit_point, &xis[i], &xis[j])?;
            defect = defect.max((lhs - rhs).abs());
        }
    }
    Ok(DescentReport { fiber_dim: fiber.ncols(), orbit_residual, defect })
}
