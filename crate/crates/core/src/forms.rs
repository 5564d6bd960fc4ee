//! The 2-form ω on the moduli space, built from the bullet product of
//! (group-valued map, 2-form) pairs, and its verification identities.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, LieGroupModel};
use crate::linalg;
use crate::moduli::{
    boundary_jacobian, generating_matrix, invert_gen_word, word_jacobian, GeneratorMap, ModuliChart, ModuliPoint,
    TangentVector, VertexVector,
};

/// Tolerance on the folded polygon relation.
pub const RELATION_TOL: f64 = 1e-8;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-4;

/// A map into `G` at a point (value and left-trivialized differential)
/// together with a 2-form there.
#[derive(Clone, Debug, PartialEq)]
pub struct SeveraPair {
    pub value: GroupElement,
    /// `dim 𝔤 × n`.
    pub differential: DMatrix<f64>,
    /// Antisymmetric `n × n`.
    pub two_form: DMatrix<f64>,
}

impl SeveraPair {
    /// Pair with vanishing 2-form.
    pub fn from_map(value: GroupElement, differential: DMatrix<f64>) -> Self {
        let n = differential.ncols();
        SeveraPair { value, differential, two_form: DMatrix::zeros(n, n) }
    }

    /// `(e, 0)` on an `n`-dimensional tangent space.
    pub fn unit(model: &LieGroupModel, n: usize) -> Self {
        Self::from_map(model.identity(), DMatrix::zeros(model.dim(), n))
    }

    /// `(Φ, ω)⁻¹ = (Φ⁻¹, −ω)`.
    pub fn inverse(&self, model: &LieGroupModel) -> Self {
        SeveraPair {
            value: model.inverse(&self.value),
            differential: -(model.ad_group_matrix(&self.value) * &self.differential),
            two_form: -&self.two_form,
        }
    }

    pub fn tangent_dim(&self) -> usize {
        self.differential.ncols()
    }
}

/// Matrix of `(u, w) ↦ β((u₁,u₂),(w₁,w₂))` pulled back through the two
/// differentials.
pub fn beta_pullback(model: &LieGroupModel, d1: &DMatrix<f64>, g2: &GroupElement, d2: &DMatrix<f64>) -> DMatrix<f64> {
    let m = d1.transpose() * model.gram() * model.ad_group_matrix(g2) * d2;
    (&m - m.transpose()) * 0.5
}

/// `(Φ₁, ω₁)•(Φ₂, ω₂) = (Φ₁Φ₂, ω₁ + ω₂ − (Φ₁,Φ₂)*β)`.
pub fn severa_mul(model: &LieGroupModel, p: &SeveraPair, q: &SeveraPair) -> Result<SeveraPair> {
    if p.tangent_dim() != q.tangent_dim() {
        return Err(Error::DimensionMismatch { expected: p.tangent_dim(), found: q.tangent_dim() });
    }
    let d = model.dim();
    if p.differential.nrows() != d || q.differential.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.differential.nrows().min(q.differential.nrows()) });
    }
    let value = p.value.mul(&q.value);
    let differential = model.ad_group_matrix(&model.inverse(&q.value)) * &p.differential + &q.differential;
    let two_form = &p.two_form + &q.two_form - beta_pullback(model, &p.differential, &q.value, &q.differential);
    Ok(SeveraPair { value, differential, two_form })
}

/// Left-invariant exterior derivative of a 2-form field on `G^k` at a point,
/// by central differences along `p·exp(tX)`.
pub fn exterior_derivative_fd<F>(model: &LieGroupModel, point: &[GroupElement], xs: [&TangentVector; 3], h: f64, form: F) -> f64
where
    F: Fn(&[GroupElement], &TangentVector, &TangentVector) -> f64,
{
    let d = model.dim();
    let shift = |v: &TangentVector, t: f64| -> Vec<GroupElement> {
        point
            .iter()
            .enumerate()
            .map(|(k, g)| g.mul(&model.exp(&(v.rows(k * d, d).into_owned() * t))))
            .collect()
    };
    let deriv = |x: &TangentVector, y: &TangentVector, z: &TangentVector| {
        (form(&shift(x, h), y, z) - form(&shift(x, -h), y, z)) / (2.0 * h)
    };
    let bracket = |x: &TangentVector, y: &TangentVector| {
        let mut out = TangentVector::zeros(x.len());
        for k in 0..point.len() {
            let b = model.bracket(&x.rows(k * d, d).into_owned(), &y.rows(k * d, d).into_owned());
            out.rows_mut(k * d, d).copy_from(&b);
        }
        out
    };
    let [x, y, z] = xs;
    deriv(x, y, z) - deriv(y, x, z) + deriv(z, x, y) - form(point, &bracket(x, y), z) + form(point, &bracket(x, z), y)
        - form(point, &bracket(y, z), x)
}

/// FD defects of `Inv*η = −η` and `Mult*η = pr₁*η + pr₂*η − dβ` at `(g₁, g₂)`
/// on three tangent pairs (each of length `2·dim 𝔤`).
pub fn cartan_identity_defects(
    model: &LieGroupModel,
    g1: &GroupElement,
    g2: &GroupElement,
    xs: [&TangentVector; 3],
    h: f64,
) -> (f64, f64) {
    let d = model.dim();
    let first = |v: &TangentVector| v.rows(0, d).into_owned();
    let second = |v: &TangentVector| v.rows(d, d).into_owned();
    // Differential of inversion at g₁ by central differences.
    let dinv = |u: &AlgebraVector| -> AlgebraVector {
        let plus = model.inverse(&g1.mul(&model.exp(&(u * h))));
        let minus = model.inverse(&g1.mul(&model.exp(&(u * -h))));
        let dm = (plus.matrix - minus.matrix) / nalgebra::Complex::new(2.0 * h, 0.0);
        model.coords(&(&g1.matrix * dm))
    };
    let [x, y, z] = xs;
    let (u, v, w) = (first(x), first(y), first(z));
    let inv_defect = (model.eta_at(g1, &dinv(&u), &dinv(&v), &dinv(&w)) + model.eta_at(g1, &u, &v, &w)).abs();

    let mult = |v: &TangentVector| model.adjoint(&model.inverse(g2), &first(v)) + second(v);
    let lhs = model.eta_at(&g1.mul(g2), &mult(x), &mult(y), &mult(z));
    let pr = model.eta_at(g1, &first(x), &first(y), &first(z)) + model.eta_at(g2, &second(x), &second(y), &second(z));
    let beta = |p: &[GroupElement], a: &TangentVector, b: &TangentVector| {
        model.beta_at(&p[0], &p[1], (&first(a), &second(a)), (&first(b), &second(b)))
    };
    let dbeta = exterior_derivative_fd(model, &[g1.clone(), g2.clone()], xs, h, beta);
    (inv_defect, (lhs - pr + dbeta).abs())
}

/// Bullet-product pair of a single polygon at a point.
pub fn polygon_pair(chart: &ModuliChart, point: &ModuliPoint, polygon: usize) -> Result<SeveraPair> {
    let model = chart.model();
    let poly = &chart.pattern().polygons()[polygon];
    // When the eliminated letter closes the word, the last product only
    // contributes β(P, P⁻¹) = 0 and can be skipped.
    let dependent_last = chart
        .dependents()
        .iter()
        .any(|dep| dep.polygon == polygon && poly.last().map(|l| l.letter) == Some(dep.letter));
    let letters = if dependent_last && poly.len() >= 2 { &poly[..poly.len() - 1] } else { &poly[..] };
    let mut acc = SeveraPair::unit(model, chart.tangent_dim());
    for l in letters {
        let e = chart.letter_expansion(l.letter);
        let w = if l.inverse { invert_gen_word(e) } else { e.clone() };
        let (val, jac) = word_jacobian(chart, point, &w);
        acc = severa_mul(model, &acc, &SeveraPair::from_map(val, jac))?;
    }
    if !dependent_last {
        let residual = acc.value.distance(&model.identity());
        if residual > RELATION_TOL {
            return Err(Error::RelationViolated { polygon, residual });
        }
    }
    Ok(acc)
}

/// ω at a point, as an antisymmetric matrix in generator coordinates.
pub fn omega_at(chart: &ModuliChart, point: &ModuliPoint) -> Result<DMatrix<f64>> {
    let n = chart.tangent_dim();
    let mut omega = DMatrix::zeros(n, n);
    for pi in 0..chart.pattern().polygons().len() {
        omega += polygon_pair(chart, point, pi)?.two_form;
    }
    Ok((&omega - omega.transpose()) * 0.5)
}

/// `ω(X, Y)` for tangents at a point.
pub fn omega_eval(omega: &DMatrix<f64>, x: &TangentVector, y: &TangentVector) -> f64 {
    x.dot(&(omega * y))
}

fn shifted(point: &[GroupElement]) -> ModuliPoint {
    ModuliPoint { values: point.to_vec() }
}

/// `|dω(X,Y,Z) + Σ_e η(dΦ_e X, dΦ_e Y, dΦ_e Z)|`.
pub fn verify_d_omega(chart: &ModuliChart, point: &ModuliPoint, xs: [&TangentVector; 3], h: f64) -> Result<f64> {
    let model = chart.model();
    // Surface the relation error before differentiating.
    omega_at(chart, point)?;
    let form = |p: &[GroupElement], a: &TangentVector, b: &TangentVector| match omega_at(chart, &shifted(p)) {
        Ok(om) => omega_eval(&om, a, b),
        Err(_) => f64::NAN,
    };
    let d_omega = exterior_derivative_fd(model, &point.values, xs, h, form);
    let (_, dphi) = boundary_jacobian(chart, point);
    let d = model.dim();
    let [x, y, z] = xs;
    let (ux, uy, uz) = (&dphi * x, &dphi * y, &dphi * z);
    let mut eta_sum = 0.0;
    for e in 0..chart.num_boundary_edges() {
        let blk = |u: &TangentVector| u.rows(e * d, d).into_owned();
        eta_sum += model.eta_at(&model.identity(), &blk(&ux), &blk(&uy), &blk(&uz));
    }
    Ok((d_omega + eta_sum).abs())
}

/// FD value of `dω − Φ*η` for a smooth family of pairs on the chart.
pub fn homomorphism_defect<F>(chart: &ModuliChart, point: &ModuliPoint, pair: F, xs: [&TangentVector; 3], h: f64) -> f64
where
    F: Fn(&ModuliPoint) -> SeveraPair,
{
    let model = chart.model();
    let form = |p: &[GroupElement], a: &TangentVector, b: &TangentVector| {
        omega_eval(&pair(&shifted(p)).two_form, a, b)
    };
    let d_omega = exterior_derivative_fd(model, &point.values, xs, h, form);
    let here = pair(point);
    let [x, y, z] = xs;
    let (ux, uy, uz) = (&here.differential * x, &here.differential * y, &here.differential * z);
    d_omega - model.eta_at(&here.value, &ux, &uy, &uz)
}

/// `|ω(ξ_M, v) + ½ Σ_e (⟨Ad_{Φ_e} u_e, ξ_{t(e)}⟩ + ⟨u_e, ξ_{s(e)}⟩)|` with
/// `u_e = dΦ_e(v)`.
pub fn verify_moment(chart: &ModuliChart, point: &ModuliPoint, xi: &VertexVector, v: &TangentVector) -> Result<f64> {
    let model = chart.model();
    let d = model.dim();
    let omega = omega_at(chart, point)?;
    let xi_m = generating_matrix(chart, point) * xi;
    let lhs = omega_eval(&omega, &xi_m, v);
    let (phi, dphi) = boundary_jacobian(chart, point);
    let u = &dphi * v;
    let mut rhs = 0.0;
    for (e, &(s, t)) in chart.boundary_ends().iter().enumerate() {
        let ue = u.rows(e * d, d).into_owned();
        let xs = xi.rows(s * d, d).into_owned();
        let xt = xi.rows(t * d, d).into_owned();
        rhs += model.inner(&model.adjoint(&phi[e], &ue), &xt) + model.inner(&ue, &xs);
    }
    Ok((lhs + 0.5 * rhs).abs())
}

/// Linear data of ω and Φ at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaReport {
    pub omega_matrix: DMatrix<f64>,
    pub dphi_matrix: DMatrix<f64>,
    pub kernel_basis: DMatrix<f64>,
    /// Span of `ξ_M` over `ξ_{t(e)} + Ad_{Φ_e} ξ_{s(e)} = 0`.
    pub explicit_kernel: DMatrix<f64>,
    pub rank_dphi: usize,
    pub stabilizer_dim: usize,
    pub vertex_dim: usize,
    pub min_degeneracy_sigma: f64,
    /// Largest principal angle between `kernel_basis` and
    /// `explicit_kernel`; `None` without (A3).
    pub kernel_angle: Option<f64>,
}

impl OmegaReport {
    pub fn rank_identity_holds(&self) -> bool {
        self.rank_dphi + self.stabilizer_dim == self.vertex_dim
    }
}

/// Matrix of `ξ ↦ (ξ_{t(e)} + Ad_{Φ_e} ξ_{s(e)})_e`.
pub fn explicit_kernel_constraints(chart: &ModuliChart, phi: &[GroupElement]) -> DMatrix<f64> {
    let model = chart.model();
    let d = model.dim();
    let mut c = DMatrix::zeros(chart.num_boundary_edges() * d, chart.vertex_dim());
    for (e, &(s, t)) in chart.boundary_ends().iter().enumerate() {
        let mut bs = c.view_mut((e * d, s * d), (d, d));
        bs += model.ad_group_matrix(&phi[e]);
        let mut bt = c.view_mut((e * d, t * d), (d, d));
        for i in 0..d {
            bt[(i, i)] += 1.0;
        }
    }
    c
}

pub fn kernel_report(chart: &ModuliChart, point: &ModuliPoint) -> Result<OmegaReport> {
    let omega = omega_at(chart, point)?;
    let (phi, dphi) = boundary_jacobian(chart, point);
    let gen = generating_matrix(chart, point);
    let kernel_basis = linalg::nullspace(&omega);
    let xi = linalg::nullspace(&explicit_kernel_constraints(chart, &phi));
    let explicit_kernel = linalg::orth(&(&gen * xi));
    let stabilizer_dim = linalg::nullspace(&gen).ncols();
    let stacked = linalg::vstack(&[&omega, &dphi]);
    let kernel_angle =
        if chart.info().a3 { Some(linalg::max_principal_angle(&kernel_basis, &explicit_kernel)) } else { None };
    Ok(OmegaReport {
        rank_dphi: linalg::rank(&dphi),
        stabilizer_dim,
        vertex_dim: chart.vertex_dim(),
        min_degeneracy_sigma: linalg::min_singular_value(&stacked),
        omega_matrix: omega,
        dphi_matrix: dphi,
        kernel_basis,
        explicit_kernel,
        kernel_angle,
    })
}

/// `‖ω_source − J* ω_target‖` maximized over random source points, where
/// `J` is the Jacobian of `map: source → target`. With `inverse`, the pair
/// is first checked to round-trip on the sample points.
pub fn compare_patterns<R: Rng + ?Sized>(
    source: &ModuliChart,
    target: &ModuliChart,
    map: &GeneratorMap,
    inverse: Option<&GeneratorMap>,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if map.images.len() != target.num_generators() {
        return Err(Error::DimensionMismatch { expected: target.num_generators(), found: map.images.len() });
    }
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = source.random_point(rng);
        let q = map.apply(source, &p);
        if let Some(inv) = inverse {
            let back = inv.apply(target, &q);
            let defect = p.values.iter().zip(&back.values).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
            if defect > 1e-10 {
                return Err(Error::NotInvertible { defect });
            }
        }
        let j = map.jacobian(source, &p);
        let pulled = j.transpose() * omega_at(target, &q)? * &j;
        worst = worst.max(linalg::op_norm(&(omega_at(source, &p)? - pulled)));
    }
    Ok(worst)
}

/// Outcome of the reduction check on a level set of the capped boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    pub regular: bool,
    pub stabilizer_dim: usize,
    pub level_residual: f64,
    pub level_set_dim: usize,
    pub null_dim: usize,
    pub orbit_dim: usize,
    /// Largest principal angle between `null(ω|_Z)` and the orbit directions.
    pub angle: Option<f64>,
}

impl ReductionReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.regular && self.angle.is_some_and(|a| a <= tol)
    }
}

/// Restrict ω to `Z = Φ_C⁻¹(e)` for the capped boundary edges `C` and compare
/// its null directions with the orbit directions of `G^V`.
pub fn reduction_kernel_check(chart: &ModuliChart, point: &ModuliPoint, capped: &[usize]) -> Result<ReductionReport> {
    let model = chart.model();
    let d = model.dim();
    let (phi, dphi) = boundary_jacobian(chart, point);
    let mut level_residual: f64 = 0.0;
    let mut rows = DMatrix::zeros(capped.len() * d, chart.tangent_dim());
    for (k, &e) in capped.iter().enumerate() {
        if e >= phi.len() {
            return Err(Error::InvalidArgument(alloc::format!("no boundary edge {e}")));
        }
        level_residual = level_residual.max(phi[e].distance(&model.identity()));
        rows.view_mut((k * d, 0), (d, chart.tangent_dim())).copy_from(&dphi.view((e * d, 0), (d, chart.tangent_dim())));
    }
    if level_residual > RELATION_TOL {
        return Err(Error::Precondition(alloc::format!("point is off the level set by {level_residual:e}")));
    }
    let gen = generating_matrix(chart, point);
    let stabilizer_dim = linalg::nullspace(&gen).ncols();
    let regular = stabilizer_dim == chart.num_vertices() * model.center_dim();
    let tz = linalg::nullspace(&rows);
    let omega = omega_at(chart, point)?;
    let restricted = tz.transpose() * &omega * &tz;
    let null = &tz * linalg::nullspace(&restricted);
    let orbit = linalg::orth(&gen);
    let angle = if regular { Some(linalg::max_principal_angle(&null, &orbit)) } else { None };
    Ok(ReductionReport {
        regular,
        stabilizer_dim,
        level_residual,
        level_set_dim: tz.ncols(),
        null_dim: null.ncols(),
        orbit_dim: orbit.ncols(),
        angle,
    })
}

/// Sample three random tangents.
pub fn random_triple<R: Rng + ?Sized>(chart: &ModuliChart, rng: &mut R) -> [TangentVector; 3] {
    [chart.random_tangent(rng), chart.random_tangent(rng), chart.random_tangent(rng)]
}

/// All-zero 2-form check helper: largest entry magnitude.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}
