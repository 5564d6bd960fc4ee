//! Concrete matrix Lie groups with an invariant metric.
//!
//! Group elements are complex square matrices for every model; real groups
//! simply carry zero imaginary parts. Lie algebra vectors are real
//! coordinates in the model's basis, and tangent vectors at `g` are always
//! left-trivialized (`g·ξ`).

use alloc::{format, string::String, vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
/// Coordinates of a Lie algebra element in the model basis.
pub type AlgebraVector = DVector<f64>;

/// Tolerance on the defining constraint of a group element.
pub const GROUP_TOL: f64 = 1e-10;
/// Drift beyond which a matrix is rejected instead of retracted.
pub const RETRACT_MAX: f64 = 1e-6;
/// Tolerance on model invariants (Ad-invariance, Jacobi, closure).
pub const MODEL_TOL: f64 = 1e-12;
/// Default finite-difference step for gradients of invariant functions.
pub const PHI_DOT_STEP: f64 = 1e-5;

/// Defining constraint of a matrix group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `g†g = 1`, `det g = 1`.
    SpecialUnitary,
    /// `g†g = 1`.
    Unitary,
    /// Real entries, `det g = 1`.
    SpecialLinearReal,
    /// Real entries, `gᵀg = 1`, `det g = 1`.
    SpecialOrthogonal,
    /// Diagonal with unit-modulus entries.
    DiagonalUnitary,
    /// Invertible, nothing else.
    General,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::SpecialUnitary => "special-unitary",
            Constraint::Unitary => "unitary",
            Constraint::SpecialLinearReal => "special-linear-real",
            Constraint::SpecialOrthogonal => "special-orthogonal",
            Constraint::DiagonalUnitary => "diagonal-unitary",
            Constraint::General => "general",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "special-unitary" => Constraint::SpecialUnitary,
            "unitary" => Constraint::Unitary,
            "special-linear-real" => Constraint::SpecialLinearReal,
            "special-orthogonal" => Constraint::SpecialOrthogonal,
            "diagonal-unitary" => Constraint::DiagonalUnitary,
            "general" => Constraint::General,
            _ => return None,
        })
    }
}

/// A group element stored as a complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub matrix: CMat,
}

impl GroupElement {
    pub fn new(matrix: CMat) -> Self {
        GroupElement { matrix }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { matrix: CMat::identity(n, n) }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: &self.matrix * &other.matrix }
    }

    /// Largest entrywise distance to another element.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

/// A matrix Lie group with a basis of its Lie algebra and an invariant,
/// nondegenerate, symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct LieGroupModel {
    name: String,
    n: usize,
    basis: Vec<CMat>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    constraint: Constraint,
    /// `c[i][j]` holds the coordinates of `[X_i, X_j]`.
    structure: Vec<Vec<AlgebraVector>>,
    /// Left inverse of the real flattening of the basis.
    coord_proj: DMatrix<f64>,
    flat_basis: DMatrix<f64>,
    /// All brackets vanish, so `Ad` is the identity.
    abelian: bool,
}

fn flatten(m: &CMat) -> DVector<f64> {
    let k = m.len();
    let mut v = DVector::zeros(2 * k);
    for (i, z) in m.iter().enumerate() {
        v[i] = z.re;
        v[k + i] = z.im;
    }
    v
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl LieGroupModel {
    /// Build and validate a model from algebra basis matrices and a Gram
    /// matrix.
    pub fn new(
        name: &str,
        basis: Vec<CMat>,
        gram: DMatrix<f64>,
        constraint: Constraint,
    ) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::InvalidModel("empty algebra basis".into()));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::InvalidModel("basis matrices must be square of equal size".into()));
        }
        if gram.nrows() != d || gram.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: gram.nrows() });
        }
        if (&gram - gram.transpose()).amax() > MODEL_TOL {
            return Err(Error::InvalidModel("Gram matrix is not symmetric".into()));
        }
        if gram.determinant().abs() <= 1e-12 {
            return Err(Error::InvalidModel("Gram matrix is degenerate".into()));
        }
        for (i, b) in basis.iter().enumerate() {
            let r = algebra_residual(constraint, b);
            if r > MODEL_TOL {
                return Err(Error::InvalidModel(format!(
                    "basis element {i} violates the {} algebra constraint ({r:e})",
                    constraint.name()
                )));
            }
        }
        let mut flat_basis = DMatrix::zeros(2 * n * n, d);
        for (i, b) in basis.iter().enumerate() {
            flat_basis.set_column(i, &flatten(b));
        }
        let btb = flat_basis.transpose() * &flat_basis;
        let btb_inv = btb
            .try_inverse()
            .ok_or_else(|| Error::InvalidModel("basis is linearly dependent".into()))?;
        let coord_proj = btb_inv * flat_basis.transpose();
        let gram_inv = gram.clone().try_inverse().expect("nondegenerate Gram");
        let mut model = LieGroupModel {
            name: name.into(),
            n,
            basis,
            gram,
            gram_inv,
            constraint,
            structure: Vec::new(),
            coord_proj,
            flat_basis,
            abelian: false,
        };
        let mut structure = vec![vec![AlgebraVector::zeros(d); d]; d];
        for (i, row) in structure.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let c = &model.basis[i] * &model.basis[j] - &model.basis[j] * &model.basis[i];
                let (coords, res) = model.coords_with_residual(&c);
                if res > 1e-10 {
                    return Err(Error::InvalidModel(format!(
                        "basis not closed under the bracket at ({i},{j}), residual {res:e}"
                    )));
                }
                *slot = coords;
            }
        }
        model.abelian = structure.iter().flatten().all(|c| c.amax() <= MODEL_TOL);
        if model.abelian {
            structure.iter_mut().flatten().for_each(|c| c.fill(0.0));
        }
        model.structure = structure;
        model.validate_structure()?;
        Ok(model)
    }

    fn validate_structure(&self) -> Result<()> {
        let d = self.dim();
        let e = |i: usize| {
            let mut v = AlgebraVector::zeros(d);
            v[i] = 1.0;
            v
        };
        for i in 0..d {
            for j in 0..d {
                let anti = (&self.structure[i][j] + &self.structure[j][i]).amax();
                if anti > MODEL_TOL {
                    return Err(Error::InvalidModel("structure constants not antisymmetric".into()));
                }
                for k in 0..d {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let inv = self.inner(&self.bracket(&x, &y), &z) + self.inner(&y, &self.bracket(&x, &z));
                    if inv.abs() > MODEL_TOL * (1.0 + self.gram.amax()) {
                        return Err(Error::InvalidModel(format!(
                            "metric is not ad-invariant on ({i},{j},{k}): {inv:e}"
                        )));
                    }
                    let jac = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    if jac.amax() > MODEL_TOL {
                        return Err(Error::InvalidModel("Jacobi identity fails".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// SU(2) with basis `X_k = −(i/2)σ_k` and `⟨X,Y⟩ = −tr(XY)`.
    pub fn su2() -> Self {
        let z = C64::new(0.0, 0.0);
        let h = |re: f64, im: f64| C64::new(re, im);
        let x1 = CMat::from_row_slice(2, 2, &[z, h(0.0, -0.5), h(0.0, -0.5), z]);
        let x2 = CMat::from_row_slice(2, 2, &[z, h(-0.5, 0.0), h(0.5, 0.0), z]);
        let x3 = CMat::from_row_slice(2, 2, &[h(0.0, -0.5), z, z, h(0.0, 0.5)]);
        let basis = vec![x1, x2, x3];
        let gram = trace_gram(&basis, -1.0);
        LieGroupModel::new("SU2", basis, gram, Constraint::SpecialUnitary).expect("SU2 model")
    }

    /// SL(2,R) with basis `H, E, F` and `⟨X,Y⟩ = tr(XY)`.
    pub fn sl2r() -> Self {
        let r = |a: f64, b: f64, c: f64, d: f64| {
            CMat::from_row_slice(2, 2, &[C64::from(a), C64::from(b), C64::from(c), C64::from(d)])
        };
        let basis = vec![r(1.0, 0.0, 0.0, -1.0), r(0.0, 1.0, 0.0, 0.0), r(0.0, 0.0, 1.0, 0.0)];
        let gram = trace_gram(&basis, 1.0);
        LieGroupModel::new("SL2R", basis, gram, Constraint::SpecialLinearReal).expect("SL2R model")
    }

    /// The diagonal torus `U(1)ⁿ` with the identity Gram matrix.
    pub fn torus(n: usize) -> Self {
        let basis = (0..n)
            .map(|k| {
                let mut m = CMat::zeros(n, n);
                m[(k, k)] = C64::new(0.0, 1.0);
                m
            })
            .collect();
        let name = format!("T{n}");
        LieGroupModel::new(&name, basis, DMatrix::identity(n, n), Constraint::DiagonalUnitary)
            .expect("torus model")
    }

    /// SO(3) with the standard rotation generators and `⟨X,Y⟩ = −½tr(XY)`.
    pub fn so3() -> Self {
        let r = |v: [f64; 9]| CMat::from_row_slice(3, 3, &v.map(C64::from));
        let basis = vec![
            r([0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
            r([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
            r([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ];
        let gram = trace_gram(&basis, -0.5);
        LieGroupModel::new("SO3", basis, gram, Constraint::SpecialOrthogonal).expect("SO3 model")
    }

    /// Registered models by name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "SU2" => Some(Self::su2()),
            "SL2R" => Some(Self::sl2r()),
            "T2" => Some(Self::torus(2)),
            "SO3" => Some(Self::so3()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    /// `c[i][j][k]` with `[X_i, X_j] = Σ_k c[i][j][k] X_k`.
    pub fn structure_constants(&self) -> &[Vec<AlgebraVector>] {
        &self.structure
    }

    pub fn zero(&self) -> AlgebraVector {
        AlgebraVector::zeros(self.dim())
    }

    pub fn unit(&self, i: usize) -> AlgebraVector {
        let mut v = self.zero();
        v[i] = 1.0;
        v
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.n)
    }

    /// The matrix `Σ ξ_i X_i`.
    pub fn to_matrix(&self, xi: &AlgebraVector) -> CMat {
        assert_eq!(xi.len(), self.dim(), "algebra vector length");
        let mut m = CMat::zeros(self.n, self.n);
        for (c, b) in xi.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * C64::from(*c);
            }
        }
        m
    }

    /// Coordinates of the projection of `m` onto the algebra, and the norm of
    /// the part of `m` outside the algebra.
    pub fn coords_with_residual(&self, m: &CMat) -> (AlgebraVector, f64) {
        let f = flatten(m);
        let c = &self.coord_proj * &f;
        let r = (&self.flat_basis * &c - f).norm();
        (c, r)
    }

    pub fn coords(&self, m: &CMat) -> AlgebraVector {
        &self.coord_proj * flatten(m)
    }

    pub fn inner(&self, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    /// Lie bracket from the structure constants.
    ///
    /// # Panics
    /// If the vectors do not have length `dim`.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let d = self.dim();
        assert!(x.len() == d && y.len() == d, "bracket of vectors from different models");
        let mut out = self.zero();
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] != 0.0 {
                    out.axpy(x[i] * y[j], &self.structure[i][j], 1.0);
                }
            }
        }
        out
    }

    /// Matrix of `ad_x` in the basis.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            m.set_column(j, &self.bracket(x, &self.unit(j)));
        }
        m
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let matrix = match self.constraint {
            Constraint::SpecialUnitary
            | Constraint::Unitary
            | Constraint::SpecialOrthogonal
            | Constraint::DiagonalUnitary => g.matrix.adjoint(),
            Constraint::SpecialLinearReal if self.n == 2 => {
                let m = &g.matrix;
                CMat::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]])
            }
            _ => g.matrix.clone().try_inverse().expect("group elements are invertible"),
        };
        GroupElement { matrix }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        g.mul(h)
    }

    /// `Ad_g ξ`, the coordinates of `g X g⁻¹`.
    pub fn adjoint(&self, g: &GroupElement, xi: &AlgebraVector) -> AlgebraVector {
        if self.abelian {
            return xi.clone();
        }
        let gi = self.inverse(g);
        self.coords(&(&g.matrix * self.to_matrix(xi) * gi.matrix))
    }

    /// Matrix of `Ad_g` in the basis.
    pub fn ad_group_matrix(&self, g: &GroupElement) -> DMatrix<f64> {
        let d = self.dim();
        if self.abelian {
            return DMatrix::identity(d, d);
        }
        let gi = self.inverse(g);
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let c = self.coords(&(&g.matrix * &self.basis[j] * &gi.matrix));
            m.set_column(j, &c);
        }
        m
    }

    /// Matrix exponential of `Σ ξ_i X_i`.
    pub fn exp(&self, xi: &AlgebraVector) -> GroupElement {
        GroupElement { matrix: expm(&self.to_matrix(xi)) }
    }

    /// `η(g·u, g·v, g·w) = ½⟨u,[v,w]⟩`.
    pub fn eta_at(&self, _g: &GroupElement, u: &AlgebraVector, v: &AlgebraVector, w: &AlgebraVector) -> f64 {
        0.5 * self.inner(u, &self.bracket(v, w))
    }

    /// `β` at `(g1, g2)` on left-trivialized tangent pairs `u`, `w`:
    /// `½(⟨u1, Ad_{g2} w2⟩ − ⟨w1, Ad_{g2} u2⟩)`.
    pub fn beta_at(
        &self,
        _g1: &GroupElement,
        g2: &GroupElement,
        u: (&AlgebraVector, &AlgebraVector),
        w: (&AlgebraVector, &AlgebraVector),
    ) -> f64 {
        0.5 * (self.inner(u.0, &self.adjoint(g2, w.1)) - self.inner(w.0, &self.adjoint(g2, u.1)))
    }

    /// Residual of the defining constraint.
    pub fn constraint_residual(&self, m: &CMat) -> f64 {
        if m.nrows() != self.n || m.ncols() != self.n {
            return f64::INFINITY;
        }
        let id = CMat::identity(self.n, self.n);
        let unitary = || max_abs(&(m.adjoint() * m - &id));
        let imag = || m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let det1 = || (m.determinant() - C64::from(1.0)).norm();
        match self.constraint {
            Constraint::SpecialUnitary => unitary().max(det1()),
            Constraint::Unitary => unitary(),
            Constraint::SpecialLinearReal => {
                let a = max_abs(m);
                let scale = 1.0 + a * a;
                imag().max(det1() / scale)
            }
            Constraint::SpecialOrthogonal => imag().max(unitary()).max(det1()),
            Constraint::DiagonalUnitary => {
                let mut off: f64 = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        if i != j {
                            off = off.max(m[(i, j)].norm());
                        }
                    }
                }
                off.max(unitary())
            }
            Constraint::General => {
                if m.determinant().norm() > 1e-14 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Validate a matrix as a group element, retracting small drift.
    pub fn element(&self, m: CMat) -> Result<GroupElement> {
        let r = self.constraint_residual(&m);
        if !r.is_finite() || r > RETRACT_MAX {
            return Err(Error::NotInGroup { residual: r });
        }
        let g = GroupElement { matrix: m };
        if r > GROUP_TOL {
            Ok(self.retract(&g))
        } else {
            Ok(g)
        }
    }

    /// Project a nearby matrix back onto the group.
    pub fn retract(&self, g: &GroupElement) -> GroupElement {
        let n = self.n;
        let real = |m: &CMat| m.map(|z| C64::from(z.re));
        let polar = |mut u: CMat| {
            for _ in 0..4 {
                let inv_h = match u.adjoint().try_inverse() {
                    Some(x) => x,
                    None => break,
                };
                u = (&u + inv_h) * C64::from(0.5);
            }
            u
        };
        let det_normalize = |m: CMat| {
            let d = m.determinant();
            let root = d.powf(1.0 / n as f64);
            m.map(|z| z / root)
        };
        let matrix = match self.constraint {
            Constraint::SpecialUnitary => det_normalize(polar(g.matrix.clone())),
            Constraint::Unitary => polar(g.matrix.clone()),
            Constraint::SpecialLinearReal => {
                let m = real(&g.matrix);
                let d = m.determinant().re;
                if d > 0.0 {
                    let root = libm::pow(d, 1.0 / n as f64);
                    m.map(|z| z / root)
                } else {
                    m
                }
            }
            Constraint::SpecialOrthogonal => real(&polar(real(&g.matrix))),
            Constraint::DiagonalUnitary => {
                let mut m = CMat::zeros(n, n);
                for i in 0..n {
                    let z = g.matrix[(i, i)];
                    m[(i, i)] = if z.norm() > 0.0 { z / z.norm() } else { C64::from(1.0) };
                }
                m
            }
            Constraint::General => g.matrix.clone(),
        };
        GroupElement { matrix }
    }

    /// Random algebra vector with coordinates uniform in `[−scale, scale]`.
    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraVector {
        AlgebraVector::from_fn(self.dim(), |_, _| rng.gen_range(-scale..=scale))
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// Coordinate radius used by `random_element`: 1 for compact
    /// constraints, ½ otherwise so that long words stay well conditioned.
    pub fn sample_radius(&self) -> f64 {
        match self.constraint {
            Constraint::SpecialUnitary | Constraint::Unitary | Constraint::SpecialOrthogonal | Constraint::DiagonalUnitary => 1.0,
            Constraint::SpecialLinearReal | Constraint::General => 0.5,
        }
    }

    /// `exp` of a random algebra vector with coordinates uniform in
    /// `[−r, r]`, `r = sample_radius()`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        self.exp(&self.random_algebra(rng, self.sample_radius()))
    }

    /// Dimension of the center of the Lie algebra.
    pub fn center_dim(&self) -> usize {
        let d = self.dim();
        let mut stacked = DMatrix::zeros(d * d, d);
        for i in 0..d {
            let ad = self.ad_matrix(&self.unit(i));
            stacked.view_mut((i * d, 0), (d, d)).copy_from(&ad);
        }
        d - crate::linalg::rank(&stacked)
    }
}

fn trace_gram(basis: &[CMat], scale: f64) -> DMatrix<f64> {
    let d = basis.len();
    DMatrix::from_fn(d, d, |i, j| scale * (&basis[i] * &basis[j]).trace().re)
}

fn algebra_residual(c: Constraint, x: &CMat) -> f64 {
    let n = x.nrows();
    let imag = x.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let anti_herm = max_abs(&(x.adjoint() + x));
    let tr = x.trace().norm();
    match c {
        Constraint::SpecialUnitary => anti_herm.max(tr),
        Constraint::Unitary => anti_herm,
        Constraint::SpecialLinearReal => imag.max(tr),
        Constraint::SpecialOrthogonal => imag.max(anti_herm),
        Constraint::DiagonalUnitary => {
            let mut off: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off = off.max(x[(i, j)].norm());
                    }
                }
            }
            off.max(anti_herm)
        }
        Constraint::General => 0.0,
    }
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé [8/8]
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    const M: usize = 8;
    let n = a.nrows();
    let norm = one_norm(a);
    let mut s = 0i32;
    if norm > 0.5 {
        s = libm::ceil(libm::log2(norm / 0.5)) as i32;
    }
    let scaled = a * C64::from(libm::ldexp(1.0, -s));
    let mut coef = [0.0f64; M + 1];
    coef[0] = 1.0;
    for k in 1..=M {
        coef[k] = coef[k - 1] * (M - k + 1) as f64 / ((2 * M - k + 1) * k) as f64;
    }
    let id = CMat::identity(n, n);
    let mut num = id.clone() * C64::from(coef[0]);
    let mut den = id.clone() * C64::from(coef[0]);
    let mut pow = id;
    for (k, c) in coef.iter().enumerate().skip(1) {
        pow = &pow * &scaled;
        let term = &pow * C64::from(*c);
        num += &term;
        if k % 2 == 0 {
            den += term;
        } else {
            den -= term;
        }
    }
    let mut r = den.lu().solve(&num).expect("Padé denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// A conjugation-invariant function on the group.
pub trait InvariantFunction {
    fn eval(&self, g: &GroupElement) -> f64;

    fn is_conjugation_invariant(&self) -> bool {
        true
    }

    /// Closed-form metric gradient `φ̇(g)`, when known.
    fn closed_form_phi_dot(&self, _model: &LieGroupModel, _g: &GroupElement) -> Option<AlgebraVector> {
        None
    }
}

/// `φ(g) = Re tr(g)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReTrace;

impl InvariantFunction for ReTrace {
    fn eval(&self, g: &GroupElement) -> f64 {
        g.trace().re
    }

    fn closed_form_phi_dot(&self, model: &LieGroupModel, g: &GroupElement) -> Option<AlgebraVector> {
        let b = AlgebraVector::from_iterator(
            model.dim(),
            model.basis().iter().map(|x| (&g.matrix * x).trace().re),
        );
        Some(model.gram_inv() * b)
    }
}

/// `φ(g) = Re tr(gᵏ)`.
#[derive(Clone, Copy, Debug)]
pub struct ReTracePower(pub u32);

impl InvariantFunction for ReTracePower {
    fn eval(&self, g: &GroupElement) -> f64 {
        g.matrix.pow(self.0).trace().re
    }

    fn closed_form_phi_dot(&self, model: &LieGroupModel, g: &GroupElement) -> Option<AlgebraVector> {
        let gk = g.matrix.pow(self.0);
        let k = self.0 as f64;
        let b = AlgebraVector::from_iterator(
            model.dim(),
            model.basis().iter().map(|x| k * (&gk * x).trace().re),
        );
        Some(model.gram_inv() * b)
    }
}

/// An invariant function given by a closure; differentiated numerically.
pub struct FnInvariant<F>(pub F);

impl<F: Fn(&GroupElement) -> f64> InvariantFunction for FnInvariant<F> {
    fn eval(&self, g: &GroupElement) -> f64 {
        (self.0)(g)
    }
}

/// A function that is declared not to be conjugation invariant.
pub struct NonInvariant<F>(pub F);

impl<F: Fn(&GroupElement) -> f64> InvariantFunction for NonInvariant<F> {
    fn eval(&self, g: &GroupElement) -> f64 {
        (self.0)(g)
    }

    fn is_conjugation_invariant(&self) -> bool {
        false
    }
}

/// Metric gradient `φ̇(g)`: `d/dt φ(g·exp(tξ))|₀ = ⟨φ̇(g), ξ⟩`.
pub fn phi_dot(model: &LieGroupModel, phi: &dyn InvariantFunction, g: &GroupElement) -> Result<AlgebraVector> {
    if !phi.is_conjugation_invariant() {
        return Err(Error::NotInvariant { defect: f64::NAN });
    }
    if let Some(v) = phi.closed_form_phi_dot(model, g) {
        return Ok(v);
    }
    Ok(phi_dot_fd(model, phi, g, PHI_DOT_STEP))
}

/// Central-difference metric gradient along `g·exp(tX_i)`.
pub fn phi_dot_fd(model: &LieGroupModel, phi: &dyn InvariantFunction, g: &GroupElement, h: f64) -> AlgebraVector {
    let d = model.dim();
    let mut b = AlgebraVector::zeros(d);
    for i in 0..d {
        let e = model.unit(i);
        let plus = g.mul(&model.exp(&(&e * h)));
        let minus = g.mul(&model.exp(&(&e * -h)));
        b[i] = (phi.eval(&plus) - phi.eval(&minus)) / (2.0 * h);
    }
    model.gram_inv() * b
}

/// Largest `|φ(hgh⁻¹) − φ(g)|` over sampled pairs.
pub fn invariance_defect<R: Rng + ?Sized>(
    model: &LieGroupModel,
    phi: &dyn InvariantFunction,
    rng: &mut R,
    samples: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = model.random_element(rng);
        let h = model.random_element(rng);
        let c = h.mul(&g).mul(&model.inverse(&h));
        worst = worst.max((phi.eval(&c) - phi.eval(&g)).abs());
    }
    worst
}
