//! Fiberwise linear algebra of `𝕋_η G^E = TG^E ⊕ T*G^E` at `Φ(κ)`:
//! the trivializing sections, the structure `A`, the relation with
//! `(TM, ω)` and the bivector from the antidiagonal splitting.
//!
//! Vectors and covectors are left-trivialized, covectors identified with
//! algebra vectors through the metric.

use alloc::{format, vec::Vec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::omega_at;
use crate::lie::{AlgebraVector, GroupElement, LieGroupModel};
use crate::linalg;
use crate::moduli::{boundary_jacobian, generating_matrix, ModuliChart, ModuliPoint, TangentVector};

/// Existence residual tolerance for related elements.
pub const EXISTENCE_TOL: f64 = 1e-8;

/// An element `v + μ` over a point of `G^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct CourantElement {
    pub base: Vec<GroupElement>,
    pub vector_part: DVector<f64>,
    pub covector_part: DVector<f64>,
}

/// `⟨x, y⟩ = Σ_e (⟨μ_x, v_y⟩ + ⟨μ_y, v_x⟩)`.
pub fn pairing(model: &LieGroupModel, x: &CourantElement, y: &CourantElement) -> f64 {
    pairing_raw(model, &x.vector_part, &x.covector_part, &y.vector_part, &y.covector_part)
}

fn pairing_raw(model: &LieGroupModel, vx: &DVector<f64>, mx: &DVector<f64>, vy: &DVector<f64>, my: &DVector<f64>) -> f64 {
    let d = model.dim();
    let mut total = 0.0;
    for e in 0..vx.len() / d {
        let b = |v: &DVector<f64>| v.rows(e * d, d).into_owned();
        total += model.inner(&b(mx), &b(vy)) + model.inner(&b(my), &b(vx));
    }
    total
}

/// `s(ξ′, ξ)` at `g`: vector `ξ − Ad_{g⁻¹}ξ′`, covector `½(ξ + Ad_{g⁻¹}ξ′)`.
pub fn trivializing_section(model: &LieGroupModel, g: &GroupElement, xi_prime: &AlgebraVector, xi: &AlgebraVector) -> CourantElement {
    let moved = model.adjoint(&model.inverse(g), xi_prime);
    CourantElement {
        base: alloc::vec![g.clone()],
        vector_part: xi - &moved,
        covector_part: (xi + moved) * 0.5,
    }
}

/// A subspace of a fiber, as columns `[vector; covector]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracFiber {
    pub base: Vec<GroupElement>,
    pub basis: DMatrix<f64>,
}

impl DiracFiber {
    /// Half the fiber dimension.
    pub fn half_dim(&self) -> usize {
        self.basis.nrows() / 2
    }

    pub fn element(&self, k: usize) -> CourantElement {
        let h = self.half_dim();
        let col = self.basis.column(k);
        CourantElement {
            base: self.base.clone(),
            vector_part: col.rows(0, h).into_owned(),
            covector_part: col.rows(h, h).into_owned(),
        }
    }

    /// Largest pairing between basis elements.
    pub fn isotropy_defect(&self, model: &LieGroupModel) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.basis.ncols() {
            for j in i..self.basis.ncols() {
                worst = worst.max(pairing(model, &self.element(i), &self.element(j)).abs());
            }
        }
        worst
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.basis)
    }

    /// Isotropic of half dimension.
    pub fn is_lagrangian(&self, model: &LieGroupModel, tol: f64) -> bool {
        self.isotropy_defect(model) <= tol && self.rank() == self.half_dim()
    }
}

/// Matrix of `ξ ↦ σ(ξ) = Σ_e s^e(ξ_{t(e)}, ξ_{s(e)})`, rows `[vector; covector]`.
pub fn sigma_matrix(chart: &ModuliChart, phi: &[GroupElement]) -> DMatrix<f64> {
    let model = chart.model();
    let d = model.dim();
    let ne = phi.len();
    let mut m = DMatrix::zeros(2 * ne * d, chart.vertex_dim());
    for (e, &(s, t)) in chart.boundary_ends().iter().enumerate() {
        let ad = model.ad_group_matrix(&model.inverse(&phi[e]));
        let mut vt = m.view_mut((e * d, t * d), (d, d));
        vt -= &ad;
        let mut ct = m.view_mut((ne * d + e * d, t * d), (d, d));
        ct += &ad * 0.5;
        for k in 0..d {
            m[(e * d + k, s * d + k)] += 1.0;
            m[(ne * d + e * d + k, s * d + k)] += 0.5;
        }
    }
    m
}

/// The fiber of `A` at `Φ(κ)`.
pub fn structure_fiber_a(chart: &ModuliChart, phi: &[GroupElement]) -> DiracFiber {
    DiracFiber { base: phi.to_vec(), basis: sigma_matrix(chart, phi) }
}

fn block_gram(model: &LieGroupModel, blocks: usize) -> DMatrix<f64> {
    let d = model.dim();
    let mut g = DMatrix::zeros(blocks * d, blocks * d);
    for e in 0..blocks {
        g.view_mut((e * d, e * d), (d, d)).copy_from(model.gram());
    }
    g
}

/// Outcome of relating each basis element of `A` to `TM`.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismReport {
    pub existence_residual: f64,
    pub nullity: usize,
    pub min_sigma: f64,
    /// Largest distance of the related vector from `ξ_M`.
    pub anchor_defect: f64,
    pub isotropy_defect: f64,
    /// First violated condition, if any.
    pub failure: Option<&'static str>,
}

impl MorphismReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Relate every `w + ν = σ(ξ_k)` to a `v ∈ TM` with `dΦ(v) = w` and
/// `ι_v ω = −dΦ*ν`, using the given ω matrix.
pub fn verify_dirac_morphism_with(chart: &ModuliChart, point: &ModuliPoint, omega: &DMatrix<f64>) -> Result<MorphismReport> {
    let model = chart.model();
    let (phi, dphi) = boundary_jacobian(chart, point);
    let ne = phi.len();
    let h = ne * model.dim();
    let sigma = sigma_matrix(chart, &phi);
    let fiber = DiracFiber { base: phi.clone(), basis: sigma.clone() };
    let gram = block_gram(model, ne);
    // dΦ v = w and Ωv = dΦᵀ G ν (ω(v,·) = vᵀΩ and ι_vω = −dΦ*ν).
    let system = linalg::vstack(&[&dphi, omega]);
    let gen = generating_matrix(chart, point);
    let mut existence_residual: f64 = 0.0;
    let mut anchor_defect: f64 = 0.0;
    for k in 0..sigma.ncols() {
        let w = sigma.view((0, k), (h, 1)).into_owned();
        let nu = sigma.view((h, k), (h, 1)).into_owned();
        let mut rhs = DVector::zeros(system.nrows());
        rhs.rows_mut(0, h).copy_from(&w);
        rhs.rows_mut(h, omega.nrows()).copy_from(&(dphi.transpose() * &gram * &nu));
        let (v, res) = linalg::lstsq(&system, &rhs);
        existence_residual = existence_residual.max(res);
        anchor_defect = anchor_defect.max((v - gen.column(k)).amax());
    }
    let nullity = linalg::nullspace(&system).ncols();
    let min_sigma = linalg::min_singular_value(&system);
    let isotropy_defect = fiber.isotropy_defect(model);
    let failure = if isotropy_defect > 1e-10 || fiber.rank() != h {
        Some("A is not Lagrangian at Φ(κ)")
    } else if existence_residual > EXISTENCE_TOL {
        Some("existence: some element of A is not related to TM")
    } else if nullity > 0 {
        Some("uniqueness: ker ω ∩ ker dΦ ≠ 0")
    } else if anchor_defect > 1e-8 {
        Some("comorphism: related vector differs from the generating vector")
    } else {
        None
    };
    Ok(MorphismReport { existence_residual, nullity, min_sigma, anchor_defect, isotropy_defect, failure })
}

pub fn verify_dirac_morphism(chart: &ModuliChart, point: &ModuliPoint) -> Result<MorphismReport> {
    verify_dirac_morphism_with(chart, point, &omega_at(chart, point)?)
}

/// ω plus a random symmetric perturbation of the given size.
pub fn perturbed_omega<R: Rng + ?Sized>(chart: &ModuliChart, point: &ModuliPoint, size: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    let n = chart.tangent_dim();
    let noise = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-size..=size));
    Ok(omega_at(chart, point)? + (&noise + noise.transpose()) * 0.5)
}

/// Range and kernel statements at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeKernelReport {
    pub ann_range_dim: usize,
    pub stabilizer_covector_dim: usize,
    /// Angle between `ann(ran dΦ)` and the covector parts of `σ(ξ)`, `ξ` in
    /// the stabilizer.
    pub ann_angle: f64,
    pub ker_dphi_dim: usize,
    pub ann_orbit_dim: usize,
    /// Angle between `ω♭(ker dΦ)` and `ann(S_m)`.
    pub flat_angle: f64,
    /// Condition number of `ω♭` on `ker dΦ`.
    pub flat_condition: f64,
}

pub fn range_kernel_props(chart: &ModuliChart, point: &ModuliPoint) -> Result<RangeKernelReport> {
    let model = chart.model();
    let (phi, dphi) = boundary_jacobian(chart, point);
    let h = phi.len() * model.dim();
    let gram = block_gram(model, phi.len());
    let ann_range = linalg::nullspace(&(dphi.transpose() * &gram));
    let gen = generating_matrix(chart, point);
    let stab = linalg::nullspace(&gen);
    let sigma = sigma_matrix(chart, &phi);
    let stab_cov = linalg::orth(&(sigma.rows(h, h) * &stab));
    let ann_angle = linalg::max_principal_angle(&ann_range, &stab_cov);
    let omega = omega_at(chart, point)?;
    let ker = linalg::nullspace(&dphi);
    let flat = &omega * &ker;
    let ann_orbit = linalg::nullspace(&gen.transpose());
    let sv = linalg::singular_values(&flat);
    let flat_condition = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if ker.ncols() > 0 && sv.len() >= ker.ncols() => hi / lo,
        _ => 1.0,
    };
    Ok(RangeKernelReport {
        ann_range_dim: ann_range.ncols(),
        stabilizer_covector_dim: stab_cov.ncols(),
        ann_angle,
        ker_dphi_dim: ker.ncols(),
        ann_orbit_dim: ann_orbit.ncols(),
        flat_angle: linalg::max_principal_angle(&linalg::orth(&flat), &ann_orbit),
        flat_condition,
    })
}

/// Matrix of `ζ ↦ Σ_e s^e(ζ_e, −ζ_e)`, rows `[vector; covector]`.
pub fn antidiagonal_matrix(model: &LieGroupModel, phi: &[GroupElement]) -> DMatrix<f64> {
    let d = model.dim();
    let ne = phi.len();
    let mut m = DMatrix::zeros(2 * ne * d, ne * d);
    for (e, g) in phi.iter().enumerate() {
        let ad = model.ad_group_matrix(&model.inverse(g));
        let mut v = m.view_mut((e * d, e * d), (d, d));
        v -= &ad;
        let mut c = m.view_mut((ne * d + e * d, e * d), (d, d));
        c += &ad * 0.5;
        for k in 0..d {
            m[(e * d + k, e * d + k)] -= 1.0;
            m[(ne * d + e * d + k, e * d + k)] -= 0.5;
        }
    }
    m
}

/// The bivector `π` at a point, with `π(μ₁, μ₂) = μ₂ · π♯(μ₁)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    /// Column `k` is `π♯(e_k)`.
    pub sharp: DMatrix<f64>,
    /// Smallest singular value of `[A B]`.
    pub transversality_sigma: f64,
}

impl Bivector {
    pub fn apply(&self, mu: &TangentVector) -> TangentVector {
        &self.sharp * mu
    }

    pub fn eval(&self, mu1: &TangentVector, mu2: &TangentVector) -> f64 {
        mu2.dot(&(&self.sharp * mu1))
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.sharp + self.sharp.transpose()).amax()
    }
}

/// `π` from `(T_ωΦ)⁻¹ B` for the antidiagonal complement `B`.
pub fn quasi_poisson_bivector(chart: &ModuliChart, point: &ModuliPoint) -> Result<Bivector> {
    let model = chart.model();
    let (phi, dphi) = boundary_jacobian(chart, point);
    let h = phi.len() * model.dim();
    let a = sigma_matrix(chart, &phi);
    let b = antidiagonal_matrix(model, &phi);
    let transversality_sigma = linalg::min_singular_value(&linalg::hstack(&[&a, &b]));
    if linalg::rank(&linalg::hstack(&[&a, &b])) < 2 * h {
        return Err(Error::Precondition(format!(
            "antidiagonal complement is not transverse to A (σ_min = {transversality_sigma:e})"
        )));
    }
    let omega = omega_at(chart, point)?;
    let n = chart.tangent_dim();
    let gram = block_gram(model, phi.len());
    let w = b.rows(0, h).into_owned();
    let nu = b.rows(h, h).into_owned();
    // v + μ is related to Bζ iff dΦ v = Wζ and μ = dΦ*ν(ζ) + ι_vω.
    let top = linalg::hstack(&[&dphi, &(-&w)]);
    let bottom = linalg::hstack(&[&(-&omega), &(dphi.transpose() * &gram * &nu)]);
    let system = linalg::vstack(&[&top, &bottom]);
    if !linalg::nullspace(&system).is_empty() {
        return Err(Error::Precondition("(T_ωΦ)⁻¹B is not transverse to TM".into()));
    }
    let mut sharp = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut rhs = DVector::zeros(system.nrows());
        rhs[h + k] = 1.0;
        let (sol, res) = linalg::lstsq(&system, &rhs);
        if res > EXISTENCE_TOL {
            return Err(Error::Solve { residual: res });
        }
        sharp.set_column(k, &sol.rows(0, n));
    }
    Ok(Bivector { sharp, transversality_sigma })
}

/// `|π♯(df) + X_f|` for a differential `df`, with `ι(X_f)ω = −df`.
///
/// Under the relation `μ = dΦ*ν + ι_vω`, `X_f − df` is related to `B`, so
/// `π♯(df) = −X_f` and `π(df, dg) = −ω(X_f, X_g)`.
pub fn sharp_defect(chart: &ModuliChart, point: &ModuliPoint, pi: &Bivector, df: &TangentVector) -> Result<f64> {
    let xf = crate::dynamics::hamiltonian_vector_for(chart, point, df)?;
    Ok((pi.apply(df) + xf).amax())
}
