//! Hamiltonian vector fields of invariant functions, explicit Goldman flows,
//! an RK4 cross-check and the Goldman bracket.

use alloc::{format, vec::Vec};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forms::{omega_at, omega_eval};
use crate::lie::{phi_dot, GroupElement, InvariantFunction};
use crate::linalg;
use crate::moduli::{
    action_apply, boundary_jacobian, holonomy, invert_gen_word, reduce_gen_word, word_jacobian, GenLetter, GenWord,
    ModuliChart, ModuliPoint, TangentVector,
};

/// Residual above which `df` is taken to be outside the admissible range.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// A scalar function on the chart with its differential.
pub trait ScalarField {
    fn value(&self, chart: &ModuliChart, point: &ModuliPoint) -> Result<f64>;

    /// Components of `df` in the left-trivialized basis: `df(v) = df·v`.
    fn differential(&self, chart: &ModuliChart, point: &ModuliPoint) -> Result<TangentVector> {
        fd_differential(chart, point, |p| self.value(chart, p), FD_STEP)
    }
}

/// Step for numerical differentials of scalar fields.
pub const FD_STEP: f64 = 1e-5;

/// Move every generator by `g_s ↦ g_s·exp(t v_s)`.
pub fn shift_point(chart: &ModuliChart, point: &ModuliPoint, v: &TangentVector, t: f64) -> ModuliPoint {
    let model = chart.model();
    let values = point
        .values
        .iter()
        .enumerate()
        .map(|(k, g)| g.mul(&model.exp(&(chart.block(v, k) * t))))
        .collect();
    ModuliPoint { values }
}

/// Central-difference differential of a scalar function.
pub fn fd_differential<F>(chart: &ModuliChart, point: &ModuliPoint, f: F, h: f64) -> Result<TangentVector>
where
    F: Fn(&ModuliPoint) -> Result<f64>,
{
    let n = chart.tangent_dim();
    let mut out = TangentVector::zeros(n);
    for k in 0..n {
        let mut e = TangentVector::zeros(n);
        e[k] = 1.0;
        out[k] = (f(&shift_point(chart, point, &e, h))? - f(&shift_point(chart, point, &e, -h))?) / (2.0 * h);
    }
    Ok(out)
}

/// `φ_α = φ ∘ ev_α` for a loop word `α`.
pub struct LoopFunction<'a> {
    pub loop_word: GenWord,
    pub phi: &'a dyn InvariantFunction,
}

impl<'a> LoopFunction<'a> {
    /// Validates that the word is a loop.
    pub fn new(chart: &ModuliChart, loop_word: GenWord, phi: &'a dyn InvariantFunction) -> Result<Self> {
        if let Some((s, t)) = chart.word_ends(&loop_word) {
            if s != t {
                return Err(Error::InvalidArgument(format!("word runs from vertex {s} to vertex {t}, not a loop")));
            }
        }
        Ok(LoopFunction { loop_word, phi })
    }
}

impl ScalarField for LoopFunction<'_> {
    fn value(&self, chart: &ModuliChart, point: &ModuliPoint) -> Result<f64> {
        Ok(self.phi.eval(&holonomy(chart, point, &self.loop_word)))
    }

    fn differential(&self, chart: &ModuliChart, point: &ModuliPoint) -> Result<TangentVector> {
        let model = chart.model();
        let (g, jac) = word_jacobian(chart, point, &self.loop_word);
        let pd = phi_dot(model, self.phi, &g)?;
        Ok(jac.transpose() * (model.gram() * pd))
    }
}

/// A constant function.
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _: &ModuliChart, _: &ModuliPoint) -> Result<f64> {
        Ok(self.0)
    }

    fn differential(&self, chart: &ModuliChart, _: &ModuliPoint) -> Result<TangentVector> {
        Ok(TangentVector::zeros(chart.tangent_dim()))
    }
}

/// A scalar function given by a closure, differentiated numerically.
pub struct FnField<F>(pub F);

impl<F: Fn(&ModuliChart, &ModuliPoint) -> f64> ScalarField for FnField<F> {
    fn value(&self, chart: &ModuliChart, point: &ModuliPoint) -> Result<f64> {
        Ok((self.0)(chart, point))
    }
}

/// Largest `|f(h·κ) − f(κ)|` over sampled gauge transformations.
pub fn gauge_invariance_defect<R: rand::Rng + ?Sized>(
    chart: &ModuliChart,
    point: &ModuliPoint,
    f: &dyn ScalarField,
    rng: &mut R,
    samples: usize,
) -> Result<f64> {
    let model = chart.model();
    let base = f.value(chart, point)?;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h: Vec<GroupElement> = (0..chart.num_vertices()).map(|_| model.random_element(rng)).collect();
        worst = worst.max((f.value(chart, &action_apply(chart, &h, point)?)? - base).abs());
    }
    Ok(worst)
}

/// Solve `ι(v)ω = −df`, `dΦ_e(v) = 0` for a covector given in components.
pub fn hamiltonian_vector_for(chart: &ModuliChart, point: &ModuliPoint, df: &TangentVector) -> Result<TangentVector> {
    let omega = omega_at(chart, point)?;
    let (_, dphi) = boundary_jacobian(chart, point);
    // ω(v, w) = vᵀΩw, so ι(v)ω = −df reads Ωv = df.
    let a = linalg::vstack(&[&omega, &dphi]);
    let mut rhs = TangentVector::zeros(a.nrows());
    rhs.rows_mut(0, df.len()).copy_from(df);
    let (v, residual) = linalg::lstsq(&a, &rhs);
    if residual > ADMISSIBLE_TOL * (1.0 + df.norm()) {
        return Err(Error::Solve { residual });
    }
    Ok(v)
}

/// Hamiltonian vector field `X_f` at a point.
pub fn hamiltonian_vector(chart: &ModuliChart, point: &ModuliPoint, f: &dyn ScalarField) -> Result<TangentVector> {
    hamiltonian_vector_for(chart, point, &f.differential(chart, point)?)
}

/// `{f, g} = ω(X_f, X_g) = dg(X_f)`.
pub fn poisson_bracket_numeric(
    chart: &ModuliChart,
    point: &ModuliPoint,
    f: &dyn ScalarField,
    g: &dyn ScalarField,
) -> Result<f64> {
    let omega = omega_at(chart, point)?;
    let xf = hamiltonian_vector(chart, point, f)?;
    let xg = hamiltonian_vector(chart, point, g)?;
    Ok(omega_eval(&omega, &xf, &xg))
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`, the outer brackets by central
/// differences along the Hamiltonian vectors.
pub fn jacobi_defect(
    chart: &ModuliChart,
    point: &ModuliPoint,
    fs: [&dyn ScalarField; 3],
    h: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..3 {
        let (f, g, hh) = (fs[k], fs[(k + 1) % 3], fs[(k + 2) % 3]);
        let xf = hamiltonian_vector(chart, point, f)?;
        let inner = |p: &ModuliPoint| poisson_bracket_numeric(chart, p, g, hh);
        let plus = inner(&shift_point(chart, point, &xf, h))?;
        let minus = inner(&shift_point(chart, point, &xf, -h))?;
        total += (plus - minus) / (2.0 * h);
    }
    Ok(total.abs())
}

/// Boundary edges whose boundary component contains only `vertex`.
fn lone_boundary_edge(chart: &ModuliChart, vertex: usize) -> Result<usize> {
    let ends = chart.boundary_ends();
    let touching: Vec<usize> = (0..ends.len()).filter(|&e| ends[e].0 == vertex || ends[e].1 == vertex).collect();
    match touching.as_slice() {
        [e] if ends[*e].0 == vertex && ends[*e].1 == vertex => Ok(*e),
        [] => Err(Error::InvalidArgument(format!("vertex {vertex} is not on the boundary"))),
        _ => Err(Error::Precondition(format!("vertex {vertex} shares its boundary circle with other vertices"))),
    }
}

/// Flow of `X_{φ∘Φ_e}` for the boundary loop at a vertex alone on its
/// boundary circle: the gauge action of `exp(−t φ̇(Φ_e))` at that vertex,
/// i.e. `ξ_M` for `ξ = φ̇(Φ_e)` at that vertex. On the cylinder this is
/// `(a, c) ↦ (a, c·exp(t φ̇(a)))`.
pub fn boundary_loop_flow(
    chart: &ModuliChart,
    point: &ModuliPoint,
    vertex: usize,
    phi: &dyn InvariantFunction,
    t: f64,
) -> Result<ModuliPoint> {
    let model = chart.model();
    let e = lone_boundary_edge(chart, vertex)?;
    let phi_e = holonomy(chart, point, &chart.boundary_words()[e]);
    let xi = phi_dot(model, phi, &phi_e)?;
    let mut h: Vec<GroupElement> = (0..chart.num_vertices()).map(|_| model.identity()).collect();
    h[vertex] = model.exp(&(xi * -t));
    action_apply(chart, &h, point)
}

/// The loop function of a lone boundary circle, for comparison with
/// `boundary_loop_flow`.
pub fn boundary_loop_function<'a>(
    chart: &ModuliChart,
    vertex: usize,
    phi: &'a dyn InvariantFunction,
) -> Result<LoopFunction<'a>> {
    let e = lone_boundary_edge(chart, vertex)?;
    LoopFunction::new(chart, chart.boundary_words()[e].clone(), phi)
}

/// Segmentation of a generator `b = b₀⋯b_l` by its crossings with a simple
/// loop `𝖺`, with the local intersection signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionData {
    /// The generator moved by the flow.
    pub target: usize,
    pub segments: Vec<GenWord>,
    pub signs: Vec<i8>,
    pub loop_word: GenWord,
}

impl IntersectionData {
    pub fn validate(&self, chart: &ModuliChart) -> Result<()> {
        if self.target >= chart.num_generators() {
            return Err(Error::InvalidArgument(format!("no generator {}", self.target)));
        }
        if self.segments.len() != self.signs.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} segments for {} crossings",
                self.segments.len(),
                self.signs.len()
            )));
        }
        if self.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("intersection signs must be ±1".into()));
        }
        let joined: GenWord = self.segments.iter().flatten().copied().collect();
        if reduce_gen_word(&joined) != [GenLetter { gen: self.target, inverse: false }] {
            return Err(Error::InvalidArgument("segments do not reduce to the target generator".into()));
        }
        Ok(())
    }

    /// `𝖺_i = b₀⋯b_{i−1} 𝖺 (b₀⋯b_{i−1})⁻¹` for `i = 1..l`.
    pub fn conjugated_loops(&self) -> Vec<GenWord> {
        let mut prefix = GenWord::new();
        let mut out = Vec::with_capacity(self.signs.len());
        for seg in &self.segments[..self.signs.len()] {
            prefix.extend_from_slice(seg);
            let mut w = prefix.clone();
            w.extend_from_slice(&self.loop_word);
            w.extend(invert_gen_word(&prefix));
            out.push(reduce_gen_word(&w));
        }
        out
    }
}

/// Explicit Goldman flow of `φ_𝖺`: each listed generator becomes
/// `∏ᵢ exp(t εᵢ φ̇(κ(𝖺ᵢ)))·κ(b)`; other generators are unchanged. All
/// entries must share the same loop word.
pub fn goldman_flow(
    chart: &ModuliChart,
    point: &ModuliPoint,
    data: &[IntersectionData],
    phi: &dyn InvariantFunction,
    t: f64,
) -> Result<ModuliPoint> {
    let model = chart.model();
    if let Some(first) = data.first() {
        if data.iter().any(|d| d.loop_word != first.loop_word) {
            return Err(Error::InvalidArgument("intersection data for different loops".into()));
        }
    }
    let mut out = point.clone();
    for d in data {
        d.validate(chart)?;
        let mut acc = model.identity();
        for (a, &eps) in d.conjugated_loops().iter().zip(&d.signs) {
            let xi = phi_dot(model, phi, &holonomy(chart, point, a))?;
            acc = acc.mul(&model.exp(&(xi * (t * eps as f64))));
        }
        out.values[d.target] = acc.mul(&point.values[d.target]);
    }
    Ok(out)
}

/// Classical RK4 in the left trivialization: every stage moves the
/// generators by `g ↦ g·exp(h v)`.
pub fn flow_integrate(
    chart: &ModuliChart,
    point: &ModuliPoint,
    f: &dyn ScalarField,
    t_final: f64,
    n_steps: usize,
) -> Result<ModuliPoint> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("at least one step is needed".into()));
    }
    let h = t_final / n_steps as f64;
    let mut p = point.clone();
    for _ in 0..n_steps {
        let k1 = hamiltonian_vector(chart, &p, f)?;
        let k2 = hamiltonian_vector(chart, &shift_point(chart, &p, &k1, h / 2.0), f)?;
        let k3 = hamiltonian_vector(chart, &shift_point(chart, &p, &k2, h / 2.0), f)?;
        let k4 = hamiltonian_vector(chart, &shift_point(chart, &p, &k3, h), f)?;
        let v = (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0;
        p = shift_point(chart, &p, &v, h);
    }
    Ok(p)
}

/// Left-trivialized time derivative of a curve of points at `t = 0`.
pub fn curve_velocity<F>(chart: &ModuliChart, point: &ModuliPoint, curve: F, h: f64) -> Result<TangentVector>
where
    F: Fn(f64) -> Result<ModuliPoint>,
{
    let plus = curve(h)?;
    let minus = curve(-h)?;
    point_difference(chart, point, &plus, &minus, 2.0 * h)
}

fn point_difference(
    chart: &ModuliChart,
    base: &ModuliPoint,
    plus: &ModuliPoint,
    minus: &ModuliPoint,
    span: f64,
) -> Result<TangentVector> {
    let model = chart.model();
    let d = model.dim();
    let mut out = TangentVector::zeros(chart.tangent_dim());
    for k in 0..chart.num_generators() {
        let dm = (&plus.values[k].matrix - &minus.values[k].matrix) / nalgebra::Complex::new(span, 0.0);
        let xi = model.coords(&(model.inverse(&base.values[k]).matrix * dm));
        out.rows_mut(k * d, d).copy_from(&xi);
    }
    Ok(out)
}

/// Left-trivialized Jacobian of a point map by central differences.
pub fn map_jacobian<F>(chart: &ModuliChart, point: &ModuliPoint, map: F, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&ModuliPoint) -> Result<ModuliPoint>,
{
    let n = chart.tangent_dim();
    let image = map(point)?;
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = TangentVector::zeros(n);
        e[k] = 1.0;
        let plus = map(&shift_point(chart, point, &e, h))?;
        let minus = map(&shift_point(chart, point, &e, -h))?;
        j.set_column(k, &point_difference(chart, &image, &plus, &minus, 2.0 * h)?);
    }
    Ok(j)
}

/// `‖ω − Ψ*ω‖` for a point map `Ψ`, with `Ψ_*` by central differences.
pub fn omega_invariance_defect<F>(chart: &ModuliChart, point: &ModuliPoint, map: F, h: f64) -> Result<f64>
where
    F: Fn(&ModuliPoint) -> Result<ModuliPoint>,
{
    let image = map(point)?;
    let j = map_jacobian(chart, point, &map, h)?;
    let pulled = j.transpose() * omega_at(chart, &image)? * &j;
    Ok(linalg::op_norm(&(omega_at(chart, point)? - pulled)))
}

/// Largest boundary-holonomy change between two points.
pub fn phi_drift(chart: &ModuliChart, a: &ModuliPoint, b: &ModuliPoint) -> f64 {
    chart
        .boundary_words()
        .iter()
        .map(|w| holonomy(chart, a, w).distance(&holonomy(chart, b, w)))
        .fold(0.0, f64::max)
}

/// One transverse crossing of two loops, each transported to the crossing
/// by a conjugating word: `𝖺ᵢ = γ 𝖺 γ⁻¹`, `𝖻ᵢ = δ 𝖻 δ⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub sign: i8,
    pub alpha_conjugator: GenWord,
    pub beta_conjugator: GenWord,
}

/// Intersection data of two loops for the bracket formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketData {
    pub alpha_loop: GenWord,
    pub beta_loop: GenWord,
    pub crossings: Vec<Crossing>,
}

fn conjugate(gamma: &[GenLetter], w: &[GenLetter]) -> GenWord {
    let mut out: GenWord = gamma.to_vec();
    out.extend_from_slice(w);
    out.extend(invert_gen_word(gamma));
    reduce_gen_word(&out)
}

/// `Σᵢ εᵢ ⟨φ̇(κ(𝖺ᵢ)), ψ̇(κ(𝖻ᵢ))⟩`.
pub fn goldman_bracket(
    chart: &ModuliChart,
    point: &ModuliPoint,
    data: &BracketData,
    phi: &dyn InvariantFunction,
    psi: &dyn InvariantFunction,
) -> Result<f64> {
    let model = chart.model();
    let mut total = 0.0;
    for c in &data.crossings {
        if c.sign != 1 && c.sign != -1 {
            return Err(Error::InvalidArgument("intersection signs must be ±1".into()));
        }
        let a = conjugate(&c.alpha_conjugator, &data.alpha_loop);
        let b = conjugate(&c.beta_conjugator, &data.beta_loop);
        match (chart.word_ends(&a), chart.word_ends(&b)) {
            (Some((sa, _)), Some((sb, _))) if sa != sb => {
                return Err(Error::InvalidArgument("transported loops have different base vertices".into()))
            }
            _ => {}
        }
        let pa = phi_dot(model, phi, &holonomy(chart, point, &a))?;
        let pb = phi_dot(model, psi, &holonomy(chart, point, &b))?;
        total += c.sign as f64 * model.inner(&pa, &pb);
    }
    Ok(total)
}
