//! Free-generator charts `M_G(Σ,V) ≅ G^S`.
//!
//! Every letter of the pattern is expanded into a word in the generators;
//! holonomies, their left-trivialized differentials, boundary holonomies and
//! the action of `G^V` are all computed from these expansions.

use alloc::{format, string::String, vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, LieGroupModel};
use crate::linalg;
use crate::surface::{analyze, reduce_word, Gluing, GluingPattern, SignedLetter, SurfaceInfo, Word};

/// A generator occurrence in an expanded word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenLetter {
    pub gen: usize,
    pub inverse: bool,
}

impl GenLetter {
    pub fn inv(self) -> Self {
        GenLetter { gen: self.gen, inverse: !self.inverse }
    }
}

/// A word in the chart generators.
pub type GenWord = Vec<GenLetter>;

pub fn invert_gen_word(w: &[GenLetter]) -> GenWord {
    w.iter().rev().map(|l| l.inv()).collect()
}

pub fn reduce_gen_word(w: &[GenLetter]) -> GenWord {
    let mut out: GenWord = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// An eliminated letter and the word (in pattern letters) solving its
/// polygon relation for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dependent {
    pub polygon: usize,
    pub letter: usize,
    pub solving_word: Word,
}

/// Assignment of a group element to each generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuliPoint {
    pub values: Vec<GroupElement>,
}

/// Left-trivialized tangent vector: the block `s` (length `dim 𝔤`) holds
/// `ξ_s` with tangent `g_s·ξ_s`.
pub type TangentVector = DVector<f64>;

/// A map `V → 𝔤`, flattened vertex by vertex.
pub type VertexVector = DVector<f64>;

#[derive(Clone, Debug)]
pub struct ModuliChart {
    pattern: GluingPattern,
    model: LieGroupModel,
    info: SurfaceInfo,
    generators: Vec<usize>,
    dependents: Vec<Dependent>,
    expansion: Vec<GenWord>,
    boundary_words: Vec<GenWord>,
    gen_ends: Vec<(usize, usize)>,
}

fn solve_polygon_for(poly: &[SignedLetter], pos: usize) -> Word {
    // w_0 ⋯ w_{n−1} = e  ⇒  w_pos = (w_0 ⋯ w_{pos−1})⁻¹ (w_{pos+1} ⋯ w_{n−1})⁻¹
    let mut side: Word = poly[..pos].iter().rev().map(|l| l.inv()).collect();
    side.extend(poly[pos + 1..].iter().rev().map(|l| l.inv()));
    if poly[pos].inverse {
        side.iter().rev().map(|l| l.inv()).collect()
    } else {
        side
    }
}

/// Topological order of the polygons with a chosen letter, each after the
/// polygons whose eliminated letters it uses; `None` on a cycle.
fn elimination_order(
    polys: &[Word],
    chosen: &[Option<usize>],
    eliminated: &[Option<usize>],
    rep: &dyn Fn(usize) -> usize,
) -> Option<Vec<usize>> {
    let n = polys.len();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pi, poly) in polys.iter().enumerate() {
        let Some(own) = chosen[pi] else { continue };
        for (i, l) in poly.iter().enumerate() {
            if i == own {
                continue;
            }
            if let Some(q) = eliminated[rep(l.letter)] {
                if q != pi && !deps[pi].contains(&q) {
                    deps[pi].push(q);
                }
            }
        }
    }
    fn visit(p: usize, deps: &[Vec<usize>], state: &mut [u8], order: &mut Vec<usize>) -> bool {
        match state[p] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        state[p] = 1;
        for &q in &deps[p] {
            if !visit(q, deps, state, order) {
                return false;
            }
        }
        state[p] = 2;
        order.push(p);
        true
    }
    let mut order = Vec::with_capacity(n);
    let mut state = vec![0u8; n];
    for p in (0..n).filter(|&p| chosen[p].is_some()) {
        if !visit(p, &deps, &mut state, &mut order) {
            return None;
        }
    }
    Some(order)
}

/// Build a chart. `hint[p]`, when given, names the letter eliminated from
/// polygon `p`; otherwise the last letter of the polygon that occurs there
/// once, is not already eliminated and closes no dependency cycle is used.
pub fn build_chart(pattern: &GluingPattern, model: &LieGroupModel, hint: Option<&[Option<&str>]>) -> Result<ModuliChart> {
    let info = analyze(pattern);
    if !info.a1 {
        return Err(Error::InvalidPattern("a component of the surface has empty boundary".into()));
    }
    let polys = pattern.polygons();
    if let Some(h) = hint {
        if h.len() != polys.len() {
            return Err(Error::DimensionMismatch { expected: polys.len(), found: h.len() });
        }
    }
    let rep = |x: usize| pattern.representative(x);
    let mut eliminated: Vec<Option<usize>> = vec![None; pattern.num_letters()];
    let mut chosen: Vec<Option<usize>> = vec![None; polys.len()];
    for (pi, poly) in polys.iter().enumerate() {
        let count = |x: usize| poly.iter().filter(|l| rep(l.letter) == rep(x)).count();
        let requested = hint.and_then(|h| h[pi]);
        let pos = match requested {
            Some(name) => {
                let id = pattern.letter_id(name).ok_or_else(|| Error::UnknownLetter(name.into()))?;
                let pos = poly
                    .iter()
                    .position(|l| l.letter == id)
                    .ok_or_else(|| Error::Elimination(format!("`{name}` does not occur in polygon {pi}")))?;
                if count(id) != 1 {
                    return Err(Error::Elimination(format!("`{name}` occurs twice in polygon {pi}")));
                }
                if eliminated[rep(id)].is_some() {
                    return Err(Error::Elimination(format!("`{name}` is eliminated twice")));
                }
                pos
            }
            // The last eligible letter whose elimination keeps the choices
            // made so far acyclic.
            None => (0..poly.len())
                .rev()
                .filter(|&i| count(poly[i].letter) == 1 && eliminated[rep(poly[i].letter)].is_none())
                .find(|&i| {
                    let mut trial = eliminated.clone();
                    trial[rep(poly[i].letter)] = Some(pi);
                    let mut c = chosen.clone();
                    c[pi] = Some(i);
                    elimination_order(polys, &c, &trial, &rep).is_some()
                })
                .ok_or_else(|| Error::Elimination(format!("polygon {pi} has no eliminable letter")))?,
        };
        eliminated[rep(poly[pos].letter)] = Some(pi);
        chosen[pi] = Some(pos);
    }
    let order = elimination_order(polys, &chosen, &eliminated, &rep)
        .ok_or_else(|| Error::Elimination("cyclic dependency between eliminated letters".into()))?;
    let chosen: Vec<usize> = chosen.into_iter().map(|c| c.expect("every polygon has a choice")).collect();
    let generators: Vec<usize> = (0..pattern.num_letters())
        .filter(|&x| rep(x) == x && eliminated[x].is_none())
        .collect();
    let mut expansion: Vec<Option<GenWord>> = vec![None; pattern.num_letters()];
    for (k, &x) in generators.iter().enumerate() {
        expansion[x] = Some(vec![GenLetter { gen: k, inverse: false }]);
    }
    let mut dependents = Vec::with_capacity(polys.len());
    for &pi in &order {
        let poly = &polys[pi];
        let pos = chosen[pi];
        let solving_word = solve_polygon_for(poly, pos);
        let mut w = GenWord::new();
        for l in &solving_word {
            let e = expansion[rep(l.letter)].as_ref().expect("dependency order");
            if l.inverse {
                w.extend(invert_gen_word(e));
            } else {
                w.extend_from_slice(e);
            }
        }
        expansion[rep(poly[pos].letter)] = Some(reduce_gen_word(&w));
        dependents.push(Dependent { polygon: pi, letter: poly[pos].letter, solving_word });
    }
    let expansion: Vec<GenWord> = (0..pattern.num_letters())
        .map(|x| expansion[rep(x)].clone().expect("every class is expanded"))
        .collect();
    let boundary_words = info
        .boundary_edges
        .iter()
        .map(|e| {
            let w = &expansion[e.side.letter];
            if e.side.inverse {
                invert_gen_word(w)
            } else {
                w.clone()
            }
        })
        .collect();
    let gen_ends = generators.iter().map(|&x| info.letter_ends[x]).collect();
    let chart = ModuliChart {
        pattern: pattern.clone(),
        model: model.clone(),
        info,
        generators,
        dependents,
        expansion,
        boundary_words,
        gen_ends,
    };
    let expected = chart.info.num_vertices as i64 - chart.info.euler_characteristic;
    if chart.generators.len() as i64 != expected {
        return Err(Error::Elimination(format!(
            "{} generators, expected #V − χ = {expected}",
            chart.generators.len()
        )));
    }
    Ok(chart)
}

impl ModuliChart {
    pub fn pattern(&self) -> &GluingPattern {
        &self.pattern
    }

    pub fn model(&self) -> &LieGroupModel {
        &self.model
    }

    pub fn info(&self) -> &SurfaceInfo {
        &self.info
    }

    /// Generator letters, in chart order.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators.iter().map(|&x| self.pattern.name(x).into()).collect()
    }

    pub fn dependents(&self) -> &[Dependent] {
        &self.dependents
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.info.num_vertices
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.boundary_words.len()
    }

    /// `|S|·dim 𝔤`.
    pub fn tangent_dim(&self) -> usize {
        self.generators.len() * self.model.dim()
    }

    /// `|V|·dim 𝔤`.
    pub fn vertex_dim(&self) -> usize {
        self.info.num_vertices * self.model.dim()
    }

    pub fn boundary_words(&self) -> &[GenWord] {
        &self.boundary_words
    }

    /// Source and target vertex of each boundary edge.
    pub fn boundary_ends(&self) -> Vec<(usize, usize)> {
        self.info.boundary_edges.iter().map(|e| (e.source, e.target)).collect()
    }

    /// Source and target vertex of each generator.
    pub fn generator_ends(&self) -> &[(usize, usize)] {
        &self.gen_ends
    }

    /// Expansion of a pattern letter in generators.
    pub fn letter_expansion(&self, letter: usize) -> &GenWord {
        &self.expansion[letter]
    }

    /// Expand a word in pattern letters.
    pub fn expand(&self, w: &[SignedLetter]) -> GenWord {
        let mut out = GenWord::new();
        for l in w {
            let e = &self.expansion[l.letter];
            if l.inverse {
                out.extend(invert_gen_word(e));
            } else {
                out.extend_from_slice(e);
            }
        }
        reduce_gen_word(&out)
    }

    /// Parse and expand a word written in pattern letters.
    pub fn parse_word(&self, text: &str) -> Result<GenWord> {
        Ok(self.expand(&self.pattern.parse_word(text)?))
    }

    pub fn format_gen_word(&self, w: &[GenLetter]) -> String {
        let letters: Word = w.iter().map(|l| SignedLetter::new(self.generators[l.gen], l.inverse)).collect();
        self.pattern.format_word(&letters)
    }

    /// Source and target vertex of a generator word (`None` for the empty word).
    pub fn word_ends(&self, w: &[GenLetter]) -> Option<(usize, usize)> {
        let ends = |l: &GenLetter| {
            let (s, t) = self.gen_ends[l.gen];
            if l.inverse {
                (t, s)
            } else {
                (s, t)
            }
        };
        // The product x_1 ⋯ x_k traverses x_k first.
        let first = ends(w.last()?);
        let last = ends(w.first()?);
        Some((first.0, last.1))
    }

    pub fn identity_point(&self) -> ModuliPoint {
        ModuliPoint { values: vec![self.model.identity(); self.generators.len()] }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> ModuliPoint {
        ModuliPoint { values: (0..self.generators.len()).map(|_| self.model.random_element(rng)).collect() }
    }

    pub fn random_tangent<R: Rng + ?Sized>(&self, rng: &mut R) -> TangentVector {
        TangentVector::from_fn(self.tangent_dim(), |_, _| rng.gen_range(-1.0..=1.0))
    }

    pub fn random_vertex_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexVector {
        VertexVector::from_fn(self.vertex_dim(), |_, _| rng.gen_range(-1.0..=1.0))
    }

    /// Block `k` (length `dim 𝔤`) of a flattened vector.
    pub fn block(&self, v: &DVector<f64>, k: usize) -> AlgebraVector {
        let d = self.model.dim();
        v.rows(k * d, d).into_owned()
    }

    fn check_point(&self, p: &ModuliPoint) -> Result<()> {
        if p.values.len() != self.generators.len() {
            return Err(Error::DimensionMismatch { expected: self.generators.len(), found: p.values.len() });
        }
        Ok(())
    }

    /// Validate a point, retracting small drift onto the group.
    pub fn point(&self, values: Vec<GroupElement>) -> Result<ModuliPoint> {
        let p = ModuliPoint { values };
        self.check_point(&p)?;
        let values = p.values.into_iter().map(|g| self.model.element(g.matrix)).collect::<Result<_>>()?;
        Ok(ModuliPoint { values })
    }
}

/// Ordered product of the generator values along a word.
pub fn holonomy(chart: &ModuliChart, point: &ModuliPoint, w: &[GenLetter]) -> GroupElement {
    let model = chart.model();
    let mut acc = model.identity();
    for l in w {
        let g = &point.values[l.gen];
        acc = if l.inverse { acc.mul(&model.inverse(g)) } else { acc.mul(g) };
    }
    acc
}

/// Value and left-trivialized directional derivative of a word map.
pub fn word_jet(chart: &ModuliChart, point: &ModuliPoint, w: &[GenLetter], v: &TangentVector) -> (GroupElement, AlgebraVector) {
    let model = chart.model();
    let mut val = model.identity();
    let mut delta = model.zero();
    for l in w {
        let g = &point.values[l.gen];
        let vs = chart.block(v, l.gen);
        if l.inverse {
            // δ(P g⁻¹) = Ad_g δP − Ad_g v_s
            delta = model.adjoint(g, &(delta - vs));
            val = val.mul(&model.inverse(g));
        } else {
            delta = model.adjoint(&model.inverse(g), &delta) + vs;
            val = val.mul(g);
        }
    }
    (val, delta)
}

/// Value and left-trivialized Jacobian (`dim 𝔤 × |S|·dim 𝔤`) of a word map.
pub fn word_jacobian(chart: &ModuliChart, point: &ModuliPoint, w: &[GenLetter]) -> (GroupElement, DMatrix<f64>) {
    let model = chart.model();
    let d = model.dim();
    let mut val = model.identity();
    let mut jac = DMatrix::zeros(d, chart.tangent_dim());
    for l in w {
        let g = &point.values[l.gen];
        let gi = model.inverse(g);
        if l.inverse {
            let ad = model.ad_group_matrix(g);
            jac = &ad * jac;
            let mut blk = jac.view_mut((0, l.gen * d), (d, d));
            blk -= &ad;
            val = val.mul(&gi);
        } else {
            jac = model.ad_group_matrix(&gi) * jac;
            let mut blk = jac.view_mut((0, l.gen * d), (d, d));
            for i in 0..d {
                blk[(i, i)] += 1.0;
            }
            val = val.mul(g);
        }
    }
    (val, jac)
}

/// Boundary holonomies `Φ_e`, in boundary-edge order.
pub fn boundary_holonomy(chart: &ModuliChart, point: &ModuliPoint) -> Vec<GroupElement> {
    chart.boundary_words().iter().map(|w| holonomy(chart, point, w)).collect()
}

/// Stacked differential of `Φ` (`|E|·dim 𝔤 × |S|·dim 𝔤`) and the values.
pub fn boundary_jacobian(chart: &ModuliChart, point: &ModuliPoint) -> (Vec<GroupElement>, DMatrix<f64>) {
    let d = chart.model().dim();
    let mut vals = Vec::with_capacity(chart.num_boundary_edges());
    let mut stacked = DMatrix::zeros(chart.num_boundary_edges() * d, chart.tangent_dim());
    for (k, w) in chart.boundary_words().iter().enumerate() {
        let (v, j) = word_jacobian(chart, point, w);
        stacked.view_mut((k * d, 0), (d, chart.tangent_dim())).copy_from(&j);
        vals.push(v);
    }
    (vals, stacked)
}

/// Gauge action `g_s ↦ h_{t(s)} g_s h_{s(s)}⁻¹`.
pub fn action_apply(chart: &ModuliChart, h: &[GroupElement], point: &ModuliPoint) -> Result<ModuliPoint> {
    if h.len() != chart.num_vertices() {
        return Err(Error::DimensionMismatch { expected: chart.num_vertices(), found: h.len() });
    }
    let model = chart.model();
    let values = point
        .values
        .iter()
        .zip(chart.generator_ends())
        .map(|(g, &(s, t))| h[t].mul(g).mul(&model.inverse(&h[s])))
        .collect();
    Ok(ModuliPoint { values })
}

/// Generating vector `ξ_M = d/dt|₀ exp(−tξ)·κ` of the gauge action:
/// `δg_s = ξ_{s(s)} − Ad_{g_s⁻¹} ξ_{t(s)}`.
pub fn generating_vector(chart: &ModuliChart, xi: &VertexVector, point: &ModuliPoint) -> TangentVector {
    generating_matrix(chart, point) * xi
}

/// Matrix of `ξ ↦ ξ_M` (`|S|·dim 𝔤 × |V|·dim 𝔤`).
pub fn generating_matrix(chart: &ModuliChart, point: &ModuliPoint) -> DMatrix<f64> {
    let model = chart.model();
    let d = model.dim();
    let mut m = DMatrix::zeros(chart.tangent_dim(), chart.vertex_dim());
    for (k, (g, &(s, t))) in point.values.iter().zip(chart.generator_ends()).enumerate() {
        let ad = model.ad_group_matrix(&model.inverse(g));
        let mut bt = m.view_mut((k * d, t * d), (d, d));
        bt -= &ad;
        let mut bs = m.view_mut((k * d, s * d), (d, d));
        for i in 0..d {
            bs[(i, i)] += 1.0;
        }
    }
    m
}

/// Basis of the stabilizer algebra `(𝔤^V)_κ`, as columns.
pub fn stabilizer_basis(chart: &ModuliChart, point: &ModuliPoint) -> DMatrix<f64> {
    linalg::nullspace(&generating_matrix(chart, point))
}

/// An invertible substitution of generators by words, with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub forward: Vec<GenWord>,
    pub inverse: Vec<GenWord>,
}

impl Substitution {
    /// Parse from per-generator word texts in pattern letters.
    pub fn parse(chart: &ModuliChart, forward: &[&str], inverse: &[&str]) -> Result<Self> {
        let n = chart.num_generators();
        if forward.len() != n || inverse.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: forward.len().min(inverse.len()) });
        }
        let parse = |ws: &[&str]| ws.iter().map(|w| chart.parse_word(w)).collect::<Result<Vec<_>>>();
        Ok(Substitution { forward: parse(forward)?, inverse: parse(inverse)? })
    }

    pub fn apply(&self, chart: &ModuliChart, point: &ModuliPoint) -> ModuliPoint {
        ModuliPoint { values: self.forward.iter().map(|w| holonomy(chart, point, w)).collect() }
    }

    pub fn apply_inverse(&self, chart: &ModuliChart, point: &ModuliPoint) -> ModuliPoint {
        ModuliPoint { values: self.inverse.iter().map(|w| holonomy(chart, point, w)).collect() }
    }
}

/// Compose a generator word with a substitution.
pub fn substitute_word(w: &[GenLetter], images: &[GenWord]) -> GenWord {
    let mut out = GenWord::new();
    for l in w {
        if l.inverse {
            out.extend(invert_gen_word(&images[l.gen]));
        } else {
            out.extend_from_slice(&images[l.gen]);
        }
    }
    reduce_gen_word(&out)
}

/// Largest deviation of `inverse ∘ forward` and `forward ∘ inverse` from the
/// identity over random points.
pub fn round_trip_defect<R: Rng + ?Sized>(chart: &ModuliChart, sub: &Substitution, rng: &mut R, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = chart.random_point(rng);
        let there = sub.apply_inverse(chart, &sub.apply(chart, &p));
        let back = sub.apply(chart, &sub.apply_inverse(chart, &p));
        for (k, g) in p.values.iter().enumerate() {
            worst = worst.max(g.distance(&there.values[k])).max(g.distance(&back.values[k]));
        }
    }
    worst
}

/// Chart whose letter expansions are composed with a substitution, so that
/// holonomies at `κ` equal the original holonomies at `forward(κ)`.
pub fn mcg_substitute<R: Rng + ?Sized>(chart: &ModuliChart, sub: &Substitution, rng: &mut R) -> Result<ModuliChart> {
    if sub.forward.len() != chart.num_generators() || sub.inverse.len() != chart.num_generators() {
        return Err(Error::DimensionMismatch { expected: chart.num_generators(), found: sub.forward.len() });
    }
    let defect = round_trip_defect(chart, sub, rng, 5);
    if defect > 1e-10 {
        return Err(Error::NotInvertible { defect });
    }
    let mut out = chart.clone();
    out.expansion = chart.expansion.iter().map(|w| substitute_word(w, &sub.forward)).collect();
    out.boundary_words = chart.boundary_words.iter().map(|w| substitute_word(w, &sub.forward)).collect();
    Ok(out)
}

/// A map between charts: each generator of the target chart as a word in the
/// generators of the source chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMap {
    pub images: Vec<GenWord>,
}

impl GeneratorMap {
    /// Map sending each target generator to the given word in source
    /// pattern letters.
    pub fn from_letter_words(source: &ModuliChart, words: &[Word]) -> Self {
        GeneratorMap { images: words.iter().map(|w| source.expand(w)).collect() }
    }

    /// Identify letters by name: every generator of `target` is looked up in
    /// `source` by its letter name, or in `extra` when given there.
    pub fn by_names(source: &ModuliChart, target: &ModuliChart, extra: &[(usize, Word)]) -> Result<Self> {
        let mut words = Vec::with_capacity(target.num_generators());
        for &x in target.generators() {
            if let Some((_, w)) = extra.iter().find(|(y, _)| *y == x) {
                words.push(w.clone());
                continue;
            }
            let name = target.pattern().name(x);
            let id = source.pattern().letter_id(name).ok_or_else(|| Error::UnknownLetter(name.into()))?;
            words.push(alloc::vec![SignedLetter::new(id, false)]);
        }
        Ok(Self::from_letter_words(source, &words))
    }

    pub fn apply(&self, source: &ModuliChart, point: &ModuliPoint) -> ModuliPoint {
        ModuliPoint { values: self.images.iter().map(|w| holonomy(source, point, w)).collect() }
    }

    /// Jacobian of the map (`|S_target|·dim × |S_source|·dim`).
    pub fn jacobian(&self, source: &ModuliChart, point: &ModuliPoint) -> DMatrix<f64> {
        let d = source.model().dim();
        let mut j = DMatrix::zeros(self.images.len() * d, source.tangent_dim());
        for (k, w) in self.images.iter().enumerate() {
            let (_, jw) = word_jacobian(source, point, w);
            j.view_mut((k * d, 0), (d, source.tangent_dim())).copy_from(&jw);
        }
        j
    }
}

/// Whether a pattern letter is free.
pub fn is_free(chart: &ModuliChart, letter: usize) -> bool {
    chart.pattern().gluing(letter) == Gluing::Free
}

/// Letters of a word reduced in the free groupoid of pattern letters after
/// expansion, for comparing boundary words up to free reduction.
pub fn reduced_letters(chart: &ModuliChart, w: &[SignedLetter]) -> Word {
    let letters: Word =
        chart.expand(w).iter().map(|l| SignedLetter::new(chart.generators()[l.gen], l.inverse)).collect();
    reduce_word(&letters)
}
