//! One function per subcommand. Each fills a report with checks and data;
//! samples are drawn in order from the run's seeded generator.

use nalgebra::DVector;
use qhm_core::dirac::{
    pairing, perturbed_omega, quasi_poisson_bivector, range_kernel_props, sharp_defect, structure_fiber_a,
    trivializing_section, verify_dirac_morphism, verify_dirac_morphism_with,
};
use qhm_core::dynamics::{
    boundary_loop_flow, boundary_loop_function, curve_velocity, flow_integrate, goldman_bracket, goldman_flow,
    hamiltonian_vector, omega_invariance_defect, phi_drift, poisson_bracket_numeric, BracketData, Crossing,
    IntersectionData, LoopFunction, ScalarField,
};
use qhm_core::forms::{
    cartan_identity_defects, compare_patterns, kernel_report, random_triple, verify_d_omega, verify_moment,
};
use qhm_core::groupoid::{cylinder_groupoid_chart, dehn_twist, CylinderPoint, orbit_descent_check, orbit_momentum_defect, verify_multiplicative, OrbitPoint};
use qhm_core::lie::{InvariantFunction, LieGroupModel, ReTrace, ReTracePower};
use qhm_core::moduli::{boundary_holonomy, build_chart, GenWord, GeneratorMap, ModuliChart, ModuliPoint};
use qhm_core::surface::{analyze, print_pattern, GluingPattern};
use rand::Rng;
use serde_json::{json, Value};

use crate::load::{load_pattern, resolve_group, CliError, CliResult};
use crate::report::{group_elements, matrix, Report};
use crate::tolerances as tol;
use crate::{Common, FlowArgs, Run};

fn pattern_of(common: &Common) -> CliResult<GluingPattern> {
    let spec = common.pattern.as_deref().ok_or_else(|| CliError::Input("--pattern is required".into()))?;
    load_pattern(spec)
}

fn chart_of(common: &Common) -> CliResult<ModuliChart> {
    let pattern = pattern_of(common)?;
    let model = resolve_group(common.group.as_deref(), Some(&pattern))?;
    Ok(build_chart(&pattern, &model, None)?)
}

/// `re-tr` or `re-tr^K`.
pub fn parse_invariant(text: &str) -> CliResult<Box<dyn InvariantFunction>> {
    match text.trim() {
        "re-tr" => Ok(Box::new(ReTrace)),
        t => match t.strip_prefix("re-tr^").and_then(|k| k.parse::<u32>().ok()) {
            Some(k) if k >= 1 => Ok(Box::new(ReTracePower(k))),
            _ => Err(CliError::Input(format!("unknown invariant function `{text}` (use re-tr or re-tr^K)"))),
        },
    }
}

fn word(chart: &ModuliChart, text: &str) -> CliResult<GenWord> {
    Ok(chart.parse_word(text)?)
}

fn point_json(chart: &ModuliChart, p: &ModuliPoint) -> Value {
    json!({ "generators": chart.generator_names(), "values": group_elements(&p.values) })
}

fn model_json(m: &LieGroupModel) -> Value {
    json!({ "name": m.name(), "dim": m.dim(), "constraint": m.constraint().name(), "abelian": m.is_abelian() })
}

pub fn surface(common: &Common, report: &mut Report) -> CliResult<()> {
    let pattern = pattern_of(common)?;
    let info = analyze(&pattern);
    let edges: Vec<Value> = info
        .boundary_edges
        .iter()
        .map(|e| {
            json!({
                "letter": pattern.format_word(&[e.side]),
                "source": e.source,
                "target": e.target,
                "polygon": e.polygon,
                "position": e.position,
            })
        })
        .collect();
    report.put("pattern", json!(print_pattern(&pattern)));
    report.put("euler_characteristic", json!(info.euler_characteristic));
    report.put("num_vertices", json!(info.num_vertices));
    report.put("num_polygons", json!(info.num_polygons));
    report.put("num_edge_classes", json!(info.num_edge_classes));
    report.put("num_boundary_components", json!(info.num_boundary_components));
    report.put("num_components", json!(info.num_components));
    report.put("boundary_edges", Value::Array(edges));
    report.put("interior_vertices", json!(info.interior_vertices()));
    report.put("a1", json!(info.a1));
    report.put("a2", json!(info.a2));
    report.put("a3", json!(info.a3));
    // The chart needs (A1); without it there is nothing more to say.
    if info.a1 {
        let model = resolve_group(common.group.as_deref(), Some(&pattern))?;
        let chart = build_chart(&pattern, &model, None)?;
        report.put("group", model_json(&model));
        report.put("generators", json!(chart.generator_names()));
        report.put(
            "boundary_words",
            json!(chart.boundary_words().iter().map(|w| chart.format_gen_word(w)).collect::<Vec<_>>()),
        );
        report.put("tangent_dim", json!(chart.tangent_dim()));
    }
    Ok(())
}

pub fn verify(common: &Common, compare: Option<&str>, maps: &[String], run: &mut Run, report: &mut Report) -> CliResult<()> {
    let chart = chart_of(common)?;
    let model = chart.model();
    let a3 = chart.info().a3;
    report.put("group", model_json(model));
    report.put("generators", json!(chart.generator_names()));
    report.put("a3", json!(a3));

    let d_omega_tol =
        run.tol.get("d_omega", if model.is_abelian() { tol::D_OMEGA_ABELIAN } else { tol::D_OMEGA });
    let (mut d_omega, mut moment, mut cartan) = (0.0f64, 0.0f64, 0.0f64);
    let (mut min_sigma, mut kernel_angle) = (f64::INFINITY, 0.0f64);
    let mut rank_ok = true;
    for k in 0..run.samples {
        let p = chart.random_point(&mut run.rng);
        let xs = random_triple(&chart, &mut run.rng);
        d_omega = d_omega.max(verify_d_omega(&chart, &p, [&xs[0], &xs[1], &xs[2]], run.fd_step)?);
        let xi = chart.random_vertex_vector(&mut run.rng);
        moment = moment.max(verify_moment(&chart, &p, &xi, &xs[0])?);
        let (g1, g2) = (model.random_element(&mut run.rng), model.random_element(&mut run.rng));
        let pairs: Vec<DVector<f64>> =
            (0..3).map(|_| DVector::from_fn(2 * model.dim(), |_, _| run.rng.gen_range(-1.0..=1.0))).collect();
        let (inv, mult) = cartan_identity_defects(model, &g1, &g2, [&pairs[0], &pairs[1], &pairs[2]], run.fd_step);
        cartan = cartan.max(inv).max(mult);
        let kr = kernel_report(&chart, &p)?;
        if a3 {
            min_sigma = min_sigma.min(kr.min_degeneracy_sigma);
            kernel_angle = kernel_angle.max(kr.kernel_angle.unwrap_or(f64::NAN));
            rank_ok &= kr.rank_identity_holds();
        }
        if k == 0 {
            report.put("point", point_json(&chart, &p));
            report.put("omega_matrix", matrix(&kr.omega_matrix));
            report.put("rank_dphi", json!(kr.rank_dphi));
            report.put("stabilizer_dim", json!(kr.stabilizer_dim));
            report.put("vertex_dim", json!(kr.vertex_dim));
            report.put("kernel_dim", json!(kr.kernel_basis.ncols()));
        }
    }
    report.at_most("d_omega", d_omega, d_omega_tol);
    report.at_most("moment", moment, run.tol.get("moment", tol::MOMENT));
    report.at_most("cartan", cartan, run.tol.get("cartan", tol::CARTAN));
    if a3 {
        report.at_least("min_degeneracy", min_sigma, run.tol.get("min_degeneracy", tol::MIN_DEGENERACY));
        report.at_most("kernel_angle", kernel_angle, run.tol.get("kernel_angle", tol::KERNEL_ANGLE));
        report.flag("rank_identity", rank_ok);
    }
    let id = kernel_report(&chart, &chart.identity_point())?;
    report.put("rank_dphi_at_identity", json!(id.rank_dphi));

    if let Some(spec) = compare {
        let other = load_pattern(spec)?;
        let target = build_chart(&other, model, None)?;
        let mut extra = Vec::with_capacity(maps.len());
        for m in maps {
            let (letter, w) =
                m.split_once('=').ok_or_else(|| CliError::Input(format!("--map `{m}` is not LETTER=WORD")))?;
            let id = other
                .letter_id(letter.trim())
                .ok_or_else(|| CliError::Input(format!("--map: `{letter}` is not a letter of the compared pattern")))?;
            extra.push((id, chart.pattern().parse_word(w)?));
        }
        let map = GeneratorMap::by_names(&chart, &target, &extra)?;
        // The inverse exists by names only when no letter was forgotten.
        let back = GeneratorMap::by_names(&target, &chart, &[]).ok();
        let dev = compare_patterns(&chart, &target, &map, back.as_ref(), run.samples, &mut run.rng)?;
        report.put("compare_pattern", json!(print_pattern(&other)));
        report.put("compare_invertible", json!(back.is_some()));
        report.at_most("pattern_compare", dev, run.tol.get("pattern_compare", tol::PATTERN_COMPARE));
    }
    Ok(())
}

fn split_list(text: &str) -> Vec<&str> {
    if text.trim().is_empty() {
        Vec::new()
    } else {
        text.split(',').map(str::trim).collect()
    }
}

pub fn flow(common: &Common, args: &FlowArgs, run: &mut Run, report: &mut Report) -> CliResult<()> {
    let chart = chart_of(common)?;
    let phi = parse_invariant(&args.phi)?;
    if !args.time.is_finite() {
        return Err(CliError::Input("--time must be finite".into()));
    }
    if args.records == 0 {
        return Err(CliError::Input("--records must be at least 1".into()));
    }
    report.put("group", model_json(chart.model()));

    enum Kind {
        Boundary(usize),
        Goldman(Vec<IntersectionData>),
    }
    let (kind, f): (Kind, LoopFunction) = match (args.boundary_vertex, &args.loop_word) {
        (Some(v), _) => (Kind::Boundary(v), boundary_loop_function(&chart, v, phi.as_ref())?),
        (None, Some(lw)) => {
            let loop_word = word(&chart, lw)?;
            let target_name = args.target.as_deref().unwrap_or_default();
            let target = chart
                .generator_names()
                .iter()
                .position(|n| n == target_name)
                .ok_or_else(|| CliError::Input(format!("`{target_name}` is not a generator")))?;
            let segments = split_list(&args.segments).into_iter().map(|s| word(&chart, s)).collect::<CliResult<Vec<_>>>()?;
            // An empty list means one segment, the target itself.
            let segments = if segments.is_empty() { vec![word(&chart, target_name)?] } else { segments };
            let signs = split_list(&args.signs)
                .into_iter()
                .map(|s| s.parse::<i8>().map_err(|_| CliError::Input(format!("bad sign `{s}`"))))
                .collect::<CliResult<Vec<_>>>()?;
            let data = IntersectionData { target, segments, signs, loop_word: loop_word.clone() };
            data.validate(&chart)?;
            (Kind::Goldman(vec![data]), LoopFunction::new(&chart, loop_word, phi.as_ref())?)
        }
        (None, None) => return Err(CliError::Input("give --boundary-vertex or --loop".into())),
    };
    let flow_at = |p: &ModuliPoint, t: f64| -> qhm_core::Result<ModuliPoint> {
        match &kind {
            Kind::Boundary(v) => boundary_loop_flow(&chart, p, *v, phi.as_ref(), t),
            Kind::Goldman(data) => goldman_flow(&chart, p, data, phi.as_ref(), t),
        }
    };

    let mut derivative: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut start = None;
    for _ in 0..run.samples {
        let p = chart.random_point(&mut run.rng);
        let v = curve_velocity(&chart, &p, |t| flow_at(&p, t), run.fd_step)?;
        let x = hamiltonian_vector(&chart, &p, &f)?;
        derivative = derivative.max((v - x).amax());
        drift = drift.max(phi_drift(&chart, &p, &flow_at(&p, args.time)?));
        start.get_or_insert(p);
    }
    let start = start.expect("at least one sample");
    let end = flow_at(&start, args.time)?;
    let rk4 = flow_integrate(&chart, &start, &f, args.time, args.steps)?;
    let rk4_defect = end.values.iter().zip(&rk4.values).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);

    let mut series = Vec::with_capacity(args.records + 1);
    let mut invariance: f64 = 0.0;
    for k in 0..=args.records {
        let t = args.time * k as f64 / args.records as f64;
        let q = flow_at(&start, t)?;
        let inv = omega_invariance_defect(&chart, &start, |p| flow_at(p, t), run.fd_step)?;
        invariance = invariance.max(inv);
        series.push(json!({
            "t": t,
            "point": group_elements(&q.values),
            "boundary_holonomy": group_elements(&boundary_holonomy(&chart, &q)),
            "f": f.value(&chart, &q)?,
            "omega_invariance": inv,
        }));
    }
    report.put("generators", json!(chart.generator_names()));
    report.put("start", group_elements(&start.values));
    report.put("end", group_elements(&end.values));
    report.put("rk4_end", group_elements(&rk4.values));
    report.put("time_series", Value::Array(series));
    report.at_most("flow_derivative", derivative, run.tol.get("flow_derivative", tol::FLOW_DERIVATIVE));
    report.at_most("rk4_endpoint", rk4_defect, run.tol.get("rk4_endpoint", tol::RK4_ENDPOINT));
    report.at_most("phi_drift", drift, run.tol.get("phi_drift", tol::PHI_DRIFT));
    // FD Jacobians of the flow map: same scale as dω.
    report.at_most("omega_invariance", invariance, run.tol.get("omega_invariance", tol::D_OMEGA));
    Ok(())
}

fn parse_crossing(chart: &ModuliChart, text: &str) -> CliResult<Crossing> {
    let mut parts = text.splitn(3, ':');
    let sign = parts
        .next()
        .and_then(|s| s.trim().parse::<i8>().ok())
        .filter(|s| *s == 1 || *s == -1)
        .ok_or_else(|| CliError::Input(format!("crossing `{text}` needs a sign of +1 or -1")))?;
    let alpha_conjugator = word(chart, parts.next().unwrap_or(""))?;
    let beta_conjugator = word(chart, parts.next().unwrap_or(""))?;
    Ok(Crossing { sign, alpha_conjugator, beta_conjugator })
}

#[allow(clippy::too_many_arguments)]
pub fn bracket(
    common: &Common,
    alpha: &str,
    beta: &str,
    crossings: &[String],
    phi: &str,
    psi: &str,
    run: &mut Run,
    report: &mut Report,
) -> CliResult<()> {
    let chart = chart_of(common)?;
    let (phi, psi) = (parse_invariant(phi)?, parse_invariant(psi)?);
    let data = BracketData {
        alpha_loop: word(&chart, alpha)?,
        beta_loop: word(&chart, beta)?,
        crossings: crossings.iter().map(|c| parse_crossing(&chart, c)).collect::<CliResult<Vec<_>>>()?,
    };
    let f = LoopFunction::new(&chart, data.alpha_loop.clone(), phi.as_ref())?;
    let g = LoopFunction::new(&chart, data.beta_loop.clone(), psi.as_ref())?;
    let mut worst: f64 = 0.0;
    let mut values = Vec::with_capacity(run.samples);
    for _ in 0..run.samples {
        let p = chart.random_point(&mut run.rng);
        let formula = goldman_bracket(&chart, &p, &data, phi.as_ref(), psi.as_ref())?;
        let numeric = poisson_bracket_numeric(&chart, &p, &f, &g)?;
        worst = worst.max((formula - numeric).abs());
        values.push(json!({ "goldman": formula, "numeric": numeric }));
    }
    report.put("group", model_json(chart.model()));
    report.put("values", Value::Array(values));
    report.at_most("bracket", worst, run.tol.get("bracket", tol::BRACKET));
    Ok(())
}

pub fn groupoid(common: &Common, orbit_vertices: usize, run: &mut Run, report: &mut Report) -> CliResult<()> {
    let model = resolve_group(common.group.as_deref(), None)?;
    let rep = verify_multiplicative(&model, run.samples, run.fd_step, &mut run.rng)?;
    report.put("group", model_json(&model));
    let d_omega_tol = run.tol.get("d_omega", if model.is_abelian() { tol::D_OMEGA_ABELIAN } else { tol::D_OMEGA });
    report.at_most("multiplicativity", rep.multiplicativity, run.tol.get("multiplicative", tol::MULTIPLICATIVE));
    report.at_most("d_omega", rep.d_omega, d_omega_tol);
    report.at_least("min_degeneracy", rep.min_nondegeneracy_sigma, run.tol.get("min_degeneracy", tol::MIN_DEGENERACY));
    report.at_most("axioms", rep.axioms, run.tol.get("closed_form", tol::CLOSED_FORM));
    report.at_most("dehn_phi", rep.dehn_phi, run.tol.get("dehn_phi", tol::DEHN_PHI));
    let mut source_fixed = true;
    for _ in 0..run.samples {
        let p = CylinderPoint::random(&model, &mut run.rng);
        source_fixed &= dehn_twist(&p).a == p.a;
    }
    report.flag("dehn_source_exact", source_fixed);
    report.at_most("dehn_omega", rep.dehn_omega, run.tol.get("dehn_omega", tol::DEHN_OMEGA));
    report.at_most("closed_form", rep.closed_form, run.tol.get("closed_form", tol::CLOSED_FORM));

    let d = model.dim();
    let mut momentum: f64 = 0.0;
    for _ in 0..run.samples {
        let point = OrbitPoint::new(vec![model.random_element(&mut run.rng)]);
        let xi = model.random_algebra(&mut run.rng, 1.0);
        let zeta = model.random_algebra(&mut run.rng, 1.0);
        momentum = momentum.max(orbit_momentum_defect(&model, &point, &xi, &zeta)?);
    }
    report.at_most("orbit_momentum_n1", momentum, run.tol.get("orbit_momentum", tol::ORBIT_MOMENTUM));
    let mut fiber_dims = Vec::new();
    for n in 1..=orbit_vertices {
        let g = cylinder_groupoid_chart(&model, n)?;
        let (mut defect, mut residual): (f64, f64) = (0.0, 0.0);
        let mut dim = 0;
        for _ in 0..run.samples {
            let r = orbit_descent_check(&g, &g.chart.random_point(&mut run.rng))?;
            defect = defect.max(r.defect);
            residual = residual.max(r.orbit_residual);
            dim = r.fiber_dim;
        }
        fiber_dims.push(json!({ "n": n, "fiber_dim": dim, "expected": n * d }));
        report.flag(&format!("orbit_fiber_dim_n{n}"), dim == n * d);
        report.at_most(&format!("orbit_residual_n{n}"), residual, run.tol.get("orbit_descent", tol::ORBIT_DESCENT));
        report.at_most(&format!("orbit_descent_n{n}"), defect, run.tol.get("orbit_descent", tol::ORBIT_DESCENT));
    }
    report.put("orbit_fibers", Value::Array(fiber_dims));
    Ok(())
}

/// Loop functions of the generators that close up, for `φ` and `ψ`.
fn generator_loop_functions<'a>(
    chart: &ModuliChart,
    phi: &'a dyn InvariantFunction,
    psi: &'a dyn InvariantFunction,
) -> CliResult<Vec<LoopFunction<'a>>> {
    let mut out = Vec::new();
    for name in chart.generator_names() {
        let w = word(chart, &name)?;
        if chart.word_ends(&w).is_some_and(|(s, t)| s != t) {
            continue;
        }
        out.push(LoopFunction::new(chart, w.clone(), phi)?);
        out.push(LoopFunction::new(chart, w, psi)?);
    }
    Ok(out)
}

pub fn dirac(common: &Common, perturb: Option<f64>, run: &mut Run, report: &mut Report) -> CliResult<()> {
    let chart = chart_of(common)?;
    let model = chart.model();
    if let Some(size) = perturb {
        if !(size.is_finite() && size > 0.0) {
            return Err(CliError::Input("--perturb must be positive".into()));
        }
    }
    report.put("group", model_json(model));
    report.put("a3", json!(chart.info().a3));

    let (mut pair_law, mut isotropy) = (0.0f64, 0.0f64);
    let (mut failures, mut first_failure) = (0usize, None);
    let (mut existence, mut min_sigma) = (0.0f64, f64::INFINITY);
    let (mut ann_angle, mut flat_angle) = (0.0f64, 0.0f64);
    let mut dims_ok = true;
    let (mut bivector, mut sharp, mut antisym) = (0.0f64, 0.0f64, 0.0f64);
    let mut transversality_failures = 0usize;
    let (phi, psi) = (ReTrace, ReTracePower(2));
    let fs = generator_loop_functions(&chart, &phi, &psi)?;
    for _ in 0..run.samples {
        let g = model.random_element(&mut run.rng);
        let [x1, x, z1, z] = [0; 4].map(|_| model.random_algebra(&mut run.rng, 1.0));
        let s = trivializing_section(model, &g, &x1, &x);
        let t = trivializing_section(model, &g, &z1, &z);
        pair_law = pair_law.max((pairing(model, &s, &t) - (model.inner(&x, &z) - model.inner(&x1, &z1))).abs());

        let p = chart.random_point(&mut run.rng);
        isotropy = isotropy.max(structure_fiber_a(&chart, &boundary_holonomy(&chart, &p)).isotropy_defect(model));
        let rep = match perturb {
            Some(size) => verify_dirac_morphism_with(&chart, &p, &perturbed_omega(&chart, &p, size, &mut run.rng)?)?,
            None => verify_dirac_morphism(&chart, &p)?,
        };
        existence = existence.max(rep.existence_residual);
        min_sigma = min_sigma.min(rep.min_sigma);
        if let Some(why) = rep.failure {
            failures += 1;
            first_failure.get_or_insert(why);
        }
        let rk = range_kernel_props(&chart, &p)?;
        ann_angle = ann_angle.max(rk.ann_angle);
        flat_angle = flat_angle.max(rk.flat_angle);
        dims_ok &= rk.ann_range_dim == rk.stabilizer_covector_dim && rk.ker_dphi_dim == rk.ann_orbit_dim;

        match quasi_poisson_bivector(&chart, &p) {
            Ok(pi) => {
                antisym = antisym.max(pi.antisymmetry_defect());
                let dfs = fs.iter().map(|f| f.differential(&chart, &p)).collect::<qhm_core::Result<Vec<_>>>()?;
                for (f, df) in fs.iter().zip(&dfs) {
                    sharp = sharp.max(sharp_defect(&chart, &p, &pi, df)?);
                    for (g, dg) in fs.iter().zip(&dfs) {
                        let numeric = poisson_bracket_numeric(&chart, &p, f, g)?;
                        bivector = bivector.max((pi.eval(df, dg) + numeric).abs());
                    }
                }
            }
            Err(qhm_core::Error::Precondition(_)) => transversality_failures += 1,
            Err(e) => return Err(e.into()),
        }
    }
    report.at_most("pairing_law", pair_law, run.tol.get("pairing", tol::PAIRING));
    report.at_most("isotropy", isotropy, run.tol.get("isotropy", tol::ISOTROPY));
    report.info("morphism_existence_residual", existence);
    report.info("morphism_min_sigma", min_sigma);
    report.put("morphism_failure", json!(first_failure));
    report.at_most("morphism_failures", failures as f64, 0.0);
    if chart.info().a3 {
        report.flag("range_kernel_dims", dims_ok);
        report.at_most("range_kernel_ann_angle", ann_angle, run.tol.get("range_kernel", tol::RANGE_KERNEL));
        report.at_most("range_kernel_flat_angle", flat_angle, run.tol.get("range_kernel", tol::RANGE_KERNEL));
    }
    report.info("bivector_transversality_failures", transversality_failures as f64);
    if transversality_failures < run.samples {
        report.at_most("bivector_antisymmetry", antisym, run.tol.get("antisymmetry", tol::ANTISYMMETRY));
        report.at_most("bivector_sharp", sharp, run.tol.get("bivector", tol::BIVECTOR));
        report.at_most("bivector_bracket", bivector, run.tol.get("bivector", tol::BIVECTOR));
    }
    Ok(())
}
