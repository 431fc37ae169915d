//! One function per subcommand. Each returns the JSON result and the status;
//! findings that are negative but well-defined (a rejected certificate, a
//! failed threshold) are reported with a status, not as errors.

use std::path::Path;

use lipdyn_core::chaoslab::{heteroclinic_chain, horseshoe_verify, lambda_experiment, DiskSpec, ItineraryTable};
use lipdyn_core::contraction::observed_rate;
use lipdyn_core::conjugacy::{orbit_conjugation, solve_conjugacy, MAX_FLAGGED_FRACTION};
use lipdyn_core::grid::{GraphFn, Grid};
use lipdyn_core::hyperbolic::{certify_l_hyperbolic, find_fixed_point, invert_at, HyperbolicLinear, LHyperbolicCert};
use lipdyn_core::lip::{estimate_lip, lip_distance, lip_norm, sup_norm};
use lipdyn_core::manifolds::{compute_manifold, LocalSystem, Manifold, Side};
use lipdyn_core::onedim::{
    classify_fixed_point, delta_lyapunov, periodic_orbits, lyapunov_comparison, perturbed_fixed_point, perturbed_periodic_point,
    Classification, PermanenceCert, PermanencePath,
};
use lipdyn_core::transversal::{check_hypotheses, find_intersection, l_transversal_graphs, TransversalityProblem};
use lipdyn_core::{Ball, Error, LipEstimate, MapSpec, Point, Rect};
use serde_json::{json, Value};

use crate::cli::{
    BallArg, ChainArgs, Command, Common, ConjugacyArgs, DiskArg, HorseshoeArgs, LambdaArgs, LipArgs, LyapunovArgs,
    ManifoldArgs, OneDimArgs, PathArg, PermanenceArgs, RectArg, SaddleArgs, SideArg, SystemArgs, TransversalArgs,
};
use crate::config::{parse_map_config, read_source, System};
use crate::error::CliError;
use crate::report::{at_most, bounded, ConfigRef, Status};
use crate::table::{read_graph, write_graph, write_table};

pub struct Outcome {
    pub status: Status,
    pub result: Value,
}

impl Outcome {
    fn new(status: Status, result: Value) -> Self {
        Outcome { status, result }
    }
}

type Res = Result<Outcome, CliError>;

pub fn dispatch(cmd: &Command, c: &Common, configs: &mut Vec<ConfigRef>) -> Res {
    if !(c.margin >= 1.0) {
        return Err(CliError::usage("--margin must be at least 1"));
    }
    if !(c.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let mut cx = Ctx { c, configs };
    match cmd {
        Command::Lip(a) => lip(&mut cx, a),
        Command::Certify(a) => certify(&mut cx, a),
        Command::Fixpoint(a) => fixpoint(&mut cx, a),
        Command::Invert(a) => invert(&mut cx, &a.system, &a.point.0),
        Command::Manifold(a) => manifold(&mut cx, a),
        Command::Conjugacy(a) => conjugacy(&mut cx, a),
        Command::Transversal(a) => transversal(&mut cx, a),
        Command::Classify1d(a) => classify1d(&mut cx, &a.one),
        Command::Permanence(a) => permanence(&mut cx, a),
        Command::Lyapunov(a) => lyapunov(&mut cx, a),
        Command::Lambda(a) => lambda(&mut cx, a),
        Command::Horseshoe(a) => horseshoe(&mut cx, a),
        Command::Chain(a) => chain(&mut cx, a),
    }
}

struct Ctx<'a> {
    c: &'a Common,
    configs: &'a mut Vec<ConfigRef>,
}

impl Ctx<'_> {
    fn load(&mut self, role: &str, path: &Path) -> Result<System, CliError> {
        let src = read_source(path)?;
        self.configs.push(ConfigRef {
            role: role.into(),
            path: src.path.clone(),
            sha256: src.sha256.clone(),
        });
        Ok(parse_map_config(&src.text)?)
    }

    fn record_file(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        let src = read_source(path)?;
        self.configs.push(ConfigRef {
            role: role.into(),
            path: src.path,
            sha256: src.sha256,
        });
        Ok(())
    }
}

fn pt(p: &Point) -> Value {
    json!(p.coords())
}

fn ball_json(b: &Ball) -> Value {
    json!({ "center": pt(&b.center()), "radius": b.radius() })
}

fn to_ball(b: &BallArg) -> Result<Ball, CliError> {
    Ok(Ball::new(Point::new(&b.center)?, b.radius)?)
}

fn to_point(v: &[f64]) -> Result<Point, CliError> {
    Ok(Point::new(v)?)
}

fn estimate_json(e: &LipEstimate) -> Value {
    json!({
        "value": e.value,
        "is_lower_bound": e.is_lower_bound,
        "pair_count": e.pair_count,
        "refinement_depth": e.refinement_depth,
        "argmax": [pt(&e.argmax.0), pt(&e.argmax.1)],
    })
}

fn region_or_domain(region: &Option<BallArg>, m: &MapSpec) -> Result<Ball, CliError> {
    match region {
        Some(b) => to_ball(b),
        None => m.domain().ok_or_else(|| CliError::usage("the map has no domain; pass --region")),
    }
}

fn lip(cx: &mut Ctx, a: &LipArgs) -> Res {
    let sys = cx.load("map", &a.map)?;
    let region = region_or_domain(&a.region, &sys.map)?;
    let b = cx.c.budget();
    let est = estimate_lip(&sys.map, &region, &b)?;
    let mut result = json!({
        "region": ball_json(&region),
        "lip": estimate_json(&est),
        "sup_norm": sup_norm(&sys.map, &region, &b)?,
        "lip_norm": lip_norm(&sys.map, &region, &b)?,
    });
    if let Some(path) = &a.against {
        let other = cx.load("against", path)?;
        result["lip_distance"] = json!(lip_distance(&sys.map, &other.map, &region, &b)?);
    }
    let mut status = Status::Pass;
    if let Some(bound) = a.below {
        result["check"] = bounded(est.value, cx.c.margin, bound);
        status = Status::from_verdict(lipdyn_core::hyperbolic::Verdict::below(est.value * cx.c.margin, bound));
    }
    Ok(Outcome::new(status, result))
}

struct Certified<'s> {
    linear: HyperbolicLinear,
    phi: &'s MapSpec,
    cert: LHyperbolicCert,
}

fn certify_system<'s>(cx: &Ctx, sys: &'s System, region: &Option<BallArg>) -> Result<Certified<'s>, CliError> {
    let (linear, phi) = sys.hyperbolic()?;
    let region = region_or_domain(region, phi)?;
    let cert = certify_l_hyperbolic(&linear, phi, &region, &cx.c.budget(), cx.c.margin)?;
    Ok(Certified { linear, phi, cert })
}

fn cert_json(c: &LHyperbolicCert) -> Value {
    json!({
        "region": ball_json(&c.region),
        "tau": c.linear.tau,
        "mininorm": c.linear.m,
        "splitting_condition": c.linear.splitting.condition(),
        "threshold": c.threshold,
        "lip_phi": estimate_json(&c.lip_phi),
        "check": bounded(c.lip_phi.value, c.margin, c.threshold),
        "verdict": c.verdict.as_str(),
    })
}

fn certify(cx: &mut Ctx, a: &SystemArgs) -> Res {
    let sys = cx.load("system", &a.map)?;
    match certify_system(cx, &sys, &a.region) {
        Ok(c) => Ok(Outcome::new(Status::from_verdict(c.cert.verdict), cert_json(&c.cert))),
        Err(CliError::Core(Error::NotHyperbolic { tau })) => Ok(Outcome::new(
            Status::Fail,
            json!({ "verdict": "rejected", "reason": "NotHyperbolic", "tau": tau }),
        )),
        Err(e) => Err(e),
    }
}

fn fixpoint(cx: &mut Ctx, a: &SystemArgs) -> Res {
    let sys = cx.load("system", &a.map)?;
    let c = certify_system(cx, &sys, &a.region)?;
    let mut result = json!({ "certificate": cert_json(&c.cert) });
    let status = Status::from_verdict(c.cert.verdict);
    if status == Status::Fail {
        return Ok(Outcome::new(status, result));
    }
    let lip = c.cert.lip_phi.value * cx.c.margin;
    let fp = find_fixed_point(&c.linear, c.phi, lip, &c.cert.region, cx.c.tol)?;
    result["fixed_point"] = json!({
        "point": pt(&fp.point),
        "residual": fp.residual,
        "iterations": fp.iteration.iterations,
        "steps": fp.iteration.steps,
        "rate": at_most(fp.observed_rate, fp.rate_bound),
    });
    Ok(Outcome::new(status, result))
}

fn invert(cx: &mut Ctx, a: &SystemArgs, z: &[f64]) -> Res {
    let sys = cx.load("system", &a.map)?;
    let c = certify_system(cx, &sys, &a.region)?;
    let lip = c.cert.lip_phi.value * cx.c.margin;
    let z = to_point(z)?;
    let inv = invert_at(&c.linear.a, c.phi, lip, &z, &c.cert.region, cx.c.tol)?;
    let rate = lip * c.linear.a.inverse()?.norm();
    Ok(Outcome::new(
        Status::Pass,
        json!({
            "z": pt(&z),
            "point": pt(&inv.point),
            "residual": inv.residual,
            "iterations": inv.iterations,
            "steps": inv.steps,
            "clamped": inv.clamped,
            "rate_bound": at_most(rate, 1.0),
            "observed_rate": at_most(observed_rate(&inv.steps), rate),
        }),
    ))
}

/// The fixed point to work around: the flag, then the config, else the
/// contraction solver on the domain of φ.
fn saddle_point(cx: &Ctx, sys: &System, a: &SaddleArgs) -> Result<Point, CliError> {
    if let Some(p) = &a.fixed_point {
        return to_point(&p.0);
    }
    if let Some(p) = sys.fixed_point {
        return Ok(p);
    }
    let c = certify_system(cx, sys, &None)?;
    let lip = c.cert.lip_phi.value * cx.c.margin;
    Ok(find_fixed_point(&c.linear, c.phi, lip, &c.cert.region, cx.c.tol * 1e-3)?.point)
}

fn local_system<'s>(cx: &Ctx, sys: &'s System, a: &SaddleArgs) -> Result<LocalSystem<'s>, CliError> {
    let (linear, phi) = sys.hyperbolic()?;
    let p = saddle_point(cx, sys, a)?;
    Ok(LocalSystem::new(linear, phi, p, a.radius, &cx.c.budget(), cx.c.margin)?)
}

fn side(s: SideArg) -> Side {
    match s {
        SideArg::Stable => Side::Stable,
        SideArg::Unstable => Side::Unstable,
    }
}

fn manifold_of(cx: &Ctx, sys: &LocalSystem, s: Side, grid_n: usize) -> Result<Manifold, CliError> {
    let prob = sys.problem(s, &cx.c.budget(), cx.c.margin)?;
    Ok(compute_manifold(&prob, s, grid_n, cx.c.tol)?)
}

fn manifold_json(m: &Manifold) -> Value {
    json!({
        "side": m.side.as_str(),
        "nodes": m.graph.grid.nodes_per_axis(),
        "iterations": m.iterations,
        "trace": m.trace,
        "rate": at_most(m.observed_rate, m.rate_bound),
        "lip": bounded(m.lip, 1.0, 1.0),
        "invariance_defect": m.invariance_defect,
        "boundary_clamps": m.boundary_clamps,
    })
}

fn system_json(sys: &LocalSystem) -> Value {
    json!({
        "fixed_point": pt(&sys.p),
        "radius": sys.radius,
        "tau": sys.linear.tau,
        "lip_phi": sys.lip_phi,
    })
}

fn manifold(cx: &mut Ctx, a: &ManifoldArgs) -> Res {
    let sys = cx.load("system", &a.saddle.map)?;
    let local = local_system(cx, &sys, &a.saddle)?;
    let m = manifold_of(cx, &local, side(a.side), cx.c.grid_or(129))?;
    if let Some(path) = &a.csv {
        write_graph(path, &m.graph)?;
    }
    Ok(Outcome::new(
        Status::Pass,
        json!({ "system": system_json(&local), "manifold": manifold_json(&m) }),
    ))
}

fn conjugacy(cx: &mut Ctx, a: &ConjugacyArgs) -> Res {
    let sys = cx.load("system", &a.saddle.map)?;
    let local = local_system(cx, &sys, &a.saddle)?;
    let conj = solve_conjugacy(&local, cx.c.grid_or(65), cx.c.tol, a.pad)?;
    let orbit = orbit_conjugation(&local, &conj, a.starts, a.horizon, cx.c.seed)?;
    if let Some(path) = &a.csv {
        write_graph(path, &conj.psi.field)?;
    }
    let status = if conj.flagged_fraction <= MAX_FLAGGED_FRACTION {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok(Outcome::new(
        status,
        json!({
            "system": system_json(&local),
            "iterations": conj.iterations,
            "trace": conj.trace,
            "residual_trace": conj.residual_trace,
            "residual": conj.residual,
            "rate": at_most(conj.observed_rate, conj.rate_bound),
            "pad": conj.pad,
            "flagged_core": conj.flagged_core,
            "flagged_fraction": at_most(conj.flagged_fraction, MAX_FLAGGED_FRACTION),
            "sup_norm": conj.psi.sup_norm(),
            "orbit_check": {
                "starts": orbit.starts,
                "steps": orbit.steps,
                "max_error": orbit.max_error,
            },
        }),
    ))
}

fn transversal(cx: &mut Ctx, a: &TransversalArgs) -> Res {
    cx.record_file("w1", &a.w1)?;
    cx.record_file("w2", &a.w2)?;
    let w1 = read_graph(&a.w1)?;
    let w2 = read_graph(&a.w2)?;
    if let Some(split) = &a.split {
        let dims = [w1.in_dim() as f64, w2.in_dim() as f64];
        if split.0.as_slice() != dims {
            return Err(CliError::usage(format!("--split {:?} does not match the graphs ({dims:?})", split.0)));
        }
    }
    let (x, search) = match &a.point {
        Some(p) => (to_point(&p.0)?, Value::Null),
        None => {
            let p = TransversalityProblem {
                dim1: w1.in_dim(),
                dim2: w2.in_dim(),
                radius: a.r,
                theta_t: &w1,
                sigma_t: &w2,
                theta: None,
                sigma: None,
                c: a.c,
                spacing: Some(w1.grid.spacing()),
            };
            let b = cx.c.budget();
            let hyp = check_hypotheses(&p, &b)?;
            let hyp_json = json!({
                "closeness_theta": at_most(hyp.theta_distance, hyp.bound),
                "closeness_sigma": at_most(hyp.sigma_distance, hyp.bound),
                "lip_theta": at_most(hyp.lip_theta, a.c),
                "lip_sigma": at_most(hyp.lip_sigma, a.c),
                "lip_theta_t": hyp.lip_theta_t,
                "lip_sigma_t": hyp.lip_sigma_t,
                "containment_theta": at_most(hyp.theta_t_reach, 0.5 * a.r),
                "containment_sigma": at_most(hyp.sigma_t_reach, 0.5 * a.r),
                "pass": hyp.pass,
            });
            if !hyp.pass && !a.override_hypotheses {
                return Ok(Outcome::new(Status::Fail, json!({ "hypotheses": hyp_json })));
            }
            let cert = find_intersection(&p, cx.c.tol, &b, a.override_hypotheses)?;
            let search = json!({
                "hypotheses": hyp_json,
                "y1": pt(&cert.y1),
                "y2": pt(&cert.y2),
                "iterations": cert.iterations,
                "steps": cert.steps,
                "rate": cert.rate,
                "observed_rate": cert.observed_rate,
                "r0": cert.r0,
                "lip_theta_star": bounded(cert.lip_theta_star, 1.0, 1.0),
                "lip_sigma_star": bounded(cert.lip_sigma_star, 1.0, 1.0),
                "verdict": cert.verdict.as_str(),
                "overridden": cert.overridden,
            });
            (cert.y0, search)
        }
    };
    let on_set_tol = (10.0 * cx.c.tol).max(1e-12);
    let local_r = search.get("r0").and_then(Value::as_f64).unwrap_or(a.r);
    let g = l_transversal_graphs(&w1, &w2, &x, local_r, on_set_tol)?;
    Ok(Outcome::new(
        Status::from_verdict(g.verdict),
        json!({
            "point": pt(&x),
            "search": search,
            "local_radius": local_r,
            "lip_w1": bounded(g.lip1, 1.0, 1.0),
            "lip_w2": bounded(g.lip2, 1.0, 1.0),
            "verdict": g.verdict.as_str(),
        }),
    ))
}

fn one_dim_map(cx: &mut Ctx, role: &str, path: &Path) -> Result<MapSpec, CliError> {
    let sys = cx.load(role, path)?;
    if sys.map.dim() != 1 {
        return Err(CliError::usage("this subcommand needs a one-dimensional map"));
    }
    Ok(sys.map)
}

fn classify1d(cx: &mut Ctx, a: &OneDimArgs) -> Res {
    let f = one_dim_map(cx, "map", &a.map)?;
    let rep = classify_fixed_point(&f, a.point, a.delta, &cx.c.budget(), cx.c.margin, cx.c.tol)?;
    let status = match rep.classification {
        Classification::IndifferentOrUnknown => Status::Inconclusive,
        _ => Status::Pass,
    };
    Ok(Outcome::new(
        status,
        json!({
            "p": rep.p,
            "delta": rep.delta,
            "lip": estimate_json(&rep.lip),
            "reverse_lip": estimate_json(&rep.rev_lip),
            "sink_check": bounded(rep.lip.value, rep.margin, 1.0),
            "source_check": {
                "value": rep.rev_lip.value,
                "margin": rep.margin,
                "bound": 1.0,
                "holds": rep.rev_lip.value / rep.margin > 1.0,
            },
            "classification": rep.classification.as_str(),
        }),
    ))
}

fn permanence_json(c: &PermanenceCert) -> Value {
    json!({
        "p": c.p,
        "period": c.k,
        "delta": c.delta,
        "path": c.path.as_str(),
        "c": c.c,
        "gordura": {
            "c": c.gordura.c,
            "worst_ratio": at_most(c.gordura.worst_ratio, 1.0),
            "quotient_min": c.gordura.quotient_min,
            "quotient_max": c.gordura.quotient_max,
            "pass": c.gordura.pass,
        },
        "eps": c.eps,
        "thresholds": c.thresholds.iter().map(|t| json!({
            "inequality": t.inequality,
            "value": t.value,
            "bound": t.bound,
            "strict": t.strict,
            "holds": t.holds(),
        })).collect::<Vec<_>>(),
        "q": c.q,
        "residual": c.residual,
        "iterations": c.iteration.iterations,
        "classification": c.classification.as_str(),
        "orbit": c.orbit,
        "constant_product": bounded(c.constant_product, 1.0, 1.0),
        "periodic_sink": c.periodic_sink,
    })
}

fn permanence(cx: &mut Ctx, a: &PermanenceArgs) -> Res {
    let f = one_dim_map(cx, "map", &a.one.map)?;
    let g = one_dim_map(cx, "perturbed", &a.perturbed)?;
    let path = match a.path {
        PathArg::Differentiable => PermanencePath::Differentiable,
        PathArg::Lipschitz => PermanencePath::Lipschitz,
    };
    let (b, m, tol) = (cx.c.budget(), cx.c.margin, cx.c.tol);
    let (p, delta) = (a.one.point, a.one.delta);
    let p = if a.locate {
        periodic_orbits(&f, a.period.max(1), p - delta, p + delta, 200, 1e-15)?
            .into_iter()
            .flatten()
            .filter(|x| (x - p).abs() <= delta)
            .min_by(|x, y| (x - p).abs().total_cmp(&(y - p).abs()))
            .ok_or_else(|| CliError::usage(format!("no period-{} point within {delta} of {p}", a.period)))?
    } else {
        p
    };
    let res = if a.period <= 1 {
        perturbed_fixed_point(&f, &g, p, delta, path, &b, m, tol)
    } else {
        perturbed_periodic_point(&f, &g, p, a.period, delta, path, &b, m, tol)
    };
    match res {
        Ok(cert) => {
            if let Some(p) = &a.csv {
                let rows = cert.orbit.iter().enumerate().map(|(i, x)| vec![i as f64, *x]);
                write_table(p, &["index".into(), "q".into()], rows)?;
            }
            Ok(Outcome::new(Status::Pass, permanence_json(&cert)))
        }
        Err(Error::ThresholdExceeded { inequality, value, bound }) => Ok(Outcome::new(
            Status::Fail,
            json!({
                "failed": { "inequality": inequality, "value": value, "bound": bound, "holds": false },
            }),
        )),
        Err(Error::DegenerateC { c }) => Ok(Outcome::new(Status::Inconclusive, json!({ "degenerate_c": c }))),
        Err(e) => Err(e.into()),
    }
}

fn lyapunov(cx: &mut Ctx, a: &LyapunovArgs) -> Res {
    let f = one_dim_map(cx, "map", &a.map)?;
    let b = cx.c.budget();
    let rec = delta_lyapunov(&f, a.x1, a.delta, a.n, &b)?;
    if let Some(p) = &a.csv {
        let rows = (0..rec.points.len()).map(|i| vec![i as f64 + 1.0, rec.points[i], rec.constants[i], rec.partial_exponents[i]]);
        let header = ["step", "x", "constant", "partial_exponent"].map(String::from);
        write_table(p, &header, rows)?;
    }
    let mut result = json!({
        "x1": rec.x1,
        "delta": rec.delta,
        "n": rec.points.len(),
        "exponent": rec.exponent,
        "number": rec.number,
        "tail": rec.tail,
        "window_variance": rec.window_variance,
    });
    let mut status = Status::Pass;
    if let Some(y1) = a.compare {
        match lyapunov_comparison(&f, a.x1, y1, a.period, a.delta, a.n, &b, a.slack) {
            Ok(cmp) => {
                result["comparison"] = json!({
                    "y1": y1,
                    "period": a.period,
                    "delta": cmp.delta,
                    "delta_bar": cmp.delta_bar,
                    "halvings": cmp.halvings,
                    "h_x": cmp.h_x,
                    "h_y": cmp.h_y,
                    "shadow_distance": at_most(cmp.shadow_distance, cmp.delta / 4.0),
                    "check": at_most(cmp.h_x, cmp.h_y + a.slack),
                    "holds": cmp.holds,
                });
                if !cmp.holds {
                    status = Status::Fail;
                }
            }
            Err(Error::NotAsymptotic { distance }) => {
                result["comparison"] = json!({ "not_asymptotic": distance });
                status = Status::Inconclusive;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome::new(status, result))
}

fn affine_disk(local: &LocalSystem, s: Side, d: &DiskArg, radius: f64, nodes: usize) -> Result<DiskSpec, CliError> {
    let dom = match s {
        Side::Unstable => local.linear.dim_u(),
        Side::Stable => local.linear.dim_s(),
    };
    let rng = local.dim() - dom;
    let slope = d.slope;
    let grid = Grid::centered(dom, radius, nodes)?;
    let g = GraphFn::from_fn(grid, |t| Ok(Point::splat(rng, slope * t[0])))?;
    Ok(DiskSpec::new(local, s, to_point(&d.anchor)?, g)?)
}

fn lambda(cx: &mut Ctx, a: &LambdaArgs) -> Res {
    let sys = cx.load("system", &a.saddle.map)?;
    let local = local_system(cx, &sys, &a.saddle)?;
    let wu = manifold_of(cx, &local, Side::Unstable, cx.c.grid_or(257))?;
    let ws = manifold_of(cx, &local, Side::Stable, 65)?;
    let disk = affine_disk(&local, Side::Unstable, &a.disk, a.disk_radius, 65)?;
    let tol = cx.c.tol.min(1e-13);
    let exp = lambda_experiment(&local, &wu, Some(&ws), &disk, a.n_max, a.window, a.window_nodes, a.reference, tol)?;
    let ratio = a.ratio.unwrap_or(local.linear.tau + 2.0 * local.lip_phi);
    let onset = exp.decay_onset(ratio);
    if let Some(p) = &a.csv {
        let rows = exp.steps.iter().map(|s| vec![s.n as f64, s.c0, s.lip, s.distance]);
        write_table(p, &["n", "c0", "lip", "distance"].map(String::from), rows)?;
    }
    let worst = onset.map(|n0| exp.worst_ratio_from(n0));
    Ok(Outcome::new(
        if onset.is_some() { Status::Pass } else { Status::Fail },
        json!({
            "system": system_json(&local),
            "window": exp.window,
            "window_nodes": exp.window_nodes,
            "reference_steps": exp.reference_steps,
            "steps": exp.steps.iter().map(|s| json!({
                "n": s.n, "c0": s.c0, "lip": s.lip, "distance": s.distance,
            })).collect::<Vec<_>>(),
            "decay_onset": onset,
            "ratio": worst.map(|w| at_most(w, ratio)),
        }),
    ))
}

fn to_rect(r: &RectArg) -> Result<Rect, CliError> {
    Ok(Rect::new(to_point(&r.lo)?, to_point(&r.hi)?)?)
}

fn table_json(t: &ItineraryTable) -> Value {
    json!({
        "k_max": t.k_max,
        "realized_counts": (1..=t.k_max).map(|k| t.realized_count(k)).collect::<Vec<_>>(),
        "realized": t.realized,
        "undecided_words": t.undecided_words,
        "undecided_cells": t.undecided_cells,
        "fixed_points": t.fixed_points,
        "orbits": t.orbits,
        "divisor_sums": t.divisor_sums(),
        "prefix_closed": t.prefix_closed(),
        "suffix_closed": t.suffix_closed(),
        "divisor_relation_holds": t.divisor_relation_holds(),
    })
}

fn horseshoe(cx: &mut Ctx, a: &HorseshoeArgs) -> Res {
    let sys = cx.load("map", &a.map)?;
    let t = horseshoe_verify(&sys.map, &to_rect(&a.rect0)?, &to_rect(&a.rect1)?, a.k)?;
    let full = (1..=t.k_max).all(|k| t.realized_count(k) == 1usize << k);
    let status = if t.undecided_cells > 0 || !t.undecided_words.is_empty() {
        Status::Inconclusive
    } else if full && t.divisor_relation_holds() {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(Outcome::new(status, table_json(&t)))
}

fn chain(cx: &mut Ctx, a: &ChainArgs) -> Res {
    let sys = cx.load("system", &a.saddle.map)?;
    let local = local_system(cx, &sys, &a.saddle)?;
    let n = cx.c.grid_or(129);
    let wu = manifold_of(cx, &local, Side::Unstable, n)?;
    let ws = manifold_of(cx, &local, Side::Stable, n)?;
    let d_x = match &a.dx {
        Some(d) => affine_disk(&local, Side::Unstable, d, a.disk_radius, 65)?,
        None => DiskSpec::from_manifold(&wu),
    };
    let d_y = match &a.dy {
        Some(d) => affine_disk(&local, Side::Stable, d, a.disk_radius, 65)?,
        None => DiskSpec::from_manifold(&ws),
    };
    let rep = heteroclinic_chain(&local, &wu, &ws, &d_x, &d_y, a.n_max, n, &cx.c.budget(), cx.c.tol)?;
    let h = &rep.hypotheses;
    Ok(Outcome::new(
        Status::from_verdict(rep.cert.verdict),
        json!({
            "system": system_json(&local),
            "n_x": rep.n_x,
            "n_y": rep.n_y,
            "hypotheses": {
                "closeness_theta": at_most(h.theta_distance, h.bound),
                "closeness_sigma": at_most(h.sigma_distance, h.bound),
                "lip_theta_t": h.lip_theta_t,
                "lip_sigma_t": h.lip_sigma_t,
                "pass": h.pass,
            },
            "local_point": pt(&rep.local_point),
            "point": pt(&rep.point),
            "rate": rep.cert.rate,
            "r0": rep.cert.r0,
            "lip_theta_star": bounded(rep.cert.lip_theta_star, 1.0, 1.0),
            "lip_sigma_star": bounded(rep.cert.lip_sigma_star, 1.0, 1.0),
            "verdict": rep.cert.verdict.as_str(),
        }),
    ))
}
