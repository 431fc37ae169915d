use lipdyn_core::grid::{GraphFn, Grid};
use lipdyn_core::hyperbolic::Verdict;
use lipdyn_core::lip::sup_norm;
use lipdyn_core::transversal::{
    check_hypotheses, find_intersection, iterate_dual, l_transversal_graphs, uniqueness_spread, TransversalityProblem,
};
use lipdyn_core::{Ball, Error, MapSpec, Point, SamplingBudget};
use proptest::prelude::*;

fn line(e: &str) -> MapSpec {
    MapSpec::expr(Ball::interval(-1.0, 1.0).unwrap(), &[e]).unwrap()
}

fn problem<'a>(theta_t: &'a MapSpec, sigma_t: &'a MapSpec) -> TransversalityProblem<'a> {
    TransversalityProblem {
        dim1: 1,
        dim2: 1,
        radius: 1.0,
        theta_t,
        sigma_t,
        theta: None,
        sigma: None,
        c: 0.5,
        spacing: None,
    }
}

#[test]
fn affine_pair_intersection() {
    let (t, s) = (line("0.3*x + 0.1"), line("0.2*x"));
    let p = problem(&t, &s);
    let b = SamplingBudget::default();
    let hyp = check_hypotheses(&p, &b).unwrap();
    assert!(hyp.pass, "{hyp:?}");
    assert!((hyp.theta_distance - 0.25).abs() < 1e-12);
    let cert = find_intersection(&p, 1e-14, &b, false).unwrap();
    let y1 = 0.02 / 0.94;
    assert!((cert.y1[0] - y1).abs() < 1e-9);
    assert!((cert.y2[0] - (0.3 * y1 + 0.1)).abs() < 1e-9);
    // Brute force on a 1e-6 grid: minimise |σ̃(θ̃(y)) - y|.
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=1_000_000 {
        let y = -0.5 + i as f64 * 1e-6;
        let d = (0.2 * (0.3 * y + 0.1) - y).abs();
        if d < best.0 {
            best = (d, y);
        }
    }
    assert!((cert.y1[0] - best.1).abs() <= 1e-6);
    assert!((cert.observed_rate - 0.06).abs() <= 0.05 * 0.06, "{}", cert.observed_rate);
    assert!((cert.rate - 0.06).abs() < 1e-9);
    assert_eq!(cert.verdict, Verdict::Certified);
    assert!(cert.r0 > 0.0 && cert.r0 + cert.y2[0].abs() < 1.0);
    assert!(uniqueness_spread(&p, 10, 1e-14, 3).unwrap() <= 1e-13);
    assert!((iterate_dual(&p, 1e-14).unwrap()[0] - cert.y2[0]).abs() <= 1e-13);
}

#[test]
fn hypotheses_are_measured_on_the_half_ball() {
    let (t, s) = (line("0.3*x + 0.1"), line("0.2*x"));
    let full = sup_norm(&t, &Ball::interval(-1.0, 1.0).unwrap(), &SamplingBudget::default()).unwrap();
    assert!((full - 0.4).abs() < 1e-12);
    let far = line("0.3*x + 0.2");
    let hyp = check_hypotheses(&problem(&far, &s), &SamplingBudget::default()).unwrap();
    assert!(!hyp.closeness_ok && !hyp.pass);
    assert!(find_intersection(&problem(&far, &s), 1e-12, &SamplingBudget::default(), false).is_err());
}

#[test]
fn axes_cross_at_the_origin() {
    let z = line("0");
    let cert = find_intersection(&problem(&z, &z), 1e-14, &SamplingBudget::default(), false).unwrap();
    assert_eq!(cert.y0, Point::zeros(2));
}

#[test]
fn escape_from_the_compactum_is_reported() {
    let (t, s) = (line("0.9*x + 0.6"), line("0.95*x"));
    let cert = find_intersection(&problem(&t, &s), 1e-12, &SamplingBudget::default(), true);
    assert!(matches!(cert, Err(Error::EscapedCompactum { .. })), "{cert:?}");
}

fn grid_graph(slope: f64) -> GraphFn {
    GraphFn::from_fn(Grid::centered(1, 1.0, 101).unwrap(), |p| Ok(Point::from_slice(&[slope * p[0].abs()]))).unwrap()
}

#[test]
fn graph_transversality_threshold() {
    let axis = grid_graph(0.0);
    let o = Point::zeros(2);
    assert_eq!(l_transversal_graphs(&axis, &axis, &o, 0.5, 1e-12).unwrap().verdict, Verdict::Certified);
    assert_eq!(l_transversal_graphs(&grid_graph(0.99), &axis, &o, 0.5, 1e-12).unwrap().verdict, Verdict::Certified);
    assert_eq!(l_transversal_graphs(&grid_graph(1.01), &axis, &o, 0.5, 1e-12).unwrap().verdict, Verdict::Rejected);
    assert_eq!(l_transversal_graphs(&grid_graph(1.0), &axis, &o, 0.5, 1e-12).unwrap().verdict, Verdict::Inconclusive);
    let off = Point::from_slice(&[0.0, 0.3]);
    assert!(matches!(l_transversal_graphs(&axis, &axis, &off, 0.5, 1e-12), Err(Error::NotOnSet { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn intersection_properties(a in -0.4..0.4f64, b in -0.1..0.1f64, c in -0.4..0.4f64, d in -0.1..0.1f64) {
        let t = line(&format!("{a}*x + {b}"));
        let s = line(&format!("{c}*x + {d}"));
        let p = problem(&t, &s);
        let budget = SamplingBudget::new(256, 0);
        let hyp = check_hypotheses(&p, &budget).unwrap();
        prop_assume!(hyp.pass);
        let tol = 1e-13;
        let cert = find_intersection(&p, tol, &budget, false).unwrap();
        prop_assert!(cert.y1[0].abs() <= 0.5);
        prop_assert!(uniqueness_spread(&p, 10, tol, 1).unwrap() <= 10.0 * tol);
        prop_assert!((iterate_dual(&p, tol).unwrap()[0] - cert.y2[0]).abs() <= 10.0 * tol);
        let back = s.eval(&cert.y2).unwrap()[0];
        prop_assert!((back - cert.y1[0]).abs() <= 10.0 * tol);
    }
}
