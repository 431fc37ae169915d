use lipdyn_core::hyperbolic::{
    analyze_linear, certify_l_hyperbolic, find_fixed_point, invert_at, isolation_check, sweep_fixed_points,
    Splitting, Verdict,
};
use lipdyn_core::{Ball, Error, MapSpec, Matrix, Point, SamplingBudget, DEFAULT_MARGIN};
use proptest::prelude::*;

fn ball2(r: f64) -> Ball {
    Ball::new(Point::zeros(2), r).unwrap()
}

fn phi2(ex: &str, ey: &str) -> MapSpec {
    MapSpec::expr(ball2(4.0), &[ex, ey]).unwrap()
}

fn coord() -> Splitting {
    Splitting::coordinate(2, &[0]).unwrap()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn diagonal_linear_data() {
    let h = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    assert_eq!(h.tau, 0.5);
    assert_eq!(h.m, 0.5);
    let h = analyze_linear(&Matrix::diag(&[0.9, 1.1]), &coord()).unwrap();
    assert_eq!(h.tau, 1.0 / 1.1);
    let coupled = Matrix::from_rows(&[&[0.5, 0.1], &[0.0, 2.0]]).unwrap();
    assert!(matches!(analyze_linear(&coupled, &coord()), Err(Error::NotInvariant { .. })));
    assert!(matches!(
        analyze_linear(&Matrix::diag(&[0.5, 0.9]), &coord()),
        Err(Error::NotHyperbolic { .. })
    ));
}

#[test]
fn certification_examples() {
    let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    let b = SamplingBudget::default();
    let zero = certify_l_hyperbolic(&lin, &phi2("0", "0"), &ball2(1.0), &b, DEFAULT_MARGIN).unwrap();
    assert_eq!(zero.verdict, Verdict::Certified);
    let sin = certify_l_hyperbolic(&lin, &phi2("0", "0.2*sin(x)"), &ball2(1.0), &b, DEFAULT_MARGIN).unwrap();
    assert_eq!(sin.verdict, Verdict::Certified);
    assert!((sin.lip_phi.value - 0.2).abs() < 1e-6);
    assert_eq!(sin.threshold, 0.25);
    let clip = phi2("0.3*max(-1, min(1, x))", "0.3*max(-1, min(1, y))");
    let c = certify_l_hyperbolic(&lin, &clip, &ball2(1.0), &b, DEFAULT_MARGIN).unwrap();
    assert_eq!(c.verdict, Verdict::Rejected);
}

#[test]
fn constant_perturbation_fixed_point() {
    let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    let (c1, c2) = (0.1, -0.05);
    let phi = phi2(&format!("{c1}"), &format!("{c2}"));
    let fp = find_fixed_point(&lin, &phi, 0.0, &ball2(1.0), 1e-14).unwrap();
    assert!(fp.point.dist(&Point::from_slice(&[2.0 * c1, -c2])) < 1e-13);
}

#[test]
fn nonlinear_fixed_point_against_scalar_reduction() {
    let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    let phi = phi2("0.2*sin(y) + 0.05", "0.1*cos(x)");
    let fp = find_fixed_point(&lin, &phi, 0.2 * DEFAULT_MARGIN, &ball2(1.0), 1e-14).unwrap();
    // y = -0.1 cos x and x = 0.4 sin y + 0.1.
    let x = bisect(|x| 0.4 * (-0.1 * x.cos()).sin() + 0.1 - x, -1.0, 1.0);
    let y = -0.1 * x.cos();
    assert!(fp.point.dist(&Point::from_slice(&[x, y])) < 1e-12);
    assert!(fp.residual < 1e-12);
    assert!(fp.observed_rate <= 0.5 + 0.2 * DEFAULT_MARGIN);
    for w in fp.iteration.steps.windows(2).filter(|w| w[0] > 1e-13) {
        assert!(w[1] <= (0.5 + 0.2 * DEFAULT_MARGIN) * w[0]);
    }
}

#[test]
fn large_offset_is_rejected() {
    let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    let r = find_fixed_point(&lin, &phi2("0.9", "0"), 0.0, &ball2(1.0), 1e-12);
    assert!(matches!(r, Err(Error::PreconditionFailed { .. })));
}

#[test]
fn inversion_of_sine_perturbed_doubling() {
    let phi = MapSpec::expr(Ball::interval(-4.0, 4.0).unwrap(), &["0.2*sin(x)"]).unwrap();
    let inv = invert_at(&Matrix::diag(&[2.0]), &phi, 0.2, &Point::from_slice(&[2.0]), &Ball::interval(-2.0, 2.0).unwrap(), 1e-15).unwrap();
    let oracle = bisect(|x| 2.0 * x + 0.2 * x.sin() - 2.0, 0.0, 2.0);
    assert!((inv.point[0] - oracle).abs() < 1e-14);
    assert!((oracle - 0.920415).abs() < 1e-6);
    let zero = MapSpec::expr(Ball::interval(-4.0, 4.0).unwrap(), &["0"]).unwrap();
    let inv = invert_at(&Matrix::diag(&[2.0]), &zero, 0.0, &Point::from_slice(&[1.5]), &Ball::interval(-2.0, 2.0).unwrap(), 1e-15).unwrap();
    assert_eq!(inv.point[0], 0.75);
}

#[test]
fn isolation_of_the_origin_and_sweeps() {
    let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
    let zero = phi2("0", "0");
    let p = Point::zeros(2);
    let rep = isolation_check(&lin, &zero, 0.0, &p, &Point::from_slice(&[0.3, 0.2]), &ball2(1.0), 30, 21).unwrap();
    assert!(rep.unique && rep.consistent);
    assert!(rep.forward_escape.is_some());
    let rep = isolation_check(&lin, &zero, 0.0, &p, &p, &ball2(1.0), 30, 21).unwrap();
    assert!(rep.unique && rep.consistent && rep.distance == 0.0);

    let logistic = MapSpec::expr(Ball::interval(-0.5, 1.5).unwrap(), &["3.3*x*(1-x)"]).unwrap();
    let roots = sweep_fixed_points(&logistic, &Ball::interval(-0.2, 1.0).unwrap(), 200, 1e-12).unwrap();
    assert_eq!(roots.len(), 2);
    assert!(roots[0][0].abs() < 1e-12);
    assert!((roots[1][0] - (1.0 - 1.0 / 3.3)).abs() < 1e-12);
    // Disjoint isolating boxes.
    assert!(roots[1][0] - roots[0][0] > 0.5);

    let f = MapSpec::parse_pieces(
        Ball::interval(-1.0, 3.0).unwrap(),
        &[
            ("x < 0", &["2*x"]),
            ("0 <= x < 0.1", &["0.1*x"]),
            ("0.1 <= x <= 1", &["x^2"]),
            ("x > 1", &["0.5*x + 0.5"]),
        ],
    )
    .unwrap();
    let roots = sweep_fixed_points(&f, &Ball::interval(-1.0, 3.0).unwrap(), 401, 1e-12).unwrap();
    let xs: Vec<f64> = roots.iter().map(|p| p[0]).collect();
    assert_eq!(xs.len(), 2, "{xs:?}");
    assert!(xs[0].abs() < 1e-12 && (xs[1] - 1.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inversion_round_trips(zx in -1.5..1.5f64, zy in -1.5..1.5f64) {
        let phi = phi2("0.1*sin(y)", "0.1*cos(x) - 0.1");
        let a = Matrix::diag(&[0.5, 2.0]);
        let z = Point::from_slice(&[zx, zy]);
        let region = ball2(4.0);
        let tol = 1e-13;
        let inv = invert_at(&a, &phi, 0.1 * DEFAULT_MARGIN, &z, &region, tol).unwrap();
        let back = a.apply(&inv.point) + phi.eval(&inv.point).unwrap();
        prop_assert!(back.dist(&z) <= 2.0 * tol);
    }

    #[test]
    fn shrinking_the_perturbation_never_rejects(c in 0.0..0.3f64, k in 0.0..1.0f64) {
        let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
        let b = SamplingBudget::new(256, 1);
        let big = certify_l_hyperbolic(&lin, &phi2("0", &format!("{c}*sin(x)")), &ball2(1.0), &b, DEFAULT_MARGIN).unwrap();
        let small = certify_l_hyperbolic(&lin, &phi2("0", &format!("{}*sin(x)", c * k)), &ball2(1.0), &b, DEFAULT_MARGIN).unwrap();
        if big.verdict == Verdict::Certified {
            prop_assert_eq!(small.verdict, Verdict::Certified);
        }
        prop_assert!(!(big.verdict != Verdict::Rejected && small.verdict == Verdict::Rejected));
    }

    #[test]
    fn fixed_point_trace_respects_rate(c1 in -0.1..0.1f64, c2 in -0.1..0.1f64, s in 0.0..0.2f64) {
        let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &coord()).unwrap();
        let phi = phi2(&format!("{s}*sin(y) + {c1}"), &format!("{s}*cos(x) + {c2}"));
        let fp = find_fixed_point(&lin, &phi, s * DEFAULT_MARGIN, &ball2(1.0), 1e-13).unwrap();
        prop_assert!(fp.observed_rate <= 0.5 + s * DEFAULT_MARGIN + 1e-12);
        prop_assert!(fp.residual <= 1e-12);
    }
}
