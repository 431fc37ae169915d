use lipdyn_core::chaoslab::{heteroclinic_chain, horseshoe_verify, lambda_experiment, regraph, DiskSpec};
use lipdyn_core::grid::{GraphFn, Grid};
use lipdyn_core::hyperbolic::{analyze_linear, HyperbolicLinear, Splitting};
use lipdyn_core::manifolds::{compute_manifold, LocalSystem, Manifold, Side};
use lipdyn_core::{Ball, Error, MapSpec, Matrix, Point, Rect, SamplingBudget, DEFAULT_MARGIN};
use proptest::prelude::*;

fn contracting_first() -> HyperbolicLinear {
    analyze_linear(&Matrix::diag(&[0.5, 2.0]), &Splitting::coordinate(2, &[0]).unwrap()).unwrap()
}

fn expanding_first() -> HyperbolicLinear {
    analyze_linear(&Matrix::diag(&[2.0, 0.5]), &Splitting::coordinate(2, &[1]).unwrap()).unwrap()
}

fn zero() -> MapSpec {
    MapSpec::expr(Ball::new(Point::zeros(2), 4.0).unwrap(), &["0", "0"]).unwrap()
}

fn manifold(sys: &LocalSystem<'_>, side: Side, n: usize) -> Manifold {
    let b = SamplingBudget::new(256, 0);
    let prob = sys.problem(side, &b, DEFAULT_MARGIN).unwrap();
    compute_manifold(&prob, side, n, 1e-13).unwrap()
}

fn affine_disk(sys: &LocalSystem<'_>, side: Side, anchor: [f64; 2], slope: f64) -> DiskSpec {
    let g = GraphFn::from_fn(Grid::centered(1, 1.0, 65).unwrap(), |t| Ok(Point::from_slice(&[slope * t[0]]))).unwrap();
    DiskSpec::new(sys, side, Point::from_slice(&anchor), g).unwrap()
}

#[test]
fn linear_pushforward_matches_the_exact_formula() {
    let z = zero();
    let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
    let wu = manifold(&sys, Side::Unstable, 33);
    let ws = manifold(&sys, Side::Stable, 33);
    let (xs, slope, w) = (0.5, 0.4, 0.5);
    let disk = affine_disk(&sys, Side::Unstable, [xs, 0.0], slope);
    let exp = lambda_experiment(&sys, &wu, Some(&ws), &disk, 20, w, 65, 0, 1e-15).unwrap();
    for s in &exp.steps {
        let n = s.n as i32;
        assert!((s.lip - slope * 0.25f64.powi(n)).abs() <= 1e-12, "{s:?}");
        assert!((s.c0 - (xs * 0.5f64.powi(n) + slope * 0.25f64.powi(n) * w)).abs() <= 1e-12, "{s:?}");
    }
    assert_eq!(exp.decay_onset(0.9), Some(0));
}

#[test]
fn the_manifold_itself_stays_at_distance_zero() {
    let phi = MapSpec::expr(Ball::new(Point::zeros(2), 2.0).unwrap(), &["0", "0.2*sin(x)"]).unwrap();
    let sys = LocalSystem::with_lip(expanding_first(), &phi, Point::zeros(2), 1.0, 0.21).unwrap();
    let wu = manifold(&sys, Side::Unstable, 257);
    let disk = DiskSpec::from_manifold(&wu);
    let exp = lambda_experiment(&sys, &wu, None, &disk, 6, 0.5, 33, 6, 1e-15).unwrap();
    // Up to the interpolation error of the graph, exactly zero at the reference step.
    assert!(exp.steps.iter().all(|s| s.distance < 1e-7), "{:?}", exp.steps);
    assert_eq!(exp.steps[6].distance, 0.0);
}

#[test]
fn nonlinear_disks_converge_geometrically() {
    let phi = MapSpec::expr(Ball::new(Point::zeros(2), 2.0).unwrap(), &["0", "0.2*sin(x)"]).unwrap();
    let sys = LocalSystem::with_lip(expanding_first(), &phi, Point::zeros(2), 1.0, 0.21).unwrap();
    let wu = manifold(&sys, Side::Unstable, 1025);
    let ws = manifold(&sys, Side::Stable, 65);
    let disk = affine_disk(&sys, Side::Unstable, [0.5, 0.0], 0.4);
    let exp = lambda_experiment(&sys, &wu, Some(&ws), &disk, 14, 0.5, 65, 20, 1e-15).unwrap();
    let n0 = exp.decay_onset(0.9).expect("eventually monotone");
    assert!(n0 <= 2, "{n0}: {:?}", exp.steps);
    assert!(exp.worst_ratio_from(n0) <= 0.9);
    assert!(exp.steps.last().unwrap().distance < 1e-4);
}

#[test]
fn disk_must_cover_the_window() {
    let z = zero();
    let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
    let g = GraphFn::from_fn(Grid::centered(1, 0.1, 9).unwrap(), |t| Ok(Point::from_slice(&[0.2 * t[0]]))).unwrap();
    let disk = DiskSpec::new(&sys, Side::Unstable, Point::from_slice(&[0.3, 0.0]), g).unwrap();
    let window = Grid::centered(1, 0.5, 17).unwrap();
    assert!(matches!(regraph(&sys, &disk, 0, &window, 1e-14), Err(Error::RegraphFailure { step: 0 })));
    // A few steps stretch the disk over the window.
    assert!(regraph(&sys, &disk, 3, &window, 1e-14).is_ok());
}

#[test]
fn steep_disks_are_refused() {
    let z = zero();
    let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
    let g = GraphFn::from_fn(Grid::centered(1, 1.0, 9).unwrap(), |t| Ok(Point::from_slice(&[1.5 * t[0]]))).unwrap();
    assert!(matches!(
        DiskSpec::new(&sys, Side::Unstable, Point::zeros(2), g),
        Err(Error::PreconditionFailed { .. })
    ));
}

fn horseshoe() -> MapSpec {
    MapSpec::parse_pieces(
        Ball::new(Point::from_slice(&[1.5, 1.5]), 2.0).unwrap(),
        &[
            ("x <= 1", &["3*x", "y/3"]),
            ("x >= 2", &["9 - 3*x", "3 - y/3"]),
            ("true", &["x", "y + 4"]),
        ],
    )
    .unwrap()
}

fn strips() -> (Rect, Rect) {
    (
        Rect::new(Point::from_slice(&[0.0, 0.0]), Point::from_slice(&[1.0, 3.0])).unwrap(),
        Rect::new(Point::from_slice(&[2.0, 0.0]), Point::from_slice(&[3.0, 3.0])).unwrap(),
    )
}

#[test]
fn full_horseshoe_realizes_every_word() {
    let (r0, r1) = strips();
    let table = horseshoe_verify(&horseshoe(), &r0, &r1, 8).unwrap();
    assert_eq!(table.undecided_cells, 0);
    for k in 1..=8 {
        assert_eq!(table.realized_count(k), 1 << k);
        assert_eq!(table.fixed_points[k - 1], 1 << k, "k = {k}");
    }
    assert!(table.divisor_relation_holds());
    assert_eq!(table.divisor_sums(), (1..=8).map(|k| 1usize << k).collect::<Vec<_>>());
    // Necklace counts of primitive binary words.
    assert_eq!(table.orbits, vec![2, 1, 2, 3, 6, 9, 18, 30]);
    assert!(table.prefix_closed() && table.suffix_closed());
    assert!(table.realized[1].iter().any(|w| w == "00") && table.realized[1].iter().any(|w| w == "01"));
}

#[test]
fn single_strip_realizes_only_zero_words() {
    let map = MapSpec::parse_pieces(
        Ball::new(Point::from_slice(&[1.5, 1.5]), 2.0).unwrap(),
        &[("x <= 1", &["x/2 + 0.25", "y/3"]), ("true", &["x", "y + 4"])],
    )
    .unwrap();
    let (r0, r1) = strips();
    let table = horseshoe_verify(&map, &r0, &r1, 6).unwrap();
    assert_eq!(table.undecided_cells, 0);
    assert_eq!(table.realized[0], vec!["0".to_string(), "1".to_string()]);
    for k in 2..=6 {
        assert_eq!(table.realized[k - 1], vec!["0".repeat(k)]);
    }
    assert_eq!(table.fixed_points, vec![1; 6]);
    assert_eq!(table.orbits, vec![1, 0, 0, 0, 0, 0]);
    assert!(table.divisor_relation_holds() && table.prefix_closed() && table.suffix_closed());
}

#[test]
fn overlapping_rectangles_are_refused() {
    let (r0, _) = strips();
    assert!(horseshoe_verify(&horseshoe(), &r0, &r0, 2).is_err());
}

#[test]
fn affine_chain_through_a_linear_saddle() {
    let z = zero();
    let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
    let wu = manifold(&sys, Side::Unstable, 65);
    let ws = manifold(&sys, Side::Stable, 65);
    let d_x = affine_disk(&sys, Side::Unstable, [0.9, 0.0], 0.35);
    let d_y = affine_disk(&sys, Side::Stable, [0.0, 0.9], 0.3);
    let b = SamplingBudget::new(512, 0);
    let rep = heteroclinic_chain(&sys, &wu, &ws, &d_x, &d_y, 20, 129, &b, 1e-14).unwrap();
    assert_eq!((rep.n_x, rep.n_y), (1, 1));
    // s = a + b u, u = c + d s after one step each way.
    let (a, bb, c, d) = (0.45, 0.35 * 0.25, 0.45, 0.3 * 0.25);
    let s = (a + bb * c) / (1.0 - bb * d);
    let u = c + d * s;
    assert!((rep.local_point[0] - s).abs() < 1e-12 && (rep.local_point[1] - u).abs() < 1e-12, "{:?}", rep.local_point);
    assert_eq!(rep.cert.verdict.as_str(), "certified");
}

#[test]
fn homoclinic_datum_reduces_to_the_saddle() {
    let phi = MapSpec::expr(Ball::new(Point::zeros(2), 2.0).unwrap(), &["0", "0.2*sin(x)"]).unwrap();
    let sys = LocalSystem::with_lip(expanding_first(), &phi, Point::zeros(2), 1.0, 0.21).unwrap();
    let wu = manifold(&sys, Side::Unstable, 129);
    let ws = manifold(&sys, Side::Stable, 129);
    let rep = heteroclinic_chain(
        &sys,
        &wu,
        &ws,
        &DiskSpec::from_manifold(&wu),
        &DiskSpec::from_manifold(&ws),
        4,
        129,
        &SamplingBudget::new(256, 0),
        1e-13,
    )
    .unwrap();
    assert_eq!((rep.n_x, rep.n_y), (0, 0));
    assert!(rep.local_point.norm() < 1e-12);
}

#[test]
fn disks_off_the_manifold_are_refused() {
    let z = zero();
    let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
    let wu = manifold(&sys, Side::Unstable, 33);
    let ws = manifold(&sys, Side::Stable, 33);
    let d_x = affine_disk(&sys, Side::Unstable, [0.9, 0.2], 0.35);
    let d_y = affine_disk(&sys, Side::Stable, [0.0, 0.9], 0.3);
    let err = heteroclinic_chain(&sys, &wu, &ws, &d_x, &d_y, 5, 33, &SamplingBudget::new(64, 0), 1e-14);
    assert!(matches!(err, Err(Error::NotOnSet { .. })), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_slopes_contract_by_tau_squared(slope in -0.9f64..0.9, xs in -0.8f64..0.8, n in 0usize..12) {
        let z = zero();
        let sys = LocalSystem::with_lip(contracting_first(), &z, Point::zeros(2), 1.0, 0.0).unwrap();
        let disk = affine_disk(&sys, Side::Unstable, [xs, 0.0], slope);
        let window = Grid::centered(1, 0.5, 17).unwrap();
        let g = regraph(&sys, &disk, n, &window, 1e-15).unwrap().graph;
        prop_assert!((g.lip() - slope.abs() * 0.25f64.powi(n as i32)).abs() <= 1e-12);
        let at0 = g.value(&Point::zeros(1))[0];
        prop_assert!((at0 - xs * 0.5f64.powi(n as i32)).abs() <= 1e-14);
    }
}
