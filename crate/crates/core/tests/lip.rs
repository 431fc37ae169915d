use lipdyn_core::lip::{
    estimate_lip, estimate_reverse_lip, lip_distance, lip_norm, max_quotient, sample_pairs, Scaled, Sum,
};
use lipdyn_core::{Ball, LipMap, MapSpec, Point, SamplingBudget};
use proptest::prelude::*;

fn map1(e: &str, lo: f64, hi: f64) -> MapSpec {
    MapSpec::expr(Ball::interval(lo, hi).unwrap(), &[e]).unwrap()
}

fn ball1(c: f64, r: f64) -> Ball {
    Ball::new(Point::from_slice(&[c]), r).unwrap()
}

/// Brute force over a dense grid of adjacent pairs.
fn brute_lip(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..=n.min(i + 50) {
            let (x, y) = (lo + h * i as f64, lo + h * j as f64);
            best = best.max((f(x) - f(y)).abs() / (x - y).abs());
        }
    }
    best
}

#[test]
fn abs_has_unit_constant() {
    let m = map1("abs(x)", -1.0, 1.0);
    let e = estimate_lip(&m, &ball1(0.0, 1.0), &SamplingBudget::default()).unwrap();
    let oracle = brute_lip(f64::abs, -1.0, 1.0, 2000);
    assert!((e.value - oracle).abs() < 1e-9);
    assert!((e.value - 1.0).abs() < 1e-9);
}

#[test]
fn logistic_near_the_cycle_point() {
    let m = map1("3.3*x*(1-x)", 0.0, 1.0);
    let region = ball1(0.8236, 0.01);
    let e = estimate_lip(&m, &region, &SamplingBudget::default()).unwrap();
    // sup |m'| on the ball sits at the right endpoint.
    let sup = (3.3 * (1.0 - 2.0 * 0.8336f64)).abs();
    assert!((e.value - sup).abs() < 1e-6, "{} vs {}", e.value, sup);
    assert!((e.value - 2.1358).abs() <= 2.0 * 3.3 * 0.01);
    assert!(e.value <= sup + 1e-12);
}

#[test]
fn reverse_constants() {
    let b = SamplingBudget::default();
    let cubic = map1("x^3 - x", 0.0, 3.0);
    let s2 = 2f64.sqrt();
    let e = estimate_reverse_lip(&cubic, &ball1(s2, 0.1), &b).unwrap();
    let oracle = 3.0 * (s2 - 0.1).powi(2) - 1.0;
    assert!((e.value - oracle).abs() < 1e-6, "{}", e.value);
    assert!(!e.is_lower_bound);
    let sq = map1("x^2", -1.0, 1.0);
    let e = estimate_reverse_lip(&sq, &ball1(0.0, 1.0), &b).unwrap();
    assert!(e.value < 1e-6, "{}", e.value);
}

#[test]
fn lip_norms_and_distances() {
    let b = SamplingBudget::default();
    let r = ball1(0.0, 1.0);
    assert!((lip_norm(&map1("0.2*x", -1.0, 1.0), &r, &b).unwrap() - 0.2).abs() < 1e-9);
    assert!((lip_norm(&map1("2*x", -1.0, 1.0), &r, &b).unwrap() - 2.0).abs() < 1e-15);
    let half = map1("0.5*x", -1.0, 1.0);
    assert_eq!(lip_distance(&half, &half, &r, &b).unwrap(), 0.0);
    let shifted = map1("0.5*x + 0.001", -1.0, 1.0);
    assert!((lip_distance(&half, &shifted, &r, &b).unwrap() - 0.001).abs() < 1e-12);
    let steeper = map1("0.6*x", -1.0, 1.0);
    assert!((lip_distance(&half, &steeper, &r, &b).unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn estimates_are_bit_reproducible() {
    let m = map1("sin(3*x) + abs(x - 0.2)", -1.0, 1.0);
    let b = SamplingBudget::new(500, 11);
    let a = estimate_lip(&m, &ball1(0.0, 1.0), &b).unwrap();
    let c = estimate_lip(&m, &ball1(0.0, 1.0), &b).unwrap();
    assert_eq!(a.value.to_bits(), c.value.to_bits());
    assert_eq!(a.argmax, c.argmax);
}

#[test]
fn converges_to_sup_of_derivative_in_two_dimensions() {
    let dom = Ball::new(Point::zeros(2), 1.0).unwrap();
    let m = MapSpec::expr(dom, &["0.2*sin(y)", "0.3*x*x"]).unwrap();
    let e = estimate_lip(&m, &Ball::new(Point::zeros(2), 0.5).unwrap(), &SamplingBudget::default()).unwrap();
    // |D m| in the max norm is max(0.2|cos y|, 0.6|x|) = 0.3 at x = ±0.5.
    assert!((e.value - 0.3).abs() < 1e-6, "{}", e.value);
}

fn poly(a: f64, b: f64, c: f64) -> MapSpec {
    let text = format!("{a}*x^3 + {b}*x^2 + {c}*x");
    map1(&text, -2.0, 2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_and_triangle_laws_on_fixed_pairs(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64,
        alpha in -3.0..3.0f64, seed in 0u64..1000,
    ) {
        let f = poly(a, b, c);
        let g = map1("sin(2*x)", -2.0, 2.0);
        let pairs = sample_pairs(&ball1(0.0, 1.0), &SamplingBudget::new(256, seed));
        let lf = max_quotient(&f, &pairs).unwrap();
        let lg = max_quotient(&g, &pairs).unwrap();
        let lsum = max_quotient(&Sum(&f, &g), &pairs).unwrap();
        prop_assert!(lsum <= (lf + lg) * (1.0 + 1e-12) + 1e-12);
        let lscaled = max_quotient(&Scaled(alpha, &f), &pairs).unwrap();
        prop_assert!((lscaled - alpha.abs() * lf).abs() <= 1e-12 * (1.0 + lf));
    }

    #[test]
    fn sampled_constant_never_exceeds_the_true_one(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, seed in 0u64..1000,
    ) {
        let f = poly(a, b, c);
        let e = estimate_lip(&f, &ball1(0.0, 1.0), &SamplingBudget::new(256, seed)).unwrap();
        // True constant: sup |3a x^2 + 2b x + c| on [-1, 1], found on a fine grid plus critical point.
        let d = |x: f64| (3.0 * a * x * x + 2.0 * b * x + c).abs();
        let mut truth = d(-1.0).max(d(1.0));
        if a != 0.0 {
            let xc = -b / (3.0 * a);
            if xc.abs() <= 1.0 { truth = truth.max(d(xc)); }
        }
        prop_assert!(e.value <= truth * (1.0 + 1e-9) + 1e-12);
        prop_assert!(e.value >= truth - 1e-6 * (1.0 + truth));
    }

    #[test]
    fn enlarging_the_region_never_decreases_the_estimate(
        shift in -0.5..0.5f64, seed in 0u64..1000,
    ) {
        let f = map1("x^3 - x + abs(x - 0.3)", -2.0, 2.0);
        let small = ball1(shift * 0.5, 0.4);
        let pairs = sample_pairs(&small, &SamplingBudget::new(200, seed));
        let mut more = pairs.clone();
        more.extend(sample_pairs(&ball1(0.0, 1.5), &SamplingBudget::new(200, seed)));
        prop_assert!(max_quotient(&f, &more).unwrap() >= max_quotient(&f, &pairs).unwrap());
    }
}

#[test]
fn lip_map_trait_objects_work() {
    let m: Box<dyn LipMap> = Box::new(map1("2*x", -1.0, 1.0));
    let e = estimate_lip(&m, &ball1(0.0, 1.0), &SamplingBudget::new(16, 0)).unwrap();
    assert_eq!(e.value, 2.0);
}
