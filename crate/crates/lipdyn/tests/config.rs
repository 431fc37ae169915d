use lipdyn::config::sha256_hex;
use lipdyn::parse_map_config;
use lipdyn::table::{read_graph, write_graph};
use lipdyn_core::grid::{GraphFn, Grid};
use lipdyn_core::{Error, MapSpec, Point};

fn configs() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(configs().join(name)).unwrap()
}

#[test]
fn logistic_config_is_a_valid_1d_map() {
    let text = r#"{"dim": 1, "domain": {"center": [0.5], "radius": 0.5}, "expr": "3.3*x*(1-x)"}"#;
    let sys = parse_map_config(text).unwrap();
    assert_eq!(sys.map.dim(), 1);
    let y = sys.map.eval(&Point::from_slice(&[0.5])).unwrap()[0];
    assert!((y - 0.825).abs() < 1e-15);
    assert!(sys.splitting.is_none() && sys.fixed_point.is_none());
}

#[test]
fn the_gap_between_zero_and_a_tenth_is_reported() {
    match parse_map_config(&read("piecewise_gap.json")) {
        Err(Error::CoverageGap { lo, hi }) => {
            assert!(lo[0] <= 0.0 && lo[0] > -1e-6, "{lo:?}");
            assert!(hi[0] >= 0.1 && hi[0] < 0.1 + 1e-6, "{hi:?}");
        }
        other => panic!("{other:?}"),
    }
    let bridged = parse_map_config(&read("piecewise_bridged.json")).unwrap();
    let at = |x: f64| bridged.map.eval(&Point::from_slice(&[x])).unwrap()[0];
    assert_eq!(at(0.05), 0.1 * 0.05);
    assert!((at(0.1) - 0.01).abs() < 1e-15);
}

#[test]
fn linear_plus_lip_with_splitting() {
    let sys = parse_map_config(&read("sine_saddle.json")).unwrap();
    assert!(matches!(sys.map, MapSpec::LinearPlusLip { .. }));
    let (lin, phi) = sys.hyperbolic().unwrap();
    assert_eq!(lin.tau, 0.5);
    assert_eq!(phi.dim(), 2);
    let v = sys.map.eval(&Point::from_slice(&[1.0, 1.0])).unwrap();
    assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - (0.5 + 0.2 * 1f64.sin())).abs() < 1e-15);
    assert_eq!(sys.fixed_point, Some(Point::zeros(2)));
}

#[test]
fn diagonal_matrices_split_along_the_axes() {
    let sys = parse_map_config(&read("linear_saddle.json")).unwrap();
    let (lin, _) = sys.hyperbolic().unwrap();
    assert_eq!((lin.dim_s(), lin.dim_u()), (1, 1));
    assert_eq!(lin.a_s.get(0, 0), 0.5);
}

#[test]
fn json_errors_carry_line_and_column() {
    let text = "{\n  \"dim\": 1,\n  \"domain\": {\"center\": [0], \"radius\": 1}\n  \"expr\": \"x\"\n}";
    match parse_map_config(text) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (4, 3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn expression_errors_name_the_piece() {
    let text = r#"{"dim": 1, "domain": {"center": [0], "radius": 1},
        "pieces": [{"when": "x < 0", "expr": "x"}, {"when": "x >= 0", "expr": "2*(x"}]}"#;
    match parse_map_config(text) {
        Err(Error::Parse { message, .. }) => assert!(message.contains("pieces[1]"), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_fields_and_kinds_are_rejected() {
    let base = r#"{"dim": 1, "domain": {"center": [0], "radius": 1}, "expr": "x", "extra": 1}"#;
    assert!(matches!(parse_map_config(base), Err(Error::Parse { .. })));
    let kind = r#"{"dim": 1, "domain": {"center": [0], "radius": 1}, "kind": "spline", "expr": "x"}"#;
    assert!(matches!(parse_map_config(kind), Err(Error::Parse { .. })));
}

#[test]
fn nested_kinds_inherit_dim_and_domain() {
    let text = r#"{"dim": 1, "domain": {"center": [0], "radius": 2}, "kind": "iterate", "k": 3,
        "inner": {"expr": "0.5*x + 0.1"}}"#;
    let sys = parse_map_config(text).unwrap();
    let y = sys.map.eval(&Point::from_slice(&[0.0])).unwrap()[0];
    assert!((y - 0.175).abs() < 1e-15);
    let t = r#"{"dim": 1, "domain": {"center": [0], "radius": 2}, "kind": "translate", "shift": [0.5],
        "inner": {"expr": "x^2"}}"#;
    let y = parse_map_config(t).unwrap().map.eval(&Point::from_slice(&[0.0])).unwrap()[0];
    assert!((y - (0.25 - 0.5)).abs() < 1e-15);
}

#[test]
fn dimension_declarations_are_checked() {
    let text = r#"{"dim": 2, "domain": {"center": [0], "radius": 1}, "expr": "x"}"#;
    assert!(parse_map_config(text).is_err());
}

#[test]
fn non_diagonal_matrix_needs_a_splitting() {
    let text = r#"{"dim": 2, "domain": {"center": [0, 0], "radius": 1}, "kind": "linear_plus_lip",
        "matrix": [[2, 1], [0, 0.5]], "phi": {"expr": ["0", "0"]}}"#;
    assert!(parse_map_config(text).unwrap().hyperbolic().is_err());
}

#[test]
fn graph_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let g = GraphFn::from_fn(Grid::centered(2, 0.5, 9).unwrap(), |x| {
        Ok(Point::from_slice(&[x[0] * x[1], (x[0] + 0.1).sin()]))
    })
    .unwrap();
    write_graph(&path, &g).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("xi_1,xi_2,val_1,val_2\n"));
    let back = read_graph(&path).unwrap();
    assert_eq!(back.grid.nodes_per_axis(), 9);
    assert_eq!(back.values, g.values);
    assert!(back.grid.nodes().zip(g.grid.nodes()).all(|(a, b)| a.dist(&b) < 1e-15));
}

#[test]
fn incomplete_grids_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    std::fs::write(&path, "xi_1,val_1\n0,1\n0.5,2\n0.7,3\n").unwrap();
    assert!(read_graph(&path).is_err());
    std::fs::write(&path, "x,val_1\n0,1\n1,2\n").unwrap();
    assert!(read_graph(&path).is_err());
}

#[test]
fn hashes_are_hex_sha256() {
    assert_eq!(
        sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}
