use std::fs;
use std::path::PathBuf;

use due_core::hilbert::TripTable;
use due_core::network::{load_dir, validate_dir, JunctionShape, Link, Network, Node, OdPair, Path};
use due_core::ErrorCategory;
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn copy_instance(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["nodes.csv", "links.csv", "od.csv", "paths.csv"] {
        fs::copy(data(name).join(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn nguyen_counts() {
    let net = load_dir::<f64>(data("nguyen")).unwrap();
    assert_eq!((net.links.len(), net.nodes.len(), net.ods.len(), net.paths.len()), (19, 13, 4, 24));
    let origins = net.junctions.iter().filter(|j| j.role.origin).count();
    assert!(origins <= 4);
    assert!(net.unreachable_path_links().is_empty());
}

#[test]
fn sioux_falls_counts() {
    let net = load_dir::<f64>(data("sioux_falls")).unwrap();
    assert_eq!((net.links.len(), net.nodes.len(), net.ods.len(), net.paths.len()), (76, 24, 528, 6180));
    assert!(net.unreachable_path_links().is_empty());
}

#[test]
fn vendored_instances_validate() {
    for name in ["nguyen", "sioux_falls"] {
        let report = validate_dir(data(name));
        assert!(report.passed(), "{name}:\n{}", report.table());
    }
}

#[test]
fn nguyen_round_trip() {
    let net = load_dir::<f64>(data("nguyen")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    net.write_dir(dir.path()).unwrap();
    assert_eq!(load_dir::<f64>(dir.path()).unwrap(), net);
}

#[test]
fn corrupted_path_row_is_located() {
    let dir = copy_instance("nguyen");
    let file = dir.path().join("paths.csv");
    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, text.replace("2,1,2,18,11", "2,1,2,11,18")).unwrap();
    let err = load_dir::<f64>(dir.path()).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Validation);
    assert!(err.to_string().contains("paths.csv:3"), "{err}");
    let report = validate_dir(dir.path());
    assert!(!report.passed());
    assert!(report.table().contains("paths.csv:3"));
}

#[test]
fn empty_od_file_means_no_demand() {
    let dir = copy_instance("nguyen");
    fs::write(dir.path().join("od.csv"), "od_id,origin,dest,demand,target_time\n").unwrap();
    let report = validate_dir(dir.path());
    assert!(!report.passed());
    assert!(report.table().contains("no demand"), "{}", report.table());
}

#[test]
fn missing_file_is_a_parse_error_naming_the_path() {
    let dir = copy_instance("nguyen");
    fs::remove_file(dir.path().join("links.csv")).unwrap();
    let err = load_dir::<f64>(dir.path()).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Parse);
    assert!(err.to_string().contains("links.csv"));
}

#[test]
fn malformed_number_is_a_parse_error() {
    let dir = copy_instance("nguyen");
    let file = dir.path().join("links.csv");
    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, text.replacen("1,1,5,7,", "1,1,5,seven,", 1)).unwrap();
    let err = load_dir::<f64>(dir.path()).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Parse);
    assert!(err.to_string().contains("links.csv:3"), "{err}");
}

#[test]
fn junction_shapes_on_nguyen() {
    let net = load_dir::<f64>(data("nguyen")).unwrap();
    // node 6 receives links 5 and 17 and feeds 7 and 8
    let j = &net.junctions[5];
    assert_eq!((j.incoming.len(), j.outgoing.len(), j.shape), (2, 2, JunctionShape::General));
    // node 12 is a diverge fed by link 2
    assert_eq!(net.junctions[11].shape, JunctionShape::Diverge);
    // node 3 is a destination reached by three links
    assert!(net.junctions[2].role.destination);
    assert_eq!(net.junctions[2].shape, JunctionShape::Sink);
}

fn chain(lengths: &[f64], kjam: &[f64], demand: f64, target: f64) -> Network<f64> {
    let n = lengths.len() + 1;
    let nodes = (0..n).map(|i| Node { id: format!("v{i}"), x: i as f64 * 0.5, y: -(i as f64) / 3.0 }).collect();
    let links = lengths
        .iter()
        .zip(kjam)
        .enumerate()
        .map(|(i, (&l, &k))| Link::new(format!("e{i}"), i, i + 1, l, 50.0 + i as f64, 15.0, k, None).unwrap())
        .collect();
    let ods = vec![OdPair { id: "w".into(), origin: 0, destination: n - 1 }];
    let trips = TripTable::new(vec![demand], vec![target]).unwrap();
    let paths = vec![Path { id: "p".into(), od: 0, links: (0..lengths.len()).collect() }];
    Network::new(nodes, links, ods, trips, paths).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn written_networks_reload_identically(
        lengths in prop::collection::vec(0.1f64..20.0, 1..6),
        kjam in prop::collection::vec(50.0f64..300.0, 6),
        demand in 1.0f64..5000.0,
        target in 0.1f64..3.0,
    ) {
        let net = chain(&lengths, &kjam[..lengths.len()], demand, target);
        let dir = tempfile::tempdir().unwrap();
        net.write_dir(dir.path()).unwrap();
        prop_assert_eq!(load_dir::<f64>(dir.path()).unwrap(), net);
    }
}
