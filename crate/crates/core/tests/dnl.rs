use std::path::PathBuf;

use due_core::dnl::{exit_time, path_delay, run_dnl, DnlConfig};
use due_core::hilbert::{uniform_feasible, PathField, TimeGrid};
use due_core::dnl::CumulativeCurve;
use due_core::network::{load_dir, Network};
use due_core::Error;
use due_core::operators::{DelayOperator, DnlOperator};
use proptest::prelude::*;

fn nguyen() -> Network<f64> {
    load_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/nguyen")).unwrap()
}

fn grid(k: usize) -> TimeGrid<f64> {
    TimeGrid::new(0.0, 2.0, k).unwrap()
}

/// Every path departs at a rate that keeps every link below `frac` of the
/// smallest capacity.
fn light_profile(net: &Network<f64>, grid: TimeGrid<f64>, frac: f64) -> PathField<f64> {
    let c = net.links.iter().map(|l| l.capacity).fold(f64::INFINITY, f64::min);
    PathField::constant(grid, net.num_paths(), frac * c / net.num_paths() as f64)
}

#[test]
fn nguyen_uniform_loading_conserves_and_keeps_invariants() {
    let net = nguyen();
    let g = grid(70);
    let h = uniform_feasible(g, &net.trips, &net.partition);
    let res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    let total = net.trips.total_demand();
    assert!((res.total_departed - total).abs() <= 1e-9 * total);
    assert!((res.total_exited() - total).abs() <= 1e-6 * total);
    let report = res.check_invariants(&net);
    assert!(report.holds(1e-9), "{report:?}");
    assert!(res.steps > g.num_intervals());
}

#[test]
fn free_flow_delays_match_link_sums() {
    let net = nguyen();
    let g = grid(70);
    let h = light_profile(&net, g, 1e-3);
    let res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    let d = path_delay(&res, &net).unwrap();
    for p in 0..net.num_paths() {
        let ff = net.free_flow_time(p);
        for k in 0..g.num_intervals() {
            assert!((d.get(p, k) - ff).abs() <= g.dt(), "path {p} interval {k}: {} vs {ff}", d.get(p, k));
        }
    }
}

#[test]
fn halving_dt_moves_free_flow_costs_by_under_five_percent() {
    let net = nguyen();
    let coarse = DnlOperator::new(net.clone(), grid(70), 1.0, DnlConfig::default()).unwrap();
    let fine = DnlOperator::new(net.clone(), grid(140), 1.0, DnlConfig::default()).unwrap();
    let a = coarse.evaluate(&light_profile(&net, grid(70), 1e-3)).unwrap();
    let b = fine.evaluate(&light_profile(&net, grid(140), 1e-3)).unwrap();
    for p in 0..net.num_paths() {
        for k in 0..70 {
            let refined = 0.5 * (b.get(p, 2 * k) + b.get(p, 2 * k + 1));
            assert!((a.get(p, k) - refined).abs() < 0.05 * a.get(p, k), "path {p} interval {k}");
        }
    }
}

#[test]
fn congestion_only_adds_delay() {
    let net = nguyen();
    let g = grid(70);
    let h = uniform_feasible(g, &net.trips, &net.partition).scaled(2.0);
    let res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    let d = path_delay(&res, &net).unwrap();
    let mut congested = false;
    for p in 0..net.num_paths() {
        let ff = net.free_flow_time(p);
        for k in 0..g.num_intervals() {
            assert!(d.get(p, k) >= ff - g.dt());
            congested |= d.get(p, k) > ff + 0.1;
        }
    }
    assert!(congested, "doubling the demand should queue somewhere");
}

#[test]
fn link_exit_times_are_monotone() {
    let net = nguyen();
    let g = grid(70);
    let h = uniform_feasible(g, &net.trips, &net.partition).scaled(1.5);
    let res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    for s in &res.links {
        let ff = net.links[s.link].free_flow_time();
        let mut last = f64::NEG_INFINITY;
        for i in 0..4 * res.steps {
            let t = 0.25 * i as f64 * g.dt();
            match exit_time(&s.up, &s.down, t, ff, res.curve_tolerance) {
                Some(x) => {
                    assert!(x >= last - 1e-12, "link {} at t = {t}", s.link);
                    assert!(x >= t + ff - 1e-12);
                    last = x;
                }
                None => break,
            }
        }
    }
    assert!(res.check_invariants(&net).fifo <= 1e-12);
}

#[test]
fn loading_is_deterministic() {
    let net = nguyen();
    let g = grid(70);
    let h = uniform_feasible(g, &net.trips, &net.partition);
    let a = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    let b = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    assert_eq!(a, b);
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    a.write_csv(&net, &mut csv_a).unwrap();
    b.write_csv(&net, &mut csv_b).unwrap();
    assert_eq!(csv_a, csv_b);
}

#[test]
fn drained_leftovers_do_not_strand_late_departures() {
    let net = nguyen();
    let g = grid(70);
    // departures only in the first half, so late lookups sit on the final plateau
    let mut h = light_profile(&net, g, 0.5);
    for p in 0..net.num_paths() {
        for k in 35..70 {
            h.set(p, k, 0.0);
        }
    }
    let mut res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
    assert!(res.drain_tolerance > res.curve_tolerance);
    let exact = path_delay(&res, &net).unwrap();
    // leave a leftover between the counting and drain tolerances on one link
    let i = *net.paths[0].links.last().unwrap();
    let down = &res.links[i].down;
    let cap = down.last() - 0.5 * res.drain_tolerance;
    let lowered = down.values().iter().map(|v| v.min(cap)).collect();
    res.links[i].down = CumulativeCurve::from_samples(down.t0(), down.dt(), lowered);
    let d = path_delay(&res, &net).unwrap();
    assert!((d.get(0, 69) - exact.get(0, 69)).abs() <= g.dt());
    res.drain_tolerance = 0.0;
    assert!(matches!(path_delay(&res, &net), Err(Error::UnfinishedTrip { path: 0, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_profiles_respect_invariants(seed_rates in prop::collection::vec(0.0f64..4000.0, 24 * 25)) {
        let net = nguyen();
        let g = TimeGrid::new(0.0, 1.0, 25).unwrap();
        let h = PathField::from_values(g, 24, seed_rates).unwrap();
        let res = run_dnl(&h, &net, &DnlConfig::default()).unwrap();
        let report = res.check_invariants(&net);
        let tol = 1e-8 * (1.0 + res.total_departed);
        prop_assert!(report.holds(tol), "{:?}", report);
        prop_assert!((res.total_exited() - res.total_departed).abs() <= 1e-6 * res.total_departed.max(1.0));
    }
}
