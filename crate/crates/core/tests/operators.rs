use std::path::PathBuf;

use due_core::dnl::DnlConfig;
use due_core::hilbert::{PathField, TimeGrid};
use due_core::network::load_dir;
use due_core::operators::{
    monotonicity_witness, pseudo_monotone_audit, spectral_norm, AffineOperator, DelayOperator, DnlOperator, SyntheticVi,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ball_point(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    loop {
        let x = [rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)];
        if x[0] * x[0] + x[1] * x[1] <= radius * radius {
            return x;
        }
    }
}

fn identity_vi() -> SyntheticVi<f64> {
    SyntheticVi::affine(&[(2, 2.0)], vec![1.0, 0.0, 0.0, 1.0], vec![-1.0, -1.0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_lipschitz_bound_holds(
        m in prop::collection::vec(-3.0f64..3.0, 16),
        x in prop::collection::vec(-10.0f64..10.0, 4),
        y in prop::collection::vec(-10.0f64..10.0, 4),
    ) {
        let op = AffineOperator::new(m.clone(), vec![0.5; 4]).unwrap();
        let l = op.lipschitz().unwrap();
        let (ax, ay) = (op.apply(&x), op.apply(&y));
        let num: f64 = ax.iter().zip(&ay).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assume!(den > 1e-9);
        prop_assert!(num / den <= l * (1.0 + 1e-9));
        // bounded by the Frobenius norm and below by every column norm
        let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(l <= frob * (1.0 + 1e-12));
        for j in 0..4 {
            let col = (0..4).map(|i| m[i * 4 + j].powi(2)).sum::<f64>().sqrt();
            prop_assert!(l >= col * (1.0 - 1e-9));
        }
    }

    #[test]
    fn symmetric_psd_norm_is_the_largest_eigenvalue(a in 0.0f64..5.0, b in 0.0f64..5.0, c in -2.0f64..2.0) {
        // [[a + d, c], [c, b + d]] with d making it diagonally dominant
        let d = c.abs();
        let m = [a + d, c, c, b + d];
        let tr = m[0] + m[3];
        let det = m[0] * m[3] - c * c;
        let top = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
        prop_assert!((spectral_norm(&m, 2) - top).abs() <= 1e-9 * (1.0 + top));
    }
}

#[test]
fn scaled_operator_is_not_monotone_but_pseudo_monotone() {
    let scaled = identity_vi().scaled().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<_> = (0..200).map(|_| SyntheticVi::point(&scaled.set, &ball_point(&mut rng, 5.0)).unwrap()).collect();
    let (_, _, v) = monotonicity_witness(scaled.operator.as_ref(), &pts).unwrap().expect("a violating pair");
    assert!(v < 0.0);
    let pairs: Vec<_> = (0..10_000)
        .map(|_| {
            let x = SyntheticVi::point(&scaled.set, &ball_point(&mut rng, 5.0)).unwrap();
            let y = SyntheticVi::point(&scaled.set, &ball_point(&mut rng, 5.0)).unwrap();
            (x, y)
        })
        .collect();
    let audit = pseudo_monotone_audit(scaled.operator.as_ref(), &pairs).unwrap();
    assert!(audit.checked > 1000);
    assert!(audit.worst >= -1e-12, "{audit:?}");
    // the base operator has no witness on the same sample
    let base = identity_vi();
    assert!(monotonicity_witness(base.operator.as_ref(), &pts).unwrap().is_none());
}

#[test]
fn scaling_keeps_the_solution() {
    let base = identity_vi();
    let expected = base.solution.clone();
    let scaled = base.scaled().unwrap();
    assert!(scaled.solution.distance(&expected).unwrap() < 1e-12);
    let r = scaled.set.residual(&scaled.solution, 1.0, &scaled.operator.evaluate(&scaled.solution).unwrap()).unwrap();
    assert!(r <= 1e-10);
}

#[test]
fn rotation_solution_matches_a_residual_scan() {
    let rot = SyntheticVi::affine(&[(2, 2.0)], vec![0.0, 1.0, -1.0, 0.0], vec![0.0, 0.0]).unwrap();
    // brute force: the only grid point of the simplex with zero residual
    let mut zeros = Vec::new();
    for i in 0..=2000 {
        let x1 = 2.0 * i as f64 / 2000.0;
        let x = SyntheticVi::point(&rot.set, &[x1, 2.0 - x1]).unwrap();
        let r = rot.set.residual(&x, 1.0, &rot.operator.evaluate(&x).unwrap()).unwrap();
        if r < 1e-9 {
            zeros.push(x1);
        }
    }
    assert_eq!(zeros, vec![0.0]);
    assert!((rot.solution.get(1, 0) - 2.0).abs() < 1e-10);
}

fn nguyen_operator(k: usize) -> DnlOperator<f64> {
    let net = load_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/nguyen")).unwrap();
    DnlOperator::new(net, TimeGrid::new(0.0, 2.0, k).unwrap(), 1.0, DnlConfig::default()).unwrap()
}

#[test]
fn empty_network_costs_are_free_flow_plus_penalty() {
    let op = nguyen_operator(70);
    let net = op.network();
    let g = op.grid();
    let a = op.evaluate(&PathField::zeros(g, net.num_paths())).unwrap();
    for p in 0..net.num_paths() {
        let ff = net.free_flow_time(p);
        let target = net.trips.target(net.partition.od_of(p));
        for k in 0..g.num_intervals() {
            let t = g.midpoint(k);
            let want = ff + (t + ff - target).max(0.0);
            assert!((a.get(p, k) - want).abs() <= 1e-9, "path {p} interval {k}");
        }
    }
}

#[test]
fn dnl_operator_is_deterministic_and_counts_calls() {
    let op = nguyen_operator(70);
    let set = op.feasible_set();
    let h = set.uniform();
    let a = op.evaluate(&h).unwrap();
    let other = nguyen_operator(70);
    let b = other.evaluate(&h).unwrap();
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    // the repeated call is served from the memo but still counted
    let _ = op.evaluate(&h).unwrap();
    assert_eq!((op.evaluations(), op.loads()), (2, 1));
}

#[test]
fn negative_rates_are_clamped() {
    let op = nguyen_operator(70);
    let h = op.feasible_set().uniform();
    let mut shifted = h.clone();
    for (i, v) in shifted.values_mut().iter_mut().enumerate() {
        if i % 5 == 0 {
            *v = -*v;
        }
    }
    let a = op.evaluate(&shifted).unwrap();
    let b = op.evaluate(&shifted.positive_part()).unwrap();
    assert_eq!(a, b);
    let wrong = PathField::zeros(TimeGrid::new(0.0, 2.0, 71).unwrap(), 24);
    assert!(op.evaluate(&wrong).is_err());
}
