use proptest::prelude::*;

use critwalk::cluster::{cluster_size_laplace, sample_conditioned_cluster, sample_uniform_tree};
use critwalk::continuum::{crt_pseudometric, line_breaking, sample_excursion};
use critwalk::harness::stats::ks_two_sample;
use critwalk::infinite::sample_envelope;
use critwalk::rng::rng_from_seed;
use critwalk::stoch::{inverse_gaussian_laplace, psi_epsilon, AtomicMeasure, SubordinatorPath};
use critwalk::tree::{graph_distance, reduce, search_depth, tree_from_search_depth, OrderedRootedTree};
use critwalk::walk::{expected_exit_time_exact, project_walk, rtrw, walk, ConstantLandscape, Domain};

fn tree(seed: u64, n: usize, uniform: bool) -> OrderedRootedTree {
    let mut rng = rng_from_seed(seed);
    if uniform {
        sample_uniform_tree(n, &mut rng).unwrap()
    } else {
        sample_conditioned_cluster(n, &mut rng).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codec_round_trip(seed in any::<u64>(), n in 1usize..400, uniform in any::<bool>()) {
        let t = tree(seed, n, uniform);
        let curve = search_depth(&t);
        prop_assert_eq!(curve.values.len(), 2 * n + 1);
        prop_assert!(curve.values.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
        prop_assert_eq!(tree_from_search_depth(&curve).unwrap(), t.clone());
        prop_assert_eq!(OrderedRootedTree::from_parens(&t.to_parens()).unwrap(), t);
    }

    #[test]
    fn exit_time_equals_size(seed in any::<u64>(), n in 1usize..300, uniform in any::<bool>()) {
        let t = tree(seed, n, uniform);
        prop_assert!((expected_exit_time_exact(&t) - n as f64).abs() < 1e-9 * n as f64);
    }

    #[test]
    fn reduction_and_projection(seed in any::<u64>(), n in 2usize..300, k in 1usize..5, steps in 0usize..500) {
        let t = tree(seed, n, true);
        let mut rng = rng_from_seed(seed ^ 1);
        let anchors: Vec<usize> = (0..k).map(|i| (seed as usize).wrapping_add(i * 7919) % n).collect();
        let idx = reduce(&t, &anchors).unwrap();
        for &a in &anchors {
            prop_assert_eq!(idx.project(a), a);
        }
        for v in idx.members() {
            prop_assert_eq!(idx.project(v), v);
        }
        let p = walk(&t.adjacency(), steps, &mut rng);
        let proj = project_walk(&p, &idx).unwrap();
        for w in proj.windows(2) {
            prop_assert!(graph_distance(&t, w[0] as usize, w[1] as usize).unwrap() <= 1);
        }
    }

    #[test]
    fn graph_distance_is_a_metric(seed in any::<u64>(), n in 1usize..200, a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
        let t = tree(seed, n, false);
        let (a, b, c) = (a % n, b % n, c % n);
        let d = |x, y| graph_distance(&t, x, y).unwrap();
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert_eq!(d(a, a), 0);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        prop_assert_eq!(d(0, a), t.depth(a));
    }

    #[test]
    fn cluster_transform_is_a_laplace_transform(p in 0.01f64..=0.5, l1 in 0.0f64..10.0, dl in 0.0f64..10.0) {
        prop_assert!((cluster_size_laplace(p, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let a = cluster_size_laplace(p, l1).unwrap();
        let b = cluster_size_laplace(p, l1 + dl).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn inverse_gaussian_transform_decreases(delta in 0.1f64..3.0, gamma in 0.0f64..3.0, t in 0.0f64..3.0, l in 0.0f64..5.0) {
        prop_assert!((inverse_gaussian_laplace(delta, gamma, t, 0.0) - 1.0).abs() < 1e-12);
        let a = inverse_gaussian_laplace(delta, gamma, t, l);
        prop_assert!(a <= 1.0 && a > 0.0);
        prop_assert!(inverse_gaussian_laplace(delta, gamma, t, l + 1.0) <= a);
    }

    #[test]
    fn psi_is_a_laplace_exponent(xs in prop::collection::vec(0.0f64..1e4, 1..200), eps in 0.01f64..0.5) {
        let lambdas: Vec<f64> = (0..8).map(|i| 0.25 * i as f64).collect();
        let c = psi_epsilon(&xs, eps, &lambdas).unwrap();
        prop_assert_eq!(c[0].1, 0.0);
        for w in c.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
        for w in c.windows(3) {
            prop_assert!(w[2].1 - w[1].1 <= w[1].1 - w[0].1 + 1e-9);
        }
    }

    #[test]
    fn subordinator_paths_are_monotone(
        atoms in prop::collection::vec((0.001f64..10.0, 0.0f64..2.0), 0..40),
        drift in 0.0f64..2.0,
        ts in prop::collection::vec(0.0f64..10.0, 2..20),
    ) {
        let m = AtomicMeasure::from_atoms(atoms.clone()).unwrap();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        prop_assert!((m.total_mass() - total).abs() < 1e-9);
        prop_assert!((m.mass_in(0.0, 5.0) + m.mass_in(5.0, 10.0) - total).abs() < 1e-9);
        let path = SubordinatorPath::new(drift, m, 10.0).unwrap();
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        for w in ts.windows(2) {
            prop_assert!(path.value(w[0]) <= path.value(w[1]));
        }
        for &x in &ts {
            if let Some(s) = path.inverse(x) {
                prop_assert!(path.value(s) >= x - 1e-9);
            }
        }
    }

    #[test]
    fn envelope_is_nonincreasing(seed in any::<u64>(), lo in 0.01f64..1.0, span in 0.1f64..10.0) {
        let e = sample_envelope(lo, lo + span, &mut rng_from_seed(seed)).unwrap();
        let xs: Vec<f64> = (0..=50).map(|i| lo + span * i as f64 / 50.0).collect();
        for w in xs.windows(2) {
            prop_assert!(e.value(w[1]) <= e.value(w[0]));
        }
        prop_assert!(e.value(lo + span) > 0.0);
    }

    #[test]
    fn line_breaking_trees(seed in any::<u64>(), k in 1usize..8) {
        let sk = line_breaking(k, &mut rng_from_seed(seed)).unwrap();
        sk.validate().unwrap();
        prop_assert_eq!(sk.leaf_count(), k);
        prop_assert!(sk.total_length() > 0.0);
        let leaves: Vec<usize> = (0..k).map(|i| sk.leaf_node(i).unwrap()).collect();
        for &a in &leaves {
            for &b in &leaves {
                prop_assert!(sk.distance(a, b) <= sk.height(a) + sk.height(b) + 1e-12);
            }
        }
    }

    #[test]
    fn excursion_metric_is_a_tree_metric(seed in any::<u64>(), i in 0usize..=256, j in 0usize..=256, l in 0usize..=256) {
        let w = sample_excursion(256, &mut rng_from_seed(seed)).unwrap();
        let d = |a, b| crt_pseudometric(&w, a, b).unwrap();
        prop_assert!(d(i, j) >= 0.0);
        prop_assert!((d(i, j) - d(j, i)).abs() < 1e-12);
        prop_assert!(d(i, l) <= d(i, j) + d(j, l) + 1e-12);
    }

    #[test]
    fn ks_is_a_symmetric_distance(a in prop::collection::vec(-10.0f64..10.0, 1..60), b in prop::collection::vec(-10.0f64..10.0, 1..60)) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert!((ab.distance - ba.distance).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.distance));
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap().distance, 0.0);
    }

    #[test]
    fn trapped_walk_moves_by_unit_steps(seed in any::<u64>(), c in 0.5f64..3.0, horizon in 1.0f64..500.0) {
        let tr = rtrw(&mut ConstantLandscape(c), horizon, Domain::HalfLine, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(tr.sites.iter().all(|&s| s >= 0));
        prop_assert!(tr.sites.windows(2).all(|w| (w[0] - w[1]).abs() == 1));
        prop_assert!(tr.departures.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*tr.departures.last().unwrap() > horizon);
    }
}
