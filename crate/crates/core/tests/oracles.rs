use std::cmp::Ordering;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flg_core::classes::{class_set, mns, mns_bruteforce};
use flg_core::client_eq::{
    all_rounded_assignments, favoring_profile, greedy_weighted_equilibrium, is_rounded, rounded_profile,
};
use flg_core::flow::{max_cost_flow, max_cost_flow_bruteforce, max_flow, min_cut_bruteforce, FlowNetwork};
use flg_core::game::{
    facility_loads, pi_loads, shopping_range, verify_client_equilibrium, HostGraph, Instance, Permutation, Placement,
};
use flg_core::instances::{random_instance, random_placement, RandomSpec};
use flg_core::scalar::lex_cmp;
use flg_core::Scalar;

fn setup(seed: u64, n: usize, k: usize, weighted: bool, restricted: bool) -> (Instance, Placement, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpec { n, k, density: 0.3, weighted, restricted };
    let inst = random_instance(&spec, &mut rng).unwrap();
    let s = random_placement(&inst, &mut rng);
    (inst, s, rng)
}

fn random_pi(k: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    Permutation::new(order).unwrap()
}

fn relabel(inst: &Instance, s: &Placement, perm: &[usize]) -> (Instance, Placement) {
    let n = inst.n();
    let mut weights = vec![Scalar::int(0); n];
    let mut labels = vec![String::new(); n];
    for v in 0..n {
        weights[perm[v]] = inst.graph.weight(v).clone();
        labels[perm[v]] = inst.graph.label(v).to_string();
    }
    let mut g = HostGraph::new(weights, Some(labels)).unwrap();
    for (a, b) in inst.graph.arcs() {
        g.add_arc(perm[a], perm[b]).unwrap();
    }
    let allowed = inst.allowed_sets().iter().map(|set| set.iter().map(|&v| perm[v]).collect()).collect();
    (Instance::new(g, allowed).unwrap(), Placement(s.0.iter().map(|&v| perm[v]).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mns_agrees_with_bruteforce(seed in any::<u64>(), n in 1usize..=9, k in 1usize..=5, weighted in any::<bool>()) {
        let (inst, s, mut rng) = setup(seed, n, k, weighted, false);
        let mut fstar: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.7)).collect();
        if fstar.is_empty() {
            fstar.push(rng.gen_range(0..k));
        }
        let vstar: Vec<usize> = (0..n).collect();
        prop_assert_eq!(mns(&inst, &s, &fstar, &vstar).unwrap(), mns_bruteforce(&inst, &s, &fstar, &vstar).unwrap());
    }

    #[test]
    fn class_set_invariants(seed in any::<u64>(), n in 1usize..=9, k in 1usize..=4, weighted in any::<bool>(), restricted in any::<bool>()) {
        let (inst, s, _) = setup(seed, n, k, weighted, restricted);
        let cs = class_set(&inst, &s).unwrap();
        let loads = cs.loads();
        prop_assert!(loads.windows(2).all(|w| w[0] < w[1]));
        let mut facilities: Vec<usize> = cs.classes.iter().flat_map(|c| c.facilities.clone()).collect();
        facilities.sort();
        prop_assert_eq!(facilities, (0..k).collect::<Vec<_>>());
        for (i, c) in cs.classes.iter().enumerate() {
            let w: Scalar = c.clients.iter().map(|&v| inst.graph.weight(v)).sum();
            prop_assert_eq!(&c.load, &(w / Scalar::int(c.facilities.len() as i64)));
            for &v in &c.clients {
                let range = shopping_range(&inst, &s, v).unwrap();
                prop_assert!(range.iter().all(|&f| cs.class_of_facility[f] >= i));
                prop_assert!(range.iter().any(|&f| cs.class_of_facility[f] == i));
            }
        }
        for v in 0..n {
            let covered = !shopping_range(&inst, &s, v).unwrap().is_empty();
            prop_assert_eq!(covered, cs.class_of_client[v].is_some());
        }
    }

    #[test]
    fn class_loads_ignore_vertex_ids(seed in any::<u64>(), n in 1usize..=8, k in 1usize..=4, weighted in any::<bool>()) {
        let (inst, s, mut rng) = setup(seed, n, k, weighted, true);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (inst2, s2) = relabel(&inst, &s, &perm);
        let a = class_set(&inst, &s).unwrap();
        let b = class_set(&inst2, &s2).unwrap();
        prop_assert_eq!(a.loads(), b.loads());
        for f in 0..k {
            prop_assert_eq!(a.facility_load(f), b.facility_load(f));
        }
    }

    #[test]
    fn rounded_profiles_share_sorted_loads(seed in any::<u64>(), n in 1usize..=10, k in 1usize..=4) {
        let (inst, s, mut rng) = setup(seed, n, k, false, false);
        let cs = class_set(&inst, &s).unwrap();
        let r = rounded_profile(&inst, &s, &cs).unwrap();
        prop_assert!(is_rounded(&inst, &s, &cs, &r));
        let base = facility_loads(&inst, &s, &r.to_profile(k)).unwrap();
        for _ in 0..3 {
            let pi = random_pi(k, &mut rng);
            let a = favoring_profile(&inst, &s, &pi).unwrap();
            prop_assert!(is_rounded(&inst, &s, &cs, &a));
            let sigma = a.to_profile(k);
            prop_assert!(verify_client_equilibrium(&inst, &s, &sigma).unwrap().is_ok());
            prop_assert_eq!(&facility_loads(&inst, &s, &sigma).unwrap().sorted, &base.sorted);
        }
    }

    #[test]
    fn favoring_is_lexicographic_maximum(seed in any::<u64>(), n in 1usize..=7, k in 1usize..=3) {
        let (inst, s, mut rng) = setup(seed, n, k, false, false);
        let cs = class_set(&inst, &s).unwrap();
        let all = all_rounded_assignments(&inst, &s, &cs, 8).unwrap();
        let pi = random_pi(k, &mut rng);
        let key = |a: &flg_core::PureAssignment| {
            pi_loads(&facility_loads(&inst, &s, &a.to_profile(k)).unwrap(), &pi).unwrap()
        };
        let best = all.iter().map(key).max_by(|x, y| lex_cmp(x, y)).unwrap();
        let got = key(&favoring_profile(&inst, &s, &pi).unwrap());
        prop_assert_eq!(lex_cmp(&got, &best), Ordering::Equal);
    }

    #[test]
    fn greedy_is_an_equilibrium(seed in any::<u64>(), n in 1usize..=10, k in 1usize..=4, restricted in any::<bool>()) {
        let (inst, s, _) = setup(seed, n, k, true, restricted);
        let a = greedy_weighted_equilibrium(&inst, &s).unwrap();
        prop_assert!(verify_client_equilibrium(&inst, &s, &a.to_profile(k)).unwrap().is_ok());
    }

    #[test]
    fn flow_kernel_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = rng.gen_range(2..=5);
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1);
        for _ in 0..rng.gen_range(0..=8) {
            let a = rng.gen_range(0..nodes - 1);
            let b = rng.gen_range(1..nodes);
            if a != b {
                net.add_arc(a, b, rng.gen_range(0..=2i64), BigInt::from(rng.gen_range(-3..=3)));
            }
        }
        let mf = max_flow(&net).unwrap();
        prop_assert_eq!(mf.value, min_cut_bruteforce(&net).unwrap());
        prop_assert_eq!(net.cut_capacity(&mf.source_side), mf.value);
        // The cost kernel requires no positive-cost cycle; keep only forward arcs.
        let mut dag = FlowNetwork::new(nodes, 0, nodes - 1);
        for a in net.arcs.iter().filter(|a| a.from < a.to) {
            dag.add_arc(a.from, a.to, a.cap, a.cost.clone());
        }
        let mc = max_cost_flow(&dag).unwrap();
        prop_assert_eq!((mc.value, mc.cost), max_cost_flow_bruteforce(&dag, 1 << 20).unwrap());
    }
}
