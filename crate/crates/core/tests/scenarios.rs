mod common;

use sampleprivacy_core::asymptotics::{c_alpha_zero, capacity_scan, j_value, private_information, LeakageMode};
use sampleprivacy_core::closed_form::{
    modular_chain_construct, modular_sum_construct, partition_construct, two_binary_solve, TwoBinaryParams,
};
use sampleprivacy_core::engine::{
    assemble_mapping, check_feasibility, conditional_entropy_bound, disclosure_upper_bound, self_disclosure,
    solve_capacity, DisclosureMapping, DEFAULT_CAP,
};
use sampleprivacy_core::geometry::build_constraint_matrix;
use sampleprivacy_core::heuristics::{
    partial_processing, preprocess_chain, uniformize, uniformizer_crossover,
};
use sampleprivacy_core::oracle::{
    brute_force_capacity, brute_force_capacity_float, exact_extreme_points, rational_from_f64, verify_mapping,
    ExactScenario,
};
use sampleprivacy_core::prob::{
    binary_entropy, build_observation_scenario, entropy_in, observation_scenario, shannon_entropy,
};
use sampleprivacy_core::{Channel, DiscreteScenario, Error, Pmf};

use common::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn two_coins(latent: Channel) -> DiscreteScenario {
    let support = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
    DiscreteScenario::new(vec![2, 2], support, Pmf::uniform(4), latent).unwrap()
}

fn xor() -> DiscreteScenario {
    two_coins(Channel::deterministic(2, &[0, 1, 1, 0]).unwrap())
}

fn example1() -> DiscreteScenario {
    observation_scenario(&Pmf::uniform(2), &[Channel::bsc(2.0 / 3.0).unwrap(), Channel::bec(0.5).unwrap()]).unwrap()
}

fn table1_setting() -> (Pmf, Channel) {
    (Pmf::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(), Channel::bsc(0.1).unwrap())
}

fn iid_bits(q: f64, n: usize) -> DiscreteScenario {
    let obs = Channel::from_columns(&[vec![1.0 - q, q]]).unwrap();
    build_observation_scenario(&Pmf::uniform(1), &obs, n).unwrap().self_scenario()
}

#[test]
fn entropy_units() {
    let p = Pmf::uniform(4);
    assert!(close(entropy_in(&p, true), 2.0, 1e-15));
    assert!(close(entropy_in(&p, false), 4f64.ln(), 1e-15));
}

#[test]
fn feasibility_examples() {
    let latent = random_channel(&mut rng(1), 2, 4);
    for r in [0.0, 0.5] {
        let s = TwoBinaryParams::new(0.5, 0.5, r).unwrap().scenario(&latent).unwrap();
        assert!(!check_feasibility(&s));
    }
    assert!(check_feasibility(&xor()));
    assert!(!check_feasibility(&two_coins(Channel::deterministic(1, &[0, 0, 0, 0]).unwrap())));
}

#[test]
fn upper_bound_examples() {
    let (s, _) = modular_sum_construct(3, 1).unwrap();
    assert!(close(disclosure_upper_bound(&s), 3f64.log2(), 1e-12));
    let independent = two_coins(Channel::from_columns(&vec![vec![0.3, 0.7]; 4]).unwrap());
    assert!(close(disclosure_upper_bound(&independent), 0.0, 1e-12));
    assert!(disclosure_upper_bound(&example1()) >= 0.0134);
}

#[test]
fn xor_and_table_capacity() {
    assert!(close(solve_capacity(&xor(), None, DEFAULT_CAP).unwrap().capacity, 1.0, 1e-9));
    let (p_w, obs) = table1_setting();
    let s = build_observation_scenario(&p_w, &obs, 2).unwrap();
    assert!(close(solve_capacity(&s, None, DEFAULT_CAP).unwrap().capacity, 8.34e-3, 5e-5));
}

#[test]
fn truncated_enumeration_is_an_error() {
    let (p_w, obs) = table1_setting();
    let s = build_observation_scenario(&p_w, &obs, 4).unwrap();
    assert!(matches!(
        solve_capacity(&s, None, 10),
        Err(Error::TruncatedEnumeration { cap: 10, .. })
    ));
}

#[test]
fn single_vertex_gives_constant_output() {
    let p = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
    let m = assemble_mapping(core::slice::from_ref(&p), &[1.0], &p).unwrap();
    assert_eq!(m.y_cardinality(), 1);
    assert!(m.cond_y_given_dataset().row(0).iter().all(|&v| close(v, 1.0, 1e-15)));
}

#[test]
fn assemble_rejects_mismatched_marginal() {
    let p = Pmf::new(vec![0.5, 0.5]).unwrap();
    let v = Pmf::new(vec![1.0, 0.0]).unwrap();
    assert!(assemble_mapping(core::slice::from_ref(&v), &[1.0], &p).is_err());
    assert!(assemble_mapping(&[v], &[0.5, 0.5], &p).is_err());
}

#[test]
fn self_disclosure_examples() {
    let two = iid_bits(0.5, 2);
    let sd = self_disclosure(&two, DEFAULT_CAP).unwrap();
    assert!(close(sd.report.capacity, 1.0, 1e-9));
    assert!(close(sd.efficiency, 0.5, 1e-9));
    assert!(close(brute_force_capacity_float(&two, usize::MAX).unwrap(), 1.0, 1e-9));

    let three = self_disclosure(&iid_bits(0.5, 3), DEFAULT_CAP).unwrap();
    assert!(close(three.report.capacity, 2.0, 1e-9));
    assert!(close(three.efficiency, three.efficiency_bound, 1e-9));

    let single = iid_bits(0.3, 1);
    assert!(close(self_disclosure(&single, DEFAULT_CAP).unwrap().report.capacity, 0.0, 1e-12));
}

#[test]
fn conditional_entropy_bound_examples() {
    let b = conditional_entropy_bound(&xor());
    assert!(close(b.rank_bound, 3f64.log2(), 1e-12));
    assert!(close(conditional_entropy_bound(&example1()).rank_bound, 2.0, 1e-12));
    let one = iid_bits(0.3, 1);
    let b = conditional_entropy_bound(&one);
    assert!(close(b.rank_bound, 1.0, 1e-12) && close(b.alphabet_bound, 1.0, 1e-12));
}

#[test]
fn two_binary_examples() {
    let params = TwoBinaryParams::new(0.5, 0.5, 0.25).unwrap();
    let rep = two_binary_solve(&params, &Channel::deterministic(2, &[0, 1, 1, 0]).unwrap()).unwrap();
    assert!(close(rep.capacity, 1.0, 1e-12));
    let rows = rep.mapping.cond_y_given_dataset().rows();
    let mut expected = vec![vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]];
    let mut got = rows.clone();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, expected);

    let params = TwoBinaryParams::new(0.4, 0.5, 0.1).unwrap();
    let mut r = rng(2);
    for _ in 0..10 {
        let latent = random_channel(&mut r, 3, 4);
        let closed = two_binary_solve(&params, &latent).unwrap();
        let lp = solve_capacity(&params.scenario(&latent).unwrap(), None, DEFAULT_CAP).unwrap();
        assert!(close(closed.capacity, lp.capacity, 1e-8));
    }
    assert!(TwoBinaryParams::new(0.4, 0.5, 0.45).is_err());
}

#[test]
fn two_binary_matches_brute_force() {
    let mut r = rng(8);
    for _ in 0..30 {
        let alpha = q(rand::Rng::gen_range(&mut r, 1..10), 10);
        let beta = q(rand::Rng::gen_range(&mut r, 1..10), 10);
        let a = sampleprivacy_core::oracle::rational_to_f64(&alpha);
        let b = sampleprivacy_core::oracle::rational_to_f64(&beta);
        let lo = (a - b).max(0.0);
        let hi = a.min(1.0 - b);
        if hi - lo < 0.05 {
            continue;
        }
        let params = TwoBinaryParams::new(a, b, (lo + hi) / 2.0).unwrap();
        let latent = random_channel(&mut r, 2, 4);
        let s = params.scenario(&latent).unwrap();
        let bf = brute_force_capacity_float(&s, usize::MAX).unwrap();
        assert!(close(two_binary_solve(&params, &latent).unwrap().capacity, bf, 1e-8));
    }
}

#[test]
fn modular_examples() {
    for (m, k, expected) in [(2, 1, 1.0), (3, 1, 3f64.log2()), (2, 2, 1.0)] {
        let (s, map) = modular_sum_construct(m, k).unwrap();
        assert!(close(map.information(&s), expected, 1e-12));
        assert!(map.residuals(&s).iter().all(|&d| d <= 1e-12));
        assert!(map.p_y().probs().iter().all(|&p| close(p, 1.0 / m as f64, 1e-12)));
    }
    let whole = modular_chain_construct(2, 2, 2, 0).unwrap();
    assert!(close(whole.information, 0.0, 1e-12));
    let pairs = modular_chain_construct(4, 2, 2, 0).unwrap();
    assert_eq!(pairs.window_residuals().len(), 3);
    assert!(pairs.window_residuals().iter().all(|&d| d <= 1e-12));
    assert!(pairs.information >= pairs.lower_bound - 1e-12);
    assert!(modular_chain_construct(2, 3, 2, 0).is_err());
}

#[test]
fn modular_chain_release_is_reproducible() {
    let mut a = modular_chain_construct(4, 2, 3, 7).unwrap();
    let mut b = modular_chain_construct(4, 2, 3, 7).unwrap();
    for x in [[0, 1, 2, 0], [2, 2, 1, 1]] {
        let y = a.release(&x);
        assert_eq!(y, b.release(&x));
        assert_eq!(y.len(), 3);
    }
}

#[test]
fn partition_examples() {
    let mut last = 0.0;
    for k in 2..=8 {
        let p = partition_construct(k).unwrap();
        assert!(close(p.information, (k as f64).log2(), 1e-12));
        assert!(p.mapping.residuals(&p.scenario).iter().all(|&d| d <= 1e-12));
        assert!(p.information > last);
        last = p.information;
    }
}

#[test]
fn private_information_examples() {
    let cols = [[0.5, 0.25, 0.25], [0.5, 0.25, 0.25], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
    let joint: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|v| v / 3.0).collect()).collect();
    let pi = private_information(&joint).unwrap();
    assert_eq!(pi.w_tilde_size, 2);
    assert_eq!(pi.grouping[0], pi.grouping[1]);
    assert!(close(pi.c_x_w, binary_entropy(1.0 / 3.0), 1e-12));

    let distinct = random_joint(&mut rng(9), 3, 2);
    let pi = private_information(&distinct).unwrap();
    let pw: Vec<f64> = distinct.iter().map(|r| r.iter().sum()).collect();
    assert_eq!(pi.w_tilde_size, 3);
    assert!(close(pi.c_x_w, shannon_entropy(&pw), 1e-12));
}

#[test]
fn zero_leakage_examples() {
    // X = W: nothing private remains once X is known.
    let identity = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
    for mode in [LeakageMode::OutputPerturbation, LeakageMode::FullData] {
        assert!(close(c_alpha_zero(&identity, mode, DEFAULT_CAP).unwrap(), 0.0, 1e-12));
    }
    // W̃ a function of X through an erasure-free two-to-one map.
    let function = vec![vec![0.25, 0.25, 0.0], vec![0.0, 0.0, 0.5]];
    for mode in [LeakageMode::OutputPerturbation, LeakageMode::FullData] {
        assert!(close(c_alpha_zero(&function, mode, DEFAULT_CAP).unwrap(), 0.0, 1e-12));
    }
    let (p_w, obs) = table1_setting();
    let joint: Vec<Vec<f64>> = (0..2).map(|w| (0..2).map(|x| p_w.probs()[w] * obs.get(x, w)).collect()).collect();
    let c1 = c_alpha_zero(&joint, LeakageMode::OutputPerturbation, DEFAULT_CAP).unwrap();
    let c2 = c_alpha_zero(&joint, LeakageMode::FullData, DEFAULT_CAP).unwrap();
    let h = private_information(&joint).unwrap().conditional_entropy;
    assert!(c1 <= c2 + 1e-9 && c2 <= h + 1e-9);
}

#[test]
fn bridge_quantity_examples() {
    let (p_w, obs) = table1_setting();
    let joint: Vec<Vec<f64>> = (0..2).map(|w| (0..2).map(|x| p_w.probs()[w] * obs.get(x, w)).collect()).collect();
    let c2 = c_alpha_zero(&joint, LeakageMode::FullData, DEFAULT_CAP).unwrap();
    assert!(close(j_value(&p_w, &obs, 1, DEFAULT_CAP).unwrap(), c2, 1e-9));
    let independent = Channel::from_columns(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
    for n in 1..=3 {
        assert_eq!(j_value(&p_w, &independent, n, DEFAULT_CAP).unwrap(), 0.0);
    }
    // I_s never exceeds J.
    for n in 2..=3 {
        let s = build_observation_scenario(&p_w, &obs, n).unwrap();
        let is = solve_capacity(&s, None, DEFAULT_CAP).unwrap().capacity;
        assert!(is <= j_value(&p_w, &obs, n, DEFAULT_CAP).unwrap() + 1e-9);
    }
}

#[test]
fn capacity_scan_reproduces_table() {
    let (p_w, obs) = table1_setting();
    let scan = capacity_scan(&p_w, &obs, 4, DEFAULT_CAP).unwrap();
    let caps: Vec<f64> = scan.rows.iter().map(|r| r.capacity.unwrap()).collect();
    assert!(close(caps[1], 8.34e-3, 5e-5));
    assert!(close(caps[2], 4.88e-2, 5e-4));
    assert!(close(caps[3], 4.47e-2, 5e-4));
    assert!(scan.rows.windows(2).all(|w| w[1].mutual_information >= w[0].mutual_information));
    assert!(scan.rows.iter().all(|r| r.mutual_information <= scan.private_information + 1e-12));
    assert!(scan.rows.iter().all(|r| r.capacity.unwrap() <= r.upper_bound + 1e-9));
    assert_eq!(scan.truncated_at, None);

    let short = capacity_scan(&p_w, &obs, 4, 100).unwrap();
    assert_eq!(short.truncated_at, Some(4));
    assert!(short.rows[3].capacity.is_none());
}

#[test]
fn partial_processing_examples() {
    let rep = partial_processing(&iid_bits(0.5, 4), 2, DEFAULT_CAP).unwrap();
    assert!(rep.per_window_terms.iter().all(|&t| close(t, 1.0, 1e-9)));
    assert!(close(rep.total_information, 3.0, 1e-9));
    assert!(close(rep.efficiency, 0.75, 1e-9));
    assert_eq!(rep.private, Some(true));

    let mut curve = Vec::new();
    for q in [0.02, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let s = iid_bits(q, 4);
        let r = partial_processing(&s, 2, DEFAULT_CAP).unwrap();
        assert!(r.residuals().unwrap().iter().all(|&d| d <= 1e-9));
        // Asymptotic efficiency form for i.i.d. inputs.
        let h1 = binary_entropy(q);
        let predicted = 3.0 * r.per_window_terms[0] / (4.0 * h1);
        assert!(close(r.efficiency, predicted, 1e-9));
        curve.push(r.total_information);
    }
    assert!(curve[0] < 0.2);
    assert!(curve.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn wider_windows_can_leak() {
    // Overlapping windows of three samples share two of them; the combined
    // release is then correlated with individual samples.
    let rep = partial_processing(&iid_bits(0.3, 4), 3, DEFAULT_CAP).unwrap();
    assert_eq!(rep.private, Some(false));
    assert!(rep.residuals().unwrap().iter().any(|&d| d > 1e-3));
}

#[test]
fn partial_processing_requires_independence() {
    let (p_w, obs) = table1_setting();
    let s = build_observation_scenario(&p_w, &obs, 3).unwrap();
    assert!(matches!(partial_processing(&s, 2, DEFAULT_CAP), Err(Error::NotIndependent(_))));
    assert!(partial_processing(&iid_bits(0.5, 3), 1, DEFAULT_CAP).is_err());
}

#[test]
fn uniformizer_examples() {
    assert!(close(uniformizer_crossover(0.5), 0.0, 1e-15));
    assert_eq!(uniformize(0.5).unwrap(), Channel::identity(2));
    assert!(close(uniformizer_crossover(0.3), 2.0 / 7.0, 1e-15));
    let out = uniformize(0.2).unwrap().apply(&[0.8, 0.2]);
    assert!(close(out[0], 0.5, 1e-15));
    assert!(uniformize(0.0).is_err() && uniformize(0.6).is_err());
}

#[test]
fn preprocessing_examples() {
    for n in 2..=5 {
        assert!(close(preprocess_chain(0.5, n).unwrap().total_information, (n - 1) as f64, 1e-12));
    }
    let pair = preprocess_chain(0.3, 2).unwrap();
    assert!(close(pair.total_information, pair.enumerated_information.unwrap(), 1e-10));
    let three = preprocess_chain(0.25, 3).unwrap();
    assert!(three.residuals().unwrap().iter().all(|&d| d <= 1e-12));
    assert_eq!(three.private, Some(true));
}

#[test]
fn verification_examples() {
    let s = example1();
    let rep = solve_capacity(&s, None, DEFAULT_CAP).unwrap();
    let v = verify_mapping(&s, &rep.mapping, 1e-12).unwrap();
    assert!(v.passed && v.per_sample_tv.iter().all(|&d| d <= 1e-12));

    let constant = DisclosureMapping::from_forward(s.p_dataset(), &Channel::deterministic(1, &[0; 6]).unwrap()).unwrap();
    assert!(verify_mapping(&s, &constant, 1e-12).unwrap().passed);
    assert!(close(constant.information(&s), 0.0, 1e-12));

    let map: Vec<usize> = s.support().iter().map(|x| x[0]).collect();
    let leak = DisclosureMapping::from_forward(s.p_dataset(), &Channel::deterministic(2, &map).unwrap()).unwrap();
    let v = verify_mapping(&s, &leak, 1e-9).unwrap();
    assert!(!v.passed && v.per_sample_tv[0] > 0.1);

    let other = two_coins(Channel::identity(4));
    assert!(matches!(verify_mapping(&other, &rep.mapping, 1e-9), Err(Error::DimensionMismatch(_))));
}

#[test]
fn exact_vertex_examples() {
    let s = TwoBinaryParams::new(0.5, 0.5, 0.25).unwrap().scenario(&Channel::identity(4)).unwrap();
    let p = build_constraint_matrix(&s, &[]).unwrap();
    let px: Vec<_> = s.p_dataset().probs().iter().map(|&v| rational_from_f64(v).unwrap()).collect();
    let v = exact_extreme_points(&p, &px).unwrap();
    let mut expected = vec![
        vec![q(0, 1), q(1, 2), q(1, 2), q(0, 1)],
        vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)],
    ];
    expected.sort();
    assert_eq!(v.points, expected);

    let single = iid_bits(0.25, 1);
    let p = build_constraint_matrix(&single, &[]).unwrap();
    let px = vec![q(3, 4), q(1, 4)];
    assert_eq!(exact_extreme_points(&p, &px).unwrap().points, vec![px]);
}

#[test]
fn brute_force_examples() {
    let s = ExactScenario::from_float(&xor()).unwrap();
    assert!(close(brute_force_capacity(&s, usize::MAX).unwrap(), 1.0, 1e-12));
    let e = example1();
    assert!(close(
        brute_force_capacity_float(&e, usize::MAX).unwrap(),
        solve_capacity(&e, None, DEFAULT_CAP).unwrap().capacity,
        1e-6
    ));
    let big = build_observation_scenario(&table1_setting().0, &table1_setting().1, 3).unwrap();
    assert!(matches!(brute_force_capacity_float(&big, 4), Err(Error::BudgetExceeded(_))));
}
