use std::collections::BTreeMap;

use fockforge::exact::Probability;
use fockforge::fock::C64;
use fockforge::stabilizer::{
    detects_errors, ghz_state, graph_stabilizers, graph_state, is_stabilized, qpc_codewords,
    ring_edges, Pauli,
};
use fockforge::zx::fixtures::*;
use fockforge::zx::*;

fn metrics(d: &ZXDiagram) -> SchemeMetrics {
    scheme_metrics(&extract_scheme(d).unwrap(), &Boosting::new()).unwrap()
}

fn p(num: i128, den: i128) -> Probability {
    Probability::ratio(num, den)
}

fn same(a: &[C64], b: &[C64]) -> bool {
    equal_up_to_scalar(a, b, 1e-9)
}

/// Rows of an encoder tensor: the image of each input basis state.
fn images(t: &[C64], inputs: usize) -> Vec<Vec<C64>> {
    let rows = 1 << inputs;
    t.chunks(t.len() / rows).map(<[C64]>::to_vec).collect()
}

#[test]
fn ghz4_family_probabilities() {
    assert_eq!(metrics(&ghz4_bell_seeds().unwrap()).success_probability, p(1, 8));
    assert_eq!(metrics(&ghz4_fusion_tree().unwrap()).success_probability, p(1, 8));
    let m = metrics(&ghz4_two_seeds().unwrap());
    assert_eq!(m.success_probability, p(1, 2));
    assert_eq!(m.seed_inventory, BTreeMap::from([(3, 2)]));
    let a = metrics(&ghz4_bell_seeds().unwrap());
    assert_eq!(a.seed_inventory, BTreeMap::from([(2, 4)]));
    assert!(a.fully_loss_detecting);
}

#[test]
fn ghz4_family_tensors() {
    let ghz = ghz_state(4);
    for f in [ghz4_bell_seeds, ghz4_fusion_tree, ghz4_two_seeds] {
        assert!(same(&to_tensor(&f().unwrap()).unwrap(), &ghz));
    }
}

#[test]
fn analyser_and_fusion_tree_are_one_device() {
    let a = physical_network(&extract_scheme(&ghz4_bell_seeds().unwrap()).unwrap()).unwrap();
    let b = physical_network(&extract_scheme(&ghz4_fusion_tree().unwrap()).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = physical_network(&extract_scheme(&ghz4_two_seeds().unwrap()).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn ring_fixture_metrics() {
    let m = metrics(&ring6_fusions().unwrap());
    assert_eq!(m.success_probability, p(1, 8));
    assert!(!m.fully_loss_detecting);
    let s = extract_scheme(&ring6_fusions().unwrap()).unwrap();
    let witness = check_full_loss_detection(&s).witness.unwrap();
    assert!(witness.last().unwrap().starts_with("out"));

    assert_eq!(metrics(&ring6_bent().unwrap()).success_probability, p(1, 64));

    let m = metrics(&ring6_chain().unwrap());
    assert_eq!(m.success_probability, p(1, 64));
    assert!(m.fully_loss_detecting);
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 5), (3, 1)]));

    let m = metrics(&ring6_bell_seeds().unwrap());
    assert_eq!(m.success_probability, p(1, 128));
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 7)]));
    assert_eq!(m.photon_count, 14);
}

#[test]
fn ring_tensors_match_the_stabilizer_oracle() {
    let ring = graph_state(6, &ring_edges(6));
    assert!(is_stabilized(&ring, &graph_stabilizers(6, &ring_edges(6)), 1e-12));
    for f in [ring6_fusions, ring6_bent, ring6_chain, ring6_bell_seeds] {
        assert!(same(&to_tensor(&f().unwrap()).unwrap(), &ring));
    }
}

#[test]
fn encoded_ring_inventory() {
    let m = metrics(&ring6_encoded().unwrap());
    assert_eq!(m.success_probability, p(1, 1 << 25));
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 25)]));
    let devices = BTreeMap::from([
        ("type-I 2-fusion".to_string(), 13),
        ("type-I 3-fusion".to_string(), 5),
        ("3-GHZ analyser".to_string(), 1),
    ]);
    assert_eq!(m.device_inventory, devices);
    assert!(m.fully_loss_detecting);
}

#[test]
fn two_chain_family() {
    let m = metrics(&two_chain_encoded().unwrap());
    assert_eq!(m.success_probability, p(1, 128));
    assert_eq!(m.seed_inventory, BTreeMap::from([(3, 8)]));

    let m = metrics(&two_chain_bell_seeds().unwrap());
    assert_eq!(m.success_probability, p(1, 32768));
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 16)]));
    assert_eq!(m.device_inventory["type-I 4-fusion"], 2);
    assert_eq!(m.device_inventory["Bell analyser"], 1);

    let m = metrics(&two_chain_analysers().unwrap());
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 17)]));
    assert_eq!(m.device_inventory["5-GHZ analyser"], 2);

    let m = metrics(&two_chain_fusion_layers().unwrap());
    assert_eq!(m.success_probability, p(1, 32768));
    assert_eq!(m.device_inventory["type-I 2-fusion"], 14);
    assert_eq!(m.device_inventory["Bell analyser"], 1);
}

#[test]
fn qpc_encoder_tensor() {
    let t = to_tensor(&qpc_encoder_diagram(2, 2).unwrap()).unwrap();
    let [zero, one] = qpc_codewords(2, 2);
    let want: Vec<C64> = zero.iter().chain(&one).copied().collect();
    assert!(same(&t, &want));

    let h = to_tensor(&qpc_encoder_diagram(1, 1).unwrap()).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = [s, s, s, -s].map(|x| C64::new(x, 0.0));
    assert!(same(&h, &hadamard));
}

#[test]
fn five_qubit_encoder() {
    let d = fixtures::five_qubit_encoder().unwrap();
    let m = metrics(&d);
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 10)]));
    assert_eq!(m.device_inventory["type-I 3-fusion"], 5);
    assert_eq!(m.success_probability, p(1, 1 << 15));
    let words = images(&to_tensor(&d).unwrap(), 1);
    let gens = graph_stabilizers(5, &ring_edges(5));
    for w in &words {
        let norm: f64 = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let w: Vec<C64> = w.iter().map(|a| a / norm).collect();
        // the code space is fixed by even products of the graph stabilizers
        for k in 0..4 {
            let moved = gens[k].apply(&gens[k + 1].apply(&w));
            assert!(moved.iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-9));
        }
        assert!(!is_stabilized(&w, &gens[..1], 1e-9));
    }
    assert!(detects_errors(&words, 3, 1e-9));
}

#[test]
fn surface_code_encoder() {
    let d = fixtures::surface_code_encoder().unwrap();
    let m = metrics(&d);
    assert_eq!(m.success_probability, p(1, 512));
    assert_eq!(m.seed_inventory, BTreeMap::from([(2, 2), (3, 4), (4, 1)]));
    assert_eq!(m.device_inventory["4-GHZ analyser"], 3);
    let words = images(&to_tensor(&d).unwrap(), 1);
    let mut stabilizers = Vec::new();
    for s in [&[1, 2, 4, 5][..], &[3, 4, 6, 7], &[0, 3], &[5, 8]] {
        stabilizers.push(Pauli::on(9, b'Z', s));
    }
    for s in [&[0, 1, 3, 4][..], &[4, 5, 7, 8], &[1, 2], &[6, 7]] {
        stabilizers.push(Pauli::on(9, b'X', s));
    }
    for w in &words {
        let norm: f64 = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let w: Vec<C64> = w.iter().map(|a| a / norm).collect();
        assert!(is_stabilized(&w, &stabilizers, 1e-9));
    }
    assert!(detects_errors(&words, 3, 1e-9));
}

#[test]
fn ghz4_schemes_simulate_to_ghz() {
    let ghz = ghz_state(4);
    for (f, prob) in [(ghz4_bell_seeds as Fixture, 0.125), (ghz4_fusion_tree, 0.125), (ghz4_two_seeds, 0.5)] {
        let s = extract_scheme(&f().unwrap()).unwrap();
        let r = verify_scheme(&s, &ghz, &SimOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!((r.total_probability - prob).abs() < 1e-9);
        assert!(r.branches > 0);
    }
}

#[test]
fn one_branch_with_chosen_patterns() {
    let s = extract_scheme(&ghz4_two_seeds().unwrap()).unwrap();
    let all = simulate_successes(&s, &SimOptions::default()).unwrap();
    let one = simulate_scheme(&s, &all[0].patterns, &SimOptions::default()).unwrap();
    assert!((one.probability - all[0].probability).abs() < 1e-12);
    assert!((one.probability - one.expected_probability).abs() < 1e-9);
}

#[test]
fn wrong_target_fails() {
    let s = extract_scheme(&ghz4_bell_seeds().unwrap()).unwrap();
    let ring = graph_state(4, &ring_edges(4));
    let r = verify_scheme(&s, &ring, &SimOptions::default()).unwrap();
    assert!(!r.passed());
    assert!(r.worst_fidelity < 1.0 - 1e-6);
}

#[test]
fn ring_bell_seed_scheme_simulates_to_ring() {
    let s = extract_scheme(&ring6_bell_seeds().unwrap()).unwrap();
    let ring = graph_state(6, &ring_edges(6));
    let r = verify_scheme(&s, &ring, &SimOptions::default()).unwrap();
    assert!(r.passed(), "{:?}", r.failures);
    assert!((r.total_probability - 1.0 / 128.0).abs() < 1e-9);
}

#[test]
fn encoder_scheme_simulates_to_its_tensor() {
    let d = qpc_encoder_diagram(2, 2).unwrap();
    let s = extract_scheme(&d).unwrap();
    let r = verify_scheme(&s, &to_tensor(&d).unwrap(), &SimOptions::default()).unwrap();
    assert!(r.passed(), "{:?}", r.failures);
}

#[test]
fn photon_cap_is_enforced() {
    let s = extract_scheme(&ring6_encoded().unwrap()).unwrap();
    let err = simulate_successes(&s, &SimOptions::default()).unwrap_err();
    assert!(matches!(err, fockforge::Error::Resource(_)));
}
