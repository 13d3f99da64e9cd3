use std::collections::BTreeSet;

use fockforge::devices::*;
use fockforge::dualrail::{encode_state, QubitString};
use fockforge::fock::{evolve, split_by_pattern, FockState, FockSuperposition, C64};
use proptest::prelude::*;

fn success_patterns(d: &Device) -> BTreeSet<FockState> {
    kraus_table(d)
        .unwrap()
        .into_iter()
        .filter(|k| k.outcome == Outcome::SuccessEntangled)
        .flat_map(|k| k.patterns)
        .collect()
}

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

#[test]
fn every_device_is_complete() {
    let mut devices = vec![bell_analyser()];
    for n in 2..=5 {
        devices.push(ghz_analyser(n).unwrap());
        devices.push(type1_fusion(n).unwrap());
    }
    devices.push(boosted(&bell_analyser(), &[0]).unwrap());
    devices.push(boosted(&bell_analyser(), &[0, 1]).unwrap());
    devices.push(boosted(&ghz_analyser(3).unwrap(), &[1]).unwrap());
    for d in devices {
        let t = kraus_table(&d).unwrap();
        assert!(completeness_error(&d, &t) < 1e-9, "{d}");
    }
}

#[test]
fn analysers_never_herald_after_a_loss() {
    for n in 2..=4 {
        let d = ghz_analyser(n).unwrap();
        let successes = success_patterns(&d);
        for x in QubitString::all(n) {
            for lost in 0..n {
                // drop the photon of qubit `lost`, leaving both its rails empty
                let mut occ = fockforge::dualrail::encode(&x).occupations().to_vec();
                occ[2 * lost] = 0;
                occ[2 * lost + 1] = 0;
                let psi = FockSuperposition::basis(FockState::new(occ));
                let out = evolve(&psi, d.unitary()).unwrap();
                for (pattern, rest) in split_by_pattern(&out, d.detected_modes()) {
                    assert!(
                        !successes.contains(&pattern) || rest.norm_sqr() < 1e-12,
                        "{n}-GHZ heralds {pattern} after losing qubit {lost} of {x}"
                    );
                }
            }
        }
    }
}

#[test]
fn loss_curves_rise_to_the_lossless_value() {
    for d in [
        bell_analyser(),
        ghz_analyser(3).unwrap(),
        boosted(&bell_analyser(), &[0]).unwrap(),
        boosted(&ghz_analyser(3).unwrap(), &[0, 1, 2]).unwrap(),
    ] {
        let poly = lossy_success_polynomial(&d).unwrap();
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let v: Vec<f64> = grid.iter().map(|&e| poly.eval(e)).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{d}");
        assert!(v[0].abs() < 1e-12);
        let lossless = success_probability(&d).unwrap().value();
        assert!((v[50] - lossless).abs() < 1e-9, "{d}");
        let model = LossModel::new(1.0).unwrap();
        assert!((lossy_success_probability(&d, &model).unwrap() - lossless).abs() < 1e-9);
    }
    assert!(LossModel::new(1.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fusion_applies_the_repetition_projector(
        (n, amps) in (2usize..=5).prop_flat_map(|n| (Just(n), amplitudes(n)))
    ) {
        let d = type1_fusion(n).unwrap();
        let successes = success_patterns(&d);
        let psi = encode_state(n, &amps).unwrap();
        let out = evolve(&psi, d.unitary()).unwrap();
        let a0 = amps[0];
        let a1 = amps[(1 << n) - 1];
        let zero = FockState::new(vec![1, 0]);
        let one = FockState::new(vec![0, 1]);
        for (pattern, rest) in split_by_pattern(&out, d.detected_modes()) {
            if !successes.contains(&pattern) {
                continue;
            }
            // the remainder keeps only |0..0> and |1..1> components
            prop_assert!(rest.terms().all(|(s, a)| a.norm() < 1e-12 || *s == zero || *s == one));
            let (b0, b1) = (rest.amplitude(&zero), rest.amplitude(&one));
            let sign = fusion_sign(&pattern) as f64;
            prop_assert!((b0 * a1 - b1 * a0 * sign).norm() < 1e-9);
            let scale = 0.5f64.powi(n as i32 - 1).sqrt();
            prop_assert!((b1.norm() - scale * a1.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn ghz_success_patterns_are_single_photon(n in 2usize..=5) {
        let d = ghz_analyser(n).unwrap();
        for p in success_patterns(&d) {
            prop_assert_eq!(p.photons(), n);
            prop_assert!(p.occupations().iter().all(|&r| r <= 1));
        }
    }
}
