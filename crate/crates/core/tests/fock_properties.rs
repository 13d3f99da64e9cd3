use fockforge::fock::*;
use fockforge::report::random_unitary;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn naive_permanent(m: &SquareMatrix) -> C64 {
    fn rec(m: &SquareMatrix, r: usize, used: &mut [bool]) -> C64 {
        if r == m.dim() {
            return C64::new(1.0, 0.0);
        }
        (0..m.dim())
            .filter(|&c| !used[c])
            .collect::<Vec<_>>()
            .into_iter()
            .map(|c| {
                used[c] = true;
                let v = m.get(r, c) * rec(m, r + 1, used);
                used[c] = false;
                v
            })
            .sum()
    }
    rec(m, 0, &mut vec![false; m.dim()])
}

fn matrix(k: usize) -> impl Strategy<Value = SquareMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k * k)
        .prop_map(move |v| SquareMatrix::new(k, k, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

/// A normalised superposition of up to four random states with `photons` photons.
fn superposition(modes: usize, photons: usize) -> impl Strategy<Value = FockSuperposition> {
    let states = enumerate_states(modes, photons);
    let n = states.len();
    proptest::collection::vec((0..n, -1.0f64..1.0, -1.0f64..1.0), 1..=4).prop_map(move |picks| {
        let mut s = FockSuperposition::empty(modes);
        for (i, a, b) in picks {
            s.add(states[i].clone(), C64::new(a, b + 0.01));
        }
        let norm = s.norm_sqr().sqrt();
        s.scale(C64::new(1.0 / norm, 0.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn permanent_matches_enumeration(m in (1usize..=6).prop_flat_map(matrix)) {
        let d = permanent(&m).unwrap() - naive_permanent(&m);
        prop_assert!(d.norm() < 1e-9 * (1.0 + naive_permanent(&m).norm()));
    }

    #[test]
    fn evolution_preserves_norm_and_photons(
        (photons, psi) in (0usize..=6).prop_flat_map(|p| (Just(p), superposition(8, p))),
        seed in any::<u64>(),
    ) {
        let u = random_unitary(&mut StdRng::seed_from_u64(seed), 8).unwrap();
        prop_assert!(u.is_unitary());
        let out = evolve(&psi, &u).unwrap();
        prop_assert!((out.norm_sqr() - psi.norm_sqr()).abs() < 1e-9);
        prop_assert!(out.terms().all(|(s, _)| s.photons() == photons));
    }

    #[test]
    fn both_evolution_routes_agree(
        psi in (0usize..=4).prop_flat_map(|p| superposition(5, p)),
        seed in any::<u64>(),
    ) {
        let u = random_unitary(&mut StdRng::seed_from_u64(seed), 5).unwrap();
        let a = evolve(&psi, &u).unwrap();
        let b = evolve_by_permanents(&psi, &u).unwrap();
        prop_assert!(a.approx_eq(&b, 1e-9));
    }

    #[test]
    fn pattern_probabilities_sum_to_the_norm(
        psi in (1usize..=4).prop_flat_map(|p| superposition(6, p)),
        detected in proptest::sample::subsequence((0..6).collect::<Vec<usize>>(), 1..=6),
    ) {
        let parts = split_by_pattern(&psi, &detected);
        let total: f64 = parts.values().map(FockSuperposition::norm_sqr).sum();
        prop_assert!((total - psi.norm_sqr()).abs() < 1e-9);
        for (pattern, rest) in &parts {
            let p = project_pattern(&psi, &detected, pattern).unwrap();
            prop_assert!((p.probability - rest.norm_sqr()).abs() < 1e-12);
        }
    }
}
