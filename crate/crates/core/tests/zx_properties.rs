use fockforge::zx::random::{random_diagram, random_rewrite};
use fockforge::zx::{equal_up_to_scalar, to_tensor, ZXDiagram};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rewrites_preserve_the_tensor(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random_diagram(&mut rng, 10);
        let before = to_tensor(&d).unwrap();
        if let Some((name, r)) = random_rewrite(&mut rng, &d) {
            let after = to_tensor(&r).unwrap();
            prop_assert!(equal_up_to_scalar(&before, &after, 1e-9), "{} broke the tensor", name);
        }
    }

    #[test]
    fn diagram_json_round_trips(seed in any::<u64>()) {
        let d = random_diagram(&mut StdRng::seed_from_u64(seed), 6);
        let back = ZXDiagram::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(to_tensor(&back).unwrap(), to_tensor(&d).unwrap());
    }
}
