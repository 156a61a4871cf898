//! Structural properties of the purification map on random inputs.

use lmes_core::depolarization::twirl;
use lmes_core::lme::{from_lme_coeffs, to_lme_coeffs};
use lmes_core::purify::purify_color;
use lmes_core::random::random_density_matrix;
use lmes_core::scenarios;
use lmes_core::{fidelity, LmeCoeffMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SPECS: &[&str] = &["bell", "graph3", "u123", "u123_u234", "linear5"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn output_is_a_normalized_state(seed in any::<u64>(), which in 0..SPECS.len(), color in 0usize..3) {
        let spec = scenarios::spec(SPECS[which]).unwrap();
        let color = color % spec.num_colors();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(spec.n(), &mut rng);
        let lam = to_lme_coeffs(&rho, &spec).unwrap();
        let out = purify_color(&lam, &spec, color).unwrap();
        prop_assert!((out.output.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.output.min_eigenvalue() > -1e-10);
        prop_assert!(out.parity_success_prob > 0.0 && out.parity_success_prob <= 1.0 + 1e-12);
        // at least the collision probability of the A-marginal
        prop_assert!(out.parity_success_prob >= 0.5f64.powi(spec.color_mask(color).unwrap().count_ones() as i32) - 1e-12);
    }

    #[test]
    fn diagonal_inputs_stay_diagonal(seed in any::<u64>(), color in 0usize..3) {
        let spec = scenarios::spec("u123").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lam = twirl(&to_lme_coeffs(&random_density_matrix(3, &mut rng), &spec).unwrap());
        let out = purify_color(&lam, &spec, color).unwrap().output;
        prop_assert!(out.is_diagonal(1e-14));
    }

    #[test]
    fn coefficients_round_trip(seed in any::<u64>(), which in 0..SPECS.len()) {
        let spec = scenarios::spec(SPECS[which]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(spec.n(), &mut rng);
        let back = from_lme_coeffs(&to_lme_coeffs(&rho, &spec).unwrap(), &spec).unwrap();
        prop_assert!(lmes_core::linalg::max_abs_diff(back.matrix(), rho.matrix()) < 1e-12);
    }
}

#[test]
fn target_fidelity_is_preserved_at_the_fixed_point() {
    for s in scenarios::SCENARIOS {
        let spec = s.spec();
        let t = LmeCoeffMatrix::target(spec.n());
        for c in 0..spec.num_colors() {
            let out = purify_color(&t, &spec, c).unwrap();
            assert_eq!(fidelity(&out.output), 1.0, "{} color {c}", s.name);
            assert!((out.parity_success_prob - 1.0).abs() < 1e-15);
        }
    }
}
