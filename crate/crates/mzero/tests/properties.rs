//! Property tests: fixed points of the refinement steps, threshold
//! equations, dual-basis invariants on random families, and float
//! round-trips of the JSON encoder.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::*;
use mzero::cli::json;
use mzero::dualspace::{compute_dual_basis, DualOptions};
use mzero::newton::{contraction_quantity, domain_limit, refine_double, refine_general, refine_triple, threshold_constants, Variant};
use mzero::{MzError, C64};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn normalized_steps_fix_the_exact_zero(seed in any::<u64>(), n in 2usize..=3, mu in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = normalized_system(&mut rng, n, mu);
        let next = if mu == 2 { refine_double(&cs.system, &cs.zero) } else { refine_triple(&cs.system, &cs.zero) };
        let next = next.unwrap();
        prop_assert!(dist(&next, &cs.zero) <= 1e-12 * (1.0 + norm(&cs.zero)), "moved by {}", dist(&next, &cs.zero));
    }

    #[test]
    fn general_step_fixes_the_exact_zero(seed in any::<u64>(), n in 1usize..=3, mu in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = general_system(&mut rng, n, mu);
        let step = refine_general(&arc(&cs.system), &cs.zero, mu).unwrap();
        prop_assert!(dist(&step.point, &cs.zero) <= 1e-10, "moved by {}", dist(&step.point, &cs.zero));
    }

    #[test]
    fn dual_basis_invariants_on_random_families(seed in any::<u64>(), n in 1usize..=3, mu in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = general_system(&mut rng, n, mu);
        let b = compute_dual_basis(&cs.system, &cs.zero, &DualOptions::default()).unwrap();
        prop_assert_eq!(b.mu, mu);
        prop_assert!(b.breadth_one);
        prop_assert_eq!(b.lambdas.len(), mu);
        for r in &b.duality_residuals {
            prop_assert!(*r <= 1e-9, "duality residual {r}");
        }
        prop_assert!(b.closedness_residual <= 1e-9, "closedness {}", b.closedness_residual);
        let oracle = macaulay_multiplicity(&cs.system, &cs.zero, mu as u32 + 2);
        prop_assert_eq!(oracle, Some(mu));
    }

    #[test]
    fn regular_zeros_are_rejected(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = general_system(&mut rng, n, 1);
        let r = compute_dual_basis(&cs.system, &cs.zero, &DualOptions::default());
        prop_assert!(matches!(r, Err(MzError::NotCorankOne { .. })), "{r:?}");
    }

    #[test]
    fn multiplicity_is_invariant_under_scaling_the_system(seed in any::<u64>(), n in 2usize..=3, mu in 2usize..=3, s in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = general_system(&mut rng, n, mu);
        let id = nalgebra::DMatrix::<C64>::identity(n, n);
        let scaled = conjugate(&cs.system, &id.scale(1.0 / s), &id);
        let a = compute_dual_basis(&cs.system, &cs.zero, &DualOptions::default()).unwrap();
        let b = compute_dual_basis(&scaled, &cs.zero, &DualOptions::default()).unwrap();
        prop_assert_eq!(a.mu, b.mu);
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn contraction_stays_below_a_quarter_under_the_quadratic_threshold(t in 0.0f64..1.0) {
        for v in Variant::ALL {
            let th = threshold_constants(v).unwrap();
            let q = contraction_quantity(v, t * th.u_quadratic);
            prop_assert!(q <= 0.25 + 1e-9, "{}: q({}) = {q}", v.as_str(), t * th.u_quadratic);
            let q1 = contraction_quantity(v, t * th.u_converge);
            prop_assert!(q1 <= 1.0 + 1e-9, "{}: q({}) = {q1}", v.as_str(), t * th.u_converge);
        }
    }

    #[test]
    fn json_floats_round_trip_exactly(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let v = json::num(x);
        if x.is_finite() {
            let text = json::render(&v);
            let back: Value = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.as_f64().unwrap().to_bits(), x.to_bits());
            prop_assert_eq!(json::render(&back), text);
        } else {
            prop_assert_eq!(v, Value::Null);
        }
    }
}

#[test]
fn threshold_roots_solve_their_equations() {
    for v in Variant::ALL {
        let th = threshold_constants(v).unwrap();
        assert!(th.u_quadratic < th.u_converge && th.u_converge < domain_limit(v));
        assert!((contraction_quantity(v, th.u_converge) - 1.0).abs() <= 1e-6);
        assert!((contraction_quantity(v, th.u_quadratic) - 0.25).abs() <= 1e-6);
    }
}

#[test]
fn dual_structure_of_the_examples() {
    let origin = [c(0.0), c(0.0)];
    let b = compute_dual_basis(&example_double(), &origin, &DualOptions::default()).unwrap();
    assert_eq!(b.mu, 2);
    let b = compute_dual_basis(&example_triple(), &origin, &DualOptions::default()).unwrap();
    assert_eq!(b.mu, 3);
    let d3 = b.delta_mu_value()[1];
    assert!((d3 - c(192.0)).norm() <= 1e-9 * 192.0, "Δ₃(f₂) = {d3}");
    assert_eq!(macaulay_multiplicity(&example_triple(), &origin, 6), Some(3));
}
