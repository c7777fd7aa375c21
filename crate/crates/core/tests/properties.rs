//! Randomized invariants of CR, the block shift, the deflation stage and the
//! small QME solver.

mod common;

use common::{cr_identity_defect, reconstruction_error, relocation_defect, root_squaring_defect, small_qme_check};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use qme::poly::Field;
use qme::problems::{example3, random_split_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn split_case() -> impl Strategy<Value = (usize, usize, u64)> {
    (3usize..=16).prop_flat_map(|m| (Just(m), 1usize..m.min(5), any::<u64>()))
}

proptest! {
    // A fixed seed keeps the 20 instances the same from run to run.
    #![proptest_config(ProptestConfig {
        cases: 20,
        rng_seed: RngSeed::Fixed(20240601),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn cr_identities_hold((m, ell, seed) in split_case()) {
        let inst = random_split_instance(m, ell, seed, Field::Complex).unwrap();
        let d = cr_identity_defect(&inst, 6);
        prop_assert!(d <= 1e-9, "{:e}", d);
    }

    #[test]
    fn cr_squares_the_spectrum(m in 2usize..=3, seed in any::<u64>()) {
        let inst = random_split_instance(m, 1, seed, Field::Complex).unwrap();
        let d = root_squaring_defect(&inst, 3);
        prop_assert!(d <= 1e-6, "{:e}", d);
    }

    #[test]
    fn block_shift_moves_only_the_targets((m, ell, seed) in split_case()) {
        let inst = random_split_instance(m, ell, seed, Field::Complex).unwrap();
        let d = relocation_defect(&inst);
        prop_assert!(d <= 1e-6, "{:e}", d);
    }

    #[test]
    fn real_rotation_instances_relocate(pairs in 1usize..=3, extra in 1usize..=6, seed in any::<u64>()) {
        let inst = random_split_instance(2 * pairs + extra, 2 * pairs, seed, Field::Real).unwrap();
        let d = relocation_defect(&inst);
        prop_assert!(d <= 1e-6, "{:e}", d);
    }
}

#[test]
fn exact_subspace_feed_reconstructs_g() {
    for m in [16, 32, 64] {
        for case in 1..=3 {
            let (eg, er) = reconstruction_error(&example3(m, case, 1).unwrap());
            assert!(eg <= 1e-10, "m = {m}, case {case}: G error {eg:e}");
            assert!(er <= 1e-10, "m = {m}, case {case}: R error {er:e}");
        }
    }
}

#[test]
fn small_qme_meets_its_postconditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 0..50 {
        let ell = 1 + n % 8;
        let chk = small_qme_check(ell, &mut rng).unwrap();
        assert!(chk.residual_ok, "instance {n}");
        assert!(chk.unimodular_ok, "instance {n}");
        assert!(chk.spectrum_distance <= 1e-6, "instance {n}: {:e}", chk.spectrum_distance);
        assert!(chk.distance_to_g <= 1e-5, "instance {n}: {:e}", chk.distance_to_g);
    }
}
