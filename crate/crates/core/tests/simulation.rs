mod common;

use proptest::prelude::*;
use qcut::circuit::Circuit;
use qcut::sim::{sample_counts, simulate_exact, simulate_exact_noisy, NoiseModel, QubitNoise};

use common::random_circuit;

fn noisy(c: &Circuit, p1: f64, p2: f64) -> Vec<f64> {
    let noise = QubitNoise::uniform(&NoiseModel::new(p1, p2, 0.0).unwrap(), c.n_qubits);
    simulate_exact_noisy(c, &noise, 12).unwrap().probs
}

#[test]
fn one_qubit_depolarizing_closed_form() {
    let mut c = Circuit::new("x", 1, 0);
    c.x(0);
    for p in [0.0, 0.1, 0.3, 0.75] {
        // X and Y errors undo the flip
        let probs = noisy(&c, p, 0.0);
        assert!((probs[0] - 2.0 * p / 3.0).abs() < 1e-12, "p {p}: {probs:?}");
    }
}

#[test]
fn two_qubit_depolarizing_closed_form() {
    let mut c = Circuit::new("cx", 2, 0);
    c.cx(0, 1);
    for p in [0.0, 0.05, 0.5, 15.0 / 16.0] {
        // of the fifteen Paulis only ZI, IZ and ZZ leave |00> alone
        let probs = noisy(&c, 0.0, p);
        assert!((probs[0] - (1.0 - 12.0 * p / 15.0)).abs() < 1e-12, "p {p}: {probs:?}");
    }
}

#[test]
fn trajectories_are_seeded() {
    let c = random_circuit(3, 5, 4);
    let noise = QubitNoise::uniform(&NoiseModel::new(0.01, 0.05, 0.0).unwrap(), 3);
    let a = sample_counts(&c, &noise, 500, 11, 26).unwrap();
    let b = sample_counts(&c, &noise, 500, 11, 26).unwrap();
    let other = sample_counts(&c, &noise, 500, 12, 26).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, other);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_density_matches_state_vector(n in 1usize..=5, depth in 1usize..=6, seed in any::<u64>()) {
        let c = random_circuit(n.max(2), depth, seed);
        let sv = simulate_exact(&c).unwrap();
        let dm = noisy(&c, 0.0, 0.0);
        for (a, b) in sv.probs.iter().zip(&dm) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn noisy_distributions_are_normalized(depth in 1usize..=6, seed in any::<u64>(), p1 in 0.0f64..0.2, p2 in 0.0f64..0.3) {
        let c = random_circuit(3, depth, seed);
        let probs = noisy(&c, p1, p2);
        prop_assert!(probs.iter().all(|&p| p >= -1e-12));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
