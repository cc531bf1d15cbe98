mod common;

use proptest::prelude::*;
use qcut::cutter::{extract_subcircuits, find_cuts, physical_variants};
use qcut::pipeline::{run_pipeline, run_with_cuts, RunOptions};
use qcut::reconstruct::{attribute, recombine, recombine_in_order, reconstruct};
use qcut::sim::{run_variant, simulate_exact, ExecMode, QubitNoise};

use common::{ideal, random_circuit, staged_circuit};

#[test]
fn uncut_circuit_passes_through() {
    let c = random_circuit(4, 5, 3);
    let r = run_pipeline(&c, &ideal(2, 4, 0)).unwrap();
    assert!(r.cut_plan.cuts.is_empty());
    assert_eq!(r.units.len(), 1);
    assert!(r.distribution.l1(&simulate_exact(&c).unwrap()).unwrap() < 1e-12);
    assert_eq!(r.output.negativity_mass, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cut_and_reconstruct_is_exact(n in 4usize..=7, stages in 2usize..=3, depth in 4usize..=9, seed in any::<u64>()) {
        let c = staged_circuit(n, stages, depth, seed);
        let Ok(plan) = find_cuts(&c, &[n - 1], 0) else { return Ok(()); };
        prop_assume!((1..=3).contains(&plan.cuts.len()));
        let r = run_with_cuts(&c, &ideal(plan.subcircuit_count, n, 0), &plan, RunOptions::default()).unwrap();
        let err = r.distribution.l1(&simulate_exact(&c).unwrap()).unwrap();
        prop_assert!(err <= 1e-9, "L1 {}", err);
    }

    #[test]
    fn contraction_order_does_not_matter(n in 4usize..=6, depth in 4usize..=8, seed in any::<u64>(), rot in 0usize..4) {
        let c = staged_circuit(n, 3, depth, seed);
        let Ok(plan) = find_cuts(&c, &[n - 2], 0) else { return Ok(()); };
        prop_assume!(plan.subcircuit_count >= 3 && (1..=3).contains(&plan.cuts.len()));
        let specs = extract_subcircuits(&c, &plan).unwrap();
        let terms: Vec<_> = specs
            .iter()
            .map(|s| {
                let noise = QubitNoise::uniform(&Default::default(), s.sq());
                let results: Vec<_> = physical_variants(s)
                    .iter()
                    .map(|v| run_variant(s, v, &noise, ExecMode::Exact, 0).unwrap())
                    .collect();
                attribute(s, &results).unwrap()
            })
            .collect();
        let n_out = c.n_output_bits();
        let reference = recombine(&terms, n_out).unwrap();
        let mut order: Vec<usize> = (0..terms.len()).collect();
        order.rotate_left(rot % terms.len());
        order.reverse();
        let other = recombine_in_order(&terms, n_out, &order).unwrap();
        for (a, b) in reference.iter().zip(&other) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let rec = reconstruct(&terms, n_out).unwrap();
        prop_assert!((rec.distribution.total() - 1.0).abs() < 1e-12);
        prop_assert!(rec.negativity_mass >= 0.0);
    }
}
