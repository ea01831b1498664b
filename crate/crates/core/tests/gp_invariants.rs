mod support;

use featurecraft_core::gp::{Operator, OperatorProbs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pareto_matches_brute_force() {
    support::check_pareto(500, 200, 21).unwrap();
}

#[test]
fn m3gp_elitism_depth_and_dimensionality() {
    support::check_m3gp_runs(20, 20, 100).unwrap();
}

#[test]
fn m6gp_elites_are_the_first_front() {
    support::check_m6gp_elites(5, 10, 200).unwrap();
}

#[test]
fn operator_frequencies_within_three_sigma() {
    let probs = OperatorProbs::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 1_000_000usize;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let op = probs.draw(&mut rng);
        counts[Operator::ALL.iter().position(|&o| o == op).unwrap()] += 1;
    }
    for (k, p) in probs.as_array().into_iter().enumerate() {
        let expected = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let dev = (counts[k] as f64 - expected).abs();
        assert!(dev <= 3.0 * sigma, "{:?}: {} draws, expected {expected:.0} ± {:.0}", Operator::ALL[k], counts[k], 3.0 * sigma);
    }
}

#[test]
fn zero_probability_operator_never_drawn() {
    let probs = OperatorProbs { swap_subtree: 0.5, swap_tree: 0.5, subtree_mutation: 0.0, add_tree: 0.0, remove_tree: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!((0..100_000).all(|_| probs.draw(&mut rng).is_crossover()));
}
