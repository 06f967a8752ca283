//! Fixtures shared by the benchmarks.

use nnpda::extraction::machines::palindrome_pda;
use nnpda::{
    construct_from_pda, ActionActivation, ConstructOptions, NetworkShape, Order, WeightSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random weights for a given order; full order uses the linear action and
/// the empty-stack neuron.
pub fn random_weights(order: Order, n_state: usize, n_input: usize, seed: u64) -> WeightSet {
    let (act, empty) = match order {
        Order::FullOrderAction => (ActionActivation::Linear, true),
        _ => (ActionActivation::Sigmoid2, false),
    };
    let shape = NetworkShape::new(n_state, n_input, empty).expect("valid shape");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightSet::random(order, act, shape, 1.0, &mut rng).expect("valid weights")
}

/// The palindrome machine built into a third-order network.
pub fn constructed_palindrome() -> WeightSet {
    let pda = palindrome_pda();
    let shape =
        NetworkShape::new(pda.n_states() + 1, pda.alphabet().len(), true).expect("valid shape");
    construct_from_pda(&pda, &shape, &ConstructOptions::default()).expect("constructible")
}
