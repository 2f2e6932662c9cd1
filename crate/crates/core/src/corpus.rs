//! Seeded random machines for property audits and benchmarks.

use crate::entropy::Distribution;
use crate::transducer::{minimize, steady_state, InputModel, Transducer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Binary-alphabet machine with grid probabilities and random successors.
pub fn random_machine<R: Rng>(rng: &mut R, states: usize) -> Transducer {
    let mut rows = Vec::with_capacity(states * 2);
    for _ in 0..states * 2 {
        let p0 = GRID[rng.random_range(0..GRID.len())];
        let succ = [rng.random_range(0..states), rng.random_range(0..states)];
        rows.push((p0, succ));
    }
    Transducer::from_fn(states, 2, 2, |j, x, y| {
        let (p0, succ) = rows[j * 2 + x];
        (if y == 0 { p0 } else { 1.0 - p0 }, succ[y])
    })
    .expect("grid rows are stochastic")
}

/// `count` minimal machines with 2..=`max_states` states, each with a single
/// aperiodic recurrent class, paired with a random input law.
pub fn random_minimal_corpus(count: usize, max_states: usize, seed: u64) -> Vec<(Transducer, InputModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let states = rng.random_range(2..=max_states.max(2));
        let t = random_machine(&mut rng, states);
        let q0 = [0.25, 0.5, 0.75][rng.random_range(0..3)];
        let im = InputModel::new(Distribution::new(vec![q0, 1.0 - q0]).expect("valid"), 2);
        if minimize(&t).machine.states() != states || steady_state(&t, &im).is_err() {
            continue;
        }
        out.push((t, im));
    }
    out
}
