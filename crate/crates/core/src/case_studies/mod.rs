//! Worked systems: the two-question interview, the Brownian ring, the reset
//! clock, and two hand-built memory ensembles.

pub mod brownian;
pub mod clock;

pub use brownian::{
    brownian_gram, brownian_overlap_row, brownian_quantum_entropy, brownian_quantum_entropy_bound,
    brownian_ring, brownian_sweep, BrownianRingParams, BrownianRow,
};
pub use clock::{
    clock_block_information, clock_continuum_entropy, clock_stationary, clock_sweep, reset_clock,
    ClockInformation, ClockRow, ContinuumEntropy, ResetClock, ResetClockParams,
};

use crate::entropy::{Distribution, GramKernel, WeightedKernel, C64};
use crate::transducer::{InputModel, Transducer};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseStudyError {
    #[error("invalid parameters: {0}")]
    Domain(String),
    #[error(transparent)]
    Transducer(#[from] crate::transducer::TransducerError),
    #[error(transparent)]
    Entropy(#[from] crate::entropy::EntropyError),
}

pub type Result<T> = std::result::Result<T, CaseStudyError>;

/// Human-readable names of the interview states, in index order.
pub const ALICE_BOB_STATES: [&str; 4] = ["s00", "s01", "s10", "s11"];

/// Alice is asked one of two yes/no questions each step. Asked the same
/// question as last time she repeats her answer; asked the other one she
/// answers at random. State (x', y') = last question and answer, numbered
/// 2x' + y'. Inputs are uniform.
///
/// The qubit memory maps s00, s01, s10, s11 to |0>, |1>, |+>, |−>.
pub fn alice_bob() -> (Transducer, InputModel, GramKernel) {
    let t = Transducer::from_fn(4, 2, 2, |s, x, y| {
        let (last_x, last_y) = (s / 2, s % 2);
        let p = if x == last_x { (y == last_y) as u8 as f64 } else { 0.5 };
        (p, 2 * x + y)
    })
    .expect("interview machine is valid");
    let im = InputModel::uniform(&t);
    let s = FRAC_1_SQRT_2;
    let kets = [
        [1.0, 0.0],
        [0.0, 1.0],
        [s, s],
        [s, -s],
    ];
    let states: Vec<DVector<C64>> = kets
        .iter()
        .map(|k| DVector::from_iterator(2, k.iter().map(|&a| C64::new(a, 0.0))))
        .collect();
    let gram = GramKernel::from_states(&states).expect("qubit states are unit vectors");
    (t, im, gram)
}

/// One state, uniform inputs, fair-coin output regardless of input.
pub fn memoryless_coin() -> (Transducer, InputModel) {
    let t = Transducer::from_fn(1, 2, 2, |_, _, _| (0.5, 0)).expect("valid");
    let im = InputModel::uniform(&t);
    (t, im)
}

/// One state, output equals input.
pub fn echo() -> (Transducer, InputModel) {
    let t = Transducer::from_fn(1, 2, 2, |_, x, y| ((x == y) as u8 as f64, 0)).expect("valid");
    let im = InputModel::uniform(&t);
    (t, im)
}

/// The two three-state memories of the higher-dimensional example, each with
/// uniform weights: {|m_i>} spans a qubit (entropy 1), {|n_i>} spans a qutrit
/// but is less mixed (entropy ≈ 0.61).
///
/// The weights are not printed alongside the states; uniform weights are the
/// symmetric choice and reproduce both quoted entropies.
pub fn appendix_i_ensembles() -> (WeightedKernel, WeightedKernel) {
    let r3 = 3f64.sqrt() / 2.0;
    let m = [[1.0, 0.0, 0.0], [0.5, r3, 0.0], [0.5, -r3, 0.0]];
    let (a, b) = ((2.0f64 / 3.0).sqrt(), 1.0 / 6f64.sqrt());
    let n = [[a, b, b], [b, a, b], [b, b, a]];
    let build = |rows: &[[f64; 3]; 3]| {
        let states: Vec<DVector<C64>> = rows
            .iter()
            .map(|r| DVector::from_iterator(3, r.iter().map(|&v| C64::new(v, 0.0))))
            .collect();
        let kernel = GramKernel::from_states(&states).expect("published states are unit vectors");
        WeightedKernel::new(kernel, Distribution::uniform(3)).expect("dimensions agree")
    };
    (build(&m), build(&n))
}

pub(crate) fn real_gram(m: DMatrix<f64>) -> GramKernel {
    GramKernel::trusted(m.map(|v| C64::new(v, 0.0)))
}
