//! Work-cost accounting. Every rate is a dimensionless multiple of kT ln 2
//! per time step; a physical kT is applied only when reporting.
//!
//! The central identity: an agent that commits its outputs every L steps and
//! keeps memory M_L costs
//!
//! ```text
//! w = h_dflt + [I(Z_{0:L}; M_L) − H(Y_{0:L} | X_{0:L})] / L
//! ```
//!
//! so the classical/quantum comparison reduces to two mutual informations.

use crate::entropy::{self, EntropyError};
use crate::quantum_encoding::{
    self, distinguishability, quantum_block_mutual_information, GramEncoding, Provenance,
    QuantumError,
};
use crate::transducer::{
    self, block_conditional_output_entropy, block_law_from, classical_block_mutual_information,
    steady_state, BlockLaw, InputModel, Transducer, TransducerError,
};
use thiserror::Error;

/// Posterior moves smaller than this do not count as a shift.
pub const SHIFT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

pub type Result<T> = std::result::Result<T, ThermoError>;

pub fn work_rate(bl: &BlockLaw, im: &InputModel, memory_information: f64) -> f64 {
    im.default_output_entropy()
        + (memory_information - block_conditional_output_entropy(bl, im)) / bl.stride() as f64
}

/// h_dflt − H(Y_{0:L}|X_{0:L})/L: the cost with no memory term at all.
pub fn landauer_floor(bl: &BlockLaw, im: &InputModel) -> f64 {
    im.default_output_entropy() - block_conditional_output_entropy(bl, im) / bl.stride() as f64
}

/// Extra dissipation of an L = 1 agent over the unboundedly patient one,
/// computed in both forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineCost {
    /// I(Z_0;S_1) − I(Z_0;S_0).
    pub rate: f64,
    /// I(Z_0;S_1) − I(Z_1;S_1), with the law of S_1 propagated one step.
    pub next_step_form: f64,
    pub next_symbol_information: f64,
    pub initial_information: f64,
}

impl OnlineCost {
    pub fn residual(&self) -> f64 {
        (self.rate - self.next_step_form).abs()
    }
}

pub fn online_cost(t: &Transducer, im: &InputModel) -> Result<OnlineCost> {
    transducer::require_minimal(t)?;
    let pi = steady_state(t, im)?;
    let bl = block_law_from(t, im, 1, u64::MAX, pi.clone())?;
    let after = classical_block_mutual_information(&bl);
    let before = transducer::initial_state_information(t, im, &pi);

    let mut pushed = vec![0.0; t.states()];
    for (j, row) in t.state_chain(im.q()).iter().enumerate() {
        for &(k, p) in row {
            pushed[k] += pi.weights()[j] * p;
        }
    }
    let joint = transducer::symbol_state_joint(t, im, &pushed);
    let next = entropy::mutual_information_raw(&joint, t.symbols(), t.states());
    Ok(OnlineCost {
        rate: after - before,
        next_step_form: after - next,
        next_symbol_information: after,
        initial_information: before,
    })
}

/// Quantum advantage per step with its relative-entropy cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageGap {
    /// (I(Z;S_L) − I(Z;M_L)) / L.
    pub gap: f64,
    /// Σ_z P(z) [D(P(S_L|z) ‖ π) − S(ρ_z ‖ ρ)] / L.
    pub cross_check: f64,
}

impl AdvantageGap {
    pub fn residual(&self) -> f64 {
        (self.gap - self.cross_check).abs()
    }
}

pub fn advantage_gap(bl: &BlockLaw, enc: &GramEncoding) -> Result<AdvantageGap> {
    let classical = classical_block_mutual_information(bl);
    let quantum = quantum_block_mutual_information(bl, enc)?;
    let stride = bl.stride() as f64;

    let basis = enc.basis();
    let pi = bl.stationary().weights();
    let rho = basis.density(pi);
    let terms = crate::par::map_range(bl.len(), |i| -> Result<f64> {
        let post = bl.posterior(i);
        let kl = entropy::kl_bits(post, pi)?;
        let q = entropy::relative_entropy(&basis.density(post), &rho)?;
        Ok(bl.prob(i) * (kl - q))
    });
    let mut cross = 0.0;
    for term in terms {
        cross += term?;
    }
    Ok(AdvantageGap { gap: (classical - quantum) / stride, cross_check: cross / stride })
}

/// I_q(Z_0; M_1) − I(Z_0; S_0): online dissipation with quantum memory.
pub fn quantum_online_dissipation(t: &Transducer, im: &InputModel, enc: &GramEncoding) -> Result<f64> {
    transducer::require_minimal(t)?;
    let pi = steady_state(t, im)?;
    let bl = block_law_from(t, im, 1, u64::MAX, pi.clone())?;
    let quantum = quantum_block_mutual_information(&bl, enc)?;
    Ok(quantum - transducer::initial_state_information(t, im, &pi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageWitness {
    pub pair: (usize, usize),
    /// The member of `pair` whose posterior moves.
    pub state: usize,
    /// Joint symbols z = x·|Y| + y.
    pub word: Vec<u32>,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageVerdict {
    pub advantage: bool,
    pub wasteful_pairs: Vec<(usize, usize)>,
    pub witness: Option<AdvantageWitness>,
}

/// Strict quantum advantage at stride L iff some state of a wasteful pair has
/// a posterior that some word moves away from its stationary weight. Pairs
/// touching a transient state carry no weight and are skipped.
pub fn advantage_predicate(t: &Transducer, im: &InputModel, stride: usize, budget: u64) -> Result<AdvantageVerdict> {
    let bl = transducer::block_law(t, im, stride, budget)?;
    advantage_predicate_on(t, &bl)
}

pub fn advantage_predicate_on(t: &Transducer, bl: &BlockLaw) -> Result<AdvantageVerdict> {
    let wasteful_pairs = distinguishability(t)?.wasteful_pairs();
    let pi = bl.stationary().weights();
    let shifted = |s: usize| {
        (0..bl.len())
            .map(|i| (i, bl.posterior(i)[s] - pi[s]))
            .find(|(_, d)| d.abs() > SHIFT_TOL)
    };
    for &(i, j) in wasteful_pairs.iter().filter(|&&(i, j)| pi[i] > 0.0 && pi[j] > 0.0) {
        for s in [i, j] {
            if let Some((w, shift)) = shifted(s) {
                let witness = AdvantageWitness { pair: (i, j), state: s, word: bl.word(w).to_vec(), shift };
                return Ok(AdvantageVerdict { advantage: true, wasteful_pairs, witness: Some(witness) });
            }
        }
    }
    Ok(AdvantageVerdict { advantage: false, wasteful_pairs, witness: None })
}

/// Figures for one quantum encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingFigures {
    pub label: String,
    pub provenance: Provenance,
    pub memory_information: f64,
    pub memory_entropy: f64,
    pub rate: f64,
    pub gap: AdvantageGap,
    pub online_dissipation: f64,
    pub feasibility: quantum_encoding::Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoReport {
    pub stride: usize,
    pub states: usize,
    pub classical_information: f64,
    pub classical_rate: f64,
    pub landauer_floor: f64,
    pub conditional_output_entropy: f64,
    pub online_cost: OnlineCost,
    pub encodings: Vec<EncodingFigures>,
    pub advantage: AdvantageVerdict,
    pub kt_scale: Option<f64>,
}

impl ThermoReport {
    pub fn encoding(&self, label: &str) -> Option<&EncodingFigures> {
        self.encodings.iter().find(|e| e.label == label)
    }

    /// Multiply a rate by kT ln 2 when a physical scale was supplied.
    pub fn joules(&self, rate: f64) -> Option<f64> {
        self.kt_scale.map(|kt| rate * kt * std::f64::consts::LN_2)
    }
}

/// Full report for a minimal machine. The systematic encoding is always
/// included as `"systematic"`; `extra` encodings follow in order.
pub fn analyze(
    t: &Transducer,
    im: &InputModel,
    stride: usize,
    extra: &[(String, GramEncoding)],
    budget: u64,
    kt_scale: Option<f64>,
) -> Result<ThermoReport> {
    transducer::require_minimal(t)?;
    let pi = steady_state(t, im)?;
    let bl = block_law_from(t, im, stride, budget, pi.clone())?;
    let classical_information = classical_block_mutual_information(&bl);
    let online = online_cost(t, im)?;

    let mut encodings = vec![("systematic".to_string(), quantum_encoding::systematic_encoding(t)?)];
    encodings.extend(extra.iter().cloned());
    let mut figures = Vec::with_capacity(encodings.len());
    for (label, enc) in encodings {
        let memory_information = quantum_block_mutual_information(&bl, &enc)?;
        figures.push(EncodingFigures {
            memory_entropy: quantum_encoding::memory_entropy(pi.weights(), &enc)?,
            rate: work_rate(&bl, im, memory_information),
            gap: advantage_gap(&bl, &enc)?,
            online_dissipation: quantum_online_dissipation(t, im, &enc)?,
            feasibility: quantum_encoding::necessary_conditions(&enc.gram, t)?,
            provenance: enc.provenance,
            memory_information,
            label,
        });
    }
    Ok(ThermoReport {
        stride,
        states: t.states(),
        classical_information,
        classical_rate: work_rate(&bl, im, classical_information),
        landauer_floor: landauer_floor(&bl, im),
        conditional_output_entropy: block_conditional_output_entropy(&bl, im),
        online_cost: online,
        encodings: figures,
        advantage: advantage_predicate_on(t, &bl)?,
        kt_scale,
    })
}
