//! Unifilar input-output transducers driven by i.i.d. inputs.
//!
//! A machine is a dense tensor over (state j, input x, output y) holding the
//! emission probability P(y|x,j) and the successor λ(j,x,y). Symbols and
//! states are plain indices; names live in the front end.

use crate::entropy::{self, entropy_bits, Distribution, EntropyError};
use crate::par;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

/// Row sums must match 1 this closely.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Rows closer than this are considered equal when minimizing.
pub const MERGE_TOL: f64 = 1e-10;
/// Default cap on (|X||Y|)^L · |states| for exact enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

const POWER_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransducerError {
    #[error("invalid machine:\n{0}")]
    Invalid(ValidationReport),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("state chain is reducible: {closed_classes} closed classes")]
    Reducible { closed_classes: usize },
    #[error("state chain is periodic with period {period}")]
    Periodic { period: usize },
    #[error("power iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error(
        "exact enumeration needs {required:.3e} configurations but the budget is {budget}; \
         raise --budget or AGENT_THERMO_BUDGET, lower the stride, or use the structured \
         case-study evaluators"
    )]
    Budget { required: f64, budget: u64 },
    #[error("machine is not minimal: {states} states but {causal_states} causal states")]
    NotMinimal { states: usize, causal_states: usize },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

pub type Result<T> = std::result::Result<T, TransducerError>;

/// One entry of a machine description: from state `from`, on input `input`,
/// emit `output` with probability `prob` and move to `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub input: usize,
    pub output: usize,
    pub prob: f64,
    pub to: usize,
}

/// Raw, unvalidated machine description.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A transition refers to a state or symbol that does not exist.
    IndexRange { transition: usize, field: &'static str, value: usize, limit: usize },
    /// A probability outside [0, 1] or not finite.
    ProbabilityRange { transition: usize, prob: f64 },
    Stochasticity { state: usize, input: usize, sum: f64 },
    Unifilarity { state: usize, input: usize, output: usize, successors: Vec<usize> },
    Empty(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexRange { transition, field, value, limit } => write!(
                f,
                "transition {transition}: {field} = {value} out of range (have {limit})"
            ),
            Violation::ProbabilityRange { transition, prob } => {
                write!(f, "transition {transition}: probability {prob} outside [0, 1]")
            }
            Violation::Stochasticity { state, input, sum } => write!(
                f,
                "stochasticity: state {state}, input {input}: outputs sum to {sum}"
            ),
            Violation::Unifilarity { state, input, output, successors } => write!(
                f,
                "unifilarity: state {state}, input {input}, output {output} leads to {successors:?}"
            ),
            Violation::Empty(what) => write!(f, "no {what}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

pub fn validate(spec: &MachineSpec) -> ValidationReport {
    let mut violations = Vec::new();
    for (what, n) in [("states", spec.states), ("inputs", spec.inputs), ("outputs", spec.outputs)] {
        if n == 0 {
            violations.push(Violation::Empty(what));
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    let (n, nx, ny) = (spec.states, spec.inputs, spec.outputs);
    let mut sums = vec![0.0; n * nx];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n * nx * ny];
    for (k, tr) in spec.transitions.iter().enumerate() {
        let mut in_range = true;
        for (field, value, limit) in [
            ("from", tr.from, n),
            ("input", tr.input, nx),
            ("output", tr.output, ny),
            ("to", tr.to, n),
        ] {
            if value >= limit {
                violations.push(Violation::IndexRange { transition: k, field, value, limit });
                in_range = false;
            }
        }
        if !tr.prob.is_finite() || !(0.0..=1.0).contains(&tr.prob) {
            violations.push(Violation::ProbabilityRange { transition: k, prob: tr.prob });
        }
        if !in_range {
            continue;
        }
        sums[tr.from * nx + tr.input] += tr.prob;
        if tr.prob > 0.0 {
            let s = &mut succ[(tr.from * nx + tr.input) * ny + tr.output];
            if !s.contains(&tr.to) {
                s.push(tr.to);
            }
        }
    }
    for j in 0..n {
        for x in 0..nx {
            let sum = sums[j * nx + x];
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                violations.push(Violation::Stochasticity { state: j, input: x, sum });
            }
            for y in 0..ny {
                let s = &succ[(j * nx + x) * ny + y];
                if s.len() > 1 {
                    violations.push(Violation::Unifilarity {
                        state: j,
                        input: x,
                        output: y,
                        successors: s.clone(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A validated unifilar transducer.
#[derive(Debug, Clone, PartialEq)]
pub struct Transducer {
    states: usize,
    inputs: usize,
    outputs: usize,
    prob: Vec<f64>,
    next: Vec<usize>,
}

impl Transducer {
    pub fn new(spec: &MachineSpec) -> Result<Self> {
        let report = validate(spec);
        if !report.is_valid() {
            return Err(TransducerError::Invalid(report));
        }
        let (n, nx, ny) = (spec.states, spec.inputs, spec.outputs);
        let mut prob = vec![0.0; n * nx * ny];
        // Successor of a zero-probability entry is never read; park it on j.
        let mut next: Vec<usize> = (0..n * nx * ny).map(|i| i / (nx * ny)).collect();
        for tr in &spec.transitions {
            let i = (tr.from * nx + tr.input) * ny + tr.output;
            prob[i] += tr.prob;
            if tr.prob > 0.0 {
                next[i] = tr.to;
            }
        }
        Ok(Self { states: n, inputs: nx, outputs: ny, prob, next })
    }

    /// Build from a closure returning (P(y|x,j), λ(j,x,y)).
    pub fn from_fn<F>(states: usize, inputs: usize, outputs: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> (f64, usize),
    {
        let mut transitions = Vec::new();
        for j in 0..states {
            for x in 0..inputs {
                for y in 0..outputs {
                    let (prob, to) = f(j, x, y);
                    if prob != 0.0 {
                        transitions.push(Transition { from: j, input: x, output: y, prob, to });
                    }
                }
            }
        }
        Self::new(&MachineSpec { states, inputs, outputs, transitions })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// |X||Y|, the number of joint symbols z = (x, y).
    pub fn symbols(&self) -> usize {
        self.inputs * self.outputs
    }

    #[inline]
    fn idx(&self, j: usize, x: usize, y: usize) -> usize {
        (j * self.inputs + x) * self.outputs + y
    }

    #[inline]
    pub fn prob(&self, j: usize, x: usize, y: usize) -> f64 {
        self.prob[self.idx(j, x, y)]
    }

    #[inline]
    pub fn next(&self, j: usize, x: usize, y: usize) -> usize {
        self.next[self.idx(j, x, y)]
    }

    /// P(·|x, j).
    pub fn row(&self, j: usize, x: usize) -> &[f64] {
        let start = self.idx(j, x, 0);
        &self.prob[start..start + self.outputs]
    }

    pub fn to_spec(&self) -> MachineSpec {
        let mut transitions = Vec::new();
        for j in 0..self.states {
            for x in 0..self.inputs {
                for y in 0..self.outputs {
                    let prob = self.prob(j, x, y);
                    if prob > 0.0 {
                        transitions.push(Transition { from: j, input: x, output: y, prob, to: self.next(j, x, y) });
                    }
                }
            }
        }
        MachineSpec { states: self.states, inputs: self.inputs, outputs: self.outputs, transitions }
    }

    /// Induced state chain P(k|j) = Σ_x q(x) Σ_y P(y|x,j) [λ(j,x,y) = k], sparse rows.
    pub fn state_chain(&self, q: &[f64]) -> Vec<Vec<(usize, f64)>> {
        (0..self.states)
            .map(|j| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for x in 0..self.inputs {
                    if q[x] == 0.0 {
                        continue;
                    }
                    for y in 0..self.outputs {
                        let p = q[x] * self.prob(j, x, y);
                        if p > 0.0 {
                            let k = self.next(j, x, y);
                            match row.iter_mut().find(|e| e.0 == k) {
                                Some(e) => e.1 += p,
                                None => row.push((k, p)),
                            }
                        }
                    }
                }
                row
            })
            .collect()
    }
}

/// i.i.d. input law plus the entropy of the blank output tape.
#[derive(Debug, Clone, PartialEq)]
pub struct InputModel {
    input: Distribution,
    default_output_entropy: f64,
}

impl InputModel {
    /// Default output-tape entropy log2 |Y|.
    pub fn new(input: Distribution, outputs: usize) -> Self {
        Self { input, default_output_entropy: (outputs as f64).log2() }
    }

    pub fn uniform(t: &Transducer) -> Self {
        Self::new(Distribution::uniform(t.inputs()), t.outputs())
    }

    pub fn with_default_output_entropy(mut self, bits: f64) -> Self {
        self.default_output_entropy = bits;
        self
    }

    pub fn input(&self) -> &Distribution {
        &self.input
    }

    pub fn q(&self) -> &[f64] {
        self.input.weights()
    }

    /// h_x.
    pub fn input_entropy(&self) -> f64 {
        entropy::shannon_entropy(&self.input)
    }

    /// h_dflt.
    pub fn default_output_entropy(&self) -> f64 {
        self.default_output_entropy
    }

    fn check(&self, t: &Transducer) -> Result<()> {
        if self.input.len() != t.inputs() {
            return Err(TransducerError::Shape(format!(
                "input law over {} symbols for a machine with {} inputs",
                self.input.len(),
                t.inputs()
            )));
        }
        Ok(())
    }
}

/// Stationary law of the induced state chain, by power iteration from
/// uniform on the closed class.
///
/// Reducibility (more than one closed class) and periodicity of the closed
/// class are detected structurally before iterating, so the error names the
/// actual defect. Transient states get zero weight.
pub fn steady_state(t: &Transducer, im: &InputModel) -> Result<Distribution> {
    im.check(t)?;
    let chain = t.state_chain(im.q());
    let n = t.states();
    let closed = closed_classes(&chain);
    if closed.len() != 1 {
        return Err(TransducerError::Reducible { closed_classes: closed.len() });
    }
    let period = period_of(&chain, &closed[0]);
    if period != 1 {
        return Err(TransducerError::Periodic { period });
    }

    // start on the closed class: it keeps its mass, transients stay at 0
    let mut pi = vec![0.0; n];
    for &j in &closed[0] {
        pi[j] = 1.0 / closed[0].len() as f64;
    }
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (j, row) in chain.iter().enumerate() {
            let m = pi[j];
            if m == 0.0 {
                continue;
            }
            for &(k, p) in row {
                next[k] += m * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if residual <= 1e-15 {
            break;
        }
    }
    if residual > 1e-12 {
        return Err(TransducerError::NotConverged { iterations: POWER_ITERATION_CAP, residual });
    }
    Ok(Distribution::normalized(pi)?)
}

fn closed_classes(chain: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(chain.len(), 0);
    let nodes: Vec<_> = (0..chain.len()).map(|_| g.add_node(())).collect();
    for (j, row) in chain.iter().enumerate() {
        for &(k, _) in row {
            g.add_edge(nodes[j], nodes[k], ());
        }
    }
    let mut comp = vec![0usize; chain.len()];
    let sccs = tarjan_scc(&g);
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    sccs.into_iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|v| chain[v.index()].iter().all(|&(k, _)| comp[k] == *c))
        })
        .map(|(_, members)| {
            let mut m: Vec<usize> = members.iter().map(|v| v.index()).collect();
            m.sort_unstable();
            m
        })
        .collect()
}

/// gcd of cycle lengths through BFS levels.
fn period_of(chain: &[Vec<(usize, f64)>], class: &[usize]) -> usize {
    let mut level = vec![usize::MAX; chain.len()];
    let mut queue = VecDeque::from([class[0]]);
    level[class[0]] = 0;
    let mut g = 0usize;
    while let Some(j) = queue.pop_front() {
        for &(k, _) in &chain[j] {
            if level[k] == usize::MAX {
                level[k] = level[j] + 1;
                queue.push_back(k);
            } else {
                let diff = (level[j] + 1).abs_diff(level[k]);
                g = gcd(g, diff);
            }
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Quotient machine plus the surjection old state → causal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub machine: Transducer,
    pub state_map: Vec<usize>,
}

/// Moore-style partition refinement: start from blocks of states with equal
/// emission rows under every input, split by the blocks of their successors,
/// repeat until the block count is stable. Blocks are numbered by first
/// occurrence, so an already minimal machine comes back unchanged.
pub fn minimize(t: &Transducer) -> Minimized {
    let n = t.states();
    let mut block = vec![0usize; n];
    let mut reps: Vec<usize> = Vec::new();
    for j in 0..n {
        let found = reps.iter().position(|&r| rows_equal(t, r, j));
        block[j] = match found {
            Some(b) => b,
            None => {
                reps.push(j);
                reps.len() - 1
            }
        };
    }
    let mut count = reps.len();
    loop {
        let mut signatures: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
        let mut refined = vec![0usize; n];
        for j in 0..n {
            let mut sig = Vec::with_capacity(t.symbols());
            for x in 0..t.inputs() {
                for y in 0..t.outputs() {
                    sig.push((t.prob(j, x, y) > 0.0).then(|| block[t.next(j, x, y)]));
                }
            }
            let key = (block[j], sig);
            refined[j] = match signatures.iter().position(|s| *s == key) {
                Some(b) => b,
                None => {
                    signatures.push(key);
                    signatures.len() - 1
                }
            };
        }
        block = refined;
        if signatures.len() == count {
            break;
        }
        count = signatures.len();
    }
    let mut rep = vec![usize::MAX; count];
    for j in (0..n).rev() {
        rep[block[j]] = j;
    }
    let machine = Transducer::from_fn(count, t.inputs(), t.outputs(), |b, x, y| {
        let j = rep[b];
        (t.prob(j, x, y), block[t.next(j, x, y)])
    })
    .expect("quotient of a valid machine is valid");
    Minimized { machine, state_map: block }
}

fn rows_equal(t: &Transducer, a: usize, b: usize) -> bool {
    (0..t.inputs()).all(|x| {
        t.row(a, x)
            .iter()
            .zip(t.row(b, x))
            .all(|(p, q)| (p - q).abs() <= MERGE_TOL)
    })
}

pub fn is_minimal(t: &Transducer) -> bool {
    minimize(t).machine.states() == t.states()
}

pub(crate) fn require_minimal(t: &Transducer) -> Result<()> {
    let causal = minimize(t).machine.states();
    if causal != t.states() {
        return Err(TransducerError::NotMinimal { states: t.states(), causal_states: causal });
    }
    Ok(())
}

pub fn check_budget(t: &Transducer, stride: usize, budget: u64) -> Result<()> {
    let required = (t.symbols() as f64).powi(stride as i32) * t.states() as f64;
    if required > budget as f64 {
        return Err(TransducerError::Budget { required, budget });
    }
    Ok(())
}

/// Exact law of length-L words z = (x_t, y_t) drawn in the stationary regime,
/// with the posterior over the memory state after the word.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLaw {
    stride: usize,
    states: usize,
    inputs: usize,
    outputs: usize,
    words: Vec<u32>,
    probs: Vec<f64>,
    posteriors: Vec<f64>,
    stationary: Distribution,
}

impl BlockLaw {
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Number of words with positive probability.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Word `i` as joint symbols z = x·|Y| + y.
    pub fn word(&self, i: usize) -> &[u32] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    pub fn decode(&self, z: u32) -> (usize, usize) {
        (z as usize / self.outputs, z as usize % self.outputs)
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// P(S_L = · | word i).
    pub fn posterior(&self, i: usize) -> &[f64] {
        &self.posteriors[i * self.states..(i + 1) * self.states]
    }

    pub fn stationary(&self) -> &Distribution {
        &self.stationary
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// H(Z_{0:L}).
    pub fn word_entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }
}

pub fn block_law(t: &Transducer, im: &InputModel, stride: usize, budget: u64) -> Result<BlockLaw> {
    let pi = steady_state(t, im)?;
    block_law_from(t, im, stride, budget, pi)
}

/// As [`block_law`] but starting from a caller-supplied stationary law.
pub fn block_law_from(
    t: &Transducer,
    im: &InputModel,
    stride: usize,
    budget: u64,
    stationary: Distribution,
) -> Result<BlockLaw> {
    im.check(t)?;
    if stride == 0 {
        return Err(TransducerError::Shape("stride must be positive".into()));
    }
    if stationary.len() != t.states() {
        return Err(TransducerError::Shape("stationary law over the wrong states".into()));
    }
    check_budget(t, stride, budget)?;

    let start: Vec<(usize, f64)> = stationary
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(j, &w)| (j, w))
        .collect();
    let first: Vec<u32> = (0..t.symbols() as u32).collect();
    let parts = par::map(&first, |&z0| {
        let mut out = Enumeration::default();
        let mut word = Vec::with_capacity(stride);
        let mut slot = vec![usize::MAX; t.states()];
        extend(t, im.q(), stride, &start, 1.0, z0, &mut word, &mut slot, &mut out);
        out
    });
    let mut law = BlockLaw {
        stride,
        states: t.states(),
        inputs: t.inputs(),
        outputs: t.outputs(),
        words: Vec::new(),
        probs: Vec::new(),
        posteriors: Vec::new(),
        stationary,
    };
    for part in parts {
        law.words.extend(part.words);
        law.probs.extend(part.probs);
        law.posteriors.extend(part.posteriors);
    }
    let total: f64 = law.probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(TransducerError::Entropy(EntropyError::InvalidDistribution(format!(
            "word probabilities sum to {total}"
        ))));
    }
    Ok(law)
}

#[derive(Default)]
struct Enumeration {
    words: Vec<u32>,
    probs: Vec<f64>,
    posteriors: Vec<f64>,
}

/// Push symbol `z` onto `word` given the forward vector `alpha` (unnormalised
/// mass on the current state), then recurse until the word has length `stride`.
#[allow(clippy::too_many_arguments)]
fn extend(
    t: &Transducer,
    q: &[f64],
    stride: usize,
    alpha: &[(usize, f64)],
    qprod: f64,
    z: u32,
    word: &mut Vec<u32>,
    slot: &mut [usize],
    out: &mut Enumeration,
) {
    let (x, y) = (z as usize / t.outputs(), z as usize % t.outputs());
    if q[x] == 0.0 {
        return;
    }
    let mut next: Vec<(usize, f64)> = Vec::with_capacity(alpha.len());
    for &(j, m) in alpha {
        let p = t.prob(j, x, y);
        if p > 0.0 {
            let k = t.next(j, x, y);
            match slot[k] {
                usize::MAX => {
                    slot[k] = next.len();
                    next.push((k, m * p));
                }
                at => next[at].1 += m * p,
            }
        }
    }
    for e in &next {
        slot[e.0] = usize::MAX;
    }
    if next.is_empty() {
        return;
    }
    let qprod = qprod * q[x];
    word.push(z);
    if word.len() == stride {
        let mass: f64 = next.iter().map(|e| e.1).sum();
        out.words.extend_from_slice(word);
        out.probs.push(qprod * mass);
        let base = out.posteriors.len();
        out.posteriors.resize(base + t.states(), 0.0);
        for &(k, m) in &next {
            out.posteriors[base + k] = m / mass;
        }
    } else {
        for z2 in 0..t.symbols() as u32 {
            extend(t, q, stride, &next, qprod, z2, word, slot, out);
        }
    }
    word.pop();
}

/// H(Y_{0:L} | X_{0:L}) = H(Z_{0:L}) − L·h_x.
pub fn block_conditional_output_entropy(bl: &BlockLaw, im: &InputModel) -> f64 {
    (bl.word_entropy() - bl.stride() as f64 * im.input_entropy()).max(0.0)
}

/// I(Z_{0:L}; S_L) = H(π) − Σ_z P(z) H(S_L | z).
pub fn classical_block_mutual_information(bl: &BlockLaw) -> f64 {
    let conditional: f64 = (0..bl.len())
        .map(|i| bl.prob(i) * entropy_bits(bl.posterior(i)))
        .sum();
    (entropy::shannon_entropy(bl.stationary()) - conditional).max(0.0)
}

/// I(Z_0; S_0) from the stationary joint P(z, j) = π_j q(x) P(y|x,j).
pub fn initial_state_information(t: &Transducer, im: &InputModel, pi: &Distribution) -> f64 {
    let joint = symbol_state_joint(t, im, pi.weights());
    entropy::mutual_information_raw(&joint, t.symbols(), t.states())
}

/// Row-major (z, j) table of π_j q(x) P(y|x,j).
pub(crate) fn symbol_state_joint(t: &Transducer, im: &InputModel, pi: &[f64]) -> Vec<f64> {
    let ns = t.states();
    let mut joint = vec![0.0; t.symbols() * ns];
    for j in 0..ns {
        for x in 0..t.inputs() {
            for y in 0..t.outputs() {
                joint[(x * t.outputs() + y) * ns + j] = pi[j] * im.q()[x] * t.prob(j, x, y);
            }
        }
    }
    joint
}

/// Block estimate H(Z_{0:L})/L next to the exact rate H(Z_0|S_0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRate {
    pub stride: usize,
    pub block_estimate: f64,
    pub conditional: f64,
}

impl EntropyRate {
    pub fn gap(&self) -> f64 {
        self.block_estimate - self.conditional
    }
}

pub fn entropy_rate_estimate(
    t: &Transducer,
    im: &InputModel,
    max_stride: usize,
    budget: u64,
) -> Result<EntropyRate> {
    let pi = steady_state(t, im)?;
    let conditional: f64 = (0..t.states())
        .map(|j| {
            let h: f64 = (0..t.inputs())
                .map(|x| im.q()[x] * entropy_bits(t.row(j, x)))
                .sum();
            pi.weights()[j] * (im.input_entropy() + h)
        })
        .sum();
    let bl = block_law_from(t, im, max_stride, budget, pi)?;
    Ok(EntropyRate {
        stride: max_stride,
        block_estimate: bl.word_entropy() / max_stride as f64,
        conditional,
    })
}

/// One simulated time step: the machine sits in `state` when `input`
/// arrives and answers `output`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub t: u64,
    pub input: usize,
    pub output: usize,
    pub state: usize,
}

/// Endless seeded trajectory started from a stationary state.
pub struct Trajectory<'a> {
    machine: &'a Transducer,
    rng: ChaCha8Rng,
    inputs: WeightedIndex<f64>,
    rows: Vec<Option<WeightedIndex<f64>>>,
    state: usize,
    t: u64,
}

impl Iterator for Trajectory<'_> {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        let m = self.machine;
        let x = self.inputs.sample(&mut self.rng);
        let row = self.rows[self.state * m.inputs() + x]
            .as_ref()
            .expect("rows reachable under the input law are stochastic");
        let y = row.sample(&mut self.rng);
        let step = Step { t: self.t, input: x, output: y, state: self.state };
        self.state = m.next(self.state, x, y);
        self.t += 1;
        Some(step)
    }
}

pub fn trajectory<'a>(t: &'a Transducer, im: &InputModel, seed: u64) -> Result<Trajectory<'a>> {
    let pi = steady_state(t, im)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = WeightedIndex::new(pi.weights()).expect("stationary law has mass");
    let state = start.sample(&mut rng);
    Ok(build_trajectory(t, im, rng, state))
}

/// Trajectory from a fixed start state; no stationarity needed.
pub fn trajectory_from<'a>(t: &'a Transducer, im: &InputModel, seed: u64, state: usize) -> Result<Trajectory<'a>> {
    im.check(t)?;
    if state >= t.states() {
        return Err(TransducerError::Shape(format!("no state {state}")));
    }
    Ok(build_trajectory(t, im, ChaCha8Rng::seed_from_u64(seed), state))
}

fn build_trajectory<'a>(t: &'a Transducer, im: &InputModel, rng: ChaCha8Rng, state: usize) -> Trajectory<'a> {
    let inputs = WeightedIndex::new(im.q()).expect("input law has mass");
    let rows = (0..t.states())
        .flat_map(|j| (0..t.inputs()).map(move |x| (j, x)))
        .map(|(j, x)| WeightedIndex::new(t.row(j, x)).ok())
        .collect();
    Trajectory { machine: t, rng, inputs, rows, state, t: 0 }
}

pub fn simulate(t: &Transducer, im: &InputModel, steps: usize, seed: u64) -> Result<Vec<Step>> {
    Ok(trajectory(t, im, seed)?.take(steps).collect())
}

/// Unifilar refinement whose state also remembers the last symbol:
/// state (k, z) is numbered k·|X||Y| + z.
pub fn lift_by_last_symbol(t: &Transducer) -> Transducer {
    let nz = t.symbols();
    Transducer::from_fn(t.states() * nz, t.inputs(), t.outputs(), |s, x, y| {
        let j = s / nz;
        (t.prob(j, x, y), t.next(j, x, y) * nz + x * t.outputs() + y)
    })
    .expect("lift of a valid machine is valid")
}

/// Refinement with a copy of `state`: a new state n behaves like `state`,
/// and incoming edges into `state` alternate between the two copies.
pub fn split_state(t: &Transducer, state: usize) -> Transducer {
    let n = t.states();
    Transducer::from_fn(n + 1, t.inputs(), t.outputs(), |s, x, y| {
        let j = if s == n { state } else { s };
        let k = t.next(j, x, y);
        let to = if k == state && (s + x + y) % 2 == 1 { n } else { k };
        (t.prob(j, x, y), to)
    })
    .expect("split of a valid machine is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coin() -> Transducer {
        Transducer::from_fn(1, 2, 2, |_, _, _| (0.5, 0)).unwrap()
    }

    fn flip_flop() -> Transducer {
        // deterministic period-2 cycle
        Transducer::from_fn(2, 1, 1, |j, _, _| (1.0, 1 - j)).unwrap()
    }

    #[test]
    fn validation_reports_each_defect() {
        let mut spec = coin().to_spec();
        spec.transitions[0].prob = 0.4;
        let r = validate(&spec);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::Stochasticity { state: 0, input: 0, .. }));

        let spec = MachineSpec {
            states: 2,
            inputs: 1,
            outputs: 1,
            transitions: vec![
                Transition { from: 0, input: 0, output: 0, prob: 0.5, to: 0 },
                Transition { from: 0, input: 0, output: 0, prob: 0.5, to: 1 },
                Transition { from: 1, input: 0, output: 0, prob: 1.0, to: 1 },
            ],
        };
        let r = validate(&spec);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::Unifilarity { state: 0, .. }));
    }

    #[test]
    fn single_state_is_stationary() {
        let t = coin();
        let pi = steady_state(&t, &InputModel::uniform(&t)).unwrap();
        assert_eq!(pi.weights(), &[1.0]);
    }

    #[test]
    fn periodic_and_reducible_chains_are_rejected() {
        let t = flip_flop();
        let err = steady_state(&t, &InputModel::uniform(&t)).unwrap_err();
        assert_eq!(err, TransducerError::Periodic { period: 2 });

        let two_sinks = Transducer::from_fn(2, 1, 1, |j, _, _| (1.0, j)).unwrap();
        let err = steady_state(&two_sinks, &InputModel::uniform(&two_sinks)).unwrap_err();
        assert_eq!(err, TransducerError::Reducible { closed_classes: 2 });
    }

    #[test]
    fn transient_states_get_no_weight() {
        // state 0 leaks into the absorbing, aperiodic state 1
        let t = Transducer::from_fn(2, 1, 2, |j, _, y| match (j, y) {
            (0, 0) => (0.5, 0),
            (0, 1) => (0.5, 1),
            (_, 0) => (0.5, 1),
            _ => (0.5, 1),
        })
        .unwrap();
        let pi = steady_state(&t, &InputModel::uniform(&t)).unwrap();
        assert_abs_diff_eq!(pi.weights()[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_states_merge() {
        let t = Transducer::from_fn(3, 1, 2, |j, _, y| match j {
            2 => (if y == 0 { 1.0 } else { 0.0 }, 0),
            _ => (0.5, if y == 0 { 1 } else { 2 }),
        })
        .unwrap();
        let m = minimize(&t);
        assert_eq!(m.machine.states(), 2);
        assert_eq!(m.state_map, vec![0, 0, 1]);
    }

    #[test]
    fn memoryless_coin_block_law() {
        let t = coin();
        let im = InputModel::uniform(&t);
        let bl = block_law(&t, &im, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(bl.len(), 64);
        assert_abs_diff_eq!(block_conditional_output_entropy(&bl, &im), 3.0, epsilon = 1e-12);
        assert_eq!(classical_block_mutual_information(&bl), 0.0);
        for i in 0..bl.len() {
            assert_eq!(bl.posterior(i), &[1.0]);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let t = coin();
        let im = InputModel::uniform(&t);
        assert!(matches!(block_law(&t, &im, 12, DEFAULT_BUDGET), Err(TransducerError::Budget { .. })));
        assert!(block_law(&t, &im, 8, 1 << 16).is_ok());
    }

    #[test]
    fn echo_entropy_rate() {
        let echo = Transducer::from_fn(1, 2, 2, |_, x, y| ((x == y) as u8 as f64, 0)).unwrap();
        let r = entropy_rate_estimate(&echo, &InputModel::uniform(&echo), 4, DEFAULT_BUDGET).unwrap();
        assert_abs_diff_eq!(r.conditional, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.block_estimate, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_machine_repeats_itself() {
        let t = Transducer::from_fn(1, 1, 2, |_, _, y| ((y == 1) as u8 as f64, 0)).unwrap();
        let run = simulate(&t, &InputModel::uniform(&t), 50, 3).unwrap();
        assert!(run.iter().all(|s| s.output == 1 && s.state == 0));
    }
}
