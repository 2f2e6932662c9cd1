//! Quantum memory for causal states.
//!
//! The systematic construction gives causal state j one register per input,
//! |σ_j> = ⊗_x |σ_j^x>, whose overlaps solve
//!
//! ```text
//! c^x_ij = Σ_y sqrt(P(y|x,i) P(y|x,j)) · Π_x' c^x'_{λ(i,x,y), λ(j,x,y)}
//! ```
//!
//! We iterate that map from all-ones; it is monotone, so the iterates
//! decrease to the maximal fixed point. The Gram matrix is G = Π_x c^x.

use crate::entropy::{self, EnsembleBasis, EntropyError, GramKernel};
use crate::par;
use crate::transducer::{self, BlockLaw, Transducer, TransducerError};
use nalgebra::DMatrix;
use std::fmt;
use thiserror::Error;

pub const SOLVER_TOL: f64 = 1e-12;
pub const SOLVER_CAP: usize = 100_000;
/// Residual still accepted when the iteration cap is reached.
pub const SOLVER_ACCEPT: f64 = 1e-8;
/// Numeric overlaps below this are reported as zero when cross-checking.
pub const ZERO_OVERLAP: f64 = 1e-8;
/// Slack on the isometry necessary condition.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("overlap iteration stopped after {iterations} steps with residual {residual:.3e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("encoding covers {got} states but the machine has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("interrogation of depth {depth} needs {required:.3e} steps, budget is {budget}")]
    Budget { depth: usize, required: f64, budget: u64 },
}

pub type Result<T> = std::result::Result<T, QuantumError>;

/// Per-input overlap matrices c^x.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapFamily {
    per_input: Vec<DMatrix<f64>>,
    iterations: usize,
    residual: f64,
}

impl OverlapFamily {
    pub fn per_input(&self) -> &[DMatrix<f64>] {
        &self.per_input
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// G = Π_x c^x entrywise.
    pub fn gram(&self) -> DMatrix<f64> {
        product(&self.per_input)
    }
}

fn product(family: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = family[0].nrows();
    let mut g = DMatrix::from_element(n, n, 1.0);
    for c in family {
        g.component_mul_assign(c);
    }
    g
}

/// Step-by-step access to the overlap iteration, starting from all-ones.
pub struct OverlapIterates<'a> {
    machine: &'a Transducer,
    family: Vec<DMatrix<f64>>,
}

impl<'a> OverlapIterates<'a> {
    pub fn new(machine: &'a Transducer) -> Self {
        let n = machine.states();
        let family = vec![DMatrix::from_element(n, n, 1.0); machine.inputs()];
        Self { machine, family }
    }

    pub fn family(&self) -> &[DMatrix<f64>] {
        &self.family
    }

    /// Apply the map once; returns the largest absolute change.
    pub fn step(&mut self) -> f64 {
        let t = self.machine;
        let n = t.states();
        let g = product(&self.family);
        let rows = par::map_range(n, |i| {
            let mut row = vec![1.0; t.inputs() * n];
            for x in 0..t.inputs() {
                for j in 0..n {
                    if j != i {
                        row[x * n + j] = bhattacharyya_step(t, x, i, j, |a, b| g[(a, b)]);
                    }
                }
            }
            row
        });
        let mut change: f64 = 0.0;
        for x in 0..t.inputs() {
            let next = DMatrix::from_fn(n, n, |i, j| {
                if i <= j { rows[i][x * n + j] } else { rows[j][x * n + i] }
            });
            change = change.max((&next - &self.family[x]).amax());
            self.family[x] = next;
        }
        change
    }
}

/// Σ_y sqrt(P(y|x,i) P(y|x,j)) · v(λ_i, λ_j).
#[inline]
fn bhattacharyya_step<F: Fn(usize, usize) -> f64>(t: &Transducer, x: usize, i: usize, j: usize, v: F) -> f64 {
    let (ri, rj) = (t.row(i, x), t.row(j, x));
    let mut acc = 0.0;
    for y in 0..t.outputs() {
        let w = ri[y] * rj[y];
        if w > 0.0 {
            acc += w.sqrt() * v(t.next(i, x, y), t.next(j, x, y));
        }
    }
    acc
}

pub fn solve_overlaps(t: &Transducer) -> Result<OverlapFamily> {
    transducer::require_minimal(t)?;
    let mut it = OverlapIterates::new(t);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < SOLVER_CAP {
        residual = it.step();
        iterations += 1;
        if residual < SOLVER_TOL {
            break;
        }
    }
    if residual > SOLVER_ACCEPT {
        return Err(QuantumError::NotConverged { iterations, residual });
    }
    Ok(OverlapFamily { per_input: it.family, iterations, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Fixed point of the overlap recursion.
    Systematic,
    /// Supplied by the user, checked against the necessary condition only.
    UserSupplied,
    /// Closed-form states of a worked example.
    ClosedForm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Systematic => "systematic",
            Provenance::UserSupplied => "user_supplied",
            Provenance::ClosedForm => "closed_form",
        })
    }
}

/// Overlaps of the quantum memory states, optionally with vectors realising
/// them in the minimal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GramEncoding {
    pub gram: GramKernel,
    pub provenance: Provenance,
    pub basis: Option<EnsembleBasis>,
}

impl GramEncoding {
    pub fn new(gram: GramKernel, provenance: Provenance) -> Self {
        let basis = Some(EnsembleBasis::from_kernel(&gram));
        Self { gram, provenance, basis }
    }

    /// Orthogonal states: the classical embedding.
    pub fn identity(n: usize) -> Self {
        Self::new(GramKernel::identity(n), Provenance::UserSupplied)
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn basis(&self) -> EnsembleBasis {
        self.basis.clone().unwrap_or_else(|| EnsembleBasis::from_kernel(&self.gram))
    }
}

pub fn gram_from_overlaps(of: &OverlapFamily) -> Result<GramEncoding> {
    let gram = GramKernel::from_real(of.gram())?;
    Ok(GramEncoding::new(gram, Provenance::Systematic))
}

pub fn systematic_encoding(t: &Transducer) -> Result<GramEncoding> {
    gram_from_overlaps(&solve_overlaps(t)?)
}

/// A pair and input for which |G_ij| exceeds what any isometry can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionFailure {
    pub input: usize,
    pub i: usize,
    pub j: usize,
    pub overlap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Feasibility {
    pub failures: Vec<ConditionFailure>,
}

impl Feasibility {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check |G_ij| ≤ Σ_y sqrt(P(y|x,i)P(y|x,j)) |G_{λ_i λ_j}| for every input.
/// This is necessary for a junk-state isometry to exist; sufficiency is not
/// decided here.
pub fn necessary_conditions(gram: &GramKernel, t: &Transducer) -> Result<Feasibility> {
    if gram.dim() != t.states() {
        return Err(QuantumError::Dimension { expected: t.states(), got: gram.dim() });
    }
    let mut failures = Vec::new();
    for x in 0..t.inputs() {
        for i in 0..t.states() {
            for j in i + 1..t.states() {
                let overlap = gram.entry(i, j).norm();
                let bound = bhattacharyya_step(t, x, i, j, |a, b| gram.entry(a, b).norm());
                if overlap > bound + FEASIBILITY_TOL {
                    failures.push(ConditionFailure { input: x, i, j, overlap, bound });
                }
            }
        }
    }
    Ok(Feasibility { failures })
}

pub fn user_encoding(gram: GramKernel, t: &Transducer) -> Result<(GramEncoding, Feasibility)> {
    let feasibility = necessary_conditions(&gram, t)?;
    Ok((GramEncoding::new(gram, Provenance::UserSupplied), feasibility))
}

/// Two exact boolean relations over causal-state pairs.
///
/// `interrogable` is the finite-interrogation relation: seeded by pairs with
/// disjoint output supports under some input, closed under "some input sends
/// every common output to an interrogable pair".
///
/// `overlapping` is the zero pattern of the systematic Gram matrix: the least
/// set containing the diagonal and closed under "for every input some common
/// output leads to an overlapping pair". The two differ; see the README.
#[derive(Debug, Clone, PartialEq)]
pub struct Distinguishability {
    n: usize,
    interrogable: Vec<bool>,
    overlapping: Vec<bool>,
}

impl Distinguishability {
    pub fn states(&self) -> usize {
        self.n
    }

    /// Some finite adaptive interrogation tells i and j apart with certainty.
    pub fn interrogable(&self, i: usize, j: usize) -> bool {
        self.interrogable[i * self.n + j]
    }

    /// The systematic encoding gives i and j a nonzero overlap.
    pub fn overlapping(&self, i: usize, j: usize) -> bool {
        self.overlapping[i * self.n + j]
    }

    /// Causally wasteful pairs: distinct states whose memory states overlap.
    pub fn wasteful_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|i, j| self.overlapping(i, j))
    }

    /// Distinct pairs that no finite interrogation separates.
    pub fn uninterrogable_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|i, j| !self.interrogable(i, j))
    }

    fn pairs<F: Fn(usize, usize) -> bool>(&self, keep: F) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if keep(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn distinguishability(t: &Transducer) -> Result<Distinguishability> {
    transducer::require_minimal(t)?;
    let n = t.states();
    let common = |x: usize, i: usize, j: usize| {
        (0..t.outputs())
            .filter(move |&y| t.prob(i, x, y) > 0.0 && t.prob(j, x, y) > 0.0)
            .map(move |y| (t.next(i, x, y), t.next(j, x, y)))
    };

    let mut marked = vec![false; n * n];
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || marked[i * n + j] {
                    continue;
                }
                // empty common support counts as "all lead to marked pairs"
                let hit = (0..t.inputs()).any(|x| common(x, i, j).all(|(a, b)| marked[a * n + b]));
                if hit {
                    marked[i * n + j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut positive = vec![false; n * n];
    for i in 0..n {
        positive[i * n + i] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if positive[i * n + j] {
                    continue;
                }
                let hit = (0..t.inputs()).all(|x| common(x, i, j).any(|(a, b)| positive[a * n + b]));
                if hit {
                    positive[i * n + j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Distinguishability { n, interrogable: marked, overlapping: positive })
}

/// All-pairs table of V_D with V_0 = 1 and
/// V_{d+1}(i,j) = min_x Σ_y sqrt(P(y|x,i)P(y|x,j)) V_d(λ_i, λ_j).
pub fn interrogation_table(t: &Transducer, depth: usize, budget: u64) -> Result<DMatrix<f64>> {
    let n = t.states();
    let required = depth as f64 * (n * n * t.symbols()) as f64;
    if required > budget as f64 {
        return Err(QuantumError::Budget { depth, required, budget });
    }
    let mut v = DMatrix::from_element(n, n, 1.0);
    for _ in 0..depth {
        let prev = v.clone();
        v = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                return 1.0;
            }
            (0..t.inputs())
                .map(|x| bhattacharyya_step(t, x, i, j, |a, b| prev[(a, b)]))
                .fold(f64::INFINITY, f64::min)
        });
    }
    Ok(v)
}

pub fn interrogation_oracle(t: &Transducer, i: usize, j: usize, depth: usize, budget: u64) -> Result<f64> {
    Ok(interrogation_table(t, depth, budget)?[(i, j)])
}

/// I(Z_{0:L}; M_L): Holevo quantity of the end-of-block memory.
pub fn quantum_block_mutual_information(bl: &BlockLaw, enc: &GramEncoding) -> Result<f64> {
    if enc.dim() != bl.states() {
        return Err(QuantumError::Dimension { expected: bl.states(), got: enc.dim() });
    }
    Ok(entropy::holevo_raw(&enc.gram, bl.probabilities(), |i| bl.posterior(i))?)
}

/// Entropy of the stationary memory ρ = Σ π_j |σ_j><σ_j|.
pub fn memory_entropy(pi: &[f64], enc: &GramEncoding) -> Result<f64> {
    Ok(entropy::ensemble_entropy_of(&enc.gram, pi)?)
}
