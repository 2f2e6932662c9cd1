//! Base-2 information measures over finite distributions and over pure-state
//! ensembles described only by their pairwise overlaps.
//!
//! An ensemble {w_i, |σ_i>} is never materialised as state vectors. Its
//! density operator ρ = Σ w_i |σ_i><σ_i| has the same nonzero spectrum as the
//! weighted kernel K_ij = sqrt(w_i w_j) <σ_i|σ_j>, so the Gram matrix is all
//! we need.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Tolerance on Σ w = 1 for a [`Distribution`].
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` are treated as roundoff and clamped to zero.
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues of a Gram matrix above this count towards its rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid Gram kernel: {0}")]
    Kernel(String),
    #[error("relative entropy is infinite: support violation at index {0}")]
    InfiniteDivergence(usize),
}

pub type Result<T> = std::result::Result<T, EntropyError>;

/// Probability vector over `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(EntropyError::InvalidDistribution("empty support".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || !(0.0..=1.0 + NORMALIZATION_TOL).contains(&w) {
                return Err(EntropyError::InvalidDistribution(format!(
                    "weight {w} at index {i} outside [0, 1]"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(EntropyError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Ok(Self { weights })
    }

    /// Scale nonnegative weights to unit mass.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(EntropyError::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(EntropyError::InvalidDistribution("zero total mass".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs a nonempty support");
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn point(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// −Σ w log2 w over raw weights, with 0·log 0 = 0.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum()
}

pub fn shannon_entropy(d: &Distribution) -> f64 {
    entropy_bits(d.weights())
}

/// I(A;B) for a joint laid out row-major as `rows × cols` (A indexes rows).
pub fn mutual_information(joint: &Distribution, rows: usize, cols: usize) -> Result<f64> {
    if rows * cols != joint.len() {
        return Err(EntropyError::Shape(format!(
            "joint of length {} is not {rows}×{cols}",
            joint.len()
        )));
    }
    Ok(mutual_information_raw(joint.weights(), rows, cols))
}

pub(crate) fn mutual_information_raw(w: &[f64], rows: usize, cols: usize) -> f64 {
    let mut a = vec![0.0; rows];
    let mut b = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            a[r] += w[r * cols + c];
            b[c] += w[r * cols + c];
        }
    }
    (entropy_bits(&a) + entropy_bits(&b) - entropy_bits(w)).max(0.0)
}

/// D(p‖q) in bits. A support violation is reported, not turned into `inf`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(EntropyError::Shape(format!(
            "divergence between lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    kl_bits(p.weights(), q.weights())
}

pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(EntropyError::InfiniteDivergence(i));
            }
            d += pi * (pi / qi).log2();
        }
    }
    Ok(d.max(0.0))
}

/// Hermitian, unit-diagonal, positive semidefinite overlap matrix
/// G_ij = <σ_i|σ_j>.
#[derive(Debug, Clone, PartialEq)]
pub struct GramKernel {
    entries: DMatrix<C64>,
    real: bool,
}

impl GramKernel {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let kernel = Self::checked_shape(entries)?;
        let min = kernel.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(EntropyError::Kernel(format!(
                "smallest eigenvalue {min:.3e} is below -{PSD_TOL:e}"
            )));
        }
        Ok(kernel)
    }

    pub fn from_real(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|v| C64::new(v, 0.0)))
    }

    /// Gram matrix of explicit (not necessarily orthogonal) unit vectors.
    pub fn from_states(states: &[DVector<C64>]) -> Result<Self> {
        if states.is_empty() {
            return Err(EntropyError::Shape("no states".into()));
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(EntropyError::Shape("states of different dimension".into()));
        }
        let n = states.len();
        let g = DMatrix::from_fn(n, n, |i, j| states[i].dotc(&states[j]));
        Self::new(g)
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n), real: true }
    }

    /// Skips the PSD eigensolve; for closed forms that are Gram matrices of
    /// explicit vectors by construction.
    pub(crate) fn trusted(entries: DMatrix<C64>) -> Self {
        let real = entries.iter().all(|z| z.im == 0.0);
        Self { entries, real }
    }

    fn checked_shape(entries: DMatrix<C64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(EntropyError::Shape(format!(
                "Gram matrix must be square and nonempty, got {}×{}",
                n,
                entries.ncols()
            )));
        }
        for i in 0..n {
            let d = entries[(i, i)];
            if (d.re - 1.0).abs() > PSD_TOL || d.im.abs() > PSD_TOL {
                return Err(EntropyError::Kernel(format!("diagonal entry {i} is {d}")));
            }
            for j in 0..n {
                let z = entries[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() || z.norm() > 1.0 + PSD_TOL {
                    return Err(EntropyError::Kernel(format!(
                        "entry ({i},{j}) = {z} is not an overlap"
                    )));
                }
                if (z - entries[(j, i)].conj()).norm() > PSD_TOL {
                    return Err(EntropyError::Kernel(format!(
                        "entry ({i},{j}) breaks Hermitian symmetry"
                    )));
                }
            }
        }
        let mut entries = entries;
        for i in 0..n {
            entries[(i, i)] = C64::new(1.0, 0.0);
        }
        let real = entries.iter().all(|z| z.im == 0.0);
        Ok(Self { entries, real })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries, self.real)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Principal submatrix on `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.entries[(idx[a], idx[b])]);
        Self { entries: m, real: self.real }
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>, real: bool) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    if real {
        let re = m.map(|z| z.re);
        SymmetricEigen::new(re).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
    }
}

/// A Gram kernel together with ensemble weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKernel {
    kernel: GramKernel,
    weights: Distribution,
}

impl WeightedKernel {
    pub fn new(kernel: GramKernel, weights: Distribution) -> Result<Self> {
        if kernel.dim() != weights.len() {
            return Err(EntropyError::Shape(format!(
                "kernel of dimension {} with {} weights",
                kernel.dim(),
                weights.len()
            )));
        }
        Ok(Self { kernel, weights })
    }

    pub fn kernel(&self) -> &GramKernel {
        &self.kernel
    }

    pub fn weights(&self) -> &Distribution {
        &self.weights
    }

    /// Clamped eigenvalues of K = sqrt(w_i w_j) G_ij.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        weighted_spectrum(&self.kernel, self.weights.weights())
    }
}

/// Spectrum of the weighted kernel, restricted to the support of `weights`.
/// Eigenvalues in (−PSD_TOL, 0) are clamped to zero.
pub fn weighted_spectrum(kernel: &GramKernel, weights: &[f64]) -> Result<Vec<f64>> {
    if kernel.dim() != weights.len() {
        return Err(EntropyError::Shape(format!(
            "kernel of dimension {} with {} weights",
            kernel.dim(),
            weights.len()
        )));
    }
    let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    match support.len() {
        0 => return Err(EntropyError::InvalidDistribution("empty support".into())),
        1 => return Ok(vec![weights[support[0]]]),
        _ => {}
    }
    let sq: Vec<f64> = support.iter().map(|&i| weights[i].sqrt()).collect();
    let k = DMatrix::from_fn(support.len(), support.len(), |a, b| {
        kernel.entries[(support[a], support[b])] * (sq[a] * sq[b])
    });
    let mut eig = hermitian_eigenvalues(&k, kernel.real);
    for ev in eig.iter_mut() {
        if *ev < -PSD_TOL {
            return Err(EntropyError::Kernel(format!(
                "weighted kernel has eigenvalue {ev:.3e}"
            )));
        }
        *ev = ev.max(0.0);
    }
    Ok(eig)
}

/// Von Neumann entropy of Σ w_i |σ_i><σ_i| given only the overlaps.
pub fn ensemble_entropy(wk: &WeightedKernel) -> Result<f64> {
    ensemble_entropy_of(&wk.kernel, wk.weights.weights())
}

pub fn ensemble_entropy_of(kernel: &GramKernel, weights: &[f64]) -> Result<f64> {
    Ok(entropy_bits(&weighted_spectrum(kernel, weights)?))
}

/// χ = S(Σ_z P(z) ρ_z) − Σ_z P(z) S(ρ_z), every ρ_z being an ensemble over the
/// same set of states with overlaps `kernel`.
pub fn holevo_information(
    prior: &Distribution,
    kernel: &GramKernel,
    conditionals: &[Distribution],
) -> Result<f64> {
    if prior.len() != conditionals.len() {
        return Err(EntropyError::Shape(format!(
            "{} prior weights for {} conditionals",
            prior.len(),
            conditionals.len()
        )));
    }
    if let Some(bad) = conditionals.iter().position(|c| c.len() != kernel.dim()) {
        return Err(EntropyError::Shape(format!(
            "conditional {bad} is not over the kernel's {} states",
            kernel.dim()
        )));
    }
    holevo_raw(kernel, prior.weights(), |z| conditionals[z].weights())
}

pub(crate) fn holevo_raw<'a, F>(kernel: &GramKernel, prior: &[f64], conditional: F) -> Result<f64>
where
    F: Fn(usize) -> &'a [f64] + Sync + Send,
{
    let n = kernel.dim();
    let mut mix = vec![0.0; n];
    for (z, &pz) in prior.iter().enumerate() {
        for (m, c) in mix.iter_mut().zip(conditional(z)) {
            *m += pz * c;
        }
    }
    let conditional_entropies = crate::par::map_range(prior.len(), |z| {
        if prior[z] <= 0.0 {
            return Ok(0.0);
        }
        let c = conditional(z);
        if c.iter().filter(|&&w| w > 0.0).count() <= 1 {
            Ok(0.0)
        } else {
            ensemble_entropy_of(kernel, c)
        }
    });
    let mut conditional_part = 0.0;
    for (z, h) in conditional_entropies.into_iter().enumerate() {
        conditional_part += prior[z] * h?;
    }
    Ok(ensemble_entropy_of(kernel, &mix)? - conditional_part)
}

/// Explicit vectors realising a Gram matrix in its minimal dimension:
/// G = U Λ U†, keep λ > RANK_TOL, columns of sqrt(Λ_r) U_r† are the states.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleBasis {
    vectors: DMatrix<C64>,
}

impl EnsembleBasis {
    pub fn from_kernel(kernel: &GramKernel) -> Self {
        let n = kernel.dim();
        let (values, vecs): (Vec<f64>, DMatrix<C64>) = if kernel.real {
            let e = SymmetricEigen::new(kernel.entries.map(|z| z.re));
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|v| C64::new(v, 0.0)))
        } else {
            let e = SymmetricEigen::new(kernel.entries.clone());
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
        };
        let keep: Vec<usize> = (0..n).filter(|&k| values[k] > RANK_TOL).collect();
        let vectors = DMatrix::from_fn(keep.len(), n, |r, i| {
            vecs[(i, keep[r])].conj() * values[keep[r]].sqrt()
        });
        Self { vectors }
    }

    /// Wrap explicit column vectors (one per state).
    pub fn from_columns(vectors: DMatrix<C64>) -> Self {
        Self { vectors }
    }

    pub fn rank(&self) -> usize {
        self.vectors.nrows()
    }

    /// Column i is |σ_i>.
    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn gram(&self) -> DMatrix<C64> {
        self.vectors.adjoint() * &self.vectors
    }

    /// ρ = Σ w_i |σ_i><σ_i| in the basis of the factorisation.
    pub fn density(&self, weights: &[f64]) -> DMatrix<C64> {
        let r = self.rank();
        let mut rho = DMatrix::zeros(r, r);
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                let col = self.vectors.column(i);
                rho += (col * col.adjoint()) * C64::new(w, 0.0);
            }
        }
        rho
    }
}

pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    let eig = SymmetricEigen::new(rho.clone()).eigenvalues;
    entropy_bits(&eig.iter().map(|&v| v.max(0.0)).collect::<Vec<_>>())
}

/// Quantum relative entropy S(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ, with log σ taken
/// on the support of σ. Fails if ρ has weight outside that support.
pub fn relative_entropy(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    let r = SymmetricEigen::new(rho.clone());
    let s = SymmetricEigen::new(sigma.clone());
    let mut neg_entropy = 0.0;
    for &l in r.eigenvalues.iter() {
        if l > RANK_TOL {
            neg_entropy += l * l.log2();
        }
    }
    let mut cross = 0.0;
    for k in 0..s.eigenvalues.len() {
        let v = s.eigenvectors.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        let lambda = s.eigenvalues[k];
        if lambda > RANK_TOL {
            cross += weight * lambda.log2();
        } else if weight > PSD_TOL {
            return Err(EntropyError::InfiniteDivergence(k));
        }
    }
    Ok(neg_entropy - cross)
}
