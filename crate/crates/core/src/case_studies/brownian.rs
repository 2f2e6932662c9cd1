//! Particle on a ring of N bins. Each step the agent reports the particle's
//! new bin; input 1 first kicks the particle half way round. Displacements
//! follow a discretised Gaussian of width σ (in units of the circumference).
//!
//! Classical memory must store the bin, log2 N bits. The quantum memory
//! |σ_j> = Σ_k sqrt(P(k|j)) |k> has overlaps that depend only on j − k, so
//! its entropy comes from the spectrum of a circulant matrix and saturates
//! as N grows.

use super::{real_gram, CaseStudyError, Result};
use crate::entropy::{entropy_bits, shannon_entropy, GramKernel, PSD_TOL};
use crate::par;
use crate::transducer::{steady_state, InputModel, Transducer};
use nalgebra::DMatrix;
use std::f64::consts::{LN_2, PI};

/// Largest ring the sweep will diagonalise.
pub const MAX_BINS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianRingParams {
    pub n: usize,
    pub sigma: f64,
}

impl BrownianRingParams {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(CaseStudyError::Domain(format!("ring needs at least 2 bins, got {n}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(CaseStudyError::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { n, sigma })
    }

    /// Normalised displacement law: entry d is P(move by d bins).
    pub fn displacement_row(&self) -> Vec<f64> {
        let n = self.n;
        let mut row: Vec<f64> = (0..n)
            .map(|d| {
                let circ = d.min(n - d) as f64 / n as f64;
                (-circ * circ / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= total);
        row
    }
}

pub fn brownian_ring(params: BrownianRingParams) -> Result<Transducer> {
    let n = params.n;
    let row = params.displacement_row();
    let half = n / 2;
    Ok(Transducer::from_fn(n, 2, n, |j, x, k| {
        let d = (k + 2 * n - j - x * half) % n;
        (row[d], k)
    })?)
}

/// Uniform kicks; the blank output tape holds one of N bin labels.
pub fn brownian_input_model(params: BrownianRingParams) -> InputModel {
    InputModel::new(crate::entropy::Distribution::uniform(2), params.n)
}

/// g(d) = Σ_k sqrt(P(k) P(k + d)): the overlap between memory states d bins
/// apart. The same for both inputs, since the kick shifts both states alike.
pub fn brownian_overlap_row(params: BrownianRingParams) -> Vec<f64> {
    let row = params.displacement_row();
    let sq: Vec<f64> = row.iter().map(|w| w.sqrt()).collect();
    let n = params.n;
    (0..n)
        .map(|d| (0..n).map(|k| sq[k] * sq[(k + d) % n]).sum::<f64>().min(1.0))
        .collect()
}

/// Dense G_ij = Σ_k sqrt(P_ik P_jk).
pub fn brownian_gram(params: BrownianRingParams) -> GramKernel {
    let g = brownian_overlap_row(params);
    let n = params.n;
    let mut m = DMatrix::from_fn(n, n, |i, j| g[(j + n - i) % n]);
    for i in 0..n {
        m[(i, i)] = 1.0;
    }
    real_gram(m)
}

/// H(M_0) for uniform weights: the eigenvalues of G/N are the discrete
/// Fourier transform of g/N.
pub fn brownian_quantum_entropy(params: BrownianRingParams) -> Result<f64> {
    let g = brownian_overlap_row(params);
    let n = params.n;
    let spectrum = par::map_range(n, |m| {
        (0..n)
            .map(|d| g[d] * (2.0 * PI * ((m * d) % n) as f64 / n as f64).cos())
            .sum::<f64>()
            / n as f64
    });
    if let Some(bad) = spectrum.iter().find(|&&l| l < -PSD_TOL) {
        return Err(CaseStudyError::Domain(format!("circulant spectrum has eigenvalue {bad:.3e}")));
    }
    let clamped: Vec<f64> = spectrum.into_iter().map(|l| l.max(0.0)).collect();
    Ok(entropy_bits(&clamped))
}

/// 1/(2 ln 2) − (1 + 4√(2π)σ) log2(2√(2π)σ), valid while 2√(2π)σ < 1.
pub fn brownian_quantum_entropy_bound(sigma: f64) -> Result<f64> {
    let a = 2.0 * (2.0 * PI).sqrt() * sigma;
    if !(a > 0.0 && a < 1.0) {
        return Err(CaseStudyError::Domain(format!(
            "bound needs 0 < 2√(2π)σ < 1, got {a}"
        )));
    }
    Ok(1.0 / (2.0 * LN_2) - (1.0 + 2.0 * a) * a.log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianRow {
    pub n: usize,
    pub h_classical: f64,
    pub h_quantum: f64,
    /// Classical minus quantum, kT ln 2 per step at any stride.
    pub gap: f64,
}

pub fn brownian_row(params: BrownianRingParams) -> Result<BrownianRow> {
    if params.n > MAX_BINS {
        return Err(CaseStudyError::Domain(format!(
            "N = {} exceeds the eigensolve budget of {MAX_BINS}",
            params.n
        )));
    }
    let t = brownian_ring(params)?;
    let h_classical = shannon_entropy(&steady_state(&t, &brownian_input_model(params))?);
    let h_quantum = brownian_quantum_entropy(params)?;
    Ok(BrownianRow { n: params.n, h_classical, h_quantum, gap: h_classical - h_quantum })
}

pub fn brownian_sweep(sigma: f64, ns: &[usize]) -> Result<Vec<BrownianRow>> {
    let params: Vec<BrownianRingParams> = ns
        .iter()
        .map(|&n| BrownianRingParams::new(n, sigma))
        .collect::<Result<_>>()?;
    par::try_map(&params, |&p| brownian_row(p))
}
