//! Stochastic reset clock. Time is sliced into steps of length dt; the clock
//! ticks after a waiting time with survival Φ(n) = p Γ0^n + (1−p) Γ1^n
//! (Γ_i = e^{−γ_i dt}). Each step an external reset arrives with probability
//! 1 − Γx (Γx = e^{−γx dt}); input 1 is a reset, which forces a tick. The
//! memory is the age n since the last tick, truncated at a cutoff T whose
//! state absorbs all older ages with the hazard at T.
//!
//! The quantum memory is two-dimensional for every dt:
//! ς_n = sqrt(pΓ0^n/Φ(n)) |h0> + i sqrt((1−p)Γ1^n/Φ(n)) |h1>, with
//! <h0|h1> = g = sqrt((1−Γ0)(1−Γ1)) / (1 − sqrt(Γ0 Γ1)).
//!
//! A window of L = τ/dt steps with any tick or reset pins down the age at its
//! end, so only the all-silent window leaves a nontrivial posterior. That
//! turns a 4^L enumeration into an L-step propagation.

use super::{CaseStudyError, Result};
use crate::entropy::{entropy_bits, von_neumann_entropy, Distribution, EnsembleBasis, GramKernel, C64};
use crate::par;
use crate::transducer::{InputModel, Transducer};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetClockParams {
    pub p: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gammax: f64,
    pub dt: f64,
    pub tau: f64,
    /// Oldest tracked age; defaults to ⌈1/dt⌉.
    pub truncation: Option<usize>,
}

impl Default for ResetClockParams {
    fn default() -> Self {
        Self { p: 0.5, gamma0: 1.0, gamma1: 10.0, gammax: 0.1, dt: 0.1, tau: 1.0, truncation: None }
    }
}

impl ResetClockParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CaseStudyError::Domain(msg));
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if !(self.gamma0 > 0.0 && self.gamma1 > 0.0 && self.gamma0.is_finite() && self.gamma1.is_finite()) {
            return bad(format!("decay rates must be positive, got {} and {}", self.gamma0, self.gamma1));
        }
        if !(self.gammax >= 0.0 && self.gammax.is_finite()) {
            return bad(format!("reset rate must be nonnegative, got {}", self.gammax));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        let steps = self.tau / self.dt;
        if self.tau.is_nan() || self.tau <= 0.0 || (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
            return bad(format!("tau = {} is not a positive multiple of dt = {}", self.tau, self.dt));
        }
        if self.truncation == Some(0) {
            return bad("truncation must be at least 1".into());
        }
        Ok(())
    }

    /// L = τ/dt.
    pub fn stride(&self) -> usize {
        (self.tau / self.dt).round() as usize
    }

    /// Index of the merged tail state.
    pub fn cutoff(&self) -> usize {
        self.truncation.unwrap_or_else(|| (1.0 / self.dt - 1e-9).ceil().max(1.0) as usize)
    }

    pub fn gammas(&self) -> (f64, f64, f64) {
        ((-self.gamma0 * self.dt).exp(), (-self.gamma1 * self.dt).exp(), (-self.gammax * self.dt).exp())
    }

    /// Φ(n).
    pub fn survival(&self, n: usize) -> f64 {
        let t = n as f64 * self.dt;
        self.p * (-self.gamma0 * t).exp() + (1.0 - self.p) * (-self.gamma1 * t).exp()
    }

    /// (a_n², b_n²) = (pΓ0^n, (1−p)Γ1^n) / Φ(n), evaluated without underflow.
    pub fn mixture_weights(&self, n: usize) -> (f64, f64) {
        if self.p == 0.0 {
            return (0.0, 1.0);
        }
        if self.p == 1.0 {
            return (1.0, 0.0);
        }
        let log_ratio = ((1.0 - self.p) / self.p).ln() - (self.gamma1 - self.gamma0) * n as f64 * self.dt;
        let a2 = if log_ratio > 0.0 {
            let e = (-log_ratio).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + log_ratio.exp())
        };
        (a2, 1.0 - a2)
    }

    /// Φ(n+1)/Φ(n): chance of staying silent for one more step at age n.
    pub fn silent_probability(&self, n: usize) -> f64 {
        let (g0, g1, _) = self.gammas();
        let (a2, b2) = self.mixture_weights(n);
        a2 * g0 + b2 * g1
    }

    /// <h0|h1>.
    pub fn g(&self) -> f64 {
        let (g0, g1, _) = self.gammas();
        let denom = 1.0 - (g0 * g1).sqrt();
        (((1.0 - g0) * (1.0 - g1)).sqrt() / denom).min(1.0)
    }

    /// μ Φ̃(n) for the untruncated chain, Φ̃(n) = Γx^n Φ(n).
    pub fn untruncated_stationary(&self, n: usize) -> f64 {
        let (g0, g1, gx) = self.gammas();
        let (t0, t1) = (gx * g0, gx * g1);
        let mu = (1.0 - t0) * (1.0 - t1) / (self.p * (1.0 - t1) + (1.0 - self.p) * (1.0 - t0));
        mu * gx.powi(n as i32) * self.survival(n)
    }
}

/// Truncated clock machine with its input law and closed-form memory.
#[derive(Debug, Clone)]
pub struct ResetClock {
    pub params: ResetClockParams,
    pub machine: Transducer,
    pub input: InputModel,
    pub gram: GramKernel,
    pub basis: EnsembleBasis,
}

/// States 0..=T (age since last tick). Input 0 = no reset: stay silent
/// (output 0, age + 1) or tick (output 1, age 0). Input 1 = reset: output 1,
/// age 0.
///
/// With γ0 = γ1 every age behaves alike and the machine is not minimal; the
/// same happens numerically for ages deep enough that Φ(n+1)/Φ(n) has
/// converged to within the merge tolerance.
pub fn reset_clock(params: ResetClockParams) -> Result<ResetClock> {
    params.validate()?;
    let cutoff = params.cutoff();
    let silent: Vec<f64> = (0..=cutoff).map(|n| params.silent_probability(n)).collect();
    let machine = Transducer::from_fn(cutoff + 1, 2, 2, |n, x, y| match (x, y) {
        (0, 0) => (silent[n], (n + 1).min(cutoff)),
        (0, _) => (1.0 - silent[n], 0),
        (_, 0) => (0.0, 0),
        _ => (1.0, 0),
    })?;
    let (_, _, gx) = params.gammas();
    let input = InputModel::new(Distribution::normalized(vec![gx, 1.0 - gx])?, 2);

    let g = params.g();
    let h1 = (1.0 - g * g).max(0.0).sqrt();
    let vectors = DMatrix::from_fn(2, cutoff + 1, |r, n| {
        let (a2, b2) = params.mixture_weights(n);
        let (a, b) = (a2.sqrt(), b2.sqrt());
        // ς_n = a|h0> + i b|h1>, |h0> = |0>, |h1> = g|0> + sqrt(1−g²)|1>
        if r == 0 { C64::new(a, b * g) } else { C64::new(0.0, b * h1) }
    });
    let basis = EnsembleBasis::from_columns(vectors);
    let mut gram = basis.gram();
    for i in 0..=cutoff {
        gram[(i, i)] = C64::new(1.0, 0.0);
    }
    Ok(ResetClock { params, machine, input, gram: GramKernel::trusted(gram), basis })
}

/// Exact stationary law of the truncated chain: π_n ∝ Γx^n Φ(n) below the
/// cutoff, and the tail collects its own self-loop.
pub fn clock_stationary(params: ResetClockParams) -> Result<Vec<f64>> {
    params.validate()?;
    let cutoff = params.cutoff();
    let (_, _, gx) = params.gammas();
    let mut pi = Vec::with_capacity(cutoff + 1);
    let mut w = 1.0;
    for n in 0..cutoff {
        pi.push(w);
        w *= gx * params.silent_probability(n);
    }
    pi.push(w / (1.0 - gx * params.silent_probability(cutoff)));
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockInformation {
    pub stride: usize,
    /// I(Z_{0:L}; S_L).
    pub classical: f64,
    /// I(Z_{0:L}; M_L).
    pub quantum: f64,
    /// H(S_0).
    pub classical_memory_entropy: f64,
    /// S(ρ) of the stationary quantum memory.
    pub quantum_memory_entropy: f64,
    /// P(no tick and no reset in the whole window).
    pub silent_window: f64,
}

pub fn clock_block_information(params: ResetClockParams) -> Result<ClockInformation> {
    let clock = reset_clock(params)?;
    let pi = clock_stationary(params)?;
    let cutoff = params.cutoff();
    let (_, _, gx) = params.gammas();

    let mut v = pi.clone();
    for _ in 0..params.stride() {
        let mut next = vec![0.0; cutoff + 1];
        for (n, &m) in v.iter().enumerate() {
            next[(n + 1).min(cutoff)] += m * gx * params.silent_probability(n);
        }
        v = next;
    }
    let silent: f64 = v.iter().sum();
    let (post_classical, post_quantum) = if silent > 0.0 {
        let post: Vec<f64> = v.iter().map(|m| m / silent).collect();
        (entropy_bits(&post), von_neumann_entropy(&clock.basis.density(&post)))
    } else {
        (0.0, 0.0)
    };
    let classical_memory_entropy = entropy_bits(&pi);
    let quantum_memory_entropy = von_neumann_entropy(&clock.basis.density(&pi));
    Ok(ClockInformation {
        stride: params.stride(),
        classical: classical_memory_entropy - silent * post_classical,
        quantum: quantum_memory_entropy - silent * post_quantum,
        classical_memory_entropy,
        quantum_memory_entropy,
        silent_window: silent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockRow {
    pub dt: f64,
    pub stride: usize,
    /// kT ln 2 per unit time with classical memory.
    pub classical_per_time: f64,
    /// kT ln 2 per unit time with the two-dimensional quantum memory.
    pub quantum_per_time: f64,
    pub classical_memory_entropy: f64,
}

/// One row per dt, finest step last. `base.truncation`, if set, applies to
/// every row; otherwise each row uses its own default cutoff.
pub fn clock_sweep(base: ResetClockParams, dts: &[f64]) -> Result<Vec<ClockRow>> {
    let mut dts = dts.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let mut rows = par::try_map(&dts, |&dt| {
        let params = ResetClockParams { dt, ..base };
        let info = clock_block_information(params)?;
        Ok::<_, CaseStudyError>(ClockRow {
            dt,
            stride: info.stride,
            classical_per_time: info.classical / params.tau,
            quantum_per_time: info.quantum / params.tau,
            classical_memory_entropy: info.classical_memory_entropy,
        })
    })?;
    rows.sort_by(|a, b| b.dt.total_cmp(&a.dt));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumEntropy {
    pub bits: f64,
    /// 1 / ∫ Φ̃.
    pub mu: f64,
    /// ∫_0^∞ Φ̃ log2 Φ̃ dt.
    pub integral: f64,
    /// Stationary mass beyond the truncation cutoff.
    pub tail_mass: f64,
    pub warning: Option<String>,
}

/// Small-dt approximation to H(S_0):
/// log2(1/(μ dt)) − μ ∫ Φ̃(t) log2 Φ̃(t) dt, with Φ̃(t) = e^{−γx t} Φ(t) and
/// μ = 1/∫Φ̃ the continuum reset rate.
pub fn clock_continuum_entropy(params: ResetClockParams) -> Result<ContinuumEntropy> {
    params.validate()?;
    let (p, q) = (params.p, 1.0 - params.p);
    let (a0, a1) = (params.gamma0 + params.gammax, params.gamma1 + params.gammax);
    let mu = 1.0 / (p / a0 + q / a1);
    let ln_phi = |t: f64| {
        let l0 = if p > 0.0 { p.ln() - a0 * t } else { f64::NEG_INFINITY };
        let l1 = if q > 0.0 { q.ln() - a1 * t } else { f64::NEG_INFINITY };
        let m = l0.max(l1);
        m + ((l0 - m).exp() + (l1 - m).exp()).ln()
    };
    let integrand = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let t = u / (1.0 - u);
        let l = ln_phi(t);
        let phi = l.exp();
        if phi == 0.0 {
            return 0.0;
        }
        phi * l / std::f64::consts::LN_2 / ((1.0 - u) * (1.0 - u))
    };
    let out = quadrature::double_exponential::integrate(integrand, 0.0, 1.0, 1e-12);
    let integral = out.integral;
    let mut warning = None;
    if out.error_estimate > 1e-8 * integral.abs().max(1e-300) {
        warning = Some(format!("quadrature error estimate {:.2e}", out.error_estimate));
    }
    let horizon = params.cutoff() as f64 * params.dt;
    let tail_mass = mu * (p * (-a0 * horizon).exp() / a0 + q * (-a1 * horizon).exp() / a1);
    if tail_mass >= 1e-6 {
        warning = Some(format!(
            "stationary mass {tail_mass:.2e} lies beyond the truncation cutoff; the approximation \
             describes the untruncated clock"
        ));
    }
    Ok(ContinuumEntropy {
        bits: (1.0 / (mu * params.dt)).log2() - mu * integral,
        mu,
        integral,
        tail_mass,
        warning,
    })
}
