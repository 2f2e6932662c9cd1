//! Reference values for the worked systems, each checked against an oracle
//! computed independently in this file (hand enumeration, direct recursion,
//! closed forms) rather than against the library's own intermediate results.

use agent_thermo::case_studies::{self, *};
use agent_thermo::entropy::{self, *};
use agent_thermo::quantum_encoding::{self, *};
use agent_thermo::thermo::{self, *};
use agent_thermo::transducer::{self, *};
use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::FRAC_1_SQRT_2;

const BUDGET: u64 = transducer::DEFAULT_BUDGET;

fn h(ws: &[f64]) -> f64 {
    ws.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum()
}

fn qubit_encoding() -> GramEncoding {
    let (_, _, gram) = alice_bob();
    GramEncoding::new(gram, Provenance::UserSupplied)
}

// ---------------------------------------------------------------- entropy

#[test]
fn alice_bob_symbol_and_next_state_share_two_bits() {
    let (t, im, _) = alice_bob();
    let bl = block_law(&t, &im, 1, BUDGET).unwrap();
    // (z, S_1) joint: S_1 is a function of z, so the joint is diagonal.
    let mut joint = vec![0.0; 4 * 4];
    for i in 0..bl.len() {
        let z = bl.word(i)[0] as usize;
        for (k, p) in bl.posterior(i).iter().enumerate() {
            joint[z * 4 + k] += bl.prob(i) * p;
        }
    }
    let joint = Distribution::new(joint).unwrap();
    assert_abs_diff_eq!(mutual_information(&joint, 4, 4).unwrap(), 2.0, epsilon = 1e-12);

    // expected divergence form of the same quantity
    let pi = bl.stationary().clone();
    let expected_kl: f64 = (0..bl.len())
        .map(|i| bl.prob(i) * kl_divergence(&Distribution::new(bl.posterior(i).to_vec()).unwrap(), &pi).unwrap())
        .sum();
    assert_abs_diff_eq!(expected_kl, 2.0, epsilon = 1e-12);
}

#[test]
fn qubit_memory_is_maximally_mixed() {
    let (_, _, gram) = alice_bob();
    let wk = WeightedKernel::new(gram, Distribution::uniform(4)).unwrap();
    assert_abs_diff_eq!(ensemble_entropy(&wk).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn holevo_reduces_to_classical_and_to_zero() {
    let prior = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let conds: Vec<Distribution> = vec![
        Distribution::new(vec![1.0, 0.0]).unwrap(),
        Distribution::new(vec![0.5, 0.5]).unwrap(),
        Distribution::new(vec![0.1, 0.9]).unwrap(),
    ];
    // classical: I = H(mix) − Σ p H(cond)
    let mix = [0.2 + 0.15 + 0.05, 0.15 + 0.45];
    let expected = h(&mix) - (0.3 * 1.0 + 0.5 * h(&[0.1, 0.9]));
    let got = holevo_information(&prior, &GramKernel::identity(2), &conds).unwrap();
    assert_abs_diff_eq!(got, expected, epsilon = 1e-12);

    let same = vec![conds[2].clone(); 3];
    let g = GramKernel::from_real(DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0])).unwrap();
    assert_abs_diff_eq!(holevo_information(&prior, &g, &same).unwrap(), 0.0, epsilon = 1e-12);
    assert!(holevo_information(&prior, &g, &conds[..2]).is_err());
}

#[test]
fn appendix_i_entropies() {
    let (m, n) = appendix_i_ensembles();
    assert_abs_diff_eq!(ensemble_entropy(&m).unwrap(), 1.0, epsilon = 1e-9);
    // <n_i|n_j> = 5/6, so K = G/3 has eigenvalues 8/9, 1/18, 1/18
    let oracle = h(&[8.0 / 9.0, 1.0 / 18.0, 1.0 / 18.0]);
    assert_abs_diff_eq!(ensemble_entropy(&n).unwrap(), oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, 0.61, epsilon = 0.01);
}

#[test]
fn appendix_i_uniform_weights_are_forced() {
    // Weights (a, b, b) with the two tilted states treated alike. The m
    // ensemble reaches 1 bit only when ρ = I/2, i.e. a = 1/3.
    let (m, n) = appendix_i_ensembles();
    let mut hits = Vec::new();
    for k in 1..1000 {
        let a = k as f64 / 1000.0;
        let w = [a, (1.0 - a) / 2.0, (1.0 - a) / 2.0];
        let hm = ensemble_entropy_of(m.kernel(), &w).unwrap();
        let hn = ensemble_entropy_of(n.kernel(), &w).unwrap();
        if (hm - 1.0).abs() < 1e-5 && (hn - 0.61).abs() < 0.01 {
            hits.push(a);
        }
    }
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|a| (a - 1.0 / 3.0).abs() < 5e-3), "{hits:?}");
}

// ------------------------------------------------------------- transducer

#[test]
fn alice_bob_machine_basics() {
    let (t, im, _) = alice_bob();
    assert!(validate(&t.to_spec()).is_valid());
    let pi = steady_state(&t, &im).unwrap();
    for &w in pi.weights() {
        assert_abs_diff_eq!(w, 0.25, epsilon = 1e-12);
    }
    let m = minimize(&t);
    assert_eq!(m.machine, t);
    assert_eq!(m.state_map, vec![0, 1, 2, 3]);
}

#[test]
fn alice_bob_block_law_by_hand() {
    let (t, im, _) = alice_bob();
    let bl = block_law(&t, &im, 1, BUDGET).unwrap();
    // P(x, y) = Σ_s π_s q(x) P(y|x,s) = 1/4 · 1/2 · (1 + 1/2 + 1/2 + 0) = 1/4
    let mut marginal = [0.0; 4];
    for i in 0..bl.len() {
        marginal[bl.word(i)[0] as usize] += bl.prob(i);
    }
    for p in marginal {
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(block_conditional_output_entropy(&bl, &im), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(classical_block_mutual_information(&bl), 2.0, epsilon = 1e-12);

    let bl2 = block_law(&t, &im, 2, BUDGET).unwrap();
    assert_abs_diff_eq!(bl2.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    for i in 0..bl2.len() {
        assert_eq!(bl2.posterior(i).iter().filter(|&&p| p > 0.0).count(), 1);
    }
}

#[test]
fn entropy_rates() {
    let (t, im, _) = alice_bob();
    let r = entropy_rate_estimate(&t, &im, 4, BUDGET).unwrap();
    assert_abs_diff_eq!(r.conditional, 1.5, epsilon = 1e-12);
    let r2 = entropy_rate_estimate(&t, &im, 2, BUDGET).unwrap();
    assert!(r.gap() <= r2.gap() + 1e-12 && r.gap() >= -1e-12);

    let (coin, im) = case_studies::memoryless_coin();
    let r = entropy_rate_estimate(&coin, &im, 3, BUDGET).unwrap();
    assert_abs_diff_eq!(r.conditional, 2.0, epsilon = 1e-12);
    let (echo, im) = case_studies::echo();
    assert_abs_diff_eq!(entropy_rate_estimate(&echo, &im, 3, BUDGET).unwrap().conditional, 1.0, epsilon = 1e-12);
}

/// Depth-limited behavioural comparison: two states are equivalent when every
/// input word up to `depth` yields the same output-word law.
fn behaviour_classes(t: &Transducer, depth: usize) -> Vec<usize> {
    fn law(t: &Transducer, s: usize, depth: usize, out: &mut Vec<f64>) {
        if depth == 0 {
            return;
        }
        for x in 0..t.inputs() {
            for y in 0..t.outputs() {
                let p = t.prob(s, x, y);
                out.push(p);
                if p > 0.0 {
                    let mut sub = Vec::new();
                    law(t, t.next(s, x, y), depth - 1, &mut sub);
                    out.extend(sub.into_iter().map(|q| q * p));
                } else {
                    out.extend(std::iter::repeat_n(0.0, tail_len(t, depth - 1)));
                }
            }
        }
    }
    fn tail_len(t: &Transducer, depth: usize) -> usize {
        if depth == 0 {
            0
        } else {
            t.symbols() * (1 + tail_len(t, depth - 1))
        }
    }
    let laws: Vec<Vec<f64>> = (0..t.states())
        .map(|s| {
            let mut v = Vec::new();
            law(t, s, depth, &mut v);
            v
        })
        .collect();
    let mut class = vec![usize::MAX; t.states()];
    let mut next = 0;
    for s in 0..t.states() {
        if class[s] != usize::MAX {
            continue;
        }
        for r in s..t.states() {
            if class[r] == usize::MAX && laws[s].iter().zip(&laws[r]).all(|(a, b)| (a - b).abs() < 1e-12) {
                class[r] = next;
            }
        }
        next += 1;
    }
    class
}

#[test]
fn history_lifted_interview_minimizes_to_four_states() {
    let (t, _, _) = alice_bob();
    let lifted = lift_by_last_symbol(&t);
    assert_eq!(lifted.states(), 16);
    let m = minimize(&lifted);
    assert_eq!(m.machine.states(), 4);
    assert_eq!(m.state_map, behaviour_classes(&lifted, 6));
}

#[test]
fn repeated_question_gets_repeated_answer() {
    let (t, _, _) = alice_bob();
    let always_first = InputModel::new(Distribution::point(2, 0), 2);
    for seed in 0..5 {
        let run: Vec<Step> = trajectory_from(&t, &always_first, seed, 3).unwrap().take(40).collect();
        assert!(run[1..].iter().all(|s| s.output == run[0].output));
    }
}

#[test]
fn simulation_is_reproducible() {
    let (t, im, _) = alice_bob();
    assert_eq!(simulate(&t, &im, 1000, 9).unwrap(), simulate(&t, &im, 1000, 9).unwrap());
    assert_ne!(simulate(&t, &im, 1000, 9).unwrap(), simulate(&t, &im, 1000, 10).unwrap());
}

// -------------------------------------------------------- quantum encoding

#[test]
fn interview_overlaps_by_hand() {
    let (t, _, _) = alice_bob();
    let of = solve_overlaps(&t).unwrap();
    let g = of.gram();
    // same last question: the repeated question separates them; different
    // last question: each input gives sqrt(1 · 1/2) and both land together
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j { 1.0 } else if i / 2 == j / 2 { 0.0 } else { 0.5 };
            assert_abs_diff_eq!(g[(i, j)], expected, epsilon = 1e-12);
        }
    }
    let enc = gram_from_overlaps(&of).unwrap();
    let w = [0.25; 4];
    let spectrum = entropy::weighted_spectrum(&enc.gram, &w).unwrap();
    let mut s = spectrum.clone();
    s.sort_by(|a, b| b.total_cmp(a));
    for (got, want) in s.iter().zip([0.5, 0.25, 0.25, 0.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(ensemble_entropy_of(&enc.gram, &w).unwrap(), 1.5, epsilon = 1e-12);
}

#[test]
fn disjoint_supports_give_orthogonal_memory() {
    // three states each announcing their own label under input 0
    let t = Transducer::from_fn(3, 2, 3, |j, x, y| {
        if x == 0 {
            ((y == j) as u8 as f64, (j + 1) % 3)
        } else {
            (1.0 / 3.0, y)
        }
    })
    .unwrap();
    let enc = systematic_encoding(&t).unwrap();
    assert_eq!(enc.gram, GramKernel::identity(3));
    let basis = enc.basis();
    assert_eq!(basis.rank(), 3);
}

#[test]
fn solver_rejects_non_minimal_machines() {
    let (t, _, _) = alice_bob();
    let lifted = lift_by_last_symbol(&t);
    assert!(matches!(
        solve_overlaps(&lifted),
        Err(QuantumError::Transducer(TransducerError::NotMinimal { .. }))
    ));
}

#[test]
fn clock_overlaps_match_backward_recursion() {
    // Only input 0 can separate ages; input 1 resets both. Unrolling the
    // overlap map from the tail gives G exactly:
    // G(m,n) = sqrt(h_m h_n) + sqrt(s_m s_n) G(m+1, n+1), G(T,T) = 1.
    let params = ResetClockParams { dt: 0.1, truncation: Some(20), ..Default::default() };
    let clock = reset_clock(params).unwrap();
    let t = &clock.machine;
    assert!(is_minimal(t));
    let cutoff = 20;
    let s: Vec<f64> = (0..=cutoff).map(|n| t.prob(n, 0, 0)).collect();
    let mut oracle = DMatrix::from_element(cutoff + 1, cutoff + 1, 1.0);
    for m in (0..=cutoff).rev() {
        for n in (0..=cutoff).rev() {
            if m != n {
                let (a, b) = ((m + 1).min(cutoff), (n + 1).min(cutoff));
                oracle[(m, n)] = ((1.0 - s[m]) * (1.0 - s[n])).sqrt() + (s[m] * s[n]).sqrt() * oracle[(a, b)];
            }
        }
    }
    let of = solve_overlaps(t).unwrap();
    assert!((of.per_input()[1].add_scalar(-1.0)).amax() < 1e-12);
    assert!((of.gram() - &oracle).amax() < 1e-8);

    // The two-dimensional complex memory is a different valid encoding.
    let feasibility = necessary_conditions(&clock.gram, t).unwrap();
    assert!(feasibility.holds(), "{:?}", feasibility.failures);
}

#[test]
fn user_encoding_conditions() {
    let (t, _, gram) = alice_bob();
    let (_, f) = user_encoding(gram, &t).unwrap();
    assert!(f.holds());
    let (_, f) = user_encoding(GramKernel::identity(4), &t).unwrap();
    assert!(f.holds());

    // s00 and s01 answer the repeated question differently
    let mut g = DMatrix::<f64>::identity(4, 4);
    g[(0, 1)] = 0.99;
    g[(1, 0)] = 0.99;
    let (_, f) = user_encoding(GramKernel::from_real(g).unwrap(), &t).unwrap();
    assert!(!f.holds());
    assert!(f.failures.iter().any(|c| (c.i, c.j, c.input) == (0, 1, 0) && c.bound == 0.0));

    assert!(matches!(
        user_encoding(GramKernel::identity(3), &t),
        Err(QuantumError::Dimension { expected: 4, got: 3 })
    ));
}

#[test]
fn interview_distinguishability() {
    let (t, _, _) = alice_bob();
    let d = distinguishability(&t).unwrap();
    assert!(d.interrogable(0, 1));
    assert!(!d.interrogable(0, 2));
    assert!(d.overlapping(0, 2));
    assert_eq!(d.wasteful_pairs(), vec![(0, 2), (0, 3), (1, 2), (1, 3)]);
    assert_eq!(d.uninterrogable_pairs(), d.wasteful_pairs());

    let (coin, _) = case_studies::memoryless_coin();
    assert!(distinguishability(&coin).unwrap().wasteful_pairs().is_empty());
}

#[test]
fn interview_interrogation_values() {
    let (t, _, _) = alice_bob();
    for depth in 1..=6 {
        let v = interrogation_table(&t, depth, BUDGET).unwrap();
        assert_abs_diff_eq!(v[(0, 2)], FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_eq!(v[(0, 1)], 0.0);
        assert_eq!(v[(3, 3)], 1.0);
    }
    assert!(matches!(interrogation_oracle(&t, 0, 1, 10, 10), Err(QuantumError::Budget { .. })));
}

#[test]
fn swapped_pair_separates_solver_from_interrogation() {
    // States 1 and 2 answer input 0 identically and swap places; under
    // input 1 their answers overlap by 1/2 and both return to 0. The overlap
    // map gives G12 = G21 · 1/2, hence 0, while the best interrogation never
    // drops below 1/2: asking 0 forever leaves them indistinguishable.
    let t = Transducer::from_fn(3, 2, 2, |j, x, y| match (j, x) {
        (0, 0) => ((y == 1) as u8 as f64, 1),
        (0, 1) => ((y == 0) as u8 as f64, 2),
        (1, 0) => ((y == 0) as u8 as f64, 2),
        (2, 0) => ((y == 0) as u8 as f64, 1),
        (1, 1) => ((y == 0) as u8 as f64, 0),
        (2, 1) => (if y == 0 { 0.25 } else { 0.75 }, 0),
        _ => unreachable!(),
    })
    .unwrap();
    assert!(is_minimal(&t));
    let g = solve_overlaps(&t).unwrap().gram();
    assert!(g[(1, 2)] < ZERO_OVERLAP);
    for depth in [1, 10, 3000] {
        let v = interrogation_table(&t, depth, u64::MAX).unwrap();
        assert_abs_diff_eq!(v[(1, 2)], 0.5, epsilon = 1e-12);
    }
    let d = distinguishability(&t).unwrap();
    assert!(!d.overlapping(1, 2));
    assert!(!d.interrogable(1, 2));
}

#[test]
fn interview_quantum_information() {
    let (t, im, _) = alice_bob();
    let bl = block_law(&t, &im, 1, BUDGET).unwrap();
    assert_abs_diff_eq!(quantum_block_mutual_information(&bl, &qubit_encoding()).unwrap(), 1.0, epsilon = 1e-12);
    let sys = systematic_encoding(&t).unwrap();
    assert_abs_diff_eq!(quantum_block_mutual_information(&bl, &sys).unwrap(), 1.5, epsilon = 1e-12);
    assert_abs_diff_eq!(
        quantum_block_mutual_information(&bl, &GramEncoding::identity(4)).unwrap(),
        classical_block_mutual_information(&bl),
        epsilon = 1e-12
    );
}

// ------------------------------------------------------------------ thermo

#[test]
fn interview_work_costs() {
    let (t, im, _) = alice_bob();
    let bl = block_law(&t, &im, 1, BUDGET).unwrap();
    assert_abs_diff_eq!(work_rate(&bl, &im, 2.0), 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(work_rate(&bl, &im, 1.0), 1.0, epsilon = 1e-12);

    let online = online_cost(&t, &im).unwrap();
    assert_abs_diff_eq!(online.rate, 1.5, epsilon = 1e-12);
    assert!(online.residual() < 1e-12);

    let gap = advantage_gap(&bl, &qubit_encoding()).unwrap();
    assert_abs_diff_eq!(gap.gap, 1.0, epsilon = 1e-12);
    assert!(gap.residual() < 1e-9);
    let sys = systematic_encoding(&t).unwrap();
    assert_abs_diff_eq!(advantage_gap(&bl, &sys).unwrap().gap, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(advantage_gap(&bl, &GramEncoding::identity(4)).unwrap().gap, 0.0, epsilon = 1e-12);

    assert_abs_diff_eq!(quantum_online_dissipation(&t, &im, &qubit_encoding()).unwrap(), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(quantum_online_dissipation(&t, &im, &sys).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        quantum_online_dissipation(&t, &im, &GramEncoding::identity(4)).unwrap(),
        online.rate,
        epsilon = 1e-12
    );
}

#[test]
fn trivial_machines_cost_nothing_extra() {
    for (t, im) in [case_studies::memoryless_coin(), case_studies::echo()] {
        assert_abs_diff_eq!(online_cost(&t, &im).unwrap().rate, 0.0, epsilon = 1e-12);
        assert!(!advantage_predicate(&t, &im, 1, BUDGET).unwrap().advantage);
    }
    let (coin, im) = case_studies::memoryless_coin();
    let bl = block_law(&coin, &im, 1, BUDGET).unwrap();
    assert_abs_diff_eq!(work_rate(&bl, &im, 0.0), 0.0, epsilon = 1e-12);
}

#[test]
fn interview_advantage_witness() {
    let (t, im, _) = alice_bob();
    let v = advantage_predicate(&t, &im, 1, BUDGET).unwrap();
    assert!(v.advantage);
    assert_eq!(v.witness.unwrap().pair, (0, 2));
    assert!(matches!(
        online_cost(&lift_by_last_symbol(&t), &im),
        Err(thermo::ThermoError::Transducer(TransducerError::NotMinimal { .. }))
    ));
}

#[test]
fn orthogonal_machine_has_no_advantage() {
    let t = Transducer::from_fn(3, 2, 3, |j, x, y| {
        if x == 0 {
            ((y == j) as u8 as f64, (j + 1) % 3)
        } else {
            (1.0 / 3.0, y)
        }
    })
    .unwrap();
    let im = InputModel::uniform(&t);
    let v = advantage_predicate(&t, &im, 2, BUDGET).unwrap();
    assert!(!v.advantage && v.wasteful_pairs.is_empty());
}

#[test]
fn report_invariants_on_the_interview() {
    let (t, im, gram) = alice_bob();
    let extra = vec![("qubit".to_string(), GramEncoding::new(gram, Provenance::UserSupplied))];
    let r = analyze(&t, &im, 1, &extra, BUDGET, Some(4.1e-21)).unwrap();
    assert_abs_diff_eq!(r.classical_rate, 2.0, epsilon = 1e-12);
    let q = r.encoding("qubit").unwrap();
    assert_abs_diff_eq!(q.rate, 1.0, epsilon = 1e-12);
    for e in &r.encodings {
        assert!(r.classical_rate >= e.rate - 1e-9);
        assert!(e.rate >= r.landauer_floor - 1e-9);
        assert!((e.gap.gap - (r.classical_rate - e.rate)).abs() < 1e-12);
    }
    assert_abs_diff_eq!(r.joules(1.0).unwrap(), 4.1e-21 * std::f64::consts::LN_2, epsilon = 1e-30);
}

// ------------------------------------------------------------ Brownian ring

#[test]
fn brownian_ring_is_uniform_and_markovian() {
    let params = BrownianRingParams::new(8, 0.05).unwrap();
    let t = brownian_ring(params).unwrap();
    let im = case_studies::brownian::brownian_input_model(params);
    let pi = steady_state(&t, &im).unwrap();
    for &w in pi.weights() {
        assert_abs_diff_eq!(w, 0.125, epsilon = 1e-12);
    }
    for stride in 1..=2 {
        let bl = block_law(&t, &im, stride, BUDGET).unwrap();
        assert_abs_diff_eq!(classical_block_mutual_information(&bl), 3.0, epsilon = 1e-12);
    }
}

#[test]
fn brownian_two_bins() {
    let params = BrownianRingParams::new(2, 0.3).unwrap();
    let t = brownian_ring(params).unwrap();
    let q = t.prob(0, 0, 0);
    assert_abs_diff_eq!(t.prob(1, 0, 1), q, epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(0, 1, 1), q, epsilon = 1e-15);
    assert!(BrownianRingParams::new(1, 0.3).is_err());
    assert!(BrownianRingParams::new(4, 0.0).is_err());
}

#[test]
fn brownian_bound_values() {
    // 2√(2π)·0.01 = 0.050133; 1/(2 ln 2) − 1.100265 · log2 0.050133
    let a: f64 = 2.0 * (2.0 * std::f64::consts::PI).sqrt() * 0.01;
    let oracle = 0.5 / std::f64::consts::LN_2 - (1.0 + 2.0 * a) * a.log2();
    assert_abs_diff_eq!(brownian_quantum_entropy_bound(0.01).unwrap(), oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, 5.4724, epsilon = 1e-4);
    let edge = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt()) - 1e-12;
    assert_abs_diff_eq!(brownian_quantum_entropy_bound(edge).unwrap(), 0.5 / std::f64::consts::LN_2, epsilon = 1e-9);
    assert!(brownian_quantum_entropy_bound(0.3).is_err());
}

#[test]
fn brownian_circulant_spectrum_matches_dense_eigensolve() {
    let params = BrownianRingParams::new(64, 0.01).unwrap();
    let g = brownian_gram(params);
    let dense = SymmetricEigen::new(g.matrix().map(|z| z.re) / 64.0).eigenvalues;
    let dense_h = h(&dense.iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
    let circ = brownian_quantum_entropy(params).unwrap();
    assert_abs_diff_eq!(circ, dense_h, epsilon = 1e-9);
    assert!(circ <= brownian_quantum_entropy_bound(0.01).unwrap());
}

#[test]
fn brownian_overlaps_are_stride_independent() {
    let params = BrownianRingParams::new(8, 0.08).unwrap();
    let t = brownian_ring(params).unwrap();
    let im = case_studies::brownian::brownian_input_model(params);
    let enc = GramEncoding::new(brownian_gram(params), Provenance::ClosedForm);
    let i1 = quantum_block_mutual_information(&block_law(&t, &im, 1, BUDGET).unwrap(), &enc).unwrap();
    let i2 = quantum_block_mutual_information(&block_law(&t, &im, 2, BUDGET).unwrap(), &enc).unwrap();
    assert_abs_diff_eq!(i1, i2, epsilon = 1e-9);
    assert_abs_diff_eq!(i1, brownian_quantum_entropy(params).unwrap(), epsilon = 1e-9);
}

// -------------------------------------------------------------- reset clock

#[test]
fn equal_rates_make_a_pure_memory() {
    let params = ResetClockParams { gamma0: 2.0, gamma1: 2.0, ..Default::default() };
    let clock = reset_clock(params).unwrap();
    assert_abs_diff_eq!(params.g(), 1.0, epsilon = 1e-12);
    assert!(clock.gram.matrix().iter().all(|z| (z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12));
    let pi = clock_stationary(params).unwrap();
    assert_abs_diff_eq!(ensemble_entropy_of(&clock.gram, &pi).unwrap(), 0.0, epsilon = 1e-9);
    assert_eq!(minimize(&clock.machine).machine.states(), 1);
}

#[test]
fn clock_stationary_law() {
    // deep truncation: tail mass is negligible, so the truncated law matches
    // μ Φ̃(n) for the untruncated clock
    let params = ResetClockParams { dt: 0.05, truncation: Some(600), ..Default::default() };
    let pi = clock_stationary(params).unwrap();
    for n in [0, 1, 5, 20, 100, 300] {
        assert_abs_diff_eq!(pi[n], params.untruncated_stationary(n), epsilon = 1e-6);
    }
    // default truncation: exact law of the truncated chain equals power iteration
    let params = ResetClockParams { dt: 0.05, ..Default::default() };
    let clock = reset_clock(params).unwrap();
    let iterated = steady_state(&clock.machine, &clock.input).unwrap();
    let exact = clock_stationary(params).unwrap();
    for (a, b) in iterated.weights().iter().zip(&exact) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }
}

#[test]
fn clock_memory_is_a_qubit() {
    for dt in [0.1, 0.025] {
        let params = ResetClockParams { dt, ..Default::default() };
        let clock = reset_clock(params).unwrap();
        assert_eq!(EnsembleBasis::from_kernel(&clock.gram).rank(), 2);
        let info = clock_block_information(params).unwrap();
        assert!(info.quantum <= 1.0 + 1e-9);
        assert!(info.quantum_memory_entropy <= 1.0 + 1e-9);
        let lower = (1.0 - (-(params.gamma0 + params.gammax) * params.tau).exp()) * info.classical_memory_entropy;
        assert!(info.classical >= lower - 1e-9);
    }
}

#[test]
fn clock_structured_information_matches_enumeration() {
    for (dt, tau, truncation) in [(0.5, 1.0, None), (0.25, 0.5, Some(6)), (0.2, 0.6, Some(3))] {
        let params = ResetClockParams { dt, tau, truncation, ..Default::default() };
        let clock = reset_clock(params).unwrap();
        let pi = Distribution::new(clock_stationary(params).unwrap()).unwrap();
        let bl = block_law_from(&clock.machine, &clock.input, params.stride(), BUDGET, pi).unwrap();
        let enc = GramEncoding::new(clock.gram.clone(), Provenance::ClosedForm);
        let info = clock_block_information(params).unwrap();
        assert_abs_diff_eq!(info.classical, classical_block_mutual_information(&bl), epsilon = 1e-9);
        assert_abs_diff_eq!(info.quantum, quantum_block_mutual_information(&bl, &enc).unwrap(), epsilon = 1e-9);
    }
}

#[test]
fn clock_sweep_rows_are_per_unit_time() {
    let base = ResetClockParams::default();
    let rows = clock_sweep(base, &[0.05, 0.2, 0.1]).unwrap();
    assert_eq!(rows.iter().map(|r| r.dt).collect::<Vec<_>>(), vec![0.2, 0.1, 0.05]);
    for r in &rows {
        let info = clock_block_information(ResetClockParams { dt: r.dt, ..base }).unwrap();
        assert_eq!(r.classical_per_time, info.classical / base.tau);
    }
    let half = ResetClockParams { tau: 0.5, ..base };
    let rows_half = clock_sweep(half, &[0.1]).unwrap();
    let info = clock_block_information(ResetClockParams { dt: 0.1, ..half }).unwrap();
    assert_abs_diff_eq!(rows_half[0].quantum_per_time, 2.0 * info.quantum, epsilon = 1e-15);
}

#[test]
fn continuum_entropy_tracks_the_discrete_clock() {
    let dt = 1e-3;
    let params = ResetClockParams { dt, truncation: Some(16_000), ..Default::default() };
    let c = clock_continuum_entropy(params).unwrap();
    assert!(c.warning.is_none(), "{:?}", c.warning);
    let exact = h(&clock_stationary(params).unwrap());
    assert!((c.bits - exact).abs() < 0.05, "continuum {} vs discrete {}", c.bits, exact);

    let coarse = clock_continuum_entropy(ResetClockParams { dt: 1e-4, ..params }).unwrap();
    let fine = clock_continuum_entropy(ResetClockParams { dt: 5e-5, ..params }).unwrap();
    assert_abs_diff_eq!(fine.bits - coarse.bits, 1.0, epsilon = 1e-9);

    let default_cut = clock_continuum_entropy(ResetClockParams { dt, ..Default::default() }).unwrap();
    assert!(default_cut.warning.is_some() && default_cut.tail_mass > 1e-6);
}

#[test]
fn continuum_entropy_single_exponential() {
    // Φ̃ = e^{−γt}: ∫ Φ̃ log2 Φ̃ = −1/(γ ln 2), μ = γ
    let gamma = 3.0;
    let params = ResetClockParams {
        gamma0: gamma,
        gamma1: gamma,
        gammax: 0.0,
        dt: 1e-3,
        truncation: Some(20_000),
        ..Default::default()
    };
    let c = clock_continuum_entropy(params).unwrap();
    let expected = (1.0 / (gamma * 1e-3)).log2() + 1.0 / std::f64::consts::LN_2;
    assert_abs_diff_eq!(c.integral, -1.0 / (gamma * std::f64::consts::LN_2), epsilon = 1e-8);
    assert_abs_diff_eq!(c.bits, expected, epsilon = 1e-8);
}

#[test]
fn clock_parameter_validation() {
    let bad = [
        ResetClockParams { p: 1.5, ..Default::default() },
        ResetClockParams { gamma0: 0.0, ..Default::default() },
        ResetClockParams { dt: -0.1, ..Default::default() },
        ResetClockParams { tau: 0.15, ..Default::default() },
        ResetClockParams { truncation: Some(0), ..Default::default() },
    ];
    for p in bad {
        assert!(matches!(reset_clock(p), Err(CaseStudyError::Domain(_))), "{p:?}");
    }
}

#[test]
fn quantum_information_is_bounded_by_classical_on_the_ring() {
    let params = BrownianRingParams::new(16, 0.05).unwrap();
    let t = brownian_ring(params).unwrap();
    let im = case_studies::brownian::brownian_input_model(params);
    let bl = block_law(&t, &im, 1, BUDGET).unwrap();
    let enc = GramEncoding::new(brownian_gram(params), Provenance::ClosedForm);
    let gap = advantage_gap(&bl, &enc).unwrap();
    assert!(gap.gap > 0.0);
    assert!(gap.residual() < 1e-8, "{gap:?}");
    let _ = quantum_encoding::necessary_conditions(&enc.gram, &t).unwrap();
}
