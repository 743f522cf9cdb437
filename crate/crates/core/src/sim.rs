//! Dense state-vector simulation under coherent control errors, Haar
//! sampling, Monte Carlo fidelity statistics and empirical Lipschitz
//! estimation.
//!
//! Each gate instance is eigendecomposed once; a noisy application only
//! re-exponentiates the eigenvalues as `V diag(e^{-i(1+eps) lambda}) V^t`.
//! Monte Carlo samples run in parallel with per-sample substreams and are
//! reduced in ascending sample order, so results are bit-identical for any
//! thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::numerics::{c, cr, herm_eigen, CMatrix, CVector, C64, MAX_QUBITS};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Normalized `2^n`-dimensional state.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: CVector,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooLarge {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubit(s)"
            )));
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = cr(1.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} deviates from 1"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// `|<a|b>|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.amplitudes.len() != b.amplitudes.len() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} vs {}",
            a.amplitudes.len(),
            b.amplitudes.len()
        )));
    }
    Ok(a.amplitudes.dotc(&b.amplitudes).norm().min(1.0))
}

/// Haar-random pure state from normalized complex Gaussian draws.
pub fn haar_state(n_qubits: usize, rng: &mut impl Rng) -> Result<StateVector> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            n_qubits,
            max: MAX_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let mut amplitudes = CVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = amplitudes.norm();
    amplitudes /= cr(norm);
    Ok(StateVector {
        n_qubits,
        amplitudes,
    })
}

// --- compiled circuits ---------------------------------------------------

struct CompiledGate {
    support: Vec<usize>,
    eigenvalues: Vec<f64>,
    vectors: CMatrix,
    vectors_adj: CMatrix,
    /// Position in the noise vector, if the gate is noise susceptible.
    noise_slot: Option<usize>,
}

/// A circuit with per-gate eigendecompositions precomputed for fast
/// repeated noisy application.
pub struct CompiledCircuit {
    pub n_qubits: usize,
    pub noisy_gate_count: usize,
    /// Gates in application order (first applied first).
    gates: Vec<CompiledGate>,
}

impl CompiledCircuit {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let noisy_total = circuit.noisy_gate_count();
        let mut slot = noisy_total;
        // The gate list is the operator product U_1...U_N, so the last
        // element acts first; slots count noisy gates in list order.
        let mut gates = Vec::with_capacity(circuit.gates.len());
        for inst in circuit.gates.iter().rev() {
            let es = herm_eigen(&inst.gate().generator)?;
            let noise_slot = if inst.noisy {
                slot -= 1;
                Some(slot)
            } else {
                None
            };
            gates.push(CompiledGate {
                support: inst.support.clone(),
                eigenvalues: es.values,
                vectors_adj: es.vectors.adjoint(),
                vectors: es.vectors,
                noise_slot,
            });
        }
        Ok(Self {
            n_qubits: circuit.n_qubits,
            noisy_gate_count: noisy_total,
            gates,
        })
    }

    /// Apply the circuit with per-gate errors `eps` (indexed in gate-list
    /// order over noisy gates) to `psi0`.
    pub fn apply(&self, eps: &[f64], psi0: &StateVector) -> Result<StateVector> {
        if eps.len() != self.noisy_gate_count {
            return Err(Error::LengthMismatch {
                expected: self.noisy_gate_count,
                got: eps.len(),
            });
        }
        if psi0.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "state has {} qubit(s), circuit has {}",
                psi0.n_qubits, self.n_qubits
            )));
        }
        let mut amps = psi0.amplitudes.clone();
        let mut local = CMatrix::zeros(0, 0);
        for gate in &self.gates {
            let scale = match gate.noise_slot {
                Some(slot) => 1.0 + eps[slot],
                None => 1.0,
            };
            let d = gate.eigenvalues.len();
            if local.nrows() != d {
                local = CMatrix::zeros(d, d);
            }
            // local = V diag(e^{-i scale lambda}) V^t
            for col in 0..d {
                for row in 0..d {
                    let mut acc = C64::default();
                    for k in 0..d {
                        let phase = c(0.0, -scale * gate.eigenvalues[k]).exp();
                        acc += gate.vectors[(row, k)] * phase * gate.vectors_adj[(k, col)];
                    }
                    local[(row, col)] = acc;
                }
            }
            apply_local(self.n_qubits, &mut amps, &local, &gate.support);
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: amps,
        })
    }
}

/// Contract a `2^k`-dimensional operator into the state on `support`.
fn apply_local(n: usize, amps: &mut CVector, local: &CMatrix, support: &[usize]) {
    let k = support.len();
    let local_dim = 1usize << k;
    let dim = 1usize << n;
    let bit = |q: usize| n - 1 - q; // qubit 0 = most significant bit
    let support_mask: usize = support.iter().map(|&q| 1usize << bit(q)).sum();
    let offsets: Vec<usize> = (0..local_dim)
        .map(|l| {
            let mut out = 0usize;
            for (j, &q) in support.iter().enumerate() {
                if l >> (k - 1 - j) & 1 == 1 {
                    out |= 1 << bit(q);
                }
            }
            out
        })
        .collect();

    let mut gathered = vec![C64::default(); local_dim];
    for rest in 0..dim {
        if rest & support_mask != 0 {
            continue;
        }
        for (l, &off) in offsets.iter().enumerate() {
            gathered[l] = amps[rest | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = C64::default();
            for (l, &g) in gathered.iter().enumerate() {
                acc += local[(r, l)] * g;
            }
            amps[rest | off] = acc;
        }
    }
}

/// One-shot noisy application; see [`CompiledCircuit::apply`] for the
/// repeated-use path.
pub fn apply_noisy(circuit: &Circuit, eps: &[f64], psi0: &StateVector) -> Result<StateVector> {
    CompiledCircuit::new(circuit)?.apply(eps, psi0)
}

// --- Monte Carlo ---------------------------------------------------------

/// Initial-state protocol for sampled experiments.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// The same fixed state for every sample.
    Fixed(StateVector),
    /// A fresh Haar-random state per sample (one state per noise
    /// realization).
    Haar,
}

/// Aggregated Monte Carlo fidelity statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SimStats {
    pub samples: usize,
    pub eps_bar: f64,
    pub mean_fidelity: f64,
    /// Population standard deviation.
    pub std_fidelity: f64,
    pub min_fidelity: f64,
    /// Noise vector attaining the minimum.
    pub argmin_eps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<Vec<SampleRecord>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub eps: Vec<f64>,
    pub fidelity: f64,
}

fn aggregate(eps_bar: f64, records: Vec<SampleRecord>, keep_samples: bool) -> SimStats {
    let n = records.len();
    let mean = records.iter().map(|r| r.fidelity).sum::<f64>() / n as f64;
    let var = records
        .iter()
        .map(|r| (r.fidelity - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let mut min_fidelity = f64::INFINITY;
    let mut argmin_eps = Vec::new();
    for r in &records {
        if r.fidelity < min_fidelity {
            min_fidelity = r.fidelity;
            argmin_eps = r.eps.clone();
        }
    }
    SimStats {
        samples: n,
        eps_bar,
        mean_fidelity: mean,
        std_fidelity: var.sqrt(),
        min_fidelity,
        argmin_eps,
        per_sample: keep_samples.then_some(records),
    }
}

/// Configuration for [`monte_carlo`] / [`noise_sweep`].
#[derive(Debug, Clone)]
pub struct MonteCarloCfg {
    pub eps_bar: f64,
    pub samples: usize,
    pub initial: InitialState,
    /// Stream-id prefix identifying the experiment.
    pub experiment_id: u64,
    pub keep_samples: bool,
}

/// Sample fidelities under uniform coherent control errors.
///
/// Each sample `s` draws its noise vector (and its Haar state, if
/// requested) from the substream `(experiment_id, level, s)` of `seed`.
pub fn monte_carlo(circuit: &Circuit, cfg: &MonteCarloCfg, seed: &SeededRng) -> Result<SimStats> {
    monte_carlo_level(circuit, cfg, seed, 0, cfg.eps_bar)
}

fn monte_carlo_level(
    circuit: &Circuit,
    cfg: &MonteCarloCfg,
    seed: &SeededRng,
    level: u64,
    eps_bar: f64,
) -> Result<SimStats> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let compiled = CompiledCircuit::new(circuit)?;
    let noisy = compiled.noisy_gate_count;
    let ideal = compiled.apply(&vec![0.0; noisy], &fixed_or_zero(&cfg.initial, circuit)?)?;

    let records: Vec<SampleRecord> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| -> Result<SampleRecord> {
            let mut rng = seed.stream(&[cfg.experiment_id, level, s as u64]);
            let eps: Vec<f64> = (0..noisy)
                .map(|_| draw_uniform(&mut rng, eps_bar))
                .collect();
            let (psi0, reference) = match &cfg.initial {
                InitialState::Fixed(state) => (state.clone(), None),
                InitialState::Haar => {
                    let state = haar_state(circuit.n_qubits, &mut rng)?;
                    let reference = compiled.apply(&vec![0.0; noisy], &state)?;
                    (state, Some(reference))
                }
            };
            let out = compiled.apply(&eps, &psi0)?;
            let f = fidelity(reference.as_ref().unwrap_or(&ideal), &out)?;
            Ok(SampleRecord { eps, fidelity: f })
        })
        .collect::<Result<_>>()?;

    Ok(aggregate(eps_bar, records, cfg.keep_samples))
}

fn fixed_or_zero(initial: &InitialState, circuit: &Circuit) -> Result<StateVector> {
    match initial {
        InitialState::Fixed(state) => Ok(state.clone()),
        InitialState::Haar => StateVector::basis(circuit.n_qubits, 0),
    }
}

fn draw_uniform(rng: &mut impl Rng, eps_bar: f64) -> f64 {
    if eps_bar == 0.0 {
        // Consume a draw anyway so stream alignment does not depend on the
        // noise level.
        let _: f64 = rng.gen();
        0.0
    } else {
        rng.gen_range(-eps_bar..=eps_bar)
    }
}

/// Monte Carlo statistics per noise level; substreams are keyed by
/// `(experiment, level, sample)`.
pub fn noise_sweep(
    circuit: &Circuit,
    levels: &[f64],
    cfg: &MonteCarloCfg,
    seed: &SeededRng,
) -> Result<Vec<SimStats>> {
    levels
        .iter()
        .enumerate()
        .map(|(i, &eps_bar)| monte_carlo_level(circuit, cfg, seed, i as u64, eps_bar))
        .collect()
}

/// `count` noise levels equidistant over `[lo, hi]`.
pub fn equidistant_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Empirical lower bound on the Lipschitz constant of
/// `eps -> |psi(eps)>`: the best ratio `||psi(e) - psi(e')|| / ||e - e'||_inf`
/// over random probe pairs and Haar states, including near-coincident pairs
/// that probe the local slope.
pub fn empirical_lipschitz(
    circuit: &Circuit,
    eps_bar: f64,
    n_probes: usize,
    seed: &SeededRng,
    experiment_id: u64,
) -> Result<f64> {
    if n_probes == 0 {
        return Err(Error::InvalidArgument("probe count must be >= 1".into()));
    }
    let compiled = CompiledCircuit::new(circuit)?;
    let noisy = compiled.noisy_gate_count;
    if noisy == 0 {
        return Ok(0.0);
    }
    let best = (0..n_probes)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let mut rng = seed.stream(&[experiment_id, p as u64]);
            let psi0 = haar_state(circuit.n_qubits, &mut rng)?;
            let eps: Vec<f64> = (0..noisy).map(|_| draw_uniform(&mut rng, eps_bar)).collect();
            let mut local_best: f64 = 0.0;

            // Far pair.
            let eps2: Vec<f64> = (0..noisy).map(|_| draw_uniform(&mut rng, eps_bar)).collect();
            let dist = eps
                .iter()
                .zip(&eps2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            if dist > 0.0 {
                let a = compiled.apply(&eps, &psi0)?;
                let b = compiled.apply(&eps2, &psi0)?;
                local_best = local_best.max((a.amplitudes - b.amplitudes).norm() / dist);
            }

            // Near-coincident pair probing the local slope.
            let delta = 1e-5;
            let eps3: Vec<f64> = eps
                .iter()
                .map(|&e| if rng.gen::<bool>() { e + delta } else { e - delta })
                .collect();
            let a = compiled.apply(&eps, &psi0)?;
            let b = compiled.apply(&eps3, &psi0)?;
            Ok(local_best.max((a.amplitudes - b.amplitudes).norm() / delta))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(best)
}

/// CSV rows `level,sample,eps...,fidelity` for a sweep; requires
/// `keep_samples` in the generating config.
pub fn sweep_to_csv(levels: &[f64], stats: &[SimStats]) -> String {
    let noisy = stats
        .iter()
        .filter_map(|s| s.per_sample.as_ref())
        .flat_map(|r| r.iter().map(|x| x.eps.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::from("level");
    out.push_str(",sample");
    for i in 0..noisy {
        out.push_str(&format!(",eps_{i}"));
    }
    out.push_str(",fidelity\n");
    for (level, stat) in levels.iter().zip(stats) {
        if let Some(records) = &stat.per_sample {
            for (s, r) in records.iter().enumerate() {
                out.push_str(&format!("{level},{s}"));
                for i in 0..noisy {
                    match r.eps.get(i) {
                        Some(e) => out.push_str(&format!(",{e}")),
                        None => out.push(','),
                    }
                }
                out.push_str(&format!(",{}\n", r.fidelity));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;
    use crate::gates::builtin_gate;
    use crate::numerics::max_abs;
    use crate::presets;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_noise_matches_ideal_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let c = random_circuit(&mut rng, 3, 6);
            let mut psi = haar_state(c.n_qubits, &mut rng).unwrap();
            let out = apply_noisy(&c, &vec![0.0; c.noisy_gate_count()], &psi).unwrap();
            let expected = c.ideal_unitary().unwrap() * psi.amplitudes.clone();
            psi.amplitudes = expected;
            assert!((psi.amplitudes - out.amplitudes).norm() <= 1e-10);
        }
    }

    #[test]
    fn norm_preserved_under_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let c = random_circuit(&mut rng, 3, 8);
            let psi = haar_state(c.n_qubits, &mut rng).unwrap();
            let eps: Vec<f64> = (0..c.noisy_gate_count())
                .map(|_| rng.gen_range(-0.3..0.3))
                .collect();
            let out = apply_noisy(&c, &eps, &psi).unwrap();
            assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rz_on_basis_state_is_phase_only() {
        let mut c = crate::circuit::Circuit::new(1).unwrap();
        c.push("rz", &[1.3], &[0], true).unwrap();
        let psi0 = StateVector::basis(1, 0).unwrap();
        for eps in [-0.5, 0.0, 0.7] {
            let out = apply_noisy(&c, &[eps], &psi0).unwrap();
            let ideal = apply_noisy(&c, &[0.0], &psi0).unwrap();
            assert_abs_diff_eq!(fidelity(&ideal, &out).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn intro_circuit_matches_two_by_two_oracle() {
        // Independent 2x2 matrix-product oracle for
        // R_z(pi/4 (1+e_z)) R_y(pi/2 (1+e_y)) |0>.
        let (ez, ey) = (0.2, 0.2);
        let ty = PI / 2.0 * (1.0 + ey);
        let tz = PI / 4.0 * (1.0 + ez);
        let ry = CMatrix::from_row_slice(
            2,
            2,
            &[
                cr((ty / 2.0).cos()),
                cr(-(ty / 2.0).sin()),
                cr((ty / 2.0).sin()),
                cr((ty / 2.0).cos()),
            ],
        );
        let rz = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, -tz / 2.0).exp(),
                cr(0.0),
                cr(0.0),
                c(0.0, tz / 2.0).exp(),
            ],
        );
        let noisy = rz * ry;
        let expected = noisy.column(0).clone_owned();

        let circuit = presets::intro_u(0.2);
        let psi0 = StateVector::basis(1, 0).unwrap();
        // eps indexed in gate-list order: [rz, ry].
        let out = apply_noisy(&circuit, &[ez, ey], &psi0).unwrap();
        assert!((out.amplitudes - expected).norm() <= 1e-10);

        let ideal = apply_noisy(&circuit, &[0.0, 0.0], &psi0).unwrap();
        let oracle_fid = ideal
            .amplitudes
            .dotc(&apply_noisy(&circuit, &[ez, ey], &psi0).unwrap().amplitudes)
            .norm();
        assert_abs_diff_eq!(
            fidelity(&ideal, &apply_noisy(&circuit, &[ez, ey], &psi0).unwrap()).unwrap(),
            oracle_fid,
            epsilon = 1e-12
        );
    }

    #[test]
    fn eps_length_checked() {
        let c = presets::intro_u(0.1);
        let psi0 = StateVector::basis(1, 0).unwrap();
        assert!(matches!(
            apply_noisy(&c, &[0.1], &psi0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_basics() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-15);
        let plus = StateVector::from_amplitudes(CVector::from_vec(vec![
            cr(1.0 / 2.0_f64.sqrt()),
            cr(1.0 / 2.0_f64.sqrt()),
        ]))
        .unwrap();
        assert_abs_diff_eq!(
            fidelity(&zero, &plus).unwrap(),
            1.0 / 2.0_f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn haar_state_statistics() {
        let seed = SeededRng::new(99);
        let mut rng = seed.stream(&[0]);
        let mut acc = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let psi = haar_state(2, &mut rng).unwrap();
            acc += psi.amplitudes[0].norm_sqr();
        }
        let mean = acc / draws as f64;
        assert!((mean - 0.25).abs() <= 0.01, "Haar moment off: {mean}");
    }

    #[test]
    fn haar_state_deterministic() {
        let seed = SeededRng::new(5);
        let a = haar_state(3, &mut seed.stream(&[7])).unwrap();
        let b = haar_state(3, &mut seed.stream(&[7])).unwrap();
        assert!(max_abs(&CMatrix::from_columns(&[(a.amplitudes - b.amplitudes).column(0)])) == 0.0);
    }

    #[test]
    fn monte_carlo_zero_noise_degenerate() {
        let c = presets::intro_u(0.0);
        let cfg = MonteCarloCfg {
            eps_bar: 0.0,
            samples: 50,
            initial: InitialState::Fixed(StateVector::basis(1, 0).unwrap()),
            experiment_id: 1,
            keep_samples: false,
        };
        let stats = monte_carlo(&c, &cfg, &SeededRng::new(0)).unwrap();
        assert_abs_diff_eq!(stats.mean_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.min_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.std_fidelity, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn per_gate_lipschitz_of_single_unitaries() {
        // ||U(e) - U(e')|| <= ||H|| |e - e'|
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for name in ["rz", "ry", "h", "cx", "swap"] {
            let kind = crate::gates::GateKind::from_name(name).unwrap();
            let params: Vec<f64> = (0..kind.param_count())
                .map(|_| rng.gen_range(-PI..PI))
                .collect();
            let g = builtin_gate(name, &params).unwrap();
            let h_norm = crate::numerics::spectral_norm(&g.generator);
            for _ in 0..10 {
                let e1 = rng.gen_range(-0.5..0.5);
                let e2 = rng.gen_range(-0.5..0.5);
                let u1 = crate::numerics::exp_neg_i(&g.generator, 1.0 + e1).unwrap();
                let u2 = crate::numerics::exp_neg_i(&g.generator, 1.0 + e2).unwrap();
                let diff = crate::numerics::spectral_norm(&(u1 - u2));
                assert!(diff <= h_norm * (e1 - e2).abs() + 1e-9, "{name}");
            }
        }
    }

    #[test]
    fn telescoping_bound_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let c = random_circuit(&mut rng, 2, 6);
            let compiled = CompiledCircuit::new(&c).unwrap();
            let noisy = compiled.noisy_gate_count;
            let psi0 = haar_state(c.n_qubits, &mut rng).unwrap();
            let e1: Vec<f64> = (0..noisy).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let e2: Vec<f64> = (0..noisy).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let a = compiled.apply(&e1, &psi0).unwrap();
            let b = compiled.apply(&e2, &psi0).unwrap();
            let lhs = (a.amplitudes - b.amplitudes).norm();
            let rhs: f64 = c
                .noisy_indices()
                .iter()
                .enumerate()
                .map(|(slot, &gi)| {
                    crate::numerics::spectral_norm(&c.gates[gi].gate().generator)
                        * (e1[slot] - e2[slot]).abs()
                })
                .sum();
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn empirical_lipschitz_single_rz() {
        let theta = 1.1;
        let mut c = crate::circuit::Circuit::new(1).unwrap();
        c.push("rz", &[theta], &[0], true).unwrap();
        let est = empirical_lipschitz(&c, 0.3, 4000, &SeededRng::new(3), 77).unwrap();
        assert!(
            (est - theta / 2.0).abs() <= 0.01 * theta / 2.0,
            "estimate {est} vs {}",
            theta / 2.0
        );
    }

    #[test]
    fn empirical_lipschitz_identity_circuit() {
        let c = crate::circuit::Circuit::new(2).unwrap();
        let est = empirical_lipschitz(&c, 0.3, 10, &SeededRng::new(3), 0).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn sweep_deterministic_across_thread_counts() {
        let c = presets::validation_a(0.0);
        let cfg = MonteCarloCfg {
            eps_bar: 0.0,
            samples: 40,
            initial: InitialState::Fixed(StateVector::basis(1, 0).unwrap()),
            experiment_id: 9,
            keep_samples: true,
        };
        let levels = equidistant_levels(0.0, 1.0, 4);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| noise_sweep(&c, &levels, &cfg, &SeededRng::new(1)).unwrap())
        };
        let a = sweep_to_csv(&levels, &run(1));
        let b = sweep_to_csv(&levels, &run(8));
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_zero_level_mean_one() {
        let c = presets::validation_a(0.0);
        let cfg = MonteCarloCfg {
            eps_bar: 0.0,
            samples: 10,
            initial: InitialState::Fixed(StateVector::basis(1, 0).unwrap()),
            experiment_id: 2,
            keep_samples: false,
        };
        let stats = noise_sweep(&c, &[0.0], &cfg, &SeededRng::new(4)).unwrap();
        assert_abs_diff_eq!(stats[0].mean_fidelity, 1.0, epsilon = 1e-12);
    }
}
