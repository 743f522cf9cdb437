//! Analytic robustness bounds: summed-norm and pairwise Lipschitz
//! constants, worst-case fidelity bounds and their inversion, the
//! single-gate exact worst case, and the diamond-distance bound.
//!
//! All quantities skip gates whose noise flag is off; their control error
//! is identically zero. Norms are evaluated on local gate supports (pairs
//! on the union of the two supports), never on the full `2^n` space, and
//! sums run in ascending gate index so results are reproducible bit for
//! bit.

use serde::Serialize;

use crate::circuit::{Circuit, GateInstance};
use crate::gates::{effective_generator, gate_norm, NormMode};
use crate::numerics::{herm_eigen, CMatrix};
use crate::{Error, Result};

/// Thm.-2 style bound: sum of noisy-gate generator norms.
pub fn lipschitz_norm(circuit: &Circuit, mode: NormMode) -> f64 {
    circuit
        .gates
        .iter()
        .filter(|g| g.noisy)
        .map(|g| gate_norm(g.gate(), mode))
        .sum()
}

/// Worst-case fidelity bound `1 - L^2 eps_bar^2 / 2`.
///
/// The value is reported as-is, even when negative; `vacuous` marks that
/// case rather than clamping it away.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FidelityBound {
    pub value: f64,
    pub vacuous: bool,
}

pub fn fidelity_lower_bound(l: f64, eps_bar: f64) -> FidelityBound {
    let value = 1.0 - l * l * eps_bar * eps_bar / 2.0;
    FidelityBound {
        value,
        vacuous: value < 0.0,
    }
}

/// Largest tolerable noise bound for a target fidelity:
/// `(sqrt(2)/L) sqrt(1-F)`. `L = 0` yields the infinity sentinel (any
/// noise level is tolerable).
pub fn eps_max_for_fidelity(l: f64, f_target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_target) {
        return Err(Error::InvalidArgument(format!(
            "target fidelity {f_target} outside [0, 1]"
        )));
    }
    if l < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz bound {l} is negative"
        )));
    }
    if l == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0_f64.sqrt() / l * (1.0 - f_target).sqrt())
}

fn effective_on_union(
    a: &GateInstance,
    b: &GateInstance,
    mode: NormMode,
) -> Result<(CMatrix, CMatrix)> {
    let mut union: Vec<usize> = a.support.iter().chain(&b.support).copied().collect();
    union.sort_unstable();
    union.dedup();
    let positions = |support: &[usize]| -> Vec<usize> {
        support
            .iter()
            .map(|q| union.iter().position(|u| u == q).expect("union member"))
            .collect()
    };
    let ga = effective_generator(a.gate(), mode);
    let gb = effective_generator(b.gate(), mode);
    let ha = crate::numerics::embed(&ga, &positions(&a.support), union.len())?;
    let hb = crate::numerics::embed(&gb, &positions(&b.support), union.len())?;
    Ok((ha, hb))
}

/// Block norm `||[H_a H_b]|| = sqrt(lambda_max(H_a^2 + H_b^2))`, with both
/// generators embedded on the union of the two supports.
pub fn pair_block_norm(a: &GateInstance, b: &GateInstance, mode: NormMode) -> Result<f64> {
    let (ha, hb) = effective_on_union(a, b, mode)?;
    let sum = &ha * &ha + &hb * &hb;
    let es = herm_eigen(&sum)?;
    Ok(es.max().max(0.0).sqrt())
}

/// One block of a pairwise partition; indices refer to positions in the
/// sequence of noisy gates (gate-list order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Single(usize),
    Pair(usize, usize),
}

/// How to partition the noisy gates into 1/2-blocks.
#[derive(Debug, Clone)]
pub enum PartitionStrategy {
    /// Consecutive pairs `(0,1), (2,3), ...`; a trailing odd gate stays
    /// single.
    Greedy,
    /// Optimal consecutive partition by dynamic programming.
    Dp,
    /// Caller-supplied blocks, validated for exact consecutive coverage.
    Explicit(Vec<Block>),
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseBound {
    pub value: f64,
    pub partition: Vec<Block>,
}

/// Pairwise Lipschitz bound: `sum` over blocks of `||H_i||` for singles
/// and `sqrt(2) ||[H_i H_j]||` for pairs.
pub fn lipschitz_pairwise(
    circuit: &Circuit,
    strategy: &PartitionStrategy,
    mode: NormMode,
) -> Result<PairwiseBound> {
    let noisy: Vec<&GateInstance> = circuit.gates.iter().filter(|g| g.noisy).collect();
    let m = noisy.len();
    let single = |i: usize| gate_norm(noisy[i].gate(), mode);
    let pair = |i: usize| pair_block_norm(noisy[i], noisy[i + 1], mode);

    let partition: Vec<Block> = match strategy {
        PartitionStrategy::Greedy => {
            let mut blocks = Vec::with_capacity(m / 2 + 1);
            let mut i = 0;
            while i + 1 < m {
                blocks.push(Block::Pair(i, i + 1));
                i += 2;
            }
            if i < m {
                blocks.push(Block::Single(i));
            }
            blocks
        }
        PartitionStrategy::Dp => dp_partition(m, &single, &pair)?,
        PartitionStrategy::Explicit(blocks) => {
            validate_partition(blocks, m)?;
            blocks.clone()
        }
    };

    let mut value = 0.0;
    for block in &partition {
        value += match *block {
            Block::Single(i) => single(i),
            Block::Pair(i, _) => 2.0_f64.sqrt() * pair(i)?,
        };
    }
    Ok(PairwiseBound { value, partition })
}

/// `best(i) = min(best(i-1) + ||H_i||, best(i-2) + sqrt(2) ||[H_{i-1} H_i]||)`,
/// ties broken toward singles.
fn dp_partition(
    m: usize,
    single: &dyn Fn(usize) -> f64,
    pair: &dyn Fn(usize) -> Result<f64>,
) -> Result<Vec<Block>> {
    let mut best = vec![0.0_f64; m + 1];
    // took_pair[i]: the optimal partition of the first i gates ends in a pair.
    let mut took_pair = vec![false; m + 1];
    for i in 1..=m {
        best[i] = best[i - 1] + single(i - 1);
        if i >= 2 {
            let paired = best[i - 2] + 2.0_f64.sqrt() * pair(i - 2)?;
            if paired < best[i] {
                best[i] = paired;
                took_pair[i] = true;
            }
        }
    }
    let mut blocks = Vec::new();
    let mut i = m;
    while i > 0 {
        if took_pair[i] {
            blocks.push(Block::Pair(i - 2, i - 1));
            i -= 2;
        } else {
            blocks.push(Block::Single(i - 1));
            i -= 1;
        }
    }
    blocks.reverse();
    Ok(blocks)
}

fn validate_partition(blocks: &[Block], m: usize) -> Result<()> {
    let mut expected = 0usize;
    for block in blocks {
        match *block {
            Block::Single(i) => {
                if i != expected {
                    return Err(Error::BadPartition(format!(
                        "block starts at {i}, expected {expected}"
                    )));
                }
                expected += 1;
            }
            Block::Pair(i, j) => {
                if i != expected || j != i + 1 {
                    return Err(Error::BadPartition(format!(
                        "pair ({i}, {j}) is not the consecutive pair starting at {expected}"
                    )));
                }
                expected += 2;
            }
        }
    }
    if expected != m {
        return Err(Error::BadPartition(format!(
            "blocks cover {expected} gate(s), circuit has {m} noisy gate(s)"
        )));
    }
    Ok(())
}

/// Sin-based fidelity bound `sqrt(1 - (sum |sin(||H_i|| eps_bar)|)^2)`, or
/// `Vacuous` when the radicand is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum SinBound {
    Value(f64),
    Vacuous,
}

pub fn fidelity_lower_bound_sin(per_gate_norms: &[f64], eps_bar: f64) -> SinBound {
    let s: f64 = per_gate_norms
        .iter()
        .map(|&n| (n * eps_bar).sin().abs())
        .sum();
    let radicand = 1.0 - s * s;
    if radicand > 0.0 {
        SinBound::Value(radicand.sqrt())
    } else {
        SinBound::Vacuous
    }
}

/// Exact single-gate worst-case fidelity `cos(eps_bar (lambda_max -
/// lambda_min) / 2)`, attained by the equal superposition of the extreme
/// eigenvectors at `eps = +-eps_bar`. Valid while the half-spread phase
/// stays within `pi/2`.
pub fn exact_worst_case_single_gate(h: &CMatrix, eps_bar: f64) -> Result<f64> {
    if eps_bar < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise bound {eps_bar} is negative"
        )));
    }
    let es = herm_eigen(h)?;
    let half_phase = eps_bar * (es.max() - es.min()) / 2.0;
    if half_phase > std::f64::consts::FRAC_PI_2 {
        return Err(Error::OutOfRegime(half_phase));
    }
    Ok(half_phase.cos())
}

/// `sqrt(d) L eps_bar`.
pub fn diamond_distance_bound(l: f64, dim: usize, eps_bar: f64) -> Result<f64> {
    if l < 0.0 || eps_bar < 0.0 {
        return Err(Error::InvalidArgument(
            "Lipschitz bound and noise bound must be nonnegative".into(),
        ));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} must be at least 2"
        )));
    }
    Ok((dim as f64).sqrt() * l * eps_bar)
}

#[derive(Debug, Clone, Serialize)]
pub struct GateNormEntry {
    pub gate_index: usize,
    pub name: String,
    pub norm: f64,
}

/// Every analytic robustness quantity for one circuit at one noise level.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n_qubits: usize,
    pub dimension: usize,
    pub mode: NormMode,
    pub eps_bar: f64,
    pub f_target: f64,
    /// Norms of the noisy gates, ascending gate index.
    pub per_gate_norms: Vec<GateNormEntry>,
    pub l_norm: f64,
    pub l_pair_greedy: f64,
    pub l_pair_dp: f64,
    pub dp_partition: Vec<Block>,
    pub fidelity_bound: FidelityBound,
    pub fidelity_bound_sin: SinBound,
    /// Infinity when the circuit has no noisy gates.
    pub eps_max: f64,
    pub diamond_bound: f64,
}

pub fn full_report(
    circuit: &Circuit,
    eps_bar: f64,
    f_target: f64,
    mode: NormMode,
) -> Result<BoundReport> {
    if eps_bar < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise bound {eps_bar} is negative"
        )));
    }
    let per_gate_norms: Vec<GateNormEntry> = circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.noisy)
        .map(|(i, g)| GateNormEntry {
            gate_index: i,
            name: g.name.clone(),
            norm: gate_norm(g.gate(), mode),
        })
        .collect();
    let l_norm = lipschitz_norm(circuit, mode);
    let greedy = lipschitz_pairwise(circuit, &PartitionStrategy::Greedy, mode)?;
    let dp = lipschitz_pairwise(circuit, &PartitionStrategy::Dp, mode)?;
    let norms: Vec<f64> = per_gate_norms.iter().map(|e| e.norm).collect();
    let dim = 1usize << circuit.n_qubits;
    Ok(BoundReport {
        n_qubits: circuit.n_qubits,
        dimension: dim,
        mode,
        eps_bar,
        f_target,
        per_gate_norms,
        l_norm,
        l_pair_greedy: greedy.value,
        l_pair_dp: dp.value,
        dp_partition: dp.partition,
        fidelity_bound: fidelity_lower_bound(l_norm, eps_bar),
        fidelity_bound_sin: fidelity_lower_bound_sin(&norms, eps_bar),
        eps_max: eps_max_for_fidelity(l_norm, f_target)?,
        diamond_bound: diamond_distance_bound(l_norm, dim.max(2), eps_bar)?,
    })
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Aligned plain-text rendering for terminal output.
    pub fn to_table(&self) -> String {
        let mode = match self.mode {
            NormMode::Raw => "raw",
            NormMode::PhaseOptimized => "phase_optimized",
        };
        let mut rows: Vec<(String, String)> = vec![
            ("qubits".into(), self.n_qubits.to_string()),
            ("mode".into(), mode.into()),
            ("eps_bar".into(), format!("{:.6}", self.eps_bar)),
            ("L (norm sum)".into(), format!("{:.6}", self.l_norm)),
            (
                "L (pairwise greedy)".into(),
                format!("{:.6}", self.l_pair_greedy),
            ),
            ("L (pairwise dp)".into(), format!("{:.6}", self.l_pair_dp)),
            ("fidelity bound".into(), {
                let mut s = format!("{:.6}", self.fidelity_bound.value);
                if self.fidelity_bound.vacuous {
                    s.push_str(" (vacuous)");
                }
                s
            }),
            (
                "fidelity bound (sin)".into(),
                match self.fidelity_bound_sin {
                    SinBound::Value(v) => format!("{v:.6}"),
                    SinBound::Vacuous => "vacuous".into(),
                },
            ),
            (
                format!("eps_max @ F={:.4}", self.f_target),
                if self.eps_max.is_finite() {
                    format!("{:.6}", self.eps_max)
                } else {
                    "inf".into()
                },
            ),
            ("diamond bound".into(), format!("{:.6}", self.diamond_bound)),
        ];
        for entry in &self.per_gate_norms {
            rows.push((
                format!("  ||H|| gate[{}] {}", entry.gate_index, entry.name),
                format!("{:.6}", entry.norm),
            ));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;
    use crate::gates::{pauli_x, pauli_z};
    use crate::numerics::cr;
    use crate::presets;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gate_circuit(gens: &[CMatrix]) -> Circuit {
        let mut c = Circuit::new(1).unwrap();
        for (i, g) in gens.iter().enumerate() {
            c.push_custom(&format!("g{i}"), g.clone(), &[0], true).unwrap();
        }
        c
    }

    #[test]
    fn intro_lipschitz_values() {
        assert_abs_diff_eq!(
            lipschitz_norm(&presets::intro_u(0.0), NormMode::Raw),
            3.0 * PI / 8.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            lipschitz_norm(&presets::intro_u_prime(0.0), NormMode::Raw),
            5.0 * PI / 8.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn validation_lipschitz_values() {
        assert_abs_diff_eq!(
            lipschitz_norm(&presets::validation_a(0.0), NormMode::Raw),
            PI / 8.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            lipschitz_norm(&presets::validation_b(0.0), NormMode::Raw),
            5.0 * PI / 8.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn noiseless_gates_do_not_count() {
        let mut c = Circuit::new(1).unwrap();
        c.push("h", &[], &[0], false).unwrap();
        c.push("rz", &[1.0], &[0], false).unwrap();
        assert_eq!(lipschitz_norm(&c, NormMode::Raw), 0.0);
    }

    #[test]
    fn fidelity_bound_values() {
        assert_abs_diff_eq!(fidelity_lower_bound(7.0, 0.0).value, 1.0, epsilon = 0.0);
        // Single R_z(pi) at eps_bar = 0.1: 1 - pi^2 0.01 / 8.
        let b = fidelity_lower_bound(PI / 2.0, 0.1);
        assert_abs_diff_eq!(b.value, 1.0 - PI * PI * 0.01 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.value, 0.987663, epsilon = 1e-6);
        assert!(!b.vacuous);

        let b = fidelity_lower_bound(3.0 * PI / 8.0, 0.2);
        assert_abs_diff_eq!(b.value, 0.972241, epsilon = 1e-6);
        assert!(b.value <= 0.985); // observed minimum dominates the bound

        let b = fidelity_lower_bound(10.0, 1.0);
        assert!(b.vacuous);
        assert_abs_diff_eq!(b.value, -49.0, epsilon = 1e-12);
    }

    #[test]
    fn eps_max_values_and_round_trip() {
        assert_abs_diff_eq!(eps_max_for_fidelity(1.0, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eps_max_for_fidelity(3.0, 1.0).unwrap(), 0.0, epsilon = 0.0);
        assert!(eps_max_for_fidelity(0.0, 0.9).unwrap().is_infinite());
        assert!(eps_max_for_fidelity(1.0, 1.5).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let l = rng.gen_range(0.01..10.0);
            let f = rng.gen_range(0.0..1.0);
            let eps = eps_max_for_fidelity(l, f).unwrap();
            assert_abs_diff_eq!(fidelity_lower_bound(l, eps).value, f, epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_block_norm_examples() {
        let c = gate_circuit(&[pauli_z(), pauli_x()]);
        let n = pair_block_norm(&c.gates[0], &c.gates[1], NormMode::Raw).unwrap();
        assert_abs_diff_eq!(n, 2.0_f64.sqrt(), epsilon = 1e-12);

        // (I+Z)/2 and (I+X)/2: H1^2 + H2^2 = I + (Z+X)/2, largest
        // eigenvalue 1 + sqrt(2)/2.
        let id = CMatrix::identity(2, 2);
        let h1 = (&id + pauli_z()).scale(0.5);
        let h2 = (&id + pauli_x()).scale(0.5);
        let c = gate_circuit(&[h1, h2]);
        let n = pair_block_norm(&c.gates[0], &c.gates[1], NormMode::Raw).unwrap();
        assert_abs_diff_eq!(n, (1.0 + 2.0_f64.sqrt() / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn pair_block_norm_disjoint_supports() {
        let mut c = Circuit::new(2).unwrap();
        c.push_custom("z0", pauli_z(), &[0], true).unwrap();
        c.push_custom("x1", pauli_x(), &[1], true).unwrap();
        let n = pair_block_norm(&c.gates[0], &c.gates[1], NormMode::Raw).unwrap();
        assert_abs_diff_eq!(n, 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn pairwise_intro_greedy_and_dp() {
        // H_z = (pi/8) Z, H_y = (pi/4) Y: H_z^2 + H_y^2 = (5 pi^2/64) I.
        let c = presets::intro_u(0.0);
        let greedy = lipschitz_pairwise(&c, &PartitionStrategy::Greedy, NormMode::Raw).unwrap();
        assert_abs_diff_eq!(
            greedy.value,
            2.0_f64.sqrt() * 5.0_f64.sqrt() * PI / 8.0,
            epsilon = 1e-12
        );
        assert_eq!(greedy.partition, vec![Block::Pair(0, 1)]);

        // The pair is worse than the two singles here, so dp falls back.
        let dp = lipschitz_pairwise(&c, &PartitionStrategy::Dp, NormMode::Raw).unwrap();
        assert_abs_diff_eq!(dp.value, 3.0 * PI / 8.0, epsilon = 1e-12);
        assert_eq!(dp.partition, vec![Block::Single(0), Block::Single(1)]);
    }

    #[test]
    fn dp_prefers_profitable_pair() {
        let id = CMatrix::identity(2, 2);
        let h1 = (&id + pauli_z()).scale(0.5);
        let h2 = (&id + pauli_x()).scale(0.5);
        let c = gate_circuit(&[h1, h2]);
        let dp = lipschitz_pairwise(&c, &PartitionStrategy::Dp, NormMode::Raw).unwrap();
        let expected = 2.0_f64.sqrt() * (1.0 + 2.0_f64.sqrt() / 2.0).sqrt();
        assert_abs_diff_eq!(dp.value, expected, epsilon = 1e-12);
        assert!(expected < 2.0);
        assert_eq!(dp.partition, vec![Block::Pair(0, 1)]);
    }

    #[test]
    fn explicit_partition_validation() {
        let c = presets::intro_u(0.0);
        let ok = PartitionStrategy::Explicit(vec![Block::Single(0), Block::Single(1)]);
        assert!(lipschitz_pairwise(&c, &ok, NormMode::Raw).is_ok());
        for bad in [
            vec![Block::Single(0)],
            vec![Block::Single(1), Block::Single(0)],
            vec![Block::Pair(1, 0)],
            vec![Block::Pair(0, 1), Block::Single(1)],
        ] {
            let strategy = PartitionStrategy::Explicit(bad);
            assert!(matches!(
                lipschitz_pairwise(&c, &strategy, NormMode::Raw),
                Err(Error::BadPartition(_))
            ));
        }
    }

    #[test]
    fn dp_optimal_over_brute_force() {
        // dp must match exhaustive enumeration of consecutive partitions.
        fn brute(m: usize, single: &dyn Fn(usize) -> f64, pair: &dyn Fn(usize) -> f64) -> f64 {
            if m == 0 {
                return 0.0;
            }
            let mut best = brute(m - 1, single, pair) + single(m - 1);
            if m >= 2 {
                best = best.min(brute(m - 2, single, pair) + 2.0_f64.sqrt() * pair(m - 2));
            }
            best
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let count = rng.gen_range(1..=7);
            let gens: Vec<CMatrix> = (0..count)
                .map(|_| {
                    let a = CMatrix::from_fn(2, 2, |_, _| {
                        crate::numerics::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                    (&a + a.adjoint()).scale(0.5)
                })
                .collect();
            let c = gate_circuit(&gens);
            let noisy: Vec<&GateInstance> = c.gates.iter().collect();
            let single = |i: usize| gate_norm(noisy[i].gate(), NormMode::Raw);
            let pair =
                |i: usize| pair_block_norm(noisy[i], noisy[i + 1], NormMode::Raw).unwrap();
            let dp = lipschitz_pairwise(&c, &PartitionStrategy::Dp, NormMode::Raw).unwrap();
            let expected = brute(count, &single, &pair);
            assert_abs_diff_eq!(dp.value, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn pairwise_hierarchy_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..40 {
            let c = random_circuit(&mut rng, 3, 8);
            for mode in [NormMode::Raw, NormMode::PhaseOptimized] {
                let l_norm = lipschitz_norm(&c, mode);
                let greedy = lipschitz_pairwise(&c, &PartitionStrategy::Greedy, mode).unwrap();
                let dp = lipschitz_pairwise(&c, &PartitionStrategy::Dp, mode).unwrap();
                assert!(dp.value <= l_norm + 1e-10);
                assert!(dp.value <= greedy.value + 1e-10);
                if dp.partition.iter().all(|b| matches!(b, Block::Single(_))) {
                    assert_abs_diff_eq!(dp.value, l_norm, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn block_norm_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let mut strict = 0;
        let trials = 50;
        for _ in 0..trials {
            let gens: Vec<CMatrix> = (0..2)
                .map(|_| {
                    let a = CMatrix::from_fn(2, 2, |_, _| {
                        crate::numerics::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                    (&a + a.adjoint()).scale(0.5)
                })
                .collect();
            let c = gate_circuit(&gens);
            let block = pair_block_norm(&c.gates[0], &c.gates[1], NormMode::Raw).unwrap();
            let sum = gate_norm(c.gates[0].gate(), NormMode::Raw)
                + gate_norm(c.gates[1].gate(), NormMode::Raw);
            assert!(block <= sum + 1e-10);
            if block < sum - 1e-10 {
                strict += 1;
            }
        }
        // Strict for random pairs with probability ~1.
        assert!(strict >= trials - 1, "only {strict}/{trials} strict");
    }

    #[test]
    fn sin_bound_examples() {
        match fidelity_lower_bound_sin(&[PI / 6.0], 1.0) {
            SinBound::Value(v) => assert_abs_diff_eq!(v, 3.0_f64.sqrt() / 2.0, epsilon = 1e-12),
            SinBound::Vacuous => panic!("unexpected vacuous"),
        }
        assert_eq!(fidelity_lower_bound_sin(&[2.0, 3.0], 0.0), SinBound::Value(1.0));
        assert_eq!(fidelity_lower_bound_sin(&[1.0, 1.0], 0.9), SinBound::Vacuous);
    }

    #[test]
    fn tightness_ordering_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..40 {
            let c = random_circuit(&mut rng, 3, 8);
            let eps_bar = rng.gen_range(0.0..0.1);
            let report = full_report(&c, eps_bar, 0.9, NormMode::Raw).unwrap();
            // Linearized sines (sin x -> x): the quadratic bound dominates
            // whenever L eps_bar < 1.
            let lin = report.l_norm * eps_bar;
            if lin < 1.0 {
                let linearized = (1.0 - lin * lin).sqrt();
                assert!(report.fidelity_bound.value >= linearized - 1e-12);
            }
            // With the true sines a dominant single phase gives (nearly)
            // cos(L eps_bar), which beats its own Taylor lower bound. The
            // ordering is guaranteed once no per-gate phase exceeds
            // (sqrt(3)/2) of the total: c - s <= max_i(c_i)^2 * c / 6
            // then implies c^2 - s^2 <= c^4/4.
            let phases: Vec<f64> = report
                .per_gate_norms
                .iter()
                .map(|g| g.norm * eps_bar)
                .collect();
            let total: f64 = phases.iter().sum();
            let max_phase = phases.iter().cloned().fold(0.0, f64::max);
            if phases.len() < 2 || max_phase > 3f64.sqrt() / 2.0 * total {
                continue;
            }
            if let SinBound::Value(sin_bound) = report.fidelity_bound_sin {
                assert!(
                    report.fidelity_bound.value >= sin_bound - 1e-12,
                    "quadratic {} < sin {}",
                    report.fidelity_bound.value,
                    sin_bound
                );
            }
        }
    }

    #[test]
    fn exact_worst_case_examples() {
        assert_abs_diff_eq!(
            exact_worst_case_single_gate(&pauli_z(), PI / 3.0).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            exact_worst_case_single_gate(&pauli_z(), 0.0).unwrap(),
            1.0,
            epsilon = 0.0
        );
        // Asymmetric spectrum {0, pi}: spread form, not cos(||H|| eps).
        let h = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(0.0), cr(PI)]);
        assert_abs_diff_eq!(
            exact_worst_case_single_gate(&h, 0.4).unwrap(),
            (0.4 * PI / 2.0).cos(),
            epsilon = 1e-12
        );
        assert!(matches!(
            exact_worst_case_single_gate(&pauli_z(), 2.0),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn exact_worst_case_matches_grid_search() {
        // Oracle: min over population vectors of |sum_k p_k e^{-i eps lam_k}|
        // with eps = +-eps_bar; populations from a pair grid (401 angles per
        // eigenvalue pair) plus random simplex points.
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..5 {
            let a = CMatrix::from_fn(4, 4, |_, _| {
                crate::numerics::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let h = (&a + a.adjoint()).scale(0.5);
            let eps_bar = 0.3;
            let es = herm_eigen(&h).unwrap();
            let overlap = |p: &[f64], eps: f64| -> f64 {
                let z: crate::numerics::C64 = es
                    .values
                    .iter()
                    .zip(p)
                    .map(|(&lam, &w)| crate::numerics::c(0.0, -eps * lam).exp() * cr(w))
                    .sum();
                z.norm()
            };
            let mut oracle = f64::INFINITY;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    for step in 0..=400 {
                        let t = step as f64 / 400.0 * std::f64::consts::FRAC_PI_2;
                        let mut p = [0.0; 4];
                        p[i] = t.cos().powi(2);
                        p[j] = t.sin().powi(2);
                        oracle = oracle.min(overlap(&p, eps_bar)).min(overlap(&p, -eps_bar));
                    }
                }
            }
            for _ in 0..2000 {
                let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
                oracle = oracle.min(overlap(&p, eps_bar)).min(overlap(&p, -eps_bar));
            }
            let exact = exact_worst_case_single_gate(&h, eps_bar).unwrap();
            assert!(
                (exact - oracle).abs() <= 1e-4,
                "exact {exact} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn exact_dominates_quadratic_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let a = CMatrix::from_fn(2, 2, |_, _| {
                crate::numerics::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let h = (&a + a.adjoint()).scale(0.5);
            let es = herm_eigen(&h).unwrap();
            let spread_half = (es.max() - es.min()) / 2.0;
            for eps_bar in [0.01, 0.05, 0.1] {
                let exact = exact_worst_case_single_gate(&h, eps_bar).unwrap();
                // The matching quadratic bound uses the phase-optimized
                // norm, whose Lipschitz constant equals the half-spread.
                let quad = fidelity_lower_bound(spread_half, eps_bar).value;
                assert!(exact >= quad - 1e-12);
                // 1 - x^2/2 is the second-order Taylor expansion of cos x.
                let x = spread_half * eps_bar;
                assert!((exact - quad).abs() <= x.powi(4) / 24.0 + 1e-12);
            }
        }
    }

    #[test]
    fn diamond_bound_values() {
        assert_abs_diff_eq!(diamond_distance_bound(1.0, 2, 0.0).unwrap(), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            diamond_distance_bound(PI / 8.0, 2, 0.1).unwrap(),
            2.0_f64.sqrt() * PI / 8.0 * 0.1,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            diamond_distance_bound(PI / 8.0, 2, 0.1).unwrap(),
            0.05554,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(diamond_distance_bound(1.0, 4, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert!(diamond_distance_bound(1.0, 1, 0.5).is_err());
    }

    #[test]
    fn full_report_intro() {
        let report = full_report(&presets::intro_u(0.2), 0.2, 0.9, NormMode::Raw).unwrap();
        assert_abs_diff_eq!(report.l_norm, 3.0 * PI / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.fidelity_bound.value, 0.972241, epsilon = 1e-6);
        assert!(!report.fidelity_bound.vacuous);
        assert_eq!(report.per_gate_norms.len(), 2);
        let json = report.to_json();
        assert!(json.contains("l_norm"));
        let table = report.to_table();
        assert!(table.contains("L (norm sum)"));
    }

    #[test]
    fn full_report_identity_circuit() {
        let c = Circuit::new(1).unwrap();
        let report = full_report(&c, 0.3, 0.9, NormMode::Raw).unwrap();
        assert_eq!(report.l_norm, 0.0);
        assert_eq!(report.fidelity_bound.value, 1.0);
        assert!(report.eps_max.is_infinite());
        assert!(report.per_gate_norms.is_empty());
    }
}
