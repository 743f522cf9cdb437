//! 3-qubit QFT gate-set study: the textbook circuit plus five hand-authored
//! decompositions into restricted gate sets, with bound reports and Monte
//! Carlo robustness comparison.
//!
//! Every variant is unitary-equivalent to the textbook QFT up to a global
//! phase; decompositions introduce per-gate phases only, which cancel in
//! that comparison.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bounds::{self, BoundReport};
use crate::circuit::Circuit;
use crate::gates::NormMode;
use crate::rng::SeededRng;
use crate::sim::{monte_carlo, InitialState, MonteCarloCfg, SimStats};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VariantId {
    Textbook,
    A,
    B,
    C,
    D,
    E,
}

impl VariantId {
    pub const ALL: [VariantId; 6] = [
        VariantId::Textbook,
        VariantId::A,
        VariantId::B,
        VariantId::C,
        VariantId::D,
        VariantId::E,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            VariantId::Textbook => "textbook",
            VariantId::A => "A",
            VariantId::B => "B",
            VariantId::C => "C",
            VariantId::D => "D",
            VariantId::E => "E",
        }
    }

    /// Gate names this variant is allowed to use.
    pub fn allowed_gates(&self) -> &'static [&'static str] {
        match self {
            VariantId::Textbook => &["h", "cp", "swap"],
            VariantId::A => &["sx", "x", "rz", "cx"],
            VariantId::B => &["rx", "rz", "cz"],
            VariantId::C => &["u1", "u2", "u3", "cx"],
            VariantId::D => &["sqrt_iswap", "fsim", "phasedxz", "x", "y", "z"],
            VariantId::E => &["rxy", "rz", "rzz"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateSetVariant {
    pub id: VariantId,
    pub circuit: Circuit,
}

// --- per-variant decomposition rules -------------------------------------
//
// Helpers append gates in application order via `Circuit::apply`.

fn add_h(c: &mut Circuit, id: VariantId, q: usize) -> Result<()> {
    match id {
        VariantId::Textbook => c.apply("h", &[], &[q], true),
        VariantId::A => {
            // H ~ R_z(pi/2) sqrt(X) R_z(pi/2)
            c.apply("rz", &[PI / 2.0], &[q], true)?;
            c.apply("sx", &[], &[q], true)?;
            c.apply("rz", &[PI / 2.0], &[q], true)
        }
        VariantId::B => {
            c.apply("rz", &[PI / 2.0], &[q], true)?;
            c.apply("rx", &[PI / 2.0], &[q], true)?;
            c.apply("rz", &[PI / 2.0], &[q], true)
        }
        VariantId::C => c.apply("u2", &[0.0, PI], &[q], true),
        // H ~ Z^{z+a} X^x Z^{-a} at (x, z, a) = (1/2, 1, -1/2)
        VariantId::D => c.apply("phasedxz", &[0.5, 1.0, -0.5], &[q], true),
        VariantId::E => {
            // H = R_y(pi/2) Z exactly; Z ~ R_z(pi)
            c.apply("rz", &[PI], &[q], true)?;
            c.apply("rxy", &[PI / 2.0, PI / 2.0], &[q], true)
        }
    }
}

/// Controlled-X within the variant's gate set, `H_t CZ H_t` where needed.
fn add_cx(c: &mut Circuit, id: VariantId, control: usize, target: usize) -> Result<()> {
    match id {
        VariantId::A | VariantId::C => c.apply("cx", &[], &[control, target], true),
        VariantId::B => {
            add_h(c, id, target)?;
            c.apply("cz", &[], &[control, target], true)?;
            add_h(c, id, target)
        }
        VariantId::D => {
            add_h(c, id, target)?;
            c.apply("fsim", &[0.0, PI], &[control, target], true)?;
            add_h(c, id, target)
        }
        VariantId::E => {
            add_h(c, id, target)?;
            add_cp(c, id, PI, control, target)?;
            add_h(c, id, target)
        }
        VariantId::Textbook => unreachable!("textbook uses cp/swap directly"),
    }
}

/// Controlled-phase `diag(1, 1, 1, e^{i lambda})` up to a global phase.
fn add_cp(c: &mut Circuit, id: VariantId, lambda: f64, a: usize, b: usize) -> Result<()> {
    match id {
        VariantId::Textbook => c.apply("cp", &[lambda], &[a, b], true),
        VariantId::A | VariantId::B => {
            // CP(l) ~ Rz_a(l/2) Rz_b(l/2) CX Rz_b(-l/2) CX
            add_cx(c, id, a, b)?;
            apply_rz(c, id, -lambda / 2.0, b)?;
            add_cx(c, id, a, b)?;
            apply_rz(c, id, lambda / 2.0, b)?;
            apply_rz(c, id, lambda / 2.0, a)
        }
        VariantId::C => {
            // Exact with u1 phase gates (no global phase left over).
            add_cx(c, id, a, b)?;
            c.apply("u1", &[-lambda / 2.0], &[b], true)?;
            add_cx(c, id, a, b)?;
            c.apply("u1", &[lambda / 2.0], &[b], true)?;
            c.apply("u1", &[lambda / 2.0], &[a], true)
        }
        VariantId::D => c.apply("fsim", &[0.0, -lambda], &[a, b], true),
        VariantId::E => {
            // CP(l) ~ Rz_a(l/2) Rz_b(l/2) U_zz(-l/2)
            c.apply("rzz", &[-lambda / 2.0], &[a, b], true)?;
            c.apply("rz", &[lambda / 2.0], &[a], true)?;
            c.apply("rz", &[lambda / 2.0], &[b], true)
        }
    }
}

fn apply_rz(c: &mut Circuit, _id: VariantId, theta: f64, q: usize) -> Result<()> {
    c.apply("rz", &[theta], &[q], true)
}

fn add_swap(c: &mut Circuit, id: VariantId, a: usize, b: usize) -> Result<()> {
    match id {
        VariantId::Textbook => c.apply("swap", &[], &[a, b], true),
        VariantId::D => {
            // SWAP = iSWAP . CZ . (S^t x S^t); S^t = Z^{-1/2}
            c.apply("phasedxz", &[0.0, -0.5, 0.0], &[a], true)?;
            c.apply("phasedxz", &[0.0, -0.5, 0.0], &[b], true)?;
            c.apply("fsim", &[0.0, PI], &[a, b], true)?;
            c.apply("sqrt_iswap", &[], &[a, b], true)?;
            c.apply("sqrt_iswap", &[], &[a, b], true)
        }
        _ => {
            add_cx(c, id, a, b)?;
            add_cx(c, id, b, a)?;
            add_cx(c, id, a, b)
        }
    }
}

/// The 3-qubit QFT in the variant's gate set, all gates noise susceptible.
pub fn build_variant(id: VariantId, eps_bar: f64) -> Result<GateSetVariant> {
    let mut c = Circuit::new(3)?;
    // Textbook structure in application order; qubit 0 is the most
    // significant bit.
    add_h(&mut c, id, 0)?;
    add_cp(&mut c, id, PI / 2.0, 1, 0)?;
    add_cp(&mut c, id, PI / 4.0, 2, 0)?;
    add_h(&mut c, id, 1)?;
    add_cp(&mut c, id, PI / 2.0, 2, 1)?;
    add_h(&mut c, id, 2)?;
    add_swap(&mut c, id, 0, 2)?;
    Ok(GateSetVariant {
        id,
        circuit: c.with_noise(eps_bar),
    })
}

/// `DFT_8` matrix: `F[j][k] = omega^{jk} / sqrt(8)`, `omega = e^{2 pi i/8}`.
pub fn dft8() -> crate::numerics::CMatrix {
    let dim = 8;
    let scale = 1.0 / (dim as f64).sqrt();
    crate::numerics::CMatrix::from_fn(dim, dim, |j, k| {
        let phase = 2.0 * PI * (j * k) as f64 / dim as f64;
        crate::numerics::c(phase.cos() * scale, phase.sin() * scale)
    })
}

/// Longest chain when gates are greedily packed into layers of disjoint
/// supports, preserving order between overlapping gates.
pub fn circuit_depth(c: &Circuit) -> usize {
    let mut depth_at = vec![0usize; c.n_qubits];
    // Application order = reversed gate list; depth is the same either way,
    // but layering must respect it.
    for g in c.gates.iter().rev() {
        let layer = 1 + g.support.iter().map(|&q| depth_at[q]).max().unwrap_or(0);
        for &q in &g.support {
            depth_at[q] = layer;
        }
    }
    depth_at.into_iter().max().unwrap_or(0)
}

// --- comparison ----------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VariantRow {
    pub id: &'static str,
    pub gate_count: usize,
    pub depth: usize,
    pub report_raw: BoundReport,
    pub report_phase_opt: BoundReport,
    pub stats: SimStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub eps_bar: f64,
    pub samples: usize,
    /// Rows sorted by ascending raw `L_norm`.
    pub rows: Vec<VariantRow>,
}

const QFT_STREAM: u64 = 0x9f7;

/// Build all six variants, compute their bound reports and Haar-state
/// Monte Carlo statistics, and rank them by summed-norm Lipschitz bound.
pub fn compare_variants(eps_bar: f64, samples: usize, seed: &SeededRng) -> Result<Comparison> {
    let mut rows = Vec::with_capacity(VariantId::ALL.len());
    for (vi, id) in VariantId::ALL.iter().enumerate() {
        let variant = build_variant(*id, eps_bar)?;
        let cfg = MonteCarloCfg {
            eps_bar,
            samples,
            initial: InitialState::Haar,
            experiment_id: QFT_STREAM + vi as u64,
            keep_samples: false,
        };
        let stats = monte_carlo(&variant.circuit, &cfg, seed)?;
        rows.push(VariantRow {
            id: id.name(),
            gate_count: variant.circuit.gates.len(),
            depth: circuit_depth(&variant.circuit),
            report_raw: bounds::full_report(&variant.circuit, eps_bar, 0.99, NormMode::Raw)?,
            report_phase_opt: bounds::full_report(
                &variant.circuit,
                eps_bar,
                0.99,
                NormMode::PhaseOptimized,
            )?,
            stats,
        });
    }
    rows.sort_by(|a, b| a.report_raw.l_norm.total_cmp(&b.report_raw.l_norm));
    Ok(Comparison {
        eps_bar,
        samples,
        rows,
    })
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "variant,gate_count,depth,l_norm,l_norm_phase_opt,l_pair_dp,\
             mean_fidelity,std_fidelity,min_fidelity,fidelity_bound,vacuous\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.id,
                r.gate_count,
                r.depth,
                r.report_raw.l_norm,
                r.report_phase_opt.l_norm,
                r.report_raw.l_pair_dp,
                r.stats.mean_fidelity,
                r.stats.std_fidelity,
                r.stats.min_fidelity,
                r.report_raw.fidelity_bound.value,
                r.report_raw.fidelity_bound.vacuous,
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<9} {:>5} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "variant", "gates", "depth", "L_norm", "L_opt", "mean_F", "min_F", "bound"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<9} {:>5} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}\n",
                r.id,
                r.gate_count,
                r.depth,
                r.report_raw.l_norm,
                r.report_phase_opt.l_norm,
                r.stats.mean_fidelity,
                r.stats.min_fidelity,
                r.report_raw.fidelity_bound.value,
            ));
        }
        out
    }
}
