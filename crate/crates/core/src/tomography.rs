//! Single-qubit state tomography: simulated Pauli-basis measurements,
//! Bloch-vector estimation with radial projection, density-matrix
//! reconstruction, and the simulated hardware-validation sweep.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::numerics::{c, cr, CMatrix};
use crate::rng::SeededRng;
use crate::sim::{self, CompiledCircuit, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

/// Exact Pauli expectation values `(r_x, r_y, r_z)` of a one-qubit state.
pub fn exact_bloch(psi: &StateVector) -> Result<[f64; 3]> {
    if psi.n_qubits != 1 {
        return Err(Error::NotSingleQubit(psi.n_qubits));
    }
    let a = psi.amplitudes[0];
    let b = psi.amplitudes[1];
    let ab = a.conj() * b;
    Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
}

/// Binomial sampling of projections onto the `+`/`-` axes of `basis`:
/// `p_plus = <psi|P_plus|psi>`. Returns `(n_plus, n_minus)`.
pub fn measure_basis(
    psi: &StateVector,
    basis: PauliBasis,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<(u64, u64)> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be >= 1".into()));
    }
    let r = exact_bloch(psi)?;
    let expectation = match basis {
        PauliBasis::X => r[0],
        PauliBasis::Y => r[1],
        PauliBasis::Z => r[2],
    };
    let p_plus = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let n_plus = Binomial::new(shots, p_plus)
        .expect("probability in [0, 1]")
        .sample(rng);
    Ok((n_plus, shots - n_plus))
}

/// Bloch-vector estimate from three basis measurements. Unphysical
/// estimates (`||r|| > 1`) are radially projected onto the unit ball; the
/// raw triple is kept for diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlochEstimate {
    pub r_x: f64,
    pub r_y: f64,
    pub r_z: f64,
    pub shots_per_basis: u64,
    pub raw_r: [f64; 3],
}

impl BlochEstimate {
    pub fn r(&self) -> [f64; 3] {
        [self.r_x, self.r_y, self.r_z]
    }
}

fn project_raw(raw: [f64; 3], shots_per_basis: u64) -> BlochEstimate {
    let norm = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
    let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    BlochEstimate {
        r_x: raw[0] * scale,
        r_y: raw[1] * scale,
        r_z: raw[2] * scale,
        shots_per_basis,
        raw_r: raw,
    }
}

/// `r_hat = (n_plus - n_minus) / shots` per axis, then radial projection.
pub fn estimate_bloch(
    counts_x: (u64, u64),
    counts_y: (u64, u64),
    counts_z: (u64, u64),
) -> Result<BlochEstimate> {
    let shots = counts_x.0 + counts_x.1;
    for counts in [counts_y, counts_z] {
        if counts.0 + counts.1 != shots {
            return Err(Error::InvalidArgument(
                "inconsistent shot counts across bases".into(),
            ));
        }
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be >= 1".into()));
    }
    let axis = |(p, m): (u64, u64)| (p as f64 - m as f64) / shots as f64;
    Ok(project_raw(
        [axis(counts_x), axis(counts_y), axis(counts_z)],
        shots,
    ))
}

/// `rho = (I + r_x X + r_y Y + r_z Z) / 2`.
pub fn reconstruct_rho(b: &BlochEstimate) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            cr((1.0 + b.r_z) / 2.0),
            c(b.r_x / 2.0, -b.r_y / 2.0),
            c(b.r_x / 2.0, b.r_y / 2.0),
            cr((1.0 - b.r_z) / 2.0),
        ],
    )
}

/// `sqrt(<psi|rho|psi>)`, clipped into `[0, 1]`.
pub fn fidelity_pure_mixed(psi: &StateVector, rho: &CMatrix) -> Result<f64> {
    if psi.n_qubits != 1 {
        return Err(Error::NotSingleQubit(psi.n_qubits));
    }
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let overlap = (psi.amplitudes.adjoint() * rho * &psi.amplitudes)[(0, 0)].re;
    Ok(overlap.clamp(0.0, 1.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct Tomogram {
    pub bloch: BlochEstimate,
    #[serde(skip)]
    pub rho: CMatrix,
    /// Fidelity estimate against the supplied reference pure state.
    pub fidelity_vs: Option<f64>,
}

/// Measure all three Pauli bases (in X, Y, Z order on the same stream) and
/// reconstruct the density matrix.
pub fn tomograph(
    psi: &StateVector,
    shots: u64,
    rng: &mut impl Rng,
    reference: Option<&StateVector>,
) -> Result<Tomogram> {
    let cx = measure_basis(psi, PauliBasis::X, shots, rng)?;
    let cy = measure_basis(psi, PauliBasis::Y, shots, rng)?;
    let cz = measure_basis(psi, PauliBasis::Z, shots, rng)?;
    let bloch = estimate_bloch(cx, cy, cz)?;
    let rho = reconstruct_rho(&bloch);
    let fidelity_vs = match reference {
        Some(r) => Some(fidelity_pure_mixed(r, &rho)?),
        None => None,
    };
    Ok(Tomogram {
        bloch,
        rho,
        fidelity_vs,
    })
}

// --- validation sweep ----------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub levels: Vec<f64>,
    pub samples: usize,
    pub shots: u64,
    pub experiment_id: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            levels: sim::equidistant_levels(0.0, 1.0, 16),
            samples: 80,
            shots: 20_000,
            experiment_id: 0x515,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QstRecord {
    pub circuit_id: String,
    pub level_index: usize,
    pub eps_bar: f64,
    pub sample_idx: usize,
    pub eps: Vec<f64>,
    pub f_qst: f64,
    pub f_exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub circuit_id: String,
    pub eps_bar: f64,
    pub mean_f_qst: f64,
    pub std_f_qst: f64,
    pub min_f_qst: f64,
    pub min_f_exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepData {
    pub records: Vec<QstRecord>,
    pub summaries: Vec<LevelSummary>,
}

/// The simulated hardware-validation experiment: per (circuit, level,
/// sample) draw a noise vector, run the noisy circuit on `|0>`, tomograph
/// the output with `3 x shots` measurements and record the QST fidelity
/// against the ideal output next to the exact one.
pub fn validation_sweep(circuits: &[(&str, &Circuit)], cfg: &SweepConfig, seed: &SeededRng) -> Result<SweepData> {
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (ci, (id, circuit)) in circuits.iter().enumerate() {
        if circuit.n_qubits != 1 {
            return Err(Error::NotSingleQubit(circuit.n_qubits));
        }
        let compiled = CompiledCircuit::new(circuit)?;
        let noisy = compiled.noisy_gate_count;
        let psi0 = StateVector::basis(1, 0)?;
        let ideal = compiled.apply(&vec![0.0; noisy], &psi0)?;
        for (li, &eps_bar) in cfg.levels.iter().enumerate() {
            let cell: Vec<QstRecord> = (0..cfg.samples)
                .into_par_iter()
                .map(|s| -> Result<QstRecord> {
                    let mut rng =
                        seed.stream(&[cfg.experiment_id, ci as u64, li as u64, s as u64]);
                    let eps: Vec<f64> = (0..noisy)
                        .map(|_| {
                            if eps_bar == 0.0 {
                                let _: f64 = rng.gen();
                                0.0
                            } else {
                                rng.gen_range(-eps_bar..=eps_bar)
                            }
                        })
                        .collect();
                    let out = compiled.apply(&eps, &psi0)?;
                    let f_exact = sim::fidelity(&ideal, &out)?;
                    let tomogram = tomograph(&out, cfg.shots, &mut rng, Some(&ideal))?;
                    Ok(QstRecord {
                        circuit_id: id.to_string(),
                        level_index: li,
                        eps_bar,
                        sample_idx: s,
                        eps,
                        f_qst: tomogram.fidelity_vs.expect("reference supplied"),
                        f_exact,
                    })
                })
                .collect::<Result<_>>()?;
            let n = cell.len() as f64;
            let mean = cell.iter().map(|r| r.f_qst).sum::<f64>() / n;
            let var = cell.iter().map(|r| (r.f_qst - mean).powi(2)).sum::<f64>() / n;
            summaries.push(LevelSummary {
                circuit_id: id.to_string(),
                eps_bar,
                mean_f_qst: mean,
                std_f_qst: var.sqrt(),
                min_f_qst: cell.iter().map(|r| r.f_qst).fold(f64::INFINITY, f64::min),
                min_f_exact: cell.iter().map(|r| r.f_exact).fold(f64::INFINITY, f64::min),
            });
            records.extend(cell);
        }
    }
    Ok(SweepData { records, summaries })
}

impl SweepData {
    /// CSV rows `circuit_id,eps_level,sample_idx,eps_value...,f_qst,f_exact`;
    /// circuits with fewer noisy gates leave trailing eps columns blank.
    pub fn to_csv(&self) -> String {
        let width = self.records.iter().map(|r| r.eps.len()).max().unwrap_or(0);
        let mut out = String::from("circuit_id,eps_level");
        out.push_str(",sample_idx");
        for i in 0..width {
            out.push_str(&format!(",eps_{i}"));
        }
        out.push_str(",f_qst,f_exact\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.circuit_id, r.eps_bar, r.sample_idx));
            for i in 0..width {
                match r.eps.get(i) {
                    Some(e) => out.push_str(&format!(",{e}")),
                    None => out.push(','),
                }
            }
            out.push_str(&format!(",{},{}\n", r.f_qst, r.f_exact));
        }
        out
    }
}
