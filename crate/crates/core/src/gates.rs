//! Built-in gate library with explicit Hermitian generators.
//!
//! Every gate is represented by a pair `(H, U)` with `U = exp(-iH)`, so a
//! coherent control error acts as `U(eps) = exp(-i(1+eps)H)`. Parametric
//! rotations keep their natural unbounded generators (`rz(4pi)` has norm
//! `2pi`, not 0) because the error acts on the physically actuated rotation
//! angle. Non-parametric and composite gates fall back to the principal
//! branch of the matrix logarithm; the phase-optimized norm of Remark-style
//! global-phase shifts is available separately via [`phase_optimize`].

use std::f64::consts::PI;

use crate::numerics::{
    self, c, cr, herm_eigen, spectral_norm, CMatrix,
};
use crate::{Error, Result};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

/// All built-in gate names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Sx,
    Rx,
    Ry,
    Rz,
    Rxy,
    U1,
    U2,
    U3,
    PhasedXZ,
    Cx,
    Cz,
    Cp,
    Swap,
    SqrtIswap,
    Fsim,
    Rzz,
}

impl GateKind {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "x" => Self::X,
            "y" => Self::Y,
            "z" => Self::Z,
            "h" => Self::H,
            "s" => Self::S,
            "t" => Self::T,
            "sx" => Self::Sx,
            "rx" => Self::Rx,
            "ry" => Self::Ry,
            "rz" => Self::Rz,
            "rxy" => Self::Rxy,
            "u1" => Self::U1,
            "u2" => Self::U2,
            "u3" => Self::U3,
            "phasedxz" => Self::PhasedXZ,
            "cx" => Self::Cx,
            "cz" => Self::Cz,
            "cp" => Self::Cp,
            "swap" => Self::Swap,
            "sqrt_iswap" => Self::SqrtIswap,
            "fsim" => Self::Fsim,
            "rzz" | "uzz" => Self::Rzz,
            other => return Err(Error::UnknownGate(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::H => "h",
            Self::S => "s",
            Self::T => "t",
            Self::Sx => "sx",
            Self::Rx => "rx",
            Self::Ry => "ry",
            Self::Rz => "rz",
            Self::Rxy => "rxy",
            Self::U1 => "u1",
            Self::U2 => "u2",
            Self::U3 => "u3",
            Self::PhasedXZ => "phasedxz",
            Self::Cx => "cx",
            Self::Cz => "cz",
            Self::Cp => "cp",
            Self::Swap => "swap",
            Self::SqrtIswap => "sqrt_iswap",
            Self::Fsim => "fsim",
            Self::Rzz => "rzz",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Cx | Self::Cz | Self::Cp | Self::Swap | Self::SqrtIswap | Self::Fsim
            | Self::Rzz => 2,
            _ => 1,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Self::Rx | Self::Ry | Self::Rz | Self::U1 | Self::Cp | Self::Rzz => 1,
            Self::Rxy | Self::U2 | Self::Fsim => 2,
            Self::U3 | Self::PhasedXZ => 3,
            _ => 0,
        }
    }
}

/// A gate with its parameters resolved into a concrete generator/unitary
/// pair, `unitary = exp(-i generator)`.
#[derive(Debug, Clone)]
pub struct ResolvedGate {
    pub name: String,
    pub arity: usize,
    pub generator: CMatrix,
    pub unitary: CMatrix,
}

impl ResolvedGate {
    /// Build a gate directly from a Hermitian generator.
    pub fn from_generator(name: impl Into<String>, generator: CMatrix) -> Result<Self> {
        let unitary = numerics::exp_neg_i(&generator, 1.0)?;
        let dim = generator.nrows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "generator dimension {dim} is not a power of two >= 2"
            )));
        }
        Ok(Self {
            name: name.into(),
            arity: dim.trailing_zeros() as usize,
            generator,
            unitary,
        })
    }
}

/// Resolve a named built-in gate.
pub fn builtin_gate(name: &str, params: &[f64]) -> Result<ResolvedGate> {
    let kind = GateKind::from_name(name)?;
    if params.len() != kind.param_count() {
        return Err(Error::BadParamCount {
            name: name.to_string(),
            expected: kind.param_count(),
            got: params.len(),
        });
    }
    let (generator, unitary) = match kind {
        // Parametric gates with natural (unbounded) generators.
        GateKind::Rx => natural(pauli_x().scale(params[0] / 2.0))?,
        GateKind::Ry => natural(pauli_y().scale(params[0] / 2.0))?,
        GateKind::Rz => natural(pauli_z().scale(params[0] / 2.0))?,
        GateKind::Rxy => {
            // rxy(phi, theta): rotation by theta about the equatorial axis
            // at azimuth phi.
            let (phi, theta) = (params[0], params[1]);
            let axis = pauli_x().scale(phi.cos()) + pauli_y().scale(phi.sin());
            natural(axis.scale(theta / 2.0))?
        }
        GateKind::U1 => {
            // diag(1, e^{i lambda}) with generator -lambda |1><1|.
            let mut h = CMatrix::zeros(2, 2);
            h[(1, 1)] = cr(-params[0]);
            natural(h)?
        }
        GateKind::Cp => {
            // diag(1,1,1,e^{i lambda}) with generator -lambda |11><11|.
            let mut h = CMatrix::zeros(4, 4);
            h[(3, 3)] = cr(-params[0]);
            natural(h)?
        }
        GateKind::Rzz => natural(pauli_z().kronecker(&pauli_z()).scale(params[0] / 2.0))?,

        // Composite parametric gates: assemble the public unitary and take
        // the principal-branch generator.
        GateKind::U2 => principal(u2_matrix(params[0], params[1]))?,
        GateKind::U3 => principal(u3_matrix(params[0], params[1], params[2]))?,
        GateKind::PhasedXZ => principal(phasedxz_matrix(params[0], params[1], params[2]))?,
        GateKind::Fsim => principal(fsim_matrix(params[0], params[1]))?,

        // Non-parametric gates: textbook unitary, principal-branch generator.
        GateKind::X => principal(pauli_x())?,
        GateKind::Y => principal(pauli_y())?,
        GateKind::Z => principal(pauli_z())?,
        GateKind::H => principal(
            CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(1.0), cr(-1.0)])
                .scale(1.0 / 2.0_f64.sqrt()),
        )?,
        GateKind::S => principal(CMatrix::from_row_slice(
            2,
            2,
            &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)],
        ))?,
        GateKind::T => principal(CMatrix::from_row_slice(
            2,
            2,
            &[cr(1.0), cr(0.0), cr(0.0), c(0.0, PI / 4.0).exp()],
        ))?,
        GateKind::Sx => principal(
            CMatrix::from_row_slice(
                2,
                2,
                &[c(1.0, 1.0), c(1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0)],
            )
            .scale(0.5),
        )?,
        GateKind::Cx => {
            let mut u = CMatrix::identity(4, 4);
            u[(2, 2)] = cr(0.0);
            u[(3, 3)] = cr(0.0);
            u[(2, 3)] = cr(1.0);
            u[(3, 2)] = cr(1.0);
            principal(u)?
        }
        GateKind::Cz => {
            let mut u = CMatrix::identity(4, 4);
            u[(3, 3)] = cr(-1.0);
            principal(u)?
        }
        GateKind::Swap => {
            let mut u = CMatrix::zeros(4, 4);
            u[(0, 0)] = cr(1.0);
            u[(1, 2)] = cr(1.0);
            u[(2, 1)] = cr(1.0);
            u[(3, 3)] = cr(1.0);
            principal(u)?
        }
        GateKind::SqrtIswap => {
            let s = cr(1.0 / 2.0_f64.sqrt());
            let is = c(0.0, 1.0 / 2.0_f64.sqrt());
            let mut u = CMatrix::identity(4, 4);
            u[(1, 1)] = s;
            u[(1, 2)] = is;
            u[(2, 1)] = is;
            u[(2, 2)] = s;
            principal(u)?
        }
    };
    Ok(ResolvedGate {
        name: kind.name().to_string(),
        arity: kind.arity(),
        generator,
        unitary,
    })
}

fn natural(h: CMatrix) -> Result<(CMatrix, CMatrix)> {
    let u = numerics::exp_neg_i(&h, 1.0)?;
    Ok((h, u))
}

fn principal(u: CMatrix) -> Result<(CMatrix, CMatrix)> {
    let h = numerics::principal_log_generator(&u)?;
    Ok((h, u))
}

fn u2_matrix(phi: f64, lambda: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            cr(1.0),
            -c(0.0, lambda).exp(),
            c(0.0, phi).exp(),
            c(0.0, phi + lambda).exp(),
        ],
    )
    .scale(1.0 / 2.0_f64.sqrt())
}

fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            cr(ct),
            -c(0.0, lambda).exp() * st,
            c(0.0, phi).exp() * st,
            c(0.0, phi + lambda).exp() * ct,
        ],
    )
}

/// `Z^{z+a} X^{x} Z^{-a}` with exponent convention `G^t` having eigenvalues
/// `{1, e^{i pi t}}`.
fn phasedxz_matrix(x_exp: f64, z_exp: f64, axis_exp: f64) -> CMatrix {
    let zpow = |t: f64| {
        CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, PI * t).exp()])
    };
    let xpow = |t: f64| {
        let g = c(0.0, PI * t).exp();
        CMatrix::from_row_slice(
            2,
            2,
            &[
                (cr(1.0) + g) * 0.5,
                (cr(1.0) - g) * 0.5,
                (cr(1.0) - g) * 0.5,
                (cr(1.0) + g) * 0.5,
            ],
        )
    };
    zpow(z_exp + axis_exp) * xpow(x_exp) * zpow(-axis_exp)
}

fn fsim_matrix(theta: f64, phi: f64) -> CMatrix {
    let mut u = CMatrix::identity(4, 4);
    u[(1, 1)] = cr(theta.cos());
    u[(1, 2)] = c(0.0, -theta.sin());
    u[(2, 1)] = c(0.0, -theta.sin());
    u[(2, 2)] = cr(theta.cos());
    u[(3, 3)] = c(0.0, -phi).exp();
    u
}

/// Choice of generator norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Spectral norm of the generator as stored.
    Raw,
    /// Minimal norm over global-phase shifts, `(lambda_max - lambda_min)/2`.
    PhaseOptimized,
}

/// Result of minimizing `||H + phi I||` over the global phase `phi`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PhaseOptimizedNorm {
    pub raw_norm: f64,
    pub optimized_norm: f64,
    pub phi_star: f64,
}

/// Minimize `||H + phi I||_2` over `phi`; the optimum centers the spectrum,
/// giving the half-spread `(lambda_max - lambda_min)/2` at
/// `phi* = -(lambda_max + lambda_min)/2`.
pub fn phase_optimize(h: &CMatrix) -> Result<PhaseOptimizedNorm> {
    let es = herm_eigen(h)?;
    let (lo, hi) = (es.min(), es.max());
    Ok(PhaseOptimizedNorm {
        raw_norm: lo.abs().max(hi.abs()),
        optimized_norm: (hi - lo) / 2.0,
        phi_star: -(hi + lo) / 2.0,
    })
}

/// Spectral norm of a gate's generator under the chosen mode, computed on
/// the local support only.
pub fn gate_norm(gate: &ResolvedGate, mode: NormMode) -> f64 {
    match mode {
        NormMode::Raw => spectral_norm(&gate.generator),
        NormMode::PhaseOptimized => phase_optimize(&gate.generator)
            .expect("gate generator is Hermitian")
            .optimized_norm,
    }
}

/// Generator with the phase shift of the chosen mode applied.
pub fn effective_generator(gate: &ResolvedGate, mode: NormMode) -> CMatrix {
    match mode {
        NormMode::Raw => gate.generator.clone(),
        NormMode::PhaseOptimized => {
            let opt = phase_optimize(&gate.generator).expect("gate generator is Hermitian");
            let d = gate.generator.nrows();
            &gate.generator + CMatrix::identity(d, d).scale(opt.phi_star)
        }
    }
}

/// All built-in gate names, for schema docs and fuzzing.
pub const ALL_GATES: &[GateKind] = &[
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::H,
    GateKind::S,
    GateKind::T,
    GateKind::Sx,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Rxy,
    GateKind::U1,
    GateKind::U2,
    GateKind::U3,
    GateKind::PhasedXZ,
    GateKind::Cx,
    GateKind::Cz,
    GateKind::Cp,
    GateKind::Swap,
    GateKind::SqrtIswap,
    GateKind::Fsim,
    GateKind::Rzz,
];
