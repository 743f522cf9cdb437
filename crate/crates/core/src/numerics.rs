//! Dense complex-matrix kernel: Hermitian eigendecomposition, spectral
//! norms, principal matrix logarithm of unitaries, and tensor embedding.
//!
//! Conventions used throughout the crate:
//! * qubit 0 is the leftmost tensor factor, i.e. the most significant bit
//!   of a state index;
//! * matrix-logarithm eigenphases live on the principal branch `(-pi, pi]`;
//! * everything is dense and capped at [`MAX_QUBITS`] qubits.

use nalgebra::{Complex, DMatrix, DVector};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Dense-representation cap; 2^12 = 4096 amplitudes.
pub const MAX_QUBITS: usize = 12;

/// Relative tolerance for Hermiticity / unitarity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Largest entry magnitude, 0 for empty matrices.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry deviation from `A = A^dagger`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(a: &CMatrix) -> bool {
    hermitian_deviation(a) <= HERMITIAN_TOL * 1.0_f64.max(max_abs(a))
}

/// Max-entry deviation from `U^dagger U = I`.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { cr(1.0) } else { cr(0.0) };
            dev = dev.max((g[(i, j)] - want).norm());
        }
    }
    dev
}

pub fn is_unitary(u: &CMatrix) -> bool {
    unitary_deviation(u) <= HERMITIAN_TOL * (u.nrows() as f64).max(1.0)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Real eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn min(&self) -> f64 {
        *self.values.first().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.values.len();
        let mut diag = CMatrix::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            diag[(k, k)] = f(lam);
        }
        &self.vectors * diag * self.vectors.adjoint()
    }

    /// Reconstruct the original matrix.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply(cr)
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn herm_eigen(a: &CMatrix) -> Result<EigenSystem> {
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_TOL * 1.0_f64.max(max_abs(a)) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // Symmetrize to scrub accumulated round-off before factorizing.
    let sym = (a + a.adjoint()).scale(0.5);
    herm_eigen_unchecked(&sym)
}

fn herm_eigen_unchecked(sym: &CMatrix) -> Result<EigenSystem> {
    let es = nalgebra::SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence)?;
    let d = es.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| es.eigenvalues[i].total_cmp(&es.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| es.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &es.eigenvectors.column(i));
    }
    Ok(EigenSystem { values, vectors })
}

/// Largest singular value. Hermitian inputs take the cheaper `max|lambda|`
/// route; anything else (including rectangular blocks) goes through the
/// Gram matrix.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.is_square() && is_hermitian(a) {
        let es = herm_eigen(a).expect("hermitian eigen");
        return es.values.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.adjoint()
    } else {
        a.adjoint() * a
    };
    let sym = (&gram + gram.adjoint()).scale(0.5);
    let es = herm_eigen_unchecked(&sym).expect("gram eigen");
    es.max().max(0.0).sqrt()
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn exp_neg_i(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let es = herm_eigen(h)?;
    Ok(es.apply(|lam| c(0.0, -t * lam).exp()))
}

/// Hermitian generator `H` with `exp(-iH) = U` and eigenphases in
/// `(-pi, pi]`.
///
/// `U` is normal, so its Hermitian and anti-Hermitian parts commute and can
/// be diagonalized simultaneously: first diagonalize `(U + U^dagger)/2`,
/// then split degenerate eigenspaces with the anti-Hermitian part.
pub fn principal_log_generator(u: &CMatrix) -> Result<CMatrix> {
    let dev = unitary_deviation(u);
    if dev > HERMITIAN_TOL * (u.nrows() as f64).max(1.0) {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let d = u.nrows();
    let p = (u + u.adjoint()).scale(0.5);
    let q_raw = (u - u.adjoint()).scale(0.5) * c(0.0, -1.0);
    let q = (&q_raw + q_raw.adjoint()).scale(0.5);

    let es = herm_eigen_unchecked(&p)?;
    let mut vectors = es.vectors;

    // Resolve cos-degenerate pairs (phi and -phi) inside each eigenspace of
    // the cosine part using the sine part.
    let group_tol = 1e-8;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (es.values[end] - es.values[end - 1]).abs() <= group_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).clone_owned();
            let qs = block.adjoint() * &q * &block;
            let qs = (&qs + qs.adjoint()).scale(0.5);
            let sub = herm_eigen_unchecked(&qs)?;
            let rotated = block * sub.vectors;
            for (k, col) in rotated.column_iter().enumerate() {
                vectors.set_column(start + k, &col);
            }
        }
        start = end;
    }

    let mut h = CMatrix::zeros(d, d);
    let mut phases = DVector::<f64>::zeros(d);
    for k in 0..d {
        let v = vectors.column(k);
        let cos_part = (v.adjoint() * &p * v)[(0, 0)].re;
        let sin_part = (v.adjoint() * &q * v)[(0, 0)].re;
        // U v = e^{i phi} v, so the generator eigenvalue is -phi.
        let mut phase = -sin_part.atan2(cos_part);
        if phase <= -std::f64::consts::PI {
            phase += 2.0 * std::f64::consts::PI;
        }
        phases[k] = phase;
    }
    for k in 0..d {
        let v = vectors.column(k).clone_owned();
        h += (&v * v.adjoint()).scale(phases[k]);
    }
    Ok((&h + h.adjoint()).scale(0.5))
}

/// Lift a `2^k`-dimensional operator acting on `support` to the full
/// `2^n`-dimensional space, identity everywhere else.
pub fn embed(local: &CMatrix, support: &[usize], n: usize) -> Result<CMatrix> {
    if n > MAX_QUBITS {
        return Err(Error::TooLarge {
            n_qubits: n,
            max: MAX_QUBITS,
        });
    }
    let k = support.len();
    let local_dim = 1usize << k;
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::DimensionMismatch(format!(
            "local operator is {}x{}, support of {} qubit(s) needs {}x{}",
            local.nrows(),
            local.ncols(),
            k,
            local_dim,
            local_dim
        )));
    }
    for (i, &q) in support.iter().enumerate() {
        if q >= n {
            return Err(Error::DimensionMismatch(format!(
                "support qubit {q} outside [0, {n})"
            )));
        }
        if support[..i].contains(&q) {
            return Err(Error::DimensionMismatch(format!(
                "duplicate support qubit {q}"
            )));
        }
    }

    let dim = 1usize << n;
    let bit = |q: usize| n - 1 - q; // qubit 0 = most significant bit
    let support_mask: usize = support.iter().map(|&q| 1usize << bit(q)).sum();
    let scatter = |local_idx: usize| -> usize {
        let mut out = 0usize;
        for (j, &q) in support.iter().enumerate() {
            if local_idx >> (k - 1 - j) & 1 == 1 {
                out |= 1 << bit(q);
            }
        }
        out
    };

    let mut full = CMatrix::zeros(dim, dim);
    for rest in 0..dim {
        if rest & support_mask != 0 {
            continue;
        }
        for lr in 0..local_dim {
            let row = rest | scatter(lr);
            for lc in 0..local_dim {
                full[(row, rest | scatter(lc))] = local[(lr, lc)];
            }
        }
    }
    Ok(full)
}

/// `|tr(U^dagger V)| / d` deviation from a pure global phase.
pub fn phase_distance(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            u.nrows(),
            u.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let tr: C64 = (u.adjoint() * v).trace();
    Ok(1.0 - tr.norm() / u.nrows() as f64)
}
