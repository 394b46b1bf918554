//! Small dense helpers on [`CMatrix`].

use crate::{CMatrix, Complex64, Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b` (first factor most significant).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list, left to right.
pub fn kron_all(ops: &[CMatrix]) -> CMatrix {
    let mut it = ops.iter();
    let first = it.next().cloned().unwrap_or_else(|| CMatrix::identity(1, 1));
    it.fold(first, |acc, m| acc.kronecker(m))
}

/// Matrix unit `|i⟩⟨j|` of size `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Shape("hermitian_fn needs a square matrix".into()));
    }
    let eig = m.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, &lam) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(c).scale_mut(f(lam));
    }
    Ok(&scaled * v.adjoint())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Checks that `rho` is a density matrix within `tol`.
pub fn check_density(rho: &CMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::Shape("density matrix must be square".into()));
    }
    if hermiticity_error(rho) > tol {
        return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
    }
    if (rho.trace().re - 1.0).abs() > tol {
        return Err(Error::InvalidArgument("density matrix must have unit trace".into()));
    }
    if hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0) < -tol {
        return Err(Error::InvalidArgument("density matrix is not positive".into()));
    }
    Ok(())
}

/// `tr_B` of an operator on `C^{dA} ⊗ C^{dB}`.
pub fn partial_trace_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..db {
                s += m[(i * db + b, j * db + b)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// `tr_A` of an operator on `C^{dA} ⊗ C^{dB}`.
pub fn partial_trace_a(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(db, db);
    for i in 0..db {
        for j in 0..db {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..da {
                s += m[(a * db + i, a * db + j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Projector `|ψ⟩⟨ψ|` from a (not necessarily normalized) vector.
pub fn projector(psi: &[Complex64]) -> CMatrix {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let v = nalgebra::DVector::from_column_slice(psi) / Complex64::new(norm.sqrt(), 0.0);
    &v * v.adjoint()
}

/// Purity `tr(ρ²)`.
pub fn purity(rho: &CMatrix) -> f64 {
    (rho * rho).trace().re
}

/// Diagonal matrix `e^{−iEt}` for a list of energies.
pub fn evolution_diag(energies: &[f64], t: f64) -> CMatrix {
    let d = energies.len();
    let mut u = CMatrix::zeros(d, d);
    for (k, &e) in energies.iter().enumerate() {
        u[(k, k)] = Complex64::from_polar(1.0, -e * t);
    }
    u
}
