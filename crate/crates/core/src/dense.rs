//! Dense matrices for small systems, used as oracles and for exact diagonalization.
//!
//! Basis index `f · 2^N + q`: qubit `j` is bit `j` of `q`, Fock level `f` is the slow index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::pauli::{CliffordPulse, PauliString};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn i_pow(k: u32) -> Complex64 {
    [Complex64::new(1.0, 0.0), I, Complex64::new(-1.0, 0.0), -I][(k % 4) as usize]
}

/// Action of a Pauli string on a computational basis state: `P|q⟩ = c |q ⊕ x⟩`.
pub fn pauli_action(x: u64, z: u64, phase: u8, q: u64) -> (u64, Complex64) {
    let k = phase as u32 + (x & z).count_ones() + 2 * (z & q).count_ones();
    (q ^ x, i_pow(k))
}

pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    let n = p.n_qubits();
    assert!(n <= 14, "dense Pauli matrix limited to 14 qubits");
    let (x, z) = p.masks();
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for q in 0..d as u64 {
        let (r, c) = pauli_action(x, z, p.phase(), q);
        m[(r as usize, q as usize)] = c;
    }
    m
}

pub fn annihilation(n_fock: usize) -> CMatrix {
    let mut b = CMatrix::zeros(n_fock, n_fock);
    for k in 1..n_fock {
        b[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    b
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues unsorted.
///
/// The result is checked against `H V = V Λ`; on failure a cyclic Jacobi sweep
/// is used instead.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let scale = 1.0 + h.norm();
    if let Some(e) = h.clone().try_symmetric_eigen(1e-15, 100_000) {
        let vals: Vec<f64> = e.eigenvalues.iter().copied().collect();
        if residual(h, &vals, &e.eigenvectors) <= 1e-10 * scale {
            return (vals, e.eigenvectors);
        }
    }
    jacobi_eigen(h)
}

fn residual(h: &CMatrix, vals: &[f64], v: &CMatrix) -> f64 {
    let mut lam = v.clone();
    for (k, &e) in vals.iter().enumerate() {
        lam.column_mut(k).scale_mut(e);
    }
    (h * v - lam).norm()
}

fn jacobi_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n, n);
    let tol = 1e-15 * (1.0 + h.norm());
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                // Unitary rotation in the (p, q) plane zeroing a[p][q].
                let phase = apq / apq.norm();
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let sp = phase * s;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * sp.conj();
                    a[(k, q)] = akp * sp + akq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * sp.conj() + aqk * c;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// `exp(-i t H)` for Hermitian `H` by eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, v) = hermitian_eigen(h);
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&e| Complex64::from_polar(1.0, -e * t)));
    &v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

pub fn eigenvalues_hermitian(h: &CMatrix) -> Vec<f64> {
    let mut e = hermitian_eigen(h).0;
    e.sort_by(f64::total_cmp);
    e
}

/// `exp(i (θ₀ + δθ) S / 2)` on the qubit space for each elementary target, multiplied together.
pub fn pulse_unitary(pulse: &CliffordPulse, n: usize, dtheta: &[f64]) -> CMatrix {
    let d = 1usize << n;
    let mut u = CMatrix::identity(d, d);
    for (k, s) in pulse.generators(n).iter().enumerate() {
        let th = pulse.angle() + dtheta.get(k).copied().unwrap_or(0.0);
        let g = CMatrix::identity(d, d) * Complex64::new((th / 2.0).cos(), 0.0)
            + pauli_matrix(s) * (I * (th / 2.0).sin());
        u = g * u;
    }
    u
}
