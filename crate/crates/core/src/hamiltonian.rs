//! Symbolic operator sums over Pauli strings tensored with cavity operators, and
//! the average-Hamiltonian machinery built on them.
//!
//! Cavity factors span the Lie algebra of `x = b + b†`, `p = i(b† − b)` and
//! `n = b†b`: `[x, p] = 2i`, `[n, x] = −i p`, `[n, p] = i x`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{annihilation, kron, pauli_matrix, CMatrix};
use crate::lattice::StabilizerSet;
use crate::pauli::PauliString;
use crate::sequences::{PulseSchedule, SYMMETRIC_ORDER};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CavityFactor {
    Identity,
    Position,
    Momentum,
    Number,
}

impl CavityFactor {
    pub fn matrix(self, n_fock: usize) -> CMatrix {
        let b = annihilation(n_fock);
        let bd = b.adjoint();
        match self {
            Self::Identity => CMatrix::identity(n_fock, n_fock),
            Self::Position => &b + &bd,
            Self::Momentum => (&bd - &b) * Complex64::i(),
            Self::Number => &bd * &b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Self::Identity => "1",
            Self::Position => "x",
            Self::Momentum => "p",
            Self::Number => "n",
        }
    }

    /// `[a, b]` as a list of (coefficient, factor).
    fn bracket(a: Self, b: Self) -> Option<(Complex64, Self)> {
        use CavityFactor::*;
        let i = Complex64::i();
        match (a, b) {
            (Position, Momentum) => Some((2.0 * i, Identity)),
            (Momentum, Position) => Some((-2.0 * i, Identity)),
            (Number, Position) => Some((-i, Momentum)),
            (Position, Number) => Some((i, Momentum)),
            (Number, Momentum) => Some((i, Position)),
            (Momentum, Number) => Some((-i, Position)),
            _ => None,
        }
    }
}

fn i_pow(k: u8) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()]
        [(k % 4) as usize]
}

/// Canonical sum `Σ c · P ⊗ f` keyed by the unsigned Pauli string and cavity factor.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    n: usize,
    terms: BTreeMap<(PauliString, CavityFactor), Complex64>,
}

#[derive(Serialize)]
pub struct TermRecord {
    pub pauli: String,
    pub cavity: CavityFactor,
    pub re: f64,
    pub im: f64,
}

impl OperatorSum {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, coeff: impl Into<Complex64>, p: &PauliString, f: CavityFactor) {
        assert_eq!(p.n_qubits(), self.n, "term size mismatch");
        let c = coeff.into() * i_pow(p.phase());
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let key = (p.unsigned(), f);
        let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(p.unsigned(), f));
        }
    }

    pub fn with_term(mut self, coeff: impl Into<Complex64>, p: &PauliString, f: CavityFactor) -> Self {
        self.add_term(coeff, p, f);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, CavityFactor, Complex64)> {
        self.terms.iter().map(|((p, f), c)| (p, *f, *c))
    }

    pub fn coefficient(&self, p: &PauliString, f: CavityFactor) -> Complex64 {
        let c = self.terms.get(&(p.unsigned(), f)).copied().unwrap_or_default();
        c * i_pow(p.phase()).conj()
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut out = Self::zero(self.n);
        for (p, f, c) in self.terms() {
            out.add_term(c * s, p, f);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, f, c) in other.terms() {
            out.add_term(c, p, f);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Drops terms with `|c| ≤ eps`.
    pub fn prune(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > eps);
        out
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sub(other).max_abs_coefficient() <= tol
    }

    /// All keys are Hermitian, so the sum is Hermitian iff every coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Product, defined when every pair of terms has at most one non-identity cavity factor.
    pub fn product(&self, other: &Self) -> Result<Self, Error> {
        let mut out = Self::zero(self.n);
        for (p, f, a) in self.terms() {
            for (q, g, b) in other.terms() {
                let h = match (f, g) {
                    (CavityFactor::Identity, h) | (h, CavityFactor::Identity) => h,
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "product of cavity factors {} and {}",
                            f.symbol(),
                            g.symbol()
                        )))
                    }
                };
                out.add_term(a * b, &p.mul_unchecked(q), h);
            }
        }
        Ok(out)
    }

    /// `[self, other]`, closed whenever anticommuting Pauli parts meet an identity cavity factor.
    pub fn commutator(&self, other: &Self) -> Result<Self, Error> {
        let mut out = Self::zero(self.n);
        for (p, f, a) in self.terms() {
            for (q, g, b) in other.terms() {
                let pq = p.mul_unchecked(q);
                if p.commutes_unchecked(q) {
                    if let Some((c, h)) = CavityFactor::bracket(f, g) {
                        out.add_term(a * b * c, &pq, h);
                    }
                } else {
                    let h = match (f, g) {
                        (CavityFactor::Identity, h) | (h, CavityFactor::Identity) => h,
                        _ => {
                            return Err(Error::Unsupported(format!(
                                "commutator of anticommuting strings with cavity factors {} and {}",
                                f.symbol(),
                                g.symbol()
                            )))
                        }
                    };
                    out.add_term(a * b * 2.0, &pq, h);
                }
            }
        }
        Ok(out)
    }

    /// Applies a map to every Pauli part, keeping cavity factors.
    pub fn map_paulis(
        &self,
        mut f: impl FnMut(&PauliString) -> Result<PauliString, Error>,
    ) -> Result<Self, Error> {
        let mut out = Self::zero(self.n);
        for (p, g, c) in self.terms() {
            out.add_term(c, &f(p)?, g);
        }
        Ok(out)
    }

    /// Coefficient of the identity term, `Tr_QB(·)/2^N` of the purely qubit part.
    pub fn qubit_trace(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n), CavityFactor::Identity)
    }

    pub fn records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|(p, f, c)| TermRecord { pauli: p.to_string(), cavity: f, re: c.re, im: c.im })
            .collect()
    }
}

/// Default cap on dense dimensions, `2^16`.
pub const DENSE_CAP: usize = 1 << 16;

pub fn dense_matrix(op: &OperatorSum, n_fock: usize, cap: usize) -> Result<CMatrix, Error> {
    let dim = (1usize << op.n_qubits()) * n_fock;
    if dim > cap {
        return Err(Error::DenseCap { dim, cap });
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (p, f, c) in op.terms() {
        m += kron(&f.matrix(n_fock), &pauli_matrix(p)) * c;
    }
    Ok(m)
}

/// `H₀ = −4(Δ + δ x) Σ σz + ω₀ n`.
pub fn free_hamiltonian(n: usize, delta_gap: f64, delta: f64, omega0: f64) -> Result<OperatorSum, Error> {
    if delta_gap <= 0.0 || omega0 <= 0.0 {
        return Err(Error::InvalidParameter("Δ and ω₀ must be positive".into()));
    }
    let mut h = OperatorSum::zero(n);
    for q in 0..n {
        let z = PauliString::single(n, q, crate::pauli::Axis::Z);
        h.add_term(-4.0 * delta_gap, &z, CavityFactor::Identity);
        h.add_term(-4.0 * delta, &z, CavityFactor::Position);
    }
    h.add_term(omega0, &PauliString::identity(n), CavityFactor::Number);
    Ok(h)
}

/// `Q_k = −Δ Σ_{a ∈ quarter k} W_a`.
pub fn quarter_operator(stabs: &StabilizerSet, n: usize, quarter: usize, delta_gap: f64) -> OperatorSum {
    let mut q = OperatorSum::zero(n);
    for s in stabs.quarter(quarter) {
        q.add_term(-delta_gap, &s.op, CavityFactor::Identity);
    }
    q
}

pub fn quarter_operators(stabs: &StabilizerSet, n: usize, delta_gap: f64) -> [OperatorSum; 4] {
    std::array::from_fn(|k| quarter_operator(stabs, n, k, delta_gap))
}

/// `H_PC = −Δ Σ_a W_a`.
pub fn code_hamiltonian(stabs: &StabilizerSet, n: usize, delta_gap: f64) -> OperatorSum {
    (0..4).fold(OperatorSum::zero(n), |acc, k| acc.add(&quarter_operator(stabs, n, k, delta_gap)))
}

fn with_coupling(q: &OperatorSum, delta: f64, delta_gap: f64) -> OperatorSum {
    let mut out = q.clone();
    for (p, _, c) in q.terms() {
        out.add_term(c * (delta / delta_gap), p, CavityFactor::Position);
    }
    out
}

fn number_term(n: usize, omega0: f64) -> OperatorSum {
    OperatorSum::zero(n).with_term(omega0, &PauliString::identity(n), CavityFactor::Number)
}

/// `[1 + δ/Δ x] H_PC + ω₀ n`.
pub fn zeroth_order_closed_form(
    stabs: &StabilizerSet,
    n: usize,
    delta_gap: f64,
    delta: f64,
    omega0: f64,
) -> OperatorSum {
    with_coupling(&code_hamiltonian(stabs, n, delta_gap), delta, delta_gap).add(&number_term(n, omega0))
}

/// Average over one single-quarter sub-sequence: `4[1 + δ/Δ x] Q_k + ω₀ n`.
pub fn quarter_block(q: &OperatorSum, delta_gap: f64, delta: f64, omega0: f64) -> OperatorSum {
    with_coupling(q, delta, delta_gap).scale(4.0).add(&number_term(q.n_qubits(), omega0))
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub hamiltonian: OperatorSum,
    pub duration: f64,
}

/// Toggling-frame Hamiltonians `H_j = R̂_j† H₀ R̂_j` for every free segment.
#[derive(Clone, Debug)]
pub struct TogglingFrameProgram {
    pub frames: Vec<Frame>,
}

impl TogglingFrameProgram {
    pub fn new(schedule: &PulseSchedule, h0: &OperatorSum) -> Result<Self, Error> {
        let mut frames = Vec::new();
        for (j, seg) in schedule.segments.iter().enumerate() {
            if seg.wait > 0.0 {
                let h = h0.map_paulis(|p| schedule.frame_image(p, j))?;
                frames.push(Frame { hamiltonian: h, duration: seg.wait });
            }
        }
        Ok(Self { frames })
    }
}

/// `(1/T) Σ H_j t_j`.
pub fn zeroth_order_average(program: &TogglingFrameProgram) -> Result<OperatorSum, Error> {
    let total: f64 = program.frames.iter().map(|f| f.duration).sum();
    let first = program.frames.first().ok_or_else(|| Error::InvalidParameter("empty program".into()))?;
    let mut out = OperatorSum::zero(first.hamiltonian.n_qubits());
    for f in &program.frames {
        out = out.add(&f.hamiltonian.scale(f.duration / total));
    }
    Ok(out)
}

/// Third-order Magnus term of piecewise-constant `H_1 … H_m`, each for time `tau`,
/// as a correction to the average Hamiltonian (`U = exp(−i m τ H_av)`).
pub fn magnus_third_order(blocks: &[OperatorSum], tau: f64) -> Result<OperatorSum, Error> {
    let m = blocks.len();
    let n = blocks.first().map_or(0, OperatorSum::n_qubits);
    let mut inner: BTreeMap<(usize, usize), OperatorSum> = BTreeMap::new();
    for k in 0..m {
        for j in 0..k {
            inner.insert((k, j), blocks[k].commutator(&blocks[j])?);
        }
    }
    let mut tot = OperatorSum::zero(n);
    for l in 0..m {
        for k in 0..=l {
            for j in 0..=k {
                if l == j {
                    continue;
                }
                let w = if l > k && k > j { tau.powi(3) } else { tau.powi(3) / 2.0 };
                // [H_l,[H_k,H_j]] + [H_j,[H_k,H_l]] with [H_k,H_l] = −[H_l,H_k].
                let kj = if k > j { inner[&(k, j)].clone() } else { OperatorSum::zero(n) };
                let kl = if l > k { inner[&(l, k)].scale(-1.0) } else { OperatorSum::zero(n) };
                let term = blocks[l].commutator(&kj)?.add(&blocks[j].commutator(&kl)?);
                tot = tot.add(&term.scale(w));
            }
        }
    }
    Ok(tot.scale(-1.0 / (6.0 * m as f64 * tau)))
}

/// Leading correction `H_av^(2)` of the symmetric sequence from the four quarter blocks.
///
/// The blocks are applied in the order Q1 Q2 Q3 Q4 Q4 Q3 Q2 Q1, each for `T/4`.
pub fn second_order_magnus(blocks: &[OperatorSum], t: f64) -> Result<OperatorSum, Error> {
    if blocks.len() != 4 {
        return Err(Error::InvalidParameter(format!("expected 4 quarter blocks, got {}", blocks.len())));
    }
    let seq: Vec<OperatorSum> = SYMMETRIC_ORDER.iter().map(|&k| blocks[k].clone()).collect();
    Ok(magnus_third_order(&seq, t / 4.0)?.prune(1e-15))
}

/// Bilinear coefficients of `Q_k Q_l` in `H_av^(2)`, in units of `δ/(3Δ)`.
pub const M_MATRIX: [[f64; 4]; 4] =
    [[-6.0, -5.0, -5.0, -5.0], [-5.0, 0.0, 1.0, 1.0], [-5.0, 1.0, 6.0, 7.0], [-5.0, 1.0, 7.0, 12.0]];

/// Coefficients of `Q_k (b + b†)` in `H_av^(2)`, in units of `ω₀/4`, as printed.
pub const V_PRINTED: [f64; 4] = [7.0, 1.0, -3.0, -5.0];

/// Cavity-averaged `H_av^(2)`, in units of `δ²ω₀T²/(48Δ²)`.
pub const A_MATRIX: [[f64; 4]; 4] = [
    [9.0, -7.0, -19.0, -25.0],
    [11.0, 3.0, -7.0, -13.0],
    [11.0, 5.0, 3.0, -1.0],
    [11.0, 5.0, 5.0, 9.0],
];

fn bilinear(q: &[OperatorSum; 4], m: &[[f64; 4]; 4], scale: f64) -> Result<OperatorSum, Error> {
    let mut out = OperatorSum::zero(q[0].n_qubits());
    for k in 0..4 {
        for l in 0..4 {
            if m[k][l] != 0.0 {
                out = out.add(&q[k].product(&q[l])?.scale(m[k][l] * scale));
            }
        }
    }
    Ok(out)
}

/// `H_av^(2) = (ω₀T²δ/8Δ) [Σ M_kl Q_k Q_l − Σ V_k Q_k (b + b†)]`.
///
/// The linear cavity term enters with the sign opposite to `V_PRINTED`; that is the
/// sign produced by the Magnus expansion of the quarter blocks.
pub fn second_order_closed_form(
    q: &[OperatorSum; 4],
    t: f64,
    delta: f64,
    omega0: f64,
    delta_gap: f64,
) -> Result<OperatorSum, Error> {
    let pre = omega0 * t * t * delta / (8.0 * delta_gap);
    let mut out = bilinear(q, &M_MATRIX, pre * delta / (3.0 * delta_gap))?;
    for k in 0..4 {
        for (p, _, c) in q[k].terms() {
            out.add_term(c * (-pre * V_PRINTED[k] * omega0 / 4.0), p, CavityFactor::Position);
        }
    }
    Ok(out)
}

/// Cavity-period average `A` of `H_av^(2)` in the interaction picture of `H_av^(0)`.
pub fn time_averaged_a(
    q: &[OperatorSum; 4],
    t: f64,
    delta: f64,
    omega0: f64,
    delta_gap: f64,
) -> Result<OperatorSum, Error> {
    bilinear(q, &A_MATRIX, delta * delta * omega0 * t * t / (48.0 * delta_gap * delta_gap))
}

/// `H = −Δ Σ W_a − (δ²/ω₀) Σ_{a≠a'} W_a W_a'`.
pub fn schrieffer_wolff_effective(
    stabs: &StabilizerSet,
    n: usize,
    delta_gap: f64,
    delta: f64,
    omega0: f64,
) -> OperatorSum {
    let mut h = code_hamiltonian(stabs, n, delta_gap);
    let ops = stabs.operators();
    for (a, wa) in ops.iter().enumerate() {
        for (b, wb) in ops.iter().enumerate() {
            if a != b {
                h.add_term(-delta * delta / omega0, &wa.mul_unchecked(wb), CavityFactor::Identity);
            }
        }
    }
    h
}

/// Returns true when `δ ≪ ω₀, Δ` holds to the given ratio; used as a warning channel.
pub fn schrieffer_wolff_regime_ok(delta_gap: f64, delta: f64, omega0: f64, ratio: f64) -> bool {
    delta <= ratio * omega0 && delta <= ratio * delta_gap
}
