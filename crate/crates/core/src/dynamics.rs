//! State-vector dynamics of qubits ⊗ truncated cavity: pulses with angle errors,
//! free evolution, Chebyshev propagation and fidelity estimators.
//!
//! Amplitude index `f · 2^N + q`: qubit bits are the low bits, Fock level the slow index.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::dense::{expm_hermitian, pauli_action, CMatrix};
use crate::hamiltonian::{CavityFactor, OperatorSum};
use crate::lattice::{Geometry, StabilizerKind, StabilizerSet};
use crate::pauli::{Axis, CliffordPulse, PauliString};
use crate::sequences::{Operation, PrepStep, PulseSchedule};
use crate::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub n_fock: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn dim(n_qubits: usize, n_fock: usize) -> usize {
        (1usize << n_qubits) * n_fock
    }

    pub fn basis(n_qubits: usize, n_fock: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; Self::dim(n_qubits, n_fock)];
        amps[index] = ONE;
        Self { n_qubits, n_fock, amps }
    }

    /// `|0,…,0⟩ ⊗ |0⟩`.
    pub fn ground(n_qubits: usize, n_fock: usize) -> Self {
        Self::basis(n_qubits, n_fock, 0)
    }

    /// Unnormalized vector of unit-modulus random phases (a Hutchinson probe).
    pub fn random_phase(n_qubits: usize, n_fock: usize, rng: &mut impl Rng) -> Self {
        let amps = (0..Self::dim(n_qubits, n_fock))
            .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU))
            .collect();
        Self { n_qubits, n_fock, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    /// `⟨ψ| P ⊗ 1 |ψ⟩` for a qubit Pauli string.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let (x, z) = p.masks();
        let nq = 1usize << self.n_qubits;
        let mut s = ZERO;
        for (k, a) in self.amps.iter().enumerate() {
            let (q, f) = (k % nq, k / nq);
            let (r, c) = pauli_action(x, z, p.phase(), q as u64);
            s += self.amps[f * nq + r as usize].conj() * c * a;
        }
        s.re
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        let (x, z) = p.masks();
        let nq = 1usize << self.n_qubits;
        let mut out = vec![ZERO; self.amps.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let (q, f) = (k % nq, k / nq);
            let (r, c) = pauli_action(x, z, p.phase(), q as u64);
            out[f * nq + r as usize] = c * a;
        }
        self.amps = out;
    }
}

/// `exp(i θ σ_axis / 2)` on one qubit.
pub fn apply_rotation(state: &mut StateVector, axis: Axis, theta: f64, q: usize) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let bit = 1usize << q;
    let amps = &mut state.amps;
    match axis {
        Axis::Z => {
            let (p0, p1) = (Complex64::new(c, s), Complex64::new(c, -s));
            for (k, a) in amps.iter_mut().enumerate() {
                *a *= if k & bit == 0 { p0 } else { p1 };
            }
        }
        Axis::X => {
            let is = Complex64::new(0.0, s);
            for k0 in (0..amps.len()).filter(|k| k & bit == 0) {
                let (a, b) = (amps[k0], amps[k0 | bit]);
                amps[k0] = a * c + b * is;
                amps[k0 | bit] = a * is + b * c;
            }
        }
        Axis::Y => {
            for k0 in (0..amps.len()).filter(|k| k & bit == 0) {
                let (a, b) = (amps[k0], amps[k0 | bit]);
                amps[k0] = a * c + b * s;
                amps[k0 | bit] = b * c - a * s;
            }
        }
    }
}

/// `exp(i θ σz σz / 2)` on a qubit pair.
pub fn apply_zz(state: &mut StateVector, theta: f64, a: usize, b: usize) {
    let (p, m) = (Complex64::from_polar(1.0, theta / 2.0), Complex64::from_polar(1.0, -theta / 2.0));
    let (ba, bb) = (1usize << a, 1usize << b);
    for (k, v) in state.amps.iter_mut().enumerate() {
        *v *= if ((k & ba == 0) as u8 ^ (k & bb == 0) as u8) == 0 { p } else { m };
    }
}

/// Gaussian angle errors, one independent draw per elementary target.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PulseErrorModel {
    pub sigma_theta: f64,
    pub seed: u64,
}

impl PulseErrorModel {
    pub fn perfect() -> Self {
        Self { sigma_theta: 0.0, seed: 0 }
    }

    /// Independent stream for sample `index`.
    pub fn stream(&self, index: u64) -> ErrorStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        ErrorStream { sigma: self.sigma_theta, rng, normal: Normal::new(0.0, 1.0).unwrap() }
    }
}

pub struct ErrorStream {
    sigma: f64,
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl ErrorStream {
    pub fn next_error(&mut self) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            self.sigma * self.normal.sample(&mut self.rng)
        }
    }
}

/// Applies `exp(i (θ₀ + δθ_k) S_k / 2)` for every elementary target `k`.
pub fn apply_pulse(state: &mut StateVector, pulse: &CliffordPulse, dtheta: &[f64]) {
    let th0 = pulse.angle();
    match pulse {
        CliffordPulse::Rotation { axis, qubits, .. } => {
            for (k, &q) in qubits.iter().enumerate() {
                apply_rotation(state, *axis, th0 + dtheta.get(k).copied().unwrap_or(0.0), q);
            }
        }
        CliffordPulse::PhaseGate { pairs, .. } => {
            for (k, &(a, b)) in pairs.iter().enumerate() {
                apply_zz(state, th0 + dtheta.get(k).copied().unwrap_or(0.0), a, b);
            }
        }
    }
}

/// Applies a composite operation to a state: its last layer acts first.
pub fn apply_operation(state: &mut StateVector, op: &Operation, errors: &mut ErrorStream) {
    let mut buf = Vec::new();
    for layer in op.layers.iter().rev() {
        for pulse in layer {
            buf.clear();
            buf.extend((0..pulse.n_elementary()).map(|_| errors.next_error()));
            apply_pulse(state, pulse, &buf);
        }
    }
}

/// Exact free evolution under `H₀ = −4(Δ + δ x) Σ σz + ω₀ n`.
///
/// `H₀` is block diagonal in the qubit basis; each block depends only on the
/// number of excited qubits and is exponentiated exactly.
pub struct FreePropagator {
    pub n_qubits: usize,
    pub n_fock: usize,
    pub delta_gap: f64,
    pub delta: f64,
    pub omega0: f64,
    cache: HashMap<u64, Vec<CMatrix>>,
}

impl FreePropagator {
    pub fn new(n_qubits: usize, n_fock: usize, delta_gap: f64, delta: f64, omega0: f64) -> Self {
        Self { n_qubits, n_fock, delta_gap, delta, omega0, cache: HashMap::new() }
    }

    fn blocks(&mut self, t: f64) -> &Vec<CMatrix> {
        let (n, nf) = (self.n_qubits, self.n_fock);
        let (dg, d, w) = (self.delta_gap, self.delta, self.omega0);
        self.cache.entry(t.to_bits()).or_insert_with(|| {
            let x = CavityFactor::Position.matrix(nf);
            let num = CavityFactor::Number.matrix(nf);
            (0..=n)
                .map(|ones| {
                    let m = (n as f64) - 2.0 * ones as f64;
                    let h = CMatrix::identity(nf, nf) * Complex64::new(-4.0 * dg * m, 0.0)
                        + &x * Complex64::new(-4.0 * d * m, 0.0)
                        + &num * Complex64::new(w, 0.0);
                    expm_hermitian(&h, t)
                })
                .collect()
        })
    }

    pub fn evolve(&mut self, state: &mut StateVector, t: f64) {
        if t == 0.0 {
            return;
        }
        let nq = 1usize << self.n_qubits;
        let nf = self.n_fock;
        let blocks = self.blocks(t).clone();
        let mut col = vec![ZERO; nf];
        for q in 0..nq {
            let u = &blocks[q.count_ones() as usize];
            for f in 0..nf {
                col[f] = state.amps[f * nq + q];
            }
            for g in 0..nf {
                state.amps[g * nq + q] = (0..nf).map(|f| u[(g, f)] * col[f]).sum();
            }
        }
    }
}

/// Applies a schedule period by period, cycling through its segments.
pub struct ScheduleRunner<'a> {
    schedule: &'a PulseSchedule,
    ends: Vec<usize>,
    cursor: usize,
}

impl<'a> ScheduleRunner<'a> {
    pub fn new(schedule: &'a PulseSchedule) -> Self {
        let t = schedule.period;
        let mut ends = Vec::new();
        let mut acc = 0.0;
        let segs = &schedule.segments;
        for (i, s) in segs.iter().enumerate() {
            acc += s.wait;
            let k = (acc / t).round();
            let at_boundary = k >= 1.0 && (acc - k * t).abs() <= 1e-9 * t;
            let next_waits = segs.get(i + 1).is_none_or(|n| n.wait > 0.0);
            if at_boundary && next_waits && ends.len() < k as usize {
                ends.push(i);
            }
        }
        Self { schedule, ends, cursor: 0 }
    }

    pub fn periods_per_cycle(&self) -> usize {
        self.ends.len()
    }

    /// Runs `periods` periods of the schedule.
    pub fn run(&mut self, state: &mut StateVector, periods: usize, free: &mut FreePropagator, err: &mut ErrorStream) {
        let n = self.ends.len();
        for _ in 0..periods {
            let start = if self.cursor == 0 { 0 } else { self.ends[self.cursor - 1] + 1 };
            for seg in &self.schedule.segments[start..=self.ends[self.cursor]] {
                apply_operation(state, &seg.operation, err);
                free.evolve(state, seg.wait);
            }
            self.cursor = (self.cursor + 1) % n;
        }
    }
}

/// `periods` repetitions of a whole schedule, each pulse drawing a fresh error.
pub fn run_schedule(
    state: &mut StateVector,
    schedule: &PulseSchedule,
    periods: usize,
    free: &mut FreePropagator,
    err: &mut ErrorStream,
) {
    for _ in 0..periods {
        for seg in &schedule.segments {
            apply_operation(state, &seg.operation, err);
            free.evolve(state, seg.wait);
        }
    }
}

/// An operator sum grouped by Pauli part, ready for repeated application.
pub struct CompiledHamiltonian {
    n_qubits: usize,
    n_fock: usize,
    groups: Vec<(u64, u64, Complex64, CMatrix)>,
    bound: f64,
}

impl CompiledHamiltonian {
    pub fn new(h: &OperatorSum, n_fock: usize) -> Self {
        let n = h.n_qubits();
        let mut map: HashMap<(u64, u64), CMatrix> = HashMap::new();
        for (p, f, c) in h.terms() {
            let e = map.entry(p.masks()).or_insert_with(|| CMatrix::zeros(n_fock, n_fock));
            *e += f.matrix(n_fock) * c;
        }
        let mut groups: Vec<_> = map
            .into_iter()
            .map(|((x, z), m)| {
                let ph = [ONE, Complex64::i(), -ONE, -Complex64::i()][((x & z).count_ones() % 4) as usize];
                (x, z, ph, m)
            })
            .collect();
        groups.sort_by_key(|g| (g.0, g.1));
        let bound = groups
            .iter()
            .map(|g| (0..n_fock).map(|r| g.3.row(r).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max))
            .sum();
        Self { n_qubits: n, n_fock, groups, bound }
    }

    /// Upper bound on the spectral radius (sum of induced ∞-norms).
    pub fn spectral_bound(&self) -> f64 {
        self.bound
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let nq = 1usize << self.n_qubits;
        let nf = self.n_fock;
        out.iter_mut().for_each(|o| *o = ZERO);
        for (x, z, ph, m) in &self.groups {
            for q in 0..nq {
                let sign = if (*z & q as u64).count_ones().is_multiple_of(2) { *ph } else { -*ph };
                let r = (q as u64 ^ x) as usize;
                for g in 0..nf {
                    let mut acc = ZERO;
                    for f in 0..nf {
                        acc += m[(g, f)] * v[f * nq + q];
                    }
                    out[g * nq + r] += sign * acc;
                }
            }
        }
    }
}

/// Bessel functions `J_0 … J_kmax` at `x > 0` by downward recurrence.
fn bessel_j(kmax: usize, x: f64) -> Vec<f64> {
    let start = kmax + 20 + (x as usize) + 10 * ((x.sqrt()) as usize);
    let start = start + start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * (1..=start / 2).map(|k| j[2 * k]).sum::<f64>();
    j.truncate(kmax + 1);
    j.iter_mut().for_each(|v| *v /= norm);
    j
}

/// `exp(−i H t)` applied to `state` by a Chebyshev expansion with error below `tol`.
pub fn evolve_free(state: &mut StateVector, h: &CompiledHamiltonian, t: f64, tol: f64) -> Result<(), Error> {
    if t == 0.0 {
        return Ok(());
    }
    let e = 1.1 * h.spectral_bound();
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid spectral bound {e}")));
    }
    let steps = (e * t.abs() / 20.0).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let x = e * dt.abs();
    let kmax = (x + 60.0) as usize;
    let jv = bessel_j(kmax, x);
    let mut nterms = kmax;
    while nterms > x as usize + 2 && jv[nterms].abs() < tol * 1e-3 {
        nterms -= 1;
    }
    if jv[kmax].abs() > tol {
        return Err(Error::InvalidParameter("Chebyshev expansion did not converge".into()));
    }
    let sgn = if dt < 0.0 { -1.0 } else { 1.0 };
    let dim = state.amps.len();
    let scale = Complex64::new(1.0 / e, 0.0);
    let mut hv = vec![ZERO; dim];
    for _ in 0..steps {
        let mut t0 = state.amps.clone();
        h.apply(&t0, &mut hv);
        let mut t1: Vec<Complex64> = hv.iter().map(|v| v * scale).collect();
        let mut acc: Vec<Complex64> = t0.iter().map(|v| v * jv[0]).collect();
        // e^{−i x y} = J0(x) + 2 Σ (−i)^k J_k(x) T_k(y); negative times conjugate the phase.
        let mi = Complex64::new(0.0, -sgn);
        let mut phase = mi;
        for k in 1..=nterms {
            let c = phase * (2.0 * jv[k]);
            acc.iter_mut().zip(&t1).for_each(|(a, v)| *a += c * v);
            if k == nterms {
                break;
            }
            h.apply(&t1, &mut hv);
            let t2: Vec<Complex64> =
                hv.iter().zip(&t0).map(|(v, p)| v * scale * 2.0 - p).collect();
            t0 = t1;
            t1 = t2;
            phase *= mi;
        }
        state.amps = acc;
    }
    Ok(())
}

/// Gates of the encoding circuit that diagonalizes the stabilizers.
#[derive(Clone, Copy, Debug)]
enum Gate {
    H(usize),
    Cnot(usize, usize),
}

fn conj_gate(p: &PauliString, g: Gate) -> PauliString {
    // Conjugation `G† P G` for self-inverse gates equals `G P G†`.
    let (mut x, mut z) = p.masks();
    let mut phase = p.phase();
    match g {
        Gate::H(q) => {
            let (xb, zb) = ((x >> q) & 1, (z >> q) & 1);
            if xb == 1 && zb == 1 {
                phase = (phase + 2) % 4;
            }
            x = (x & !(1 << q)) | (zb << q);
            z = (z & !(1 << q)) | (xb << q);
        }
        Gate::Cnot(c, t) => {
            let (xc, zc, xt, zt) = ((x >> c) & 1, (z >> c) & 1, (x >> t) & 1, (z >> t) & 1);
            if xc & zt & (xt ^ zc ^ 1) == 1 {
                phase = (phase + 2) % 4;
            }
            x ^= xc << t;
            z ^= zt << c;
        }
    }
    PauliString::from_masks(p.n_qubits(), x, z).with_phase(phase)
}

fn apply_gate(state: &mut StateVector, g: Gate) {
    match g {
        Gate::H(q) => {
            let bit = 1usize << q;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let amps = &mut state.amps;
            for k0 in (0..amps.len()).filter(|k| k & bit == 0) {
                let (a, b) = (amps[k0], amps[k0 | bit]);
                amps[k0] = (a + b) * r;
                amps[k0 | bit] = (a - b) * r;
            }
        }
        Gate::Cnot(c, t) => {
            let (bc, bt) = (1usize << c, 1usize << t);
            let amps = &mut state.amps;
            for k in 0..amps.len() {
                if k & bc != 0 && k & bt == 0 {
                    amps.swap(k, k | bt);
                }
            }
        }
    }
}

/// Exact evolution under a Hamiltonian that commutes with every stabilizer.
///
/// The Clifford encoder `V` (Hadamards on one qubit per star, then CNOTs fanning
/// out over the star) maps every stabilizer onto a diagonal Z-string, so
/// `V† H V` is diagonal in the qubits and each qubit basis state carries an
/// `n_F × n_F` cavity block.
pub struct StabilizerFrame {
    n_qubits: usize,
    n_fock: usize,
    gates: Vec<Gate>,
    /// Per qubit basis state, the cavity block of `V† H V`.
    blocks: Vec<CMatrix>,
    cache: HashMap<u64, Vec<CMatrix>>,
}

impl StabilizerFrame {
    pub fn new(geom: &Geometry, stabs: &StabilizerSet, h: &OperatorSum, n_fock: usize) -> Result<Self, Error> {
        Self::from_terms(geom, stabs, h.terms().map(|(p, f, c)| (p.clone(), f.matrix(n_fock) * c)), n_fock)
    }

    /// Like [`StabilizerFrame::new`], with each Pauli string paired with an explicit cavity matrix.
    pub fn from_terms(
        geom: &Geometry,
        stabs: &StabilizerSet,
        terms: impl IntoIterator<Item = (PauliString, CMatrix)>,
        n_fock: usize,
    ) -> Result<Self, Error> {
        let n = geom.n_qubits;
        let mut touched = vec![false; n];
        let mut gates = Vec::new();
        for s in stabs.of_kind(StabilizerKind::Star) {
            let pivot = *s.support.iter().find(|&&q| !touched[q]).ok_or_else(|| {
                Error::Unsupported("star without a free pivot in row-major order".into())
            })?;
            gates.push(Gate::H(pivot));
            for &q in &s.support {
                if q != pivot {
                    gates.push(Gate::Cnot(pivot, q));
                }
                touched[q] = true;
            }
        }
        // V = G_m ⋯ G_1 in time order, so V† P V conjugates by G_m first.
        let to_frame = |p: &PauliString| gates.iter().rev().fold(p.clone(), |acc, &g| conj_gate(&acc, g));
        let nq = 1usize << n;
        let mut blocks = vec![CMatrix::zeros(n_fock, n_fock); nq];
        for (p, cav) in terms {
            if cav.nrows() != n_fock || cav.ncols() != n_fock {
                return Err(Error::Dimension { expected: n_fock, found: cav.nrows() });
            }
            let d = to_frame(&p);
            let (x, z) = d.masks();
            if x != 0 {
                return Err(Error::Unsupported(format!("term {p} does not commute with the stabilizers")));
            }
            let m = cav * [ONE, Complex64::i(), -ONE, -Complex64::i()][d.phase() as usize];
            for (q, b) in blocks.iter_mut().enumerate() {
                if (z & q as u64).count_ones().is_multiple_of(2) {
                    *b += &m;
                } else {
                    *b -= &m;
                }
            }
        }
        Ok(Self { n_qubits: n, n_fock, gates, blocks, cache: HashMap::new() })
    }

    /// Cavity block of `V† H V` for each qubit basis state.
    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    fn unitaries(&mut self, t: f64) -> &Vec<CMatrix> {
        let blocks = &self.blocks;
        self.cache
            .entry(t.to_bits())
            .or_insert_with(|| blocks.iter().map(|b| expm_hermitian(b, t)).collect())
    }

    /// `ψ ← exp(−i H t) ψ`.
    pub fn evolve(&mut self, state: &mut StateVector, t: f64) {
        for &g in self.gates.iter().rev() {
            apply_gate(state, g);
        }
        let nq = 1usize << self.n_qubits;
        let nf = self.n_fock;
        let us = self.unitaries(t).clone();
        let mut col = vec![ZERO; nf];
        for (q, u) in us.iter().enumerate() {
            for f in 0..nf {
                col[f] = state.amps[f * nq + q];
            }
            for g in 0..nf {
                state.amps[g * nq + q] = (0..nf).map(|f| u[(g, f)] * col[f]).sum();
            }
        }
        for &g in &self.gates {
            apply_gate(state, g);
        }
    }

    /// `Tr[exp(i A t) exp(−i B t)] / (2^N n_F)` for two Hamiltonians in the same frame.
    pub fn trace_overlap(a: &Self, b: &Self, t: f64) -> Complex64 {
        let dim = (a.blocks.len() * a.n_fock) as f64;
        let mut s = ZERO;
        for (ba, bb) in a.blocks.iter().zip(&b.blocks) {
            let m = expm_hermitian(ba, -t) * expm_hermitian(bb, t);
            s += m.trace();
        }
        s / dim
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    ExactDense,
    StochasticTrace,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: TraceMethod,
    pub samples: usize,
}

/// Reference propagator `exp(−i H_ref t)`.
pub enum Reference {
    Chebyshev { h: CompiledHamiltonian, tol: f64 },
    Stabilizer(StabilizerFrame),
}

impl Reference {
    pub fn evolve(&mut self, state: &mut StateVector, t: f64) -> Result<(), Error> {
        match self {
            Reference::Chebyshev { h, tol } => evolve_free(state, h, t, *tol),
            Reference::Stabilizer(f) => {
                f.evolve(state, t);
                Ok(())
            }
        }
    }
}

/// Settings of a fidelity run.
#[derive(Clone, Copy, Debug)]
pub struct TraceSettings {
    pub method: TraceMethod,
    /// Hutchinson probes per error realization (stochastic method).
    pub probes: usize,
    pub seed: u64,
}

/// Gate fidelity `|Tr[exp(i t H_ref) U_P(t)]| / (2^N n_F)` at stroboscopic checkpoints.
///
/// `checkpoints` are period counts in increasing order. Returns, per reference,
/// one complex trace estimate per checkpoint and per probe.
pub fn trace_curves(
    schedule: &PulseSchedule,
    free: &mut FreePropagator,
    references: &mut [Reference],
    checkpoints: &[usize],
    settings: TraceSettings,
    err: &mut ErrorStream,
) -> Result<Vec<Vec<Vec<Complex64>>>, Error> {
    let (n, nf) = (free.n_qubits, free.n_fock);
    let dim = StateVector::dim(n, nf);
    let probes: Box<dyn Iterator<Item = StateVector>> = match settings.method {
        TraceMethod::ExactDense => Box::new((0..dim).map(move |i| StateVector::basis(n, nf, i))),
        TraceMethod::StochasticTrace => {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            Box::new((0..settings.probes).map(move |_| StateVector::random_phase(n, nf, &mut rng)))
        }
    };
    let mut out = vec![vec![Vec::new(); checkpoints.len()]; references.len()];
    let mut totals = vec![vec![ZERO; checkpoints.len()]; references.len()];
    let exact = settings.method == TraceMethod::ExactDense;
    for z in probes {
        let mut psi = z.clone();
        let mut refs: Vec<StateVector> = references.iter().map(|_| z.clone()).collect();
        let mut runner = ScheduleRunner::new(schedule);
        let mut done = 0;
        for (c, &m) in checkpoints.iter().enumerate() {
            runner.run(&mut psi, m - done, free, err);
            let dt = (m - done) as f64 * schedule.period;
            for (r, phi) in references.iter_mut().zip(refs.iter_mut()) {
                r.evolve(phi, dt)?;
            }
            done = m;
            for (k, phi) in refs.iter().enumerate() {
                let v = phi.inner(&psi) / dim as f64;
                if exact {
                    totals[k][c] += v;
                } else {
                    out[k][c].push(v);
                }
            }
        }
    }
    if exact {
        for (k, t) in totals.into_iter().enumerate() {
            for (c, v) in t.into_iter().enumerate() {
                out[k][c].push(v);
            }
        }
    }
    Ok(out)
}

/// Combines complex per-probe trace estimates into `|mean|` with its standard error.
pub fn summarize(values: &[Complex64], method: TraceMethod) -> FidelityEstimate {
    let k = values.len();
    let mean: Complex64 = values.iter().sum::<Complex64>() / k as f64;
    let value = mean.norm();
    let std_error = if k > 1 && value > 0.0 {
        let dir = mean / value;
        let proj: Vec<f64> = values.iter().map(|v| (v * dir.conj()).re).collect();
        let mu = proj.iter().sum::<f64>() / k as f64;
        (proj.iter().map(|p| (p - mu).powi(2)).sum::<f64>() / ((k - 1) * k) as f64).sqrt()
    } else {
        0.0
    };
    FidelityEstimate { value, std_error, method, samples: k }
}

/// Mean and standard error of real samples.
pub fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / k;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    (mu, (var / k).sqrt())
}

/// Gate fidelity at one stroboscopic time.
pub fn gate_fidelity(
    schedule: &PulseSchedule,
    free: &mut FreePropagator,
    reference: &mut Reference,
    t: f64,
    err: PulseErrorModel,
    settings: TraceSettings,
) -> Result<FidelityEstimate, Error> {
    let m = stroboscopic_count(t, schedule.period)?;
    let mut stream = err.stream(0);
    let v = trace_curves(schedule, free, std::slice::from_mut(reference), &[m], settings, &mut stream)?;
    Ok(summarize(&v[0][0], settings.method))
}

pub fn stroboscopic_count(t: f64, period: f64) -> Result<usize, Error> {
    let m = (t / period).round();
    if t < 0.0 || (t - m * period).abs() > 1e-9 * period.max(t) {
        return Err(Error::NotStroboscopic { t, period });
    }
    Ok(m as usize)
}

/// Monte Carlo average of the gate fidelity over independent error realizations.
///
/// Returns per checkpoint the mean of `|Tr W| / D` over samples and its standard error.
pub fn monte_carlo_curve(
    schedule: &PulseSchedule,
    free: &mut FreePropagator,
    reference: &mut Reference,
    checkpoints: &[usize],
    err: PulseErrorModel,
    n_samples: usize,
    settings: TraceSettings,
) -> Result<Vec<FidelityEstimate>, Error> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let mut per = vec![Vec::with_capacity(n_samples); checkpoints.len()];
    for i in 0..n_samples {
        let mut stream = err.stream(i as u64);
        let s = TraceSettings { seed: settings.seed.wrapping_add(i as u64), ..settings };
        let v = trace_curves(schedule, free, std::slice::from_mut(reference), checkpoints, s, &mut stream)?;
        for (c, vals) in v[0].iter().enumerate() {
            per[c].push(summarize(vals, settings.method).value);
        }
    }
    Ok(per
        .iter()
        .map(|xs| {
            let (value, std_error) = mean_and_error(xs);
            FidelityEstimate { value, std_error, method: settings.method, samples: n_samples }
        })
        .collect())
}

/// Runs the preparation steps on `|0,…,0⟩` with `δ = 0`.
pub fn prepare_codeword(n_qubits: usize, steps: &[PrepStep], delta_gap: f64, err: &mut ErrorStream) -> StateVector {
    let mut state = StateVector::ground(n_qubits, 1);
    let mut free = FreePropagator::new(n_qubits, 1, delta_gap, 0.0, 1.0);
    for s in steps {
        run_schedule(&mut state, &s.schedule, 1, &mut free, err);
    }
    state
}

/// `|0̄⟩ ∝ Π_s (1 + A_s) |0,…,0⟩`.
pub fn reference_codeword(n_qubits: usize, stabs: &StabilizerSet) -> StateVector {
    let mut state = StateVector::ground(n_qubits, 1);
    for s in stabs.of_kind(StabilizerKind::Star) {
        let mut flipped = state.clone();
        flipped.apply_pauli(&s.op);
        state.amps.iter_mut().zip(&flipped.amps).for_each(|(a, b)| *a += b);
    }
    state.normalize();
    state
}

/// `|⟨0̄|ψ⟩|²`.
pub fn codeword_fidelity(prepared: &StateVector, reference: &StateVector) -> Result<f64, Error> {
    if prepared.amps.len() != reference.amps.len() {
        return Err(Error::Dimension { expected: reference.amps.len(), found: prepared.amps.len() });
    }
    Ok(reference.inner(prepared).norm_sqr())
}

/// Dense unitary of a schedule run for `periods` periods (small systems only).
pub fn dense_schedule_unitary(
    schedule: &PulseSchedule,
    free: &mut FreePropagator,
    periods: usize,
) -> DMatrix<Complex64> {
    let dim = StateVector::dim(free.n_qubits, free.n_fock);
    let mut u = DMatrix::zeros(dim, dim);
    let mut err = PulseErrorModel::perfect().stream(0);
    for i in 0..dim {
        let mut s = StateVector::basis(free.n_qubits, free.n_fock, i);
        let mut runner = ScheduleRunner::new(schedule);
        runner.run(&mut s, periods, free, &mut err);
        for (r, a) in s.amps.iter().enumerate() {
            u[(r, i)] = *a;
        }
    }
    u
}
