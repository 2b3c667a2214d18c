//! Pauli strings in binary-symplectic form and their conjugation by Clifford pulses.
//!
//! A string is stored as `i^phase * P_0 ⊗ P_1 ⊗ ...` where each `P_j` is one of the
//! Hermitian matrices I, X, Y, Z. Qubit `j` carries X when bit `j` of `x` is set,
//! Z when bit `j` of `z` is set and Y when both are set, with `Y = i X Z`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn bits(self) -> (bool, bool) {
        match self {
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn single(n: usize, qubit: usize, axis: Axis) -> Self {
        Self::from_axes(n, &[(qubit, axis)])
    }

    /// Product of single-qubit Paulis on distinct qubits, with phase +1.
    pub fn from_axes(n: usize, factors: &[(usize, Axis)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, a) in factors {
            assert!(q < n, "qubit {q} out of range for {n} qubits");
            let (xb, zb) = a.bits();
            p.set(q, xb, zb);
        }
        p
    }

    /// Builds a string from raw masks of at most 64 qubits.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64);
        let mut p = Self::identity(n);
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        p.x[0] = x & keep;
        p.z[0] = z & keep;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Phase exponent `k` in `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k % 4;
        self
    }

    /// The same string with phase +1.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..self.clone() }
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Low 64 bits of the masks; panics for more than 64 qubits.
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.n <= 64, "masks() needs at most 64 qubits");
        (self.x[0], self.z[0])
    }

    fn set(&mut self, q: usize, xb: bool, zb: bool) {
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn axis_at(&self, q: usize) -> Option<Axis> {
        let (w, b) = (q / 64, q % 64);
        match ((self.x[w] >> b) & 1, (self.z[w] >> b) & 1) {
            (0, 0) => None,
            (1, 0) => Some(Axis::X),
            (1, 1) => Some(Axis::Y),
            _ => Some(Axis::Z),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.axis_at(q).is_some()).collect()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True when the phase is ±1, i.e. the operator is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    fn check(&self, other: &Self) -> Result<(), Error> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, Error> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        // Hermitian string = i^{|x&z|} X^x Z^z, and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1.
        let mut k = self.phase as u32 + other.phase as u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (xr, zr) = (x1 ^ x2, z1 ^ z2);
            k += (x1 & z1).count_ones() + (x2 & z2).count_ones() + 2 * (z1 & x2).count_ones();
            k += 3 * (xr & zr).count_ones();
            x.push(xr);
            z.push(zr);
        }
        Self { n: self.n, x, z, phase: (k % 4) as u8 }
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, Error> {
        self.check(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut s = 0u32;
        for w in 0..self.x.len() {
            s += (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones();
        }
        s.is_multiple_of(2)
    }

    pub fn neg(&self) -> Self {
        Self { phase: (self.phase + 2) % 4, ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Self { phase: (4 - self.phase) % 4, ..self.clone() }
    }

    /// Conjugation `g† p g` with `g = exp(i θ S / 2)`, `θ = quarter_turns · π/2`.
    pub(crate) fn conjugate_generator(&self, s: &Self, quarter_turns: i8) -> Self {
        if self.commutes_unchecked(s) {
            return self.clone();
        }
        // g† p g = p (cos θ + i sin θ S) for anticommuting p and S.
        match quarter_turns.rem_euclid(4) {
            0 => self.clone(),
            2 => self.neg(),
            r => {
                let ps = self.mul_unchecked(s);
                let shift = if r == 1 { 1 } else { 3 };
                Self { phase: (ps.phase + shift) % 4, ..ps }
            }
        }
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        f.write_str(sign)?;
        for q in 0..self.n {
            let c = self.axis_at(q).map_or('I', Axis::symbol);
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (phase, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        if n == 0 {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let mut p = Self::identity(n);
        for (q, c) in body.chars().enumerate() {
            let (xb, zb) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(Error::Parse(format!("bad Pauli symbol {c:?} in {s:?}"))),
            };
            p.set(q, xb, zb);
        }
        Ok(p.with_phase(phase))
    }
}

/// A layer of simultaneous pulses of one kind, `exp(i θ S / 2)` per target.
///
/// A rotation uses `S = σ_axis` on each listed qubit. The phase gate uses
/// `S = σz σz` on each listed pair; one quarter turn is `U_PG = (1 + i σz σz)/√2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CliffordPulse {
    Rotation { axis: Axis, quarter_turns: i8, qubits: Vec<usize> },
    PhaseGate { quarter_turns: i8, pairs: Vec<(usize, usize)> },
}

impl CliffordPulse {
    pub fn rotation(axis: Axis, quarter_turns: i8, qubits: Vec<usize>) -> Self {
        Self::Rotation { axis, quarter_turns, qubits }
    }

    pub fn phase_gate(pairs: Vec<(usize, usize)>) -> Self {
        Self::PhaseGate { quarter_turns: 1, pairs }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Self::Rotation { axis, quarter_turns, qubits } => {
                Self::Rotation { axis: *axis, quarter_turns: -quarter_turns, qubits: qubits.clone() }
            }
            Self::PhaseGate { quarter_turns, pairs } => {
                Self::PhaseGate { quarter_turns: -quarter_turns, pairs: pairs.clone() }
            }
        }
    }

    pub fn quarter_turns(&self) -> i8 {
        match self {
            Self::Rotation { quarter_turns, .. } | Self::PhaseGate { quarter_turns, .. } => {
                *quarter_turns
            }
        }
    }

    /// Nominal angle θ₀ in radians.
    pub fn angle(&self) -> f64 {
        self.quarter_turns() as f64 * std::f64::consts::FRAC_PI_2
    }

    /// Number of single-target operations (one per qubit or per pair).
    pub fn n_elementary(&self) -> usize {
        match self {
            Self::Rotation { qubits, .. } => qubits.len(),
            Self::PhaseGate { pairs, .. } => pairs.len(),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Self::Rotation { qubits, .. } => qubits.clone(),
            Self::PhaseGate { pairs, .. } => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Generators `S` of the elementary operations, in target order.
    pub fn generators(&self, n: usize) -> Vec<PauliString> {
        match self {
            Self::Rotation { axis, qubits, .. } => {
                qubits.iter().map(|&q| PauliString::single(n, q, *axis)).collect()
            }
            Self::PhaseGate { pairs, .. } => pairs
                .iter()
                .map(|&(a, b)| PauliString::from_axes(n, &[(a, Axis::Z), (b, Axis::Z)]))
                .collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), Error> {
        let qs = self.qubits();
        let mut seen = vec![false; n];
        for &q in &qs {
            if q >= n {
                return Err(Error::InvalidLayer(format!("qubit {q} out of range for {n} qubits")));
            }
            if seen[q] {
                return Err(Error::InvalidLayer(format!("qubit {q} targeted twice in one pulse")));
            }
            seen[q] = true;
        }
        let qt = self.quarter_turns();
        let ok = match self {
            Self::Rotation { .. } => matches!(qt, -2 | -1 | 1 | 2),
            Self::PhaseGate { .. } => matches!(qt, -1 | 1),
        };
        if !ok {
            return Err(Error::InvalidLayer(format!("unsupported angle {qt}·π/2")));
        }
        Ok(())
    }
}

/// Pulses applied atomically; their targets must be pairwise disjoint.
pub type Layer = Vec<CliffordPulse>;

pub fn validate_layer(layer: &Layer, n: usize) -> Result<(), Error> {
    let mut seen = vec![false; n];
    for p in layer {
        p.validate(n)?;
        for q in p.qubits() {
            if seen[q] {
                return Err(Error::InvalidLayer(format!("qubit {q} appears twice in one layer")));
            }
            seen[q] = true;
        }
    }
    Ok(())
}

pub fn inverse_layer(layer: &Layer) -> Layer {
    layer.iter().map(CliffordPulse::inverse).collect()
}

/// Heisenberg-picture conjugation `g† p g`.
pub fn conjugate(p: &PauliString, g: &CliffordPulse) -> Result<PauliString, Error> {
    g.validate(p.n_qubits())?;
    let qt = g.quarter_turns();
    Ok(g.generators(p.n_qubits()).iter().fold(p.clone(), |acc, s| acc.conjugate_generator(s, qt)))
}

pub fn conjugate_by_layer(p: &PauliString, layer: &Layer) -> Result<PauliString, Error> {
    validate_layer(layer, p.n_qubits())?;
    let mut out = p.clone();
    for g in layer {
        let qt = g.quarter_turns();
        for s in g.generators(p.n_qubits()) {
            out = out.conjugate_generator(&s, qt);
        }
    }
    Ok(out)
}

/// Conjugation by the operator product `R = L₁ L₂ ⋯ L_m`, i.e. `R† p R`.
///
/// Layers are folded in list order. Acting on a state, `L_m` is applied first.
pub fn conjugate_by_layer_sequence(p: &PauliString, layers: &[Layer]) -> Result<PauliString, Error> {
    layers.iter().try_fold(p.clone(), |acc, l| conjugate_by_layer(&acc, l))
}
