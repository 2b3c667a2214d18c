//! Planar code geometry on the 45°-rotated grid.
//!
//! Sites `(i, j)` of a `(2L−1) × (2L−1)` grid with `i + j` even hold qubits,
//! indexed row-major. Sites with `i + j` odd hold stabilizers acting on their
//! grid neighbours: plaquettes (all-Z) for odd `i`, stars (all-X) for even `i`.

use serde::Serialize;

use crate::pauli::{Axis, PauliString};
use crate::Error;

pub type Site = (usize, usize);

#[derive(Clone, Debug, Serialize)]
pub struct LineGroups {
    /// Constant `i`.
    pub rows: Vec<Vec<usize>>,
    /// Constant `j`.
    pub columns: Vec<Vec<usize>>,
    /// Constant `i − j`, ordered from `i − j = −(2L−2)` upwards.
    pub diagonals: Vec<Vec<usize>>,
    /// Constant `i + j`.
    pub anti_diagonals: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Geometry {
    pub l: usize,
    pub n_qubits: usize,
    pub coordinates: Vec<Site>,
    pub line_groups: LineGroups,
    #[serde(skip)]
    grid: Vec<Option<usize>>,
}

impl Geometry {
    pub fn new(l: usize) -> Result<Self, Error> {
        if l < 2 {
            return Err(Error::InvalidParameter(format!("lattice size L = {l} must be at least 2")));
        }
        let side = 2 * l - 1;
        let mut grid = vec![None; side * side];
        let mut coordinates = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if (i + j) % 2 == 0 {
                    grid[i * side + j] = Some(coordinates.len());
                    coordinates.push((i, j));
                }
            }
        }
        let group = |key: &dyn Fn(Site) -> usize, count: usize| {
            let mut g = vec![Vec::new(); count];
            for (q, &s) in coordinates.iter().enumerate() {
                g[key(s)].push(q);
            }
            g.retain(|v| !v.is_empty());
            g
        };
        let line_groups = LineGroups {
            rows: group(&|(i, _)| i, side),
            columns: group(&|(_, j)| j, side),
            diagonals: group(&|(i, j)| i + side - 1 - j, 2 * side - 1),
            anti_diagonals: group(&|(i, j)| i + j, 2 * side - 1),
        };
        Ok(Self { l, n_qubits: coordinates.len(), coordinates, line_groups, grid })
    }

    pub fn side(&self) -> usize {
        2 * self.l - 1
    }

    pub fn qubit_at(&self, i: isize, j: isize) -> Option<usize> {
        let s = self.side() as isize;
        if i < 0 || j < 0 || i >= s || j >= s {
            return None;
        }
        self.grid[(i * s + j) as usize]
    }

    /// Quarter turn about the centre; maps stars onto plaquettes.
    pub fn rotate_site(&self, (i, j): Site) -> Site {
        (j, self.side() - 1 - i)
    }

    pub fn rotate_qubit(&self, q: usize) -> usize {
        let (i, j) = self.rotate_site(self.coordinates[q]);
        self.qubit_at(i as isize, j as isize).expect("rotation maps qubits to qubits")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerKind {
    Plaquette,
    Star,
}

/// Neighbour labels of a stabilizer site: top, right, left, bottom.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Neighbours {
    pub t: Option<usize>,
    pub r: Option<usize>,
    pub l: Option<usize>,
    pub b: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    pub site: Site,
    pub support: Vec<usize>,
    /// Checkerboard class; stabilizers of one kind and class have disjoint supports.
    pub class: u8,
    /// Quarter index 0..4 in generation order.
    pub quarter: usize,
    #[serde(skip)]
    pub op: PauliString,
}

pub fn neighbours(geom: &Geometry, (i, j): Site) -> Neighbours {
    let (i, j) = (i as isize, j as isize);
    Neighbours {
        t: geom.qubit_at(i - 1, j),
        r: geom.qubit_at(i, j + 1),
        l: geom.qubit_at(i, j - 1),
        b: geom.qubit_at(i + 1, j),
    }
}

/// Checkerboard class of a star site `(2a, 2b+1)`.
pub fn star_class((i, j): Site) -> u8 {
    ((i / 2 + (j - 1) / 2) % 2) as u8
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSet {
    pub stabilizers: Vec<Stabilizer>,
}

/// Quarters are generated in the order even plaquettes, odd plaquettes, even stars, odd stars.
pub fn quarter_index(kind: StabilizerKind, class: u8) -> usize {
    match kind {
        StabilizerKind::Plaquette => class as usize,
        StabilizerKind::Star => 2 + class as usize,
    }
}

pub fn quarter_kind(quarter: usize) -> (StabilizerKind, u8) {
    match quarter {
        0 | 1 => (StabilizerKind::Plaquette, quarter as u8),
        2 | 3 => (StabilizerKind::Star, quarter as u8 - 2),
        _ => panic!("quarter index {quarter} out of range 0..4"),
    }
}

impl StabilizerSet {
    pub fn new(geom: &Geometry) -> Self {
        let side = geom.side();
        let n = geom.n_qubits;
        let mut stabilizers = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if (i + j) % 2 == 0 {
                    continue;
                }
                let nb = neighbours(geom, (i, j));
                let mut support: Vec<usize> = [nb.t, nb.r, nb.l, nb.b].into_iter().flatten().collect();
                support.sort_unstable();
                let (kind, axis, class) = if i % 2 == 1 {
                    let back = (side - 1 - j, i);
                    (StabilizerKind::Plaquette, Axis::Z, star_class(back))
                } else {
                    (StabilizerKind::Star, Axis::X, star_class((i, j)))
                };
                let factors: Vec<(usize, Axis)> = support.iter().map(|&q| (q, axis)).collect();
                stabilizers.push(Stabilizer {
                    kind,
                    site: (i, j),
                    op: PauliString::from_axes(n, &factors),
                    support,
                    class,
                    quarter: quarter_index(kind, class),
                });
            }
        }
        Self { stabilizers }
    }

    pub fn len(&self) -> usize {
        self.stabilizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stabilizers.is_empty()
    }

    pub fn of_kind(&self, kind: StabilizerKind) -> impl Iterator<Item = &Stabilizer> {
        self.stabilizers.iter().filter(move |s| s.kind == kind)
    }

    pub fn quarter(&self, quarter: usize) -> Vec<&Stabilizer> {
        self.stabilizers.iter().filter(|s| s.quarter == quarter).collect()
    }

    pub fn find(&self, site: Site) -> Option<&Stabilizer> {
        self.stabilizers.iter().find(|s| s.site == site)
    }

    pub fn operators(&self) -> Vec<PauliString> {
        self.stabilizers.iter().map(|s| s.op.clone()).collect()
    }
}

/// Logical pair `(Z̄, X̄)`: Z on the top row and X on the left column.
pub fn logical_operators(geom: &Geometry) -> (PauliString, PauliString) {
    let n = geom.n_qubits;
    let top: Vec<(usize, Axis)> = geom.line_groups.rows[0].iter().map(|&q| (q, Axis::Z)).collect();
    let left: Vec<(usize, Axis)> =
        geom.line_groups.columns[0].iter().map(|&q| (q, Axis::X)).collect();
    (PauliString::from_axes(n, &top), PauliString::from_axes(n, &left))
}

/// Rank over GF(2) of the symplectic vectors `(x | z)`.
pub fn symplectic_rank(ops: &[PauliString]) -> usize {
    let mut rows: Vec<Vec<u64>> =
        ops.iter().map(|p| p.x_words().iter().chain(p.z_words()).copied().collect()).collect();
    let width = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for bit in 0..width {
        let (w, b) = (bit / 64, bit % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pr = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && (row[w] >> b) & 1 == 1 {
                row.iter_mut().zip(&pr).for_each(|(a, p)| *a ^= p);
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Serialize)]
pub struct CodeDescription<'a> {
    pub l: usize,
    pub n_qubits: usize,
    pub coordinates: &'a [Site],
    pub stabilizers: &'a [Stabilizer],
    pub quarters: Vec<Vec<Site>>,
    pub logical_z: String,
    pub logical_x: String,
}

pub fn describe<'a>(geom: &'a Geometry, stabs: &'a StabilizerSet) -> CodeDescription<'a> {
    let (zl, xl) = logical_operators(geom);
    CodeDescription {
        l: geom.l,
        n_qubits: geom.n_qubits,
        coordinates: &geom.coordinates,
        stabilizers: &stabs.stabilizers,
        quarters: (0..4).map(|k| stabs.quarter(k).iter().map(|s| s.site).collect()).collect(),
        logical_z: zl.to_string(),
        logical_x: xl.to_string(),
    }
}
