//! Pulse programs: quarter-generating operations `R1`/`R2`, the symmetric period,
//! the 2×2 unit cell and the measurement-free codeword preparation.
//!
//! Composite operations are stored as operator products `R = L₁ L₂ ⋯ L_m`, so
//! that `R† H R` folds the layers in list order. On a state the last layer acts first.
//!
//! Every quarter is compiled in a "star frame": stars of one checkerboard class
//! on the grid as given, or the same construction rotated by a quarter turn to
//! produce plaquettes.

use serde::Serialize;

use crate::lattice::{
    neighbours, quarter_kind, star_class, Geometry, Site, StabilizerKind, StabilizerSet,
};
use crate::pauli::{
    conjugate_by_layer_sequence, inverse_layer, validate_layer, Axis, CliffordPulse, Layer,
    PauliString,
};
use crate::Error;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Operation {
    pub layers: Vec<Layer>,
}

impl Operation {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn inverse(&self) -> Self {
        Self { layers: self.layers.iter().rev().map(inverse_layer).collect() }
    }

    pub fn n_elementary(&self) -> usize {
        self.layers.iter().flatten().map(CliffordPulse::n_elementary).sum()
    }

    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString, Error> {
        conjugate_by_layer_sequence(p, &self.layers)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub operation: Operation,
    /// Free evolution after the operation, in units of Δ⁻¹.
    pub wait: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleLabel {
    pub kind: String,
    pub l: usize,
    pub symmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSchedule {
    pub n_qubits: usize,
    pub segments: Vec<Segment>,
    /// Period `T` of the generated Hamiltonian; the schedule may span several periods.
    pub period: f64,
    pub label: ScheduleLabel,
}

impl PulseSchedule {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.wait).sum()
    }

    pub fn operation_count(&self) -> usize {
        self.segments.len()
    }

    pub fn frame_count(&self) -> usize {
        self.segments.iter().filter(|s| s.wait > 0.0).count()
    }

    pub fn elementary_pulse_count(&self) -> usize {
        self.segments.iter().map(|s| s.operation.n_elementary()).sum()
    }

    pub fn validate(&self) -> Result<(), Error> {
        for s in &self.segments {
            if s.wait < 0.0 || !s.wait.is_finite() {
                return Err(Error::InvalidParameter(format!("negative free duration {}", s.wait)));
            }
            for l in &s.operation.layers {
                validate_layer(l, self.n_qubits)?;
            }
        }
        Ok(())
    }

    /// Cumulative frame operations `R̂_j = R_j ⋯ R_1`, conjugating `p` into frame `j`.
    pub fn frame_image(&self, p: &PauliString, upto: usize) -> Result<PauliString, Error> {
        self.segments[..=upto].iter().rev().try_fold(p.clone(), |acc, s| s.operation.conjugate(&acc))
    }

    /// True when the nominal product of all operations is the identity up to a global phase.
    pub fn is_nominal_identity(&self) -> Result<bool, Error> {
        let n = self.n_qubits;
        let last = self.segments.len() - 1;
        for q in 0..n {
            for a in [Axis::X, Axis::Z] {
                let p = PauliString::single(n, q, a);
                if self.frame_image(&p, last)? != p {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Number of mutually inverse pulse pairs per period `T`.
pub fn count_inverse_pairs(schedule: &PulseSchedule) -> usize {
    let periods = (schedule.duration() / schedule.period).round().max(1.0) as usize;
    schedule.elementary_pulse_count() / 2 / periods
}

/// Qubit lookup in the star frame of a quarter.
#[derive(Clone, Copy)]
struct Frame<'a> {
    geom: &'a Geometry,
    rotated: bool,
}

impl Frame<'_> {
    fn qubit(&self, i: isize, j: isize) -> Option<usize> {
        let q = self.geom.qubit_at(i, j)?;
        Some(if self.rotated { self.geom.rotate_qubit(q) } else { q })
    }

    fn site(&self, q: usize) -> Site {
        // Inverse of the frame map: star-frame coordinates of an actual qubit.
        let (i, j) = self.geom.coordinates[q];
        if self.rotated {
            (self.geom.side() - 1 - j, i)
        } else {
            (i, j)
        }
    }

    fn qubits_where(&self, f: impl Fn(Site) -> bool) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.geom.n_qubits).filter(|&q| f(self.site(q))).collect();
        v.sort_unstable();
        v
    }

    /// Star-frame stars of one class, row-major, as (site, t, r, l, b).
    fn stars(&self, class: u8) -> Vec<FrameStar> {
        let l = self.geom.l;
        let mut out = Vec::new();
        for a in 0..l {
            for b in 0..l - 1 {
                let site = (2 * a, 2 * b + 1);
                if star_class(site) != class {
                    continue;
                }
                let (i, j) = (site.0 as isize, site.1 as isize);
                out.push(FrameStar {
                    site,
                    t: self.qubit(i - 1, j),
                    r: self.qubit(i, j + 1),
                    l: self.qubit(i, j - 1),
                    b: self.qubit(i + 1, j),
                });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct FrameStar {
    site: Site,
    t: Option<usize>,
    r: Option<usize>,
    l: Option<usize>,
    b: Option<usize>,
}

impl FrameStar {
    fn representative(&self, bottom_row: usize) -> usize {
        if self.site.0 == bottom_row {
            self.l.expect("bottom stars have a left qubit")
        } else {
            self.r.expect("stars above the bottom row have a right qubit")
        }
    }
}

fn rot(axis: Axis, qt: i8, qubits: Vec<usize>) -> Option<CliffordPulse> {
    (!qubits.is_empty()).then(|| CliffordPulse::rotation(axis, qt, qubits))
}

fn pg(pairs: Vec<(usize, usize)>) -> Option<CliffordPulse> {
    (!pairs.is_empty()).then(|| CliffordPulse::phase_gate(pairs))
}

fn layer(pulses: impl IntoIterator<Item = Option<CliffordPulse>>) -> Option<Layer> {
    let l: Layer = pulses.into_iter().flatten().collect();
    (!l.is_empty()).then_some(l)
}

/// Compiled `R1`, `R2` and the representative qubit of every generated stabilizer.
#[derive(Clone, Debug)]
pub struct QuarterOps {
    pub r1: Operation,
    pub r2: Operation,
    /// Pairs (stabilizer site, representative qubit) with `R1† σz(rep) R1 = W`.
    pub representatives: Vec<(Site, usize)>,
}

/// Compiles a quarter in its star frame.
///
/// `selected` restricts the generated stars (star-frame sites) and `pinned`
/// lists qubits whose final σx is turned into −σy, giving modified stars.
fn compile_quarter(
    geom: &Geometry,
    kind: StabilizerKind,
    class: u8,
    selected: Option<&[Site]>,
    pinned: &[usize],
) -> QuarterOps {
    let frame = Frame { geom, rotated: kind == StabilizerKind::Plaquette };
    let last = geom.side() - 1;
    let stars: Vec<FrameStar> = frame
        .stars(class)
        .into_iter()
        .filter(|s| selected.is_none_or(|sel| sel.contains(&s.site)))
        .collect();
    let d0 = 2 * class as usize;
    let on_d = |(i, j): Site| (i + 4 * geom.l - j) % 4 == d0;
    let even_rows = frame.qubits_where(|(i, _)| i % 2 == 0);
    let odd_rows = frame.qubits_where(|(i, _)| i % 2 == 1);
    let diag = frame.qubits_where(on_d);
    let row = |r: usize| frame.qubits_where(move |(i, _)| i == r);
    let bottom_off_diag = frame.qubits_where(|s| s.0 == last && !on_d(s));
    let pairs = |f: &dyn Fn(&FrameStar) -> [(Option<usize>, Option<usize>); 2]| {
        let mut v = Vec::new();
        for s in &stars {
            for (a, b) in f(s) {
                if let (Some(a), Some(b)) = (a, b) {
                    v.push((a, b));
                }
            }
        }
        v
    };

    let final_rows = match kind {
        StabilizerKind::Star => odd_rows.clone(),
        StabilizerKind::Plaquette => even_rows.clone(),
    };
    let steps = [
        layer([rot(Axis::Y, 1, even_rows.clone())]),
        layer([pg(pairs(&|s| [(s.t, s.l), (s.r, s.b)]))]),
        layer([rot(Axis::X, 1, diag.clone())]),
        layer([rot(Axis::Y, 1, row(last - 1))]),
        layer([pg(pairs(&|s| [(s.t, s.r), (s.l, s.b)]))]),
        layer([
            rot(Axis::Z, 1, row(0)),
            rot(Axis::X, 1, row(last - 1)),
            rot(Axis::Y, 1, bottom_off_diag),
        ]),
        layer([rot(Axis::Y, 1, diag)]),
        layer([rot(Axis::Y, 1, final_rows)]),
        layer([rot(Axis::Z, -1, pinned.to_vec())]),
    ];
    let r1 = Operation::new(steps.into_iter().flatten().collect());

    let reps: Vec<usize> = stars.iter().map(|s| s.representative(last)).collect();
    let flip: Vec<usize> = even_rows.iter().copied().filter(|q| !reps.contains(q)).collect();
    let r2 = Operation::new(
        [
            layer([rot(Axis::Y, 1, odd_rows.clone())]),
            layer([rot(Axis::X, 2, flip)]),
            layer([rot(Axis::Y, 1, odd_rows)]),
        ]
        .into_iter()
        .flatten()
        .collect(),
    );
    let representatives = stars
        .iter()
        .zip(&reps)
        .map(|(s, &q)| {
            let site = if frame.rotated { geom.rotate_site(s.site) } else { s.site };
            (site, q)
        })
        .collect();
    QuarterOps { r1, r2, representatives }
}

/// `R1` and `R2` generating quarter `quarter` (0..4).
pub fn quarter_ops(geom: &Geometry, quarter: usize) -> QuarterOps {
    let (kind, class) = quarter_kind(quarter);
    compile_quarter(geom, kind, class, None, &[])
}

pub fn build_r1(geom: &Geometry, quarter: usize) -> Operation {
    quarter_ops(geom, quarter).r1
}

pub fn build_r2(geom: &Geometry, quarter: usize) -> Operation {
    quarter_ops(geom, quarter).r2
}

fn quarter_segments(ops: &QuarterOps, t: f64) -> Vec<Segment> {
    vec![
        Segment { operation: ops.r1.clone(), wait: t / 4.0 },
        Segment { operation: ops.r2.clone(), wait: t / 2.0 },
        Segment { operation: ops.r2.inverse(), wait: t / 4.0 },
        Segment { operation: ops.r1.inverse(), wait: 0.0 },
    ]
}

fn check_period(t: f64) -> Result<(), Error> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("period T = {t} must be positive")))
    }
}

/// `[R1, T/4, R2, T/2, R2⁻¹, T/4, R1⁻¹]` generating one quarter.
pub fn build_quarter_sequence(geom: &Geometry, quarter: usize, t: f64) -> Result<PulseSchedule, Error> {
    check_period(t)?;
    Ok(PulseSchedule {
        n_qubits: geom.n_qubits,
        segments: quarter_segments(&quarter_ops(geom, quarter), t),
        period: t,
        label: ScheduleLabel { kind: format!("quarter{}", quarter + 1), l: geom.l, symmetric: false },
    })
}

/// Quarter order over the double period: Q1 Q2 Q3 Q4 Q4 Q3 Q2 Q1.
pub const SYMMETRIC_ORDER: [usize; 8] = [0, 1, 2, 3, 3, 2, 1, 0];

/// All four quarters, each for `T/4`, forward then reversed, spanning `2T`.
pub fn build_full_symmetric_sequence(geom: &Geometry, t: f64) -> Result<PulseSchedule, Error> {
    check_period(t)?;
    let ops: Vec<QuarterOps> = (0..4).map(|q| quarter_ops(geom, q)).collect();
    let segments = SYMMETRIC_ORDER.iter().flat_map(|&q| quarter_segments(&ops[q], t / 4.0)).collect();
    Ok(PulseSchedule {
        n_qubits: geom.n_qubits,
        segments,
        period: t,
        label: ScheduleLabel { kind: "full".into(), l: geom.l, symmetric: true },
    })
}

/// Unit-cell `R1` on four qubits (indices 0..4 for qubits 1..4), in operator order.
pub fn unit_cell_r1() -> Operation {
    Operation::new(unit_cell_steps().into_iter().map(|(_, l)| l).collect())
}

/// The six layers of the unit-cell `R1` with the step labels (b)–(f) plus the final rotation.
pub fn unit_cell_steps() -> Vec<(&'static str, Layer)> {
    let y = |qt, q: [usize; 2]| vec![CliffordPulse::rotation(Axis::Y, qt, q.to_vec())];
    vec![
        ("b", y(1, [1, 2])),
        ("c", vec![CliffordPulse::phase_gate(vec![(0, 2), (1, 3)])]),
        ("d", vec![CliffordPulse::rotation(Axis::X, 1, vec![2, 3])]),
        ("e", vec![CliffordPulse::phase_gate(vec![(0, 1), (2, 3)])]),
        ("f", y(-1, [2, 3])),
        ("final", y(-1, [0, 3])),
    ]
}

pub fn unit_cell_r2() -> Operation {
    Operation::new(vec![
        vec![CliffordPulse::rotation(Axis::Y, 1, vec![0, 3])],
        vec![CliffordPulse::rotation(Axis::X, 2, vec![2, 3])],
        vec![CliffordPulse::rotation(Axis::Y, 1, vec![0, 3])],
    ])
}

/// One preparation step: a set of disjoint modified stars generated together.
#[derive(Clone, Debug, Serialize)]
pub struct PrepStep {
    /// Star sites generated in this step.
    pub stars: Vec<Site>,
    /// Qubit `s_k` of each star that carries −σy in the modified star.
    pub pinned: Vec<usize>,
    /// Modified stars `Ã = −σy(s_k) Π σx`.
    pub generators: Vec<PauliString>,
    /// Effective evolution time under `−Δ Ã`, `π/(4Δ)`.
    pub duration: f64,
    pub schedule: PulseSchedule,
}

/// Greedy grouping of stars into preparation steps.
///
/// Each step holds stars of one class (disjoint supports). A star is admitted
/// when it still owns a qubit untouched by earlier steps and admitting it
/// leaves every remaining star such a qubit.
pub fn prep_step_plan(geom: &Geometry, stabs: &StabilizerSet) -> Vec<(Vec<Site>, Vec<usize>)> {
    let stars: Vec<(&Vec<usize>, Site, u8)> =
        stabs.of_kind(StabilizerKind::Star).map(|s| (&s.support, s.site, s.class)).collect();
    greedy_plan(geom.n_qubits, &stars).unwrap_or_else(|| sequential_plan(geom.n_qubits, &stars))
}

fn free_qubit(support: &[usize], touched: &[bool]) -> Option<usize> {
    support.iter().copied().find(|&q| !touched[q])
}

fn greedy_plan(n: usize, stars: &[(&Vec<usize>, Site, u8)]) -> Option<Vec<(Vec<Site>, Vec<usize>)>> {
    let mut touched = vec![false; n];
    let mut remaining: Vec<usize> = (0..stars.len()).collect();
    let mut plan = Vec::new();
    while !remaining.is_empty() {
        let mut best: Vec<(usize, usize)> = Vec::new();
        for class in 0..2u8 {
            let mut local = touched.clone();
            let mut chosen: Vec<(usize, usize)> = Vec::new();
            for &s in remaining.iter().filter(|&&s| stars[s].2 == class) {
                let Some(pin) = free_qubit(stars[s].0, &touched) else { continue };
                let mut trial = local.clone();
                stars[s].0.iter().for_each(|&q| trial[q] = true);
                let strands = remaining.iter().any(|&o| {
                    o != s && !chosen.iter().any(|c| c.0 == o) && free_qubit(stars[o].0, &trial).is_none()
                });
                if !strands {
                    local = trial;
                    chosen.push((s, pin));
                }
            }
            if chosen.len() > best.len() {
                best = chosen;
            }
        }
        if best.is_empty() {
            return None;
        }
        for &(s, _) in &best {
            stars[s].0.iter().for_each(|&q| touched[q] = true);
        }
        remaining.retain(|s| !best.iter().any(|b| b.0 == *s));
        plan.push((best.iter().map(|b| stars[b.0].1).collect(), best.iter().map(|b| b.1).collect()));
    }
    Some(plan)
}

/// One star per step in row-major order; the qubit below or to the right stays untouched.
fn sequential_plan(n: usize, stars: &[(&Vec<usize>, Site, u8)]) -> Vec<(Vec<Site>, Vec<usize>)> {
    let mut touched = vec![false; n];
    let mut plan = Vec::new();
    for (support, site, _) in stars {
        let pin = free_qubit(support, &touched).expect("row-major order keeps a free qubit");
        support.iter().for_each(|&q| touched[q] = true);
        plan.push((vec![*site], vec![pin]));
    }
    plan
}

/// Preparation schedule for `|0̄⟩` from `|0,…,0⟩` with gap `delta_gap` and no cavity coupling.
pub fn build_prep_sequence(
    geom: &Geometry,
    stabs: &StabilizerSet,
    delta_gap: f64,
) -> Result<Vec<PrepStep>, Error> {
    if delta_gap <= 0.0 {
        return Err(Error::InvalidParameter("Δ must be positive".into()));
    }
    let duration = std::f64::consts::PI / (4.0 * delta_gap);
    // One single-quarter period generates −4Δ Ã, so T = π/(16Δ).
    let t = duration / 4.0;
    let n = geom.n_qubits;
    let mut steps = Vec::new();
    for (sites, pinned) in prep_step_plan(geom, stabs) {
        let class = star_class(sites[0]);
        let ops = compile_quarter(geom, StabilizerKind::Star, class, Some(&sites), &pinned);
        let generators = sites
            .iter()
            .zip(&pinned)
            .map(|(&site, &pin)| {
                let nb = neighbours(geom, site);
                let f: Vec<(usize, Axis)> = [nb.t, nb.r, nb.l, nb.b]
                    .into_iter()
                    .flatten()
                    .map(|q| (q, if q == pin { Axis::Y } else { Axis::X }))
                    .collect();
                PauliString::from_axes(n, &f).neg()
            })
            .collect();
        let schedule = PulseSchedule {
            n_qubits: n,
            segments: quarter_segments(&ops, t),
            period: t,
            label: ScheduleLabel { kind: "prep".into(), l: geom.l, symmetric: false },
        };
        steps.push(PrepStep { stars: sites, pinned, generators, duration, schedule });
    }
    Ok(steps)
}

/// Checks `R1† σz(rep) R1 = W` for every generated stabilizer and that `R2`
/// flips σz exactly on the non-representative qubits.
pub fn verify_quarter(geom: &Geometry, stabs: &StabilizerSet, quarter: usize) -> Result<(), Error> {
    let ops = quarter_ops(geom, quarter);
    let n = geom.n_qubits;
    let fail = |m: String| Err(Error::InvalidLayer(m));
    for &(site, rep) in &ops.representatives {
        let target = &stabs.find(site).expect("representative of a known stabilizer").op;
        let image = ops.r1.conjugate(&PauliString::single(n, rep, Axis::Z))?;
        if &image != target {
            return fail(format!("quarter {quarter}: qubit {rep} maps to {image}, expected {target}"));
        }
    }
    let reps: Vec<usize> = ops.representatives.iter().map(|r| r.1).collect();
    for q in 0..n {
        let z = PauliString::single(n, q, Axis::Z);
        let image = ops.r2.conjugate(&z)?;
        let expected = if reps.contains(&q) { z.clone() } else { z.neg() };
        if image != expected {
            return fail(format!("quarter {quarter}: R2 maps Z{q} to {image}"));
        }
    }
    Ok(())
}
