use std::collections::BTreeSet;

use toric_pulse::dense::{pauli_matrix, pulse_unitary, CMatrix};
use toric_pulse::lattice::{Geometry, StabilizerKind, StabilizerSet};
use toric_pulse::pauli::{conjugate_by_layer_sequence, Axis, PauliString};
use toric_pulse::sequences::{
    build_full_symmetric_sequence, build_prep_sequence, build_quarter_sequence, build_r2, count_inverse_pairs,
    prep_step_plan, quarter_ops, unit_cell_r1, unit_cell_r2, unit_cell_steps, verify_quarter, Operation,
    PulseSchedule,
};
use toric_pulse::Complex64;

fn z(n: usize, q: usize) -> PauliString {
    PauliString::single(n, q, Axis::Z)
}

#[test]
fn quarters_generate_their_stabilizers() {
    for l in 2..=6 {
        let geom = Geometry::new(l).unwrap();
        let stabs = StabilizerSet::new(&geom);
        for q in 0..4 {
            verify_quarter(&geom, &stabs, q).unwrap_or_else(|e| panic!("L={l} quarter {q}: {e}"));
            let reps = quarter_ops(&geom, q).representatives;
            assert_eq!(reps.len(), stabs.quarter(q).len());
            let qubits: BTreeSet<usize> = reps.iter().map(|r| r.1).collect();
            assert_eq!(qubits.len(), reps.len(), "representatives must be distinct");
        }
    }
}

#[test]
fn r2_twice_is_identity_map() {
    let geom = Geometry::new(3).unwrap();
    let n = geom.n_qubits;
    for q in 0..4 {
        let r2 = build_r2(&geom, q);
        let twice = Operation::new(r2.layers.iter().chain(&r2.layers).cloned().collect());
        for k in 0..n {
            for a in [Axis::X, Axis::Y, Axis::Z] {
                let p = PauliString::single(n, k, a);
                assert_eq!(twice.conjugate(&p).unwrap(), p);
            }
        }
    }
}

#[test]
fn layers_are_valid() {
    for l in 2..=5 {
        let geom = Geometry::new(l).unwrap();
        build_full_symmetric_sequence(&geom, 0.125).unwrap().validate().unwrap();
    }
}

fn golden_rows() -> Vec<(String, Vec<String>)> {
    include_str!("golden/unit_cell_steps.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.map(str::to_string).collect())
        })
        .collect()
}

fn body(p: &PauliString) -> String {
    p.unsigned().to_string().trim_start_matches('+').to_string()
}

#[test]
fn unit_cell_steps_match_golden_table() {
    let rows = golden_rows();
    let steps = unit_cell_steps();
    let mut layers = Vec::new();
    let initial: Vec<String> = (0..4).map(|q| body(&z(4, q))).collect();
    assert_eq!(rows[0].0, "a");
    assert_eq!(initial, rows[0].1);
    for (label, expected) in &rows[1..] {
        let (name, layer) = steps.iter().find(|(s, _)| s == label).expect("step label");
        assert_eq!(name, label);
        layers.push(layer.clone());
        let got: Vec<String> =
            (0..4).map(|q| body(&conjugate_by_layer_sequence(&z(4, q), &layers).unwrap())).collect();
        assert_eq!(&got, expected, "step ({label})");
    }
}

fn sum_image(op: &Operation) -> Vec<String> {
    let mut v: Vec<String> = (0..4).map(|q| op.conjugate(&z(4, q)).unwrap().to_string()).collect();
    v.sort();
    v
}

#[test]
fn unit_cell_r1_gives_star_plus_byproducts() {
    let got = sum_image(&unit_cell_r1());
    let mut expected: Vec<String> =
        ["+XXXX", "+XIXI", "+IIXX", "-XIII"].iter().map(|s| s.to_string()).collect();
    expected.sort();
    assert_eq!(got, expected);
}

#[test]
fn unit_cell_average_is_the_star() {
    let r1 = unit_cell_r1();
    let r2 = unit_cell_r2();
    let both = Operation::new(r2.layers.iter().chain(&r1.layers).cloned().collect());
    let mut total: std::collections::BTreeMap<String, i32> = Default::default();
    for op in [&r1, &both] {
        for q in 0..4 {
            let p = op.conjugate(&z(4, q)).unwrap();
            let sign = if p.phase() == 0 { 1 } else { -1 };
            *total.entry(body(&p)).or_default() += sign;
        }
    }
    total.retain(|_, v| *v != 0);
    assert_eq!(total.into_iter().collect::<Vec<_>>(), vec![("XXXX".to_string(), 2)]);
}

fn dense_product(schedule: &PulseSchedule) -> CMatrix {
    let n = schedule.n_qubits;
    let d = 1 << n;
    let mut u = CMatrix::identity(d, d);
    for seg in &schedule.segments {
        for layer in seg.operation.layers.iter().rev() {
            for p in layer {
                u = pulse_unitary(p, n, &[]) * u;
            }
        }
    }
    u
}

#[test]
fn nominal_product_is_identity_dense() {
    let geom = Geometry::new(2).unwrap();
    for s in [
        build_full_symmetric_sequence(&geom, 0.125).unwrap(),
        build_quarter_sequence(&geom, 2, 0.125).unwrap(),
    ] {
        let u = dense_product(&s);
        let ph = u[(0, 0)];
        assert!((ph.norm() - 1.0).abs() < 1e-12);
        let id = CMatrix::identity(u.nrows(), u.ncols()) * ph;
        assert!((u - id).iter().all(|v| v.norm() < 1e-12));
    }
}

#[test]
fn nominal_product_is_identity_symbolic() {
    for l in 2..=4 {
        let geom = Geometry::new(l).unwrap();
        assert!(build_full_symmetric_sequence(&geom, 0.1).unwrap().is_nominal_identity().unwrap());
        for q in 0..4 {
            assert!(build_quarter_sequence(&geom, q, 0.1).unwrap().is_nominal_identity().unwrap());
        }
    }
}

#[test]
fn symmetric_sequence_counts_and_mirror() {
    for l in [2, 3] {
        let geom = Geometry::new(l).unwrap();
        let s = build_full_symmetric_sequence(&geom, 0.125).unwrap();
        assert_eq!(s.operation_count(), 32);
        assert_eq!(s.frame_count(), 24);
        assert!((s.duration() - 0.25).abs() < 1e-15);
        for j in 16..32 {
            assert_eq!(s.segments[j].operation, s.segments[31 - j].operation.inverse());
        }
        let frames: Vec<usize> = (0..32).filter(|&j| s.segments[j].wait > 0.0).collect();
        let n = geom.n_qubits;
        for i in 12..24 {
            let (a, b) = (frames[i], frames[23 - i]);
            assert_eq!(s.segments[a].wait, s.segments[b].wait);
            for q in 0..n {
                assert_eq!(s.frame_image(&z(n, q), a).unwrap(), s.frame_image(&z(n, q), b).unwrap());
            }
        }
    }
}

#[test]
fn invalid_periods_are_rejected() {
    let geom = Geometry::new(2).unwrap();
    assert!(build_full_symmetric_sequence(&geom, 0.0).is_err());
    assert!(build_quarter_sequence(&geom, 0, -1.0).is_err());
}

#[test]
fn inverse_pair_count_is_half_the_pulses_per_period() {
    let geom = Geometry::new(3).unwrap();
    let s = build_full_symmetric_sequence(&geom, 0.125).unwrap();
    assert_eq!(count_inverse_pairs(&s) * 4, s.elementary_pulse_count());
}

#[test]
fn prep_plan_has_two_steps_for_l3() {
    let geom = Geometry::new(3).unwrap();
    let stabs = StabilizerSet::new(&geom);
    let plan = prep_step_plan(&geom, &stabs);
    assert_eq!(plan.len(), 2);
    assert_eq!(plan.iter().map(|p| p.0.len()).sum::<usize>(), 6);
}

#[test]
fn prep_plan_respects_ordering() {
    for l in 2..=6 {
        let geom = Geometry::new(l).unwrap();
        let stabs = StabilizerSet::new(&geom);
        let plan = prep_step_plan(&geom, &stabs);
        assert!(plan.len() <= l * (l - 1));
        assert_eq!(plan.iter().map(|p| p.0.len()).sum::<usize>(), stabs.of_kind(StabilizerKind::Star).count());
        let mut touched = vec![false; geom.n_qubits];
        for (sites, pins) in &plan {
            let mut in_step = vec![false; geom.n_qubits];
            for (site, &pin) in sites.iter().zip(pins) {
                let s = stabs.find(*site).unwrap();
                assert!(s.support.contains(&pin));
                assert!(!touched[pin], "L={l}: pinned qubit {pin} touched earlier");
                for &q in &s.support {
                    assert!(!in_step[q], "stars within a step overlap");
                    in_step[q] = true;
                }
            }
            for (t, i) in touched.iter_mut().zip(in_step) {
                *t |= i;
            }
        }
    }
}

#[test]
fn prep_steps_generate_modified_stars() {
    for l in [2, 3, 4] {
        let geom = Geometry::new(l).unwrap();
        let stabs = StabilizerSet::new(&geom);
        let steps = build_prep_sequence(&geom, &stabs, 1.0).unwrap();
        for step in &steps {
            assert!((step.duration - std::f64::consts::PI / 4.0).abs() < 1e-15);
            assert!(step.schedule.is_nominal_identity().unwrap());
            for (g, (&pin, site)) in step.generators.iter().zip(step.pinned.iter().zip(&step.stars)) {
                let support = &stabs.find(*site).unwrap().support;
                assert_eq!(g.phase(), 2);
                for &q in support {
                    let a = if q == pin { Axis::Y } else { Axis::X };
                    assert_eq!(g.axis_at(q), Some(a));
                }
            }
        }
    }
}

#[test]
fn single_star_prep_identity() {
    // exp(iπÃ/4)|0000⟩ = (1 + A)/√2 |0000⟩ with Ã = −Y₀X₁X₂X₃.
    let a: PauliString = "-YXXX".parse().unwrap();
    let star: PauliString = "XXXX".parse().unwrap();
    let d = 16;
    let id = CMatrix::identity(d, d);
    let u = (&id + pauli_matrix(&a) * Complex64::i()) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rhs = (&id + pauli_matrix(&star)) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for r in 0..d {
        assert!((u[(r, 0)] - rhs[(r, 0)]).norm() < 1e-14);
    }
}
