use toric_pulse::analysis::{c_av_derived, ModelParams};
use toric_pulse::dense::{eigenvalues_hermitian, expm_hermitian, kron, pauli_matrix, CMatrix};
use toric_pulse::hamiltonian::{
    code_hamiltonian, dense_matrix, free_hamiltonian, quarter_block, quarter_operators, schrieffer_wolff_effective,
    second_order_closed_form, second_order_magnus, time_averaged_a, zeroth_order_average, zeroth_order_closed_form,
    CavityFactor, OperatorSum, TogglingFrameProgram, A_MATRIX, DENSE_CAP, M_MATRIX, V_PRINTED,
};
use toric_pulse::lattice::{Geometry, StabilizerSet};
use toric_pulse::pauli::{Axis, PauliString};
use toric_pulse::sequences::{build_full_symmetric_sequence, build_quarter_sequence};
use toric_pulse::Complex64;

fn system(l: usize) -> (Geometry, StabilizerSet) {
    let g = Geometry::new(l).unwrap();
    let s = StabilizerSet::new(&g);
    (g, s)
}

#[test]
fn cavity_algebra_matches_matrices() {
    // The symbolic brackets are exact for the infinite oscillator; compare away from the truncation edge.
    let nf = 12;
    let one = PauliString::identity(1);
    let f = [CavityFactor::Identity, CavityFactor::Position, CavityFactor::Momentum, CavityFactor::Number];
    for &a in &f {
        for &b in &f {
            let sa = OperatorSum::zero(1).with_term(1.0, &one, a);
            let sb = OperatorSum::zero(1).with_term(1.0, &one, b);
            let sym = dense_matrix(&sa.commutator(&sb).unwrap(), nf, DENSE_CAP).unwrap();
            let (ma, mb) = (a.matrix(nf), b.matrix(nf));
            let num = kron(&(&ma * &mb - &mb * &ma), &CMatrix::identity(2, 2));
            for r in 0..2 * (nf - 2) {
                for c in 0..2 * (nf - 2) {
                    assert!((sym[(r, c)] - num[(r, c)]).norm() < 1e-12, "[{a:?},{b:?}]");
                }
            }
        }
    }
}

#[test]
fn commutator_matches_dense_for_qubit_operators() {
    let a = OperatorSum::zero(3)
        .with_term(0.7, &"XZI".parse().unwrap(), CavityFactor::Identity)
        .with_term(-0.2, &"IYY".parse().unwrap(), CavityFactor::Position);
    let b = OperatorSum::zero(3)
        .with_term(1.3, &"ZZZ".parse().unwrap(), CavityFactor::Identity)
        .with_term(0.4, &"YII".parse().unwrap(), CavityFactor::Identity);
    let nf = 3;
    let (ma, mb) = (dense_matrix(&a, nf, DENSE_CAP).unwrap(), dense_matrix(&b, nf, DENSE_CAP).unwrap());
    let sym = dense_matrix(&a.commutator(&b).unwrap(), nf, DENSE_CAP).unwrap();
    assert!((&ma * &mb - &mb * &ma - sym).iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn trace_identity() {
    for l in [2, 3, 4] {
        let (g, s) = system(l);
        let q = quarter_operators(&s, g.n_qubits, 1.0);
        for k in 0..4 {
            for m in 0..4 {
                let tr = q[k].product(&q[m]).unwrap().qubit_trace();
                let expected = if k == m { (l * (l - 1) / 2) as f64 } else { 0.0 };
                assert!((tr - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn zeroth_order_average_of_symmetric_sequence() {
    for l in [2, 3] {
        let (g, s) = system(l);
        let n = g.n_qubits;
        let (dg, d, w) = (1.3, 0.1, 0.9);
        let h0 = free_hamiltonian(n, dg, d, w).unwrap();
        let sched = build_full_symmetric_sequence(&g, 0.125).unwrap();
        let program = TogglingFrameProgram::new(&sched, &h0).unwrap();
        assert_eq!(program.frames.len(), 24);
        let avg = zeroth_order_average(&program).unwrap();
        assert!(avg.approx_eq(&zeroth_order_closed_form(&s, n, dg, d, w), 1e-12));
    }
}

#[test]
fn single_quarter_average_is_the_quarter_block() {
    let (g, s) = system(3);
    let n = g.n_qubits;
    let q = quarter_operators(&s, n, 1.0);
    let h0 = free_hamiltonian(n, 1.0, 0.1, 1.0).unwrap();
    for k in 0..4 {
        let sched = build_quarter_sequence(&g, k, 0.125).unwrap();
        let program = TogglingFrameProgram::new(&sched, &h0).unwrap();
        let avg = zeroth_order_average(&program).unwrap();
        assert!(avg.approx_eq(&quarter_block(&q[k], 1.0, 0.1, 1.0), 1e-12));
        // Frames A, B, A: the first Magnus order Σ_{j>k} [H_j, H_k] t_j t_k vanishes.
        let f = &program.frames;
        let mut first = OperatorSum::zero(n);
        for j in 0..f.len() {
            for m in 0..j {
                let c = f[j].hamiltonian.commutator(&f[m].hamiltonian).unwrap();
                first = first.add(&c.scale(f[j].duration * f[m].duration));
            }
        }
        assert!(first.max_abs_coefficient() < 1e-12);
    }
}

#[test]
fn second_order_magnus_matches_closed_form() {
    for l in [2, 3] {
        let (g, s) = system(l);
        let n = g.n_qubits;
        for &(dg, d, w, t) in &[(1.0, 0.1, 1.0, 0.125), (1.0, 0.05, 0.7, 0.2), (2.0, 0.1, 1.5, 0.1)] {
            let q = quarter_operators(&s, n, dg);
            let blocks: Vec<OperatorSum> = q.iter().map(|x| quarter_block(x, dg, d, w)).collect();
            let magnus = second_order_magnus(&blocks, t).unwrap();
            let closed = second_order_closed_form(&q, t, d, w, dg).unwrap();
            assert!(magnus.is_hermitian(1e-14));
            assert!(magnus.approx_eq(&closed, 1e-13), "L={l} Δ={dg} δ={d} ω₀={w} T={t}");
        }
    }
}

#[test]
fn second_order_vanishes_without_coupling() {
    let (g, s) = system(3);
    let q = quarter_operators(&s, g.n_qubits, 1.0);
    let blocks: Vec<OperatorSum> = q.iter().map(|x| quarter_block(x, 1.0, 0.0, 1.0)).collect();
    assert!(second_order_magnus(&blocks, 0.125).unwrap().is_empty());
    assert!(second_order_closed_form(&q, 0.125, 0.0, 1.0, 1.0).unwrap().is_empty());
}

#[test]
fn nested_commutator_identity() {
    // [Q_l,[Q_k,Q_j]] = −δω₀[2δQ_l + ω₀ x](Q_k − Q_j) for blocks (1 + δx)Q_i + ω₀ n, Δ = 1.
    let (g, s) = system(3);
    let n = g.n_qubits;
    let (d, w) = (0.1, 0.8);
    let q = quarter_operators(&s, n, 1.0);
    let printed: Vec<OperatorSum> = q
        .iter()
        .map(|x| {
            let mut o = x.clone();
            for (p, _, c) in x.terms() {
                o.add_term(c * d, p, CavityFactor::Position);
            }
            o.with_term(w, &PauliString::identity(n), CavityFactor::Number)
        })
        .collect();
    let xop = OperatorSum::zero(n).with_term(1.0, &PauliString::identity(n), CavityFactor::Position);
    for l in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                let lhs = printed[l].commutator(&printed[k].commutator(&printed[j]).unwrap()).unwrap();
                let pre = q[l].scale(2.0 * d).add(&xop.scale(w));
                let rhs = pre.product(&q[k].sub(&q[j])).unwrap().scale(-d * w);
                assert!(lhs.approx_eq(&rhs, 1e-13), "l={l} k={k} j={j}");
            }
        }
    }
}

#[test]
fn averaged_matrix_follows_from_displacement() {
    // A = 2M + 3·1Vᵀ entrywise, from x → −2δ H_PC/(ω₀Δ) in the corrected second-order term.
    for k in 0..4 {
        for l in 0..4 {
            assert_eq!(A_MATRIX[k][l], 2.0 * M_MATRIX[k][l] + 3.0 * V_PRINTED[l]);
        }
    }
    let (g, s) = system(3);
    let n = g.n_qubits;
    let (dg, d, w, t) = (1.0, 0.1, 1.0, 0.125);
    let q = quarter_operators(&s, n, dg);
    let h2 = second_order_closed_form(&q, t, d, w, dg).unwrap();
    let xbar = code_hamiltonian(&s, n, dg).scale(-2.0 * d / (w * dg));
    let mut displaced = OperatorSum::zero(n);
    for (p, f, c) in h2.terms() {
        let term = OperatorSum::zero(n).with_term(c, p, CavityFactor::Identity);
        displaced = match f {
            CavityFactor::Identity => displaced.add(&term),
            CavityFactor::Position => displaced.add(&term.product(&xbar).unwrap()),
            _ => panic!("unexpected cavity factor"),
        };
    }
    assert!(displaced.approx_eq(&time_averaged_a(&q, t, d, w, dg).unwrap(), 1e-15));
}

#[test]
fn derived_quadratic_coefficient_is_the_variance_of_a() {
    for l in [2, 3, 4] {
        let (g, s) = system(l);
        let p = ModelParams { l, ..ModelParams::default() };
        let q = quarter_operators(&s, g.n_qubits, p.delta_gap);
        let a = time_averaged_a(&q, p.period, p.delta, p.omega0, p.delta_gap).unwrap();
        let mean = a.qubit_trace().re;
        let var = a.product(&a).unwrap().qubit_trace().re - mean * mean;
        assert!((var / 2.0 - c_av_derived(&p)).abs() < 1e-12 * var, "L={l}");
    }
}

#[test]
fn free_hamiltonian_dense_form() {
    let h = free_hamiltonian(2, 1.0, 0.1, 1.0).unwrap();
    let m = dense_matrix(&h, 3, DENSE_CAP).unwrap();
    let z = |q| pauli_matrix(&PauliString::single(2, q, Axis::Z));
    let x = CavityFactor::Position.matrix(3);
    let id3 = CMatrix::identity(3, 3);
    let id4 = CMatrix::identity(4, 4);
    let s = z(0) + z(1);
    let expected = kron(&id3, &s) * Complex64::new(-4.0, 0.0)
        + kron(&x, &s) * Complex64::new(-0.4, 0.0)
        + kron(&CavityFactor::Number.matrix(3), &id4);
    assert!((m - expected).iter().all(|v| v.norm() < 1e-14));
    assert!(free_hamiltonian(2, 0.0, 0.1, 1.0).is_err());
    assert!(dense_matrix(&h, 1 << 20, DENSE_CAP).is_err());
}

fn sector_ground(h: &CMatrix, proj: &CMatrix) -> f64 {
    let id = CMatrix::identity(h.nrows(), h.ncols());
    let m = proj * h * proj + (&id - proj) * Complex64::new(1e3, 0.0);
    eigenvalues_hermitian(&m)[0]
}

#[test]
fn schrieffer_wolff_matches_exact_sector_energies() {
    let (g, s) = system(2);
    let n = g.n_qubits;
    let (dg, d, w, nf) = (1.0, 0.02, 1.0, 10);
    let exact = dense_matrix(&zeroth_order_closed_form(&s, n, dg, d, w), nf, DENSE_CAP).unwrap();
    let eff = dense_matrix(&schrieffer_wolff_effective(&s, n, dg, d, w), 1, DENSE_CAP).unwrap();
    let ops = s.operators();
    let d_q = 1 << n;
    // The effective model drops the constant −(δ²/ω₀)·(number of stabilizers).
    let offset = ops.len() as f64 * d * d / w;
    for signs in 0..(1 << ops.len()) {
        let mut proj = CMatrix::identity(d_q, d_q);
        for (a, op) in ops.iter().enumerate() {
            let sgn = if signs >> a & 1 == 0 { 1.0 } else { -1.0 };
            proj = proj * (CMatrix::identity(d_q, d_q) + pauli_matrix(op) * Complex64::new(sgn, 0.0)) * Complex64::new(0.5, 0.0);
        }
        let big = kron(&CMatrix::identity(nf, nf), &proj);
        let e_exact = sector_ground(&exact, &big);
        let e_eff = sector_ground(&eff, &proj) - offset;
        assert!((e_exact - e_eff).abs() < 1e-9, "sector {signs:04b}: {e_exact} vs {e_eff}");
    }
}

#[test]
fn dense_expm_is_unitary() {
    let h = dense_matrix(&free_hamiltonian(2, 1.0, 0.1, 1.0).unwrap(), 3, DENSE_CAP).unwrap();
    let u = expm_hermitian(&h, 0.7);
    let id = CMatrix::identity(12, 12);
    assert!((u.adjoint() * &u - id).iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn first_order_term_vanishes_for_symmetric_sequence() {
    for l in [2, 3] {
        let (g, s) = system(l);
        let q = quarter_operators(&s, g.n_qubits, 1.0);
        let blocks: Vec<OperatorSum> = q.iter().map(|x| quarter_block(x, 1.0, 0.1, 1.0)).collect();
        let seq: Vec<&OperatorSum> = [0, 1, 2, 3, 3, 2, 1, 0].iter().map(|&k| &blocks[k]).collect();
        let mut tot = OperatorSum::zero(g.n_qubits);
        for k in 0..seq.len() {
            for j in 0..k {
                tot = tot.add(&seq[k].commutator(seq[j]).unwrap());
            }
        }
        assert!(tot.prune(1e-14).is_empty(), "L={l}");
        // The forward-only order leaves a first-order term.
        let mut fwd = OperatorSum::zero(g.n_qubits);
        for k in 0..4 {
            for j in 0..k {
                fwd = fwd.add(&blocks[k].commutator(&blocks[j]).unwrap());
            }
        }
        assert!(!fwd.prune(1e-14).is_empty());
    }
}
