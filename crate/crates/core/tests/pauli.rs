use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_pulse::dense::{pauli_matrix, pulse_unitary, CMatrix};
use toric_pulse::pauli::{
    conjugate, conjugate_by_layer_sequence, Axis, CliffordPulse, PauliString,
};
use toric_pulse::Complex64;

fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    (a - b).iter().all(|v| v.norm() < tol)
}

fn random_pauli(n: usize, rng: &mut impl Rng) -> PauliString {
    let body: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)]).collect();
    let p: PauliString = body.parse().unwrap();
    p.with_phase(rng.gen_range(0..4))
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .map(|mut k| {
            let s: String = (0..n)
                .map(|_| {
                    let c = ['I', 'X', 'Y', 'Z'][k % 4];
                    k /= 4;
                    c
                })
                .collect();
            s.parse().unwrap()
        })
        .collect()
}

#[test]
fn y_is_i_x_z() {
    let x = pauli_matrix(&"X".parse().unwrap());
    let y = pauli_matrix(&"Y".parse().unwrap());
    let z = pauli_matrix(&"Z".parse().unwrap());
    assert!(close(&y, &(&x * &z * Complex64::i()), 1e-14));
    let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]).map(|v: f64| Complex64::new(0.0, v));
    assert!(close(&y, &expected, 1e-14));
}

#[test]
fn products_match_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=5);
        let (a, b, c) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng), random_pauli(n, &mut rng));
        let ab = a.multiply(&b).unwrap();
        assert!(close(&pauli_matrix(&ab), &(pauli_matrix(&a) * pauli_matrix(&b)), 1e-12));
        let left = ab.multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}

#[test]
fn commutation_matches_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let (a, b) = (random_pauli(4, &mut rng), random_pauli(4, &mut rng));
        let (ma, mb) = (pauli_matrix(&a), pauli_matrix(&b));
        let dense = close(&(&ma * &mb), &(&mb * &ma), 1e-12);
        assert_eq!(a.commutes(&b).unwrap(), dense);
    }
}

#[test]
fn inverse_and_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p = random_pauli(6, &mut rng);
        let prod = p.multiply(&p.adjoint()).unwrap();
        assert_eq!(prod, PauliString::identity(6));
    }
}

#[test]
fn rotation_conjugation_matches_dense_on_all_strings() {
    for n in 1..=3 {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for qt in [-2i8, -1, 1, 2] {
                let g = CliffordPulse::rotation(axis, qt, (0..n).step_by(2).collect());
                let u = pulse_unitary(&g, n, &[]);
                for p in all_paulis(n) {
                    let img = conjugate(&p, &g).unwrap();
                    let dense = u.adjoint() * pauli_matrix(&p) * &u;
                    assert!(close(&pauli_matrix(&img), &dense, 1e-12), "{p} under {g:?}");
                }
            }
        }
    }
}

#[test]
fn phase_gate_conjugation_matches_dense() {
    let n = 3;
    for qt in [-1i8, 1] {
        let g = CliffordPulse::PhaseGate { quarter_turns: qt, pairs: vec![(0, 2)] };
        let u = pulse_unitary(&g, n, &[]);
        for p in all_paulis(n) {
            let img = conjugate(&p, &g).unwrap();
            let dense = u.adjoint() * pauli_matrix(&p) * &u;
            assert!(close(&pauli_matrix(&img), &dense, 1e-12));
        }
    }
}

#[test]
fn phase_gate_examples() {
    let g = CliffordPulse::phase_gate(vec![(0, 1)]);
    let x1: PauliString = "XI".parse().unwrap();
    assert_eq!(conjugate(&x1, &g).unwrap().unsigned().to_string(), "+YZ");
    let z1: PauliString = "ZI".parse().unwrap();
    assert_eq!(conjugate(&z1, &g).unwrap(), z1);
    let r = CliffordPulse::rotation(Axis::Y, 1, vec![0]);
    let z: PauliString = "Z".parse().unwrap();
    assert_eq!(conjugate(&z, &r).unwrap().unsigned().to_string(), "+X");
}

#[test]
fn empty_layer_list_is_identity() {
    let p: PauliString = "XYZI".parse().unwrap();
    assert_eq!(conjugate_by_layer_sequence(&p, &[]).unwrap(), p);
}

#[test]
fn text_round_trip() {
    for s in ["+XIZY", "-IIII", "+iXX", "-iZYZ"] {
        let p: PauliString = s.parse().unwrap();
        assert_eq!(p.to_string(), s);
    }
    assert!("XQ".parse::<PauliString>().is_err());
    assert!("".parse::<PauliString>().is_err());
}

#[test]
fn size_mismatch_is_an_error() {
    let a = PauliString::identity(3);
    let b = PauliString::identity(4);
    assert!(a.multiply(&b).is_err());
    assert!(a.commutes(&b).is_err());
}

#[test]
fn invalid_pulses_are_rejected() {
    assert!(CliffordPulse::rotation(Axis::X, 3, vec![0]).validate(2).is_err());
    assert!(CliffordPulse::rotation(Axis::X, 1, vec![0, 0]).validate(2).is_err());
    assert!(CliffordPulse::rotation(Axis::X, 1, vec![5]).validate(2).is_err());
    assert!(CliffordPulse::PhaseGate { quarter_turns: 2, pairs: vec![(0, 1)] }.validate(2).is_err());
}

#[test]
fn wide_strings_use_several_words() {
    let n = 130;
    let a = PauliString::single(n, 100, Axis::X);
    let b = PauliString::single(n, 100, Axis::Z);
    assert!(!a.commutes(&b).unwrap());
    assert_eq!(a.multiply(&b).unwrap().axis_at(100), Some(Axis::Y));
    let g = CliffordPulse::rotation(Axis::Y, 1, vec![100, 129]);
    let img = conjugate(&b, &g).unwrap();
    assert_eq!(img.axis_at(100), Some(Axis::X));
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (proptest::collection::vec(0..4usize, n), 0..4u8).prop_map(move |(v, ph)| {
        let s: String = v.iter().map(|&k| ['I', 'X', 'Y', 'Z'][k]).collect();
        s.parse::<PauliString>().unwrap().with_phase(ph)
    })
}

fn arb_pulse(n: usize) -> impl Strategy<Value = CliffordPulse> {
    prop_oneof![
        (0..3usize, prop_oneof![Just(-2i8), Just(-1), Just(1), Just(2)], proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..n))
            .prop_map(|(a, qt, qs)| CliffordPulse::rotation([Axis::X, Axis::Y, Axis::Z][a], qt, qs)),
        (prop_oneof![Just(-1i8), Just(1)], 0..n - 1)
            .prop_map(|(qt, a)| CliffordPulse::PhaseGate { quarter_turns: qt, pairs: vec![(a, a + 1)] }),
    ]
}

proptest! {
    #[test]
    fn conjugation_preserves_commutation(a in arb_pauli(6), b in arb_pauli(6), g in arb_pulse(6)) {
        let (ca, cb) = (conjugate(&a, &g).unwrap(), conjugate(&b, &g).unwrap());
        prop_assert_eq!(a.commutes(&b).unwrap(), ca.commutes(&cb).unwrap());
    }

    #[test]
    fn conjugation_by_inverse_undoes(a in arb_pauli(6), g in arb_pulse(6)) {
        let back = conjugate(&conjugate(&a, &g).unwrap(), &g.inverse()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn conjugation_is_multiplicative(a in arb_pauli(5), b in arb_pauli(5), g in arb_pulse(5)) {
        let lhs = conjugate(&a.multiply(&b).unwrap(), &g).unwrap();
        let rhs = conjugate(&a, &g).unwrap().multiply(&conjugate(&b, &g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
