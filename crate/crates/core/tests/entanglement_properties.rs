mod common;

use common::*;
use ghz_decay::entanglement::{
    enumerate_cuts, max_negativity, negativity, partial_transpose, trace_norm_negativity,
    Bipartition, CutPolicy,
};
use ghz_decay::linalg::{eigvalsh, CMatrix, ZERO};
use ghz_decay::qstate::{density_from_pure, DensityMatrix, PureState};
use ghz_decay::sampling::{haar_random_pure, random_mixed};
use num_complex::Complex64;
use proptest::prelude::*;

/// Reduced state on side A of a pure state, built from the amplitude
/// matrix M[a][b] with ρ_A = M M†.
fn reduced_on(psi: &PureState, cut: &Bipartition) -> CMatrix {
    let n = psi.num_qubits();
    let a_qubits = cut.side_a_qubits();
    let b_qubits: Vec<usize> = (0..n).filter(|q| !a_qubits.contains(q)).collect();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let (da, db) = (1 << a_qubits.len(), 1 << b_qubits.len());
    let mut m = vec![vec![ZERO; db]; da];
    for (idx, &amp) in psi.amplitudes().iter().enumerate() {
        let a = a_qubits.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q));
        let b = b_qubits.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q));
        m[a][b] = amp;
    }
    CMatrix::from_fn(da, |i, j| (0..db).map(|k| m[i][k] * m[j][k].conj()).sum())
}

/// Pure-state negativity from Schmidt coefficients: ((Σ√λ)² − 1)/2.
fn schmidt_negativity(psi: &PureState, cut: &Bipartition) -> f64 {
    let lambdas = eigvalsh(&reduced_on(psi, cut)).unwrap();
    let s: f64 = lambdas.iter().map(|l| l.max(0.0).sqrt()).sum();
    (s * s - 1.0) / 2.0
}

#[test]
fn pure_states_match_schmidt_oracle() {
    let mut r = rng(20);
    for n in 2..=5 {
        for _ in 0..5 {
            let psi = haar_random_pure(n, &mut r).unwrap();
            let rho = density_from_pure(&psi);
            for cut in enumerate_cuts(n, CutPolicy::All).unwrap() {
                let lib = negativity(&rho, &cut).unwrap().value;
                assert!((lib - schmidt_negativity(&psi, &cut)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn product_states_have_zero_negativity() {
    let mut r = rng(21);
    for n in 2..=4 {
        let mut rho = product_state(n, &mut r);
        for _ in 0..3 {
            rho = rho.mix(&product_state(n, &mut r), 0.4).unwrap();
        }
        for cut in enumerate_cuts(n, CutPolicy::All).unwrap() {
            assert_eq!(negativity(&rho, &cut).unwrap().value, 0.0);
        }
    }
}

#[test]
fn local_unitaries_leave_negativity_unchanged() {
    let mut r = rng(22);
    let rho = random_mixed(4, 2, &mut r).unwrap();
    let u = (0..4).fold(CMatrix::identity(1), |acc, _| {
        acc.kron(&mat2_to_cmatrix(&random_unitary2(&mut r)))
    });
    let rotated = conjugate(&rho, &u);
    for cut in enumerate_cuts(4, CutPolicy::All).unwrap() {
        let a = negativity(&rho, &cut).unwrap().value;
        let b = negativity(&rotated, &cut).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn negativity_is_convex() {
    let mut r = rng(23);
    let cut = enumerate_cuts(3, CutPolicy::LeastBalanced).unwrap()[0];
    for _ in 0..20 {
        let a = density_from_pure(&haar_random_pure(3, &mut r).unwrap());
        let b = density_from_pure(&haar_random_pure(3, &mut r).unwrap());
        for w in [0.1, 0.5, 0.8] {
            let mixed = a.mix(&b, w).unwrap();
            let lhs = negativity(&mixed, &cut).unwrap().value;
            let rhs = w * negativity(&a, &cut).unwrap().value
                + (1.0 - w) * negativity(&b, &cut).unwrap().value;
            assert!(lhs <= rhs + 1e-12);
        }
    }
}

#[test]
fn paired_bell_states_reach_the_maximum() {
    // Bell pairs on qubits (0, 2) and (1, 3).
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = [Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(h, 0.0)];
    let mut amps = vec![ZERO; 16];
    for (i, a) in amps.iter_mut().enumerate() {
        let (q0, q1, q2, q3) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        *a = bell[q0 * 2 + q2] * bell[q1 * 2 + q3];
    }
    let rho = density_from_pure(&PureState::new(4, amps).unwrap());
    let cut = Bipartition::from_qubits(4, &[0, 1]).unwrap();
    let e = negativity(&rho, &cut).unwrap().value;
    assert!((e - max_negativity(&cut)).abs() < 1e-12);
    assert!((e - 1.5).abs() < 1e-12);
}

#[test]
fn complementary_cuts_agree() {
    let mut r = rng(24);
    let rho = random_mixed(4, 3, &mut r).unwrap();
    let a = Bipartition::from_qubits(4, &[0, 2]).unwrap();
    let b = Bipartition::from_qubits(4, &[1, 3]).unwrap();
    assert_eq!(a, b);
    let pt = partial_transpose(&rho, &a).unwrap();
    assert!(pt.hermiticity_defect() < 1e-15);
    assert!((pt.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn trace_norm_form_agrees() {
    let mut r = rng(25);
    for n in 2..=4 {
        let rho = random_mixed(n, 2, &mut r).unwrap();
        for cut in enumerate_cuts(n, CutPolicy::All).unwrap() {
            let a = negativity(&rho, &cut).unwrap().value;
            let b = trace_norm_negativity(&rho, &cut).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn rank_one_mixture_is_the_pure_state() {
    let mut r = rng(26);
    let rho: DensityMatrix = random_mixed(3, 1, &mut r).unwrap();
    assert!((rho.purity() - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn negativity_lies_between_zero_and_maximum(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let rho = density_from_pure(&haar_random_pure(n, &mut r).unwrap());
        for cut in enumerate_cuts(n, CutPolicy::All).unwrap() {
            let e = negativity(&rho, &cut).unwrap().value;
            prop_assert!(e >= 0.0);
            prop_assert!(e <= max_negativity(&cut) + 1e-12);
        }
    }

    #[test]
    fn canonical_cuts_are_idempotent(n in 2usize..=8, mask in 1u64..255) {
        let mask = mask & ((1u64 << n) - 1);
        prop_assume!(mask != 0 && mask != (1u64 << n) - 1);
        let cut = Bipartition::new(n, mask).unwrap();
        let again = Bipartition::new(n, cut.side_a_mask()).unwrap();
        prop_assert_eq!(cut, again);
        prop_assert!(cut.side_a_size() <= n / 2);
    }
}
