#![allow(dead_code)]

use ghz_decay::channels::Mat2;
use ghz_decay::linalg::{CMatrix, ZERO};
use ghz_decay::qstate::{DensityMatrix, GhzMixtureSpec, GhzSpec, Parity};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random (α, β) with |α|² + |β|² = 1 and both nonzero.
pub fn random_amplitudes(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let a2: f64 = rng.gen_range(0.05..0.95);
    let (pa, pb): (f64, f64) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
    (
        Complex64::from_polar(a2.sqrt(), pa),
        Complex64::from_polar((1.0 - a2).sqrt(), pb),
    )
}

pub fn random_parity(rng: &mut impl Rng) -> Parity {
    if rng.gen_bool(0.5) {
        Parity::Plus
    } else {
        Parity::Minus
    }
}

pub fn random_ghz(n: usize, rng: &mut impl Rng) -> GhzSpec {
    let (a, b) = random_amplitudes(rng);
    let k = rng.gen_range(0..1u64 << n);
    GhzSpec::new(n, k, random_parity(rng), a, b).unwrap()
}

/// Random mixture of 1 to 4 generalized GHZ states sharing (α, β), with
/// labels drawn from the canonical half k < k̄.
pub fn random_ghz_mixture(n: usize, rng: &mut impl Rng) -> GhzMixtureSpec {
    let (a, b) = random_amplitudes(rng);
    let terms = rng.gen_range(1..=4);
    let raw: Vec<((u64, Parity), f64)> = (0..terms)
        .map(|_| {
            let k = rng.gen_range(0..1u64 << (n - 1));
            ((k, random_parity(rng)), rng.gen_range(0.05..1.0))
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    GhzMixtureSpec::new(n, a, b, raw.into_iter().map(|(l, w)| (l, w / total))).unwrap()
}

pub fn mat2_to_cmatrix(m: &Mat2) -> CMatrix {
    CMatrix::from_row_major(2, m.to_vec()).unwrap()
}

/// Σ over all |K|^N tensor products K_{i1} ⊗ … ⊗ K_{iN} of K ρ K†,
/// each product built explicitly.
pub fn brute_force_local(rho: &CMatrix, n: usize, kraus: &[Mat2]) -> CMatrix {
    let m = kraus.len();
    let ops: Vec<CMatrix> = kraus.iter().map(mat2_to_cmatrix).collect();
    let mut out = CMatrix::zeros(rho.dim());
    for idx in 0..m.pow(n as u32) {
        let mut k = CMatrix::identity(1);
        let mut rest = idx;
        for _ in 0..n {
            k = k.kron(&ops[rest % m]);
            rest /= m;
        }
        out = out.add(&k.matmul(rho).matmul(&k.adjoint()));
    }
    out
}

/// U ⊗ … ⊗ U for a 2×2 U.
pub fn tensor_power(u: &Mat2, n: usize) -> CMatrix {
    let u = mat2_to_cmatrix(u);
    (0..n).fold(CMatrix::identity(1), |acc, _| acc.kron(&u))
}

pub fn random_unitary2(rng: &mut impl Rng) -> Mat2 {
    // Euler angles; Haar measure is not needed here.
    let (a, b, g, d): (f64, f64, f64, f64) = (
        rng.gen_range(0.0..6.3),
        rng.gen_range(0.0..3.2),
        rng.gen_range(0.0..6.3),
        rng.gen_range(0.0..6.3),
    );
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let ph = Complex64::from_polar(1.0, d);
    [
        ph * Complex64::from_polar(cb, -(a + g) / 2.0),
        ph * -Complex64::from_polar(sb, (g - a) / 2.0),
        ph * Complex64::from_polar(sb, (a - g) / 2.0),
        ph * Complex64::from_polar(cb, (a + g) / 2.0),
    ]
}

pub fn conjugate(rho: &DensityMatrix, u: &CMatrix) -> DensityMatrix {
    let m = u.matmul(rho.matrix()).matmul(&u.adjoint());
    DensityMatrix::from_trusted(rho.num_qubits(), m).unwrap()
}

pub fn product_state(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let mut m = CMatrix::identity(1);
    for _ in 0..n {
        let t: f64 = rng.gen_range(0.0..3.2);
        let ph: f64 = rng.gen_range(0.0..6.3);
        let v = [c(t.cos(), 0.0), Complex64::from_polar(t.sin(), ph)];
        m = m.kron(&CMatrix::outer(&v, &v));
    }
    DensityMatrix::from_trusted(n, m).unwrap()
}

pub fn is_zero_matrix(m: &CMatrix) -> bool {
    m.as_slice().iter().all(|&x| x == ZERO)
}
