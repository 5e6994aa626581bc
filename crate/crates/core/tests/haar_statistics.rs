mod common;

use common::*;
use ghz_decay::sampling::{haar_random_pure, substream};
use num_complex::Complex64;

const SAMPLES: usize = 20_000;

/// Kolmogorov–Smirnov distance between a sample and a CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_qubit_population_is_uniform() {
    let mut r = rng(30);
    let pops: Vec<f64> = (0..SAMPLES)
        .map(|_| haar_random_pure(1, &mut r).unwrap().amplitudes()[0].norm_sqr())
        .collect();
    let mean = pops.iter().sum::<f64>() / SAMPLES as f64;
    // |a0|² ~ U(0, 1): variance 1/12.
    let se = (1.0 / 12.0 / SAMPLES as f64).sqrt();
    assert!((mean - 0.5).abs() < 4.0 * se, "mean {mean}");
    assert!(ks_distance(pops, |x| x) < 1.63 / (SAMPLES as f64).sqrt());
}

#[test]
fn two_qubit_reduced_purity_averages_four_fifths() {
    let mut r = rng(31);
    let purities: Vec<f64> = (0..SAMPLES)
        .map(|_| {
            let a = haar_random_pure(2, &mut r).unwrap();
            let a = a.amplitudes();
            // ρ_A from the 2×2 amplitude matrix.
            let r00 = a[0].norm_sqr() + a[1].norm_sqr();
            let r11 = a[2].norm_sqr() + a[3].norm_sqr();
            let r01 = a[0] * a[2].conj() + a[1] * a[3].conj();
            r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr()
        })
        .collect();
    let n = SAMPLES as f64;
    let mean = purities.iter().sum::<f64>() / n;
    let var = purities.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 0.8).abs() < 4.0 * (var / n).sqrt(), "mean {mean}");
}

#[test]
fn overlaps_are_unitarily_invariant() {
    // For Haar states in dimension d, |⟨φ|ψ⟩|² ~ Beta(1, d − 1) for every
    // fixed φ; compare a basis vector and a random direction.
    let mut r = rng(32);
    let phi = haar_random_pure(2, &mut r).unwrap();
    let cdf = |x: f64| 1.0 - (1.0 - x).powi(3);
    let (mut basis, mut rotated) = (Vec::new(), Vec::new());
    for _ in 0..SAMPLES {
        let psi = haar_random_pure(2, &mut r).unwrap();
        basis.push(psi.amplitudes()[0].norm_sqr());
        let ov: Complex64 = phi.inner(&psi);
        rotated.push(ov.norm_sqr());
    }
    let crit = 1.63 / (SAMPLES as f64).sqrt();
    assert!(ks_distance(basis, cdf) < crit);
    assert!(ks_distance(rotated, cdf) < crit);
}

#[test]
fn substreams_are_reproducible_and_distinct() {
    let a = haar_random_pure(3, &mut substream(5, 17)).unwrap();
    let b = haar_random_pure(3, &mut substream(5, 17)).unwrap();
    let c = haar_random_pure(3, &mut substream(5, 18)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
