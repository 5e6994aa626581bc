//! Pure states, density matrices and the generalized GHZ families.
//!
//! Basis labels follow the big-endian convention: qubit 0 is the most
//! significant bit, so |010⟩ is label 2.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{eigvalsh, CMatrix, ZERO};
use crate::{Error, Result};

/// Tolerance for norms, traces and Hermiticity at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Slack allowed below zero for the smallest eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Hard ceiling on register size; the configurable cap lives in the harness.
pub const MAX_SUPPORTED_QUBITS: usize = 15;

fn check_num_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_SUPPORTED_QUBITS {
        return Err(Error::domain(format!(
            "number of qubits must be in 1..={MAX_SUPPORTED_QUBITS}, got {num_qubits}"
        )));
    }
    Ok(())
}

/// Bit position (counted from the least significant end) of qubit `q`.
#[inline]
pub(crate) fn qubit_shift(num_qubits: usize, q: usize) -> usize {
    num_qubits - 1 - q
}

/// Bitwise complement of `k` within `num_qubits` bits.
pub fn bitflip(k: u64, num_qubits: usize) -> Result<u64> {
    check_num_qubits(num_qubits)?;
    let all = (1u64 << num_qubits) - 1;
    if k > all {
        return Err(Error::domain(format!(
            "basis label {k} out of range for {num_qubits} qubits"
        )));
    }
    Ok(all ^ k)
}

/// Number of ones in the binary string of `k` (excitations in |k⟩).
pub fn hamming_weight(k: u64) -> u32 {
    k.count_ones()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::validation(format!(
                "expected {} amplitudes for {num_qubits} qubits, got {}",
                1usize << num_qubits,
                amplitudes.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::validation("non-finite amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::validation(format!(
                "state norm squared is {norm}, expected 1"
            )));
        }
        Ok(PureState {
            num_qubits,
            amplitudes,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(num_qubits, amplitudes)
    }

    /// Computational basis state |k⟩.
    pub fn basis(num_qubits: usize, k: u64) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if k as usize >= dim {
            return Err(Error::domain(format!("basis label {k} out of range")));
        }
        let mut amps = vec![ZERO; dim];
        amps[k as usize] = Complex64::new(1.0, 0.0);
        Self::new(num_qubits, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. Positivity needs a
    /// full eigendecomposition; use [`DensityMatrix::from_trusted`] for
    /// outputs of trace-preserving completely positive maps.
    pub fn new(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let rho = Self::check_shape(num_qubits, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks shape only. Intended for matrices produced by CPTP maps
    /// applied to already-valid states.
    pub fn from_trusted(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        Self::check_shape(num_qubits, matrix)
    }

    fn check_shape(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        if matrix.dim() != 1 << num_qubits {
            return Err(Error::validation(format!(
                "matrix dimension {} does not match {num_qubits} qubits",
                matrix.dim()
            )));
        }
        Ok(DensityMatrix { num_qubits, matrix })
    }

    /// Full invariant check: Hermitian, unit trace, PSD within slack.
    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if m.as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::validation("non-finite matrix entry"));
        }
        let defect = m.hermiticity_defect();
        if defect > CONSTRUCTION_TOL {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > CONSTRUCTION_TOL || tr.im.abs() > CONSTRUCTION_TOL {
            return Err(Error::validation(format!("trace is {tr}, expected 1")));
        }
        let min_ev = self.min_eigenvalue()?;
        if min_ev < -PSD_TOL {
            return Err(Error::validation(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_ev:e})"
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigvalsh(&self.matrix)?.first().copied().unwrap_or(0.0))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.matrix.get(r, c)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_rc|² for Hermitian ρ.
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Convex combination `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<DensityMatrix> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::domain("cannot mix states of different size"));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::domain(format!(
                "mixing weight {weight} outside [0, 1]"
            )));
        }
        let m = self
            .matrix
            .scale(Complex64::new(weight, 0.0))
            .add(&other.matrix.scale(Complex64::new(1.0 - weight, 0.0)));
        Self::from_trusted(self.num_qubits, m)
    }
}

/// ρ = |ψ⟩⟨ψ|.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    DensityMatrix {
        num_qubits: psi.num_qubits,
        matrix: CMatrix::outer(&psi.amplitudes, &psi.amplitudes),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Plus => Parity::Minus,
            Parity::Minus => Parity::Plus,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        })
    }
}

fn check_amplitude_pair(alpha: Complex64, beta: Complex64) -> Result<()> {
    if alpha == ZERO || beta == ZERO {
        return Err(Error::validation(
            "alpha and beta must both be nonzero (otherwise the state is a product state)",
        ));
    }
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::validation(format!(
            "|alpha|^2 + |beta|^2 = {norm}, expected 1"
        )));
    }
    Ok(())
}

/// Parameters of the generalized GHZ state α|k⟩ ± β|k̄⟩, stored in the
/// canonical form `label_k < bitflip(label_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzSpec {
    num_qubits: usize,
    label_k: u64,
    parity: Parity,
    alpha: Complex64,
    beta: Complex64,
}

impl GhzSpec {
    /// Validates and canonicalizes. If `k > k̄` the pair is relabelled:
    /// α|k⟩ ± β|k̄⟩ = ±(β|k̄⟩ ± α|k⟩), which is the same ray.
    pub fn new(
        num_qubits: usize,
        label_k: u64,
        parity: Parity,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::domain(
                "generalized GHZ states need at least 2 qubits",
            ));
        }
        let flipped = bitflip(label_k, num_qubits)?;
        check_amplitude_pair(alpha, beta)?;
        let spec = if label_k < flipped {
            GhzSpec {
                num_qubits,
                label_k,
                parity,
                alpha,
                beta,
            }
        } else {
            GhzSpec {
                num_qubits,
                label_k: flipped,
                parity,
                alpha: beta,
                beta: alpha,
            }
        };
        Ok(spec)
    }

    /// The balanced GHZ state (|0…0⟩ + |1…1⟩)/√2.
    pub fn balanced(num_qubits: usize) -> Result<Self> {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(num_qubits, 0, Parity::Plus, a, a)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn label_k(&self) -> u64 {
        self.label_k
    }

    pub fn label_k_flipped(&self) -> u64 {
        ((1u64 << self.num_qubits) - 1) ^ self.label_k
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Excitation count κ of |k⟩ for the canonical label.
    pub fn kappa(&self) -> u32 {
        hamming_weight(self.label_k)
    }

    pub fn with_parity(&self, parity: Parity) -> GhzSpec {
        GhzSpec { parity, ..*self }
    }
}

/// α|k⟩ ± β|k̄⟩.
pub fn make_generalized_ghz(spec: &GhzSpec) -> PureState {
    let mut amps = vec![ZERO; 1 << spec.num_qubits];
    amps[spec.label_k as usize] = spec.alpha;
    amps[spec.label_k_flipped() as usize] = spec.beta * spec.parity.sign();
    PureState {
        num_qubits: spec.num_qubits,
        amplitudes: amps,
    }
}

/// Weights λ_k^± of an incoherent mixture of generalized GHZ states sharing
/// the amplitudes α and β.
#[derive(Clone, Debug, PartialEq)]
pub struct GhzMixtureSpec {
    num_qubits: usize,
    alpha: Complex64,
    beta: Complex64,
    weights: BTreeMap<(u64, Parity), f64>,
}

impl GhzMixtureSpec {
    /// Labels are canonicalized with the same rule as [`GhzSpec::new`];
    /// weights of entries naming the same state are merged. With k > k̄ the
    /// relabelled state carries amplitudes (β, α), so mixtures are only
    /// accepted when every listed label is already on one side or α and β
    /// coincide in modulus and phase.
    pub fn new(
        num_qubits: usize,
        alpha: Complex64,
        beta: Complex64,
        weights: impl IntoIterator<Item = ((u64, Parity), f64)>,
    ) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::domain(
                "generalized GHZ states need at least 2 qubits",
            ));
        }
        check_amplitude_pair(alpha, beta)?;
        let mut merged = BTreeMap::new();
        let mut total = 0.0;
        for ((k, parity), w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(format!(
                    "mixture weight for ({k}, {parity}) must be finite and nonnegative, got {w}"
                )));
            }
            let flipped = bitflip(k, num_qubits)?;
            if k > flipped && alpha != beta {
                return Err(Error::validation(format!(
                    "label {k} is not canonical (use {flipped}); with alpha != beta it names a different amplitude pair"
                )));
            }
            let key = (k.min(flipped), parity);
            *merged.entry(key).or_insert(0.0) += w;
            total += w;
        }
        if merged.is_empty() {
            return Err(Error::validation("mixture has no weights"));
        }
        if (total - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::validation(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(GhzMixtureSpec {
            num_qubits,
            alpha,
            beta,
            weights: merged,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn weights(&self) -> &BTreeMap<(u64, Parity), f64> {
        &self.weights
    }

    /// Component state for a canonical key.
    pub fn component(&self, k: u64, parity: Parity) -> Result<GhzSpec> {
        GhzSpec::new(self.num_qubits, k, parity, self.alpha, self.beta)
    }
}

/// ρ = Σ λ_k^± |ψ_k^±⟩⟨ψ_k^±|. Entries outside the (k, k̄) blocks are
/// exactly zero.
pub fn make_ghz_diagonal(spec: &GhzMixtureSpec) -> DensityMatrix {
    let n = spec.num_qubits;
    let mut m = CMatrix::zeros(1 << n);
    let (a, b) = (spec.alpha, spec.beta);
    for (&(k, parity), &w) in &spec.weights {
        if w == 0.0 {
            continue;
        }
        let kf = ((1u64 << n) - 1) ^ k;
        let (k, kf) = (k as usize, kf as usize);
        let sb = b * parity.sign();
        let wc = Complex64::new(w, 0.0);
        let add = |m: &mut CMatrix, r: usize, c: usize, v: Complex64| {
            let cur = m.get(r, c);
            m.set(r, c, cur + wc * v);
        };
        add(&mut m, k, k, a * a.conj());
        add(&mut m, k, kf, a * sb.conj());
        add(&mut m, kf, k, sb * a.conj());
        add(&mut m, kf, kf, sb * sb.conj());
    }
    DensityMatrix {
        num_qubits: n,
        matrix: m,
    }
}

/// Snapshot of a state for reproducibility files.
///
/// JSON form: `{"num_qubits": N, "kind": "pure"|"density", "data": [[re, im], ...]}`
/// with `data` row-major for density matrices.
///
/// Binary form (little endian): magic `GHZS`, version byte `1`, kind byte
/// (`0` pure, `1` density), `u32` qubit count, then `(re, im)` pairs as
/// IEEE-754 `f64`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub num_qubits: usize,
    pub kind: SnapshotKind,
    pub data: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotKind {
    Pure,
    Density,
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"GHZS";
const SNAPSHOT_VERSION: u8 = 1;

impl StateSnapshot {
    pub fn from_pure(psi: &PureState) -> Self {
        StateSnapshot {
            num_qubits: psi.num_qubits,
            kind: SnapshotKind::Pure,
            data: psi.amplitudes.clone(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        StateSnapshot {
            num_qubits: rho.num_qubits,
            kind: SnapshotKind::Density,
            data: rho.matrix.as_slice().to_vec(),
        }
    }

    /// Validated density matrix of the snapshot (pure states are lifted).
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self.kind {
            SnapshotKind::Pure => Ok(density_from_pure(&PureState::new(
                self.num_qubits,
                self.data.clone(),
            )?)),
            SnapshotKind::Density => {
                check_num_qubits(self.num_qubits)?;
                let m = CMatrix::from_row_major(1 << self.num_qubits, self.data.clone())?;
                DensityMatrix::new(self.num_qubits, m)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::validation(format!("state snapshot: {e}")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + 16 * self.data.len());
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.push(SNAPSHOT_VERSION);
        out.push(match self.kind {
            SnapshotKind::Pure => 0,
            SnapshotKind::Density => 1,
        });
        out.extend_from_slice(&(self.num_qubits as u32).to_le_bytes());
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 10 || &bytes[..4] != SNAPSHOT_MAGIC {
            return Err(Error::validation("not a state snapshot (bad magic)"));
        }
        if bytes[4] != SNAPSHOT_VERSION {
            return Err(Error::validation(format!(
                "unsupported snapshot version {}",
                bytes[4]
            )));
        }
        let kind = match bytes[5] {
            0 => SnapshotKind::Pure,
            1 => SnapshotKind::Density,
            t => return Err(Error::validation(format!("unknown snapshot kind {t}"))),
        };
        let num_qubits = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        check_num_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        let expected = match kind {
            SnapshotKind::Pure => dim,
            SnapshotKind::Density => dim * dim,
        };
        let payload = &bytes[10..];
        if payload.len() != expected * 16 {
            return Err(Error::validation(format!(
                "snapshot payload has {} bytes, expected {}",
                payload.len(),
                expected * 16
            )));
        }
        let data = payload
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(StateSnapshot {
            num_qubits,
            kind,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bitflip_examples() {
        assert_eq!(bitflip(2, 3).unwrap(), 5);
        assert_eq!(bitflip(0, 4).unwrap(), 15);
        assert_eq!(bitflip(5, 3).unwrap(), 2);
        assert!(matches!(bitflip(8, 3), Err(Error::Domain(_))));
        for k in 0..16 {
            assert_eq!(bitflip(bitflip(k, 4).unwrap(), 4).unwrap(), k);
        }
    }

    #[test]
    fn ghz_examples() {
        let h = c(FRAC_1_SQRT_2, 0.0);
        let psi = make_generalized_ghz(&GhzSpec::new(3, 0, Parity::Plus, h, h).unwrap());
        for (i, a) in psi.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { h } else { ZERO };
            assert_eq!(*a, want);
        }

        // |010⟩ + |101⟩
        let psi = make_generalized_ghz(&GhzSpec::new(3, 2, Parity::Plus, h, h).unwrap());
        assert_eq!(psi.amplitudes()[2], h);
        assert_eq!(psi.amplitudes()[5], h);

        let psi = make_generalized_ghz(
            &GhzSpec::new(2, 0, Parity::Minus, c(0.6, 0.0), c(0.8, 0.0)).unwrap(),
        );
        assert_eq!(psi.amplitudes()[0], c(0.6, 0.0));
        assert_eq!(psi.amplitudes()[3], c(-0.8, 0.0));
        let norm: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_rejects_zero_amplitude_and_bad_norm() {
        assert!(GhzSpec::new(3, 0, Parity::Plus, ZERO, c(1.0, 0.0)).is_err());
        assert!(GhzSpec::new(3, 0, Parity::Plus, c(1.0, 0.0), ZERO).is_err());
        assert!(GhzSpec::new(3, 0, Parity::Plus, c(0.5, 0.0), c(0.5, 0.0)).is_err());
        assert!(GhzSpec::new(1, 0, Parity::Plus, c(0.6, 0.0), c(0.8, 0.0)).is_err());
        assert!(GhzSpec::new(3, 9, Parity::Plus, c(0.6, 0.0), c(0.8, 0.0)).is_err());
    }

    #[test]
    fn canonicalization_preserves_projector() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        for parity in [Parity::Plus, Parity::Minus] {
            let spec = GhzSpec::new(3, 5, parity, a, b).unwrap();
            assert_eq!(spec.label_k(), 2);
            let raw = {
                let mut amps = vec![ZERO; 8];
                amps[5] = a;
                amps[2] = b * parity.sign();
                PureState::new(3, amps).unwrap()
            };
            let canon = make_generalized_ghz(&spec);
            let diff = density_from_pure(&raw)
                .matrix()
                .max_abs_diff(density_from_pure(&canon).matrix());
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn parity_overlap() {
        for (a, b) in [(0.6, 0.8), (FRAC_1_SQRT_2, FRAC_1_SQRT_2), (0.28, 0.96)] {
            let spec = GhzSpec::new(4, 3, Parity::Plus, c(a, 0.0), c(0.0, b)).unwrap();
            let plus = make_generalized_ghz(&spec);
            let minus = make_generalized_ghz(&spec.with_parity(Parity::Minus));
            let overlap = plus.inner(&minus);
            assert!((overlap - c(a * a - b * b, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ghz_diagonal_examples() {
        let h = c(FRAC_1_SQRT_2, 0.0);
        let single = GhzMixtureSpec::new(3, h, h, [((0, Parity::Plus), 1.0)]).unwrap();
        let proj = density_from_pure(&make_generalized_ghz(&GhzSpec::balanced(3).unwrap()));
        assert!(
            make_ghz_diagonal(&single)
                .matrix()
                .max_abs_diff(proj.matrix())
                < 1e-15
        );

        // Opposite parities cancel the coherences.
        let mix = GhzMixtureSpec::new(
            2,
            h,
            h,
            [((0, Parity::Plus), 0.5), ((0, Parity::Minus), 0.5)],
        )
        .unwrap();
        let rho = make_ghz_diagonal(&mix);
        let expected = CMatrix::from_fn(4, |r, c_| {
            if r == c_ && (r == 0 || r == 3) {
                c(0.5, 0.0)
            } else {
                ZERO
            }
        });
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-15);

        let mix = GhzMixtureSpec::new(
            3,
            h,
            h,
            [((0, Parity::Plus), 0.5), ((2, Parity::Plus), 0.5)],
        )
        .unwrap();
        let rho = make_ghz_diagonal(&mix);
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-15);
        rho.validate().unwrap();
        let ev = eigvalsh(rho.matrix()).unwrap();
        assert_eq!(ev.iter().filter(|x| x.abs() > 1e-12).count(), 2);
    }

    #[test]
    fn ghz_diagonal_support_only_on_pairs() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let mix = GhzMixtureSpec::new(
            4,
            a,
            b,
            [
                ((0, Parity::Plus), 0.3),
                ((3, Parity::Minus), 0.2),
                ((5, Parity::Plus), 0.5),
            ],
        )
        .unwrap();
        let rho = make_ghz_diagonal(&mix);
        rho.validate().unwrap();
        for r in 0..16u64 {
            for col in 0..16u64 {
                let paired = r == col || r == (15 ^ col);
                let in_mix = [0u64, 3, 5].iter().any(|&k| r == k || r == 15 ^ k);
                if !(paired && in_mix) {
                    assert_eq!(rho.get(r as usize, col as usize), ZERO);
                }
            }
        }
    }

    #[test]
    fn mixture_weight_validation() {
        let h = c(FRAC_1_SQRT_2, 0.0);
        assert!(GhzMixtureSpec::new(3, h, h, [((0, Parity::Plus), 0.6)]).is_err());
        assert!(GhzMixtureSpec::new(
            3,
            h,
            h,
            [((0, Parity::Plus), 1.5), ((1, Parity::Plus), -0.5)]
        )
        .is_err());
        // (7,+) is the same state as (0,+) for balanced amplitudes.
        let m = GhzMixtureSpec::new(
            3,
            h,
            h,
            [((0, Parity::Plus), 0.5), ((7, Parity::Plus), 0.5)],
        )
        .unwrap();
        assert_eq!(m.weights().len(), 1);
        assert!(
            GhzMixtureSpec::new(3, c(0.6, 0.0), c(0.8, 0.0), [((7, Parity::Plus), 1.0)]).is_err()
        );
    }

    #[test]
    fn density_from_pure_examples() {
        let rho = density_from_pure(&PureState::basis(1, 0).unwrap());
        assert_eq!(rho.get(0, 0), c(1.0, 0.0));
        assert_eq!(rho.get(1, 1), ZERO);

        let h = c(FRAC_1_SQRT_2, 0.0);
        let bell = PureState::new(2, vec![h, ZERO, ZERO, h]).unwrap();
        let rho = density_from_pure(&bell);
        for r in 0..4 {
            for col in 0..4 {
                let corner = (r == 0 || r == 3) && (col == 0 || col == 3);
                let want = if corner { 0.5 } else { 0.0 };
                assert!((rho.get(r, col) - c(want, 0.0)).norm() < 1e-15);
            }
        }
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_validation_errors() {
        let bad_trace = CMatrix::identity(2);
        assert!(DensityMatrix::new(1, bad_trace).is_err());
        let not_psd =
            CMatrix::from_row_major(2, vec![c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]).unwrap();
        assert!(DensityMatrix::new(1, not_psd).is_err());
        let not_herm =
            CMatrix::from_row_major(2, vec![c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]).unwrap();
        assert!(DensityMatrix::new(1, not_herm).is_err());
        assert!(DensityMatrix::new(2, CMatrix::identity(2)).is_err());
        assert!(PureState::new(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(PureState::new(2, vec![c(1.0, 0.0), ZERO]).is_err());
    }

    #[test]
    fn snapshot_json_and_binary() {
        let spec = GhzSpec::new(3, 1, Parity::Minus, c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let psi = make_generalized_ghz(&spec);
        let snap = StateSnapshot::from_pure(&psi);
        let back = StateSnapshot::from_json(&snap.to_json()).unwrap();
        assert_eq!(back, snap);
        let back = StateSnapshot::from_bytes(&snap.to_bytes()).unwrap();
        assert_eq!(back, snap);

        let rho = density_from_pure(&psi);
        let snap = StateSnapshot::from_density(&rho);
        let bytes = snap.to_bytes();
        assert_eq!(&bytes[..4], b"GHZS");
        assert_eq!(bytes.len(), 10 + 64 * 16);
        assert_eq!(
            StateSnapshot::from_bytes(&bytes)
                .unwrap()
                .to_density()
                .unwrap(),
            rho
        );
        assert!(StateSnapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
