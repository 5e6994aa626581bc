//! Single-qubit Kraus channels and their local N-fold application.
//!
//! A channel acting on one qubit of an N-qubit density matrix touches the
//! matrix in independent 2×2 blocks: fixing every row and column bit except
//! the target qubit's leaves a block `B` that maps to `Σ_j K_j B K_j†`. The
//! N-fold product channel is applied as N such sweeps, so the cost is
//! O(N · 4^N) and no N-qubit Kraus operator is ever built.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, ONE, ZERO};
use crate::qstate::{qubit_shift, DensityMatrix};
use crate::{Error, Result};

/// Completeness tolerance for Σ K†K = 𝟙.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// 2×2 complex matrix, row-major `[m00, m01, m10, m11]`.
pub type Mat2 = [Complex64; 4];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const IDENTITY: Mat2 = [ONE, ZERO, ZERO, ONE];
pub const PAULI_X: Mat2 = [ZERO, ONE, ONE, ZERO];
pub const PAULI_Y: Mat2 = [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO];
pub const PAULI_Z: Mat2 = [ONE, ZERO, ZERO, c(-1.0, 0.0)];

fn scale2(m: &Mat2, s: f64) -> Mat2 {
    [m[0] * s, m[1] * s, m[2] * s, m[3] * s]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    Depolarizing,
    Dephasing,
    Thermal,
    Custom,
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelFamily::Depolarizing => "depolarizing",
            ChannelFamily::Dephasing => "dephasing",
            ChannelFamily::Thermal => "thermal",
            ChannelFamily::Custom => "custom",
        })
    }
}

/// Bath occupation of the thermal channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BathOccupation {
    Finite(f64),
    /// n̄ → ∞ with n̄γ fixed.
    Diffusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitChannel {
    kraus: Vec<Mat2>,
    family: ChannelFamily,
    p: Option<f64>,
    bath: Option<BathOccupation>,
}

fn check_probability(p: f64) -> Result<()> {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability p = {p} outside [0, 1]")));
    }
    Ok(())
}

impl SingleQubitChannel {
    /// Arbitrary channel from its Kraus operators; completeness is checked.
    pub fn custom(kraus: Vec<Mat2>) -> Result<Self> {
        Self::checked(kraus, ChannelFamily::Custom, None, None)
    }

    pub fn identity() -> Self {
        SingleQubitChannel {
            kraus: vec![IDENTITY],
            family: ChannelFamily::Custom,
            p: None,
            bath: None,
        }
    }

    fn checked(
        kraus: Vec<Mat2>,
        family: ChannelFamily,
        p: Option<f64>,
        bath: Option<BathOccupation>,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::validation(
                "a channel needs at least one Kraus operator",
            ));
        }
        if kraus
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::validation("non-finite Kraus operator entry"));
        }
        let defect = completeness_defect(&kraus);
        if defect > COMPLETENESS_TOL {
            return Err(Error::validation(format!(
                "Kraus operators violate completeness by {defect:e}"
            )));
        }
        Ok(SingleQubitChannel {
            kraus,
            family,
            p,
            bath,
        })
    }

    pub fn kraus_ops(&self) -> &[Mat2] {
        &self.kraus
    }

    pub fn family(&self) -> ChannelFamily {
        self.family
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn bath(&self) -> Option<BathOccupation> {
        self.bath
    }

    /// 4×4 matrix S with vec(B') = S vec(B) for 2×2 blocks in row-major
    /// order: S[(a,b),(i,j)] = Σ_K K_ai conj(K_bj).
    fn superoperator(&self) -> [[Complex64; 4]; 4] {
        let mut s = [[ZERO; 4]; 4];
        for k in &self.kraus {
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            s[2 * a + b][2 * i + j] += k[2 * a + i] * k[2 * b + j].conj();
                        }
                    }
                }
            }
        }
        s
    }

    /// ℰ(ρ) on a single 2×2 matrix.
    pub fn apply_single(&self, rho: &Mat2) -> Mat2 {
        let mut out = [ZERO; 4];
        for k in &self.kraus {
            let t = mat2_mul(&mat2_mul(k, rho), &mat2_adjoint(k));
            for (o, x) in out.iter_mut().zip(t) {
                *o += x;
            }
        }
        out
    }
}

/// max |Σ K†K − 𝟙|.
pub fn completeness_defect(kraus: &[Mat2]) -> f64 {
    let mut acc = [ZERO; 4];
    for k in kraus {
        let t = mat2_mul(&mat2_adjoint(k), k);
        for (a, x) in acc.iter_mut().zip(t) {
            *a += x;
        }
    }
    acc.iter()
        .zip(IDENTITY)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Depolarizing channel: Kraus operators √s_j σ_j with s₀ = 1 − 3p/4 and
/// s₁ = s₂ = s₃ = p/4, so that ℰ(ρ) = (1 − p)ρ + p𝟙/2.
pub fn depolarizing(p: f64) -> Result<SingleQubitChannel> {
    check_probability(p)?;
    let (s0, s) = ((1.0 - 0.75 * p).sqrt(), (0.25 * p).sqrt());
    let kraus = vec![
        scale2(&IDENTITY, s0),
        scale2(&PAULI_X, s),
        scale2(&PAULI_Y, s),
        scale2(&PAULI_Z, s),
    ];
    SingleQubitChannel::checked(kraus, ChannelFamily::Depolarizing, Some(p), None)
}

/// Phase damping: M₀ = √(1−p)𝟙, M₁ = √p|0⟩⟨0|, M₂ = √p|1⟩⟨1|.
pub fn dephasing(p: f64) -> Result<SingleQubitChannel> {
    check_probability(p)?;
    let sp = p.sqrt();
    let kraus = vec![
        scale2(&IDENTITY, (1.0 - p).sqrt()),
        [c(sp, 0.0), ZERO, ZERO, ZERO],
        [ZERO, ZERO, ZERO, c(sp, 0.0)],
    ];
    SingleQubitChannel::checked(kraus, ChannelFamily::Dephasing, Some(p), None)
}

/// Generalized amplitude damping with bath occupation `nbar`:
///
/// ```text
/// K₀ = √((n̄+1)/(2n̄+1)) (|0⟩⟨0| + √(1−p)|1⟩⟨1|)
/// K₁ = √((n̄+1)/(2n̄+1)) √p |0⟩⟨1|
/// K₂ = √(n̄/(2n̄+1))     (√(1−p)|0⟩⟨0| + |1⟩⟨1|)
/// K₃ = √(n̄/(2n̄+1))     √p |1⟩⟨0|
/// ```
pub fn thermal(nbar: f64, p: f64) -> Result<SingleQubitChannel> {
    if nbar.is_nan() || nbar < 0.0 || nbar.is_infinite() {
        return Err(Error::domain(format!(
            "mean bath excitation nbar = {nbar} must be finite and nonnegative (use the diffusive limit for nbar -> inf)"
        )));
    }
    check_probability(p)?;
    let denom = 2.0 * nbar + 1.0;
    thermal_with_weights(
        ((nbar + 1.0) / denom).sqrt(),
        (nbar / denom).sqrt(),
        p,
        BathOccupation::Finite(nbar),
    )
}

/// n̄ → ∞ limit of [`thermal`]: both prefactors tend to 1/√2 and `p` is
/// the excitation-exchange probability.
pub fn thermal_diffusive(p: f64) -> Result<SingleQubitChannel> {
    check_probability(p)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    thermal_with_weights(h, h, p, BathOccupation::Diffusive)
}

fn thermal_with_weights(
    down: f64,
    up: f64,
    p: f64,
    bath: BathOccupation,
) -> Result<SingleQubitChannel> {
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let kraus = vec![
        [c(down, 0.0), ZERO, ZERO, c(down * sq, 0.0)],
        [ZERO, c(down * sp, 0.0), ZERO, ZERO],
        [c(up * sq, 0.0), ZERO, ZERO, c(up, 0.0)],
        [ZERO, ZERO, c(up * sp, 0.0), ZERO],
    ];
    SingleQubitChannel::checked(kraus, ChannelFamily::Thermal, Some(p), Some(bath))
}

/// Applies a channel to qubit `q` of an N-qubit matrix in place.
pub fn apply_to_qubit(m: &mut CMatrix, num_qubits: usize, q: usize, ch: &SingleQubitChannel) {
    let s = ch.superoperator();
    let dim = m.dim();
    let bit = 1usize << qubit_shift(num_qubits, q);
    let data = m.as_mut_slice();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let b = [
                data[r0 * dim + c0],
                data[r0 * dim + c1],
                data[r1 * dim + c0],
                data[r1 * dim + c1],
            ];
            let mut out = [ZERO; 4];
            for (o, row) in out.iter_mut().zip(&s) {
                *o = row[0] * b[0] + row[1] * b[1] + row[2] * b[2] + row[3] * b[3];
            }
            data[r0 * dim + c0] = out[0];
            data[r0 * dim + c1] = out[1];
            data[r1 * dim + c0] = out[2];
            data[r1 * dim + c1] = out[3];
        }
    }
}

/// Λ(ρ) = ℰ ⊗ … ⊗ ℰ (ρ) with the same channel on every qubit.
pub fn apply_local(rho: &DensityMatrix, ch: &SingleQubitChannel) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    let mut m = rho.matrix().clone();
    for q in 0..n {
        apply_to_qubit(&mut m, n, q, ch);
    }
    DensityMatrix::from_trusted(n, m)
}

/// ℰ₀ ⊗ ℰ₁ ⊗ … ⊗ ℰ_{N−1} (ρ), one channel per qubit.
pub fn apply_local_heterogeneous(
    rho: &DensityMatrix,
    channels: &[SingleQubitChannel],
) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    if channels.len() != n {
        return Err(Error::domain(format!(
            "{} channels given for {n} qubits",
            channels.len()
        )));
    }
    let mut m = rho.matrix().clone();
    for (q, ch) in channels.iter().enumerate() {
        apply_to_qubit(&mut m, n, q, ch);
    }
    DensityMatrix::from_trusted(n, m)
}

/// Relation between physical time and the event probability p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TimeMap {
    /// p = 1 − exp(−γt/2), e.g. spontaneous emission into free space.
    ExponentialDecay { gamma: f64 },
    /// p = sin²(ωt/2), vacuum Rabi oscillations in a cavity.
    RabiOscillation { omega: f64 },
    /// p = 1 − exp(−Γt) for the diffusive (n̄ → ∞, n̄γ = Γ) bath.
    DiffusiveLinear { rate: f64 },
}

impl TimeMap {
    pub fn time_to_p(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain(format!("time t = {t} must be nonnegative")));
        }
        let p = match *self {
            TimeMap::ExponentialDecay { gamma } => 1.0 - (-gamma * t / 2.0).exp(),
            TimeMap::RabiOscillation { omega } => (omega * t / 2.0).sin().powi(2),
            TimeMap::DiffusiveLinear { rate } => 1.0 - (-rate * t).exp(),
        };
        if p.is_nan() {
            return Err(Error::domain(
                "time map produced NaN (check rate parameters)",
            ));
        }
        Ok(p.clamp(0.0, 1.0))
    }
}

/// Channel description used in configuration files:
/// `{family: "depolarizing"|"dephasing"|"thermal", p: float, nbar: float?, diffusive: bool?}`.
///
/// `p` may be omitted when the experiment supplies its own p grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub family: ChannelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusive: Option<bool>,
}

impl ChannelConfig {
    pub fn new(family: ChannelFamily) -> Self {
        ChannelConfig {
            family,
            p: None,
            nbar: None,
            diffusive: None,
        }
    }

    pub fn is_diffusive(&self) -> bool {
        self.diffusive.unwrap_or(false)
    }

    /// Checks family-specific fields without building a channel.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            check_probability(p)?;
        }
        match self.family {
            ChannelFamily::Thermal => {
                if !self.is_diffusive() {
                    match self.nbar {
                        Some(n) if n.is_finite() && n >= 0.0 => {}
                        Some(n) => {
                            return Err(Error::domain(format!(
                                "nbar = {n} must be finite and nonnegative"
                            )))
                        }
                        None => {
                            return Err(Error::domain(
                                "thermal channel needs `nbar` or `diffusive: true`",
                            ))
                        }
                    }
                }
            }
            ChannelFamily::Custom => {
                return Err(Error::domain(
                    "custom channels cannot be built from a config",
                ));
            }
            _ => {
                if self.nbar.is_some() || self.diffusive.is_some() {
                    return Err(Error::domain(format!(
                        "`nbar`/`diffusive` only apply to the thermal channel, not {}",
                        self.family
                    )));
                }
            }
        }
        Ok(())
    }

    /// Channel at probability `p` (overriding the configured `p`).
    pub fn build_at(&self, p: f64) -> Result<SingleQubitChannel> {
        self.validate()?;
        match self.family {
            ChannelFamily::Depolarizing => depolarizing(p),
            ChannelFamily::Dephasing => dephasing(p),
            ChannelFamily::Thermal if self.is_diffusive() => thermal_diffusive(p),
            ChannelFamily::Thermal => thermal(self.nbar.unwrap_or(0.0), p),
            ChannelFamily::Custom => unreachable!("rejected by validate"),
        }
    }

    pub fn build(&self) -> Result<SingleQubitChannel> {
        let p = self
            .p
            .ok_or_else(|| Error::domain("channel config has no `p`"))?;
        self.build_at(p)
    }
}
