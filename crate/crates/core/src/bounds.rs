//! Closed-form entanglement decay multipliers for generalized GHZ states.
//!
//! Depolarizing and dephasing multipliers scale the initial entanglement
//! E(ρ); the thermal multipliers scale the maximal entanglement E_max of the
//! cut.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::BathOccupation;
use crate::linalg::CMatrix;
use crate::qstate::{density_from_pure, make_generalized_ghz, GhzSpec, CONSTRUCTION_TOL};
use crate::{Error, Result};

pub use crate::qstate::hamming_weight;

fn check_args(num_qubits: usize, p: f64) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::domain("number of qubits must be at least 1"));
    }
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability p = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_bath(bath: BathOccupation) -> Result<()> {
    match bath {
        BathOccupation::Finite(n) if n.is_nan() || n < 0.0 || n.is_infinite() => Err(
            Error::domain(format!("nbar = {n} must be finite and nonnegative")),
        ),
        _ => Ok(()),
    }
}

/// (1 − p)^N for GHZ-diagonal states under local depolarizing (and every
/// two-qubit state).
pub fn bound_depolarizing(num_qubits: usize, p: f64) -> Result<f64> {
    check_args(num_qubits, p)?;
    Ok((1.0 - p).powi(num_qubits as i32))
}

/// (1 − p)^N for GHZ-diagonal states under local dephasing. Same formula as
/// the depolarizing bound, but it does not extend to arbitrary two-qubit
/// states because dephasing is basis dependent.
pub fn bound_dephasing(num_qubits: usize, p: f64) -> Result<f64> {
    check_args(num_qubits, p)?;
    Ok((1.0 - p).powi(num_qubits as i32))
}

/// Per-qubit survival weights of |0⟩ and |1⟩ under the K₀/K₂ part of the
/// thermal channel: (1 − n̄p/(2n̄+1), 1 − (n̄+1)p/(2n̄+1)).
pub fn thermal_survival_weights(bath: BathOccupation, p: f64) -> (f64, f64) {
    match bath {
        BathOccupation::Finite(nbar) => {
            let denom = 2.0 * nbar + 1.0;
            (1.0 - nbar * p / denom, 1.0 - (nbar + 1.0) * p / denom)
        }
        BathOccupation::Diffusive => (1.0 - p / 2.0, 1.0 - p / 2.0),
    }
}

/// State-dependent thermal multiplier on E_max:
/// |α|² w₀^{N−κ} w₁^{κ} + |β|² w₀^{κ} w₁^{N−κ}.
pub fn bound_thermal_state_dependent(
    alpha: Complex64,
    beta: Complex64,
    kappa: u32,
    num_qubits: usize,
    bath: BathOccupation,
    p: f64,
) -> Result<f64> {
    check_args(num_qubits, p)?;
    check_bath(bath)?;
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::domain(format!(
            "|alpha|^2 + |beta|^2 = {norm}, expected 1"
        )));
    }
    if kappa as usize > num_qubits {
        return Err(Error::domain(format!(
            "excitation count {kappa} exceeds {num_qubits} qubits"
        )));
    }
    let (w0, w1) = thermal_survival_weights(bath, p);
    let (k, rest) = (kappa as i32, (num_qubits - kappa as usize) as i32);
    Ok(
        alpha.norm_sqr() * w0.powi(rest) * w1.powi(k)
            + beta.norm_sqr() * w0.powi(k) * w1.powi(rest),
    )
}

/// State-independent thermal multiplier on E_max: (1 − n̄p/(2n̄+1))^N, or
/// (1 − p/2)^N in the diffusive limit.
pub fn bound_thermal_uniform(num_qubits: usize, bath: BathOccupation, p: f64) -> Result<f64> {
    check_args(num_qubits, p)?;
    check_bath(bath)?;
    let base = match bath {
        BathOccupation::Finite(_) => thermal_survival_weights(bath, p).0,
        BathOccupation::Diffusive => 1.0 - p / 2.0,
    };
    Ok(base.powi(num_qubits as i32))
}

/// Weight λ_ent of the non-separable part of Λ_T(ρ_k), computed as
/// tr[⊗ᵢ (w₀|0⟩⟨0| + w₁|1⟩⟨1|) ρ_k] with the operator built explicitly.
/// Independent of the closed form in [`bound_thermal_state_dependent`].
pub fn lambda_ent_trace(ghz: &GhzSpec, bath: BathOccupation, p: f64) -> Result<f64> {
    check_args(ghz.num_qubits(), p)?;
    check_bath(bath)?;
    let (w0, w1) = thermal_survival_weights(bath, p);
    let single = CMatrix::from_fn(2, |r, c| match (r, c) {
        (0, 0) => Complex64::new(w0, 0.0),
        (1, 1) => Complex64::new(w1, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let mut op = single.clone();
    for _ in 1..ghz.num_qubits() {
        op = op.kron(&single);
    }
    let rho = density_from_pure(&make_generalized_ghz(ghz));
    Ok(op.matmul(rho.matrix()).trace().re)
}

/// Even/odd parity-flip weights (λ₊, λ₋) of the depolarizing Kraus
/// expansion restricted to {𝟙, σ_z}, by direct binomial summation:
/// λ± = Σ_{M even/odd} C(N, M) (1 − 3p/4)^{N−M} (p/4)^M.
pub fn parity_weights(num_qubits: usize, p: f64) -> Result<(f64, f64)> {
    check_args(num_qubits, p)?;
    let (s0, s3) = (1.0 - 0.75 * p, 0.25 * p);
    let mut even = Vec::with_capacity(num_qubits / 2 + 1);
    let mut odd = Vec::with_capacity(num_qubits / 2 + 1);
    let mut binom = 1.0f64;
    for m in 0..=num_qubits {
        let term = binom * s0.powi((num_qubits - m) as i32) * s3.powi(m as i32);
        if m % 2 == 0 {
            even.push(term);
        } else {
            odd.push(term);
        }
        binom = binom * (num_qubits - m) as f64 / (m + 1) as f64;
    }
    Ok((pairwise_sum(&even), pairwise_sum(&odd)))
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    DepolarizingGhzDiag,
    DepolarizingTwoQubitAny,
    Dephasing,
    ThermalStateDependent,
    ThermalUniform,
}

impl BoundFamily {
    pub fn name(self) -> &'static str {
        match self {
            BoundFamily::DepolarizingGhzDiag => "depolarizing_ghz_diag",
            BoundFamily::DepolarizingTwoQubitAny => "depolarizing_two_qubit_any",
            BoundFamily::Dephasing => "dephasing",
            BoundFamily::ThermalStateDependent => "thermal_state_dependent",
            BoundFamily::ThermalUniform => "thermal_uniform",
        }
    }

    /// Whether the multiplier scales E_max (thermal) or E(ρ) (others).
    pub fn scales_max_entanglement(self) -> bool {
        matches!(
            self,
            BoundFamily::ThermalStateDependent | BoundFamily::ThermalUniform
        )
    }
}

/// Uniform query over all bound families.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundQuery {
    pub family: BoundFamily,
    pub num_qubits: usize,
    pub p: f64,
    pub bath: Option<BathOccupation>,
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub kappa: Option<u32>,
}

impl BoundQuery {
    pub fn new(family: BoundFamily, num_qubits: usize, p: f64) -> Self {
        BoundQuery {
            family,
            num_qubits,
            p,
            bath: None,
            alpha: None,
            beta: None,
            kappa: None,
        }
    }

    pub fn with_bath(mut self, bath: BathOccupation) -> Self {
        self.bath = Some(bath);
        self
    }

    pub fn with_state(mut self, alpha: Complex64, beta: Complex64, kappa: u32) -> Self {
        self.alpha = Some(alpha);
        self.beta = Some(beta);
        self.kappa = Some(kappa);
        self
    }

    pub fn evaluate(&self) -> Result<f64> {
        let need =
            |what: &str| Error::domain(format!("{} bound needs `{what}`", self.family.name()));
        match self.family {
            BoundFamily::DepolarizingGhzDiag => bound_depolarizing(self.num_qubits, self.p),
            BoundFamily::DepolarizingTwoQubitAny => {
                if self.num_qubits != 2 {
                    return Err(Error::domain(
                        "the all-states depolarizing bound only holds for two qubits",
                    ));
                }
                bound_depolarizing(2, self.p)
            }
            BoundFamily::Dephasing => bound_dephasing(self.num_qubits, self.p),
            BoundFamily::ThermalStateDependent => bound_thermal_state_dependent(
                self.alpha.ok_or_else(|| need("alpha"))?,
                self.beta.ok_or_else(|| need("beta"))?,
                self.kappa.ok_or_else(|| need("kappa"))?,
                self.num_qubits,
                self.bath.ok_or_else(|| need("nbar"))?,
                self.p,
            ),
            BoundFamily::ThermalUniform => bound_thermal_uniform(
                self.num_qubits,
                self.bath.ok_or_else(|| need("nbar"))?,
                self.p,
            ),
        }
    }
}
