//! Partial transpose and negativity across qubit bipartitions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{eigvalsh, CMatrix};
use crate::qstate::{qubit_shift, DensityMatrix};
use crate::{Error, Result};

/// Partial-transpose eigenvalues in [−NEGATIVE_CLAMP_TOL, 0) count as zero.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-10;
/// Default floor on the initial negativity for normalized negativity.
pub const DEFAULT_NORMALIZED_FLOOR: f64 = 1e-9;

/// Split of the register into parts A|B. `side_a_mask` has bit `q` set when
/// qubit `q` belongs to A (bit index = qubit index, independent of the
/// basis-label bit order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    num_qubits: usize,
    side_a_mask: u64,
}

impl Bipartition {
    /// Validates and canonicalizes: the smaller part becomes A; on a tie
    /// the part containing qubit 0 is A. Negativity is symmetric under
    /// swapping the parts, so canonicalization never changes results.
    pub fn new(num_qubits: usize, side_a_mask: u64) -> Result<Self> {
        if !(2..=63).contains(&num_qubits) {
            return Err(Error::domain(format!(
                "a bipartition needs 2..=63 qubits, got {num_qubits}"
            )));
        }
        let all = (1u64 << num_qubits) - 1;
        if side_a_mask & !all != 0 {
            return Err(Error::domain(format!(
                "mask {side_a_mask:#b} names qubits beyond {num_qubits}"
            )));
        }
        if side_a_mask == 0 || side_a_mask == all {
            return Err(Error::domain(
                "both sides of a bipartition must be nonempty",
            ));
        }
        let other = all ^ side_a_mask;
        let (na, nb) = (side_a_mask.count_ones(), other.count_ones());
        let mask = if na < nb || (na == nb && side_a_mask & 1 == 1) {
            side_a_mask
        } else {
            other
        };
        Ok(Bipartition {
            num_qubits,
            side_a_mask: mask,
        })
    }

    /// Part A given as a list of qubit indices.
    pub fn from_qubits(num_qubits: usize, side_a: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in side_a {
            if q >= num_qubits {
                return Err(Error::domain(format!("qubit {q} out of range")));
            }
            mask |= 1 << q;
        }
        Self::new(num_qubits, mask)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn side_a_mask(&self) -> u64 {
        self.side_a_mask
    }

    pub fn side_a_size(&self) -> usize {
        self.side_a_mask.count_ones() as usize
    }

    pub fn side_a_qubits(&self) -> Vec<usize> {
        (0..self.num_qubits)
            .filter(|q| self.side_a_mask >> q & 1 == 1)
            .collect()
    }

    /// Bits of a basis label that belong to part A.
    fn label_mask(&self) -> usize {
        self.side_a_qubits()
            .into_iter()
            .fold(0usize, |m, q| m | 1 << qubit_shift(self.num_qubits, q))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.side_a_qubits().iter().map(|q| q.to_string()).collect();
        write!(
            f,
            "{{{}}}|{}",
            qs.join(","),
            self.num_qubits - self.side_a_size()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutPolicy {
    MostBalanced,
    LeastBalanced,
    All,
}

/// Canonical cuts for a policy. The least-balanced cut isolates qubit 0;
/// local channels and Haar sampling are symmetric under qubit permutations,
/// so any single qubit gives the same statistics.
pub fn enumerate_cuts(num_qubits: usize, policy: CutPolicy) -> Result<Vec<Bipartition>> {
    if num_qubits < 2 {
        return Err(Error::domain("bipartitions need at least 2 qubits"));
    }
    match policy {
        CutPolicy::MostBalanced => {
            let size = num_qubits.div_ceil(2);
            Ok(vec![Bipartition::new(num_qubits, (1u64 << size) - 1)?])
        }
        CutPolicy::LeastBalanced => Ok(vec![Bipartition::new(num_qubits, 1)?]),
        CutPolicy::All => {
            let all = (1u64 << num_qubits) - 1;
            let mut cuts: Vec<Bipartition> = (1..all)
                .map(|m| Bipartition::new(num_qubits, m))
                .collect::<Result<_>>()?;
            cuts.sort();
            cuts.dedup();
            Ok(cuts)
        }
    }
}

/// ρ^{T_A}: transposes the part-A indices,
/// out[(r_A, r_B), (c_A, c_B)] = in[(c_A, r_B), (r_A, c_B)].
pub fn partial_transpose(rho: &DensityMatrix, cut: &Bipartition) -> Result<CMatrix> {
    if rho.num_qubits() != cut.num_qubits {
        return Err(Error::domain(format!(
            "bipartition is for {} qubits, state has {}",
            cut.num_qubits,
            rho.num_qubits()
        )));
    }
    Ok(partial_transpose_matrix(rho.matrix(), cut.label_mask()))
}

fn partial_transpose_matrix(m: &CMatrix, a_bits: usize) -> CMatrix {
    let keep = !a_bits;
    CMatrix::from_fn(m.dim(), |r, c| {
        let src_r = (r & keep) | (c & a_bits);
        let src_c = (c & keep) | (r & a_bits);
        m.get(src_r, src_c)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityResult {
    /// Σ |negative eigenvalues of ρ^{T_A}|, clamped at zero.
    pub value: f64,
    /// value / initial value, when normalized against a reference state.
    pub normalized: Option<f64>,
    /// Most negative partial-transpose eigenvalue (diagnostic, unclamped).
    pub eigenvalue_floor: f64,
}

/// Negativity (‖ρ^{T_A}‖₁ − 1)/2 from the full partial-transpose spectrum.
pub fn negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<NegativityResult> {
    let pt = partial_transpose(rho, cut)?;
    let ev = eigvalsh(&pt)?;
    negativity_from_spectrum(&ev)
}

pub(crate) fn negativity_from_spectrum(ev: &[f64]) -> Result<NegativityResult> {
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(
            "non-finite partial-transpose eigenvalue".into(),
        ));
    }
    let floor = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: f64 = ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let value = if raw <= NEGATIVE_CLAMP_TOL { 0.0 } else { raw };
    Ok(NegativityResult {
        value,
        normalized: None,
        eigenvalue_floor: floor,
    })
}

/// (‖ρ^{T_A}‖₁ − 1)/2 computed from the trace norm; equal to
/// `negativity(..).value` up to rounding.
pub fn trace_norm_negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    let ev = eigvalsh(&partial_transpose(rho, cut)?)?;
    let trace_norm: f64 = ev.iter().map(|x| x.abs()).sum();
    Ok((trace_norm - 1.0) / 2.0)
}

/// Outcome of normalizing an evolved negativity by its initial value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalized {
    Value(NegativityResult),
    /// Initial negativity below the floor; the ratio is undefined.
    Undefined {
        initial: f64,
    },
}

/// 𝒩(ρ_evolved)/𝒩(ρ_initial).
pub fn normalized_negativity(
    evolved: &DensityMatrix,
    initial: &DensityMatrix,
    cut: &Bipartition,
    floor: f64,
) -> Result<Normalized> {
    let initial = negativity(initial, cut)?.value;
    normalize_against(evolved, initial, cut, floor)
}

/// As [`normalized_negativity`] with a precomputed initial negativity.
pub fn normalize_against(
    evolved: &DensityMatrix,
    initial_value: f64,
    cut: &Bipartition,
    floor: f64,
) -> Result<Normalized> {
    if initial_value <= floor {
        return Ok(Normalized::Undefined {
            initial: initial_value,
        });
    }
    let mut res = negativity(evolved, cut)?;
    res.normalized = Some(res.value / initial_value);
    Ok(Normalized::Value(res))
}

/// Largest negativity across the cut: (d_A − 1)/2 with d_A the smaller
/// part's dimension.
pub fn max_negativity(cut: &Bipartition) -> f64 {
    let d_a = (1u64 << cut.side_a_size()) as f64;
    (d_a - 1.0) / 2.0
}
