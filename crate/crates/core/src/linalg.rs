//! Dense complex matrices and a Hermitian eigenvalue solver.
//!
//! Only eigenvalues are ever needed downstream (negativity is a spectral
//! quantity), so the solver reduces the Hermitian matrix to a real symmetric
//! tridiagonal matrix with Householder reflections and then runs implicit
//! QL sweeps on the tridiagonal form.

use num_complex::Complex64;

use crate::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Maximum implicit QL iterations spent on a single eigenvalue.
pub const MAX_QL_ITERATIONS: usize = 50;

/// Square complex matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data; `data.len()` must be a perfect square.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(CMatrix { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        CMatrix { dim, data }
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            let out_row = &mut out.data[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |r, c| {
            self.get(r / n, c / n) * other.get(r % n, c % n)
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the lower
/// triangle (including the diagonal) is read; Hermiticity is assumed.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    let (mut diag, mut off) = tridiagonalize(m.clone());
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.total_cmp(b));
    Ok(diag)
}

/// Householder reduction of a Hermitian matrix to real symmetric
/// tridiagonal form. Returns `(diagonal, subdiagonal)`; the subdiagonal has
/// length `n` with a trailing zero.
fn tridiagonalize(mut a: CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    if n == 0 {
        return (diag, off);
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        // Column k below the diagonal.
        for i in 0..len {
            v[i] = a.data[(k + 1 + i) * n + k];
        }
        let (beta, tau) = householder(&mut v[..len]);
        off[k] = beta;

        if tau != ZERO {
            // w = tau * A_sub v from the lower triangle of the trailing block.
            let base = k + 1;
            w[..len].fill(ZERO);
            for i in 0..len {
                let row = &a.data[(base + i) * n + base..(base + i) * n + base + i + 1];
                let vi = v[i];
                let mut acc = ZERO;
                for (j, x) in row[..i].iter().enumerate() {
                    acc += x * v[j];
                    w[j] += x.conj() * vi;
                }
                w[i] += acc + row[i] * vi;
            }
            for wi in w[..len].iter_mut() {
                *wi *= tau;
            }
            // w ← w − (tau/2)(w^H v) v
            let mut wv = ZERO;
            for i in 0..len {
                wv += w[i].conj() * v[i];
            }
            let alpha = -0.5 * tau * wv;
            for i in 0..len {
                w[i] += alpha * v[i];
            }
            // A_sub ← A_sub − v w^H − w v^H, lower triangle only.
            for i in 0..len {
                let (vi, wi) = (v[i], w[i]);
                let row = &mut a.data[(base + i) * n + base..(base + i) * n + base + i + 1];
                for ((x, vj), wj) in row.iter_mut().zip(&v[..=i]).zip(&w[..=i]) {
                    *x -= vi * wj.conj() + wi * vj.conj();
                }
            }
        }
        diag[k] = a.data[k * n + k].re;
    }
    diag[n - 1] = a.data[(n - 1) * n + (n - 1)].re;
    (diag, off)
}

/// Generates an elementary reflector H = I − τ v vᴴ with H† x = β e₁ and β
/// real. On return `x` holds v (with v₀ = 1).
fn householder(x: &mut [Complex64]) -> (f64, Complex64) {
    let alpha = x[0];
    let tail_norm = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if tail_norm == 0.0 && alpha.im == 0.0 {
        x[0] = ONE;
        return (alpha.re, ZERO);
    }
    let norm = alpha.re.hypot(alpha.im).hypot(tail_norm);
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = ONE / (alpha - beta);
    for z in x[1..].iter_mut() {
        *z *= scale;
    }
    x[0] = ONE;
    (beta, tau)
}

/// Implicit QL iteration on a symmetric tridiagonal matrix. On success
/// `diag` holds the eigenvalues (unsorted).
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    // Off-diagonals below EPS·‖T‖ are dropped; this perturbs eigenvalues by
    // at most that much and avoids stalling next to zero diagonal entries.
    let norm = (0..n)
        .map(|i| diag[i].abs() + off[i].abs() + if i > 0 { off[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let abs_tol = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd || off[m].abs() <= abs_tol {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::Numeric(format!(
                    "tridiagonal QL failed to converge for eigenvalue {l} after {MAX_QL_ITERATIONS} iterations"
                )));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
