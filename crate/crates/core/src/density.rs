//! Density matrices, partial traces and trace distance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{param, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const DENSITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix of power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

fn check_square_pow2(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return param(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 || !m.nrows().is_power_of_two() {
        return param(format!("dimension {} is not a power of two", m.nrows()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return param("matrix has non-finite entries");
    }
    Ok(())
}

/// Largest |M − M†| entry.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    // symmetrize first so tiny asymmetries do not leak into the solver
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_pow2(&m)?;
        let herm = hermiticity_defect(&m);
        if herm > DENSITY_TOL {
            return param(format!("matrix is not Hermitian (defect {herm:.3e})"));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return param(format!("trace is {tr}, expected 1"));
        }
        let min_ev = hermitian_eigenvalues(&m)[0];
        if min_ev < -DENSITY_TOL {
            return param(format!("matrix is not positive semidefinite (eigenvalue {min_ev:.3e})"));
        }
        Ok(DensityMatrix { m })
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector. Positive by construction, so only the
    /// norm is checked.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let n = psi.len();
        if n == 0 || !n.is_power_of_two() {
            return param(format!("state length {n} is not a power of two"));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > DENSITY_TOL {
            return param(format!("state norm^2 is {norm}, expected 1"));
        }
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Ok(DensityMatrix { m })
    }

    /// Skips the eigenvalue check; for matrices that are valid by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        DensityMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Copy with every off-diagonal entry zeroed.
    pub fn diagonal_part(&self) -> DensityMatrix {
        let n = self.dim();
        DensityMatrix {
            m: CMatrix::from_fn(n, n, |i, j| if i == j { self.m[(i, j)] } else { Complex64::new(0.0, 0.0) }),
        }
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }
}

/// Reduced matrix on the factors listed in `keep`, in ascending factor order.
///
/// `dims` gives each tensor factor's dimension, most significant first.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_raw(rho.matrix(), keep, dims)?;
    Ok(DensityMatrix::from_trusted(m))
}

/// Partial trace on a raw square matrix (linear in the input; no validity checks).
pub fn partial_trace_raw(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) {
        return param("factor dimensions must be nonempty and positive");
    }
    if total != m.nrows() || m.nrows() != m.ncols() {
        return param(format!("factor dims multiply to {total}, matrix is {}x{}", m.nrows(), m.ncols()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return param("keep list has duplicates");
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return param(format!("factor index {bad} out of range for {} factors", dims.len()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    // strides for the row-major (most significant first) layout
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |factors: &[usize], mut idx: usize| -> usize {
        // decompose idx over `factors` (mixed radix, last fastest) into a global offset
        let mut off = 0;
        for &f in factors.iter().rev() {
            off += (idx % dims[f]) * strides[f];
            idx /= dims[f];
        }
        off
    };
    let kdim: usize = kept.iter().map(|&i| dims[i]).product();
    let tdim: usize = traced.iter().map(|&i| dims[i]).product();
    let kept_off: Vec<usize> = (0..kdim).map(|i| offsets(&kept, i)).collect();
    let traced_off: Vec<usize> = (0..tdim).map(|i| offsets(&traced, i)).collect();

    let mut out = CMatrix::zeros(kdim, kdim);
    for (r, &ro) in kept_off.iter().enumerate() {
        for (c, &co) in kept_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_off {
                acc += m[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// `½ Σ |λ_i(ρ₁ − ρ₂)|`, clamped to `[0, 1]`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return param(format!("dimension mismatch: {} vs {}", rho1.dim(), rho2.dim()));
    }
    let diff = rho1.matrix() - rho2.matrix();
    let d = 0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}
