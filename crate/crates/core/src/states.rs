//! Density matrices and the von Neumann relative entropy.

use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, trace, CMatrix, EigDecomposition, C64};

/// Eigenvalues above this threshold make a state faithful.
pub const FAITHFUL_THRESHOLD: f64 = 1e-10;
/// η-mass on ker(σ) above this makes S(η, σ) infinite.
pub const KERNEL_MASS_TOLERANCE: f64 = 1e-9;
/// σ-eigenvalues at or below `KERNEL_RELATIVE_TOLERANCE · λ_max(σ)` span ker(σ).
pub const KERNEL_RELATIVE_TOLERANCE: f64 = 1e-12;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-10;
const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// A validated state: Hermitian, positive semidefinite, unit trace.
///
/// The eigendecomposition is computed once at construction; its eigenbasis
/// is the default θ-basis for every KMS-type construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    eig: EigDecomposition,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        make_density(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = CMatrix::identity(d, d) / C64::from(d as f64);
        make_density(m).expect("I/d is a state")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eig(&self) -> &EigDecomposition {
        &self.eig
    }

    /// Orthonormal eigenbasis (columns), eigenvalues descending.
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eig.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_faithful(&self) -> bool {
        is_faithful(self)
    }

    pub fn ensure_faithful(&self) -> Result<()> {
        if self.is_faithful() {
            Ok(())
        } else {
            Err(Error::NotFaithful {
                min_eigenvalue: self.eig.min_eigenvalue(),
            })
        }
    }

    /// `ρ^s` through the cached spectrum. Negative powers need a faithful state.
    pub fn power(&self, s: f64) -> Result<CMatrix> {
        if s < 0.0 {
            self.ensure_faithful()?;
        }
        if s == 0.0 {
            let d = self.dim();
            return Ok(CMatrix::identity(d, d));
        }
        Ok(self.eig.map(|x| x.max(0.0).powf(s)))
    }
}

/// Validates `m` as a density matrix and caches its eigendecomposition.
pub fn make_density(m: CMatrix) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "density matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = max_abs(&m).max(1.0);
    let defect = max_abs(&(&m - m.adjoint()));
    if defect > HERMITIAN_TOLERANCE * scale {
        return Err(Error::invalid(format!(
            "density matrix is not Hermitian (max |M - M*| = {defect:e})"
        )));
    }
    let tr = trace(&m);
    if (tr - C64::from(1.0)).norm() > TRACE_TOLERANCE {
        return Err(Error::invalid(format!(
            "density matrix trace is {} instead of 1",
            tr.re
        )));
    }
    let matrix = (&m + m.adjoint()) * C64::from(0.5);
    let eig = eigh(&matrix)?;
    let min = eig.min_eigenvalue();
    if min < -NEGATIVITY_TOLERANCE {
        return Err(Error::invalid(format!(
            "density matrix has negative eigenvalue {min:e}"
        )));
    }
    Ok(DensityMatrix { matrix, eig })
}

pub fn is_faithful(rho: &DensityMatrix) -> bool {
    rho.eig.min_eigenvalue() > FAITHFUL_THRESHOLD
}

/// Positive square root `ρ^{1/2}`.
pub fn sqrt_density(rho: &DensityMatrix) -> CMatrix {
    rho.eig.map(|x| x.max(0.0).sqrt())
}

/// Outcome of a relative entropy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelEntropyResult {
    /// Natural-log relative entropy; `f64::INFINITY` when the kernel
    /// inclusion `ker σ ⊂ ker η` fails.
    pub value: f64,
    /// Number of σ-eigenvalues above the kernel threshold.
    pub support_dim: usize,
    /// Whether `ker σ ⊂ ker η` holds within tolerance.
    pub kernel_ok: bool,
}

impl RelEntropyResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `S(η, σ) = tr(η log η − η log σ)`, or `+∞` when η has mass on ker(σ).
pub fn relative_entropy(eta: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelEntropyResult> {
    if eta.dim() != sigma.dim() {
        return Err(Error::dim(format!(
            "relative entropy of states of dimension {} and {}",
            eta.dim(),
            sigma.dim()
        )));
    }
    Ok(relative_entropy_eig(eta.matrix(), eta.eig(), sigma.eig()))
}

/// Relative entropy from precomputed spectra. `eta` is needed as a matrix
/// to evaluate its weights in the eigenbasis of σ.
pub fn relative_entropy_eig(
    eta: &CMatrix,
    eta_eig: &EigDecomposition,
    sigma_eig: &EigDecomposition,
) -> RelEntropyResult {
    let cutoff = KERNEL_RELATIVE_TOLERANCE * sigma_eig.max_eigenvalue().max(0.0);
    let basis = &sigma_eig.eigenvectors;
    let weights = (basis.adjoint() * eta * basis).diagonal();

    let mut kernel_mass = 0.0;
    let mut cross = 0.0;
    let mut support_dim = 0;
    for (k, &lambda) in sigma_eig.eigenvalues.iter().enumerate() {
        let w = weights[k].re;
        if lambda > cutoff {
            support_dim += 1;
            cross += w * lambda.ln();
        } else {
            kernel_mass += w;
        }
    }
    if kernel_mass > KERNEL_MASS_TOLERANCE {
        return RelEntropyResult {
            value: f64::INFINITY,
            support_dim,
            kernel_ok: false,
        };
    }
    // 0·log 0 = 0
    let entropy_term: f64 = eta_eig
        .eigenvalues
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| a * a.ln())
        .sum();
    RelEntropyResult {
        value: (entropy_term - cross).max(0.0),
        support_dim,
        kernel_ok: true,
    }
}
