//! Dense complex matrix algebra shared by every pipeline.
//!
//! All operators on `h ⊗ h` use the row-major tensor index: `e_i ⊗ e_j`
//! sits at position `i * d2 + j`. Superoperators use column-stacking
//! vectorization, `vec(X)[i + j * d] = X[i, j]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Components below this magnitude are skipped when fixing eigenvector phases.
const PHASE_FIX_THRESHOLD: f64 = 1e-8;

/// Spectral decomposition of a Hermitian matrix, `A = V Λ V*`.
///
/// Eigenvalues are sorted in descending order; each eigenvector is scaled
/// so that its first non-negligible component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `V f(Λ) V*` for a real function of the spectrum.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from(f(self.eigenvalues[k]));
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    /// Scale-relative clip tolerance used for PSD domain checks.
    pub fn clip_tolerance(&self) -> f64 {
        1e-12 * self.max_eigenvalue().max(1.0)
    }
}

/// Hermitian eigendecomposition.
///
/// The input is symmetrized before decomposition. Exactly diagonal input
/// returns (a permutation of) the canonical basis so that degenerate states
/// such as `I/d` get a deterministic eigenbasis.
pub fn eigh(a: &CMatrix) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "eigh needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = a.nrows();
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == ZERO));

    let (values, vectors) = if is_diagonal {
        let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        (values, CMatrix::identity(n, n))
    } else {
        let h = (a + a.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(h);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep their original order
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        if let Some(pivot) = col.iter().find(|z| z.norm() > PHASE_FIX_THRESHOLD) {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Standard Kronecker product, `(A ⊗ B)[(i·nb + k), (j·mb + l)] = A[i,j] B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Integer `d` with `d * d == n`.
pub fn square_dim(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d == n {
        Ok(d)
    } else {
        Err(Error::dim(format!("dimension {n} is not the square of an integer")))
    }
}

fn bipartite_dim(m: &CMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "expected a square operator on h⊗h, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    square_dim(m.nrows())
}

/// Which tensor factor of `h ⊗ h` an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Trace over the selected factor of an operator on `h ⊗ h`.
pub fn partial_trace(m: &CMatrix, which: Factor) -> Result<CMatrix> {
    let d = bipartite_dim(m)?;
    let out = match which {
        Factor::First => CMatrix::from_fn(d, d, |b, c| {
            (0..d).map(|a| m[(a * d + b, a * d + c)]).sum()
        }),
        Factor::Second => CMatrix::from_fn(d, d, |a, c| {
            (0..d).map(|b| m[(a * d + b, c * d + b)]).sum()
        }),
    };
    Ok(out)
}

/// The swap `F (u ⊗ v) = v ⊗ u` on `C^d ⊗ C^d`.
pub fn flip_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = ONE;
        }
    }
    f
}

/// `F M F` for an operator on `h ⊗ h`.
pub fn flip_conjugate(m: &CMatrix) -> Result<CMatrix> {
    let d = bipartite_dim(m)?;
    let swap = |r: usize| (r % d) * d + r / d;
    Ok(CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(swap(r), swap(c))]))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.nrows();
    let gram = u.adjoint() * u;
    (&gram - CMatrix::identity(n, n)).iter().all(|z| z.norm() <= tol)
}

pub fn ensure_unitary(u: &CMatrix, what: &str) -> Result<()> {
    if is_unitary(u, 1e-10) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} is not unitary")))
    }
}

/// The reversing operation `Θ(x) = θ x* θ`, with θ the complex conjugation
/// with respect to the orthonormal basis given by the columns of `basis`.
///
/// In coordinates, `Θ(x) = V (V* x V)ᵀ V*`; in the θ-basis itself this is
/// the transpose.
pub fn theta_conjugate(x: &CMatrix, basis: &CMatrix) -> Result<CMatrix> {
    if !x.is_square() || x.nrows() != basis.nrows() {
        return Err(Error::dim("theta_conjugate: operator and basis sizes differ"));
    }
    ensure_unitary(basis, "theta basis")?;
    Ok(theta_conjugate_unchecked(x, basis))
}

pub(crate) fn theta_conjugate_unchecked(x: &CMatrix, basis: &CMatrix) -> CMatrix {
    let inner = basis.adjoint() * x * basis;
    basis * inner.transpose() * basis.adjoint()
}

/// Real functions available on Hermitian matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermFn {
    Log,
    Sqrt,
    Exp,
}

/// Applies `f` on the spectrum of a Hermitian matrix.
///
/// For `Log`, eigenvalues at or below the clip tolerance are treated as the
/// kernel and mapped to zero (log on the support).
pub fn herm_func(a: &CMatrix, f: HermFn) -> Result<CMatrix> {
    let eig = eigh(a)?;
    herm_func_eig(&eig, f)
}

pub fn herm_func_eig(eig: &EigDecomposition, f: HermFn) -> Result<CMatrix> {
    let tol = eig.clip_tolerance();
    if matches!(f, HermFn::Log | HermFn::Sqrt) && eig.min_eigenvalue() < -tol {
        return Err(Error::Domain(format!(
            "{f:?} needs a positive semidefinite argument, smallest eigenvalue {:e}",
            eig.min_eigenvalue()
        )));
    }
    Ok(match f {
        HermFn::Log => eig.map(|x| if x > tol { x.ln() } else { 0.0 }),
        HermFn::Sqrt => eig.map(|x| x.max(0.0).sqrt()),
        HermFn::Exp => eig.map(f64::exp),
    })
}

pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(a: &CMatrix) -> f64 {
    a.clone().singular_values().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Matrix exponential (nalgebra's Padé scaling-and-squaring).
///
/// Works for arbitrary (non-normal) square input; no eigendecomposition.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    if a.nrows() == 0 || one_norm(a) == 0.0 {
        return CMatrix::identity(a.nrows(), a.nrows());
    }
    a.exp()
}

/// Unitary DFT matrix `F_p = p^{-1/2} Σ ω^{kl} |e_k⟩⟨e_l|`, `ω = e^{2πi/p}`.
pub fn dft_matrix(p: usize) -> Result<CMatrix> {
    if p == 0 {
        return Err(Error::invalid("dft_matrix needs p >= 1"));
    }
    let norm = 1.0 / (p as f64).sqrt();
    Ok(CMatrix::from_fn(p, p, |k, l| {
        let phase = 2.0 * PI * ((k * l) % p) as f64 / p as f64;
        C64::from_polar(norm, phase)
    }))
}

/// `|v⟩⟨w|`.
pub fn outer(v: &CVector, w: &CVector) -> CMatrix {
    v * w.adjoint()
}

/// Column-stacking vectorization.
pub fn vec_col(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

pub fn unvec_col(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Hermitian part deviation, `max |A - A*|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_unitary, rng};

    fn c(re: f64) -> C64 {
        C64::from(re)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
    }

    #[test]
    fn kron_of_projectors_uses_row_major_index() {
        let mut p0 = CMatrix::zeros(2, 2);
        p0[(0, 0)] = ONE;
        let mut p1 = CMatrix::zeros(2, 2);
        p1[(1, 1)] = ONE;
        let k = kron(&p0, &p1);
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 1)] = ONE;
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_shift_swaps_index_blocks() {
        let j2 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let k = kron(&j2, &CMatrix::identity(2, 2));
        // entrywise expansion: (J⊗I)[(a,b),(c,d)] = J[a,c] δ_bd
        let mut expected = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            expected[(r, col)] = ONE;
        }
        assert_eq!(k, expected);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut g = rng(1);
        let a = random_hermitian(3, &mut g);
        let b = random_hermitian(3, &mut g);
        let prod = kron(&a, &b);
        let second = partial_trace(&prod, Factor::Second).unwrap();
        assert!(max_abs(&(second - &a * trace(&b))) < 1e-12);
        let first = partial_trace(&prod, Factor::First).unwrap();
        assert!(max_abs(&(first - &b * trace(&a))) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut g = rng(2);
        let m = random_hermitian(9, &mut g);
        let pt = partial_trace(&m, Factor::First).unwrap();
        assert!((trace(&pt) - trace(&m)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_non_square_dimension() {
        let m = CMatrix::identity(5, 5);
        assert!(matches!(
            partial_trace(&m, Factor::First),
            Err(Error::Dimension(_))
        ));
        assert!(flip_conjugate(&m).is_err());
    }

    #[test]
    fn flip_swaps_simple_tensors_and_is_involutive() {
        let mut g = rng(3);
        let a = random_matrix(3, &mut g);
        let b = random_matrix(3, &mut g);
        let flipped = flip_conjugate(&kron(&a, &b)).unwrap();
        assert!(max_abs(&(flipped - kron(&b, &a))) < 1e-15);

        let m = random_matrix(9, &mut g);
        let twice = flip_conjugate(&flip_conjugate(&m).unwrap()).unwrap();
        assert_eq!(twice, m);

        let f = flip_operator(3);
        assert!(max_abs(&(&f * &m * &f - flip_conjugate(&m).unwrap())) < 1e-15);
    }

    #[test]
    fn theta_maps_matrix_units_to_transposes() {
        let basis = CMatrix::identity(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut eij = CMatrix::zeros(3, 3);
                eij[(i, j)] = ONE;
                let t = theta_conjugate(&eij, &basis).unwrap();
                assert_eq!(t, eij.transpose());
            }
        }
    }

    #[test]
    fn theta_in_rotated_basis_maps_basis_units() {
        let mut g = rng(4);
        let v = random_unitary(3, &mut g);
        let (e1, e2) = (v.column(0).into_owned(), v.column(2).into_owned());
        let t = theta_conjugate(&outer(&e1, &e2), &v).unwrap();
        assert!(max_abs(&(t - outer(&e2, &e1))) < 1e-13);
    }

    #[test]
    fn theta_is_an_involutive_anti_homomorphism() {
        let mut g = rng(5);
        let v = random_unitary(4, &mut g);
        let x = random_matrix(4, &mut g);
        let y = random_matrix(4, &mut g);
        let th = |m: &CMatrix| theta_conjugate(m, &v).unwrap();
        assert!(max_abs(&(th(&th(&x)) - &x)) < 1e-12);
        assert!(max_abs(&(th(&(&x * &y)) - th(&y) * th(&x))) < 1e-12);
        assert!(max_abs(&(th(&x.adjoint()) - th(&x).adjoint())) < 1e-12);
    }

    #[test]
    fn theta_rejects_non_unitary_basis() {
        let basis = CMatrix::identity(2, 2) * c(2.0);
        assert!(matches!(
            theta_conjugate(&CMatrix::identity(2, 2), &basis),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn eigh_reconstructs_and_is_orthonormal() {
        let mut g = rng(6);
        let a = random_hermitian(6, &mut g);
        let eig = eigh(&a).unwrap();
        let scale = a.norm();
        assert!((eig.reconstruct() - &a).norm() <= 1e-12 * scale.max(1.0));
        assert!(is_unitary(&eig.eigenvectors, 1e-12));
        assert!(eig
            .eigenvalues
            .as_slice()
            .windows(2)
            .all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigh_of_diagonal_input_is_canonical() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.25); 4]));
        let eig = eigh(&a).unwrap();
        assert_eq!(eig.eigenvectors, CMatrix::identity(4, 4));
        let b = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.3), c(0.7)]));
        let eig = eigh(&b).unwrap();
        assert_eq!(eig.eigenvalues.as_slice(), &[0.7, 0.3]);
        assert_eq!(eig.eigenvectors[(1, 0)], ONE);
    }

    #[test]
    fn eigenvector_phase_is_canonical() {
        let mut g = rng(7);
        let a = random_hermitian(4, &mut g);
        let eig = eigh(&a).unwrap();
        for col in eig.eigenvectors.column_iter() {
            let pivot = col.iter().find(|z| z.norm() > PHASE_FIX_THRESHOLD).unwrap();
            assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
        }
    }

    #[test]
    fn herm_func_basic_values() {
        let i3 = CMatrix::identity(3, 3);
        assert!(max_abs(&(herm_func(&i3, HermFn::Sqrt).unwrap() - &i3)) < 1e-15);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(4.0), c(9.0)]));
        let s = herm_func(&d, HermFn::Sqrt).unwrap();
        let expected = CMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
        assert!(max_abs(&(s - expected)) < 1e-15);
    }

    #[test]
    fn log_inverts_exp() {
        let mut g = rng(8);
        let a = random_hermitian(4, &mut g);
        let e = herm_func(&a, HermFn::Exp).unwrap();
        let back = herm_func(&e, HermFn::Log).unwrap();
        assert!(max_abs(&(back - &a)) < 1e-10);
    }

    #[test]
    fn log_and_sqrt_reject_negative_spectrum() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-0.5)]));
        assert!(matches!(herm_func(&d, HermFn::Log), Err(Error::Domain(_))));
        assert!(matches!(herm_func(&d, HermFn::Sqrt), Err(Error::Domain(_))));
        assert!(herm_func(&d, HermFn::Exp).is_ok());
    }

    #[test]
    fn log_is_zero_on_the_kernel() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        let l = herm_func(&d, HermFn::Log).unwrap();
        assert_eq!(l, CMatrix::zeros(2, 2));
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        assert_eq!(expm(&CMatrix::zeros(3, 3)), CMatrix::identity(3, 3));
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.3), c(-2.5)]));
        let e = expm(&d);
        assert!((e[(0, 0)].re - 0.3f64.exp()).abs() < 1e-15);
        assert!((e[(1, 1)].re - (-2.5f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn expm_inverse_pair_up_to_norm_ten() {
        let mut g = rng(9);
        for n in [2, 5, 9] {
            let raw = random_matrix(n, &mut g);
            let a = &raw * C64::from(10.0 / one_norm(&raw));
            let prod = expm(&a) * expm(&(-&a));
            assert!(max_abs(&(prod - CMatrix::identity(n, n))) < 1e-10);
        }
    }

    #[test]
    fn expm_matches_taylor_series_across_norms() {
        let mut g = rng(10);
        let raw = random_matrix(4, &mut g);
        for target in [0.01, 0.2, 0.9, 2.0, 5.0, 12.0] {
            let a = &raw * C64::from(target / one_norm(&raw));
            // oracle: Taylor series on A/2^8, then squaring
            let small = &a * C64::from(1.0 / 256.0);
            let mut term = CMatrix::identity(4, 4);
            let mut sum = term.clone();
            for k in 1..30 {
                term = &term * &small * C64::from(1.0 / k as f64);
                sum += &term;
            }
            for _ in 0..8 {
                sum = &sum * &sum;
            }
            let rel = max_abs(&(expm(&a) - &sum)) / max_abs(&sum);
            assert!(rel < 1e-12, "norm {target}: rel err {rel}");
        }
    }

    #[test]
    fn herm_exp_agrees_with_expm() {
        let mut g = rng(11);
        let a = random_hermitian(5, &mut g);
        let diff = herm_func(&a, HermFn::Exp).unwrap() - expm(&a);
        assert!(max_abs(&diff) < 1e-10);
    }

    #[test]
    fn dft_matrix_small_cases() {
        assert!(dft_matrix(0).is_err());
        assert_eq!(dft_matrix(1).unwrap(), CMatrix::identity(1, 1));
        let f2 = dft_matrix(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expected = CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        assert!(max_abs(&(f2 - expected)) < 1e-15);
        for p in 1..8 {
            assert!(is_unitary(&dft_matrix(p).unwrap(), 1e-12));
        }
    }

    #[test]
    fn dft_diagonalizes_the_cyclic_shift() {
        let p = 5;
        let j = CMatrix::from_fn(p, p, |i, k| if k == (i + 1) % p { ONE } else { ZERO });
        let f = dft_matrix(p).unwrap();
        let d = &f * j * f.adjoint();
        for r in 0..p {
            for s in 0..p {
                if r != s {
                    assert!(d[(r, s)].norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn vec_identity_holds_for_column_stacking() {
        let mut g = rng(12);
        let (a, x, b) = (
            random_matrix(3, &mut g),
            random_matrix(3, &mut g),
            random_matrix(3, &mut g),
        );
        let lhs = vec_col(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_col(&x);
        assert!((lhs - rhs).norm() < 1e-13);
        assert_eq!(unvec_col(&vec_col(&x), 3), x);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn kron_is_associative_and_bilinear(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
                let mut g = rng(seed);
                let a = random_matrix(da, &mut g);
                let b = random_matrix(db, &mut g);
                let b2 = random_matrix(db, &mut g);
                let cm = random_matrix(dc, &mut g);
                let s = C64::new(0.3, -1.2);
                let left = kron(&kron(&a, &b), &cm);
                let right = kron(&a, &kron(&b, &cm));
                prop_assert!(max_abs(&(left - right)) <= 1e-13);
                let lin = kron(&a, &(&b + &b2 * s)) - (kron(&a, &b) + kron(&a, &b2) * s);
                prop_assert!(max_abs(&lin) <= 1e-13);
            }

            #[test]
            fn flip_of_kron_swaps_factors(seed in any::<u64>(), d in 1usize..5) {
                let mut g = rng(seed);
                let a = random_matrix(d, &mut g);
                let b = random_matrix(d, &mut g);
                let diff = flip_conjugate(&kron(&a, &b)).unwrap() - kron(&b, &a);
                prop_assert!(max_abs(&diff) <= 1e-15);
            }

            #[test]
            fn partial_trace_of_kron_first(seed in any::<u64>(), d in 1usize..5) {
                let mut g = rng(seed);
                let a = random_matrix(d, &mut g);
                let b = random_matrix(d, &mut g);
                let pt = partial_trace(&kron(&a, &b), Factor::First).unwrap();
                prop_assert!(max_abs(&(pt - &b * trace(&a))) <= 1e-12);
            }

            #[test]
            fn theta_anti_homomorphism(seed in any::<u64>(), d in 1usize..5) {
                let mut g = rng(seed);
                let v = random_unitary(d, &mut g);
                let x = random_matrix(d, &mut g);
                let y = random_matrix(d, &mut g);
                let lhs = theta_conjugate(&(&x * &y), &v).unwrap();
                let rhs = theta_conjugate(&y, &v).unwrap() * theta_conjugate(&x, &v).unwrap();
                prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
            }

            #[test]
            fn herm_exp_matches_expm(seed in any::<u64>(), d in 1usize..6) {
                let mut g = rng(seed);
                let a = random_hermitian(d, &mut g);
                let diff = herm_func(&a, HermFn::Exp).unwrap() - expm(&a);
                prop_assert!(max_abs(&diff) <= 1e-10);
            }
        }
    }
}
