//! The ρ-Choi-Jamiołkowski transform and the forward/backward two-point
//! states built from it.

use crate::channels::{ensure_invariant, theta_kms_adjoint, ChannelRep, Semigroup};
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_unitary, flip_conjugate, kron, theta_conjugate_unchecked, trace, unvec_col, vec_col,
    CMatrix, CVector, Factor, C64,
};
use crate::states::{sqrt_density, DensityMatrix};

/// `J_ρ(Φ_*)` together with the state and θ-basis it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    matrix: CMatrix,
    rho: DensityMatrix,
    basis: CMatrix,
    trace: f64,
}

impl ChoiState {
    pub(crate) fn new(matrix: CMatrix, rho: &DensityMatrix, basis: CMatrix) -> Self {
        let trace = trace(&matrix).re;
        ChoiState {
            matrix,
            rho: rho.clone(),
            basis,
            trace,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Columns are the θ-basis vectors `e_i`.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Dimension of the single-site space `h`.
    pub fn site_dim(&self) -> usize {
        self.rho.dim()
    }
}

/// `|Ψ⟩⟨Ψ|` with `Ψ = Σ_i e_i ⊗ ρ^{1/2} e_i` for the basis columns `e_i`.
pub fn omega_matrix(rho: &DensityMatrix, basis: &CMatrix) -> CMatrix {
    let d = rho.dim();
    let root = sqrt_density(rho);
    let mut psi = CVector::zeros(d * d);
    for i in 0..d {
        let e = basis.column(i).into_owned();
        let re = &root * &e;
        psi += e.kronecker(&re);
    }
    &psi * psi.adjoint()
}

/// `ω_ρ` in the eigenbasis of ρ.
pub fn omega_rho(rho: &DensityMatrix) -> ChoiState {
    let basis = rho.eigenbasis().clone();
    ChoiState::new(omega_matrix(rho, &basis), rho, basis)
}

/// Applies a predual superoperator to one tensor factor of `m` on `h ⊗ h`.
pub fn apply_on_factor(superop: &CMatrix, m: &CMatrix, which: Factor) -> Result<CMatrix> {
    let n = m.nrows();
    let d = crate::linalg::square_dim(n)?;
    if superop.nrows() != d * d || !m.is_square() {
        return Err(Error::dim(format!(
            "superoperator of size {} cannot act on a factor of a {}x{} operator",
            superop.nrows(),
            n,
            m.ncols()
        )));
    }
    match which {
        Factor::Second => {
            let mut out = CMatrix::zeros(n, n);
            for a in 0..d {
                for c in 0..d {
                    let block = m.view((a * d, c * d), (d, d)).into_owned();
                    let image = unvec_col(&(superop * vec_col(&block)), d);
                    out.view_mut((a * d, c * d), (d, d)).copy_from(&image);
                }
            }
            Ok(out)
        }
        Factor::First => {
            let flipped = flip_conjugate(m)?;
            flip_conjugate(&apply_on_factor(superop, &flipped, Factor::Second)?)
        }
    }
}

fn check_dims(ch: &ChannelRep, rho: &DensityMatrix) -> Result<()> {
    if ch.dim() != rho.dim() {
        return Err(Error::dim(format!(
            "map acts on dimension {} but the state has dimension {}",
            ch.dim(),
            rho.dim()
        )));
    }
    Ok(())
}

fn choi_with_basis(ch: &ChannelRep, rho: &DensityMatrix, basis: CMatrix) -> Result<ChoiState> {
    check_dims(ch, rho)?;
    let omega = omega_matrix(rho, &basis);
    let pre = ch.predual();
    let matrix = apply_on_factor(pre.superop(), &omega, Factor::Second)?;
    Ok(ChoiState::new(matrix, rho, basis))
}

/// `J_ρ(Φ_*) = (1 ⊗ Φ_*)(ω_ρ)` with θ-basis the eigenbasis of ρ.
pub fn choi_state(ch: &ChannelRep, rho: &DensityMatrix) -> Result<ChoiState> {
    choi_with_basis(ch, rho, rho.eigenbasis().clone())
}

/// `J′_ρ(Φ_*)` built from the rotated basis `e′_i = U e_i`.
pub fn choi_in_basis(ch: &ChannelRep, rho: &DensityMatrix, u: &CMatrix) -> Result<ChoiState> {
    check_dims(ch, rho)?;
    if u.nrows() != rho.dim() {
        return Err(Error::dim("basis change has the wrong size"));
    }
    ensure_unitary(u, "basis change")?;
    choi_with_basis(ch, rho, u * rho.eigenbasis())
}

/// The linear operator `U θ U* θ`, θ the conjugation in `basis`.
pub fn basis_change_operator(u: &CMatrix, basis: &CMatrix) -> CMatrix {
    // θ v = V conj(V* v), so U θ U* θ = U V conj(V* U* V) V*
    let inner = (basis.adjoint() * u.adjoint() * basis).map(|z| z.conj());
    u * basis * inner * basis.adjoint()
}

/// Which two-point state a density represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointState {
    pub density: ChoiState,
    pub direction: Direction,
}

/// Forward `J_ρ(T_{*t})` and backward `J_ρ(T^Θ_{*t})` two-point states.
pub fn forward_backward(
    sg: &Semigroup,
    rho: &DensityMatrix,
    t: f64,
) -> Result<(TwoPointState, TwoPointState)> {
    rho.ensure_faithful()?;
    ensure_invariant(sg, rho, &[t])?;
    let tt = sg.map(t)?;
    let reversed = theta_kms_adjoint(&tt, rho)?;
    Ok((
        TwoPointState {
            density: choi_state(&tt, rho)?,
            direction: Direction::Forward,
        },
        TwoPointState {
            density: choi_state(&reversed, rho)?,
            direction: Direction::Backward,
        },
    ))
}

/// `(Φ_* ⊗ 1)(ω_ρ)`, the backward density of the two-point scheme with the
/// map acting on the first factor.
pub fn first_factor_density(ch: &ChannelRep, rho: &DensityMatrix) -> Result<CMatrix> {
    check_dims(ch, rho)?;
    let omega = omega_matrix(rho, rho.eigenbasis());
    apply_on_factor(ch.predual().superop(), &omega, Factor::First)
}

/// `tr(D (a ⊗ b))` for the density `D` of a two-point state.
pub fn two_point_eval(state: &TwoPointState, a: &CMatrix, b: &CMatrix) -> Result<C64> {
    let d = state.density.site_dim();
    if a.shape() != (d, d) || b.shape() != (d, d) {
        return Err(Error::dim("observables must act on the single-site space"));
    }
    Ok(trace(&(state.density.matrix() * kron(a, b))))
}

/// Closed form `tr(ρ^{1/2} Θ(a) ρ^{1/2} Φ(b))`, with `Φ^Θ` in place of Φ for
/// the backward state.
pub fn two_point_formula(
    ch: &ChannelRep,
    rho: &DensityMatrix,
    direction: Direction,
    a: &CMatrix,
    b: &CMatrix,
) -> Result<C64> {
    check_dims(ch, rho)?;
    let map = match direction {
        Direction::Forward => ch.dual(),
        Direction::Backward => theta_kms_adjoint(ch, rho)?,
    };
    let root = sqrt_density(rho);
    let theta_a = theta_conjugate_unchecked(a, rho.eigenbasis());
    Ok(trace(&(&root * theta_a * &root * map.apply(b))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Side;
    use crate::linalg::{eigh, flip_operator, max_abs, trace_norm, ONE};
    use crate::random::{
        random_cp_kraus, random_cptp_kraus, random_density_matrix, random_gksl, random_matrix,
        random_unitary, rng,
    };
    use crate::states::make_density;
    use nalgebra::DVector;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            values.len(),
            values.iter().map(|&x| C64::from(x)),
        ))
    }

    fn random_state(d: usize, g: &mut crate::random::TestRng) -> DensityMatrix {
        make_density(random_density_matrix(d, g)).unwrap()
    }

    #[test]
    fn omega_of_maximally_mixed_state_is_maximally_entangled() {
        let d = 3;
        let omega = omega_rho(&DensityMatrix::maximally_mixed(d));
        let eig = eigh(omega.matrix()).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(eig.eigenvalues.iter().skip(1).all(|x| x.abs() < 1e-12));
        let mut psi = CVector::zeros(d * d);
        for i in 0..d {
            psi[i * d + i] = C64::from(1.0 / (d as f64).sqrt());
        }
        assert!(max_abs(&(omega.matrix() - &psi * psi.adjoint())) < 1e-12);
    }

    #[test]
    fn omega_has_unit_trace_and_matches_double_sum() {
        let mut g = rng(50);
        let rho = random_state(3, &mut g);
        let omega = omega_rho(&rho);
        assert!((omega.trace() - 1.0).abs() < 1e-12);
        // Σ_ij |e_i⟩⟨e_j| ⊗ ρ^{1/2}|e_i⟩⟨e_j|ρ^{1/2}
        let root = sqrt_density(&rho);
        let v = rho.eigenbasis();
        let mut expected = CMatrix::zeros(9, 9);
        for i in 0..3 {
            for j in 0..3 {
                let eij = v.column(i) * v.column(j).adjoint();
                expected += kron(&eij, &(&root * &eij * &root));
            }
        }
        assert!(max_abs(&(omega.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn identity_channel_gives_omega() {
        let mut g = rng(51);
        let rho = random_state(3, &mut g);
        let j = choi_state(&ChannelRep::identity(3, Side::Predual), &rho).unwrap();
        assert!(max_abs(&(j.matrix() - omega_rho(&rho).matrix())) < 1e-14);
    }

    #[test]
    fn completely_depolarizing_channel() {
        let d = 3;
        // Φ_*(x) = tr(x) I/d, Kraus operators |i⟩⟨j| / √d
        let kraus = (0..d * d)
            .map(|k| {
                let mut m = CMatrix::zeros(d, d);
                m[(k / d, k % d)] = C64::from(1.0 / (d as f64).sqrt());
                m
            })
            .collect();
        let ch = ChannelRep::from_kraus(kraus, Side::Predual).unwrap();
        let j = choi_state(&ch, &DensityMatrix::maximally_mixed(d)).unwrap();
        let mixed = CMatrix::identity(d, d) / C64::from(d as f64);
        assert!(max_abs(&(j.matrix() - kron(&mixed, &mixed))) < 1e-14);
    }

    #[test]
    fn choi_state_is_positive_with_isometric_trace() {
        let mut g = rng(52);
        for d in 2..=4 {
            let rho = random_state(d, &mut g);
            let ch = ChannelRep::from_kraus(random_cp_kraus(d, 3, &mut g), Side::Predual).unwrap();
            let j = choi_state(&ch, &rho).unwrap();
            let expected = trace(&ch.apply(rho.matrix())).re;
            assert!((j.trace() - expected).abs() <= 1e-10);
            assert!(eigh(j.matrix()).unwrap().min_eigenvalue() >= -1e-11);
            assert!((trace_norm(j.matrix()) - j.trace()).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_is_bounded_by_operator_norm() {
        let mut g = rng(53);
        for _ in 0..10 {
            let rho = random_state(3, &mut g);
            let ch = ChannelRep::from_kraus(random_cp_kraus(3, 2, &mut g), Side::Predual).unwrap();
            // for CP maps the trace-class operator norm of Φ_* is ‖Φ(I)‖
            let unit_image = ch.dual().apply(&CMatrix::identity(3, 3));
            let bound = eigh(&unit_image).unwrap().max_eigenvalue();
            let j = choi_state(&ch, &rho).unwrap();
            assert!(trace_norm(j.matrix()) <= bound + 1e-12);
        }
    }

    #[test]
    fn pairing_formula() {
        let mut g = rng(54);
        let d = 3;
        let rho = random_state(d, &mut g);
        let ch = ChannelRep::from_kraus(random_cptp_kraus(d, 2, &mut g), Side::Predual).unwrap();
        let j = choi_state(&ch, &rho).unwrap();
        let root = sqrt_density(&rho);
        for _ in 0..5 {
            let cols = crate::random::random_rect(d, 4, &mut g);
            let (u, v, u2, v2) = (
                cols.column(0).into_owned(),
                cols.column(1).into_owned(),
                cols.column(2).into_owned(),
                cols.column(3).into_owned(),
            );
            let lhs = (u.kronecker(&v).adjoint()
                * j.matrix()
                * u2.kronecker(&v2))[(0, 0)];
            // θ(|u′⟩⟨u|)*θ = Θ(|u′⟩⟨u|)
            let inner = theta_conjugate_unchecked(&(&u2 * u.adjoint()), rho.eigenbasis());
            let rhs = (v.adjoint() * ch.apply(&(&root * inner * &root)) * &v2)[(0, 0)];
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn transform_is_injective_for_faithful_states() {
        let mut g = rng(55);
        for d in 2..=3 {
            let rho = random_state(d, &mut g);
            let ch = ChannelRep::from_kraus(random_cp_kraus(d, 2, &mut g), Side::Predual).unwrap();
            let j = choi_state(&ch, &rho).unwrap();
            // (⟨e_a| ⊗ 1) J (|e_c⟩ ⊗ 1) = Φ_*(X_ac) with X_ac = ρ^{1/2}|e_a⟩⟨e_c|ρ^{1/2}
            let v = rho.eigenbasis();
            let root = sqrt_density(&rho);
            let id = CMatrix::identity(d, d);
            let mut images = CMatrix::zeros(d * d, d * d);
            let mut gram = CMatrix::zeros(d * d, d * d);
            for a in 0..d {
                for c in 0..d {
                    let ea = v.column(a).kronecker(&id);
                    let ec = v.column(c).kronecker(&id);
                    let block = ea.adjoint() * j.matrix() * ec;
                    let x = &root * v.column(a) * v.column(c).adjoint() * &root;
                    images += vec_col(&block) * vec_col(&x).adjoint();
                    gram += vec_col(&x) * vec_col(&x).adjoint();
                }
            }
            let s = images * gram.try_inverse().unwrap();
            assert!(max_abs(&(s - ch.superop())) <= 1e-9);
        }
    }

    #[test]
    fn identity_rotation_leaves_choi_unchanged() {
        let mut g = rng(56);
        let rho = random_state(3, &mut g);
        let ch = ChannelRep::from_kraus(random_cptp_kraus(3, 2, &mut g), Side::Predual).unwrap();
        let j = choi_state(&ch, &rho).unwrap();
        let j2 = choi_in_basis(&ch, &rho, &CMatrix::identity(3, 3)).unwrap();
        assert!(max_abs(&(j.matrix() - j2.matrix())) < 1e-14);
    }

    #[test]
    fn basis_change_covariance() {
        let mut g = rng(57);
        let rho = random_state(3, &mut g);
        let ch = ChannelRep::from_kraus(random_cptp_kraus(3, 2, &mut g), Side::Predual).unwrap();
        let u = random_unitary(3, &mut g);
        let j = choi_state(&ch, &rho).unwrap();
        let rotated = choi_in_basis(&ch, &rho, &u).unwrap();
        let w = kron(&basis_change_operator(&u, rho.eigenbasis()), &CMatrix::identity(3, 3));
        let expected = &w * j.matrix() * w.adjoint();
        assert!(trace_norm(&(rotated.matrix() - expected)) <= 1e-10);
    }

    #[test]
    fn permutation_rotation_preserves_spectrum() {
        let mut g = rng(58);
        let rho = random_state(3, &mut g);
        let ch = ChannelRep::from_kraus(random_cptp_kraus(3, 2, &mut g), Side::Predual).unwrap();
        let perm = CMatrix::from_fn(3, 3, |i, j| if (i + 1) % 3 == j { ONE } else { C64::from(0.0) });
        let a = eigh(choi_state(&ch, &rho).unwrap().matrix()).unwrap();
        let b = eigh(choi_in_basis(&ch, &rho, &perm).unwrap().matrix()).unwrap();
        assert!((a.eigenvalues - b.eigenvalues).camax() < 1e-12);
    }

    #[test]
    fn non_unitary_rotation_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        let ch = ChannelRep::identity(2, Side::Predual);
        let res = choi_in_basis(&ch, &rho, &diag(&[1.0, 2.0]));
        assert!(matches!(res, Err(Error::Validation(_))));
    }

    #[test]
    fn forward_and_backward_at_time_zero_equal_omega() {
        let mut g = rng(59);
        let sg = Semigroup::from_gksl(&random_gksl(3, 2, &mut g));
        let rho = crate::channels::stationary_state(&sg).unwrap();
        let (fwd, bwd) = forward_backward(&sg, &rho, 0.0).unwrap();
        let omega = omega_rho(&rho);
        assert!(max_abs(&(fwd.density.matrix() - omega.matrix())) < 1e-12);
        assert!(max_abs(&(bwd.density.matrix() - omega.matrix())) < 1e-12);
    }

    #[test]
    fn flip_identities_for_random_channels() {
        let mut g = rng(60);
        for d in 2..=4 {
            let rho = random_state(d, &mut g);
            let ch = ChannelRep::from_kraus(random_cptp_kraus(d, 2, &mut g), Side::Predual).unwrap();
            let f = flip_operator(d);
            let j = choi_state(&ch, &rho).unwrap();
            let reversed = theta_kms_adjoint(&ch, &rho).unwrap();
            let j_theta = choi_state(&reversed, &rho).unwrap();
            assert!(trace_norm(&(j_theta.matrix() - &f * j.matrix() * &f)) <= 1e-10);
            let first = first_factor_density(&ch, &rho).unwrap();
            assert!(trace_norm(&(first - &f * j.matrix() * &f)) <= 1e-10);
        }
    }

    #[test]
    fn two_point_states_match_trace_formula() {
        let mut g = rng(61);
        let sg = Semigroup::from_gksl(&random_gksl(3, 2, &mut g));
        let rho = crate::channels::stationary_state(&sg).unwrap();
        let t = 0.4;
        let (fwd, bwd) = forward_backward(&sg, &rho, t).unwrap();
        let ch = sg.map(t).unwrap();
        let id = CMatrix::identity(3, 3);
        assert!((two_point_eval(&fwd, &id, &id).unwrap() - ONE).norm() < 1e-12);
        for _ in 0..10 {
            let (a, b) = (random_matrix(3, &mut g), random_matrix(3, &mut g));
            let direct = two_point_formula(&ch, &rho, Direction::Forward, &a, &b).unwrap();
            assert!((two_point_eval(&fwd, &a, &b).unwrap() - direct).norm() < 1e-10);
            let direct = two_point_formula(&ch, &rho, Direction::Backward, &a, &b).unwrap();
            assert!((two_point_eval(&bwd, &a, &b).unwrap() - direct).norm() < 1e-10);
            let swapped = two_point_eval(&fwd, &b, &a).unwrap();
            assert!((two_point_eval(&bwd, &a, &b).unwrap() - swapped).norm() < 1e-10);
        }
        assert!(two_point_eval(&fwd, &CMatrix::identity(2, 2), &id).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = ChannelRep::identity(2, Side::Predual);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(choi_state(&ch, &rho), Err(Error::Dimension(_))));
    }
}
