//! Completely positive maps, GKSL generators, their semigroups and the
//! s-, KMS and Θ-KMS adjoints.
//!
//! A map is stored as its superoperator in column-stacking form together
//! with the side it acts on: `Predual` maps act on states, `Dual` maps act
//! on observables, and the two are related by `tr(Φ_*(σ) x) = tr(σ Φ(x))`.

use crate::error::{Error, Result};
use crate::linalg::{
    expm, max_abs, square_dim, theta_conjugate_unchecked, trace, trace_norm, unvec_col, vec_col,
    CMatrix, CVector, C64, ONE,
};
use crate::states::{make_density, DensityMatrix};

/// Which picture a map acts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Heisenberg picture, acting on observables.
    Dual,
    /// Schrödinger picture, acting on trace-class operators.
    Predual,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Dual => Side::Predual,
            Side::Predual => Side::Dual,
        }
    }
}

/// Tolerance in trace norm for "ρ is invariant".
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;
/// Residual below which Θ-SQDB or parity preservation is reported as holding.
pub const BALANCE_TOLERANCE: f64 = 1e-8;

/// A linear map on `B(C^d)`, optionally with a Kraus family.
///
/// When present, `kraus` lists the operators `K` with `X ↦ Σ K X K*` on
/// this map's own side.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRep {
    dim: usize,
    kraus: Option<Vec<CMatrix>>,
    superop: CMatrix,
    side: Side,
}

fn kraus_superop(kraus: &[CMatrix], d: usize) -> CMatrix {
    kraus.iter().fold(CMatrix::zeros(d * d, d * d), |acc, k| {
        acc + k.map(|z| z.conj()).kronecker(k)
    })
}

/// Transpose permutation on column-stacked vectors.
fn vec_transpose_index(r: usize, d: usize) -> usize {
    (r % d) * d + r / d
}

/// Converts a superoperator between the dual and predual pictures:
/// `S_other = P Sᵀ P` with `P vec(X) = vec(Xᵀ)`.
pub fn switch_side_superop(s: &CMatrix) -> CMatrix {
    let d = square_dim(s.nrows()).expect("superoperator size is a square");
    CMatrix::from_fn(s.nrows(), s.ncols(), |r, c| {
        s[(vec_transpose_index(c, d), vec_transpose_index(r, d))]
    })
}

impl ChannelRep {
    /// Builds the map `X ↦ Σ K X K*` (predual) and returns it on `side`.
    /// The dual side uses the adjoint Kraus family `x ↦ Σ K* x K`.
    pub fn from_kraus(kraus: Vec<CMatrix>, side: Side) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::invalid("empty Kraus family"))?;
        let d = first.nrows();
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::dim("Kraus operators must be square and of equal size"));
        }
        let kraus = match side {
            Side::Predual => kraus,
            Side::Dual => kraus.iter().map(|k| k.adjoint()).collect(),
        };
        let superop = kraus_superop(&kraus, d);
        Ok(ChannelRep {
            dim: d,
            kraus: Some(kraus),
            superop,
            side,
        })
    }

    pub fn from_superop(superop: CMatrix, side: Side) -> Result<Self> {
        if !superop.is_square() {
            return Err(Error::dim("superoperator must be square"));
        }
        let dim = square_dim(superop.nrows())?;
        Ok(ChannelRep {
            dim,
            kraus: None,
            superop,
            side,
        })
    }

    pub fn identity(d: usize, side: Side) -> Self {
        ChannelRep::from_kraus(vec![CMatrix::identity(d, d)], side).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.nrows(), self.dim, "operator size does not match the map");
        unvec_col(&(&self.superop * vec_col(x)), self.dim)
    }

    /// The same map expressed on `side` (trace-pairing dual if it differs).
    pub fn to_side(&self, side: Side) -> ChannelRep {
        if side == self.side {
            return self.clone();
        }
        ChannelRep {
            dim: self.dim,
            kraus: self
                .kraus
                .as_ref()
                .map(|ks| ks.iter().map(|k| k.adjoint()).collect()),
            superop: switch_side_superop(&self.superop),
            side,
        }
    }

    pub fn dual(&self) -> ChannelRep {
        self.to_side(Side::Dual)
    }

    pub fn predual(&self) -> ChannelRep {
        self.to_side(Side::Predual)
    }

    /// `self ∘ other`, both taken on `self`'s side.
    pub fn compose(&self, other: &ChannelRep) -> Result<ChannelRep> {
        if self.dim != other.dim {
            return Err(Error::dim("composing maps of different dimension"));
        }
        let other = other.to_side(self.side);
        let kraus = match (&self.kraus, &other.kraus) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .flat_map(|ka| b.iter().map(move |kb| ka * kb))
                    .collect(),
            ),
            _ => None,
        };
        Ok(ChannelRep {
            dim: self.dim,
            kraus,
            superop: &self.superop * &other.superop,
            side: self.side,
        })
    }

    /// Largest deviation from trace preservation of the predual map.
    pub fn trace_preservation_defect(&self) -> f64 {
        let pre = self.predual();
        let d = self.dim;
        let id = vec_col(&CMatrix::identity(d, d));
        // tr(Φ_*(X)) = vec(I)ᵀ S vec(X) must equal vec(I)ᵀ vec(X)
        let row = id.transpose() * &pre.superop;
        (row - id.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    /// `Θ ∘ Φ ∘ Θ` for the reversing operation defined by `basis`.
    ///
    /// Θ is self-dual under the trace pairing, so the result lives on the
    /// same side as `self`.
    pub fn theta_conjugated(&self, basis: &CMatrix) -> ChannelRep {
        let r = theta_superop(basis);
        ChannelRep {
            dim: self.dim,
            kraus: self.kraus.as_ref().map(|ks| {
                ks.iter()
                    .map(|k| theta_conjugate_unchecked(&k.adjoint(), basis))
                    .collect()
            }),
            superop: &r * &self.superop * &r,
            side: self.side,
        }
    }
}

/// Spec-named alias of [`ChannelRep::from_kraus`].
pub fn kraus_to_super(kraus: Vec<CMatrix>, side: Side) -> Result<ChannelRep> {
    ChannelRep::from_kraus(kraus, side)
}

/// Superoperator of the (linear) reversing operation Θ.
pub fn theta_superop(basis: &CMatrix) -> CMatrix {
    let d = basis.nrows();
    let mut r = CMatrix::zeros(d * d, d * d);
    for col in 0..d * d {
        let mut unit = CVector::zeros(d * d);
        unit[col] = ONE;
        let image = theta_conjugate_unchecked(&unvec_col(&unit, d), basis);
        r.set_column(col, &vec_col(&image));
    }
    r
}

/// Special GKSL representation `(H, {L_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GkslGenerator {
    h: CMatrix,
    lindblad_ops: Vec<CMatrix>,
}

impl GkslGenerator {
    pub fn new(h: CMatrix, lindblad_ops: Vec<CMatrix>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::dim("Hamiltonian must be square"));
        }
        let d = h.nrows();
        let scale = max_abs(&h).max(1.0);
        if max_abs(&(&h - h.adjoint())) > 1e-12 * scale {
            return Err(Error::invalid("Hamiltonian is not Hermitian"));
        }
        if lindblad_ops.iter().any(|l| l.nrows() != d || l.ncols() != d) {
            return Err(Error::dim("Lindblad operators must match the Hamiltonian size"));
        }
        Ok(GkslGenerator { h, lindblad_ops })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    pub fn lindblad_ops(&self) -> &[CMatrix] {
        &self.lindblad_ops
    }

    /// Superoperator of `L` (dual) or `L_*` (predual).
    ///
    /// `L(x) = i[H, x] − ½ Σ (L*L x − 2 L* x L + x L*L)` and
    /// `L_*(ρ) = −i[H, ρ] + Σ (L ρ L* − ½ {L*L, ρ})`.
    pub fn superop(&self, side: Side) -> CMatrix {
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        let i = C64::new(0.0, 1.0);
        let half = C64::from(0.5);
        // predual, column stacking: vec(AXB) = (Bᵀ ⊗ A) vec(X)
        let mut s = (id.kronecker(&self.h) - self.h.transpose().kronecker(&id)) * (-i);
        for l in &self.lindblad_ops {
            let ll = l.adjoint() * l;
            s += l.map(|z| z.conj()).kronecker(l);
            s -= id.kronecker(&ll) * half;
            s -= ll.transpose().kronecker(&id) * half;
        }
        match side {
            Side::Predual => s,
            Side::Dual => switch_side_superop(&s),
        }
    }
}

/// `gksl_super(gen, side)`.
pub fn gksl_super(gen: &GkslGenerator, side: Side) -> CMatrix {
    gen.superop(side)
}

/// Uniformly continuous QMS given by its predual generator `L_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup {
    generator: CMatrix,
    dim: usize,
}

impl Semigroup {
    pub fn from_gksl(gen: &GkslGenerator) -> Self {
        Semigroup {
            generator: gen.superop(Side::Predual),
            dim: gen.dim(),
        }
    }

    /// From a predual generator superoperator; `L_*` must be trace-annihilating.
    pub fn from_predual_generator(generator: CMatrix) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::dim("generator must be square"));
        }
        let dim = square_dim(generator.nrows())?;
        let sg = Semigroup { generator, dim };
        let defect = sg.trace_defect();
        if defect > 1e-10 {
            return Err(Error::invalid(format!(
                "generator does not annihilate the trace (defect {defect:e})"
            )));
        }
        Ok(sg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator_predual(&self) -> &CMatrix {
        &self.generator
    }

    pub fn generator_dual(&self) -> CMatrix {
        switch_side_superop(&self.generator)
    }

    /// `max |tr L_*(E_ij)|` over matrix units.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let id = vec_col(&CMatrix::identity(d, d));
        (id.transpose() * &self.generator)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// The predual map `T_{*t} = exp(t L_*)`.
    pub fn map(&self, t: f64) -> Result<ChannelRep> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("semigroup time must be >= 0, got {t}")));
        }
        let s = expm(&(&self.generator * C64::from(t)));
        ChannelRep::from_superop(s, Side::Predual)
    }
}

pub fn semigroup_map(sg: &Semigroup, t: f64) -> Result<ChannelRep> {
    sg.map(t)
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

/// The s-adjoint `T^(s)(x) = ρ^{−s} T_*(ρ^s x ρ^{1−s}) ρ^{−(1−s)}`, returned
/// on the dual side.
pub fn s_adjoint(ch: &ChannelRep, rho: &DensityMatrix, s: f64) -> Result<ChannelRep> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::invalid(format!("s must lie in [0, 1/2], got {s}")));
    }
    check_dims(ch, rho)?;
    rho.ensure_faithful()?;
    let pre = ch.predual();
    let (left_in, right_in) = (rho.power(s)?, rho.power(1.0 - s)?);
    let (left_out, right_out) = (rho.power(-s)?, rho.power(-(1.0 - s))?);
    let inner = right_in.transpose().kronecker(&left_in);
    let outer = right_out.transpose().kronecker(&left_out);
    let superop = outer * pre.superop() * inner;

    let kraus = if s == 0.5 {
        pre.kraus().map(|ks| {
            ks.iter()
                .map(|k| &left_out * k * &left_in)
                .collect::<Vec<_>>()
        })
    } else {
        None
    };
    Ok(ChannelRep {
        dim: ch.dim(),
        kraus,
        superop,
        side: Side::Dual,
    })
}

/// KMS adjoint `T′ = T^(1/2)`, on the dual side.
pub fn kms_adjoint(ch: &ChannelRep, rho: &DensityMatrix) -> Result<ChannelRep> {
    s_adjoint(ch, rho, 0.5)
}

/// Θ-KMS adjoint `T^Θ = Θ ∘ T′ ∘ Θ` with θ the conjugation in the
/// eigenbasis of ρ. Returned on the dual side.
pub fn theta_kms_adjoint(ch: &ChannelRep, rho: &DensityMatrix) -> Result<ChannelRep> {
    Ok(kms_adjoint(ch, rho)?.theta_conjugated(rho.eigenbasis()))
}

/// `|tr(ρ^s x ρ^{1−s} T(y)) − tr(ρ^s T^(s)(x) ρ^{1−s} y)|` for a dual map
/// and its s-adjoint.
pub fn s_duality_residual(
    ch: &ChannelRep,
    adjoint: &ChannelRep,
    rho: &DensityMatrix,
    s: f64,
    x: &CMatrix,
    y: &CMatrix,
) -> Result<f64> {
    let (rs, r1s) = (rho.power(s)?, rho.power(1.0 - s)?);
    let t = ch.dual();
    let adj = adjoint.dual();
    let lhs = trace(&(&rs * x * &r1s * t.apply(y)));
    let rhs = trace(&(&rs * adj.apply(x) * &r1s * y));
    Ok((lhs - rhs).norm())
}

/// Residual of the Θ-KMS duality relation
/// `tr(ρ^½ Θ(x*) ρ^½ T(y)) = tr(ρ^½ Θ(T^Θ(x*)) ρ^½ y)`.
pub fn theta_kms_duality_residual(
    ch: &ChannelRep,
    theta_adjoint: &ChannelRep,
    rho: &DensityMatrix,
    x: &CMatrix,
    y: &CMatrix,
) -> Result<f64> {
    let root = rho.power(0.5)?;
    let basis = rho.eigenbasis();
    let t = ch.dual();
    let adj = theta_adjoint.dual();
    let xs = x.adjoint();
    let lhs = trace(&(&root * theta_conjugate_unchecked(&xs, basis) * &root * t.apply(y)));
    let rhs = trace(
        &(&root * theta_conjugate_unchecked(&adj.apply(&xs), basis) * &root * y),
    );
    Ok((lhs - rhs).norm())
}

/// `max_t ‖T_{*t}(ρ) − ρ‖₁`.
pub fn check_invariant(sg: &Semigroup, rho: &DensityMatrix, t_samples: &[f64]) -> Result<f64> {
    if sg.dim() != rho.dim() {
        return Err(Error::dim("semigroup and state dimensions differ"));
    }
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let evolved = sg.map(t)?.apply(rho.matrix());
        worst = worst.max(trace_norm(&(evolved - rho.matrix())));
    }
    Ok(worst)
}

pub(crate) fn ensure_invariant(sg: &Semigroup, rho: &DensityMatrix, t_samples: &[f64]) -> Result<()> {
    let residual = check_invariant(sg, rho, t_samples)?;
    if residual > INVARIANCE_TOLERANCE {
        return Err(Error::NotInvariant {
            residual,
            tolerance: INVARIANCE_TOLERANCE,
        });
    }
    Ok(())
}

/// Residuals of a detailed-balance style check.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub holds: bool,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

impl BalanceReport {
    fn from_residuals(residuals: Vec<f64>) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        BalanceReport {
            holds: max_residual <= BALANCE_TOLERANCE,
            residuals,
            max_residual,
        }
    }
}

/// Θ-SQDB check: Frobenius norm of `T′_t − Θ∘T_t∘Θ` as dual superoperators.
pub fn check_theta_sqdb(sg: &Semigroup, rho: &DensityMatrix, t_samples: &[f64]) -> Result<BalanceReport> {
    ensure_invariant(sg, rho, t_samples)?;
    rho.ensure_faithful()?;
    let basis = rho.eigenbasis();
    let mut residuals = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let tt = sg.map(t)?;
        let kms = kms_adjoint(&tt, rho)?;
        let reversed = tt.dual().theta_conjugated(basis);
        residuals.push((kms.superop() - reversed.superop()).norm());
    }
    Ok(BalanceReport::from_residuals(residuals))
}

/// Frobenius norm of the commutator of Θ with a map, as superoperators.
pub fn parity_residual(ch: &ChannelRep, basis: &CMatrix) -> f64 {
    let r = theta_superop(basis);
    let s = ch.dual();
    (&r * s.superop() - s.superop() * &r).norm()
}

/// Whether every `T_t` commutes with Θ (θ-basis = eigenbasis of ρ).
pub fn is_parity_preserving(sg: &Semigroup, rho: &DensityMatrix, t_samples: &[f64]) -> Result<BalanceReport> {
    if sg.dim() != rho.dim() {
        return Err(Error::dim("semigroup and state dimensions differ"));
    }
    let residuals = t_samples
        .iter()
        .map(|&t| Ok(parity_residual(&sg.map(t)?, rho.eigenbasis())))
        .collect::<Result<Vec<_>>>()?;
    Ok(BalanceReport::from_residuals(residuals))
}

/// An invariant state from the null space of `L_*`.
pub fn stationary_state(sg: &Semigroup) -> Result<DensityMatrix> {
    let d = sg.dim();
    let svd = sg.generator_predual().clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Domain("SVD of the generator failed".into()))?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("generator is non-empty");
    let null = v_t.row(k).adjoint();
    let m = unvec_col(&null, d);
    let tr = trace(&m);
    if tr.norm() < 1e-12 {
        return Err(Error::Domain("null vector of the generator is traceless".into()));
    }
    let m = m / tr;
    let m = (&m + m.adjoint()) * C64::from(0.5);
    make_density(m)
}
