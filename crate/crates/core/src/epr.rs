//! Relative entropy between forward and time-reversed Choi states and the
//! entropy production rate obtained from it.

use rayon::prelude::*;

use crate::channels::{ensure_invariant, theta_kms_adjoint, Semigroup};
use crate::choi::{apply_on_factor, choi_in_basis, choi_state, first_factor_density, omega_matrix};
use crate::error::{Error, Result};
use crate::linalg::{eigh, herm_func_eig, trace, CMatrix, Factor, HermFn};
use crate::states::{relative_entropy_eig, DensityMatrix};

pub const DEFAULT_T0: f64 = 1e-2;
pub const DEFAULT_LEVELS: usize = 6;

/// How an entropy production rate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprMethod {
    ClosedForm,
    GeneratorLimit,
    SlopeFit,
}

impl EprMethod {
    pub fn name(self) -> &'static str {
        match self {
            EprMethod::ClosedForm => "closed_form",
            EprMethod::GeneratorLimit => "generator_limit",
            EprMethod::SlopeFit => "slope_fit",
        }
    }
}

/// An entropy production rate, possibly `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EprEstimate {
    pub value: f64,
    pub method: EprMethod,
    pub t_grid: Vec<f64>,
    pub raw_s: Vec<f64>,
    pub extrapolation_error: f64,
}

impl EprEstimate {
    pub fn exact(value: f64, method: EprMethod) -> Self {
        EprEstimate {
            value,
            method,
            t_grid: Vec::new(),
            raw_s: Vec::new(),
            extrapolation_error: 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// `S(J_ρ(T_{*t}), J_ρ(T^Θ_{*t}))` together with the symmetric formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupRelEntropy {
    pub value: f64,
    /// `½ tr((J − J^Θ)(log J − log J^Θ))`, logs taken on the supports.
    pub symmetric: f64,
    /// False when `J` has weight on the kernel of `J^Θ`; then `value = +∞`.
    pub kernel_ok: bool,
}

fn relent_pair(forward: &CMatrix, backward: &CMatrix) -> Result<SemigroupRelEntropy> {
    let fwd = eigh(forward)?;
    let bwd = eigh(backward)?;
    let rel = relative_entropy_eig(forward, &fwd, &bwd);
    if !rel.kernel_ok {
        return Ok(SemigroupRelEntropy {
            value: f64::INFINITY,
            symmetric: f64::INFINITY,
            kernel_ok: false,
        });
    }
    let log_diff = herm_func_eig(&fwd, HermFn::Log)? - herm_func_eig(&bwd, HermFn::Log)?;
    let symmetric = 0.5 * trace(&((forward - backward) * log_diff)).re;
    Ok(SemigroupRelEntropy {
        value: rel.value,
        symmetric,
        kernel_ok: true,
    })
}

fn check_preconditions(sg: &Semigroup, rho: &DensityMatrix, t_samples: &[f64]) -> Result<()> {
    if sg.dim() != rho.dim() {
        return Err(Error::dim("semigroup and state dimensions differ"));
    }
    rho.ensure_faithful()?;
    ensure_invariant(sg, rho, t_samples)
}

/// Relative entropy of the forward Choi state with respect to the Θ-KMS
/// reversed one at time `t`.
pub fn relent_semigroup(sg: &Semigroup, rho: &DensityMatrix, t: f64) -> Result<SemigroupRelEntropy> {
    check_preconditions(sg, rho, &[t])?;
    relent_unchecked(sg, rho, t)
}

fn relent_unchecked(sg: &Semigroup, rho: &DensityMatrix, t: f64) -> Result<SemigroupRelEntropy> {
    let tt = sg.map(t)?;
    let forward = choi_state(&tt, rho)?;
    let backward = choi_state(&theta_kms_adjoint(&tt, rho)?, rho)?;
    relent_pair(forward.matrix(), backward.matrix())
}

/// As [`relent_semigroup`], with both Choi states built in the basis `U e_i`.
pub fn relent_semigroup_in_basis(
    sg: &Semigroup,
    rho: &DensityMatrix,
    t: f64,
    u: &CMatrix,
) -> Result<SemigroupRelEntropy> {
    check_preconditions(sg, rho, &[t])?;
    let tt = sg.map(t)?;
    let forward = choi_in_basis(&tt, rho, u)?;
    let backward = choi_in_basis(&theta_kms_adjoint(&tt, rho)?, rho, u)?;
    relent_pair(forward.matrix(), backward.matrix())
}

/// `S(D→_t, D←_t)` with `D← = (T_{*t} ⊗ 1)(ω_ρ)`.
pub fn fr_relent(sg: &Semigroup, rho: &DensityMatrix, t: f64) -> Result<SemigroupRelEntropy> {
    check_preconditions(sg, rho, &[t])?;
    fr_relent_unchecked(sg, rho, t)
}

fn fr_relent_unchecked(sg: &Semigroup, rho: &DensityMatrix, t: f64) -> Result<SemigroupRelEntropy> {
    let tt = sg.map(t)?;
    let forward = choi_state(&tt, rho)?;
    let backward = first_factor_density(&tt, rho)?;
    relent_pair(forward.matrix(), &backward)
}

/// `J_ρ(L_*) = (1 ⊗ L_*)(ω_ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiGenerator {
    pub matrix: CMatrix,
    pub trace: f64,
}

pub fn choi_generator(sg: &Semigroup, rho: &DensityMatrix) -> Result<ChoiGenerator> {
    if sg.dim() != rho.dim() {
        return Err(Error::dim("semigroup and state dimensions differ"));
    }
    let omega = omega_matrix(rho, rho.eigenbasis());
    let matrix = apply_on_factor(sg.generator_predual(), &omega, Factor::Second)?;
    let trace = trace(&matrix).re;
    Ok(ChoiGenerator { matrix, trace })
}

/// Geometric grid `t_k = t0 · 2^{-k}`, `k = 0..levels`.
pub fn slope_grid(t0: f64, levels: usize) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::invalid(format!("t0 must be positive, got {t0}")));
    }
    if levels == 0 {
        return Err(Error::invalid("levels must be at least 1"));
    }
    Ok((0..levels).map(|k| t0 * 0.5f64.powi(k as i32)).collect())
}

/// Richardson extrapolation to `h → 0` of values on a grid halving at each
/// step, assuming an expansion in integer powers of `h`.
///
/// Returns the last diagonal entry of the table and its distance to the
/// previous diagonal entry.
pub fn richardson(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let mut prev: Vec<f64> = values.to_vec();
    let mut diagonal = vec![values[0]];
    for j in 1..n {
        let factor = 2f64.powi(j as i32) - 1.0;
        let next: Vec<f64> = (1..prev.len())
            .map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor)
            .collect();
        diagonal.push(*next.last().expect("row is non-empty"));
        prev = next;
    }
    let value = diagonal[n - 1];
    let error = if n > 1 {
        (value - diagonal[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    (value, error)
}

fn slope_estimate(t_grid: Vec<f64>, raw_s: Vec<f64>) -> EprEstimate {
    let finite_from = raw_s
        .iter()
        .rposition(|s| !s.is_finite())
        .map_or(0, |k| k + 1);
    let (value, extrapolation_error) = if finite_from == raw_s.len() {
        (f64::INFINITY, 0.0)
    } else {
        let ratios: Vec<f64> = (finite_from..raw_s.len())
            .map(|k| raw_s[k] / t_grid[k])
            .collect();
        let (v, e) = richardson(&ratios);
        (v.max(0.0), e)
    };
    EprEstimate {
        value,
        method: EprMethod::SlopeFit,
        t_grid,
        raw_s,
        extrapolation_error,
    }
}

fn slope_with(
    sg: &Semigroup,
    rho: &DensityMatrix,
    t0: f64,
    levels: usize,
    relent: impl Fn(&Semigroup, &DensityMatrix, f64) -> Result<SemigroupRelEntropy> + Sync,
) -> Result<EprEstimate> {
    let grid = slope_grid(t0, levels)?;
    check_preconditions(sg, rho, &[t0, 1.0])?;
    let raw_s = grid
        .par_iter()
        .map(|&t| relent(sg, rho, t).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(slope_estimate(grid, raw_s))
}

/// `e_p = lim S(t)/t` from the geometric grid with Richardson extrapolation.
pub fn epr_slope(sg: &Semigroup, rho: &DensityMatrix, t0: f64, levels: usize) -> Result<EprEstimate> {
    slope_with(sg, rho, t0, levels, relent_unchecked)
}

/// The same slope procedure on the Fagnola–Rebolledo density pair.
pub fn fr_epr(sg: &Semigroup, rho: &DensityMatrix, t0: f64, levels: usize) -> Result<EprEstimate> {
    slope_with(sg, rho, t0, levels, fr_relent_unchecked)
}

/// `S(t)` for a list of times, evaluated in parallel.
pub fn relent_series(sg: &Semigroup, rho: &DensityMatrix, times: &[f64]) -> Result<Vec<SemigroupRelEntropy>> {
    check_preconditions(sg, rho, times)?;
    times
        .par_iter()
        .map(|&t| relent_unchecked(sg, rho, t))
        .collect()
}
