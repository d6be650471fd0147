//! Block circulant semigroups on `C^p ⊗ C^q`: permutation Kraus operators,
//! DFT spectral data, the `u_{mn}` Choi eigenbasis and the closed-form
//! entropy production rate.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::channels::{ChannelRep, GkslGenerator, Semigroup, Side};
use crate::choi::{ChoiState, omega_matrix};
use crate::epr::{choi_generator, EprEstimate, EprMethod};
use crate::error::{Error, Result};
use crate::linalg::{flip_operator, kron, trace, CMatrix, CVector, C64, ONE};
use crate::states::DensityMatrix;

/// Tolerance on `Σ α = 1`.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-12;

/// Arithmetic in `Z_p × Z_q`, flattened row-major as `m·q + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicIndex {
    pub p: usize,
    pub q: usize,
}

impl CyclicIndex {
    pub fn len(self) -> usize {
        self.p * self.q
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(m mod p, n mod q)`.
    pub fn flat(self, m: usize, n: usize) -> usize {
        (m % self.p) * self.q + n % self.q
    }

    pub fn pair(self, k: usize) -> (usize, usize) {
        (k / self.q, k % self.q)
    }

    /// `(p − m, q − n)` reduced, i.e. `−(m, n)`.
    pub fn neg(self, m: usize, n: usize) -> (usize, usize) {
        ((self.p - m % self.p) % self.p, (self.q - n % self.q) % self.q)
    }

    pub fn add(self, a: (usize, usize), b: (usize, usize)) -> (usize, usize) {
        ((a.0 + b.0) % self.p, (a.1 + b.1) % self.q)
    }

    /// `b − a`.
    pub fn sub(self, b: (usize, usize), a: (usize, usize)) -> (usize, usize) {
        self.add(b, self.neg(a.0, a.1))
    }
}

/// A probability distribution α on `Z_p × Z_q` with `α(0,0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpec {
    index: CyclicIndex,
    alpha: Vec<f64>,
}

impl CirculantSpec {
    /// `alpha` is row-major: `alpha[m·q + n] = α(m, n)`.
    pub fn new(p: usize, q: usize, alpha: Vec<f64>) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("p and q must be at least 1"));
        }
        if alpha.len() != p * q {
            return Err(Error::invalid(format!(
                "alpha has {} entries, expected p*q = {}",
                alpha.len(),
                p * q
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::invalid(format!("alpha entries must be nonnegative, found {a}")));
        }
        if alpha[0] != 0.0 {
            return Err(Error::invalid(format!("alpha(0,0) must be 0, found {}", alpha[0])));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(Error::invalid(format!("alpha must sum to 1, sums to {sum}")));
        }
        Ok(CirculantSpec {
            index: CyclicIndex { p, q },
            alpha,
        })
    }

    pub fn p(&self) -> usize {
        self.index.p
    }

    pub fn q(&self) -> usize {
        self.index.q
    }

    pub fn index(&self) -> CyclicIndex {
        self.index
    }

    /// Dimension `pq` of the system.
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn alpha_values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha(&self, m: usize, n: usize) -> f64 {
        self.alpha[self.index.flat(m, n)]
    }

    /// `α(p − m, q − n)`.
    pub fn reversed_alpha(&self, m: usize, n: usize) -> f64 {
        let (a, b) = self.index.neg(m, n);
        self.alpha(a, b)
    }

    /// Whether `α(m, n) = α(p − m, q − n)` for all entries, within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim()).all(|k| {
            let (m, n) = self.index.pair(k);
            (self.alpha(m, n) - self.reversed_alpha(m, n)).abs() <= tol
        })
    }
}

/// `J_p = Σ_i |e_i⟩⟨e_{i+1 mod p}|`.
pub fn primary_permutation(p: usize) -> Result<CMatrix> {
    if p == 0 {
        return Err(Error::invalid("primary permutation needs p >= 1"));
    }
    Ok(shift_power(p, 1))
}

/// `J_p^i`, with entry 1 at `(r, r + i mod p)`.
fn shift_power(p: usize, i: usize) -> CMatrix {
    CMatrix::from_fn(p, p, |r, c| if (r + i) % p == c { ONE } else { C64::from(0.0) })
}

/// Kraus family `{√α(p−i, q−j) J_p^i ⊗ J_q^j}` (zero weights dropped).
pub fn circulant_kraus(spec: &CirculantSpec) -> Vec<CMatrix> {
    let idx = spec.index();
    (0..idx.len())
        .filter_map(|k| {
            let (i, j) = idx.pair(k);
            let weight = spec.reversed_alpha(i, j);
            (weight > 0.0).then(|| {
                kron(&shift_power(idx.p, i), &shift_power(idx.q, j)) * C64::from(weight.sqrt())
            })
        })
        .collect()
}

/// The predual circulant CP map `Φ_*`.
pub fn circulant_channel(spec: &CirculantSpec) -> ChannelRep {
    ChannelRep::from_kraus(circulant_kraus(spec), Side::Predual)
        .expect("alpha sums to one, so the Kraus family is non-empty")
}

/// Semigroup generated by `L_* = Φ_* − id`.
pub fn circulant_semigroup(spec: &CirculantSpec) -> Semigroup {
    let n = spec.dim() * spec.dim();
    let generator = circulant_channel(spec).superop() - CMatrix::identity(n, n);
    Semigroup::from_predual_generator(generator).expect("circulant generator preserves the trace")
}

/// The same generator in GKSL form, `H = 0` with the circulant Kraus operators.
pub fn circulant_gksl(spec: &CirculantSpec) -> GkslGenerator {
    let d = spec.dim();
    GkslGenerator::new(CMatrix::zeros(d, d), circulant_kraus(spec)).expect("valid by construction")
}

/// Classical generator `Q = Π − 1` with `Π[x, x + g] = α(g)`.
pub fn classical_generator(spec: &CirculantSpec) -> DMatrix<f64> {
    let idx = spec.index();
    let n = idx.len();
    DMatrix::from_fn(n, n, |x, y| {
        let g = idx.sub(idx.pair(y), idx.pair(x));
        spec.alpha(g.0, g.1) - if x == y { 1.0 } else { 0.0 }
    })
}

fn root_of_unity(k: usize, p: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (k % p) as f64 / p as f64)
}

/// Eigenvalues `λ_{kl}` of Q and the functions `Φ_{m,n}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    index: CyclicIndex,
    lambda: Vec<C64>,
}

impl CirculantSpectrum {
    /// `λ_{kl} = Σ α(i,j) ω̄_p^{ik} ω̄_q^{jl} − 1`.
    pub fn lambda(&self, k: usize, l: usize) -> C64 {
        self.lambda[self.index.flat(k, l)]
    }

    pub fn lambdas(&self) -> &[C64] {
        &self.lambda
    }

    /// `Φ_{m,n}(t) = Σ_{k,l} ω_p^{mk} ω_q^{nl} e^{t λ_{kl}}`, indices mod (p, q).
    pub fn phi(&self, m: usize, n: usize, t: f64) -> C64 {
        let CyclicIndex { p, q } = self.index;
        (0..self.index.len())
            .map(|kl| {
                let (k, l) = self.index.pair(kl);
                root_of_unity(m * k, p) * root_of_unity(n * l, q) * (self.lambda[kl] * t).exp()
            })
            .sum()
    }

    /// `(1/pq) Φ_{m,n}(t)` in flat order `m·q + n`.
    pub fn choi_weights(&self, t: f64) -> Vec<f64> {
        let scale = 1.0 / self.index.len() as f64;
        (0..self.index.len())
            .map(|g| {
                let (m, n) = self.index.pair(g);
                self.phi(m, n, t).re * scale
            })
            .collect()
    }
}

pub fn circulant_spectrum(spec: &CirculantSpec) -> CirculantSpectrum {
    let idx = spec.index();
    let lambda = (0..idx.len())
        .map(|kl| {
            let (k, l) = idx.pair(kl);
            let sum: C64 = (0..idx.len())
                .map(|ij| {
                    let (i, j) = idx.pair(ij);
                    (root_of_unity(i * k, idx.p) * root_of_unity(j * l, idx.q)).conj()
                        * spec.alpha(i, j)
                })
                .sum();
            sum - ONE
        })
        .collect();
    CirculantSpectrum { index: idx, lambda }
}

/// `u_{mn} = (pq)^{-1/2} Σ_{i,j} (e_i ⊗ e_j) ⊗ (e_{m+i} ⊗ e_{n+j})`, in flat
/// order `m·q + n`.
pub fn u_basis(p: usize, q: usize) -> Result<Vec<CVector>> {
    if p == 0 || q == 0 {
        return Err(Error::invalid("p and q must be at least 1"));
    }
    let idx = CyclicIndex { p, q };
    let n = idx.len();
    let norm = C64::from(1.0 / (n as f64).sqrt());
    Ok((0..n)
        .map(|g| {
            let shift = idx.pair(g);
            let mut u = CVector::zeros(n * n);
            for x in 0..n {
                let y = idx.add(idx.pair(x), shift);
                u[x * n + idx.flat(y.0, y.1)] = norm;
            }
            u
        })
        .collect())
}

fn diagonal_in_u(weights: &[f64], basis: &[CVector]) -> CMatrix {
    let n = basis[0].len();
    weights
        .iter()
        .zip(basis)
        .fold(CMatrix::zeros(n, n), |acc, (&w, u)| acc + u * u.adjoint() * C64::from(w))
}

/// `J_ρ(T_{*t}) = (1/pq) Σ Φ_{m,n}(t) |u_{mn}⟩⟨u_{mn}|` with `ρ = I/pq`.
pub fn circulant_choi(spec: &CirculantSpec, t: f64) -> Result<ChoiState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("semigroup time must be >= 0, got {t}")));
    }
    let d = spec.dim();
    let weights = circulant_spectrum(spec).choi_weights(t);
    let matrix = diagonal_in_u(&weights, &u_basis(spec.p(), spec.q())?);
    Ok(ChoiState::new(
        matrix,
        &DensityMatrix::maximally_mixed(d),
        CMatrix::identity(d, d),
    ))
}

/// One term `½ (a − b) ln(a / b)`, with `0` when both vanish and `+∞` when
/// exactly one does.
fn kl_term(a: f64, b: f64) -> f64 {
    match (a > 0.0, b > 0.0) {
        (false, false) => 0.0,
        (true, true) => 0.5 * (a - b) * (a / b).ln(),
        _ => f64::INFINITY,
    }
}

/// `e_p = ½ Σ (α(m,n) − α(p−m,q−n)) ln(α(m,n)/α(p−m,q−n))`.
pub fn closed_form_epr(spec: &CirculantSpec) -> EprEstimate {
    let idx = spec.index();
    let value = (0..idx.len())
        .map(|g| {
            let (m, n) = idx.pair(g);
            kl_term(spec.alpha(m, n), spec.reversed_alpha(m, n))
        })
        .sum();
    EprEstimate::exact(value, EprMethod::ClosedForm)
}

/// `½ tr((J(L_*) − J(L^Θ_*)) · lim (log J(T_{*t}) − log J(T^Θ_{*t})))` with
/// `J(L_*)` computed densely and the limit taken on the `u_{mn}` basis.
pub fn generator_limit_epr(spec: &CirculantSpec) -> Result<EprEstimate> {
    let idx = spec.index();
    let d = spec.dim();
    let mut log_limit = Vec::with_capacity(idx.len());
    for g in 0..idx.len() {
        let (m, n) = idx.pair(g);
        let (a, b) = (spec.alpha(m, n), spec.reversed_alpha(m, n));
        log_limit.push(match (g == 0, a > 0.0, b > 0.0) {
            (true, _, _) | (false, false, false) => 0.0,
            (false, true, true) => (a / b).ln(),
            _ => return Ok(EprEstimate::exact(f64::INFINITY, EprMethod::GeneratorLimit)),
        });
    }
    let rho = DensityMatrix::maximally_mixed(d);
    let jl = choi_generator(&circulant_semigroup(spec), &rho)?.matrix;
    let f = flip_operator(d);
    let jl_theta = &f * &jl * &f;
    let limit = diagonal_in_u(&log_limit, &u_basis(spec.p(), spec.q())?);
    let value = 0.5 * trace(&((jl - jl_theta) * limit)).re;
    Ok(EprEstimate::exact(value, EprMethod::GeneratorLimit))
}

/// `ω_{I/pq}`, the maximally entangled projector on `C^{pq} ⊗ C^{pq}`.
pub fn circulant_omega(spec: &CirculantSpec) -> CMatrix {
    let d = spec.dim();
    omega_matrix(&DensityMatrix::maximally_mixed(d), &CMatrix::identity(d, d))
}
