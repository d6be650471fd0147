//! Seeded random test objects: matrices, states, unitaries and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::GkslGenerator;
use crate::linalg::{CMatrix, C64};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(g: &mut impl Rng) -> C64 {
    C64::new(g.sample(StandardNormal), g.sample(StandardNormal))
}

/// Ginibre matrix with standard complex Gaussian entries.
pub fn random_matrix(d: usize, g: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| gaussian(g))
}

pub fn random_rect(rows: usize, cols: usize, g: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(g))
}

pub fn random_hermitian(d: usize, g: &mut impl Rng) -> CMatrix {
    let a = random_matrix(d, g);
    (&a + a.adjoint()) * C64::from(0.5)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary(d: usize, g: &mut impl Rng) -> CMatrix {
    let qr = random_matrix(d, g).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { C64::from(1.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Full-rank density matrix `G G* / tr(G G*)`.
pub fn random_density_matrix(d: usize, g: &mut impl Rng) -> CMatrix {
    let a = random_matrix(d, g);
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

/// Kraus family of a random CPTP map (blocks of a random isometry).
pub fn random_cptp_kraus(d: usize, count: usize, g: &mut impl Rng) -> Vec<CMatrix> {
    let stacked = random_rect(d * count, d, g);
    let q = stacked.qr().q();
    (0..count)
        .map(|k| q.view((k * d, 0), (d, d)).into_owned())
        .collect()
}

/// Kraus family of a random CP map that need not preserve the trace.
pub fn random_cp_kraus(d: usize, count: usize, g: &mut impl Rng) -> Vec<CMatrix> {
    (0..count)
        .map(|_| random_matrix(d, g) * C64::from(0.5))
        .collect()
}

/// GKSL generator with random Hamiltonian and jump operators.
pub fn random_gksl(d: usize, ops: usize, g: &mut impl Rng) -> GkslGenerator {
    let h = random_hermitian(d, g) * C64::from(0.5);
    let lindblad_ops = (0..ops)
        .map(|_| random_matrix(d, g) * C64::from(0.4))
        .collect();
    GkslGenerator::new(h, lindblad_ops).expect("random generator is valid")
}
