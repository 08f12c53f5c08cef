//! Small dense linear-algebra helpers shared by the other modules.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Inner product `⟨a|b⟩` (conjugate-linear in the first argument).
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// Only the lower triangle is read by the solver; callers are responsible
/// for Hermiticity.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Singular values sorted descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Largest entrywise modulus.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise max of `|M - M†|`.
pub fn hermiticity_residue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product of vectors, first factor most significant.
pub fn kron_vectors<'a, I>(factors: I) -> CVector
where
    I: IntoIterator<Item = &'a CVector>,
{
    let mut acc = CVector::from_element(1, ONE);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

/// `d^n` if it fits in `usize`.
pub fn checked_pow(d: usize, n: usize) -> Option<usize> {
    let exp = u32::try_from(n).ok()?;
    d.checked_pow(exp)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
