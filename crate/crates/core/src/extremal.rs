//! Gram-matrix analysis and the minimal-closeness ensembles.
//!
//! For `n` states in dimension `d` the Gram matrix `G` has unit diagonal,
//! trace `n` and rank at most `d`, so `Tr G² ≥ n²/d` by the power-mean
//! inequality on its nonzero eigenvalues. Since
//! `C = (Tr G² - n) / (n(n-1))` this gives
//!
//! ```text
//! c_min(n, d) = (n - d) / (d (n - 1))   for n > d,   0 otherwise,
//! ```
//!
//! attained by the Fourier-type states
//! `|ψ_j⟩ = d^{-1/2} Σ_k ω^{jk} |k⟩` with `ω = e^{2πi/n}`. Note that the
//! root of unity is the `n`-th, not the `d`-th.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, CVector, C64};
use crate::states::{PureState, StateEnsemble};

/// Eigenvalues at or below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Gram matrix `G_ij = ⟨ψ_i|ψ_j⟩` with its spectrum cached in descending
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    eigenvalues: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr G² = Σ_ij |G_ij|²`, computed from the entries.
    pub fn trace_of_square(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Number of eigenvalues above `RANK_TOLERANCE × λ₁`.
    pub fn numerical_rank(&self) -> usize {
        let cutoff = RANK_TOLERANCE * self.eigenvalues[0].max(0.0);
        self.eigenvalues.iter().filter(|&&l| l > cutoff).count()
    }

    /// Checks the structural invariants of a Gram matrix of states living
    /// in dimension `d`. Returns a description of the first violation.
    pub fn check_invariants(&self, d: usize) -> Result<(), String> {
        let n = self.n();
        for i in 0..n {
            if (self.entries[(i, i)] - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(format!("diagonal entry {i} is {}", self.entries[(i, i)]));
            }
            for j in 0..i {
                let r = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                if r > 1e-12 {
                    return Err(format!("not Hermitian at ({i}, {j}): residue {r:e}"));
                }
            }
        }
        let min = *self.eigenvalues.last().expect("n >= 2");
        if min < -1e-10 {
            return Err(format!("negative eigenvalue {min:e}"));
        }
        if (self.trace() - n as f64).abs() > 1e-10 {
            return Err(format!("trace {} differs from n = {n}", self.trace()));
        }
        if self.numerical_rank() > d {
            return Err(format!("numerical rank {} exceeds d = {d}", self.numerical_rank()));
        }
        Ok(())
    }
}

pub fn gram_matrix(e: &StateEnsemble) -> GramMatrix {
    let n = e.n();
    let states = e.states();
    let entries = CMatrix::from_fn(n, n, |i, j| states[i].amplitudes().dotc(states[j].amplitudes()));
    let eigenvalues = hermitian_eigenvalues(&entries);
    GramMatrix { entries, eigenvalues }
}

/// Closeness through the Gram spectrum: `(Σ λ_i² - n) / (n(n-1))`.
///
/// Independent of the pairwise sum in [`crate::states::closeness`], which it
/// is used to cross-check.
pub fn closeness_via_gram(e: &StateEnsemble) -> f64 {
    let g = gram_matrix(e);
    let n = g.n() as f64;
    let sum_sq: f64 = g.eigenvalues.iter().map(|l| l * l).sum();
    (sum_sq - n) / (n * (n - 1.0))
}

/// Smallest achievable closeness of `n` states in dimension `d`.
pub fn c_min(n: usize, d: usize) -> Result<f64> {
    if n < 2 || d < 2 {
        return Err(Error::Domain(format!("c_min needs n >= 2 and d >= 2, got n={n}, d={d}")));
    }
    if n <= d {
        return Ok(0.0);
    }
    Ok((n - d) as f64 / (d * (n - 1)) as f64)
}

/// An ensemble whose closeness equals [`c_min`].
///
/// For `n ≤ d` these are the first `n` computational basis states; otherwise
/// the Fourier-type states with `ω = e^{2πi/n}`.
pub fn minimal_ensemble(n: usize, d: usize) -> Result<StateEnsemble> {
    if d < 2 {
        return Err(Error::Domain(format!("minimal ensemble needs d >= 2, got {d}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("minimal ensemble needs n >= 2, got {n}")));
    }
    if n <= d {
        let states = (0..n).map(|i| PureState::basis(d, i)).collect::<Result<Vec<_>>>()?;
        return StateEnsemble::new(states);
    }
    let scale = 1.0 / (d as f64).sqrt();
    let states = (0..n)
        .map(|j| {
            // reduce jk mod n before forming the angle to keep it small
            let amps = CVector::from_fn(d, |k, _| {
                let phase = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                C64::from_polar(scale, phase)
            });
            PureState::new(amps)
        })
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(states)
}

/// `Tr G² - n²/d`; nonnegative for every ensemble in dimension `d`, zero
/// exactly when the top `d` eigenvalues all equal `n/d`.
pub fn power_mean_gap(g: &GramMatrix, d: usize) -> f64 {
    let n = g.n() as f64;
    g.trace_of_square() - n * n / d as f64
}
