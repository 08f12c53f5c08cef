//! Operators and POVMs on the composite space `H^⊗n`, outcome statistics,
//! and the symmetric-subspace comparison measurement for `A = 1`.
//!
//! Composite indices put the first tensor factor in the most significant
//! digit: `|i₁ … i_n⟩ ↦ Σ_k i_k d^{n-1-k}`.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{
    checked_pow, hermitian_eigenvalues, hermiticity_residue, kron_vectors, max_abs_entry, CMatrix, CVector,
    C64,
};
use crate::states::{PureState, StateEnsemble};

/// Largest composite dimension `d^n` any operator may have.
pub const MAX_COMPOSITE_DIM: usize = 4096;

/// Largest factor count for the explicit `n!` permutation sum.
pub const MAX_PERMUTATION_FACTORS: usize = 6;

/// Tolerance on the imaginary part of an expectation value.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Relative to the spectral norm of the element.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

/// `d^n`, or `SizeCapError` above [`MAX_COMPOSITE_DIM`].
pub fn composite_dim(n: usize, d: usize) -> Result<usize> {
    match checked_pow(d, n) {
        Some(total) if total <= MAX_COMPOSITE_DIM => Ok(total),
        _ => {
            Err(Error::SizeCap(format!("composite dimension {d}^{n} exceeds the cap of {MAX_COMPOSITE_DIM}")))
        }
    }
}

/// A dense `d^n × d^n` operator on `H^⊗n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOperator {
    n: usize,
    dim: usize,
    matrix: CMatrix,
}

impl CompositeOperator {
    pub fn new(n: usize, dim: usize, matrix: CMatrix) -> Result<Self> {
        let total = composite_dim(n, dim)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::Dimension(format!(
                "expected a {total}x{total} matrix for n={n}, d={dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { n, dim, matrix })
    }

    pub fn identity(n: usize, dim: usize) -> Result<Self> {
        let total = composite_dim(n, dim)?;
        Ok(Self { n, dim, matrix: CMatrix::identity(total, total) })
    }

    pub fn zero(n: usize, dim: usize) -> Result<Self> {
        let total = composite_dim(n, dim)?;
        Ok(Self { n, dim, matrix: CMatrix::zeros(total, total) })
    }

    /// Rank-one projector `|v⟩⟨v|` for a unit vector `v`.
    pub fn projector_onto(n: usize, dim: usize, v: &CVector) -> Result<Self> {
        Self::new(n, dim, v * v.adjoint())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d^n`.
    pub fn total_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n: self.n, dim: self.dim, matrix: &self.matrix * C64::new(factor, 0.0) }
    }

    /// `I - self`.
    pub fn complement(&self) -> Self {
        let total = self.total_dim();
        Self { n: self.n, dim: self.dim, matrix: CMatrix::identity(total, total) - &self.matrix }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

/// `|ψ₁⟩ ⊗ ⋯ ⊗ |ψ_n⟩` with its composite amplitudes cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<PureState>,
    composite: CVector,
}

impl ProductState {
    pub fn factors(&self) -> &[PureState] {
        &self.factors
    }

    pub fn composite(&self) -> &CVector {
        &self.composite
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn from_ensemble(e: &StateEnsemble) -> Result<Self> {
        kron_state(e.states())
    }

    /// `|ψ⟩^⊗n`.
    pub fn power(state: &PureState, n: usize) -> Result<Self> {
        kron_state(&vec![state.clone(); n])
    }
}

pub fn kron_state(factors: &[PureState]) -> Result<ProductState> {
    if factors.len() < 2 {
        return Err(Error::Domain(format!(
            "a product state needs at least 2 factors, got {}",
            factors.len()
        )));
    }
    let dim = factors[0].dim();
    if let Some(bad) = factors.iter().find(|f| f.dim() != dim) {
        return Err(Error::Dimension(format!("factor dimensions differ: {dim} vs {}", bad.dim())));
    }
    composite_dim(factors.len(), dim)?;
    let composite = kron_vectors(factors.iter().map(PureState::amplitudes));
    Ok(ProductState { factors: factors.to_vec(), composite })
}

/// `⟨s|M|s⟩`. Tiny negatives in `[-1e-12, 0)` are clamped to zero.
pub fn outcome_probability(m: &CompositeOperator, s: &ProductState) -> Result<f64> {
    if m.total_dim() != s.composite.len() {
        return Err(Error::Dimension(format!(
            "operator acts on dimension {}, state has {}",
            m.total_dim(),
            s.composite.len()
        )));
    }
    let value = s.composite.dotc(&(&m.matrix * &s.composite));
    if value.im.abs() >= IMAGINARY_TOLERANCE {
        return Err(Error::NonHermitian(value.im.abs()));
    }
    let p = value.re;
    Ok(if (-1e-12..0.0).contains(&p) { 0.0 } else { p })
}

/// A labeled list of operators on a common composite space. Positivity and
/// completeness are checked by [`validate_povm`], not on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<(String, CompositeOperator)>,
}

impl Povm {
    pub fn new(elements: Vec<(String, CompositeOperator)>) -> Result<Self> {
        let Some((_, first)) = elements.first() else {
            return Err(Error::EmptyInput("a POVM needs at least one element".into()));
        };
        let total = first.total_dim();
        if let Some((label, _)) = elements.iter().find(|(_, m)| m.total_dim() != total) {
            return Err(Error::Dimension(format!("element {label} does not act on dimension {total}")));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[(String, CompositeOperator)] {
        &self.elements
    }

    pub fn element(&self, label: &str) -> Option<&CompositeOperator> {
        self.elements.iter().find(|(l, _)| l == label).map(|(_, m)| m)
    }

    pub fn total_dim(&self) -> usize {
        self.elements[0].1.total_dim()
    }

    /// Outcome probabilities in element order.
    pub fn probabilities(&self, s: &ProductState) -> Result<Vec<(String, f64)>> {
        self.elements.iter().map(|(label, m)| Ok((label.clone(), outcome_probability(m, s)?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementReport {
    pub label: String,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub hermiticity_residue: f64,
}

impl ElementReport {
    fn spectral_norm(&self) -> f64 {
        self.min_eigenvalue.abs().max(self.max_eigenvalue.abs())
    }
}

/// Per-element spectra and residues plus the completeness residue
/// `max_ij |Σ_k M_k - I|_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub elements: Vec<ElementReport>,
    pub completeness_residue: f64,
}

impl ValidationReport {
    /// Pass/fail at the default tolerances.
    pub fn passed(&self) -> bool {
        self.passes_with(COMPLETENESS_TOLERANCE)
    }

    /// Pass/fail with a caller-chosen completeness tolerance.
    pub fn passes_with(&self, completeness_tolerance: f64) -> bool {
        self.completeness_residue <= completeness_tolerance
            && self.elements.iter().all(|e| {
                e.hermiticity_residue <= HERMITICITY_TOLERANCE
                    && e.min_eigenvalue >= -POSITIVITY_TOLERANCE * e.spectral_norm()
            })
    }
}

pub fn validate_povm(p: &Povm) -> ValidationReport {
    let total = p.total_dim();
    let mut sum = CMatrix::zeros(total, total);
    let elements = p
        .elements
        .iter()
        .map(|(label, m)| {
            sum += &m.matrix;
            let hermiticity_residue = hermiticity_residue(&m.matrix);
            // the eigensolver reads one triangle, so symmetrize first
            let hermitian_part = (&m.matrix + m.matrix.adjoint()) * C64::new(0.5, 0.0);
            let spectrum = hermitian_eigenvalues(&hermitian_part);
            ElementReport {
                label: label.clone(),
                min_eigenvalue: *spectrum.last().expect("nonempty"),
                max_eigenvalue: spectrum[0],
                hermiticity_residue,
            }
        })
        .collect();
    let completeness_residue = max_abs_entry(&(sum - CMatrix::identity(total, total)));
    ValidationReport { elements, completeness_residue }
}

/// Composite index of the digit string, first digit most significant.
fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &k| acc * d + k)
}

fn digits_of(mut index: usize, n: usize, d: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// For each basis index, the index it is sent to by the factor permutation
/// `|i₁ … i_n⟩ ↦ |i_{π(1)} … i_{π(n)}⟩`.
fn permuted_indices(perm: &[usize], d: usize) -> Vec<usize> {
    let n = perm.len();
    let total = d.pow(n as u32);
    (0..total)
        .map(|index| {
            let digits = digits_of(index, n, d);
            let moved: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
            index_of(&moved, d)
        })
        .collect()
}

fn check_permutation_size(n: usize, d: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("need at least one tensor factor".into()));
    }
    if n > MAX_PERMUTATION_FACTORS {
        return Err(Error::SizeCap(format!(
            "permutation sum limited to n <= {MAX_PERMUTATION_FACTORS}, got {n}"
        )));
    }
    composite_dim(n, d)
}

/// Unitary that reorders tensor factors according to `perm`.
pub fn permutation_operator(perm: &[usize], d: usize) -> Result<CompositeOperator> {
    let n = perm.len();
    let total = composite_dim(n, d)?;
    if !perm.iter().copied().sorted().eq(0..n) {
        return Err(Error::Domain(format!("{perm:?} is not a permutation of 0..{n}")));
    }
    let mut matrix = CMatrix::zeros(total, total);
    for (from, to) in permuted_indices(perm, d).into_iter().enumerate() {
        matrix[(to, from)] = C64::new(1.0, 0.0);
    }
    CompositeOperator::new(n, d, matrix)
}

/// Projector onto the totally symmetric subspace of `H^⊗n`,
/// `(1/n!) Σ_π U_π`.
///
/// Permutations are visited in lexicographic order and their contributions
/// counted exactly as integers before the single division by `n!`.
pub fn symmetric_projector(n: usize, d: usize) -> Result<CompositeOperator> {
    let total = check_permutation_size(n, d)?;
    let mut counts = vec![0u32; total * total];
    let mut orders = 0u32;
    for perm in (0..n).permutations(n) {
        for (from, to) in permuted_indices(&perm, d).into_iter().enumerate() {
            counts[to * total + from] += 1;
        }
        orders += 1;
    }
    let scale = 1.0 / f64::from(orders);
    let matrix =
        CMatrix::from_fn(total, total, |r, c| C64::new(f64::from(counts[r * total + c]) * scale, 0.0));
    CompositeOperator::new(n, d, matrix)
}

/// Label of the conclusive "states differ" outcome.
pub const LABEL_DIFFERENT: &str = "R2";
/// Label of the inconclusive outcome.
pub const LABEL_INCONCLUSIVE: &str = "R?";

/// `{R2: I - P_sym, R?: P_sym}`. R2 never fires on `|ψ⟩^⊗n`, so it
/// unambiguously signals `C < 1`.
pub fn comparison_povm(n: usize, d: usize) -> Result<Povm> {
    let sym = symmetric_projector(n, d)?;
    Povm::new(vec![(LABEL_DIFFERENT.to_string(), sym.complement()), (LABEL_INCONCLUSIVE.to_string(), sym)])
}

/// Largest probability the detector `m` assigns to any state in the
/// forbidden class. An unambiguous detector keeps this at or below `1e-10`.
pub fn unambiguity_violation(m: &CompositeOperator, forbidden: &[ProductState]) -> Result<f64> {
    if forbidden.is_empty() {
        return Err(Error::EmptyInput("forbidden state list is empty".into()));
    }
    forbidden.iter().map(|s| outcome_probability(m, s)).try_fold(f64::NEG_INFINITY, |acc, p| Ok(acc.max(p?)))
}
