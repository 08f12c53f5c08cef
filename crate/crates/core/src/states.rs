//! Pure states, ensembles, and the closeness functional
//! `C = 2/(n(n-1)) Σ_{i<j} |⟨ψ_i|ψ_j⟩|²`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::extremal::c_min;
use crate::linalg::{inner, CMatrix, CVector, C64};
use crate::rng::gaussian_vector;

/// Absolute tolerance on the norm of a state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Slack used wherever a closeness value is compared with a threshold.
///
/// `C ≥ A` is evaluated as `C ≥ A - CLOSENESS_TOLERANCE`, so that closed-form
/// boundary cases such as `C = c_min` survive rounding.
pub const CLOSENESS_TOLERANCE: f64 = 1e-12;

/// A unit-norm amplitude vector of dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Normalizes `amplitudes` into a state. The global phase is kept.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Dimension(format!(
                "state needs at least 2 amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !norm.is_finite() {
            return Err(Error::Domain("amplitudes must be finite".into()));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Real amplitudes, convenient in tests and examples.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| C64::new(x, 0.0))))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} out of range for d={dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Haar-random state: i.i.d. complex Gaussian entries, normalized.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        Self::new(gaussian_vector(rng, dim))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        check_same_dim(self, other)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `U|ψ⟩` for a unitary `U`.
    pub fn transformed(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} operator applied to a d={} state",
                unitary.nrows(),
                unitary.ncols(),
                self.dim()
            )));
        }
        Self::new(unitary * &self.amplitudes)
    }

    /// Multiplies by `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        Self { amplitudes: &self.amplitudes * C64::from_polar(1.0, theta) }
    }
}

fn check_same_dim(a: &PureState, b: &PureState) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr())
}

/// An ordered list of `n ≥ 2` states of a common dimension.
///
/// States may repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    states: Vec<PureState>,
}

impl StateEnsemble {
    pub fn new(states: Vec<PureState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::Domain(format!("closeness needs at least 2 states, got {}", states.len())));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::Dimension(format!("ensemble mixes dimensions {dim} and {}", bad.dim())));
        }
        Ok(Self { states })
    }

    /// `n` i.i.d. Haar-random states.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Result<Self> {
        let states = (0..n).map(|_| PureState::haar(rng, dim)).collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn into_states(self) -> Vec<PureState> {
        self.states
    }

    /// The average pairwise fidelity.
    pub fn closeness(&self) -> f64 {
        closeness(self)
    }

    /// Applies the same unitary to every member.
    pub fn transformed(&self, unitary: &CMatrix) -> Result<Self> {
        let states = self.states.iter().map(|s| s.transformed(unitary)).collect::<Result<_>>()?;
        Self::new(states)
    }
}

/// Average pairwise fidelity of the ensemble.
pub fn closeness(e: &StateEnsemble) -> f64 {
    let n = e.n();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += inner(e.states[i].amplitudes(), e.states[j].amplitudes()).norm_sqr();
        }
    }
    2.0 * sum / (n * (n - 1)) as f64
}

/// Where a threshold sits relative to the admissible interval `[c_min, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    BelowCminInvalid,
    AtCmin,
    Interior,
    AtOne,
}

impl Regime {
    pub fn classify(value: f64, c_min: f64) -> Self {
        if value < c_min - CLOSENESS_TOLERANCE {
            Regime::BelowCminInvalid
        } else if (value - c_min).abs() <= CLOSENESS_TOLERANCE {
            Regime::AtCmin
        } else if (value - 1.0).abs() <= CLOSENESS_TOLERANCE {
            Regime::AtOne
        } else {
            Regime::Interior
        }
    }
}

/// A threshold `A` validated against `c_min(n, d)` for the ensembles it
/// will be used with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    value: f64,
    regime: Regime,
}

impl ThresholdSpec {
    pub fn new(value: f64, n: usize, dim: usize) -> Result<Self> {
        let lower = c_min(n, dim)?;
        if !value.is_finite() || value > 1.0 + CLOSENESS_TOLERANCE {
            return Err(Error::ThresholdRange { value, lower });
        }
        let regime = Regime::classify(value, lower);
        if regime == Regime::BelowCminInvalid {
            return Err(Error::ThresholdRange { value, lower });
        }
        Ok(Self { value, regime })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

/// Whether `C ≥ A` up to [`CLOSENESS_TOLERANCE`]; `true` means the product
/// of the ensemble lies in S₁, `false` in S₂.
pub fn meets_threshold(closeness: f64, threshold: f64) -> bool {
    closeness >= threshold - CLOSENESS_TOLERANCE
}

/// Ground-truth classifier for `C ≥ A`, computed with full knowledge of the
/// states.
pub fn threshold_predicate(e: &StateEnsemble, t: &ThresholdSpec) -> Result<bool> {
    let lower = c_min(e.n(), e.dim())?;
    if t.value < lower - CLOSENESS_TOLERANCE || t.value > 1.0 + CLOSENESS_TOLERANCE {
        return Err(Error::ThresholdRange { value: t.value, lower });
    }
    Ok(meets_threshold(closeness(e), t.value))
}
