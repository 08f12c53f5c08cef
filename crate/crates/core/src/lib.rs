//! Numerical toolkit for the closeness of unknown pure states.
//!
//! The closeness of `n` states is their average pairwise fidelity
//! `C = 2/(n(n-1)) Σ_{i<j} |⟨ψ_i|ψ_j⟩|²`. Deciding `C ≥ A` against a
//! threshold `A` from copies of the joint product state cannot be done
//! unambiguously when `c_min < A < 1`: the products on either side of the
//! threshold span the whole composite space, which forces the matching
//! detector to be the zero operator. At `A = 1` the projector onto the
//! complement of the symmetric subspace does detect `C < 1` without error.
//!
//! * [`states`]: states, ensembles, the closeness functional and threshold
//!   predicate.
//! * [`extremal`]: Gram matrices, `c_min(n, d)` and ensembles attaining it.
//! * [`povm`]: composite operators, outcome statistics, POVM validation
//!   and the symmetric-subspace comparison measurement.
//! * [`nogo`]: perturbed families, spanning certificates, forced-zero
//!   residues and nullspace-decay experiments.
//! * [`format`]: text formats and CSV reports.
//!
//! ```
//! use qcloseness::{c_min, closeness, minimal_ensemble};
//!
//! let e = minimal_ensemble(3, 2)?;
//! assert!((closeness(&e) - c_min(3, 2)?).abs() < 1e-12);
//! # Ok::<(), qcloseness::Error>(())
//! ```

pub mod error;
pub mod extremal;
pub mod format;
pub mod linalg;
pub mod nogo;
pub mod povm;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use extremal::{c_min, closeness_via_gram, gram_matrix, minimal_ensemble, power_mean_gap, GramMatrix};
pub use nogo::{
    build_family, build_family_for, complement_basis, force_zero_operator, nullspace_decay, sample_region,
    select_epsilon, select_epsilon_for, spanning_certificate, DecayCurve, PerturbedFamily, Side,
    SpanningCertificate,
};
pub use povm::{
    comparison_povm, kron_state, outcome_probability, symmetric_projector, unambiguity_violation,
    validate_povm, CompositeOperator, Povm, ProductState, ValidationReport,
};
pub use states::{closeness, fidelity, threshold_predicate, PureState, StateEnsemble, ThresholdSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/closeness.md")]
    mod closeness {}
    #[doc = include_str!("../../../book/src/extremal.md")]
    mod extremal {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/nogo.md")]
    mod nogo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
