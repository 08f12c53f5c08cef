//! Constructive witness that no unambiguous measurement can certify
//! `C ≥ A` (or `C < A`) for unknown states when `c_min < A < 1`.
//!
//! Starting from a base ensemble on one side of the threshold, every factor
//! `|ψ_i⟩` is tilted towards each direction of its orthogonal complement:
//!
//! ```text
//! |ψ_{i,j}⟩ = (|ψ_i⟩ + ε|φ_{i,j}⟩) / √(1+ε²),  j < d,     |ψ_{i,d}⟩ = |ψ_i⟩.
//! ```
//!
//! For small enough `ε` all `d^n` products `⊗_i |ψ_{i,j_i}⟩` stay on the
//! base's side, and because each factor family is linearly independent the
//! products span `H^⊗n`. A positive operator whose expectation vanishes on
//! a spanning set is zero, so the detector for the opposite side must be
//! the zero operator. [`spanning_certificate`] checks the spanning claim
//! numerically and [`force_zero_operator`] measures what is left of a probe
//! operator once it is squeezed into the complement of the span.

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::extremal::minimal_ensemble;
use crate::linalg::{inner, max_abs_entry, singular_values, CMatrix, CVector, C64};
use crate::povm::{composite_dim, kron_state, CompositeOperator, ProductState};
use crate::rng::{gaussian_matrix, gaussian_vector, haar_unitary, seeded, trial_rng};
use crate::states::{
    closeness, meets_threshold, PureState, StateEnsemble, ThresholdSpec, CLOSENESS_TOLERANCE,
};

/// Starting value of the ε search.
pub const INITIAL_EPSILON: f64 = 0.5;
/// Maximum number of halvings in the ε search.
pub const MAX_HALVINGS: u32 = 60;
/// Haar draws attempted before falling back to a constructive sampler.
pub const MAX_REJECTIONS: usize = 10_000;
/// Singular values at or below this fraction of the largest count as zero.
pub const SPAN_TOLERANCE: f64 = 1e-10;
/// A new vector adds rank when its residual norm exceeds this.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Random PSD probes pushed through the complement projector.
pub const PROBE_COUNT: usize = 10;

/// The two sides of the threshold: S₁ holds products with `C ≥ A`, S₂ the
/// rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    S1,
    S2,
}

impl Side {
    pub fn contains(self, closeness: f64, threshold: f64) -> bool {
        match self {
            Side::S1 => meets_threshold(closeness, threshold),
            Side::S2 => !meets_threshold(closeness, threshold),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::S1 => "S1",
            Side::S2 => "S2",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Side::S1),
            "s2" => Ok(Side::S2),
            other => Err(Error::Domain(format!("unknown side {other:?}, expected s1 or s2"))),
        }
    }
}

/// `d - 1` orthonormal states spanning the orthogonal complement of `s`.
///
/// Uses the Householder reflection `H` with `H s ∝ e₁`; `H` is unitary and
/// Hermitian, its first column is `s` up to phase and the remaining columns
/// are returned.
pub fn complement_basis(s: &PureState) -> Vec<PureState> {
    let d = s.dim();
    let x = s.amplitudes();
    let lead = x[0];
    let phase = if lead.norm() > 0.0 { lead / lead.norm() } else { C64::new(1.0, 0.0) };
    // v = x + e^{iθ} e₁; ‖v‖² = 2(1 + |x₀|) ≥ 2, so no cancellation
    let mut v = x.clone();
    v[0] += phase;
    let scale = C64::new(2.0 / v.norm_squared(), 0.0);
    (1..d)
        .map(|col| {
            let mut e = CVector::zeros(d);
            e[col] = C64::new(1.0, 0.0);
            let coeff = v[col].conj() * scale;
            let column = e - &v * coeff;
            PureState::new(column).expect("columns of a unitary are nonzero")
        })
        .collect()
}

fn tilt(psi: &PureState, phi: &PureState, eps: f64) -> PureState {
    let norm = (1.0 + eps * eps).sqrt();
    let amps = (psi.amplitudes() + phi.amplitudes() * C64::new(eps, 0.0)) / C64::new(norm, 0.0);
    PureState::new(amps).expect("tilted state is nonzero")
}

/// Per-factor candidates `|ψ_{i,1}⟩ … |ψ_{i,d}⟩`, the last one untilted.
fn tilted_factors(base: &StateEnsemble, complements: &[Vec<PureState>], eps: f64) -> Vec<Vec<PureState>> {
    base.states()
        .iter()
        .zip(complements)
        .map(|(psi, phis)| {
            let mut column: Vec<PureState> = phis.iter().map(|phi| tilt(psi, phi, eps)).collect();
            column.push(psi.clone());
            column
        })
        .collect()
}

/// All index tuples `(j₁ … j_n) ∈ {0..d}^n`, lexicographic.
fn index_tuples(n: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).map(|_| 0..d).multi_cartesian_product()
}

fn tuple_ensemble(factors: &[Vec<PureState>], tuple: &[usize]) -> StateEnsemble {
    let states = tuple.iter().zip(factors).map(|(&j, column)| column[j].clone()).collect();
    StateEnsemble::new(states).expect("tuple inherits a valid ensemble shape")
}

/// Closeness of one tilted tuple by direct pairwise evaluation.
fn tuple_closeness(factors: &[Vec<PureState>], tuple: &[usize]) -> f64 {
    closeness(&tuple_ensemble(factors, tuple))
}

/// Closed form of the closeness of a tilted tuple in terms of the base
/// overlaps. With `ε_k = ε` when factor `k` is tilted and `0` otherwise:
///
/// ```text
/// C′ = 2/(n(n-1)) Σ_{k<l} |⟨ψ_k|ψ_l⟩ + ε_l⟨ψ_k|φ_l⟩ + ε_k⟨φ_k|ψ_l⟩ + ε_kε_l⟨φ_k|φ_l⟩|²
///                        / ((1+ε_k²)(1+ε_l²))
/// ```
///
/// `tuple[i] == d - 1` selects the untilted state.
pub fn perturbed_closeness_closed_form(
    base: &StateEnsemble,
    complements: &[Vec<PureState>],
    eps: f64,
    tuple: &[usize],
) -> Result<f64> {
    let n = base.n();
    let d = base.dim();
    if complements.len() != n || tuple.len() != n {
        return Err(Error::Dimension(format!(
            "expected {n} complements and tuple entries, got {} and {}",
            complements.len(),
            tuple.len()
        )));
    }
    if let Some(&j) = tuple.iter().find(|&&j| j >= d) {
        return Err(Error::Dimension(format!("tuple index {j} out of range for d={d}")));
    }
    let direction =
        |i: usize| -> Option<&PureState> { (tuple[i] + 1 < d).then(|| &complements[i][tuple[i]]) };
    let mut sum = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let psi_k = base.states()[k].amplitudes();
            let psi_l = base.states()[l].amplitudes();
            let mut amp = inner(psi_k, psi_l);
            let mut norm = 1.0;
            if let Some(phi_l) = direction(l) {
                amp += inner(psi_k, phi_l.amplitudes()) * eps;
                norm *= 1.0 + eps * eps;
            }
            if let Some(phi_k) = direction(k) {
                amp += inner(phi_k.amplitudes(), psi_l) * eps;
                norm *= 1.0 + eps * eps;
                if let Some(phi_l) = direction(l) {
                    amp += inner(phi_k.amplitudes(), phi_l.amplitudes()) * (eps * eps);
                }
            }
            sum += amp.norm_sqr() / norm;
        }
    }
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

fn all_members_on_side(
    base: &StateEnsemble,
    complements: &[Vec<PureState>],
    eps: f64,
    threshold: f64,
    side: Side,
) -> bool {
    let factors = tilted_factors(base, complements, eps);
    index_tuples(base.n(), base.dim()).all(|t| side.contains(tuple_closeness(&factors, &t), threshold))
}

fn tilts_excluded(threshold: f64, side: Side) -> bool {
    side == Side::S1 && threshold >= 1.0 - CLOSENESS_TOLERANCE
}

fn check_base_side(base: &StateEnsemble, threshold: f64, side: Side) -> Result<()> {
    let c = closeness(base);
    if !side.contains(c, threshold) {
        let relation = match side {
            Side::S1 => "C >= A",
            Side::S2 => "C < A",
        };
        return Err(Error::Precondition(format!(
            "base closeness {c} does not satisfy {relation} for A = {threshold}"
        )));
    }
    Ok(())
}

/// ε for an S₂ family: see [`select_epsilon_for`].
pub fn select_epsilon(base: &StateEnsemble, threshold: f64) -> Result<f64> {
    select_epsilon_for(base, threshold, Side::S2)
}

/// Largest `ε = 0.5 · 2^{-k}` (`k ≤ 60`) for which every one of the `d^n`
/// tilted tuples stays on `side`, checked by direct evaluation.
///
/// On S₁ at `A = 1` no tilt qualifies: only identical states reach `C = 1`,
/// and comparing within [`CLOSENESS_TOLERANCE`] would wrongly admit
/// `ε ≈ 1e-6`. That case fails immediately with `EpsilonSearchError`.
pub fn select_epsilon_for(base: &StateEnsemble, threshold: f64, side: Side) -> Result<f64> {
    check_base_side(base, threshold, side)?;
    if tilts_excluded(threshold, side) {
        return Err(Error::EpsilonSearch { halvings: 0 });
    }
    let complements: Vec<_> = base.states().iter().map(complement_basis).collect();
    halving_search(|eps| all_members_on_side(base, &complements, eps, threshold, side))
}

/// First `ε = 0.5 · 2^{-k}`, `k = 0..=60`, accepted by `accept`.
fn halving_search(mut accept: impl FnMut(f64) -> bool) -> Result<f64> {
    let mut eps = INITIAL_EPSILON;
    for _ in 0..=MAX_HALVINGS {
        if accept(eps) {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Err(Error::EpsilonSearch { halvings: MAX_HALVINGS })
}

/// One product `⊗_i |ψ_{i,j_i}⟩` of a perturbed family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    /// Zero-based; `d - 1` is the untilted factor.
    pub indices: Vec<usize>,
    pub state: ProductState,
    pub closeness: f64,
}

/// The `d^n` tilted products around a base ensemble, all verified to lie on
/// the same side of the threshold as the base.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedFamily {
    base: StateEnsemble,
    threshold: f64,
    epsilon: f64,
    side: Side,
    complements: Vec<Vec<PureState>>,
    factors: Vec<Vec<PureState>>,
    factor_ranks: Vec<usize>,
    members: Vec<FamilyMember>,
}

impl PerturbedFamily {
    pub fn base(&self) -> &StateEnsemble {
        &self.base
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `complements()[i]` spans the orthogonal complement of factor `i`.
    pub fn complements(&self) -> &[Vec<PureState>] {
        &self.complements
    }

    /// `factors()[i][j]` is `|ψ_{i,j}⟩`.
    pub fn factors(&self) -> &[Vec<PureState>] {
        &self.factors
    }

    /// Numerical rank of each factor's `d × d` candidate matrix.
    pub fn factor_ranks(&self) -> &[usize] {
        &self.factor_ranks
    }

    /// Whether every factor's candidates are linearly independent.
    pub fn factors_independent(&self) -> bool {
        self.factor_ranks.iter().all(|&r| r == self.dim())
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// Closed-form closeness of the member with the given index tuple.
    pub fn closed_form_closeness(&self, tuple: &[usize]) -> Result<f64> {
        perturbed_closeness_closed_form(&self.base, &self.complements, self.epsilon, tuple)
    }

    /// Matrix whose columns are the member composites, in member order.
    pub fn member_matrix(&self) -> CMatrix {
        let columns: Vec<CVector> = self.members.iter().map(|m| m.state.composite().clone()).collect();
        CMatrix::from_columns(&columns)
    }
}

fn numerical_rank(values: &[f64]) -> usize {
    let cutoff = SPAN_TOLERANCE * values.first().copied().unwrap_or(0.0);
    values.iter().filter(|&&s| s > cutoff).count()
}

/// S₂ family around `base`; see [`build_family_for`].
pub fn build_family(base: &StateEnsemble, threshold: f64, eps: f64) -> Result<PerturbedFamily> {
    build_family_for(base, threshold, eps, Side::S2)
}

/// Builds and verifies all `d^n` members. Fails if any member leaves
/// `side`. Linear independence of the factor candidates is recorded, not
/// enforced, so degenerate families (`ε = 0`) can still be inspected.
pub fn build_family_for(
    base: &StateEnsemble,
    threshold: f64,
    eps: f64,
    side: Side,
) -> Result<PerturbedFamily> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Domain(format!("epsilon must be finite and nonnegative, got {eps}")));
    }
    let (n, d) = (base.n(), base.dim());
    composite_dim(n, d)?;
    if eps > 0.0 && tilts_excluded(threshold, side) {
        return Err(Error::FamilyVerification(format!(
            "no tilted product reaches C = 1, so S1 at A = {threshold} admits only epsilon = 0"
        )));
    }
    let complements: Vec<_> = base.states().iter().map(complement_basis).collect();
    let factors = tilted_factors(base, &complements, eps);
    let factor_ranks = factors
        .iter()
        .map(|column| {
            let cols: Vec<CVector> = column.iter().map(|s| s.amplitudes().clone()).collect();
            numerical_rank(&singular_values(&CMatrix::from_columns(&cols)))
        })
        .collect();
    let members = index_tuples(n, d)
        .map(|indices| {
            let ensemble = tuple_ensemble(&factors, &indices);
            let c = closeness(&ensemble);
            if !side.contains(c, threshold) {
                return Err(Error::FamilyVerification(format!(
                    "member {indices:?} has closeness {c}, outside {side} for A = {threshold}"
                )));
            }
            Ok(FamilyMember { state: kron_state(ensemble.states())?, closeness: c, indices })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerturbedFamily {
        base: base.clone(),
        threshold,
        epsilon: eps,
        side,
        complements,
        factors,
        factor_ranks,
        members,
    })
}

/// Numerical evidence that a family's members span `H^⊗n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningCertificate {
    pub n: usize,
    pub d: usize,
    pub threshold: f64,
    pub epsilon: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    /// `rank == d^n`, equivalently `σ_min > 1e-10 · σ_max`.
    pub verdict: bool,
    /// Largest forced-zero residue over the random probes; only computed
    /// when the verdict holds.
    pub residual: Option<f64>,
}

/// Orthogonal projector onto the complement of the span of the members.
fn complement_projector(fam: &PerturbedFamily) -> (CMatrix, Vec<f64>) {
    let matrix = fam.member_matrix();
    let total = matrix.nrows();
    let svd = matrix.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let cutoff = SPAN_TOLERANCE * sigma_max;
    let mut projector = CMatrix::identity(total, total);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let col = u.column(k);
            projector -= &col * col.adjoint();
        }
    }
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    (projector, values)
}

/// Random PSD operator `B†B / D` with standard complex Gaussian `B`.
pub fn random_psd_probe<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<CompositeOperator> {
    let total = composite_dim(n, d)?;
    let b = gaussian_matrix(rng, total, total);
    CompositeOperator::new(n, d, b.adjoint() * b / C64::new(total as f64, 0.0))
}

/// Singular-value spanning check plus, when it passes, the forced-zero
/// residue of [`PROBE_COUNT`] random PSD probes drawn from `probe_seed`.
pub fn spanning_certificate(fam: &PerturbedFamily, probe_seed: u64) -> Result<SpanningCertificate> {
    let (n, d) = (fam.n(), fam.dim());
    let total = composite_dim(n, d)?;
    let (projector, values) = complement_projector(fam);
    let rank = numerical_rank(&values);
    let verdict = rank == total;
    let residual = if verdict {
        let mut rng = seeded(probe_seed);
        let mut worst: f64 = 0.0;
        for _ in 0..PROBE_COUNT {
            let probe = random_psd_probe(&mut rng, n, d)?;
            worst = worst.max(squeezed_residual(&projector, &probe));
        }
        Some(worst)
    } else {
        None
    };
    Ok(SpanningCertificate {
        n,
        d,
        threshold: fam.threshold,
        epsilon: fam.epsilon,
        sigma_min: *values.last().expect("nonempty"),
        sigma_max: values[0],
        rank,
        verdict,
        residual,
    })
}

fn squeezed_residual(projector: &CMatrix, probe: &CompositeOperator) -> f64 {
    max_abs_entry(&(projector * probe.matrix() * projector))
}

/// Entrywise max of `Q M Q`, where `Q` projects onto the complement of the
/// family's span.
///
/// A PSD `M` with `⟨m|M|m⟩ = 0` on every member satisfies `M = Q M Q`, so
/// this is how much of `M` survives the unambiguity constraint. Defined for
/// any family; [`force_zero_operator`] additionally demands a spanning one.
pub fn complement_residual(fam: &PerturbedFamily, probe: &CompositeOperator) -> Result<f64> {
    let total = composite_dim(fam.n(), fam.dim())?;
    if probe.total_dim() != total {
        return Err(Error::Dimension(format!(
            "probe acts on dimension {}, family on {total}",
            probe.total_dim()
        )));
    }
    let (projector, _) = complement_projector(fam);
    Ok(squeezed_residual(&projector, probe))
}

/// [`complement_residual`] for a family whose members span `H^⊗n`; the
/// result is at round-off level, witnessing that the detector is zero.
pub fn force_zero_operator(fam: &PerturbedFamily, probe: &CompositeOperator) -> Result<f64> {
    let total = composite_dim(fam.n(), fam.dim())?;
    let (_, values) = complement_projector(fam);
    if numerical_rank(&values) != total {
        return Err(Error::Precondition("family does not span the composite space".into()));
    }
    complement_residual(fam, probe)
}

/// `n` copies of one Haar-random state; the base of mirrored S₁ families.
pub fn identical_base<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<StateEnsemble> {
    let psi = PureState::haar(rng, d)?;
    StateEnsemble::new(vec![psi; n])
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, states: &[PureState], scale: f64) -> Result<StateEnsemble> {
    let jittered = states
        .iter()
        .map(|s| {
            let noise = gaussian_vector(rng, s.dim()) * C64::new(scale, 0.0);
            PureState::new(s.amplitudes() + noise)
        })
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(jittered)
}

/// Seeded ensemble on the requested side of `A`; see [`sample_region_with`].
pub fn sample_region(n: usize, d: usize, threshold: f64, side: Side, seed: u64) -> Result<StateEnsemble> {
    sample_region_with(&mut seeded(seed), n, d, threshold, side)
}

/// Ensemble with `C ≥ A` (S₁) or `C < A` (S₂).
///
/// Haar rejection first; after [`MAX_REJECTIONS`] misses a constructive
/// sampler jitters a known member of the side (identical states for S₁, a
/// rotated minimal ensemble for S₂) with noise halved until the side
/// predicate holds. At `A = 1` only identical states qualify and they are
/// returned directly.
pub fn sample_region_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    threshold: f64,
    side: Side,
) -> Result<StateEnsemble> {
    let spec = ThresholdSpec::new(threshold, n, d)?;
    if side == Side::S1 && spec.regime() == crate::states::Regime::AtOne {
        return identical_base(rng, n, d);
    }
    for _ in 0..MAX_REJECTIONS {
        let e = StateEnsemble::haar(rng, n, d)?;
        if side.contains(closeness(&e), threshold) {
            return Ok(e);
        }
    }
    let anchor: Vec<PureState> = match side {
        Side::S1 => identical_base(rng, n, d)?.into_states(),
        Side::S2 => {
            let u = haar_unitary(rng, d);
            minimal_ensemble(n, d)?.transformed(&u)?.into_states()
        }
    };
    let mut scale = INITIAL_EPSILON;
    for _ in 0..=MAX_HALVINGS {
        let e = jitter(rng, &anchor, scale)?;
        if side.contains(closeness(&e), threshold) {
            return Ok(e);
        }
        scale *= 0.5;
    }
    let e = StateEnsemble::new(anchor)?;
    if side.contains(closeness(&e), threshold) {
        return Ok(e);
    }
    Err(Error::RegionSampling(format!(
        "no ensemble with n={n}, d={d} found on side {side} of A = {threshold}"
    )))
}

/// Dimension of the common nullspace of the sampled products, as a
/// function of the number of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub side: Side,
    pub seed: u64,
    /// `(sample_count, nullspace_dim)` pairs, one per sample.
    pub samples: Vec<(usize, usize)>,
}

impl DecayCurve {
    pub fn final_dimension(&self) -> Option<usize> {
        self.samples.last().map(|&(_, dim)| dim)
    }
}

/// Grows an orthonormal basis from sampled product states of one side and
/// records `d^n - rank` after each sample. Sample `t` draws from stream `t`
/// of `seed`.
pub fn nullspace_decay(
    n: usize,
    d: usize,
    threshold: f64,
    side: Side,
    max_samples: usize,
    seed: u64,
) -> Result<DecayCurve> {
    let total = composite_dim(n, d)?;
    ThresholdSpec::new(threshold, n, d)?;
    let mut basis: Vec<CVector> = Vec::new();
    let mut samples = Vec::with_capacity(max_samples);
    for t in 0..max_samples {
        let mut rng = trial_rng(seed, t as u64);
        let ensemble = sample_region_with(&mut rng, n, d, threshold, side)?;
        let v = kron_state(ensemble.states())?.composite().clone();
        if basis.len() < total {
            if let Some(u) = orthogonal_remainder(&basis, v) {
                basis.push(u);
            }
        }
        samples.push((t + 1, total - basis.len()));
    }
    Ok(DecayCurve { side, seed, samples })
}

/// Component of `v` orthogonal to the orthonormal `basis`, normalized, or
/// `None` when its norm is at most [`RESIDUAL_TOLERANCE`]. Two
/// Gram-Schmidt passes.
fn orthogonal_remainder(basis: &[CVector], mut v: CVector) -> Option<CVector> {
    for _ in 0..2 {
        for b in basis {
            let coeff = b.dotc(&v);
            v -= b * coeff;
        }
    }
    let norm = v.norm();
    (norm > RESIDUAL_TOLERANCE).then(|| v / C64::new(norm, 0.0))
}
