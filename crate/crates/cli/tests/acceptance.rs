//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fails.
//!
//! Run with `cargo test -p qcloseness-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use itertools::Itertools;
use qcloseness::extremal::{closeness_via_gram, gram_matrix};
use qcloseness::linalg::C64;
use qcloseness::nogo::{
    force_zero_operator, identical_base, perturbed_closeness_closed_form, random_psd_probe,
};
use qcloseness::povm::LABEL_DIFFERENT;
use qcloseness::rng::{seeded, trial_rng};
use qcloseness::{
    build_family_for, c_min, closeness, comparison_povm, complement_basis, kron_state, minimal_ensemble,
    nullspace_decay, outcome_probability, sample_region, select_epsilon_for, spanning_certificate,
    validate_povm, ProductState, PureState, Side, StateEnsemble,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// 2 ≤ d < n ≤ 8.
fn extremal_grid() -> impl Iterator<Item = (usize, usize)> {
    (3..=8).flat_map(|n| (2..n).map(move |d| (n, d)))
}

const WITNESS_GRID: [(usize, usize); 5] = [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)];

fn c1_c_min_formula() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (n, d) in extremal_grid() {
        let formula = (n - d) as f64 / (d * (n - 1)) as f64;
        let got = closeness(&ok(minimal_ensemble(n, d))?);
        worst = worst.max((got - formula).abs());
        ensure((got - formula).abs() <= 1e-12, || format!("n={n} d={d}: {got} vs {formula}"))?;
        ensure((ok(c_min(n, d))? - formula).abs() <= 1e-15, || format!("c_min({n},{d})"))?;
    }
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!("max |C - (n-d)/(d(n-1))| = {worst:.1e} over 21 (n,d)"))
}

fn c2_gram_consistency() -> Check {
    let start = Instant::now();
    let mut worst_c: f64 = 0.0;
    let mut worst_gap = f64::INFINITY;
    for (k, (n, d)) in [(3usize, 2usize), (4, 2), (4, 3), (5, 3)].into_iter().enumerate() {
        for trial in 0..1000u64 {
            let mut rng = trial_rng(k as u64, trial);
            let e = ok(StateEnsemble::haar(&mut rng, n, d))?;
            let diff = (closeness(&e) - closeness_via_gram(&e)).abs();
            worst_c = worst_c.max(diff);
            ensure(diff <= 1e-12, || format!("n={n} d={d} trial {trial}: |ΔC| = {diff:e}"))?;
            let g = gram_matrix(&e);
            ensure((g.trace() - n as f64).abs() <= 1e-10, || format!("trace {}", g.trace()))?;
            let gap = g.trace_of_square() - (n * n) as f64 / d as f64;
            worst_gap = worst_gap.min(gap);
            ensure(gap >= -1e-10, || format!("n={n} d={d}: Tr G² - n²/d = {gap:e}"))?;
        }
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("4000 ensembles, max |ΔC| = {worst_c:.1e}, min(Tr G² - n²/d) = {worst_gap:.3}"))
}

fn c3_extremal_spectrum() -> Check {
    let mut worst: f64 = 0.0;
    for (n, d) in extremal_grid() {
        let g = gram_matrix(&ok(minimal_ensemble(n, d))?);
        for (i, &l) in g.eigenvalues().iter().enumerate() {
            let target = if i < d { n as f64 / d as f64 } else { 0.0 };
            worst = worst.max((l - target).abs());
            ensure((l - target).abs() <= 1e-10, || format!("n={n} d={d} λ_{i} = {l}"))?;
        }
    }
    Ok(format!("max eigenvalue deviation {worst:.1e}"))
}

/// Certificate plus 10 seeded PSD probes through `force_zero_operator`.
fn witness(base: &StateEnsemble, a: f64, side: Side, seed: u64) -> Result<(f64, f64), String> {
    let (n, d) = (base.n(), base.dim());
    let eps = ok(select_epsilon_for(base, a, side))?;
    let fam = ok(build_family_for(base, a, eps, side))?;
    let cert = ok(spanning_certificate(&fam, seed))?;
    ensure(cert.verdict && cert.sigma_min > 1e-10 * cert.sigma_max, || {
        format!("n={n} d={d} A={a} {side}: rank {} σ_min {:e}", cert.rank, cert.sigma_min)
    })?;
    let mut rng = seeded(seed);
    let mut residual: f64 = cert.residual.unwrap_or(f64::INFINITY);
    for _ in 0..10 {
        let probe = ok(random_psd_probe(&mut rng, n, d))?;
        residual = residual.max(ok(force_zero_operator(&fam, &probe))?);
    }
    ensure(residual <= 1e-9, || format!("n={n} d={d} A={a} {side}: residual {residual:e}"))?;
    Ok((cert.sigma_min / cert.sigma_max, residual))
}

fn c4_nogo_part_one() -> Check {
    let start = Instant::now();
    let (mut worst_ratio, mut worst_residual) = (f64::INFINITY, 0.0f64);
    let mut cases = 0;
    for (n, d) in WITNESS_GRID {
        let cmin = ok(c_min(n, d))?;
        for a in [(cmin + 1.0) / 2.0, 0.9] {
            let base = ok(sample_region(n, d, a, Side::S2, 1))?;
            let (ratio, residual) = witness(&base, a, Side::S2, 1)?;
            worst_ratio = worst_ratio.min(ratio);
            worst_residual = worst_residual.max(residual);
            cases += 1;
        }
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "{cases} S2 families span; min σ_min/σ_max = {worst_ratio:.2e}, max residual = {worst_residual:.1e}"
    ))
}

fn c5_nogo_part_two() -> Check {
    let (mut worst_ratio, mut worst_residual) = (f64::INFINITY, 0.0f64);
    let mut cases = 0;
    for (k, (n, d)) in WITNESS_GRID.into_iter().enumerate() {
        let cmin = ok(c_min(n, d))?;
        for a in [cmin, 0.5] {
            if a >= 1.0 {
                continue;
            }
            let base = ok(identical_base(&mut seeded(100 + k as u64), n, d))?;
            let (ratio, residual) = witness(&base, a, Side::S1, 1)?;
            worst_ratio = worst_ratio.min(ratio);
            worst_residual = worst_residual.max(residual);
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} S1 families span; min σ_min/σ_max = {worst_ratio:.2e}, max residual = {worst_residual:.1e}"
    ))
}

/// `⟨x|P_sym|x⟩ = ‖(1/n!) Σ_π π(x)‖²` for a basis string `x`, by explicit
/// symmetrization of the string.
fn symmetric_weight(digits: &[usize]) -> f64 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for slot in 0..n {
                let mut q = p.clone();
                q.insert(slot, n - 1);
                out.push(q);
            }
        }
        out
    }
    let all = perms(digits.len());
    let mut counts = std::collections::HashMap::new();
    for p in &all {
        let image: Vec<usize> = p.iter().map(|&i| digits[i]).collect();
        *counts.entry(image).or_insert(0usize) += 1;
    }
    let total = all.len() as f64;
    counts.values().map(|&c| (c as f64 / total).powi(2)).sum()
}

fn c6_comparison_povm() -> Check {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (k, (n, d)) in [(2usize, 2usize), (2, 3), (3, 2)].into_iter().enumerate() {
        let povm = ok(comparison_povm(n, d))?;
        ensure(validate_povm(&povm).passed(), || format!("n={n} d={d} fails validation"))?;
        let r2 = povm.element(LABEL_DIFFERENT).expect("R2 element");
        let mut rng = seeded(600 + k as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let psi = ok(PureState::haar(&mut rng, d))?;
            worst = worst.max(ok(outcome_probability(r2, &ok(ProductState::power(&psi, n))?))?);
        }
        ensure(worst <= 1e-12, || format!("n={n} d={d}: Prob(R2) on identical states {worst:e}"))?;
    }
    notes.push("valid POVMs, Prob(R2) ≤ 1e-12 on identical products".to_string());

    let zero = ok(PureState::basis(2, 0))?;
    let one = ok(PureState::basis(2, 1))?;
    let cases = [
        (vec![zero.clone(), one.clone()], vec![0, 1], 0.5),
        (vec![zero.clone(), zero, one], vec![0, 0, 1], 1.0 / 3.0),
    ];
    for (factors, digits, stated) in cases {
        let n = factors.len();
        let povm = ok(comparison_povm(n, 2))?;
        let p = ok(outcome_probability(povm.element(LABEL_DIFFERENT).unwrap(), &ok(kron_state(&factors))?))?;
        let oracle = 1.0 - symmetric_weight(&digits);
        if (p - oracle).abs() > 1e-12 {
            failures.push(format!("{digits:?}: Prob(R2) = {p} disagrees with projection oracle {oracle}"));
        }
        if (p - stated).abs() <= 1e-12 {
            notes.push(format!("{digits:?} → {p:.12}"));
        } else {
            failures.push(format!(
                "{digits:?}: Prob(R2) = {p:.15} (projection oracle {oracle:.15}), required {stated:.15} ± 1e-12"
            ));
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn c7_nullspace_decay() -> Check {
    let start = Instant::now();
    let mut report = Vec::new();
    for (n, d) in [(2usize, 2usize), (3, 2)] {
        let curve = ok(nullspace_decay(n, d, 0.5, Side::S2, 200, 1))?;
        ensure(curve.samples.windows(2).all(|w| w[1].1 <= w[0].1), || "S2 curve increased".into())?;
        ensure(curve.final_dimension() == Some(0), || {
            format!("S2 ({n},{d}) ends at {:?}", curve.final_dimension())
        })?;
        let closed_at = curve.samples.iter().find(|s| s.1 == 0).map(|s| s.0).unwrap();
        report.push(format!("S2({n},{d})→0 after {closed_at}"));

        let expected = d.pow(n as u32) - binomial(n + d - 1, d - 1);
        let curve = ok(nullspace_decay(n, d, 1.0, Side::S1, 200, 1))?;
        ensure(curve.final_dimension() == Some(expected), || {
            format!("S1 ({n},{d}) plateau {:?}, expected {expected}", curve.final_dimension())
        })?;
        report.push(format!("S1({n},{d})→{expected}"));
    }
    within_budget(start, Duration::from_secs(30))?;
    Ok(report.join(", "))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Direct C′: tilt each factor by hand and average the pairwise fidelities.
fn direct_perturbed_closeness(
    base: &StateEnsemble,
    complements: &[Vec<PureState>],
    eps: f64,
    tuple: &[usize],
) -> f64 {
    let tilted: Vec<Vec<C64>> = base
        .states()
        .iter()
        .zip(complements)
        .zip(tuple)
        .map(|((psi, phis), &j)| {
            (0..psi.dim())
                .map(|a| match phis.get(j) {
                    Some(phi) => (psi.amplitudes()[a] + phi.amplitudes()[a] * eps) / (1.0 + eps * eps).sqrt(),
                    None => psi.amplitudes()[a],
                })
                .collect()
        })
        .collect();
    let n = tilted.len();
    let mut sum = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            let ip: C64 = tilted[i].iter().zip(&tilted[k]).map(|(x, y)| x.conj() * y).sum();
            sum += ip.norm_sqr();
        }
    }
    2.0 * sum / (n * (n - 1)) as f64
}

fn c8_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    let shapes = [(2usize, 2usize), (3, 2), (2, 3), (3, 3), (4, 2)];
    for trial in 0..200u64 {
        let mut rng = trial_rng(800, trial);
        let (n, d) = shapes[trial as usize % shapes.len()];
        let base = ok(StateEnsemble::haar(&mut rng, n, d))?;
        let eps = 0.1 * (trial as f64 + 1.0) / 200.0;
        let complements: Vec<_> = base.states().iter().map(complement_basis).collect();
        let tuples = (0..n).map(|_| 0..d).multi_cartesian_product();
        for tuple in tuples {
            let closed = ok(perturbed_closeness_closed_form(&base, &complements, eps, &tuple))?;
            let direct = direct_perturbed_closeness(&base, &complements, eps, &tuple);
            let diff = (closed - direct).abs();
            worst = worst.max(diff);
            ensure(diff <= 1e-10, || format!("trial {trial} tuple {tuple:?}: {diff:e}"))?;
        }
    }
    Ok(format!("200 (base, ε ≤ 0.1) pairs, all tuples, max |ΔC′| = {worst:.1e}"))
}

fn c9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("cert{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_qcloseness"))
            .args(["witness", "--n", "3", "--d", "2", "--threshold", "0.5", "--seed", "7", "--output"])
            .arg(&path)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("run {run} exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "certificate files differ".into())?;
    let text = String::from_utf8_lossy(&outputs[0]);
    ensure(text.lines().nth(1).is_some_and(|l| l.contains(",8,true,")), || {
        format!("unexpected certificate {text}")
    })?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("1 c_min formula", c1_c_min_formula),
        ("2 Gram consistency", c2_gram_consistency),
        ("3 extremal spectrum", c3_extremal_spectrum),
        ("4 no-go witness, S2 side", c4_nogo_part_one),
        ("5 no-go witness, S1 side", c5_nogo_part_two),
        ("6 A=1 comparison POVM", c6_comparison_povm),
        ("7 nullspace decay", c7_nullspace_decay),
        ("8 perturbed closeness closed form", c8_closed_form),
        ("9 witness determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why} [{:.2?}]", start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
