//! Bound verification: exact and Monte Carlo evaluation of the averaged
//! trace-norm distance to the randomized target, the entropic right-hand
//! side, α-sweeps with CSV/JSON reports, and the trace-norm contraction
//! property tester for trace-non-increasing CP maps.

use std::fmt;

use serde::Serialize;

use crate::decouple::{deviation_trace_norm_sample, ChannelEnsemble};
use crate::entropy::{
    renyi_cond_entropy_fixed, renyi_cond_entropy_opt, support_leak, EntropyValue,
    OptimizerSettings, RenyiOrder,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::hashfam::{CqState, HashFamily, EXACT_ENUMERATION_LIMIT};
use crate::qops::{
    haar_unitary, herm_eigenvalues, identity, random_hermitian, random_normal, trace_norm,
    CMatrix, DensityOperator, SeededRng,
};

/// Numerical floor granted to exact inequalities.
pub const EXACT_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Verdicts and reports
// ---------------------------------------------------------------------------

/// Statistical verdict for one bound comparison.
///
/// `Holds` means `lhs + 3 stderr <= rhs` (plus the numerical floor),
/// `Violated` means `lhs - 3 stderr > rhs`, anything in between is
/// `Inconclusive`. Rows with an infinite right-hand side are `Vacuous`.
/// Exact rows carry `stderr = 0`, so they are always `Holds` or `Violated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
    Vacuous,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous",
        };
        f.write_str(s)
    }
}

pub fn classify(lhs: f64, stderr: f64, rhs: f64) -> Verdict {
    if rhs.is_infinite() && rhs > 0.0 {
        return Verdict::Vacuous;
    }
    if lhs + 3.0 * stderr <= rhs + EXACT_TOL {
        Verdict::Holds
    } else if lhs - 3.0 * stderr > rhs + EXACT_TOL {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// One α row of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub alpha: f64,
    pub lhs: f64,
    /// Standard error of the LHS; 0 for exact enumeration.
    pub stderr: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub vacuous: bool,
}

/// Sweep metadata echoed into the JSON sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct ReportMeta {
    pub state: String,
    pub family: String,
    pub sigma_mode: String,
    pub lambda: f64,
    pub log_c_bits: f64,
    pub seed: u64,
    /// Monte Carlo sample count; absent for exact enumeration.
    pub samples: Option<usize>,
    /// Whether the support precondition held (fixed-σ modes only).
    pub support_ok: Option<bool>,
    /// Set when the pairing of state and family falls outside the regime
    /// the inequality is stated for.
    pub outside_theorem: bool,
}

/// Full sweep result: one row per α plus metadata.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub meta: ReportMeta,
}

/// Decimal with 12 significant digits; infinities print as `inf`/`-inf`.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

impl BoundReport {
    /// CSV with the fixed header `alpha,lhs,stderr,rhs,slack,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,lhs,stderr,rhs,slack,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_sig12(r.alpha),
                format_sig12(r.lhs),
                format_sig12(r.stderr),
                format_sig12(r.rhs),
                format_sig12(r.slack),
                r.verdict
            ));
        }
        out
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.meta).expect("metadata serializes")
    }

    /// True when no row is violated.
    pub fn all_sound(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Violated)
    }
}

// ---------------------------------------------------------------------------
// Left-hand sides
// ---------------------------------------------------------------------------

/// Per-function term of the exact LHS: the blockwise trace norm
/// `sum_c || sigma_E(c) - rho_E/|C| ||_1` for hash function `index`.
pub fn lhs_term(fam: &HashFamily, index: usize, state: &CqState) -> Result<f64> {
    let pushed = state.op().apply_hash(fam, index)?;
    let uniform = state.op().e_sum().scale(1.0 / fam.output_size() as f64);
    let mut acc = 0.0;
    for block in pushed.blocks() {
        let eigs = herm_eigenvalues(&(block - &uniform))?;
        acc += eigs.iter().map(|l| l.abs()).sum::<f64>();
    }
    Ok(acc)
}

/// Exact expectation over the family of the trace-norm deviation.
pub fn lhs_exact(fam: &HashFamily, state: &CqState) -> Result<f64> {
    if fam.len() > EXACT_ENUMERATION_LIMIT {
        return Err(Error::FamilyTooLarge(fam.len()));
    }
    lhs_term(fam, 0, state)?; // surface dimension errors before the parallel map
    let terms: Vec<f64> =
        exec::map_indexed(fam.len(), |h| {
            fam.weight(h) * lhs_term(fam, h, state).expect("dims checked")
        });
    Ok(exec::compensated_sum(&terms))
}

/// Monte Carlo estimate of the hash-family LHS by sampling function
/// indices according to their weights.
pub fn lhs_mc_hash(
    fam: &HashFamily,
    state: &CqState,
    samples: usize,
    rng: &SeededRng,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    lhs_term(fam, 0, state)?;
    let cumulative: Vec<f64> = fam
        .weights_cumulative()
        .unwrap_or_else(|| (1..=fam.len()).map(|k| k as f64 / fam.len() as f64).collect());
    let values: Vec<f64> = exec::map_indexed(samples, |i| {
        let mut sub = rng.fold_in(i as u64);
        let u: f64 = rand::Rng::gen(&mut sub);
        let idx = cumulative.partition_point(|&c| c < u).min(fam.len() - 1);
        lhs_term(fam, idx, state).expect("dims checked")
    });
    Ok(exec::mean_stderr(&values))
}

/// Monte Carlo LHS for a continuous channel ensemble.
///
/// `rho` must carry dims `[A]` or `[A, E]` with `A` matching the ensemble
/// input. Returns the sample mean and the standard error of the mean.
pub fn lhs_mc(
    ens: &ChannelEnsemble,
    rho: &DensityOperator,
    samples: usize,
    rng: &SeededRng,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let (da, de) = match rho.dims() {
        [a] => (*a, 1usize),
        [a, e] => (*a, *e),
        other => {
            return Err(Error::DimMismatch(format!(
                "expected dims [A] or [A, E], got {other:?}"
            )))
        }
    };
    if da != ens.dim_a() {
        return Err(Error::DimMismatch(format!(
            "state A dimension {} does not match ensemble input {}",
            da,
            ens.dim_a()
        )));
    }
    let values: Vec<f64> = exec::map_indexed(samples, |i| {
        let mut sub = rng.fold_in(i as u64);
        deviation_trace_norm_sample(ens, rho.mat(), de, &mut sub).expect("dims checked")
    });
    Ok(exec::mean_stderr(&values))
}

// ---------------------------------------------------------------------------
// Right-hand side
// ---------------------------------------------------------------------------

/// `2^{2/a - 1} * 2^{((a-1)/a)(logC - H + 2 log2 lambda)}` for `a` in
/// `(1, 2]`. A negative-infinite entropy yields an infinite (vacuous)
/// bound.
pub fn rhs_bound(
    alpha: RenyiOrder,
    log_c_bits: f64,
    h_alpha_bits: EntropyValue,
    lambda: f64,
) -> Result<f64> {
    if !alpha.in_bound_window() {
        return Err(Error::OrderOutsideWindow(alpha.get()));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !h_alpha_bits.is_finite() {
        return Ok(f64::INFINITY);
    }
    let a = alpha.get();
    let prefactor = (2.0f64).powf(2.0 / a - 1.0);
    let exponent = (a - 1.0) / a * (log_c_bits - h_alpha_bits.bits() + 2.0 * lambda.log2());
    Ok(prefactor * (2.0f64).powf(exponent))
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// How σ is chosen for the entropic side of the sweep.
#[derive(Clone, Debug)]
pub enum SigmaMode {
    /// σ = the E marginal of the state (default; always satisfies the
    /// support precondition).
    Marginal,
    /// σ maximized per α by the fixed-point optimizer.
    Optimized,
    /// Caller-supplied σ; rows turn vacuous when the support precondition
    /// fails.
    Explicit(DensityOperator),
}

impl SigmaMode {
    fn label(&self) -> &'static str {
        match self {
            SigmaMode::Marginal => "marginal",
            SigmaMode::Optimized => "optimized",
            SigmaMode::Explicit(_) => "explicit",
        }
    }
}

/// Shared sweep parameters.
#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub sigma: SigmaMode,
    pub opts: OptimizerSettings,
    pub seed: u64,
    pub state_label: String,
}

impl SweepSettings {
    pub fn marginal(seed: u64, state_label: impl Into<String>) -> Self {
        Self {
            sigma: SigmaMode::Marginal,
            opts: OptimizerSettings::default(),
            seed,
            state_label: state_label.into(),
        }
    }
}

fn entropy_rows(
    rho: &DensityOperator,
    alphas: &[f64],
    settings: &SweepSettings,
) -> Result<(Vec<EntropyValue>, Option<bool>)> {
    let rng = SeededRng::new(settings.seed);
    match &settings.sigma {
        SigmaMode::Marginal => {
            let sigma = rho.marginal(&[1])?;
            let values = alphas
                .iter()
                .map(|&a| renyi_cond_entropy_fixed(rho, &sigma, RenyiOrder::new(a)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((values, Some(true)))
        }
        SigmaMode::Explicit(sigma) => {
            let ok = support_leak(rho, sigma)? <= 1e-10;
            let values = alphas
                .iter()
                .map(|&a| renyi_cond_entropy_fixed(rho, sigma, RenyiOrder::new(a)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((values, Some(ok)))
        }
        SigmaMode::Optimized => {
            let values: Vec<Result<EntropyValue>> = exec::map_indexed(alphas.len(), |i| {
                let order = RenyiOrder::new(alphas[i])?;
                let sub = rng.fold_in(i as u64);
                Ok(renyi_cond_entropy_opt(rho, order, &settings.opts, &sub)?.value)
            });
            let values = values.into_iter().collect::<Result<Vec<_>>>()?;
            Ok((values, None))
        }
    }
}

fn assemble_rows(
    alphas: &[f64],
    entropies: &[EntropyValue],
    lhs: f64,
    stderr: f64,
    log_c_bits: f64,
    lambda: f64,
) -> Result<Vec<BoundRow>> {
    alphas
        .iter()
        .zip(entropies)
        .map(|(&a, &h)| {
            let order = RenyiOrder::new(a)?;
            let rhs = rhs_bound(order, log_c_bits, h, lambda)?;
            let verdict = classify(lhs, stderr, rhs);
            Ok(BoundRow {
                alpha: a,
                lhs,
                stderr,
                rhs,
                slack: rhs - lhs,
                verdict,
                vacuous: verdict == Verdict::Vacuous,
            })
        })
        .collect()
}

/// α-sweep for a CQ state under an enumerable hash family; the LHS is
/// exact and λ = 1 (built-in families are 1-randomizing).
pub fn verify_sweep_cq(
    state: &CqState,
    fam: &HashFamily,
    alphas: &[f64],
    settings: &SweepSettings,
) -> Result<BoundReport> {
    let rho = state.embed();
    let lambda = 1.0;
    let log_c_bits = fam.output_bits() as f64;
    let lhs = lhs_exact(fam, state)?;
    let (entropies, support_ok) = entropy_rows(&rho, alphas, settings)?;
    let rows = assemble_rows(alphas, &entropies, lhs, 0.0, log_c_bits, lambda)?;
    Ok(BoundReport {
        rows,
        meta: ReportMeta {
            state: settings.state_label.clone(),
            family: format!("affine-hash(n={}, m={}, |H|={})", fam.input_bits(), fam.output_bits(), fam.len()),
            sigma_mode: settings.sigma.label().to_string(),
            lambda,
            log_c_bits,
            seed: settings.seed,
            samples: None,
            support_ok,
            outside_theorem: false,
        },
    })
}

/// α-sweep for a density operator under a continuous ensemble; the LHS is
/// Monte Carlo with `samples` draws and λ = 1 (2-design ensembles).
pub fn verify_sweep_q(
    rho: &DensityOperator,
    ens: &ChannelEnsemble,
    alphas: &[f64],
    samples: usize,
    settings: &SweepSettings,
) -> Result<BoundReport> {
    verify_sweep_q_flagged(rho, ens, alphas, samples, settings, false)
}

/// Same as [`verify_sweep_q`] but marks the report as outside the stated
/// regime (e.g. a quantum ensemble driven by a CQ state).
pub fn verify_sweep_q_flagged(
    rho: &DensityOperator,
    ens: &ChannelEnsemble,
    alphas: &[f64],
    samples: usize,
    settings: &SweepSettings,
    outside_theorem: bool,
) -> Result<BoundReport> {
    let rho = if rho.dims().len() == 1 {
        rho.clone().with_dims(vec![rho.dim(), 1])?
    } else {
        rho.clone()
    };
    let lambda = 1.0;
    let log_c_bits = (ens.dim_c() as f64).log2();
    let rng = SeededRng::new(settings.seed).fold_in(0x004c_4853);
    let (lhs, stderr) = lhs_mc(ens, &rho, samples, &rng)?;
    let (entropies, support_ok) = entropy_rows(&rho, alphas, settings)?;
    let rows = assemble_rows(alphas, &entropies, lhs, stderr, log_c_bits, lambda)?;
    Ok(BoundReport {
        rows,
        meta: ReportMeta {
            state: settings.state_label.clone(),
            family: format!("haar(dim_c={}, dim_d={})", ens.dim_c(), ens.dim_d()),
            sigma_mode: settings.sigma.label().to_string(),
            lambda,
            log_c_bits,
            seed: settings.seed,
            samples: Some(samples),
            support_ok,
            outside_theorem,
        },
    })
}

// ---------------------------------------------------------------------------
// Completely positive maps and the contraction lemma
// ---------------------------------------------------------------------------

/// CP map in operator-sum form.
#[derive(Clone, Debug)]
pub struct CpMap {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl CpMap {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidParameter("a CP map needs at least one Kraus operator".into())
        })?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::DimMismatch("Kraus operators must share a shape".into()));
            }
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![identity(dim)], dim_in: dim, dim_out: dim }
    }

    /// Partial trace over the second factor as a Kraus map.
    pub fn partial_trace_b(dim_a: usize, dim_b: usize) -> Self {
        let kraus = (0..dim_b)
            .map(|t| {
                CMatrix::from_fn(dim_a, dim_a * dim_b, |i, j| {
                    if j == i * dim_b + t {
                        nalgebra::Complex::new(1.0, 0.0)
                    } else {
                        nalgebra::Complex::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self { kraus, dim_in: dim_a * dim_b, dim_out: dim_a }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::DimMismatch(format!(
                "input is {}x{}, map expects {}",
                x.nrows(),
                x.ncols(),
                self.dim_in
            )));
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    /// `sum_k K' K`; equals the identity for trace-preserving maps.
    pub fn kraus_gram(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            g += k.adjoint() * k;
        }
        g
    }

    pub fn scale(mut self, factor: f64) -> Self {
        let s = factor.sqrt();
        for k in &mut self.kraus {
            *k = k.scale(s);
        }
        self
    }
}

/// Outcome of one contraction check.
#[derive(Clone, Copy, Debug)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Verifies `||N(M)||_1 <= ||M||_1` for a trace-non-increasing CP map and
/// a normal operator. Precondition failures reject the input rather than
/// reporting a verdict.
pub fn lemma_a1_check(map: &CpMap, m: &CMatrix) -> Result<LemmaCheck> {
    let gram = map.kraus_gram();
    let lam_max =
        herm_eigenvalues(&gram)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if lam_max > 1.0 + 1e-10 {
        return Err(Error::NotTraceNonincreasing(lam_max));
    }
    let comm = m * m.adjoint() - m.adjoint() * m;
    let comm_norm = herm_eigenvalues(&comm)?.into_iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    if comm_norm > 1e-10 {
        return Err(Error::NotNormal(comm_norm));
    }
    let lhs = trace_norm(&map.apply(m)?);
    let rhs = trace_norm(m);
    Ok(LemmaCheck { lhs, rhs, ok: lhs <= rhs + EXACT_TOL })
}

/// Random channel via a Haar isometry: `dim_in -> dim_out` with
/// `kraus_count` environment dimensions; requires
/// `dim_out * kraus_count >= dim_in`.
pub fn random_cptp_map(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    rng: &mut SeededRng,
) -> Result<CpMap> {
    let total = dim_out * kraus_count;
    if total < dim_in {
        return Err(Error::InvalidParameter(format!(
            "stinespring dimension {total} smaller than input {dim_in}"
        )));
    }
    let u = haar_unitary(total, rng);
    let isometry = u.columns(0, dim_in).into_owned();
    let kraus = (0..kraus_count)
        .map(|f| {
            CMatrix::from_fn(dim_out, dim_in, |b, a| isometry[(b * kraus_count + f, a)])
        })
        .collect();
    CpMap::new(kraus)
}

/// Random trace-non-increasing CP map: a random channel, possibly scaled
/// down or with a random subset of its Kraus operators dropped.
pub fn random_tni_cp_map(dim_in: usize, dim_out: usize, rng: &mut SeededRng) -> Result<CpMap> {
    let max_env = (2 * dim_in).div_ceil(dim_out).max(2);
    let env = rand::Rng::gen_range(rng, 1..=max_env);
    let env = env.max(dim_in.div_ceil(dim_out));
    let full = random_cptp_map(dim_in, dim_out, env, rng)?;
    match rand::Rng::gen_range(rng, 0..3u8) {
        0 => Ok(full),
        1 => {
            let s: f64 = rand::Rng::gen_range(rng, 0.05..1.0);
            Ok(full.scale(s))
        }
        _ => {
            let keep: Vec<CMatrix> = full
                .kraus
                .iter()
                .filter(|_| rand::Rng::gen_bool(rng, 0.6))
                .cloned()
                .collect();
            if keep.is_empty() {
                Ok(full.scale(0.5))
            } else {
                CpMap::new(keep)
            }
        }
    }
}

/// Random normal operator: Hermitian draws and unitary-times-PSD draws
/// with commuting polar factors, in rotation.
pub fn random_normal_operator(dim: usize, rng: &mut SeededRng) -> CMatrix {
    if rand::Rng::gen_bool(rng, 1.0 / 3.0) {
        random_hermitian(dim, rng)
    } else {
        random_normal(dim, rng)
    }
}

// ---------------------------------------------------------------------------
