//! Entropy-accumulation application: the per-round Rényi lower bound, the
//! closed-form error exponent with its validity region, a grid-search
//! oracle, and rate sweeps.
//!
//! All rates, entropies and exponents are in bits (per round where
//! applicable). The tradeoff value `f(w)`, variance constant `V` and the
//! weight probability `p_w` are caller-supplied inputs.

use crate::entropy::RenyiOrder;
use crate::error::{Error, Result};
use crate::verify::format_sig12;

/// Inputs of the accumulation bound.
#[derive(Clone, Copy, Debug)]
pub struct EatParams {
    /// Number of rounds. `n = 0` is allowed as a degenerate case and
    /// reduces the bound to its prefactor.
    pub rounds: usize,
    /// Tradeoff value `f(w)` in bits per round.
    pub tradeoff: f64,
    /// Variance constant `V` in bits.
    pub variance: f64,
    /// Output rate `R` in bits per round.
    pub rate: f64,
    /// Probability of the conditioning event, in `(0, 1]`.
    pub weight_prob: f64,
}

impl EatParams {
    pub fn new(
        rounds: usize,
        tradeoff: f64,
        variance: f64,
        rate: f64,
        weight_prob: f64,
    ) -> Result<Self> {
        if variance.is_nan() || variance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "variance must be positive, got {variance}"
            )));
        }
        if weight_prob.is_nan() || weight_prob <= 0.0 || weight_prob > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "weight probability must lie in (0, 1], got {weight_prob}"
            )));
        }
        if !tradeoff.is_finite() || !rate.is_finite() {
            return Err(Error::InvalidParameter("tradeoff and rate must be finite".into()));
        }
        Ok(Self { rounds, tradeoff, variance, rate, weight_prob })
    }
}

/// Accumulated Rényi lower bound
/// `n f(w) - n ((a-1)/4) V^2 - (a/(a-1)) log2(1/p_w)`, possibly negative.
pub fn eat_renyi_lower_bound(p: &EatParams, alpha: RenyiOrder) -> Result<f64> {
    if !alpha.in_bound_window() {
        return Err(Error::OrderOutsideWindow(alpha.get()));
    }
    let a = alpha.get();
    let n = p.rounds as f64;
    Ok(n * p.tradeoff
        - n * (a - 1.0) / 4.0 * p.variance * p.variance
        - a / (a - 1.0) * (1.0 / p.weight_prob).log2())
}

/// Closed-form optimum of the exponent.
#[derive(Clone, Copy, Debug)]
pub struct ErrorExponent {
    /// `E(R)` in bits per round.
    pub exponent: f64,
    pub beta_star: f64,
    pub alpha_star: f64,
    /// True when `0 < f(w) - R <= V^2/2`, the region where the interior
    /// optimum is admissible.
    pub valid: bool,
}

/// `E(R) = ((f(w) - R) / V)^2 / 2` with `beta* = (f(w) - R)/V^2` and
/// `alpha* = 1/(1 - beta*)`, valid for `0 < f(w) - R <= V^2/2`.
///
/// Outside the region the result is flagged invalid: above it the
/// boundary evaluation at `beta = 1/2` (`alpha = 2`) is reported; at or
/// below zero gap the exponent is zero.
pub fn error_exponent(tradeoff: f64, rate: f64, variance: f64) -> Result<ErrorExponent> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let gap = tradeoff - rate;
    let vsq = variance * variance;
    if gap > 0.0 && gap <= vsq / 2.0 {
        let beta = gap / vsq;
        Ok(ErrorExponent {
            exponent: (gap / variance) * (gap / variance) / 2.0,
            beta_star: beta,
            alpha_star: 1.0 / (1.0 - beta),
            valid: true,
        })
    } else if gap > vsq / 2.0 {
        // boundary evaluation at beta = 1/2
        Ok(ErrorExponent {
            exponent: gap / 2.0 - vsq / 8.0,
            beta_star: 0.5,
            alpha_star: 2.0,
            valid: false,
        })
    } else {
        Ok(ErrorExponent { exponent: 0.0, beta_star: 0.0, alpha_star: 1.0, valid: false })
    }
}

/// Result of the grid-search oracle.
#[derive(Clone, Copy, Debug)]
pub struct GridOptimum {
    pub exponent: f64,
    pub beta: f64,
}

/// Brute-force oracle: minimizes `b^2 V^2/2 - b (f(w) - R)` over a uniform
/// grid `b in [0, 1/2]` and returns the negated minimum with its argmin.
pub fn exponent_grid_opt(
    tradeoff: f64,
    rate: f64,
    variance: f64,
    resolution: usize,
) -> Result<GridOptimum> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive, got {variance}"
        )));
    }
    if resolution < 1000 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be >= 1000, got {resolution}"
        )));
    }
    let gap = tradeoff - rate;
    let vsq = variance * variance;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=resolution {
        let beta = 0.5 * k as f64 / resolution as f64;
        let g = beta * beta * vsq / 2.0 - beta * gap;
        if g < best.0 {
            best = (g, beta);
        }
    }
    Ok(GridOptimum { exponent: -best.0, beta: best.1 })
}

/// `(2/p_w) * 2^{n b (R - f(w) + b V^2/2)}` with `b = (a-1)/a`. At the
/// optimal order this equals `(2/p_w) * 2^{-n E(R)}`.
pub fn eat_bound_rhs(p: &EatParams, alpha: RenyiOrder) -> Result<f64> {
    if !alpha.in_bound_window() {
        return Err(Error::OrderOutsideWindow(alpha.get()));
    }
    let beta = (alpha.get() - 1.0) / alpha.get();
    Ok(bound_from_beta(p, beta))
}

fn bound_from_beta(p: &EatParams, beta: f64) -> f64 {
    let n = p.rounds as f64;
    let exponent = n * beta * (p.rate - p.tradeoff + beta * p.variance * p.variance / 2.0);
    2.0 / p.weight_prob * (2.0f64).powf(exponent)
}

/// Full record for one parameter point: the closed-form optimum plus the
/// bound it yields after `n` rounds.
#[derive(Clone, Copy, Debug)]
pub struct EatResult {
    pub exponent: f64,
    pub beta_star: f64,
    pub alpha_star: f64,
    pub valid: bool,
    /// `(2/p_w) * 2^{n b*(R - f(w) + b* V^2/2)}` at the reported `beta*`.
    pub rhs_at_n: f64,
}

pub fn eat_result(p: &EatParams) -> Result<EatResult> {
    let opt = error_exponent(p.tradeoff, p.rate, p.variance)?;
    Ok(EatResult {
        exponent: opt.exponent,
        beta_star: opt.beta_star,
        alpha_star: opt.alpha_star,
        valid: opt.valid,
        rhs_at_n: bound_from_beta(p, opt.beta_star),
    })
}

/// One row of a rate sweep.
#[derive(Clone, Copy, Debug)]
pub struct RateRow {
    pub rate: f64,
    pub exponent: f64,
    pub beta_star: f64,
    pub alpha_star: f64,
    pub valid: bool,
    pub bound_at_n: f64,
}

/// Tabulates the exponent across `steps` evenly spaced rates.
pub fn rate_sweep(
    tradeoff: f64,
    variance: f64,
    r_min: f64,
    r_max: f64,
    steps: usize,
    rounds: usize,
    weight_prob: f64,
) -> Result<Vec<RateRow>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    if r_min.is_nan() || r_max.is_nan() || r_min >= r_max {
        return Err(Error::InvalidParameter(format!(
            "rate window is empty: [{r_min}, {r_max}]"
        )));
    }
    (0..steps)
        .map(|i| {
            let rate = r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64;
            let p = EatParams::new(rounds, tradeoff, variance, rate, weight_prob)?;
            let res = eat_result(&p)?;
            Ok(RateRow {
                rate,
                exponent: res.exponent,
                beta_star: res.beta_star,
                alpha_star: res.alpha_star,
                valid: res.valid,
                bound_at_n: res.rhs_at_n,
            })
        })
        .collect()
}

/// CSV with the fixed header `R,E,beta_star,alpha_star,valid,bound_at_n`.
pub fn rate_sweep_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("R,E,beta_star,alpha_star,valid,bound_at_n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_sig12(r.rate),
            format_sig12(r.exponent),
            format_sig12(r.beta_star),
            format_sig12(r.alpha_star),
            r.valid,
            format_sig12(r.bound_at_n)
        ));
    }
    out
}
