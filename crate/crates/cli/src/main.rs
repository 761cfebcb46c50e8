//! `padec` — seeded, machine-readable front end for entropy evaluation,
//! hash-family verification, randomizing-bound sweeps, contraction
//! property suites and error-exponent rate tables.
//!
//! Exit codes: 0 success (all verdicts hold or are vacuous), 2 input
//! error, 3 inequality violation detected.

mod config;
mod statefile;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use padec_core::decouple::{empirical_lambda_q, ChannelEnsemble};
use padec_core::eat::{eat_result, rate_sweep, rate_sweep_csv, EatParams, RateRow};
use padec_core::entropy::{
    renyi_cond_entropy_fixed, renyi_cond_entropy_opt, OptimizerSettings, RenyiOrder,
};
use padec_core::hashfam::{verify_strong_2universal, CqState, HashFamily};
use padec_core::qops::{random_density, trace_norm, DensityOperator, SeededRng};
use padec_core::verify::{
    format_sig12, lemma_a1_check, random_normal_operator, random_tni_cp_map, verify_sweep_cq,
    verify_sweep_q, BoundReport, SigmaMode, SweepSettings,
};

use config::{parse_alpha_grid, Config, DEFAULT_ALPHA_GRID};

#[derive(Parser)]
#[command(name = "padec", version, about = "Randomness-extraction bound toolkit")]
struct Cli {
    /// RNG seed; identical (config, seed) pairs give byte-identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV/JSON reports (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated Rényi orders, e.g. "1.5,2.0".
    #[arg(long = "alpha-grid", global = true)]
    alpha_grid: Option<String>,

    /// Monte Carlo sample count for continuous ensembles.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Sigma choice for the entropic side: marginal | optimized.
    #[arg(long, global = true)]
    sigma: Option<String>,

    /// Flat key=value config file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sandwiched Rényi conditional entropies (fixed-sigma and optimized).
    Entropy {
        /// Built-in generator: random | product | entangled.
        #[arg(long)]
        state: Option<String>,
        #[arg(long = "dim-a")]
        dim_a: Option<usize>,
        #[arg(long = "dim-b")]
        dim_b: Option<usize>,
        /// Rank of the random state (defaults to full rank).
        #[arg(long)]
        rank: Option<usize>,
        /// Read the state from a file instead (see README for the format).
        #[arg(long = "state-file")]
        state_file: Option<PathBuf>,
        /// Write the evaluated state to this path in the text format.
        #[arg(long = "dump-state")]
        dump_state: Option<PathBuf>,
    },
    /// Verify the randomizing bound across the alpha grid.
    Verify {
        /// Family kind: affine | haar.
        #[arg(long)]
        family: Option<String>,
        /// Input bits of the affine family (|A| = 2^n).
        #[arg(long)]
        n: Option<usize>,
        /// Output bits of the affine family (|C| = 2^m).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "dim-e")]
        dim_e: Option<usize>,
        #[arg(long = "dim-c")]
        dim_c: Option<usize>,
        #[arg(long = "dim-d")]
        dim_d: Option<usize>,
    },
    /// Exhaustive pairwise-uniformity check of a hash family.
    HashCheck {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Family kind: affine | singleton | constants.
        #[arg(long)]
        family: Option<String>,
        /// Write the family in its text serialization to this path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Random (trace-non-increasing CP map, normal operator) pairs vs the
    /// trace-norm contraction.
    LemmaA1 {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long = "dim-min")]
        dim_min: Option<usize>,
        #[arg(long = "dim-max")]
        dim_max: Option<usize>,
    },
    /// Error-exponent closed form; single rate or a rate sweep.
    Eat {
        /// Tradeoff value f(w) in bits per round.
        #[arg(long = "f-w")]
        f_w: Option<f64>,
        /// Variance constant V in bits.
        #[arg(long = "v-const")]
        v_const: Option<f64>,
        /// Single output rate R; omit for a sweep.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long = "r-min")]
        r_min: Option<f64>,
        #[arg(long = "r-max")]
        r_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        /// Probability of the conditioning event.
        #[arg(long = "p-w")]
        p_w: Option<f64>,
    },
    /// Haar decoupling demo: contraction estimate plus a bound sweep.
    DecoupleDemo {
        #[arg(long = "dim-c")]
        dim_c: Option<usize>,
        #[arg(long = "dim-d")]
        dim_d: Option<usize>,
        #[arg(long = "dim-e")]
        dim_e: Option<usize>,
        /// Random test operators for the contraction estimate.
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    let seed = cfg.resolve("seed", cli.seed, 7u64)?;
    let out: Option<PathBuf> =
        cfg.resolve_opt("out", cli.out.map(|p| p.display().to_string()))?.map(PathBuf::from);
    let alpha_text =
        cfg.resolve("alpha-grid", cli.alpha_grid, DEFAULT_ALPHA_GRID.to_string())?;
    let alphas = parse_alpha_grid(&alpha_text)?;
    let samples = cfg.resolve("samples", cli.samples, 2000usize)?;
    let sigma_text = cfg.resolve("sigma", cli.sigma, "marginal".to_string())?;
    let sigma = match sigma_text.as_str() {
        "marginal" => SigmaMode::Marginal,
        "optimized" => SigmaMode::Optimized,
        other => return Err(format!("unknown sigma mode `{other}` (marginal|optimized)")),
    };

    match cli.cmd {
        Cmd::Entropy { state, dim_a, dim_b, rank, state_file, dump_state } => cmd_entropy(
            &mut cfg, seed, &out, &alphas, state, dim_a, dim_b, rank, state_file, dump_state,
        ),
        Cmd::Verify { family, n, m, dim_e, dim_c, dim_d } => cmd_verify(
            &mut cfg, seed, &out, &alphas, samples, sigma, family, n, m, dim_e, dim_c, dim_d,
        ),
        Cmd::HashCheck { n, m, family, export } => {
            cmd_hash_check(&mut cfg, &out, n, m, family, export)
        }
        Cmd::LemmaA1 { trials, dim_min, dim_max } => {
            cmd_lemma_a1(&mut cfg, seed, &out, trials, dim_min, dim_max)
        }
        Cmd::Eat { f_w, v_const, rate, r_min, r_max, steps, rounds, p_w } => {
            cmd_eat(&mut cfg, &out, f_w, v_const, rate, r_min, r_max, steps, rounds, p_w)
        }
        Cmd::DecoupleDemo { dim_c, dim_d, dim_e, trials } => cmd_decouple_demo(
            &mut cfg, seed, &out, &alphas, samples, sigma, dim_c, dim_d, dim_e, trials,
        ),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, content: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content).map_err(|e| format!("cannot write {}: {e}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| format!("cannot move {} into place: {e}", tmp.display()))
}

fn sidecar_json(meta: serde_json::Value, cfg: &Config) -> String {
    let config: BTreeMap<&String, &String> = cfg.echo().iter().collect();
    let value = serde_json::json!({ "meta": meta, "config": config });
    let mut text = serde_json::to_string_pretty(&value).expect("sidecar serializes");
    text.push('\n');
    text
}

fn emit_report(
    out: &Option<PathBuf>,
    stem: &str,
    report: &BoundReport,
    cfg: &Config,
) -> Result<(), String> {
    if let Some(dir) = out {
        write_atomic(&dir.join(format!("{stem}.csv")), &report.to_csv())?;
        write_atomic(
            &dir.join(format!("{stem}.json")),
            &sidecar_json(report.metadata_json(), cfg),
        )?;
    }
    Ok(())
}

fn print_report(report: &BoundReport) {
    println!(
        "# state={} family={} sigma={} lambda={} logC={} seed={}",
        report.meta.state,
        report.meta.family,
        report.meta.sigma_mode,
        report.meta.lambda,
        report.meta.log_c_bits,
        report.meta.seed
    );
    for row in &report.rows {
        println!(
            "alpha={:<6} lhs={} stderr={} rhs={} slack={} verdict={}",
            row.alpha,
            format_sig12(row.lhs),
            format_sig12(row.stderr),
            format_sig12(row.rhs),
            format_sig12(row.slack),
            row.verdict
        );
    }
}

fn report_exit(report: &BoundReport) -> u8 {
    if report.all_sound() {
        0
    } else {
        3
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_entropy(
    cfg: &mut Config,
    seed: u64,
    out: &Option<PathBuf>,
    alphas: &[f64],
    state: Option<String>,
    dim_a: Option<usize>,
    dim_b: Option<usize>,
    rank: Option<usize>,
    state_file: Option<PathBuf>,
    dump_state: Option<PathBuf>,
) -> Result<u8, String> {
    let kind = cfg.resolve("state", state, "random".to_string())?;
    let da = cfg.resolve("dim-a", dim_a, 2usize)?;
    let db = cfg.resolve("dim-b", dim_b, 2usize)?;
    let file = cfg.resolve_opt("state-file", state_file.map(|p| p.display().to_string()))?;

    let rho = if let Some(path) = file {
        let rho = statefile::read_state(Path::new(&path))?;
        if rho.dims().len() != 2 {
            return Err(format!(
                "entropy needs a two-subsystem state, file declares dims {:?}",
                rho.dims()
            ));
        }
        rho
    } else {
        let mut rng = SeededRng::new(seed);
        match kind.as_str() {
            "random" => {
                let r = cfg.resolve("rank", rank, da * db)?;
                random_density(da * db, r, &mut rng)
                    .map_err(|e| e.to_string())?
                    .with_dims(vec![da, db])
                    .map_err(|e| e.to_string())?
            }
            "product" => {
                let omega = random_density(db, db, &mut rng).map_err(|e| e.to_string())?;
                padec_core::entropy::uniform_product(da, &omega)
            }
            "entangled" => {
                if da != db {
                    return Err(format!("entangled state needs dim-a == dim-b, got {da} vs {db}"));
                }
                DensityOperator::maximally_entangled(da)
            }
            other => return Err(format!("unknown state generator `{other}`")),
        }
    };

    if let Some(path) = dump_state {
        write_atomic(&path, &statefile::write_state(&rho))?;
        println!("state written to {}", path.display());
    }

    let marginal = rho.marginal(&[1]).map_err(|e| e.to_string())?;
    let opts = OptimizerSettings::default();
    let base = SeededRng::new(seed);

    let mut csv = String::from("alpha,h_fixed,h_opt,witness_gap,converged\n");
    println!("# entropy of a {:?} state, seed {seed}", rho.dims());
    for (i, &a) in alphas.iter().enumerate() {
        let order = RenyiOrder::new(a).map_err(|e| e.to_string())?;
        let fixed =
            renyi_cond_entropy_fixed(&rho, &marginal, order).map_err(|e| e.to_string())?;
        let opt = renyi_cond_entropy_opt(&rho, order, &opts, &base.fold_in(i as u64))
            .map_err(|e| e.to_string())?;
        let gap = trace_norm(&(opt.witness.mat() - marginal.mat()));
        println!(
            "alpha={:<6} H_fixed={} H_opt={} witness_gap={} converged={}",
            a,
            format_sig12(fixed.bits()),
            format_sig12(opt.value.bits()),
            format_sig12(gap),
            opt.converged
        );
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sig12(a),
            format_sig12(fixed.bits()),
            format_sig12(opt.value.bits()),
            format_sig12(gap),
            opt.converged
        ));
    }

    if let Some(dir) = out {
        write_atomic(&dir.join("entropy.csv"), &csv)?;
        let meta = serde_json::json!({
            "state_dims": rho.dims(),
            "generator": kind,
            "seed": seed,
        });
        write_atomic(&dir.join("entropy.json"), &sidecar_json(meta, cfg))?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cfg: &mut Config,
    seed: u64,
    out: &Option<PathBuf>,
    alphas: &[f64],
    samples: usize,
    sigma: SigmaMode,
    family: Option<String>,
    n: Option<usize>,
    m: Option<usize>,
    dim_e: Option<usize>,
    dim_c: Option<usize>,
    dim_d: Option<usize>,
) -> Result<u8, String> {
    let family = cfg.resolve("family", family, "affine".to_string())?;
    let de = cfg.resolve("dim-e", dim_e, 2usize)?;

    let report = match family.as_str() {
        "affine" => {
            let n = cfg.resolve("n", n, 3usize)?;
            let m = cfg.resolve("m", m, 1usize)?;
            let fam = HashFamily::affine(n, m).map_err(|e| e.to_string())?;
            let mut rng = SeededRng::new(seed);
            let state = CqState::random(1 << n, de, &mut rng);
            let settings = SweepSettings {
                sigma,
                opts: OptimizerSettings::default(),
                seed,
                state_label: format!("cq-random(|A|={}, |E|={de})", 1 << n),
            };
            verify_sweep_cq(&state, &fam, alphas, &settings).map_err(|e| e.to_string())?
        }
        "haar" => {
            let dc = cfg.resolve("dim-c", dim_c, 2usize)?;
            let dd = cfg.resolve("dim-d", dim_d, 2usize)?;
            let ens = ChannelEnsemble::haar(dc, dd).map_err(|e| e.to_string())?;
            let da = dc * dd;
            let mut rng = SeededRng::new(seed);
            let rho = random_density(da * de, da * de, &mut rng)
                .map_err(|e| e.to_string())?
                .with_dims(vec![da, de])
                .map_err(|e| e.to_string())?;
            let settings = SweepSettings {
                sigma,
                opts: OptimizerSettings::default(),
                seed,
                state_label: format!("random(|A|={da}, |E|={de})"),
            };
            verify_sweep_q(&rho, &ens, alphas, samples, &settings).map_err(|e| e.to_string())?
        }
        other => return Err(format!("unknown family `{other}` (affine|haar)")),
    };

    print_report(&report);
    emit_report(out, "verify", &report, cfg)?;
    Ok(report_exit(&report))
}

fn cmd_hash_check(
    cfg: &mut Config,
    out: &Option<PathBuf>,
    n: Option<usize>,
    m: Option<usize>,
    family: Option<String>,
    export: Option<PathBuf>,
) -> Result<u8, String> {
    let n = cfg.resolve("n", n, 3usize)?;
    let m = cfg.resolve("m", m, 1usize)?;
    let kind = cfg.resolve("family", family, "affine".to_string())?;
    let fam = match kind.as_str() {
        "affine" => HashFamily::affine(n, m).map_err(|e| e.to_string())?,
        "singleton" => HashFamily::singleton_identity(n).map_err(|e| e.to_string())?,
        "constants" => HashFamily::all_constants(n, m).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown family `{other}` (affine|singleton|constants)")),
    };

    let report = verify_strong_2universal(&fam);
    println!(
        "family={kind}(n={n}, m={}) members={} strongly-2-universal={} worst_deviation={}",
        fam.output_bits(),
        fam.len(),
        report.ok,
        format_sig12(report.worst_deviation)
    );
    if let Some((a, ap, c, cp)) = report.worst_pair {
        println!("worst pair: a={a} a'={ap} c={c} c'={cp}");
    }

    if let Some(path) = export {
        let text = fam.serialize().map_err(|e| e.to_string())?;
        write_atomic(&path, &text)?;
        println!("family written to {}", path.display());
    }
    if let Some(dir) = out {
        let meta = serde_json::json!({
            "family": kind,
            "n": n,
            "m": fam.output_bits(),
            "members": fam.len(),
            "ok": report.ok,
            "worst_deviation": report.worst_deviation,
        });
        write_atomic(&dir.join("hash_check.json"), &sidecar_json(meta, cfg))?;
    }
    Ok(if report.ok { 0 } else { 3 })
}

fn cmd_lemma_a1(
    cfg: &mut Config,
    seed: u64,
    out: &Option<PathBuf>,
    trials: Option<usize>,
    dim_min: Option<usize>,
    dim_max: Option<usize>,
) -> Result<u8, String> {
    let trials = cfg.resolve("trials", trials, 1000usize)?;
    let dmin = cfg.resolve("dim-min", dim_min, 2usize)?;
    let dmax = cfg.resolve("dim-max", dim_max, 6usize)?;
    if dmin < 2 || dmax < dmin {
        return Err(format!("need 2 <= dim-min <= dim-max, got {dmin}..{dmax}"));
    }
    let span = dmax - dmin + 1;
    let base = SeededRng::new(seed);
    let mut failures = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..trials {
        let mut rng = base.fold_in(i as u64);
        let dim_in = dmin + i % span;
        let dim_out = dmin + (i / span) % span;
        let map = random_tni_cp_map(dim_in, dim_out, &mut rng).map_err(|e| e.to_string())?;
        let m = random_normal_operator(dim_in, &mut rng);
        let check = lemma_a1_check(&map, &m).map_err(|e| e.to_string())?;
        worst_excess = worst_excess.max(check.lhs - check.rhs);
        if !check.ok {
            failures += 1;
        }
    }
    println!(
        "lemma-a1: trials={trials} dims={dmin}..{dmax} failures={failures} worst_excess={}",
        format_sig12(worst_excess)
    );
    if let Some(dir) = out {
        let meta = serde_json::json!({
            "trials": trials,
            "dim_min": dmin,
            "dim_max": dmax,
            "failures": failures,
            "worst_excess": worst_excess,
            "seed": seed,
        });
        write_atomic(&dir.join("lemma_a1.json"), &sidecar_json(meta, cfg))?;
    }
    Ok(if failures == 0 { 0 } else { 3 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_eat(
    cfg: &mut Config,
    out: &Option<PathBuf>,
    f_w: Option<f64>,
    v_const: Option<f64>,
    rate: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    steps: Option<usize>,
    rounds: Option<usize>,
    p_w: Option<f64>,
) -> Result<u8, String> {
    let f_w = cfg.resolve("f-w", f_w, 0.9f64)?;
    let v = cfg.resolve("v-const", v_const, 1.0f64)?;
    let rounds = cfg.resolve("rounds", rounds, 100usize)?;
    let p_w = cfg.resolve("p-w", p_w, 1.0f64)?;
    let rate = cfg.resolve_opt("rate", rate)?;

    let rows: Vec<RateRow> = if let Some(r) = rate {
        let params = EatParams::new(rounds, f_w, v, r, p_w).map_err(|e| e.to_string())?;
        let res = eat_result(&params).map_err(|e| e.to_string())?;
        vec![RateRow {
            rate: r,
            exponent: res.exponent,
            beta_star: res.beta_star,
            alpha_star: res.alpha_star,
            valid: res.valid,
            bound_at_n: res.rhs_at_n,
        }]
    } else {
        let r_min = cfg.resolve("r-min", r_min, 0.0f64)?;
        let r_max = cfg.resolve("r-max", r_max, f_w)?;
        let steps = cfg.resolve("steps", steps, 11usize)?;
        rate_sweep(f_w, v, r_min, r_max, steps, rounds, p_w).map_err(|e| e.to_string())?
    };

    let csv = rate_sweep_csv(&rows);
    print!("{csv}");
    if let Some(dir) = out {
        write_atomic(&dir.join("eat.csv"), &csv)?;
        let meta = serde_json::json!({
            "f_w": f_w,
            "v": v,
            "rounds": rounds,
            "p_w": p_w,
            "rows": rows.len(),
        });
        write_atomic(&dir.join("eat.json"), &sidecar_json(meta, cfg))?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_decouple_demo(
    cfg: &mut Config,
    seed: u64,
    out: &Option<PathBuf>,
    alphas: &[f64],
    samples: usize,
    sigma: SigmaMode,
    dim_c: Option<usize>,
    dim_d: Option<usize>,
    dim_e: Option<usize>,
    trials: Option<usize>,
) -> Result<u8, String> {
    let dc = cfg.resolve("dim-c", dim_c, 2usize)?;
    let dd = cfg.resolve("dim-d", dim_d, 2usize)?;
    let de = cfg.resolve("dim-e", dim_e, 2usize)?;
    let trials = cfg.resolve("trials", trials, 20usize)?;
    cfg.note("samples", samples);

    let ens = ChannelEnsemble::haar(dc, dd).map_err(|e| e.to_string())?;
    let lambda = empirical_lambda_q(&ens, de, trials, samples, &SeededRng::new(seed))
        .map_err(|e| e.to_string())?;
    println!(
        "contraction estimate over {trials} operators x {samples} unitaries: max ratio {} (stderr {})",
        format_sig12(lambda.max_ratio),
        format_sig12(lambda.stderr_at_max)
    );
    let contraction_ok = lambda.max_ratio <= 1.0 + 3.0 * lambda.stderr_at_max;
    println!("one-randomizing within 3 stderr: {contraction_ok}");

    let da = dc * dd;
    let mut rng = SeededRng::new(seed).fold_in(0xDEC0);
    let rho = random_density(da * de, da * de, &mut rng)
        .map_err(|e| e.to_string())?
        .with_dims(vec![da, de])
        .map_err(|e| e.to_string())?;
    let settings = SweepSettings {
        sigma,
        opts: OptimizerSettings::default(),
        seed,
        state_label: format!("random(|A|={da}, |E|={de})"),
    };
    let report = verify_sweep_q(&rho, &ens, alphas, samples, &settings).map_err(|e| e.to_string())?;
    print_report(&report);
    emit_report(out, "decouple", &report, cfg)?;

    Ok(if contraction_ok && report.all_sound() { 0 } else { 3 })
}
