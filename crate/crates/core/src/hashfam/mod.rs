//! Strongly 2-universal hash families over GF(2^n) and the
//! classical-quantum channels they induce.
//!
//! The built-in construction is the affine family `x -> trunc_m(a x + b)`
//! over GF(2^n) with all `(a, b)` pairs and uniform weights. Families are
//! enumerable, so expectations over the function index are exact whenever
//! the family has at most 2^16 members.

pub mod gf2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::qops::{
    ginibre, random_density, random_normal, CMatrix, DensityOperator, SeededRng, C64,
};

pub use gf2::gf_mul;

// ---------------------------------------------------------------------------
// Hash families
// ---------------------------------------------------------------------------

/// A single function from n-bit strings to m-bit strings.
#[derive(Clone, Debug, PartialEq)]
pub enum HashFn {
    /// `x -> trunc_m(a x + b)` in GF(2^n); truncation keeps the m
    /// lowest-order coefficient bits.
    Affine { a: u16, b: u16 },
    /// Explicit lookup table of length 2^n with entries below 2^m.
    Table(Vec<u16>),
}

/// Finite indexed family of functions `{0,1}^n -> {0,1}^m` with weights.
#[derive(Clone, Debug)]
pub struct HashFamily {
    n: usize,
    m: usize,
    functions: Vec<HashFn>,
    /// `None` means uniform weights.
    weights: Option<Vec<f64>>,
}

impl HashFamily {
    /// The affine family over GF(2^n): all `(a, b)` pairs, uniform weights.
    ///
    /// `m = 0` is allowed and collapses every function to the constant map
    /// onto a single output symbol.
    pub fn affine(n: usize, m: usize) -> Result<Self> {
        gf2::check_width(n)?;
        if m > n {
            return Err(Error::OutputWidthTooLarge { n, m });
        }
        let q = 1u32 << n;
        let mut functions = Vec::with_capacity((q * q) as usize);
        for a in 0..q {
            for b in 0..q {
                functions.push(HashFn::Affine { a: a as u16, b: b as u16 });
            }
        }
        Ok(Self { n, m, functions, weights: None })
    }

    /// Arbitrary family from explicit tables, uniform weights.
    pub fn from_tables(n: usize, m: usize, tables: Vec<Vec<u16>>) -> Result<Self> {
        gf2::check_width(n)?;
        if m > n {
            return Err(Error::OutputWidthTooLarge { n, m });
        }
        let in_size = 1usize << n;
        let out_size = 1u16 << m;
        for t in &tables {
            if t.len() != in_size || t.iter().any(|&v| v >= out_size) {
                return Err(Error::Parse(format!(
                    "table must have {in_size} entries below {out_size}"
                )));
            }
        }
        Ok(Self { n, m, functions: tables.into_iter().map(HashFn::Table).collect(), weights: None })
    }

    /// The single identity function on n bits (not 2-universal).
    pub fn singleton_identity(n: usize) -> Result<Self> {
        let table: Vec<u16> = (0..1u16 << n).collect();
        Self::from_tables(n, n, vec![table])
    }

    /// All constant functions (not 2-universal for m >= 1).
    pub fn all_constants(n: usize, m: usize) -> Result<Self> {
        let tables = (0..1u16 << m).map(|c| vec![c; 1 << n]).collect();
        Self::from_tables(n, m, tables)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.functions.len() {
            return Err(Error::DimMismatch(format!(
                "{} weights for {} functions",
                weights.len(),
                self.functions.len()
            )));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::BadWeights(sum));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn input_bits(&self) -> usize {
        self.n
    }

    pub fn output_bits(&self) -> usize {
        self.m
    }

    pub fn input_size(&self) -> usize {
        1 << self.n
    }

    pub fn output_size(&self) -> usize {
        1 << self.m
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.is_none()
    }

    pub fn weight(&self, index: usize) -> f64 {
        match &self.weights {
            Some(w) => w[index],
            None => 1.0 / self.functions.len() as f64,
        }
    }

    /// Cumulative weights for inverse-CDF sampling; `None` when uniform.
    pub fn weights_cumulative(&self) -> Option<Vec<f64>> {
        self.weights.as_ref().map(|w| {
            let mut acc = 0.0;
            w.iter()
                .map(|&x| {
                    acc += x;
                    acc
                })
                .collect()
        })
    }

    /// Applies function `index` to input `x`.
    pub fn eval(&self, index: usize, x: u16) -> Result<u16> {
        let f = self
            .functions
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, len: self.functions.len() })?;
        let mask = (1u32 << self.m) as u16 - 1;
        Ok(match f {
            HashFn::Affine { a, b } => (gf_mul(*a, x, self.n) ^ b) & mask,
            HashFn::Table(t) => t[x as usize],
        })
    }

    /// Text serialization: header `n=<n> m=<m> poly=0x<hex>`, then one
    /// `a b` hex pair per affine function. Bit-exact across platforms.
    pub fn serialize(&self) -> Result<String> {
        if self.weights.is_some() {
            return Err(Error::Parse("only uniform-weight families serialize".into()));
        }
        let mut out = format!("n={} m={} poly={:#x}\n", self.n, self.m, gf2::IRREDUCIBLE[self.n]);
        for f in &self.functions {
            match f {
                HashFn::Affine { a, b } => out.push_str(&format!("{a:x} {b:x}\n")),
                HashFn::Table(_) => {
                    return Err(Error::Parse("table-backed functions do not serialize".into()))
                }
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty family file".into()))?;
        let mut n = None;
        let mut m = None;
        let mut poly = None;
        for field in header.split_whitespace() {
            let (key, value) =
                field.split_once('=').ok_or_else(|| Error::Parse(format!("bad field {field}")))?;
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "m" => m = Some(value.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "poly" => {
                    let v = value.trim_start_matches("0x");
                    poly =
                        Some(u32::from_str_radix(v, 16).map_err(|e| Error::Parse(e.to_string()))?)
                }
                other => return Err(Error::Parse(format!("unknown header key {other}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
        let m = m.ok_or_else(|| Error::Parse("missing m".into()))?;
        gf2::check_width(n)?;
        if m > n {
            return Err(Error::OutputWidthTooLarge { n, m });
        }
        if poly != Some(gf2::IRREDUCIBLE[n]) {
            return Err(Error::Parse(format!(
                "polynomial {poly:?} does not match the fixed choice {:#x} for n={n}",
                gf2::IRREDUCIBLE[n]
            )));
        }
        let q = 1u16 << n;
        let mut functions = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let a = it.next().ok_or_else(|| Error::Parse(format!("bad line {line}")))?;
            let b = it.next().ok_or_else(|| Error::Parse(format!("bad line {line}")))?;
            let a = u16::from_str_radix(a, 16).map_err(|e| Error::Parse(e.to_string()))?;
            let b = u16::from_str_radix(b, 16).map_err(|e| Error::Parse(e.to_string()))?;
            if a >= q || b >= q {
                return Err(Error::Parse(format!("coefficients {a:x},{b:x} exceed field size")));
            }
            functions.push(HashFn::Affine { a, b });
        }
        if functions.is_empty() {
            return Err(Error::Parse("family has no functions".into()));
        }
        Ok(Self { n, m, functions, weights: None })
    }
}

// ---------------------------------------------------------------------------
// 2-universality verification
// ---------------------------------------------------------------------------

/// Outcome of the exhaustive pairwise-uniformity check.
#[derive(Clone, Debug)]
pub struct UniversalityReport {
    pub ok: bool,
    /// `(a, a', c, c')` achieving the worst deviation, if any pair deviates.
    pub worst_pair: Option<(u16, u16, u16, u16)>,
    /// `max |Pr[h(a)=c, h(a')=c'] - 1/|C|^2|` over all pairs.
    pub worst_deviation: f64,
}

/// Checks `Pr[h(a)=c and h(a')=c'] = 1/|C|^2` for all `a != a'` and all
/// `(c, c')`. Uniform-weight families are checked with exact integer
/// counts; weighted families fall back to float accumulation with a 1e-12
/// gate.
pub fn verify_strong_2universal(fam: &HashFamily) -> UniversalityReport {
    let in_size = fam.input_size() as u16;
    let out_size = fam.output_size();
    let hcount = fam.len();

    // ordered input pairs a != a'
    let pairs: Vec<(u16, u16)> = (0..in_size)
        .flat_map(|a| (0..in_size).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();

    struct PairResult {
        ok: bool,
        deviation: f64,
        witness: (u16, u16, u16, u16),
    }

    let per_pair: Vec<PairResult> = exec::map_indexed(pairs.len(), |idx| {
        let (a, ap) = pairs[idx];
        let mut worst = (0.0f64, (a, ap, 0u16, 0u16));
        let mut ok = true;
        if fam.is_uniform() {
            let mut counts = vec![0u64; out_size * out_size];
            for h in 0..hcount {
                let c = fam.eval(h, a).expect("index in range");
                let cp = fam.eval(h, ap).expect("index in range");
                counts[c as usize * out_size + cp as usize] += 1;
            }
            let csq = (out_size * out_size) as u64;
            for c in 0..out_size {
                for cp in 0..out_size {
                    let count = counts[c * out_size + cp];
                    if count * csq != hcount as u64 {
                        ok = false;
                    }
                    let dev =
                        (count as f64 / hcount as f64 - 1.0 / csq as f64).abs();
                    if dev > worst.0 {
                        worst = (dev, (a, ap, c as u16, cp as u16));
                    }
                }
            }
        } else {
            let mut mass = vec![0.0f64; out_size * out_size];
            for h in 0..hcount {
                let c = fam.eval(h, a).expect("index in range");
                let cp = fam.eval(h, ap).expect("index in range");
                mass[c as usize * out_size + cp as usize] += fam.weight(h);
            }
            let target = 1.0 / (out_size * out_size) as f64;
            for c in 0..out_size {
                for cp in 0..out_size {
                    let dev = (mass[c * out_size + cp] - target).abs();
                    if dev > 1e-12 {
                        ok = false;
                    }
                    if dev > worst.0 {
                        worst = (dev, (a, ap, c as u16, cp as u16));
                    }
                }
            }
        }
        PairResult { ok, deviation: worst.0, witness: worst.1 }
    });

    let mut report = UniversalityReport { ok: true, worst_pair: None, worst_deviation: 0.0 };
    for r in per_pair {
        if !r.ok {
            report.ok = false;
        }
        if r.deviation > report.worst_deviation {
            report.worst_deviation = r.deviation;
            report.worst_pair = Some(r.witness);
        }
    }
    report
}

// ---------------------------------------------------------------------------
// CQ operators and states
// ---------------------------------------------------------------------------

/// Block-diagonal bipartite operator `sum_a |a><a| (x) X_E(a)`, with
/// arbitrary blocks.
#[derive(Clone, Debug)]
pub struct CqOperator {
    dim_e: usize,
    blocks: Vec<CMatrix>,
}

impl CqOperator {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimMismatch("a CQ operator needs at least one block".into()));
        }
        let dim_e = blocks[0].nrows();
        for b in &blocks {
            if b.nrows() != dim_e || b.ncols() != dim_e {
                return Err(Error::DimMismatch("all blocks must be square of equal size".into()));
            }
        }
        Ok(Self { dim_e, blocks })
    }

    pub fn num_symbols(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Sum of all blocks = marginal on E (as an operator).
    pub fn e_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim_e, self.dim_e);
        for b in &self.blocks {
            acc += b;
        }
        acc
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Hilbert-Schmidt norm; equals the 2-norm of the embedding.
    pub fn two_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// Dense block-diagonal embedding on A (x) E.
    pub fn embed(&self) -> CMatrix {
        let na = self.blocks.len();
        let d = self.dim_e;
        let mut out = CMatrix::zeros(na * d, na * d);
        for (a, block) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out[(a * d + i, a * d + j)] = block[(i, j)];
                }
            }
        }
        out
    }

    /// Pushes the operator through hash function `index`: output block
    /// `c` collects all input blocks with `h(a) = c`.
    pub fn apply_hash(&self, fam: &HashFamily, index: usize) -> Result<CqOperator> {
        if fam.input_size() != self.blocks.len() {
            return Err(Error::DimMismatch(format!(
                "family acts on {} symbols, operator has {}",
                fam.input_size(),
                self.blocks.len()
            )));
        }
        let mut out = vec![CMatrix::zeros(self.dim_e, self.dim_e); fam.output_size()];
        for (a, block) in self.blocks.iter().enumerate() {
            let c = fam.eval(index, a as u16)?;
            out[c as usize] += block;
        }
        Ok(CqOperator { dim_e: self.dim_e, blocks: out })
    }

    /// 2-norm of `(R^h - U)(eta)`, blockwise.
    pub fn hash_deviation_two_norm(&self, fam: &HashFamily, index: usize) -> Result<f64> {
        let pushed = self.apply_hash(fam, index)?;
        let uniform = self.e_sum().scale(1.0 / fam.output_size() as f64);
        let mut acc = 0.0;
        for block in &pushed.blocks {
            acc += (block - &uniform).norm_squared();
        }
        Ok(acc.sqrt())
    }
}

/// CQ state: PSD blocks `p(a) rho_E(a)` with total trace 1.
#[derive(Clone, Debug)]
pub struct CqState {
    op: CqOperator,
}

impl CqState {
    /// Validates positivity of each block and overall normalization.
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let op = CqOperator::new(blocks)?;
        for b in &op.blocks {
            let eigs = crate::qops::herm_eigenvalues(b)?;
            let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -crate::qops::PSD_TOL {
                return Err(Error::NotPsd(min));
            }
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self { op })
    }

    /// Random CQ state: Dirichlet-uniform pmf with full-rank random blocks.
    pub fn random(num_symbols: usize, dim_e: usize, rng: &mut SeededRng) -> Self {
        let pmf = random_pmf(num_symbols, rng);
        let blocks = pmf
            .iter()
            .map(|&p| {
                let rho = random_density(dim_e, dim_e, rng).expect("full rank is valid");
                rho.mat().scale(p)
            })
            .collect();
        Self { op: CqOperator { dim_e, blocks } }
    }

    /// Point mass on symbol `a0` with conditional state `rho_e`.
    pub fn deterministic(a0: usize, num_symbols: usize, rho_e: &DensityOperator) -> Result<Self> {
        if a0 >= num_symbols {
            return Err(Error::IndexOutOfRange { index: a0, len: num_symbols });
        }
        let d = rho_e.dim();
        let mut blocks = vec![CMatrix::zeros(d, d); num_symbols];
        blocks[a0] = rho_e.mat().clone();
        Ok(Self { op: CqOperator { dim_e: d, blocks } })
    }

    /// Uniform pmf with the same conditional state for every symbol.
    pub fn uniform_with(num_symbols: usize, rho_e: &DensityOperator) -> Self {
        let block = rho_e.mat().scale(1.0 / num_symbols as f64);
        Self { op: CqOperator { dim_e: rho_e.dim(), blocks: vec![block; num_symbols] } }
    }

    pub fn op(&self) -> &CqOperator {
        &self.op
    }

    pub fn num_symbols(&self) -> usize {
        self.op.num_symbols()
    }

    pub fn dim_e(&self) -> usize {
        self.op.dim_e()
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.op.blocks.iter().map(|b| b.trace().re).collect()
    }

    /// E marginal `rho_E = sum_a p(a) rho_E(a)`.
    pub fn e_marginal(&self) -> DensityOperator {
        DensityOperator::new_unchecked(self.op.e_sum(), vec![self.dim_e()])
    }

    /// Dense embedding with dims `[|A|, |E|]`.
    pub fn embed(&self) -> DensityOperator {
        DensityOperator::new_unchecked(
            self.op.embed(),
            vec![self.num_symbols(), self.dim_e()],
        )
    }
}

/// Applies hash channel `R^h` to a CQ state; trace preserved, E marginal
/// unchanged.
pub fn hash_channel_apply(fam: &HashFamily, index: usize, state: &CqState) -> Result<CqState> {
    Ok(CqState { op: state.op.apply_hash(fam, index)? })
}

/// Uniform pmf draw (Dirichlet(1,..,1)) via normalized exponentials.
pub fn random_pmf(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / sum).collect()
}

/// Random CQ test operator for the randomizing-family definition, which
/// quantifies over operators rather than states.
pub enum CqDraw {
    State,
    NormalBlocks,
    GeneralBlocks,
}

pub fn random_cq_operator(
    num_symbols: usize,
    dim_e: usize,
    kind: CqDraw,
    rng: &mut SeededRng,
) -> CqOperator {
    let blocks: Vec<CMatrix> = match kind {
        CqDraw::State => return CqState::random(num_symbols, dim_e, rng).op,
        CqDraw::NormalBlocks => (0..num_symbols).map(|_| random_normal(dim_e, rng)).collect(),
        CqDraw::GeneralBlocks => (0..num_symbols).map(|_| ginibre(dim_e, dim_e, rng)).collect(),
    };
    CqOperator { dim_e, blocks }
}

// ---------------------------------------------------------------------------
// Contraction estimates
// ---------------------------------------------------------------------------

/// Largest family size for which expectations are enumerated exactly.
pub const EXACT_ENUMERATION_LIMIT: usize = 1 << 16;

/// `E_h || (R^h - U)(eta) ||_2` with the expectation taken exactly over an
/// enumerable family, otherwise by uniform subsampling.
pub fn expected_deviation_two_norm(
    fam: &HashFamily,
    eta: &CqOperator,
    rng: &mut SeededRng,
) -> Result<(f64, f64)> {
    eta.hash_deviation_two_norm(fam, 0)?; // surface dimension errors before the map
    if fam.len() <= EXACT_ENUMERATION_LIMIT {
        let terms: Vec<f64> = exec::map_indexed(fam.len(), |h| {
            fam.weight(h) * eta.hash_deviation_two_norm(fam, h).expect("dims checked")
        });
        Ok((exec::compensated_sum(&terms), 0.0))
    } else {
        let samples = EXACT_ENUMERATION_LIMIT;
        let picks: Vec<usize> =
            (0..samples).map(|_| rng.gen_range(0..fam.len())).collect();
        let values: Vec<f64> = exec::map_indexed(samples, |i| {
            eta.hash_deviation_two_norm(fam, picks[i]).expect("dims checked")
        });
        let (mean, stderr) = exec::mean_stderr(&values);
        Ok((mean, stderr))
    }
}

/// Report of the empirical contraction factor over random CQ operators.
#[derive(Clone, Debug)]
pub struct LambdaCqReport {
    pub max_ratio: f64,
    /// Standard error attached to the maximal ratio (0 for exact enumeration).
    pub stderr_at_max: f64,
    pub ratios: Vec<f64>,
}

/// Estimates the contraction factor `E_h ||(R^h - U)(eta)||_2 / ||eta||_2`
/// over `trials` random CQ operators with side information of dimension
/// `dim_e` (states, normal blocks and general blocks in rotation).
pub fn empirical_lambda_cq(
    fam: &HashFamily,
    dim_e: usize,
    trials: usize,
    rng: &SeededRng,
) -> Result<LambdaCqReport> {
    if trials == 0 || dim_e == 0 {
        return Err(Error::InvalidParameter("trials and dim_e must be >= 1".into()));
    }
    let n_sym = fam.input_size();
    let results: Vec<(f64, f64)> = exec::map_indexed(trials, |i| {
        let mut sub = rng.fold_in(i as u64);
        let kind = match i % 3 {
            0 => CqDraw::State,
            1 => CqDraw::NormalBlocks,
            _ => CqDraw::GeneralBlocks,
        };
        let eta = random_cq_operator(n_sym, dim_e, kind, &mut sub);
        let norm = eta.two_norm();
        let (mean, stderr) =
            expected_deviation_two_norm(fam, &eta, &mut sub).expect("dims match by construction");
        (mean / norm, stderr / norm)
    });
    let mut max_ratio = f64::NEG_INFINITY;
    let mut stderr_at_max = 0.0;
    for &(r, s) in &results {
        if r > max_ratio {
            max_ratio = r;
            stderr_at_max = s;
        }
    }
    Ok(LambdaCqReport {
        max_ratio,
        stderr_at_max,
        ratios: results.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Exact second-moment comparison for the contraction lemma.
#[derive(Clone, Debug)]
pub struct SecondMoment {
    /// `E_h tr[R^h(rho) R^h(rho)']`, enumerated exactly.
    pub expected: f64,
    /// Upper bound `||rho||_2^2 + tr[rho_E rho_E'] / |C|`.
    pub bound: f64,
    /// Value predicted when all distinct-pair collision probabilities are
    /// exactly `1/|C|`: `(1 - 1/|C|) ||rho||_2^2 + tr[rho_E rho_E'] / |C|`.
    pub two_universal_prediction: f64,
}

pub fn second_moment(fam: &HashFamily, eta: &CqOperator) -> Result<SecondMoment> {
    if fam.len() > EXACT_ENUMERATION_LIMIT {
        return Err(Error::FamilyTooLarge(fam.len()));
    }
    eta.apply_hash(fam, 0)?; // dimension gate
    let terms: Vec<f64> = exec::map_indexed(fam.len(), |h| {
        let pushed = eta.apply_hash(fam, h).expect("dims checked");
        fam.weight(h) * pushed.blocks.iter().map(|b| b.norm_squared()).sum::<f64>()
    });
    let expected = exec::compensated_sum(&terms);
    let sq = eta.two_norm().powi(2);
    let esum = eta.e_sum();
    let e_term = esum.norm_squared() / fam.output_size() as f64;
    Ok(SecondMoment {
        expected,
        bound: sq + e_term,
        two_universal_prediction: (1.0 - 1.0 / fam.output_size() as f64) * sq + e_term,
    })
}

// ---------------------------------------------------------------------------
