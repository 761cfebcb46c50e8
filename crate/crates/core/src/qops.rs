//! Dense complex linear-algebra substrate.
//!
//! Everything downstream works with [`CMatrix`] (a dense `nalgebra` matrix of
//! `Complex<f64>`): tensor products, partial traces, Hermitian
//! eigendecomposition, fractional operator powers on the support, Schatten
//! norms, Haar unitaries and random test states. All functions are pure;
//! randomness always flows through an explicit [`SeededRng`].

use nalgebra::{Complex, DMatrix};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues below `SUPPORT_CUTOFF_REL * lambda_max` count as zero, so
/// negative powers stay finite and reproducible.
pub const SUPPORT_CUTOFF_REL: f64 = 1e-12;
/// Hermiticity drift allowed before an input is rejected outright.
pub const HERM_TOL: f64 = 1e-10;
/// Most-negative eigenvalue tolerated in a nominally PSD operator.
pub const PSD_TOL: f64 = 1e-10;
/// Trace deviation tolerated in a density operator.
pub const TRACE_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

/// Stream-splittable deterministic RNG.
///
/// Identical `(seed, stream)` pairs yield identical draw sequences across
/// runs and platforms. [`SeededRng::fold_in`] derives an independent child
/// stream from an index, which is how per-trial streams are keyed in
/// parallel loops.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives a child generator whose stream is keyed by `data`.
    ///
    /// The child starts at the beginning of its own stream, independent of
    /// how much of this generator has been consumed.
    pub fn fold_in(&self, data: u64) -> SeededRng {
        let stream = mix64(
            self.stream
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(data)
                .wrapping_add(1),
        );
        SeededRng::with_stream(self.seed, stream)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

// ---------------------------------------------------------------------------
// Basic operations
// ---------------------------------------------------------------------------

/// Kronecker product with row-major pair indexing:
/// `(X (x) Y)[(i,k),(j,l)] = X[i,j] * Y[k,l]`.
pub fn tensor(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.kronecker(y)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest `|X[i,j] - conj(X[j,i])|` entry; zero for exactly Hermitian input.
pub fn herm_drift(x: &CMatrix) -> f64 {
    let adj = x.adjoint();
    (x - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Symmetrizes `(X + X')/2` when the drift is within [`HERM_TOL`], else rejects.
pub fn hermitize(x: &CMatrix) -> Result<CMatrix> {
    let drift = herm_drift(x);
    if drift > HERM_TOL {
        return Err(Error::NotHermitian(drift));
    }
    Ok((x + x.adjoint()).scale(0.5))
}

/// Real eigenvalues and eigenvectors of a Hermitian matrix.
pub struct HermEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl HermEigen {
    /// Reassembles `V diag(f(lambda)) V'`.
    pub fn map_rebuild(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            if flam != 0.0 {
                let v = self.vectors.column(k);
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] += v[i] * v[j].conj() * C64::new(flam, 0.0);
                    }
                }
            }
        }
        out
    }
}

/// Hermitian eigendecomposition with the symmetrization gate of [`hermitize`].
pub fn herm_eigen(x: &CMatrix) -> Result<HermEigen> {
    let h = hermitize(x)?;
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    Ok(HermEigen {
        values: eig.eigenvalues.iter().copied().collect(),
        vectors: eig.eigenvectors,
    })
}

/// Eigenvalues only, unsorted.
pub fn herm_eigenvalues(x: &CMatrix) -> Result<Vec<f64>> {
    let h = hermitize(x)?;
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Fractional power of a PSD matrix, acting on the support only.
///
/// Eigenvalues below the support cutoff map to zero for every exponent,
/// including negative ones. Eigenvalues more negative than the PSD tolerance
/// reject the input.
pub fn herm_power(x: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = herm_eigen(x)?;
    let lam_max = eig.values.iter().copied().fold(0.0, f64::max);
    let psd_floor = -PSD_TOL * lam_max.max(1.0);
    if let Some(&bad) = eig.values.iter().find(|&&l| l < psd_floor) {
        return Err(Error::NotPsd(bad));
    }
    let cutoff = SUPPORT_CUTOFF_REL * lam_max;
    Ok(eig.map_rebuild(|l| if l < cutoff || l <= 0.0 { 0.0 } else { l.powf(t) }))
}

/// Projector onto the support of a PSD matrix (same cutoff as [`herm_power`]).
pub fn support_projector(x: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eigen(x)?;
    let lam_max = eig.values.iter().copied().fold(0.0, f64::max);
    let cutoff = SUPPORT_CUTOFF_REL * lam_max;
    Ok(eig.map_rebuild(|l| if l < cutoff || l <= 0.0 { 0.0 } else { 1.0 }))
}

/// Schatten p-norm via singular values; `p = f64::INFINITY` gives the
/// operator norm. Rejects `p < 1`.
pub fn schatten_norm(x: &CMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p == 2.0 {
        // Frobenius shortcut; identical to the singular-value sum.
        return Ok(x.norm());
    }
    let sv = x.clone().singular_values();
    if p.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    let sum: f64 = sv.iter().map(|s| s.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Trace norm, `schatten_norm(x, 1)`.
pub fn trace_norm(x: &CMatrix) -> f64 {
    schatten_norm(x, 1.0).expect("p = 1 is always valid")
}

/// Operator norm, `schatten_norm(x, inf)`.
pub fn op_norm(x: &CMatrix) -> f64 {
    schatten_norm(x, f64::INFINITY).expect("p = inf is always valid")
}

// ---------------------------------------------------------------------------
// Partial trace
// ---------------------------------------------------------------------------

fn composite_index(dims: &[usize], digits: &[usize]) -> usize {
    let mut idx = 0;
    for (d, &dig) in dims.iter().zip(digits) {
        idx = idx * d + dig;
    }
    idx
}

fn enumerate_digits(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    let mut all = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        all.push(digits.clone());
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    all
}

/// Partial trace over the subsystems *not* listed in `keep`.
///
/// `dims` lists subsystem dimensions in row-major composite order; `keep`
/// must be strictly increasing subsystem positions. The output orders kept
/// subsystems as in the input.
pub fn partial_trace(x: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if x.nrows() != total || x.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "matrix is {}x{} but dims {:?} give {}",
            x.nrows(),
            x.ncols(),
            dims,
            total
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimMismatch(format!(
            "keep positions {:?} invalid for {} subsystems",
            keep,
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = keep_dims.iter().product::<usize>().max(1);

    let kept_tuples = enumerate_digits(&keep_dims);
    let traced_tuples = enumerate_digits(&traced_dims);

    let mut full = vec![0usize; dims.len()];
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for (oi, ki) in kept_tuples.iter().enumerate() {
        for (oj, kj) in kept_tuples.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for t in &traced_tuples {
                for (pos, &k) in keep.iter().enumerate() {
                    full[k] = ki[pos];
                }
                for (pos, &tr) in traced.iter().enumerate() {
                    full[tr] = t[pos];
                }
                let row = composite_index(dims, &full);
                for (pos, &k) in keep.iter().enumerate() {
                    full[k] = kj[pos];
                }
                let col = composite_index(dims, &full);
                acc += x[(row, col)];
            }
            out[(oi, oj)] = acc;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Random matrices
// ---------------------------------------------------------------------------

/// Complex Ginibre matrix: entries `(N(0,1) + i N(0,1)) / sqrt(2)`.
pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase
/// normalization of the R diagonal.
pub fn haar_unitary(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let mag = rjj.norm();
        let phase = if mag > 0.0 { rjj / mag } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Random normal matrix `V diag(r_k e^{i phi_k}) V'` with a Haar basis,
/// nonnegative moduli and uniform phases. The unitary and PSD polar factors
/// commute by construction.
pub fn random_normal(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let v = haar_unitary(dim, rng);
    let diag: Vec<C64> = (0..dim)
        .map(|_| {
            let r: f64 = rng.gen::<f64>() * 2.0;
            let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            C64::new(r * phi.cos(), r * phi.sin())
        })
        .collect();
    let mut out = CMatrix::zeros(dim, dim);
    for (k, lam) in diag.iter().enumerate() {
        let col = v.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += col[i] * col[j].conj() * lam;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Density operators
// ---------------------------------------------------------------------------

/// Positive semidefinite unit-trace operator with declared subsystem splits.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if mat.nrows() != mat.ncols() || mat.nrows() != total {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{} but dims {:?} give {}",
                mat.nrows(),
                mat.ncols(),
                dims,
                total
            )));
        }
        let drift = herm_drift(&mat);
        if drift > HERM_TOL {
            return Err(Error::NotHermitian(drift));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let eigs = herm_eigenvalues(&mat)?;
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { mat, dims })
    }

    /// Skips validation; for internal construction of operators that are
    /// PSD and normalized by construction.
    pub fn new_unchecked(mat: CMatrix, dims: Vec<usize>) -> Self {
        Self { mat, dims }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Re-declares the subsystem split without touching the matrix.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.mat.nrows() {
            return Err(Error::DimMismatch(format!(
                "dims {:?} do not multiply to {}",
                dims,
                self.mat.nrows()
            )));
        }
        Ok(Self { mat: self.mat, dims })
    }

    /// Marginal on the kept subsystems.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let mat = partial_trace(&self.mat, &self.dims, keep)?;
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityOperator { mat, dims })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        let mat = identity(total).scale(1.0 / total as f64);
        Self { mat, dims }
    }

    /// Maximally entangled state on two `d`-dimensional subsystems.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut mat = CMatrix::zeros(d * d, d * d);
        let c = C64::new(1.0 / d as f64, 0.0);
        for i in 0..d {
            for j in 0..d {
                mat[(i * d + i, j * d + j)] = c;
            }
        }
        Self { mat, dims: vec![d, d] }
    }

    /// Convex mixture with the maximally mixed state; keeps tests away from
    /// support boundaries.
    pub fn regularized(&self, eps: f64) -> DensityOperator {
        let d = self.dim() as f64;
        let mat = self.mat.scale(1.0 - eps) + identity(self.dim()).scale(eps / d);
        DensityOperator { mat, dims: self.dims.clone() }
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Random rank-`rank` density operator from a Ginibre factor `G G' / tr`.
pub fn random_density(dim: usize, rank: usize, rng: &mut SeededRng) -> Result<DensityOperator> {
    if rank < 1 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let g = ginibre(dim, rank, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    Ok(DensityOperator::new_unchecked(gg.scale(1.0 / tr), vec![dim]))
}

// ---------------------------------------------------------------------------
