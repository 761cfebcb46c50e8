//! Fully quantum randomizing families: Haar-unitary conjugation followed
//! by a partial trace, compared against the perfectly randomizing channel.

use crate::error::{Error, Result};
use crate::exec;
use crate::qops::{
    haar_unitary, identity, partial_trace, random_density, random_hermitian, random_normal,
    tensor, CMatrix, SeededRng,
};

/// The perfectly randomizing channel `theta -> tr[theta] 1_C / |C|`.
#[derive(Clone, Copy, Debug)]
pub struct PerfectRandomizer {
    dim_c: usize,
}

impl PerfectRandomizer {
    pub fn new(dim_c: usize) -> Result<Self> {
        if dim_c == 0 {
            return Err(Error::InvalidParameter("output dimension must be >= 1".into()));
        }
        Ok(Self { dim_c })
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn apply(&self, theta: &CMatrix) -> CMatrix {
        let tr = theta.trace();
        identity(self.dim_c).map(|c| c * tr / self.dim_c as f64)
    }
}

#[derive(Clone, Debug)]
enum EnsembleKind {
    Haar,
    Explicit(Vec<CMatrix>),
}

/// Family of channels `rho -> tr_D[(U (x) 1_E) rho (U (x) 1_E)']` with
/// `U` on `A = C (x) D`, plus the perfectly randomizing reference.
#[derive(Clone, Debug)]
pub struct ChannelEnsemble {
    dim_c: usize,
    dim_d: usize,
    kind: EnsembleKind,
}

impl ChannelEnsemble {
    /// Haar-sampled unitaries on `A = C (x) D`.
    pub fn haar(dim_c: usize, dim_d: usize) -> Result<Self> {
        if dim_c == 0 || dim_d == 0 {
            return Err(Error::InvalidParameter("subsystem dimensions must be >= 1".into()));
        }
        Ok(Self { dim_c, dim_d, kind: EnsembleKind::Haar })
    }

    /// Finite list of unitaries, sampled uniformly.
    pub fn explicit(dim_c: usize, dim_d: usize, unitaries: Vec<CMatrix>) -> Result<Self> {
        if dim_c == 0 || dim_d == 0 || unitaries.is_empty() {
            return Err(Error::InvalidParameter("need dimensions >= 1 and at least one unitary".into()));
        }
        let da = dim_c * dim_d;
        for u in &unitaries {
            if u.nrows() != da || u.ncols() != da {
                return Err(Error::DimMismatch(format!(
                    "unitary is {}x{}, expected {}x{}",
                    u.nrows(),
                    u.ncols(),
                    da,
                    da
                )));
            }
            let dev = (u.adjoint() * u - identity(da)).norm();
            if dev > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "matrix deviates from unitarity by {dev:.3e}"
                )));
            }
        }
        Ok(Self { dim_c, dim_d, kind: EnsembleKind::Explicit(unitaries) })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_c * self.dim_d
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn reference_channel(&self) -> PerfectRandomizer {
        PerfectRandomizer { dim_c: self.dim_c }
    }

    pub fn sample_unitary(&self, rng: &mut SeededRng) -> CMatrix {
        match &self.kind {
            EnsembleKind::Haar => haar_unitary(self.dim_a(), rng),
            EnsembleKind::Explicit(us) => {
                let i = rand::Rng::gen_range(rng, 0..us.len());
                us[i].clone()
            }
        }
    }

    fn check_input(&self, rho_ae: &CMatrix, dim_e: usize) -> Result<()> {
        let want = self.dim_a() * dim_e;
        if rho_ae.nrows() != want || rho_ae.ncols() != want {
            return Err(Error::DimMismatch(format!(
                "input is {}x{}, expected {}x{}",
                rho_ae.nrows(),
                rho_ae.ncols(),
                want,
                want
            )));
        }
        Ok(())
    }

    /// Applies the channel with a fixed unitary: conjugate on A, trace out D.
    pub fn apply_with(&self, u: &CMatrix, rho_ae: &CMatrix, dim_e: usize) -> Result<CMatrix> {
        self.check_input(rho_ae, dim_e)?;
        let wide = if dim_e == 1 { u.clone() } else { tensor(u, &identity(dim_e)) };
        let conj = &wide * rho_ae * wide.adjoint();
        if dim_e == 1 {
            partial_trace(&conj, &[self.dim_c, self.dim_d], &[0])
        } else {
            partial_trace(&conj, &[self.dim_c, self.dim_d, dim_e], &[0, 2])
        }
    }

    /// `1_C/|C| (x) rho_E`, the image under the perfectly randomizing channel.
    pub fn reference(&self, rho_ae: &CMatrix, dim_e: usize) -> Result<CMatrix> {
        self.check_input(rho_ae, dim_e)?;
        if dim_e == 1 {
            return Ok(self.reference_channel().apply(rho_ae));
        }
        let rho_e = partial_trace(rho_ae, &[self.dim_a(), dim_e], &[1])?;
        Ok(tensor(&identity(self.dim_c).scale(1.0 / self.dim_c as f64), &rho_e))
    }
}

/// One-sample `||(R^h - U)(eta)||_2` with a freshly drawn unitary.
pub fn deviation_two_norm_sample(
    ens: &ChannelEnsemble,
    eta_ae: &CMatrix,
    dim_e: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    let u = ens.sample_unitary(rng);
    let pushed = ens.apply_with(&u, eta_ae, dim_e)?;
    let reference = ens.reference(eta_ae, dim_e)?;
    Ok((pushed - reference).norm())
}

/// One-sample `||(R^h - U)(rho)||_1` with a freshly drawn unitary.
pub fn deviation_trace_norm_sample(
    ens: &ChannelEnsemble,
    rho_ae: &CMatrix,
    dim_e: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    let u = ens.sample_unitary(rng);
    let pushed = ens.apply_with(&u, rho_ae, dim_e)?;
    let reference = ens.reference(rho_ae, dim_e)?;
    Ok(crate::qops::trace_norm(&(pushed - reference)))
}

/// Per-trial estimate of the contraction ratio.
#[derive(Clone, Debug)]
pub struct LambdaTrial {
    pub ratio: f64,
    pub stderr: f64,
}

/// Monte Carlo contraction report over random test operators.
#[derive(Clone, Debug)]
pub struct LambdaQReport {
    pub max_ratio: f64,
    pub stderr_at_max: f64,
    pub trials: Vec<LambdaTrial>,
}

/// Estimates `max_eta E_h ||(R^h - U)(eta)||_2 / ||eta||_2` with `trials`
/// random operators (states, Hermitian and normal draws in rotation) and
/// `samples` unitaries per operator.
pub fn empirical_lambda_q(
    ens: &ChannelEnsemble,
    dim_e: usize,
    trials: usize,
    samples: usize,
    rng: &SeededRng,
) -> Result<LambdaQReport> {
    if trials == 0 || samples == 0 {
        return Err(Error::InvalidParameter("trials and samples must be >= 1".into()));
    }
    let da = ens.dim_a();
    let results: Vec<LambdaTrial> = exec::map_indexed(trials, |t| {
        let mut trial_rng = rng.fold_in(t as u64);
        let dim = da * dim_e;
        let eta = match t % 3 {
            0 => random_density(dim, dim, &mut trial_rng)
                .expect("full rank is valid")
                .mat()
                .clone(),
            1 => random_hermitian(dim, &mut trial_rng),
            _ => random_normal(dim, &mut trial_rng),
        };
        let norm = eta.norm();
        let values: Vec<f64> = exec::map_indexed_seq(samples, |s| {
            let mut srng = trial_rng.fold_in(s as u64);
            deviation_two_norm_sample(ens, &eta, dim_e, &mut srng)
                .expect("dims match by construction")
        });
        let (mean, stderr) = exec::mean_stderr(&values);
        LambdaTrial { ratio: mean / norm, stderr: stderr / norm }
    });
    let mut max_ratio = f64::NEG_INFINITY;
    let mut stderr_at_max = 0.0;
    for t in &results {
        if t.ratio > max_ratio {
            max_ratio = t.ratio;
            stderr_at_max = t.stderr;
        }
    }
    Ok(LambdaQReport { max_ratio, stderr_at_max, trials: results })
}
