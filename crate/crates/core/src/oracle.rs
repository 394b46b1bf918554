//! Monte Carlo ground truth.
//!
//! Sample `i` always draws from `substream(seed, i)`. Samples are split into
//! `parallel_streams` contiguous chunks, each summed sequentially with Kahan
//! compensation, and chunk sums are combined in chunk order. Results are
//! therefore bit-for-bit reproducible for a given `(seed, n_samples,
//! parallel_streams)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_spectrum, substream, EnsembleSpec};
use crate::formfactors::{average_form_factors, empirical_form_factors};
use crate::linalg::{evolution_diag, kron_all};
use crate::permgroup::MAX_DENSE_DIM;
use crate::{CMatrix, Complex64, Error, Result};

/// Largest dimension accepted by the Haar sampler.
pub const MAX_HAAR_DIM: usize = 64;

/// Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub d: usize,
    pub parallel_streams: usize,
}

impl McConfig {
    pub fn new(d: usize, n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, d, parallel_streams: 16 }
    }

    fn chunks(&self) -> Vec<std::ops::Range<usize>> {
        let p = self.parallel_streams.max(1).min(self.n_samples.max(1));
        (0..p).map(|c| (c * self.n_samples / p)..((c + 1) * self.n_samples / p)).collect()
    }
}

/// Kahan-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Kahan) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Entrywise Kahan sums of `x` and `|x|²` over complex matrices.
#[derive(Clone, Debug)]
struct MatrixMoments {
    re: Vec<Kahan>,
    im: Vec<Kahan>,
    sq: Vec<Kahan>,
}

impl MatrixMoments {
    fn new(len: usize) -> Self {
        Self { re: vec![Kahan::default(); len], im: vec![Kahan::default(); len], sq: vec![Kahan::default(); len] }
    }

    fn add(&mut self, m: &CMatrix) {
        for (i, z) in m.iter().enumerate() {
            self.re[i].add(z.re);
            self.im[i].add(z.im);
            self.sq[i].add(z.norm_sqr());
        }
    }

    fn merge(&mut self, o: &MatrixMoments) {
        for i in 0..self.re.len() {
            self.re[i].merge(&o.re[i]);
            self.im[i].merge(&o.im[i]);
            self.sq[i].merge(&o.sq[i]);
        }
    }
}

/// Entrywise mean and standard error of a matrix-valued estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct McMatrix {
    pub mean: CMatrix,
    pub se: nalgebra::DMatrix<f64>,
    pub n_samples: usize,
}

impl McMatrix {
    /// Largest `|mean − reference| / max(se, floor)` over entries.
    pub fn max_z(&self, reference: &CMatrix, floor: f64) -> f64 {
        self.mean
            .iter()
            .zip(reference.iter())
            .zip(self.se.iter())
            .map(|((a, b), s)| (a - b).norm() / s.max(floor))
            .fold(0.0, f64::max)
    }
}

/// Haar unitary from the QR decomposition of a complex Ginibre matrix, with
/// the phases of `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 || d > MAX_HAAR_DIM {
        return Err(Error::InvalidArgument(format!("haar dimension {d} outside 1..={MAX_HAAR_DIM}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

fn tensor_power(v: &CMatrix, k: usize) -> CMatrix {
    let vd = v.adjoint();
    let mut ops = vec![v.clone(); k];
    ops.extend(std::iter::repeat_n(vd, k));
    kron_all(&ops)
}

/// Haar average of `(G†UG)^{⊗k} ⊗ (G†U†G)^{⊗k}` with entrywise standard errors.
pub fn mc_isospectral_twirl(u: &CMatrix, k: usize, cfg: &McConfig) -> Result<McMatrix> {
    let d = u.nrows();
    if !u.is_square() {
        return Err(Error::Shape("U must be square".into()));
    }
    let dim = d.checked_pow(2 * k as u32).unwrap_or(usize::MAX);
    if dim > MAX_DENSE_DIM {
        return Err(Error::SizeGuard(dim, MAX_DENSE_DIM));
    }
    if cfg.n_samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let partials: Vec<Result<MatrixMoments>> = cfg
        .chunks()
        .into_par_iter()
        .map(|range| {
            let mut acc = MatrixMoments::new(dim * dim);
            for i in range {
                let mut rng = substream(cfg.seed, i as u64);
                let g = sample_haar_unitary(d, &mut rng)?;
                let v = g.adjoint() * u * &g;
                acc.add(&tensor_power(&v, k));
            }
            Ok(acc)
        })
        .collect();
    let mut total = MatrixMoments::new(dim * dim);
    for p in partials {
        total.merge(&p?);
    }
    let n = cfg.n_samples as f64;
    let mut mean = CMatrix::zeros(dim, dim);
    let mut se = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim * dim {
        let m = Complex64::new(total.re[i].value() / n, total.im[i].value() / n);
        let var = (total.sq[i].value() / n - m.norm_sqr()).max(0.0) * n / (n - 1.0);
        mean[i] = m;
        se[i] = (var / n).sqrt();
    }
    Ok(McMatrix { mean, se, n_samples: cfg.n_samples })
}

/// Mean with jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

/// Jackknife estimate of a sample mean.
pub fn jackknife_mean(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n < 2 {
        return Estimate { mean: xs.first().copied().unwrap_or(f64::NAN), se: f64::NAN };
    }
    let mut total = Kahan::default();
    xs.iter().for_each(|&x| total.add(x));
    let s = total.value();
    let nf = n as f64;
    let loo: Vec<f64> = xs.iter().map(|&x| (s - x) / (nf - 1.0)).collect();
    let mut lm = Kahan::default();
    loo.iter().for_each(|&x| lm.add(x));
    let lbar = lm.value() / nf;
    let mut v = Kahan::default();
    loo.iter().for_each(|&x| v.add((x - lbar) * (x - lbar)));
    Estimate { mean: s / nf, se: ((nf - 1.0) / nf * v.value()).sqrt() }
}

/// Ensemble means of `(c₂, Re c₃, c₄)` on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McFormFactors {
    pub t: Vec<f64>,
    pub c2: Vec<Estimate>,
    pub c3: Vec<Estimate>,
    pub c4: Vec<Estimate>,
    pub n_samples: usize,
}

fn sample_many<T: Send>(cfg: &McConfig, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let parts: Vec<Result<Vec<T>>> =
        cfg.chunks().into_par_iter().map(|range| range.map(&f).collect()).collect();
    let mut out = Vec::with_capacity(cfg.n_samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Samples `cfg.n_samples` spectra and averages their form factors.
pub fn mc_ensemble_c(spec: EnsembleSpec, grid: &[f64], cfg: &McConfig) -> Result<McFormFactors> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite time".into()));
    }
    let rows = sample_many(cfg, |i| {
        let mut rng = substream(cfg.seed, i as u64);
        let sp = sample_spectrum(spec, &mut rng)?;
        grid.iter()
            .map(|&t| empirical_form_factors(&sp, t).map(|f| (f.c2, f.c3.re, f.c4)))
            .collect::<Result<Vec<_>>>()
    })?;
    let col = |j: usize, sel: fn(&(f64, f64, f64)) -> f64| -> Estimate {
        jackknife_mean(&rows.iter().map(|r| sel(&r[j])).collect::<Vec<_>>())
    };
    Ok(McFormFactors {
        t: grid.to_vec(),
        c2: (0..grid.len()).map(|j| col(j, |r| r.0)).collect(),
        c3: (0..grid.len()).map(|j| col(j, |r| r.1)).collect(),
        c4: (0..grid.len()).map(|j| col(j, |r| r.2)).collect(),
        n_samples: cfg.n_samples,
    })
}

/// Samples of `G₂` drawn per `G₁` in [`mc_frame_potential`].
pub const FRAME_BLOCK: usize = 16;

/// Pair-sampled `∫dG₁dG₂ |tr(G₁†U†G₁ G₂†UG₂)|²`; one `G₁` is reused across a
/// block of [`FRAME_BLOCK`] draws of `G₂`, and the standard error is taken
/// over block means. `cfg.n_samples` counts blocks.
pub fn mc_frame_potential(u: &CMatrix, cfg: &McConfig) -> Result<Estimate> {
    let d = u.nrows();
    if d > 16 {
        return Err(Error::SizeGuard(d, 16));
    }
    let ud = u.adjoint();
    let blocks = sample_many(cfg, |i| {
        let mut rng = substream(cfg.seed, i as u64);
        let g1 = sample_haar_unitary(d, &mut rng)?;
        let a = g1.adjoint() * &ud * &g1;
        let mut acc = Kahan::default();
        for _ in 0..FRAME_BLOCK {
            let g2 = sample_haar_unitary(d, &mut rng)?;
            let b = g2.adjoint() * u * &g2;
            acc.add((&a * b).trace().norm_sqr());
        }
        Ok(acc.value() / FRAME_BLOCK as f64)
    })?;
    Ok(jackknife_mean(&blocks))
}

/// Frame potential of a fixed spectrum (diagonal `U = e^{−iHt}`).
pub fn mc_frame_potential_spectrum(energies: &[f64], t: f64, cfg: &McConfig) -> Result<Estimate> {
    mc_frame_potential(&evolution_diag(energies, t), cfg)
}

/// Observed deviation frequencies of `c̃₂` and `c̃₄` from their ensemble means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub t: f64,
    pub deltas: Vec<f64>,
    pub freq_c2: Vec<f64>,
    pub freq_c4: Vec<f64>,
    pub mean_c2: f64,
    pub mean_c4: f64,
    pub n_samples: usize,
}

/// Fraction of sampled spectra with `|c̃ₐ − ⟨c̃ₐ⟩| ≥ δ`, centred on the
/// closed-form ensemble averages.
pub fn empirical_typicality(spec: EnsembleSpec, t: f64, deltas: &[f64], cfg: &McConfig) -> Result<TypicalityReport> {
    let avg = average_form_factors(spec.kind, spec.d, t)?;
    let (m2, m4) = (avg.tilde2(), avg.tilde4());
    let vals = sample_many(cfg, |i| {
        let mut rng = substream(cfg.seed, i as u64);
        let sp = sample_spectrum(spec, &mut rng)?;
        let ff = empirical_form_factors(&sp, t)?;
        Ok((ff.tilde2(), ff.tilde4()))
    })?;
    let n = vals.len() as f64;
    let freq = |sel: fn(&(f64, f64)) -> f64, m: f64, delta: f64| {
        vals.iter().filter(|v| (sel(v) - m).abs() >= delta).count() as f64 / n
    };
    Ok(TypicalityReport {
        t,
        deltas: deltas.to_vec(),
        freq_c2: deltas.iter().map(|&dl| freq(|v| v.0, m2, dl)).collect(),
        freq_c4: deltas.iter().map(|&dl| freq(|v| v.1, m4, dl)).collect(),
        mean_c2: m2,
        mean_c4: m4,
        n_samples: cfg.n_samples,
    })
}
