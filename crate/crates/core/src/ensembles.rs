//! Spectrum samplers, spacing densities and characteristic functions.
//!
//! GUE spectra are eigenvalues of a dense Hermitian matrix with entry variance
//! `1/d` (semicircle on `[−2, 2]`). GDE draws `d` independent normals with
//! standard deviation `1/2`. The nearest-level-spacing (NLS) ensembles start at
//! `E₁ = 0` and add i.i.d. spacings of mean one; their spectra carry
//! `time_rescale = 1/d` so every ensemble shares one time axis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::special::scaled_erfi;
use crate::{Complex64, Error, Result};

/// Ensemble families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gue,
    Gde,
    Poisson,
    WdGoe,
    WdGue,
    Haar,
}

impl EnsembleKind {
    /// All kinds with a spectrum density.
    pub const SPECTRAL: [EnsembleKind; 5] =
        [Self::Gue, Self::Gde, Self::Poisson, Self::WdGoe, Self::WdGue];

    /// Nearest-level-spacing kinds.
    pub fn is_nls(self) -> bool {
        matches!(self, Self::Poisson | Self::WdGoe | Self::WdGue)
    }

    /// Stable lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Gue => "gue",
            Self::Gde => "gde",
            Self::Poisson => "poisson",
            Self::WdGoe => "wd-goe",
            Self::WdGue => "wd-gue",
            Self::Haar => "haar",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "gue" => Ok(Self::Gue),
            "gde" => Ok(Self::Gde),
            "poisson" | "p" => Ok(Self::Poisson),
            "wd-goe" | "wdgoe" | "goe" => Ok(Self::WdGoe),
            "wd-gue" | "wdgue" => Ok(Self::WdGue),
            "haar" => Ok(Self::Haar),
            other => Err(Error::InvalidArgument(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// An ensemble at a fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub d: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
        }
        Ok(Self { kind, d })
    }

    /// Time rescaling applied before evaluating form factors.
    pub fn time_rescale(&self) -> f64 {
        if self.kind.is_nls() {
            1.0 / self.d as f64
        } else {
            1.0
        }
    }
}

/// One sampled spectrum, sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub source: EnsembleSpec,
    pub seed: Option<u64>,
    pub time_rescale: f64,
}

impl Spectrum {
    /// Wraps explicit energies (sorted here) with no time rescaling.
    pub fn from_energies(mut energies: Vec<f64>, kind: EnsembleKind) -> Result<Self> {
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("non-finite energy".into()));
        }
        energies.sort_by(|a, b| a.total_cmp(b));
        let d = energies.len();
        Ok(Self { energies, source: EnsembleSpec { kind, d }, seed: None, time_rescale: 1.0 })
    }

    pub fn d(&self) -> usize {
        self.energies.len()
    }
}

/// Independent generator for `(seed, stream)`: ChaCha8 keyed by `seed`, on
/// stream `stream`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one spectrum.
pub fn sample_spectrum<R: Rng + ?Sized>(spec: EnsembleSpec, rng: &mut R) -> Result<Spectrum> {
    let d = spec.d;
    let mut energies = match spec.kind {
        EnsembleKind::Haar => {
            return Err(Error::Unsupported("haar has no spectrum density".into()));
        }
        EnsembleKind::Gue => gue_eigenvalues(d, rng),
        EnsembleKind::Gde => (0..d)
            .map(|_| 0.5 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect::<Vec<f64>>(),
        kind => {
            let mut e = Vec::with_capacity(d);
            let mut acc = 0.0;
            e.push(acc);
            for _ in 1..d {
                acc += sample_spacing(kind, rng)?;
                e.push(acc);
            }
            e
        }
    };
    energies.sort_by(|a, b| a.total_cmp(b));
    Ok(Spectrum { energies, source: spec, seed: None, time_rescale: spec.time_rescale() })
}

/// Draws one spectrum from the generator `substream(seed, stream)` and records the seed.
pub fn sample_spectrum_seeded(spec: EnsembleSpec, seed: u64, stream: u64) -> Result<Spectrum> {
    let mut rng = substream(seed, stream);
    let mut sp = sample_spectrum(spec, &mut rng)?;
    sp.seed = Some(seed);
    Ok(sp)
}

fn gue_eigenvalues<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let s_diag = (1.0 / d as f64).sqrt();
    let s_off = (0.5 / d as f64).sqrt();
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        let x: f64 = StandardNormal.sample(rng);
        h[(i, i)] = Complex64::new(s_diag * x, 0.0);
        for j in (i + 1)..d {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(s_off * re, s_off * im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// Draws one spacing from the named density.
pub fn sample_spacing<R: Rng + ?Sized>(kind: EnsembleKind, rng: &mut R) -> Result<f64> {
    match kind {
        EnsembleKind::Poisson => Ok(Exp1.sample(rng)),
        EnsembleKind::WdGoe => {
            let u: f64 = rng.random();
            Ok((-4.0 * (1.0 - u).ln() / PI).sqrt())
        }
        EnsembleKind::WdGue => {
            // Chi distribution with three degrees of freedom, scale √(π/8).
            let sigma = (PI / 8.0).sqrt();
            let r2: f64 = (0..3).map(|_| StandardNormal.sample(rng)).map(|x: f64| x * x).sum();
            Ok(sigma * r2.sqrt())
        }
        other => Err(Error::Unsupported(format!("{other} has no spacing density"))),
    }
}

/// Nearest-level-spacing density `P_E(s)`.
pub fn spacing_pdf(kind: EnsembleKind, s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::InvalidArgument(format!("negative spacing {s}")));
    }
    match kind {
        EnsembleKind::Poisson => Ok((-s).exp()),
        EnsembleKind::WdGoe => Ok(0.5 * PI * s * (-0.25 * PI * s * s).exp()),
        EnsembleKind::WdGue => Ok(32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()),
        other => Err(Error::Unsupported(format!("{other} has no spacing density"))),
    }
}

/// Characteristic function `g_E(t) = ∫₀^∞ e^{ist} P_E(s) ds`.
pub fn characteristic_function(kind: EnsembleKind, t: f64) -> Result<Complex64> {
    if !kind.is_nls() {
        return Err(Error::Unsupported(format!("{kind} has no spacing density")));
    }
    if t < 0.0 {
        return Ok(characteristic_function(kind, -t)?.conj());
    }
    let i = Complex64::i();
    Ok(match kind {
        EnsembleKind::Poisson => i / (i + t),
        EnsembleKind::WdGoe => {
            let x = t / PI.sqrt();
            Complex64::new(1.0 - t * scaled_erfi(x), t * (-t * t / PI).exp())
        }
        _ => {
            let x = PI.sqrt() * t / 4.0;
            let p = PI * t * t - 8.0;
            let inner = Complex64::new(4.0 * t - p * scaled_erfi(x), p * (-x * x).exp());
            i * inner / 8.0
        }
    })
}
