//! Spectral form factors.
//!
//! For `U = e^{−iHt}`:
//!
//! - `c₂(t) = |tr U|²`
//! - `c₃(t) = tr(U²) (tr U†)²`
//! - `c₄(t) = (tr U)² (tr U†)²`
//!
//! together with `c₂(2t)`. Rescaled values are `c̃ₐ = cₐ / dᵃ`. Besides the
//! single-spectrum evaluation this module holds closed-form ensemble averages
//! for GUE, GDE and the nearest-level-spacing (NLS) ensembles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{characteristic_function, EnsembleKind, Spectrum};
use crate::probes::ProbeSeries;
use crate::special::bessel_ratio;
use crate::{Complex64, Error, Result};

/// The tuple `(c₂(t), c₃(t), c₄(t), c₂(2t))` at one time point.
///
/// `c₂`, `c₄` and `c₂(2t)` are real for single spectra and for every ensemble
/// average, so they are stored as `f64`; `c₃` is kept complex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormFactors {
    pub t: f64,
    pub d: usize,
    pub c2: f64,
    pub c3: Complex64,
    pub c4: f64,
    pub c2_2t: f64,
}

impl FormFactors {
    /// Values at `t = 0`: `(d², d³, d⁴, d²)`.
    pub fn at_zero(d: usize) -> Self {
        let df = d as f64;
        Self { t: 0.0, d, c2: df * df, c3: (df.powi(3)).into(), c4: df.powi(4), c2_2t: df * df }
    }

    /// Ensemble-independent `t → ∞` values.
    pub fn asymptotic(d: usize) -> Self {
        let df = d as f64;
        Self { t: f64::INFINITY, d, c2: df, c3: df.into(), c4: df * (2.0 * df - 1.0), c2_2t: df }
    }

    /// Haar values: `c₂ = 1`, `c₃ = 0`, `c₄ = c₂(2t) = 2`.
    pub fn haar(d: usize) -> Self {
        Self { t: f64::INFINITY, d, c2: 1.0, c3: 0.0.into(), c4: 2.0, c2_2t: 2.0 }
    }

    pub fn re_c3(&self) -> f64 {
        self.c3.re
    }

    /// `c̃₂ = c₂/d²`.
    pub fn tilde2(&self) -> f64 {
        self.c2 / (self.d as f64).powi(2)
    }

    /// `c̃₃ = c₃/d³`.
    pub fn tilde3(&self) -> Complex64 {
        self.c3 / (self.d as f64).powi(3)
    }

    /// `c̃₄ = c₄/d⁴`.
    pub fn tilde4(&self) -> f64 {
        self.c4 / (self.d as f64).powi(4)
    }

    /// Rescaled value of one quantity (real part for `c₃`).
    pub fn rescaled(&self, q: Quantity) -> f64 {
        match q {
            Quantity::C2 => self.tilde2(),
            Quantity::C3 => self.tilde3().re,
            Quantity::C4 => self.tilde4(),
        }
    }

    /// Raw value of one quantity (real part for `c₃`).
    pub fn value(&self, q: Quantity) -> f64 {
        match q {
            Quantity::C2 => self.c2,
            Quantity::C3 => self.c3.re,
            Quantity::C4 => self.c4,
        }
    }
}

/// Selects one of the form factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    C2,
    C3,
    C4,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Self::C2 => "c2",
            Self::C3 => "c3",
            Self::C4 => "c4",
        }
    }

    /// Power of `d` used for rescaling.
    pub fn order(self) -> i32 {
        match self {
            Self::C2 => 2,
            Self::C3 => 3,
            Self::C4 => 4,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c2" => Ok(Self::C2),
            "c3" => Ok(Self::C3),
            "c4" => Ok(Self::C4),
            other => Err(Error::InvalidArgument(format!("unknown quantity '{other}'"))),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(format!("negative time {t}")));
    }
    Ok(())
}

/// Exact form factors of one spectrum; `t` is multiplied by `sp.time_rescale`.
pub fn empirical_form_factors(sp: &Spectrum, t: f64) -> Result<FormFactors> {
    check_time(t)?;
    let tau = t * sp.time_rescale;
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for &e in &sp.energies {
        s1 += Complex64::from_polar(1.0, -e * tau);
        s2 += Complex64::from_polar(1.0, -2.0 * e * tau);
    }
    let c2 = s1.norm_sqr();
    Ok(FormFactors {
        t,
        d: sp.d(),
        c2,
        c3: s2 * s1.conj() * s1.conj(),
        c4: c2 * c2,
        c2_2t: s2.norm_sqr(),
    })
}

/// The three functions entering the GUE averages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RFunctions {
    pub d: usize,
}

impl RFunctions {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    /// `r₁(t) = J₁(2t)/t`.
    pub fn r1(&self, t: f64) -> f64 {
        bessel_ratio(t)
    }

    /// `r₂(t) = θ(2d−t)(d − t/2)`.
    pub fn r2(&self, t: f64) -> f64 {
        let d = self.d as f64;
        if t < 2.0 * d {
            d - 0.5 * t
        } else {
            0.0
        }
    }

    /// `r₃(t) = sin(πt/2)/(πt/2)`.
    pub fn r3(&self, t: f64) -> f64 {
        let x = 0.5 * PI * t;
        if x.abs() < 1e-8 {
            1.0 - x * x / 6.0
        } else {
            x.sin() / x
        }
    }

    /// Box function `r₂(t)/d = θ(2d−t)(1 − t/(2d))`.
    pub fn boxed(&self, t: f64) -> f64 {
        self.r2(t) / self.d as f64
    }
}

/// GUE average of `c₂`.
pub fn gue_c2(d: usize, t: f64) -> f64 {
    let r = RFunctions::new(d);
    let df = d as f64;
    let r1 = r.r1(t);
    df + df * df * r1 * r1 - r.r2(t)
}

/// GUE average of `Re c₃`.
pub fn gue_c3(d: usize, t: f64) -> f64 {
    let r = RFunctions::new(d);
    let df = d as f64;
    let (r1, r1_2) = (r.r1(t), r.r1(2.0 * t));
    let (b1, b2, b3) = (r.boxed(t), r.boxed(2.0 * t), r.boxed(3.0 * t));
    let (s1, s2) = (r.r3(t), r.r3(2.0 * t));
    df.powi(3) * r1_2 * r1 * r1 - df * df * r1_2 * b1 * s2 - 2.0 * df * df * r1 * b2 * s1
        + df * df * r1_2 * r1_2
        + 2.0 * df * df * r1 * r1
        + 2.0 * df * b3
        - df * b2
        - 2.0 * df * b1
        + df
}

/// GUE average of `c₄`.
pub fn gue_c4(d: usize, t: f64) -> f64 {
    let r = RFunctions::new(d);
    let df = d as f64;
    let (d2, d3, d4) = (df * df, df.powi(3), df.powi(4));
    let (r1, r1_2) = (r.r1(t), r.r1(2.0 * t));
    let (b1, b2, b3) = (r.boxed(t), r.boxed(2.0 * t), r.boxed(3.0 * t));
    let (s1, s2) = (r.r3(t), r.r3(2.0 * t));
    let q = r1 * r1;
    d4 * q * q - 2.0 * d3 * q * b1 * s2 - 4.0 * d3 * q * b1
        + 2.0 * d3 * r1_2 * q
        + 4.0 * d3 * q
        + 2.0 * d2 * b1 * b1
        + d2 * b1 * b1 * s2 * s2
        + 8.0 * d2 * r1 * b1 * s1
        - 2.0 * d2 * r1_2 * s2 * b1
        + d2 * r1_2 * r1_2
        - 4.0 * d2 * r1 * s1 * b2
        - 4.0 * d2 * q
        - 4.0 * d2 * b1
        + 2.0 * d2
        - 7.0 * df * b2
        + 4.0 * df * b3
        + 4.0 * df * b1
        - df
}

/// GDE average of `c₂`.
pub fn gde_c2(d: usize, t: f64) -> f64 {
    let df = d as f64;
    df + df * (df - 1.0) * (-t * t / 4.0).exp()
}

/// GDE average of `c₃` (real).
pub fn gde_c3(d: usize, t: f64) -> f64 {
    let df = d as f64;
    let t2 = t * t;
    df + 2.0 * df * (df - 1.0) * (-t2 / 4.0).exp()
        + df * (df - 1.0) * (-t2).exp()
        + df * (df - 1.0) * (df - 2.0) * (-0.75 * t2).exp()
}

/// GDE average of `c₄`.
pub fn gde_c4(d: usize, t: f64) -> f64 {
    let df = d as f64;
    let t2 = t * t;
    df * (2.0 * df - 1.0)
        + 4.0 * df * (df - 1.0).powi(2) * (-t2 / 4.0).exp()
        + 2.0 * df * (df - 1.0) * (df - 2.0) * (-0.75 * t2).exp()
        + df * (df - 1.0) * (-t2).exp()
        + df * (df - 1.0) * (df - 2.0) * (df - 3.0) * (-0.5 * t2).exp()
}

/// Gap chain `Σ_{a_q ≥ 1, Σa ≤ d−1} (d − Σa) Π_q w_q^{a_q}`, evaluated in
/// `O(r·d)` with `P_q(n) = w_q (P_q(n−1) + P_{q−1}(n−1))`.
pub fn gap_chain(d: usize, w: &[Complex64]) -> Complex64 {
    let r = w.len();
    let zero = Complex64::new(0.0, 0.0);
    if r == 0 {
        return Complex64::new(d as f64, 0.0);
    }
    let mut p = vec![zero; r + 1];
    p[0] = Complex64::new(1.0, 0.0);
    let mut total = zero;
    for n in 1..d {
        for q in (1..=r).rev() {
            p[q] = w[q - 1] * (p[q] + p[q - 1]);
        }
        p[0] = zero;
        total += p[r] * (d - n) as f64;
    }
    total
}

/// `Σ_{a=1}^{d−1} (d−a) gᵃ` in closed form, with the exact finite series in
/// `ε = g − 1` once `d|ε| < 0.5`.
pub fn geometric_weighted_sum(d: usize, g: Complex64) -> Complex64 {
    let df = d as f64;
    let eps = g - 1.0;
    if df * eps.norm() < 0.5 {
        // Σ_a (d−a)(1+ε)^a = C(d+1,2) − d + Σ_{k≥1} C(d+1,k+2) εᵏ
        let mut sum = Complex64::new(0.5 * (df + 1.0) * df - df, 0.0);
        let mut binom = (df + 1.0) * df * (df - 1.0) / 6.0;
        let mut pow = eps;
        let mut k = 1usize;
        while k + 2 <= d + 1 {
            let term = pow * binom;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
            binom *= (df - 1.0 - k as f64) / (k as f64 + 3.0);
            pow *= eps;
            k += 1;
        }
        sum
    } else {
        (g.powu(d as u32 + 1) - g * g * df + g * (df - 1.0)) / (eps * eps)
    }
}

fn nls_g(kind: EnsembleKind, tau: f64) -> Result<Complex64> {
    characteristic_function(kind, tau)
}

/// NLS average of `c₂` at rescaled time `τ`.
pub fn nls_c2(kind: EnsembleKind, d: usize, tau: f64) -> Result<f64> {
    let g = nls_g(kind, tau)?;
    Ok(d as f64 + 2.0 * geometric_weighted_sum(d, g).re)
}

/// NLS average of `c₃` at rescaled time `τ`.
pub fn nls_c3(kind: EnsembleKind, d: usize, tau: f64) -> Result<Complex64> {
    let g1 = nls_g(kind, tau)?;
    let g2 = nls_g(kind, 2.0 * tau)?;
    let a1 = gap_chain(d, &[g1]).re;
    let a2 = gap_chain(d, &[g2]).re;
    let v = gap_chain(d, &[g1, g2]) + gap_chain(d, &[g2.conj(), g1.conj()]) + gap_chain(d, &[g1, g1.conj()]);
    Ok(Complex64::new(d as f64 + 4.0 * a1 + 2.0 * a2, 0.0) + v.conj() * 2.0)
}

/// NLS average of `c₄` at rescaled time `τ`.
pub fn nls_c4(kind: EnsembleKind, d: usize, tau: f64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let g1 = nls_g(kind, tau)?;
    let g2 = nls_g(kind, 2.0 * tau)?;
    let df = d as f64;
    let a1 = gap_chain(d, &[g1]).re;
    let a2 = gap_chain(d, &[g2]).re;
    let v = gap_chain(d, &[g1, g2]) + gap_chain(d, &[g2.conj(), g1.conj()]) + gap_chain(d, &[g1, g1.conj()]);
    let s = gap_chain(d, &[g1, g2, g1])
        + gap_chain(d, &[g1.conj(), one, g1])
        + gap_chain(d, &[g1, one, g1]);
    Ok(df * (2.0 * df - 1.0) + 2.0 * a2 + 8.0 * (df - 1.0) * a1 + 4.0 * v.re + 8.0 * s.re)
}

/// Ensemble-averaged form factors on the common time axis (NLS ensembles
/// are evaluated at `τ = t/d`).
pub fn average_form_factors(kind: EnsembleKind, d: usize, t: f64) -> Result<FormFactors> {
    check_time(t)?;
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let ff = match kind {
        EnsembleKind::Gue => FormFactors {
            t,
            d,
            c2: gue_c2(d, t),
            c3: gue_c3(d, t).into(),
            c4: gue_c4(d, t),
            c2_2t: gue_c2(d, 2.0 * t),
        },
        EnsembleKind::Gde => FormFactors {
            t,
            d,
            c2: gde_c2(d, t),
            c3: gde_c3(d, t).into(),
            c4: gde_c4(d, t),
            c2_2t: gde_c2(d, 2.0 * t),
        },
        EnsembleKind::Haar => FormFactors { t, ..FormFactors::haar(d) },
        nls => {
            let tau = t / d as f64;
            FormFactors {
                t,
                d,
                c2: nls_c2(nls, d, tau)?,
                c3: nls_c3(nls, d, tau)?,
                c4: nls_c4(nls, d, tau)?,
                c2_2t: nls_c2(nls, d, 2.0 * tau)?,
            }
        }
    };
    Ok(ff)
}

/// [`average_form_factors`] over a time grid, in parallel.
pub fn average_form_factors_grid(kind: EnsembleKind, d: usize, grid: &[f64]) -> Result<Vec<FormFactors>> {
    grid.par_iter().map(|&t| average_form_factors(kind, d, t)).collect()
}

/// Smooth envelopes of `c̃₂` and `c̃₄` for Poisson and GUE.
pub fn envelope(kind: EnsembleKind, q: Quantity, d: usize, t: f64) -> Result<f64> {
    let df = d as f64;
    let r = RFunctions::new(d);
    let b = r.boxed(t);
    match (kind, q) {
        (EnsembleKind::Poisson, Quantity::C2) => Ok(1.0 / df + 2.0 / (t * t)),
        (EnsembleKind::Poisson, Quantity::C4) => {
            Ok((2.0 * df - 1.0) / df.powi(3) + 6.0 / t.powi(4) + (16.0 * df - 15.0) / (df * df * t * t))
        }
        (EnsembleKind::Gue, Quantity::C2) => Ok(1.0 / df + 1.0 / (PI * t.powi(3)) - b / df),
        (EnsembleKind::Gue, Quantity::C4) => {
            let b2 = r.boxed(2.0 * t);
            let tail = (8.0 * b2 - 16.0 * b + b / 2f64.sqrt()) / (PI.powf(1.5) * t.powf(2.5));
            Ok(1.0 / (PI * PI * t.powi(6))
                + (2.0 - 31.0 / (8.0 * PI * t.powi(3)) - tail - 4.0 * b
                    + 2.0 * b * b
                    + b * b / (PI * PI * t * t))
                    / (df * df))
        }
        _ => Err(Error::Unsupported(format!("envelope of {q} for {kind}"))),
    }
}

/// Ensemble-independent `t → ∞` value (unrescaled).
pub fn asymptotic_value(q: Quantity, d: usize) -> f64 {
    FormFactors::asymptotic(d).value(q)
}

/// Haar value of the rescaled quantity: `c̃₂ = d⁻²`, `Re c̃₃ = 0`, `c̃₄ = 2d⁻⁴`.
pub fn haar_value(q: Quantity, d: usize) -> f64 {
    FormFactors::haar(d).rescaled(q)
}

/// First grid time after which every later value lies within `band` of
/// `level`.
pub fn equilibration_time(series: &ProbeSeries, level: f64, band: f64) -> Result<f64> {
    let grid = &series.grid;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    match grid.iter().rposition(|&(_, v)| (v - level).abs() > band) {
        None => Ok(grid[0].0),
        Some(i) if i + 1 == grid.len() => Err(Error::NeverConverged),
        Some(i) => Ok(grid[i + 1].0),
    }
}

/// `n` logarithmically spaced times in `[tmin, tmax]`.
pub fn log_grid(tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>> {
    if !(tmin > 0.0 && tmax > tmin) || n < 2 {
        return Err(Error::InvalidArgument(format!("bad log grid [{tmin}, {tmax}] with {n} points")));
    }
    let (a, b) = (tmin.ln(), tmax.ln());
    Ok((0..n)
        .map(|k| {
            if k == 0 {
                tmin
            } else if k + 1 == n {
                tmax
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Default grid: 200 points over `[0.1, 10d]`.
pub fn default_grid(d: usize) -> Vec<f64> {
    log_grid(0.1, 10.0 * d as f64, 200).expect("valid default grid")
}
