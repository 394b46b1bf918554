//! Isospectral twirling operators.
//!
//! The twirl of `U^{⊗k} ⊗ U^{†⊗k}` over all unitaries with the spectrum of
//! `U` is a combination `Σ_σ a_σ T_σ` over `S_{2k}`, with
//! `a_σ = Σ_π Wg(σ, π) tr(T_π U^{⊗k,k})`. Slots `1..k` carry `U`, slots
//! `k+1..2k` carry `U†`. The traces `tr(T_π U^{⊗k,k})` depend only on the form
//! factors, so the operator is built from a [`FormFactors`] value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::formfactors::FormFactors;
use crate::permgroup::{enumerate_group, permutation_matrix, weingarten, Permutation, MAX_DENSE_DIM};
use crate::{CMatrix, Complex64, Error, Result};

/// `Σ_σ a_σ T_σ` over `S_{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwirlOperator {
    pub k: usize,
    pub d: usize,
    pub elements: Vec<Permutation>,
    pub coeffs: Vec<Complex64>,
}

impl TwirlOperator {
    /// All-zero operator over `S_{2k}`.
    pub fn zeros(k: usize, d: usize) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(Error::Unsupported(format!("twirl of order k={k}")));
        }
        let elements = enumerate_group(2 * k)?;
        let coeffs = vec![Complex64::new(0.0, 0.0); elements.len()];
        Ok(Self { k, d, elements, coeffs })
    }

    /// Coefficient of `T_p`.
    pub fn coeff(&self, p: &Permutation) -> Complex64 {
        self.elements
            .iter()
            .position(|q| q == p)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Coefficient of the permutation written in cycle notation.
    pub fn coeff_of(&self, cycles: &str) -> Result<Complex64> {
        Ok(self.coeff(&Permutation::parse(2 * self.k, cycles)?))
    }

    fn set(&mut self, cycles: &str, value: Complex64) -> Result<()> {
        let p = Permutation::parse(2 * self.k, cycles)?;
        let i = self
            .elements
            .iter()
            .position(|q| *q == p)
            .ok_or_else(|| Error::InvalidPermutation(cycles.to_string()))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Iterates `(T_σ, a_σ)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &Complex64)> {
        self.elements.iter().zip(self.coeffs.iter())
    }

    /// Dense realization `Σ_σ a_σ T_σ` on `(C^d)^{⊗2k}`.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let dim = self.d.checked_pow(2 * self.k as u32).unwrap_or(usize::MAX);
        if dim > MAX_DENSE_DIM {
            return Err(Error::SizeGuard(dim, MAX_DENSE_DIM));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (p, &a) in self.iter() {
            if a != Complex64::default() {
                m += permutation_matrix(p, self.d)? * a;
            }
        }
        Ok(m)
    }

    /// Coefficients keyed by cycle notation, as `[re, im]`.
    pub fn to_map(&self) -> BTreeMap<String, [f64; 2]> {
        self.iter().map(|(p, a)| (p.to_string(), [a.re, a.im])).collect()
    }

    /// JSON object `{k, d, coeffs: {"(12)": [re, im], …}}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TwirlJson { k: self.k, d: self.d, coeffs: self.to_map() })?)
    }

    /// Parses the output of [`TwirlOperator::to_json`].
    pub fn from_json(s: &str) -> Result<Self> {
        let j: TwirlJson = serde_json::from_str(s)?;
        let mut op = Self::zeros(j.k, j.d)?;
        for (key, [re, im]) in j.coeffs {
            op.set(&key, Complex64::new(re, im))?;
        }
        Ok(op)
    }

    /// Largest coefficient difference to another operator of the same order.
    pub fn max_diff(&self, other: &TwirlOperator) -> f64 {
        self.iter()
            .map(|(p, a)| (a - other.coeff(p)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct TwirlJson {
    k: usize,
    d: usize,
    coeffs: BTreeMap<String, [f64; 2]>,
}

/// `tr(T_π U^{⊗k,k})` expressed through the form factors.
pub fn permutation_trace_input(ff: &FormFactors, p: &Permutation) -> Result<Complex64> {
    let n = p.degree();
    if n != 2 && n != 4 {
        return Err(Error::Unsupported(format!("trace inputs for S_{n}")));
    }
    let k = n / 2;
    let mut charges: Vec<i32> = p
        .cycles()
        .iter()
        .map(|c| c.iter().map(|&m| if m < k { 1 } else { -1 }).sum())
        .collect();
    charges.sort_unstable();
    let d = ff.d as f64;
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(match charges.as_slice() {
        [0, 0] => c(d * d),
        [0] => c(d),
        [-1, 1] => c(ff.c2),
        [-1, -1, 1, 1] => c(ff.c4),
        [-1, -1, 2] => ff.c3,
        [-2, 1, 1] => ff.c3.conj(),
        [-1, 0, 1] => c(d * ff.c2),
        [-2, 2] => c(ff.c2_2t),
        _ => return Err(Error::InvalidPermutation(format!("unexpected charge pattern {charges:?}"))),
    })
}

/// Twirl by direct Weingarten contraction over `S_{2k}`; needs `d ≥ 2k`.
pub fn weingarten_twirl(ff: &FormFactors, k: usize) -> Result<TwirlOperator> {
    let mut op = TwirlOperator::zeros(k, ff.d)?;
    let table = weingarten(2 * k, ff.d)?;
    let inv = table.omega_inv.as_ref().expect("weingarten fills omega_inv");
    let b: Vec<Complex64> = table
        .elements
        .iter()
        .map(|p| permutation_trace_input(ff, p))
        .collect::<Result<_>>()?;
    for (s, a) in op.coeffs.iter_mut().enumerate() {
        *a = (0..b.len()).map(|p| b[p] * inv[(s, p)]).sum();
    }
    Ok(op)
}

/// `R⁽²⁾ = (c₂−1)/(d²−1) 1 + (d²−c₂)/(d²−1) T/d`.
pub fn r2(ff: &FormFactors) -> Result<TwirlOperator> {
    let d = ff.d as f64;
    if ff.d < 2 {
        return Err(Error::InvalidArgument(format!("r2 needs d >= 2, got {}", ff.d)));
    }
    let mut op = TwirlOperator::zeros(1, ff.d)?;
    let den = d * d - 1.0;
    op.set("e", ((ff.c2 - 1.0) / den).into())?;
    op.set("(12)", ((d * d - ff.c2) / (d * den)).into())?;
    Ok(op)
}

/// `R⁽⁴⁾` from the grouped closed form; needs `d ≥ 4`.
pub fn r4(ff: &FormFactors) -> Result<TwirlOperator> {
    if ff.d < 4 {
        return Err(Error::SingularGram { n: 4, d: ff.d });
    }
    let d = ff.d as f64;
    let (d2, d3, d4) = (d * d, d.powi(3), d.powi(4));
    let (c2, c4, c22) = (ff.c2, ff.c4, ff.c2_2t);
    let c3 = ff.c3;
    let c3b = c3.conj();
    let rc2 = 2.0 * c3.re;
    let k = c4 + c22;
    let den = d2 * (d.powi(6) - 14.0 * d4 + 49.0 * d2 - 36.0);
    let re = |x: f64| Complex64::new(x / den, 0.0);

    let identity = c4 * (d4 - 8.0 * d2 + 6.0) + c2 * (-4.0 * d4 + 32.0 * d2 - 24.0) + c22 * (d2 + 6.0)
        + rc2 * (4.0 * d - d3)
        + 2.0 * d4
        - 18.0 * d2;
    let swap_common = k * (4.0 * d - d3) + c2 * (4.0 * d3 - 16.0 * d);
    let t12 = (c3 * (d4 - 8.0 * d2 + 6.0) + c3b * (d2 + 6.0) + swap_common) / den;
    let t34 = (c3b * (d4 - 8.0 * d2 + 6.0) + c3 * (d2 + 6.0) + swap_common) / den;
    let y2 = c2 * (d.powi(5) - 7.0 * d3 + 2.0 * d) - 5.0 * c22 * d + rc2 * (2.0 * d2 - 3.0) + c4 * (4.0 * d - d3)
        - d.powi(5)
        + 9.0 * d3;
    let y3_common = c2 * (-d4 + d2 + 12.0) + k * (2.0 * d2 - 3.0) + d4 - 9.0 * d2;
    let y3p = (c3 * (4.0 * d - d3) - c3b * (5.0 * d) + y3_common) / den;
    let y3m = (c3b * (4.0 * d - d3) - c3 * (5.0 * d) + y3_common) / den;
    let y41 = c2 * (2.0 * d3 + 2.0 * d) + c22 * (4.0 * d - d3) + rc2 * (2.0 * d2 - 3.0) - 5.0 * c4 * d;
    let y42 = c2 * (4.0 * d3 - 16.0 * d) - 5.0 * c22 * d + rc2 * (d2 + 6.0) - 5.0 * c4 * d - d.powi(5) + 9.0 * d3;
    let t1234 = c2 * (-4.0 * d2 - 24.0) + c22 * (d4 - 8.0 * d2 + 6.0) + rc2 * (4.0 * d - d3) + c4 * (d2 + 6.0)
        - 2.0 * d4
        + 18.0 * d2;
    let y22 = c2 * (-2.0 * d4 + 14.0 * d2 - 24.0) + k * (d2 + 6.0) - 10.0 * d * c3.re + d.powi(6) - 11.0 * d4
        + 18.0 * d2;

    let mut op = TwirlOperator::zeros(2, ff.d)?;
    op.set("e", re(identity))?;
    op.set("(12)", t12)?;
    op.set("(34)", t34)?;
    op.set("(12)(34)", re(t1234))?;
    for p in ["(13)", "(14)", "(23)", "(24)"] {
        op.set(p, re(y2))?;
    }
    for p in ["(123)", "(124)", "(132)", "(142)"] {
        op.set(p, y3p)?;
    }
    for p in ["(234)", "(134)", "(243)", "(143)"] {
        op.set(p, y3m)?;
    }
    for p in ["(1234)", "(1432)", "(1243)", "(1342)"] {
        op.set(p, re(y41))?;
    }
    for p in ["(1324)", "(1423)"] {
        op.set(p, re(y42))?;
    }
    for p in ["(13)(24)", "(14)(23)"] {
        op.set(p, re(y22))?;
    }
    Ok(op)
}

/// `R⁽²⁾` for `k = 1`, `R⁽⁴⁾` for `k = 2`.
pub fn isospectral_twirl(ff: &FormFactors, k: usize) -> Result<TwirlOperator> {
    match k {
        1 => r2(ff),
        2 => r4(ff),
        _ => Err(Error::Unsupported(format!("twirl of order k={k}"))),
    }
}

/// Kind of a completely positive map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpKind {
    Generic,
    Dephasing,
}

/// A CP map `Q(X) = Σ_α K_α X K_α†`, summarized by `tr 𝒦 = Σ_α |tr K_α|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPMapSpec {
    pub trace_of_k: Complex64,
    pub d: usize,
    pub kind: CpKind,
}

impl CPMapSpec {
    pub fn generic(d: usize, trace_of_k: Complex64) -> Self {
        Self { trace_of_k, d, kind: CpKind::Generic }
    }

    /// Dephasing in a fixed basis: `tr 𝒦 = d`.
    pub fn dephasing(d: usize) -> Self {
        Self { trace_of_k: Complex64::new(d as f64, 0.0), d, kind: CpKind::Dephasing }
    }

    /// `tr 𝒦` from explicit Kraus operators.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::Shape("Kraus operators must be square of equal size".into()));
        }
        let tr: f64 = kraus.iter().map(|k| k.trace().norm_sqr()).sum();
        Ok(Self::generic(d, tr.into()))
    }
}

/// `R⁽²⁾(Q) = ((d² − tr𝒦) T + d (tr𝒦 − 1)) / (d(d²−1))`.
pub fn r2_cp(spec: &CPMapSpec) -> Result<TwirlOperator> {
    if spec.d < 2 {
        return Err(Error::InvalidArgument(format!("r2_cp needs d >= 2, got {}", spec.d)));
    }
    let d = spec.d as f64;
    let tk = spec.trace_of_k;
    let den = d * (d * d - 1.0);
    let mut op = TwirlOperator::zeros(1, spec.d)?;
    op.set("e", (tk - 1.0) * d / den)?;
    op.set("(12)", (-tk + d * d) / den)?;
    Ok(op)
}

/// Haar averages: `T/d` for `k = 1`; for `k = 2`
/// `(T₍₁₃₎₍₂₄₎ + T₍₁₄₎₍₂₃₎)/(d²−1) − (T₍₁₄₂₃₎ + T₍₁₃₂₄₎)/(d(d²−1))`.
pub fn haar_twirl_limit(k: usize, d: usize) -> Result<TwirlOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("haar limit needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let mut op = TwirlOperator::zeros(k, d)?;
    match k {
        1 => op.set("(12)", (1.0 / df).into())?,
        _ => {
            let a = 1.0 / (df * df - 1.0);
            let b = -1.0 / (df * (df * df - 1.0));
            op.set("(13)(24)", a.into())?;
            op.set("(14)(23)", a.into())?;
            op.set("(1423)", b.into())?;
            op.set("(1324)", b.into())?;
        }
    }
    Ok(op)
}
