//! Probes of quantum chaos as closed functions of the form factors, and the
//! generic contraction `tr(T̃_π O R)` that evaluates any of them at small `d`.
//!
//! All probes take a [`FormFactors`] value, so the same code serves a single
//! spectrum, an ensemble average or the Haar values. Scene parameters
//! (subsystem dimensions, purities, energies) live in [`SceneParams`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleKind;
use crate::formfactors::FormFactors;
use crate::linalg::matrix_unit;
use crate::permgroup::{compose, permuted_trace_unchecked, trace_power, trace_with_dense, weingarten, Permutation, MAX_DENSE_DIM};
use crate::twirl::{r2, r4, CPMapSpec, CpKind, TwirlOperator};
use crate::{CMatrix, Complex64, Error, Result};

/// Scene parameters shared by the probes.
///
/// - `da·db = d` is the bipartition used by entanglement, convergence and
///   free-energy probes; `dc·dd = d` is the output cut used by the TMI.
/// - `purity_psi = tr ψ²`, `purity_a = tr ψ_A²`, `purity_b = tr ψ_B²`,
///   `deph_purity = tr(𝒟_B ψ)²`.
/// - `e0 = ⟨ψ|H₀|ψ⟩`, `e_ht = tr H₀ / d`, `tr_h0_sq = tr H₀²`.
/// - `beta_eps = ε = β (E₀ − tr H₀/d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub d: usize,
    pub da: usize,
    pub db: usize,
    pub dc: usize,
    pub dd: usize,
    pub purity_psi: f64,
    pub purity_a: f64,
    pub purity_b: f64,
    pub deph_purity: f64,
    pub e0: f64,
    pub e_ht: f64,
    pub tr_h0_sq: f64,
    pub beta_eps: f64,
}

fn isqrt(d: usize) -> usize {
    let mut r = (d as f64).sqrt() as usize;
    while r * r > d {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= d {
        r += 1;
    }
    r
}

impl SceneParams {
    /// Pure product state, balanced cuts when `d` is a perfect square
    /// (otherwise `dA = dC = 1`), `H₀` with spectrum `±1` and `ψ` its ground
    /// state, `ε = 1`.
    pub fn new(d: usize) -> Self {
        let s = isqrt(d);
        let (a, c) = if s * s == d { (s, s) } else { (1, 1) };
        Self {
            d,
            da: a,
            db: d / a,
            dc: c,
            dd: d / c,
            purity_psi: 1.0,
            purity_a: 1.0,
            purity_b: 1.0,
            deph_purity: 1.0,
            e0: -1.0,
            e_ht: 0.0,
            tr_h0_sq: d as f64,
            beta_eps: 1.0,
        }
    }

    pub fn with_bipartition(mut self, da: usize) -> Self {
        self.da = da;
        self.db = self.d / da.max(1);
        self
    }

    pub fn with_output_cut(mut self, dc: usize) -> Self {
        self.dc = dc;
        self.dd = self.d / dc.max(1);
        self
    }

    /// Checks the invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.d < 2 {
            return bad("d must be at least 2");
        }
        if self.da * self.db != self.d {
            return bad("dA·dB must equal d");
        }
        if self.dc * self.dd != self.d {
            return bad("dC·dD must equal d");
        }
        for (name, p) in [
            ("purity_psi", self.purity_psi),
            ("purity_a", self.purity_a),
            ("purity_b", self.purity_b),
            ("deph_purity", self.deph_purity),
        ] {
            if !(p > 0.0 && p <= 1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside (0, 1]")));
            }
        }
        if self.purity_a < 1.0 / self.da as f64 - 1e-12 {
            return bad("purity_a below 1/dA");
        }
        Ok(())
    }
}

/// A probe evaluated on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub quantity: String,
    pub ensemble: Option<EnsembleKind>,
    pub d: usize,
    pub params: Option<SceneParams>,
    pub grid: Vec<(f64, f64)>,
}

impl ProbeSeries {
    /// Builds a series; times must increase strictly and values be finite.
    pub fn new(quantity: &str, d: usize, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Shape(format!("{} times vs {} values", times.len(), values.len())));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid times must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite probe value".into()));
        }
        Ok(Self {
            quantity: quantity.to_string(),
            ensemble: None,
            d,
            params: None,
            grid: times.into_iter().zip(values).collect(),
        })
    }

    pub fn with_ensemble(mut self, kind: EnsembleKind) -> Self {
        self.ensemble = Some(kind);
        self
    }

    pub fn with_params(mut self, params: SceneParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.grid.iter().map(|p| p.1).collect()
    }
}

/// A logarithm that clamps its argument at `1e-300` and reports whether it did.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub clamped: bool,
}

const LOG_FLOOR: f64 = 1e-300;

fn clamped(x: f64, log: impl Fn(f64) -> f64) -> (f64, bool) {
    if x > LOG_FLOOR {
        (log(x), false)
    } else {
        (log(LOG_FLOOR), true)
    }
}

// ---------------------------------------------------------------------------
// Observables and the generic contraction

/// One term `coeff · A₁ ⊗ … ⊗ A_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub coeff: Complex64,
    pub factors: Vec<CMatrix>,
}

/// An operator on `(C^d)^{⊗n}`, dense or as a sum of tensor products.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Dense { n: usize, d: usize, matrix: CMatrix },
    Products { n: usize, d: usize, terms: Vec<ProductTerm> },
}

impl Observable {
    /// Dense operator on `n` slots of dimension `d`.
    pub fn dense(n: usize, d: usize, matrix: CMatrix) -> Result<Self> {
        let dim = d.pow(n as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!("expected {dim}x{dim}, got {}x{}", matrix.nrows(), matrix.ncols())));
        }
        Ok(Self::Dense { n, d, matrix })
    }

    /// Single tensor product `A₁ ⊗ … ⊗ A_n`.
    pub fn product(factors: Vec<CMatrix>) -> Result<Self> {
        let d = factors.first().map(|m| m.nrows()).ok_or_else(|| Error::Shape("empty product".into()))?;
        if factors.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Shape("factors must be square of equal size".into()));
        }
        Ok(Self::Products { n: factors.len(), d, terms: vec![ProductTerm { coeff: 1.0.into(), factors }] })
    }

    /// Subsystem swap `T_A` on two copies of `C^{dA} ⊗ C^{dB}`:
    /// `Σ_ij (|i⟩⟨j| ⊗ 1) ⊗ (|j⟩⟨i| ⊗ 1)`.
    pub fn subsystem_swap(da: usize, db: usize) -> Self {
        let id = CMatrix::identity(db, db);
        let mut terms = Vec::with_capacity(da * da);
        for i in 0..da {
            for j in 0..da {
                terms.push(ProductTerm {
                    coeff: 1.0.into(),
                    factors: vec![matrix_unit(da, i, j).kronecker(&id), matrix_unit(da, j, i).kronecker(&id)],
                });
            }
        }
        Self::Products { n: 2, d: da * db, terms }
    }

    /// `Σ_i Π_i ⊗ Π_i` in the computational basis.
    pub fn dephasing_pair(d: usize) -> Self {
        let terms = (0..d)
            .map(|i| ProductTerm { coeff: 1.0.into(), factors: vec![matrix_unit(d, i, i), matrix_unit(d, i, i)] })
            .collect();
        Self::Products { n: 2, d, terms }
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::Dense { n, .. } | Self::Products { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { d, .. } | Self::Products { d, .. } => *d,
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Observable) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("tensor of observables with different local dimension".into()));
        }
        let n = self.degree() + other.degree();
        let d = self.dim();
        match (self, other) {
            (Self::Products { terms: a, .. }, Self::Products { terms: b, .. }) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        let mut factors = x.factors.clone();
                        factors.extend(y.factors.iter().cloned());
                        terms.push(ProductTerm { coeff: x.coeff * y.coeff, factors });
                    }
                }
                Ok(Self::Products { n, d, terms })
            }
            _ => {
                let m = self.to_dense()?.kronecker(&other.to_dense()?);
                Self::dense(n, d, m)
            }
        }
    }

    /// Sum of two observables on the same space.
    pub fn add(&self, other: &Observable, scale: Complex64) -> Result<Self> {
        if self.dim() != other.dim() || self.degree() != other.degree() {
            return Err(Error::Shape("sum of observables on different spaces".into()));
        }
        match (self, other) {
            (Self::Products { n, d, terms: a }, Self::Products { terms: b, .. }) => {
                let mut terms = a.clone();
                terms.extend(b.iter().map(|t| ProductTerm { coeff: t.coeff * scale, factors: t.factors.clone() }));
                Ok(Self::Products { n: *n, d: *d, terms })
            }
            _ => Self::dense(self.degree(), self.dim(), self.to_dense()? + other.to_dense()? * scale),
        }
    }

    /// Dense matrix; subject to the `d^n ≤ 4096` guard.
    pub fn to_dense(&self) -> Result<CMatrix> {
        match self {
            Self::Dense { matrix, .. } => Ok(matrix.clone()),
            Self::Products { n, d, terms } => {
                let dim = d.pow(*n as u32);
                if dim > MAX_DENSE_DIM {
                    return Err(Error::SizeGuard(dim, MAX_DENSE_DIM));
                }
                let mut m = CMatrix::zeros(dim, dim);
                for t in terms {
                    m += crate::linalg::kron_all(&t.factors) * t.coeff;
                }
                Ok(m)
            }
        }
    }

    /// `tr(T_p · self)`.
    pub fn trace_with(&self, p: &Permutation) -> Result<Complex64> {
        if p.degree() != self.degree() {
            return Err(Error::DegreeMismatch(p.degree(), self.degree()));
        }
        match self {
            Self::Dense { d, matrix, .. } => trace_with_dense(p, *d, matrix),
            Self::Products { terms, .. } => {
                Ok(terms.iter().map(|t| t.coeff * permuted_trace_unchecked(p, &t.factors)).sum())
            }
        }
    }
}

/// `tr(T_π/tr(T_π) · O · R)` with `R = Σ_σ a_σ T_σ`, evaluated as
/// `Σ_σ a_σ tr(T_{σ∘π} O) / d^{#π}`.
pub fn generic_probe(op: &TwirlOperator, contraction: &Permutation, obs: &Observable) -> Result<Complex64> {
    let n = 2 * op.k;
    if contraction.degree() != n {
        return Err(Error::DegreeMismatch(contraction.degree(), n));
    }
    if obs.degree() != n || obs.dim() != op.d {
        return Err(Error::Shape(format!(
            "observable on {} slots of dimension {}, twirl on {n} slots of dimension {}",
            obs.degree(),
            obs.dim(),
            op.d
        )));
    }
    if let Observable::Dense { .. } = obs {
        let dim = op.d.pow(n as u32);
        if dim > MAX_DENSE_DIM {
            return Err(Error::SizeGuard(dim, MAX_DENSE_DIM));
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (sigma, &a) in op.iter() {
        if a == Complex64::default() {
            continue;
        }
        total += a * obs.trace_with(&compose(sigma, contraction)?)?;
    }
    Ok(total / trace_power(contraction, op.d))
}

/// Haar twirl `Σ_σ Σ_π Wg(σ,π) tr(T_π X) T_σ` of an arbitrary operator `X`
/// on `(C^d)^{⊗2k}`; needs `d ≥ 2k`.
pub fn twirl_of(x: &Observable) -> Result<TwirlOperator> {
    let n = x.degree();
    if n % 2 != 0 {
        return Err(Error::Unsupported(format!("twirl of an operator on {n} slots")));
    }
    let mut op = TwirlOperator::zeros(n / 2, x.dim())?;
    let table = weingarten(n, x.dim())?;
    let inv = table.omega_inv.as_ref().expect("weingarten fills omega_inv");
    let b: Vec<Complex64> = table.elements.iter().map(|p| x.trace_with(p)).collect::<Result<_>>()?;
    for (s, a) in op.coeffs.iter_mut().enumerate() {
        *a = (0..b.len()).map(|p| b[p] * inv[(s, p)]).sum();
    }
    Ok(op)
}

// ---------------------------------------------------------------------------
// Closed forms

fn df(ff: &FormFactors) -> f64 {
    ff.d as f64
}

fn need_d(d: usize, min: usize, what: &str) -> Result<()> {
    if d < min {
        return Err(Error::InvalidArgument(format!("{what} needs d >= {min}, got {d}")));
    }
    Ok(())
}

/// Frame potential and its lower bound `d^{−2k}|tr U|^{4k}` for `k = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePotential {
    pub value: f64,
    pub lower_bound: f64,
}

/// `F⁽¹⁾ = d²/(d²−1) (d² c̃₄ − 2c̃₂ + 1) = (c₄ − 2c₂ + d²)/(d²−1)`.
pub fn frame_potential_k1(ff: &FormFactors) -> Result<FramePotential> {
    need_d(ff.d, 2, "frame potential")?;
    let d = df(ff);
    Ok(FramePotential { value: (ff.c4 - 2.0 * ff.c2 + d * d) / (d * d - 1.0), lower_bound: ff.c4 / (d * d) })
}

/// `L₁ = (d c̃₂ + 1)/(d + 1)`.
pub fn loschmidt1(ff: &FormFactors) -> Result<f64> {
    need_d(ff.d, 2, "loschmidt1")?;
    let d = df(ff);
    Ok((d * ff.tilde2() + 1.0) / (d + 1.0))
}

/// `OTOC₂ = (c₂−1)/(d²−1)·‖A‖₂²/d + (d²−c₂)/(d²−1)·|tr A|²/d²`.
pub fn otoc2(ff: &FormFactors, tr_a: Complex64, norm2_a_sq: f64) -> Result<f64> {
    need_d(ff.d, 2, "otoc2")?;
    let d = df(ff);
    let den = d * d - 1.0;
    Ok((ff.c2 - 1.0) / den * norm2_a_sq / d + (d * d - ff.c2) / den * tr_a.norm_sqr() / (d * d))
}

/// Four-point OTOC for commuting, traceless, unitary Hermitian `A, B` with
/// `tr(AB) = 0` (Pauli strings on disjoint sites).
pub fn otoc4_pauli(ff: &FormFactors) -> Result<f64> {
    need_d(ff.d, 4, "otoc4")?;
    let d = df(ff);
    let s = ff.c4 - 4.0 * ff.c2 + ff.c2_2t;
    Ok((d * (s - d * d + 9.0) - 6.0 * ff.re_c3()) / (d * (d.powi(4) - 10.0 * d * d + 9.0)))
}

/// Loschmidt echo of the second kind for a Pauli perturbation.
pub fn loschmidt2_pauli(ff: &FormFactors) -> Result<f64> {
    need_d(ff.d, 4, "loschmidt2")?;
    let d = df(ff);
    let d2 = d * d;
    let s = ff.c4 - 4.0 * ff.c2 + ff.c2_2t;
    Ok(((d2 - 6.0) * s - 2.0 * d * ff.re_c3() + d2 * d2 - 9.0 * d2) / (d2 * (d2 * d2 - 10.0 * d2 + 9.0)))
}

/// Large-`d` limits `(c̃₄ − d⁻², c̃₄ + d⁻²)` of OTOC₄ and L₂.
pub fn otoc4_loschmidt2_large_d(ff: &FormFactors) -> (f64, f64) {
    let d2 = df(ff).powi(2);
    (ff.tilde4() - 1.0 / d2, ff.tilde4() + 1.0 / d2)
}

/// Averaged purity `tr ψ_A(t)²` of the evolved state.
///
/// Pure states use `purity_a`; mixed states also use `purity_psi` and
/// `purity_b`.
pub fn entanglement_purity(ff: &FormFactors, p: &SceneParams) -> Result<f64> {
    p.validate()?;
    need_d(ff.d, 4, "entanglement")?;
    let d = df(ff);
    let (da, db) = (p.da as f64, p.db as f64);
    let s = ff.c4 - 4.0 * ff.c2 + ff.c2_2t;
    let rc2 = 2.0 * ff.re_c3();
    if (p.purity_psi - 1.0).abs() < 1e-12 {
        let num = (d + 1.0) * p.purity_a * (s + rc2)
            + (-s - rc2 - 3.0 * d * d + 2.0 * d.powi(3) + d.powi(4)) * (da + db);
        Ok(num / (d * d * (d + 3.0) * (d + 1.0) * (d - 1.0)))
    } else {
        let (pp, pa, pb) = (p.purity_psi, p.purity_a, p.purity_b);
        let m1 = d * d * pa - da * da * db * pp - da * db * db - 2.0 * d * pb + 3.0 * da + 3.0 * db * pp - 3.0 * pa;
        let m2 = d * d * pb - da * da * db - da * db * db * pp - 2.0 * d * pa + 3.0 * da * pp + 3.0 * db - 3.0 * pb;
        let num = s * m1 + rc2 * m2 + d * d * (d * d - 9.0) * (da * db * db - da + pp * (da * da * db - db));
        Ok(num / (d * d * (d * d - 1.0) * (d * d - 9.0)))
    }
}

/// Lower bound `−log tr ψ_A(t)²` on the averaged 2-Rényi entanglement.
pub fn entanglement_bound(ff: &FormFactors, p: &SceneParams) -> Result<Bound> {
    let (v, c) = clamped(entanglement_purity(ff, p)?, f64::ln);
    Ok(Bound { value: -v, clamped: c })
}

/// Large-`d` form `−log[2d^{−1/2} + c̃₄(tr ψ_A² − 2d^{−1/2})]` for `dA = dB = √d`.
pub fn entanglement_bound_large_d(ff: &FormFactors, purity_a: f64) -> f64 {
    let s = 2.0 / df(ff).sqrt();
    -(s + ff.tilde4() * (purity_a - s)).ln()
}

/// The two factors `g̃₁, g̃₂` inside the TMI bound.
pub fn tmi_factors(ff: &FormFactors, p: &SceneParams) -> Result<(f64, f64)> {
    p.validate()?;
    need_d(ff.d, 4, "tmi")?;
    let d = df(ff);
    let d2 = d * d;
    let s = (p.dc * p.dc + p.dd * p.dd) as f64;
    let n = d.powi(3) * (d2 * d2 - 10.0 * d2 + 9.0);
    let w = d2 - s + 1.0;
    let rc = ff.re_c3();
    let k = ff.c4 + ff.c2_2t;
    let g1 = ((d * k - 4.0 * d * ff.c2 - 6.0 * rc) * w + d.powi(3) * (d2 - 9.0) * (s - 2.0)) / n;
    let g2 = ((12.0 * ff.c2 - 3.0 * k + 2.0 * d * rc) * w + d2 * (d2 - 9.0) * (2.0 * d2 - s)) / n;
    Ok((g1, g2))
}

/// Upper bound `log₂ d + log₂ g̃₁ + log₂ g̃₂` on the averaged 2-Rényi TMI.
pub fn tmi_bound(ff: &FormFactors, p: &SceneParams) -> Result<Bound> {
    let (g1, g2) = tmi_factors(ff, p)?;
    let (l1, c1) = clamped(g1, f64::log2);
    let (l2, c2) = clamped(g2, f64::log2);
    Ok(Bound { value: df(ff).log2() + l1 + l2, clamped: c1 || c2 })
}

/// Large-`d` TMI bound `log₂(2 − 3c̃₄ + 2Re c̃₃) + log₂(c̃₄ + (2 − c̃₄)/d)`.
pub fn tmi_bound_large_d(ff: &FormFactors) -> f64 {
    let (t3, t4) = (ff.tilde3().re, ff.tilde4());
    (2.0 - 3.0 * t4 + 2.0 * t3).log2() + (t4 + (2.0 - t4) / df(ff)).log2()
}

/// Averaged 2-coherence `1 − tr(𝒟_B ψ_t)²` of a pure state.
pub fn coherence(ff: &FormFactors, p: &SceneParams) -> Result<f64> {
    p.validate()?;
    need_d(ff.d, 2, "coherence")?;
    let d = df(ff);
    let x = ff.c4 + ff.c2_2t + 2.0 * ff.re_c3() - 4.0 * ff.c2;
    let num = d * d * (d - 1.0).powi(2) * (d + 3.0) + 2.0 * x - (d + 1.0) * p.deph_purity * x;
    Ok(num / (d * d * (d * d - 1.0) * (d + 3.0)))
}

/// Large-`d` coherence `1 − c̃₄ tr(𝒟_B ψ)²`.
pub fn coherence_large_d(ff: &FormFactors, deph_purity: f64) -> f64 {
    1.0 - ff.tilde4() * deph_purity
}

/// Coherence averaged over a random basis: `Pur − (1 + Pur)/(d + 1)`.
pub fn coherence_random_basis(purity: f64, d: usize) -> f64 {
    purity - (1.0 + purity) / (d as f64 + 1.0)
}

/// Averaged squared 2-norm distance `‖ψ_A(t) − ω_A‖₂²` between the reduced
/// state and its dephased equilibrium, for pure `ψ`.
pub fn convergence_f(ff: &FormFactors, p: &SceneParams) -> Result<f64> {
    p.validate()?;
    need_d(ff.d, 4, "convergence")?;
    let d = df(ff);
    let (da, pa) = (p.da as f64, p.purity_a);
    let k = da * pa * (d + 1.0) - d - da * da;
    let x = ff.c4 + ff.c2_2t + 2.0 * ff.re_c3();
    let poly = (d.powi(4) + 3.0 * d.powi(3) - 3.0 * d * d - 7.0 * d + 2.0) * da * da
        + (d.powi(3) + 4.0 * d * d + 5.0 * d - 2.0) * da * pa
        - d.powi(4)
        - 4.0 * d.powi(3)
        - d * d
        + 2.0 * d;
    let num = (d + 2.0) * k * x - 2.0 * (d * d + 5.0 * d + 2.0) * k * ff.c2 + d * poly;
    Ok(num / (d * d * da * (d * d - 1.0) * (d + 2.0) * (d + 3.0)))
}

/// Large-`d` form `c̃₄(1 − 1/dA) + (dA² − 1)/(dA d)`.
pub fn convergence_f_large_d(ff: &FormFactors, da: usize) -> f64 {
    let a = da as f64;
    ff.tilde4() * (1.0 - 1.0 / a) + (a * a - 1.0) / (a * df(ff))
}

/// Normalized work `(d² − c₂)/(d² − 1)`.
pub fn work(ff: &FormFactors) -> Result<f64> {
    need_d(ff.d, 2, "work")?;
    let d2 = df(ff).powi(2);
    Ok((d2 - ff.c2) / (d2 - 1.0))
}

/// Variance of `tr(H₀ ψ_t)` for `ψ` an eigenstate of `H₀` (absolute units).
pub fn work_variance(ff: &FormFactors, p: &SceneParams) -> Result<f64> {
    need_d(ff.d, 2, "work fluctuations")?;
    let d = df(ff);
    let (d2, d3, d4, d5) = (d * d, d.powi(3), d.powi(4), d.powi(5));
    let rc = ff.re_c3();
    let c2 = ff.c2;
    let sq = ff.c4;
    let k = ff.c4 + ff.c2_2t;
    let (e0, eh, h2) = (p.e0, p.e_ht, p.tr_h0_sq);
    let a = d4 + d3 - d2 - d;
    let b = d4 + 5.0 * d3 + 6.0 * d2;
    let g_e0 = -2.0 * rc * a + sq * b - c2 * (2.0 * d5 + 4.0 * d4 + 4.0 * d3 + 10.0 * d2 + 4.0 * d) - k * a
        + 2.0 * d5
        + 7.0 * d4
        + 3.0 * d3;
    let g_mix = 4.0 * rc * a - 2.0 * sq * b + c2 * (4.0 * d5 + 8.0 * d4 + 8.0 * d3 + 20.0 * d2 + 8.0 * d) + 2.0 * k * a
        - 4.0 * d5
        - 14.0 * d4
        - 6.0 * d3;
    let g_eh = -2.0 * rc * (d4 - d2) + sq * b - c2 * (4.0 * d5 + 10.0 * d4 + 6.0 * d3 + 4.0 * d2) - k * (d4 - d2)
        + d.powi(7)
        + 4.0 * d.powi(6)
        + 4.0 * d5
        + 3.0 * d4;
    let g_h2 = -2.0 * rc * (d2 - 1.0) + c2 * (2.0 * d4 + 6.0 * d3 + 2.0 * d2 - 6.0 * d - 4.0) - k * (d2 - 1.0)
        - d.powi(6)
        - 4.0 * d5
        - 2.0 * d4
        + 4.0 * d3
        + 3.0 * d2;
    let num = e0 * e0 * g_e0 + e0 * eh * g_mix + eh * eh * g_eh + h2 * g_h2;
    Ok(-num / (d2 * (d - 1.0).powi(2) * (d + 1.0).powi(2) * (d + 2.0) * (d + 3.0)))
}

/// Normalized fluctuations `Var / (tr H₀²/d − E_HT²)`.
pub fn work_fluctuations(ff: &FormFactors, p: &SceneParams) -> Result<f64> {
    let spread = p.tr_h0_sq / df(ff) - p.e_ht * p.e_ht;
    if !(spread > 1e-300) {
        return Err(Error::InvalidArgument("degenerate H0: tr H0²/d must exceed E_HT²".into()));
    }
    Ok(work_variance(ff, p)? / spread)
}

/// Large-`d` fluctuations `h c̃₂ + 1/d`, `h = 4E₀E_HT/(tr H₀²/d − E_HT²)`.
pub fn work_fluctuations_large_d(ff: &FormFactors, p: &SceneParams) -> f64 {
    let spread = p.tr_h0_sq / df(ff) - p.e_ht * p.e_ht;
    let h = 4.0 * p.e0 * p.e_ht / spread;
    h * ff.tilde2() + 1.0 / df(ff)
}

/// Lower and upper bounds on the normalized extractable work.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyBounds {
    pub lower: f64,
    pub upper: f64,
    pub clamped: bool,
}

/// Finite-`d` bounds: lower `W̃ − ε⁻¹ log dA`, upper `W̃ + ε⁻¹ log tr ψ_A(t)²`.
pub fn free_energy_bounds(ff: &FormFactors, p: &SceneParams) -> Result<FreeEnergyBounds> {
    if !(p.beta_eps > 0.0) {
        return Err(Error::InvalidArgument("beta_eps must be positive".into()));
    }
    if p.da < 2 {
        return Err(Error::InvalidArgument("free energy needs dA >= 2".into()));
    }
    let w = work(ff)?;
    let (lp, c) = clamped(entanglement_purity(ff, p)?, f64::ln);
    Ok(FreeEnergyBounds {
        lower: w - (p.da as f64).ln() / p.beta_eps,
        upper: w + lp / p.beta_eps,
        clamped: c,
    })
}

/// Large-`d` bounds with `log[1 + c̃₄(dA − 1)] − log dA` for the upper one.
pub fn free_energy_bounds_large_d(ff: &FormFactors, p: &SceneParams) -> Result<FreeEnergyBounds> {
    let w = work(ff)?;
    let la = (p.da as f64).ln();
    Ok(FreeEnergyBounds {
        lower: w - la / p.beta_eps,
        upper: w + ((1.0 + ff.tilde4() * (p.da as f64 - 1.0)).ln() - la) / p.beta_eps,
        clamped: false,
    })
}

/// Probes of a twirled CP map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpProbes {
    pub loschmidt1_cp: f64,
    pub purity_out: Option<f64>,
}

/// `L₁(Q) = ((d² − tr𝒦) + d Pur (tr𝒦 − 1)) / (d(d² − 1))`; for dephasing the
/// output purity equals it.
pub fn cp_probes(spec: &CPMapSpec, purity: f64) -> Result<CpProbes> {
    if !(purity > 0.0 && purity <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("purity {purity} outside (0, 1]")));
    }
    need_d(spec.d, 2, "cp probes")?;
    let d = spec.d as f64;
    let tk = spec.trace_of_k.re;
    let l1 = ((d * d - tk) + d * purity * (tk - 1.0)) / (d * (d * d - 1.0));
    let purity_out = (spec.kind == CpKind::Dephasing).then_some(l1);
    Ok(CpProbes { loschmidt1_cp: l1, purity_out })
}

/// Chebyshev and Lévy tail bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityBounds {
    pub chebyshev_c2: f64,
    pub chebyshev_c4: f64,
    pub levy: f64,
}

/// Chebyshev bounds from averaged rescaled moments (`c̄₂ = ⟨c̃₂⟩`,
/// `c̄₄ = ⟨c̃₄⟩`) and the Lévy bound for a `k = 1` probe with `‖O‖₁ = 1`.
pub fn typicality_bounds(avg: &FormFactors, delta: f64) -> Result<TypicalityBounds> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let (c2, c4) = (avg.tilde2(), avg.tilde4());
    let d = avg.d as f64;
    Ok(TypicalityBounds {
        chebyshev_c2: (c4 - c2 * c2) / (delta * delta),
        chebyshev_c4: c4 / (delta * delta),
        levy: levy_bound(avg.d, 1, d * d, 1.0, delta),
    })
}

/// `4 exp{−d δ² tr²(T) / (72 k² ‖O‖₁² π³)}`.
pub fn levy_bound(d: usize, k: usize, trace_t: f64, norm1_o: f64, delta: f64) -> f64 {
    let pi3 = std::f64::consts::PI.powi(3);
    let kf = k as f64;
    4.0 * (-(d as f64) * delta * delta * trace_t * trace_t / (72.0 * kf * kf * norm1_o * norm1_o * pi3)).exp()
}

/// Wigner–Yanase–Dyson skew information `tr(X²ρ_t) − tr(X ρ_t^{1−η} X ρ_t^η)`
/// averaged over the isospectral twirl, through the generic contraction.
pub fn wyd_skew(ff: &FormFactors, x: &CMatrix, rho: &CMatrix, eta: f64) -> Result<f64> {
    let d = ff.d;
    if x.nrows() != d || x.ncols() != d || rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Shape(format!("X and rho must be {d}x{d}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} outside (0, 1)")));
    }
    crate::linalg::check_density(rho, 1e-9)?;
    let pow = |a: f64| crate::linalg::hermitian_fn(rho, move |l| l.max(0.0).powf(a));
    let (ra, rb) = (pow(1.0 - eta)?, pow(eta)?);
    let x2 = x * x;
    let df = d as f64;
    let first = generic_probe(&r2(ff)?, &Permutation::parse(2, "(12)")?, &Observable::product(vec![x2, rho.clone()])?)?;
    let second = generic_probe(
        &r4(ff)?,
        &Permutation::parse(4, "(1423)")?,
        &Observable::product(vec![x.clone(), x.clone(), ra, rb])?,
    )?;
    Ok((df * (first - second)).re)
}

// ---------------------------------------------------------------------------
// Closed enumeration used by the CLI

/// Probes with a closed form in the form factors and scene parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    FramePotential,
    Loschmidt1,
    Loschmidt2,
    Otoc2,
    Otoc4,
    Entanglement,
    Tmi,
    Coherence,
    Convergence,
    Work,
    WorkFluct,
    WorkFluctLargeD,
    FreeEnergyLower,
    FreeEnergyUpper,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 14] = [
        Self::FramePotential,
        Self::Loschmidt1,
        Self::Loschmidt2,
        Self::Otoc2,
        Self::Otoc4,
        Self::Entanglement,
        Self::Tmi,
        Self::Coherence,
        Self::Convergence,
        Self::Work,
        Self::WorkFluct,
        Self::WorkFluctLargeD,
        Self::FreeEnergyLower,
        Self::FreeEnergyUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FramePotential => "frame-potential",
            Self::Loschmidt1 => "loschmidt1",
            Self::Loschmidt2 => "loschmidt2",
            Self::Otoc2 => "otoc2",
            Self::Otoc4 => "otoc4",
            Self::Entanglement => "entanglement",
            Self::Tmi => "tmi",
            Self::Coherence => "coherence",
            Self::Convergence => "convergence",
            Self::Work => "work",
            Self::WorkFluct => "work-fluct",
            Self::WorkFluctLargeD => "work-fluct-large-d",
            Self::FreeEnergyLower => "free-energy-lower",
            Self::FreeEnergyUpper => "free-energy-upper",
        }
    }

    /// Evaluates the probe. OTOC₂ uses a traceless Pauli (`tr A = 0`,
    /// `‖A‖₂² = d`).
    pub fn evaluate(self, ff: &FormFactors, p: &SceneParams) -> Result<f64> {
        match self {
            Self::FramePotential => Ok(frame_potential_k1(ff)?.value),
            Self::Loschmidt1 => loschmidt1(ff),
            Self::Loschmidt2 => loschmidt2_pauli(ff),
            Self::Otoc2 => otoc2(ff, 0.0.into(), ff.d as f64),
            Self::Otoc4 => otoc4_pauli(ff),
            Self::Entanglement => Ok(entanglement_bound(ff, p)?.value),
            Self::Tmi => Ok(tmi_bound(ff, p)?.value),
            Self::Coherence => coherence(ff, p),
            Self::Convergence => convergence_f(ff, p),
            Self::Work => work(ff),
            Self::WorkFluct => work_fluctuations(ff, p),
            Self::WorkFluctLargeD => Ok(work_fluctuations_large_d(ff, p)),
            Self::FreeEnergyLower => Ok(free_energy_bounds(ff, p)?.lower),
            Self::FreeEnergyUpper => Ok(free_energy_bounds(ff, p)?.upper),
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown probe '{s}'")))
    }
}
