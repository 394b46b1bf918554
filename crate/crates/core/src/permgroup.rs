//! Symmetric groups in cycle representation, permutation operators on
//! `(C^d)^{⊗n}`, the Gram matrix `Ω_{πσ} = tr(T_π T_σ)` and its inverse, the
//! Weingarten matrix.
//!
//! Composition is right-to-left: `compose(a, b)` applies `b` first, so
//! `(12)∘(23) = (123)`, and permutation operators are a representation,
//! `T_a T_b = T_{a∘b}`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Complex64, Error, Result};

/// Largest degree accepted by [`enumerate_group`].
pub const MAX_DEGREE: usize = 8;
/// Largest degree for which the `n! × n!` Gram matrix is built.
pub const MAX_GRAM_DEGREE: usize = 6;
/// Largest `d^n` for which dense permutation matrices are built.
pub const MAX_DENSE_DIM: usize = 4096;

/// A permutation of `{0, …, n−1}` stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// The identity of `S_n`.
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// Builds a permutation from a 0-based image list.
    pub fn from_images(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{map:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    /// Builds a permutation of degree `n` from 1-based cycles, e.g.
    /// `from_cycles(4, &[&[1, 3], &[2, 4]])` is `(13)(24)`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (k, &x) in c.iter().enumerate() {
                if x == 0 || x > n || used[x - 1] {
                    return Err(Error::InvalidPermutation(format!("bad cycle {c:?} for degree {n}")));
                }
                used[x - 1] = true;
                map[x - 1] = c[(k + 1) % c.len()] - 1;
            }
        }
        Ok(Permutation { map })
    }

    /// Parses cycle notation such as `"(1423)"`, `"(12)(34)"` or `"e"`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Self::identity(n));
        }
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut cur: Option<Vec<usize>> = None;
        for ch in s.chars() {
            match ch {
                '(' => cur = Some(Vec::new()),
                ')' => cycles.push(cur.take().ok_or_else(|| Error::InvalidPermutation(s.into()))?),
                c if c.is_ascii_digit() => cur
                    .as_mut()
                    .ok_or_else(|| Error::InvalidPermutation(s.into()))?
                    .push(c.to_digit(10).unwrap() as usize),
                c if c.is_whitespace() || c == ',' => {}
                _ => return Err(Error::InvalidPermutation(s.into())),
            }
        }
        let refs: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
        Self::from_cycles(n, &refs)
    }

    /// Degree `n`.
    pub fn degree(&self) -> usize {
        self.map.len()
    }

    /// Image of `i` (0-based).
    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    /// The image list.
    pub fn images(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        compose(self, other)
    }

    /// Canonical cycles, fixed points included: each cycle starts at its
    /// smallest element and cycles are sorted by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                c.push(j);
                j = self.map[j];
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        cycle_count(self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for c in self.cycles() {
            if c.len() > 1 {
                any = true;
                write!(f, "(")?;
                for (k, x) in c.iter().enumerate() {
                    if self.map.len() > 9 && k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", x + 1)?;
                }
                write!(f, ")")?;
            }
        }
        if !any {
            write!(f, "e")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// All `n!` elements of `S_n`, lexicographic on the image list (identity first).
pub fn enumerate_group(n: usize) -> Result<Vec<Permutation>> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(n));
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![Permutation { map: cur.clone() }];
    while next_permutation(&mut cur) {
        out.push(Permutation { map: cur.clone() });
    }
    Ok(out)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `a ∘ b`: applies `b` first, then `a`.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    Ok(Permutation { map: b.map.iter().map(|&x| a.map[x]).collect() })
}

/// Number of cycles, fixed points included.
pub fn cycle_count(p: &Permutation) -> usize {
    let n = p.map.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if !seen[start] {
            count += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = p.map[j];
            }
        }
    }
    count
}

/// `tr(T_p) = d^{#cycles(p)}`.
pub fn trace_power(p: &Permutation, d: usize) -> f64 {
    (d as f64).powi(cycle_count(p) as i32)
}

/// Gram matrix of `S_n` and, once inverted, the Weingarten matrix.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub n: usize,
    pub d: usize,
    pub elements: Vec<Permutation>,
    pub omega: DMatrix<f64>,
    pub omega_inv: Option<DMatrix<f64>>,
    index: HashMap<Permutation, usize>,
}

impl WeingartenTable {
    /// Position of `p` in [`WeingartenTable::elements`].
    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// `Wg(π, σ) = (Ω⁻¹)_{πσ}`.
    pub fn wg(&self, pi: &Permutation, sigma: &Permutation) -> Option<f64> {
        let inv = self.omega_inv.as_ref()?;
        Some(inv[(self.index_of(pi)?, self.index_of(sigma)?)])
    }

    /// Largest entry of `|Ω⁻¹ Ω − 1|`.
    pub fn delta_residual(&self) -> Option<f64> {
        let inv = self.omega_inv.as_ref()?;
        let prod = inv * &self.omega;
        let m = prod.nrows();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        Some(worst)
    }
}

/// `Ω_{πσ} = d^{#cycles(π∘σ)}` over `S_n`.
pub fn gram_matrix(n: usize, d: usize) -> Result<WeingartenTable> {
    if n == 0 || n > MAX_GRAM_DEGREE {
        return Err(Error::DegreeOutOfRange(n));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let elements = enumerate_group(n)?;
    let m = elements.len();
    let mut omega = DMatrix::<f64>::zeros(m, m);
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            omega[(i, j)] = trace_power(&compose(a, b)?, d);
        }
    }
    let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    Ok(WeingartenTable { n, d, elements, omega, omega_inv: None, index })
}

/// Gram matrix together with its inverse; refuses `d < n`.
pub fn weingarten(n: usize, d: usize) -> Result<WeingartenTable> {
    if d < n {
        return Err(Error::SingularGram { n, d });
    }
    let mut table = gram_matrix(n, d)?;
    let inv = table
        .omega
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularGram { n, d })?;
    table.omega_inv = Some(inv);
    let res = table.delta_residual().unwrap_or(f64::INFINITY);
    if res > 1e-10 {
        return Err(Error::WeingartenResidual(res));
    }
    Ok(table)
}

/// `tr(T_p · A_1 ⊗ … ⊗ A_n)`: a product over cycles of `p` of
/// `tr(… A_{p²(m)} A_{p(m)} A_m)`.
pub fn permuted_trace(p: &Permutation, ops: &[CMatrix]) -> Result<Complex64> {
    if ops.len() != p.degree() {
        return Err(Error::Shape(format!("{} operators for degree {}", ops.len(), p.degree())));
    }
    let d = ops.first().map(|m| m.nrows()).unwrap_or(0);
    if ops.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::Shape("operators must all be square of equal size".into()));
    }
    Ok(permuted_trace_unchecked(p, ops))
}

pub(crate) fn permuted_trace_unchecked(p: &Permutation, ops: &[CMatrix]) -> Complex64 {
    let mut total = Complex64::new(1.0, 0.0);
    for c in p.cycles() {
        if c.len() == 1 {
            total *= ops[c[0]].trace();
            continue;
        }
        let mut prod = ops[c[0]].clone();
        for &m in &c[1..] {
            prod = &ops[m] * prod;
        }
        total *= prod.trace();
    }
    total
}

/// Dense `T_p` on `(C^d)^{⊗n}` with slot 1 the most significant index:
/// `T_p |i_1…i_n⟩ = |j⟩` with `j_{p(m)} = i_m`.
pub fn permutation_matrix(p: &Permutation, d: usize) -> Result<CMatrix> {
    let n = p.degree();
    let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > MAX_DENSE_DIM {
        return Err(Error::SizeGuard(dim, MAX_DENSE_DIM));
    }
    let mut m = CMatrix::zeros(dim, dim);
    let mut idx = vec![0usize; n];
    let mut j = vec![0usize; n];
    for a in 0..dim {
        unravel(a, d, &mut idx);
        for s in 0..n {
            j[p.map[s]] = idx[s];
        }
        m[(ravel(&j, d), a)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Row-major multi-index to flat index.
pub fn ravel(idx: &[usize], d: usize) -> usize {
    idx.iter().fold(0, |acc, &x| acc * d + x)
}

/// Flat index to row-major multi-index.
pub fn unravel(mut a: usize, d: usize, out: &mut [usize]) {
    for s in (0..out.len()).rev() {
        out[s] = a % d;
        a /= d;
    }
}

/// `tr(T_p X)` for a dense `X` on `(C^d)^{⊗n}` without building `T_p`.
pub fn trace_with_dense(p: &Permutation, d: usize, x: &CMatrix) -> Result<Complex64> {
    let n = p.degree();
    let dim = d.pow(n as u32);
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::Shape(format!("expected {dim}x{dim}, got {}x{}", x.nrows(), x.ncols())));
    }
    // tr(T X) = Σ_a (T X)_{aa} = Σ_a X_{T⁻¹a, a}: the row T⁻¹(a) is the column
    // index whose image under T is a, i.e. slots permuted by p⁻¹.
    let mut idx = vec![0usize; n];
    let mut j = vec![0usize; n];
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..dim {
        unravel(a, d, &mut idx);
        for s in 0..n {
            j[s] = idx[p.map[s]];
        }
        total += x[(ravel(&j, d), a)];
    }
    Ok(total)
}
