#![allow(dead_code)]

use isotwirl::ensembles::{substream, EnsembleKind, Spectrum};
use isotwirl::{CMatrix, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn ginibre<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        Complex64::new(a, b)
    })
}

pub fn random_state<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let g = ginibre(d, rng);
    let n = g.column(0).norm();
    g.column(0).iter().map(|z| z / n).collect()
}

pub fn random_spectrum(d: usize, seed: u64) -> Spectrum {
    let mut rng = substream(seed, 0);
    let e: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    Spectrum::from_energies(e, EnsembleKind::Gde).unwrap()
}

/// Pauli `Z` (or `X`) on one qubit of `log₂ d` qubits.
pub fn pauli(d: usize, site: usize, x: bool) -> CMatrix {
    let one = CMatrix::identity(2, 2);
    let f = if x {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    } else {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    };
    (0..d.trailing_zeros() as usize).fold(CMatrix::identity(1, 1), |m, q| m.kronecker(if q == site { &f } else { &one }))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
