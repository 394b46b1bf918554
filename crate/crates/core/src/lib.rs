//! Isospectral twirling of unitary evolutions.
//!
//! The crate averages `U^{⊗k} ⊗ U^{†⊗k}` over the eigenbases of a Hamiltonian
//! with a fixed spectrum. The result depends on the spectrum only through the
//! spectral form factors `c₂, c₃, c₄, c₂(2t)`, so every probe of chaos built on
//! it (frame potential, Loschmidt echoes, OTOCs, entanglement, mutual
//! information, coherence, work) becomes a closed function of those numbers.
//!
//! Modules, bottom-up:
//!
//! - [`permgroup`]: symmetric groups, permutation operators, Gram matrix and
//!   Weingarten coefficients.
//! - [`special`]: Bessel `J₁`, Dawson function and friends.
//! - [`ensembles`]: spectra samplers, spacing densities, characteristic functions.
//! - [`formfactors`]: empirical and ensemble-averaged form factors.
//! - [`twirl`]: the operators `R⁽²⁾`, `R⁽⁴⁾` and their CP-map variants.
//! - [`probes`]: closed-form probes and the generic contraction.
//! - [`oracle`]: Monte Carlo ground truth.
//! - [`io`]: CSV and JSON emission.

pub mod ensembles;
pub mod error;
pub mod formfactors;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod permgroup;
pub mod probes;
pub mod special;
pub mod twirl;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
