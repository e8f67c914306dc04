//! Symplectic tomography of classical and quantum states of a particle.
//!
//! The crate works with three equivalent descriptions of a state: a
//! phase-space function (probability density `f` or Wigner function `W`),
//! its tomogram `ω(X, μ, ν)`, and an operator matrix in the oscillator
//! basis. Classical states are required to have a nonnegative density;
//! quantum states a positive semidefinite density operator. The
//! [`admissibility`] module classifies states against both requirements and
//! shows that neither set contains the other at any value of `hbar`.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the scalar to `f64`.

pub mod admissibility;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod num;
pub mod scaling;
pub mod tomography;
pub mod uncertainty;
pub mod weyl;

pub use error::{Error, Result};
pub use grid::{ComplexGrid, GridKind, PhaseGrid, Window};
pub use model::{Frame, GaussianState, Moments, ScaleParams, WindowMode};
pub use num::Real;
pub use tomography::{Marginal, Tomogram};
pub use weyl::{OperatorMatrix, Spectrum, WeylConfig};

pub type PhaseGrid64 = PhaseGrid<f64>;
pub type PhaseGrid32 = PhaseGrid<f32>;
pub type Window64 = Window<f64>;
pub type Frame64 = Frame<f64>;
pub type GaussianState64 = GaussianState<f64>;
pub type GaussianState32 = GaussianState<f32>;
pub type Moments64 = Moments<f64>;
pub type Moments32 = Moments<f32>;
pub type ScaleParams64 = ScaleParams<f64>;
pub type Tomogram64 = Tomogram<f64>;
pub type OperatorMatrix64 = OperatorMatrix<f64>;
pub type WeylConfig64 = WeylConfig<f64>;
