//! Numerical laboratory for the heterogeneous Wilson-Cowan neural field
//!
//! ```text
//! du_eps/dt = -u_eps + J^eps * f(x/eps, u_eps),   J^eps(x) = J(x, x/eps)
//! ```
//!
//! and its two-scale homogenized limit
//!
//! ```text
//! du_0/dt = -u_0 + J ** f(., u_0)
//! ```
//!
//! where `**` convolves jointly in the macroscopic variable and in the cell
//! variable. The crate provides the microstructure algebras ([`micro`]),
//! truncated periodic grids and the binary field format ([`grid`], [`io`]),
//! FFT and brute-force convolutions ([`convolve`]), the model right-hand sides
//! ([`model`]), Picard and Runge-Kutta time integration ([`solver`]) and the
//! two-scale convergence diagnostics ([`sigma`]). Independent reference
//! computations used to cross-check the fast paths live in [`oracle`].

pub mod convolve;
pub mod error;
pub mod grid;
pub mod io;
pub mod micro;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod sigma;
pub mod solver;
mod sum;

pub use convolve::{
    cell_conv_direct, conv_direct, conv_macro, double_conv, double_conv_direct, young_check, ConvPlan, MacroSpectrum,
    TwoScaleSpectrum, YoungReport,
};
pub use error::{Error, Result};
pub use grid::{sample_trace, CellGrid, MacroField, MacroGrid, TwoScaleField};
pub use micro::{AlgebraKind, AlgebraTag, MicroFunction};
pub use model::{
    apply_firing, apply_firing_two_scale, hetero_rhs, homog_rhs, kernel_mass, kernel_trace, Activation, Dynamics,
    FiringRate, HeteroOperator, HomogOperator, KernelSpec, KernelTerm,
};
pub use profile::{MacroProfile, Profile};
pub use sigma::{PairingReport, StrongSigmaReport, TestFunction, TimeFactor};
pub use solver::{
    apriori_monitor, homog_solve, picard_solve, rk4_solve, AprioriReport, Integrator, PicardConfig, SolveReport,
    SubintervalRecord, TimeGrid, Trajectory,
};
pub use sum::pairwise_sum;
