//! Periodic Coulomb electrostatics with Ewald splitting by prolate spheroidal
//! wave functions.
//!
//! The potential `1/(4 pi r)` is split into a short-range part summed directly
//! over neighbours within a cutoff `r_c` and a smooth long-range part evaluated
//! on a uniform Fourier grid via spread / FFT / scale / IFFT / interpolate.
//! Two kernel families are provided:
//!
//! * [`SplitFamily::Pswf`] with [`WindowFamily::Pswf`]: the splitting kernel and
//!   the spreading window are both built from the order-zero prolate
//!   spheroidal wave function, which needs a markedly smaller grid for the
//!   same force accuracy.
//! * [`SplitFamily::Gaussian`] with [`WindowFamily::BSpline`]: the classical
//!   particle-mesh Ewald baseline.
//!
//! [`reference::direct_ewald`] is a mesh-free classical Ewald sum used as an
//! accuracy oracle.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; stage timings are then reported as zero.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::large_enum_variant
)]

extern crate alloc;

mod cells;
pub mod error;
pub mod ewald;
pub mod fft;
pub mod grid;
pub mod kernels;
pub mod math;
pub mod poly;
pub mod prolate;
pub mod reference;
pub mod system;
mod timer;

pub use error::{Error, Result};
pub use ewald::{
    build_plan, select_parameters, EnergyForces, EwaldPlan, ForceMethod, Overrides, SelectedParameters,
    StageTimings,
};
pub use grid::{FourierGrid, GridData, Space};
pub use kernels::{SplitFamily, SplitKernel, WindowFamily, WindowKernel};
pub use prolate::{solve_c, ProlateExpansion};
pub use reference::{direct_ewald, relative_force_error, ReferenceResult};
pub use system::ParticleSystem;
