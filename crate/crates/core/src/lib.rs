//! Hamiltonian dynamics on the closed unit disc: flows, action functions,
//! Calabi invariants, periodic-orbit spectra and the checks built on them.

pub mod action;
pub mod flow;
pub mod geometry;
pub mod hamiltonian;
pub mod harness;
pub mod radial;
pub mod scalar;
pub mod spectrum;
pub mod tolerances;

pub use geometry::{GeometryError, LoopSample, PlanePoint};
pub use hamiltonian::{HamiltonianError, HamiltonianSpec};
pub use scalar::Scalar;

pub type Point = PlanePoint<f64>;
pub type Hamiltonian = HamiltonianSpec<f64>;
pub type Loop = LoopSample<f64>;

pub type Point32 = PlanePoint<f32>;
pub type Hamiltonian32 = HamiltonianSpec<f32>;
pub type Loop32 = LoopSample<f32>;
