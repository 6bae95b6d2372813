//! Crouzeix-Raviart finite elements for quasi-static contact with Tresca friction.
//!
//! The pipeline is: build a [`Mesh`], lay out the constrained [`CrSpace`],
//! assemble the jump-stabilized stiffness ([`assembly`]), then march the
//! backward-Euler scheme with an Uzawa multiplier iteration ([`solver`]).
//! [`analysis`] holds the energy norm and convergence tooling and [`study`]
//! drives configured experiments.
//!
//! Every numerical type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the double-precision instantiation used by the CLI.

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod cr_space;
pub mod error;
pub mod material;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use analysis::{energy_norm, eoc, inter_mesh_error, EnergyNormBreakdown};
pub use assembly::{assemble_load, assemble_stiffness, DiscreteSystem, LoadSpec};
pub use cr_space::{interpolate_cr, prolongate, CrFunction, CrSpace};
pub use material::{MaterialModel, PlaneAssumption, SymTensor2};
pub use mesh::{BoundaryLabel, BoundarySegment, Domain, Mesh, Side};
pub use solver::{march, FrictionState, TimeGrid, TrajectorySolution, UzawaConfig, UzawaSolver};

pub type Domain64 = Domain<f64>;
pub type Mesh64 = Mesh<f64>;
pub type Material64 = MaterialModel<f64>;
pub type CrSpace64 = CrSpace<f64>;
pub type CrFunction64 = CrFunction<f64>;
pub type LoadSpec64 = LoadSpec<f64>;
pub type DiscreteSystem64 = DiscreteSystem<f64>;
pub type UzawaSolver64 = UzawaSolver<f64>;
pub type Trajectory64 = TrajectorySolution<f64>;

pub type Mesh32 = Mesh<f32>;
pub type CrSpace32 = CrSpace<f32>;
pub type Material32 = MaterialModel<f32>;
