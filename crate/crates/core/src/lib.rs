//! Space-time hybridized discontinuous Galerkin (HDG) discretization of the
//! two-dimensional evolutionary incompressible Navier–Stokes equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: simplicial meshes, face topology, metrics and time partitions;
//! * [`basis`]: orthonormal simplex bases, Legendre bases and quadrature;
//! * [`spaces`]: DOF maps for the element/facet spaces on a slab, discrete
//!   fields, evaluation, jumps and broken norms;
//! * [`forms`]: sparse assembly of the viscous, convective, pressure and
//!   temporal terms on one space-time slab;
//! * [`liftings`]: spatial liftings, discrete gradients, the time lifting and
//!   the discrete time derivative;
//! * [`projections`]: L² projections (time, element, divergence-free,
//!   facet), the DG time projection and tensor-product test functions;
//! * [`solver`]: Picard iteration per slab, sparse direct solves with optional
//!   static condensation, and time marching;
//! * [`verify`]: identity suites, inequality-constant estimation, refinement
//!   studies and energy reports;
//! * [`cli`]: configuration files, CSV/VTK output and the batch commands used
//!   by the `sthdg` binary.
//!
//! Every capability has a runnable program under `examples/`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod error;
pub mod forms;
pub mod liftings;
pub mod linalg;
pub mod mesh;
pub mod projections;
pub mod solver;
pub mod spaces;
pub mod verify;

pub use error::{HdgError, Result};
pub use mesh::{FaceTopology, MeshMetrics, Point, Rectangle, SpaceTimeLayout, SpatialMesh};
pub use spaces::{Discretization, DiscreteField, FieldRole, SlabSpace, VelocityPair};
