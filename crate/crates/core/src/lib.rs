//! Conductivity reconstruction from interior power densities
//! (acousto-electric tomography) on the unit disk.
//!
//! The pipeline is:
//!
//! * [`mesh`]: ring triangulations of the disk with marked boundary arcs,
//! * [`fem`]: P1 assembly, zero-mean Neumann solves and Sobolev Gram matrices,
//! * [`forward`]: boundary current patterns, potentials and power densities,
//! * [`sensitivity`]: the linearized power-density map and its exact discrete adjoint,
//! * [`inversion`]: noise model and steepest-descent Landweber iteration with
//!   discrepancy stopping,
//! * [`illposed`]: transfer matrix of the linearization, SVD and condition numbers,
//! * [`phantom`]: smooth test conductivities,
//! * [`io`] and [`cli`]: file formats and the `aet` command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod fem;
pub mod field;
pub mod forward;
pub mod illposed;
pub mod inversion;
pub mod io;
pub mod mesh;
pub mod phantom;
pub mod sensitivity;
pub mod sparse;

pub use error::{Error, Result};
pub use field::NodalField;
pub use fem::{InnerProductMode, InnerProductSpec};
pub use forward::{BoundaryCurrent, CurrentFamily, ForwardModel, ForwardState, MeasurementSet};
pub use mesh::{BoundaryArc, Mesh};
