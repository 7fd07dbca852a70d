//! Complex spectra (normal, quasinormal and total-transmission modes) of one-dimensional
//! open wave systems, and supersymmetric transformations between partner potentials.

pub mod bilinear;
pub mod blackhole;
pub mod error;
pub mod io;
pub mod ode;
pub mod potential;
pub mod propagation;
pub mod pt;
pub mod regression;
pub mod scalar;
pub mod scattering;
pub mod spectral;
pub mod special;
pub mod superpotential;
pub mod susy;
pub mod wekge;

pub use error::{Error, Result};
pub use potential::{BhParams, Decay, NumericTable, Potential, PotentialKind, PtParams, Support};
pub use propagation::{OutgoingSolution, PropagationOptions, Side};
pub use scalar::{Cx, Real};
pub use spectral::{Mode, ModeKind, Region, SolverOptions, Which};

pub type Potential64 = Potential<f64>;
pub type Complex64 = Cx<f64>;
