//! Precision bounds for the joint estimation of displacement and squeezing
//! of pure single- and two-mode Gaussian states.
//!
//! * [`gaussian`]: phase-space algebra, general-dyne measurements and their
//!   outcome statistics.
//! * [`bounds`]: QFI, SLD Cramér–Rao bound, Uhlmann curvature, asymptotic
//!   incompatibility and classical Fisher information of Gaussian detection.
//! * [`hcrb`]: the Holevo Cramér–Rao bound and the general-dyne gap.
//! * [`fock`]: a brute-force truncated Fock-space oracle for all of the above.

pub mod bounds;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod hcrb;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod report;

pub use error::{Error, Result};
pub use model::{Model, ModelPoint};
pub use report::{bounds_report, BoundsReport};
