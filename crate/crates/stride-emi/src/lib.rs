//! EMI removal for multi-coil MR acquisitions.
//!
//! The crate implements STRIDE, a per-column subtraction of EMI-sensor data
//! from coil images that optimizes for total-variation smoothness along the
//! readout direction, next to two EDITER-style k-space baselines. A
//! synthetic acquisition simulator and the usual repeated-acquisition
//! metrics (voxelwise SNR, EMI removal percentage, RMSE, Welch's t-test)
//! make the whole chain testable without scanner hardware.

pub mod array;
pub mod editer;
pub mod error;
pub mod eval;
pub mod fft;
pub mod io;
pub mod linalg;
pub mod prep;
pub mod report;
pub mod sim;
pub mod stats;
pub mod stride;

pub use array::{ComplexArray2D, Domain, MultiCoilAcquisition};
pub use error::{Error, Result};
