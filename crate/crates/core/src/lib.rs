//! Multi-kernel correntropy (MKC) for robust learning.
//!
//! The crate provides the MKC similarity measure and its special cases
//! (correntropy, mixture correntropy), a fixed-point solver that trains
//! linear-in-parameter models by maximizing the sample MKC of their errors,
//! an automatic procedure that fits the kernel parameters to the error
//! distribution, and the data generators and benchmark harness used to
//! compare MSE, MCC, mixture MCC and MMKCC.
//!
//! ```
//! use mkc::kernel::{mkc_estimate, MkcParams};
//!
//! let params = MkcParams::simplex(vec![0.5, 0.5], vec![-1.0, 2.0], vec![0.5, 1.5]).unwrap();
//! let v = mkc_estimate(&[0.0], &params).unwrap();
//! assert!((v - 0.1086610).abs() < 1e-7);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod datagen;
pub mod density;
pub mod error;
pub mod kernel;
mod linalg;
pub mod models;
pub mod params;
pub mod schedule;
pub mod solver;

pub use error::{MkcError, Result};
pub use kernel::MkcParams;
pub use nalgebra;
