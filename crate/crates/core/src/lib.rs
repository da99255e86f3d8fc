//! Multi-class variational quantum classifiers built from tree tensor
//! network (TTN) and MERA circuits, simulated on a dense statevector.
//!
//! The crate covers the whole pipeline: gate set and circuit builders,
//! qubit encoding and the two multi-class decoders, adjoint and
//! parameter-shift gradients, Adam training with early stopping, MNIST
//! ingestion with PCA, and XXZ ground-state datasets prepared by VQE.

pub mod autodiff;
pub mod baseline;
pub mod circuit;
pub mod codec;
pub mod error;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod mnist;
pub mod optim;
pub mod pca;
pub mod statevector;
pub mod train;
pub mod xxz;

pub use error::{Error, Result};
