//! Minimal numerical learning core.
//!
//! Everything the two detectors need, written out by hand: a row-major
//! [`Tensor`], layer-wise forward/backward passes for a small CNN layer set,
//! the Adam optimizer, PCA and a primal linear SVM. Layers are generic over
//! [`Scalar`] so the same code trains in `f32` and is gradient-checked in `f64`.

pub mod adam;
pub mod error;
pub mod exec;
pub mod gradcheck;
pub mod layers;
pub mod linalg;
pub mod params;
pub mod pca;
pub mod scalar;
pub mod svm;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use error::{MlError, Result};
pub use exec::Exec;
pub use layers::{softmax_cross_entropy, Layer, Mode};
pub use params::{ModelParams, NamedTensor};
pub use pca::{PcaModel, PcaSolver};
pub use scalar::Scalar;
pub use svm::{SvmConfig, SvmModel};
pub use tensor::Tensor;
