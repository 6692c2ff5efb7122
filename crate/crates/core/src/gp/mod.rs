//! The Gaussian-process teacher: kernels, exact GP regression, k-means
//! clustered GPs and the mapping of posterior moments to soft labels.

mod clustered;
mod kernel;
pub mod kmeans;
mod model;
mod soft;

pub use clustered::ClusteredGp;
pub use kernel::{KernelSpec, KernelTerm};
pub use kmeans::{kmeans, nearest_centroid, KMeans};
pub use model::{GpModel, Prediction};
pub use soft::{softmax, to_soft, SoftPrediction, Task};
