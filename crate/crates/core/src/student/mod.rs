//! The student: an MLP with a representation/head split, exact
//! backpropagation, and Adam with per-sample step-size modulation.

mod adam;
mod loss;
mod net;
mod train;

pub use adam::{adam_step, AdamState};
pub use loss::{batch_loss_and_grad, loss_and_grad, LossKind, LossSpec, LOG_CLIP};
pub use net::{Activation, Architecture, ForwardCache, Layer, StudentNet};
pub use train::{
    train_epochs, train_step, train_steps, train_weighted_sampling, train_weighted_steps,
    WeightedSampler,
};
