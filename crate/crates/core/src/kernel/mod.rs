//! Dense float64 math for the fixed two-layer MLP used by both networks.

mod adam;
mod gradcheck;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use gradcheck::{gradient_check, GradCheckReport, FD_STEP};
pub use matrix::Matrix;
pub use mlp::{
    backward_mlp, bce_loss, bce_with_logits, forward_mlp, leaky_relu, leaky_relu_derivative, log_sigmoid, sigmoid, Backward,
    ForwardCache, MlpGrads, MlpParams, BCE_EPSILON,
};
