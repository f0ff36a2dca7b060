//! Two-layer graph convolutional network with hand-written gradients.
//!
//! For a graph with renormalized adjacency `A` (see [`NormalizedAdjacency`])
//! and normalized features `X`, the model scores every node as
//!
//! ```text
//! s = sigmoid(A · relu(A · X · W1 + b1) · w2 + b2)
//! ```
//!
//! and is trained with binary cross-entropy restricted to the nodes that
//! were not observed as infected.

mod adam;
mod adjacency;
mod checkpoint;
mod model;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use adjacency::NormalizedAdjacency;
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{
    backward, batch_loss_and_grad, forward, masked_bce, ForwardCache, GcnInput, GcnModel, GraphSample,
    PROB_CLAMP,
};
pub use train::{train, validation_auc, TrainConfig, TrainHistory, TrainOutcome, Validation};
