//! Minimal dense numerical kernel.
//!
//! Every layer carries a hand-written backward pass; there is no autograd
//! graph. All training math runs in `f64`; checkpoints store `f32`.

mod checkpoint;
mod gradcheck;
mod init;
mod layers;
mod loss;
mod lstm;
mod optim;
mod tensor;
pub mod vecops;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, TensorEntry, CHECKPOINT_MAGIC};
pub use gradcheck::grad_check;
pub use init::{glorot_limit, glorot_uniform, uniform};
pub use layers::{dense_backward, dense_forward, dropout, Activation, DenseGrads, DropoutMask};
pub use loss::{loss, LossKind, BCE_CLAMP};
pub use lstm::{
    lstm_cell_backward, lstm_cell_step, lstm_cell_step_cached, LstmCellParams, LstmStepCache,
};
pub use optim::{adagrad_step, adam_step, AdamState, ADAGRAD_EPS};
pub use tensor::Tensor;
