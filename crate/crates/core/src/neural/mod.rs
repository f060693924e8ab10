//! Recurrent networks (RNN, LSTM, GRU) trained from scratch: min-max
//! scaling, sliding-window supervision, exact backpropagation through time,
//! Adam, dropout and early stopping.

pub mod adam;
pub mod checkpoint;
pub mod model;
pub mod scaler;
pub mod train;
pub mod window;

pub use adam::{adam_step, clip_global_norm, AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use model::{
    backprop, backprop_weighted, batch_loss, gru_forward, lstm_forward, rnn_forward, Architecture, CellKind,
    GradWorkspace, Gradients, RecurrentModel, TensorSpec, Trace,
};
pub use scaler::{scaler_fit_transform, RangeScaler};
pub use train::{predict, train, train_architecture, TrainConfig, TrainedNetwork};
pub use window::{make_windows, WindowedDataset, DEFAULT_SEQUENCE_LENGTH};
