//! Policy/value network, training, replay buffer and checkpoints.

pub mod buffer;
pub mod checkpoint;
pub mod network;
pub mod train;

pub use buffer::{read_examples, write_examples, ReplayBuffer, TrainingExample};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use network::{Batch, Dropout, Model, NetShape, Network, Prediction, Scalar};
pub use train::{loss, make_batch, train, Adam, TrainConfig, TrainOutcome};
