//! A small self-contained neural-network engine: dense/convolution/pool
//! layers with hand-written backpropagation, Adam, seeded training, and a
//! finite-difference gradient oracle.

pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod tensor;
pub mod train;

pub use gradcheck::{grad_check, GradCheckReport};
pub use layers::{Layer, Shape};
pub use model::{
    build_cnn, build_mlp, cnn_shape_plan, mlp_widths, BuildError, CnnArchitecture, InternalLayer,
    Model, ModelIoError, ModelMeta, CLASSES, INPUT_LEN, MAX_INTERNAL_LAYERS,
};
pub use tensor::Real;
pub use train::{accuracy_percent, train, Adam, EpochStats, TrainConfig, TrainData, TrainError};
