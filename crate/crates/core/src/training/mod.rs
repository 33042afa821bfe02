mod config;
mod dataset;
mod fit;
mod objectives;
mod optimizer;
mod params;

pub use config::{OptimizerKind, SigmaInit, TrainConfig};
pub use dataset::{argmax, BagDataset, LabeledDataset, WeightedInput};
pub use params::{ModelGrads, ModelParams, SideKernel, SideParams, Trainable};
pub use objectives::{loss_mse, loss_xent, objective_gradients, objective_value, Loss, Objective, XENT_CLAMP};
pub use fit::{
    fit_discriminative, fit_llp, fit_llp_validated, fit_mle, fit_mle_joint, fit_nonparametric, median_heuristic,
    TraceEntry, TrainReport,
};
pub(crate) use fit::shuffle as shuffle_indices;
