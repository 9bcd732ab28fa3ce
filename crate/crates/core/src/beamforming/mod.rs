//! Location-based multibeam beamforming.
//!
//! The proposed design maximizes an average virtual SINR per user whose
//! interference weights are chosen so that its gradient is parallel to the
//! gradient of the deterministic sum-rate bound Σ_j log₂(1 + D_j/I_j).

mod algorithm;
mod problem;

pub use algorithm::{
    baseline_bf, run_algorithm1, AlgorithmConfig, Baseline, BeamformerSet, ChannelDrawFeedback,
    ExpectedFeedback, Feedback, Initializer, IterRecord,
};
pub use problem::{
    gradient_avg_virtual_sinr, gradient_upper_bound, instantaneous_sinr, project_tangent,
    real_angle, scatter_weights, update_weights, update_weights_with, virtual_sinr_weights,
    BfProblem, InterfererPower, NegativeWeights, WeightUpdate, MU_FLOOR,
};
