//! Hybrid classical-quantum transfer learning with amplitude-encoded features.
//!
//! A frozen image network (outside this crate) turns each image into a feature
//! vector, stored as AEFV text ([`data`]). Each vector is amplitude-encoded into an
//! `n`-qubit register ([`statevector`]), evolved by a parameterized circuit
//! ([`circuits`]), read out as Pauli-Z expectations and mapped to class
//! probabilities by an affine head ([`model`]). Training uses exact
//! parameter-shift gradients ([`grad`]) with Adam ([`optim`]); [`metrics`] covers
//! accuracy and ROC/AUC and [`cli`] the command-line workflow.

pub mod circuits;
pub mod cli;
pub mod data;
pub mod error;
pub mod grad;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod statevector;

pub use circuits::{build_tlqcnn, build_tlqnn, param_count, Circuit, ModelKind, ParamLayout, PoolingPlan};
pub use data::{gen_blobs, gen_synthetic, read_aefv, split, write_aefv, FeatureSet, Sample, SplitSpec};
pub use error::{Error, Result};
pub use grad::{batch_gradient, fd_grad, param_shift_grad, sample_gradient, GradientBundle};
pub use metrics::{accuracy, mean_std, roc_auc, RocCurve, RunSummary};
pub use model::{ForwardTrace, Model, ModelConfig, ModelParams};
pub use optim::{run_repeats, train, AdamState, EpochRecord, TrainConfig, TrainOutcome};
pub use statevector::{circuit_unitary, AngleSource, GateKind, GateOp, StateVector};
