//! Numerical study of the I_CH3 Bell functional `c·I_CH + I_3` on two
//! qubits: quantum maxima over general three-outcome POVMs and projective
//! measurements, tolerance of the POVM advantage to experimental error, and
//! threshold detection efficiencies.

pub mod efficiency;
pub mod error;
pub mod inequality;
pub mod optimizer;
pub mod oracle;
pub mod par;
pub mod quantum;
pub mod tolerance;

pub use error::{Error, Result};
pub use inequality::{ich3_value, lhv_max, RankClass, RankProfile, Scenario};
pub use optimizer::{multistart, OptimizationRecord, OptimizerConfig};
pub use par::Execution;
pub use quantum::{StateSpec, TwoQubitPureState};
