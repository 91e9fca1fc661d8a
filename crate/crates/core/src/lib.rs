//! Compressive estimation of doubly-selective channels in large-scale
//! MIMO-OFDM.
//!
//! The pipeline compresses each tap trajectory with a complex-exponential
//! basis expansion, places grouped guard pilots so the selected received
//! subcarriers are free of inter-carrier interference, and recovers the
//! basis coefficients of all transmit antennas jointly with simultaneous
//! OMP, exploiting the delay-domain support they share.
//!
//! Modules follow the data flow:
//! [`bem`] → [`channel`] → [`pilot`] → [`recovery`] → [`smoothing`] →
//! [`harness`].

pub mod bem;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pilot;
pub mod recovery;
pub mod smoothing;
pub mod verify;

pub use bem::{
    bem_fit, bem_reconstruct, cebem_basis, freq_channel_matrix, BasisMatrix, BemCoefficients,
    ChannelRealization,
};
pub use channel::{ChannelModel, OfdmSymbol, SystemConfig};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use pilot::{IndexSets, PilotPlan};
pub use recovery::{
    DcsProblem, MeasurementMatrix, SelectionMode, SompOptions, SompResult, StopRule,
};
