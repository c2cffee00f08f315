//! Peak age-of-information (PAoI) toolkit for a single source and a single
//! server with generate-at-will updates, i.i.d. general service times and
//! preemptive threshold request policies.
//!
//! * [`distributions`]: service-time catalog with exact truncated moments.
//! * [`analytic`]: closed-form and series average PAoI per policy class.
//! * [`optimizer`]: optimal fixed threshold, minimum achievable PAoI and
//!   preemption-benefit verdicts; [`bellman`] cross-checks the optimum.
//! * [`simulator`]: Monte-Carlo sample paths and batch-means estimates.

pub mod analytic;
pub mod bellman;
pub mod distributions;
pub mod error;
pub mod estimate;
pub mod extended;
pub mod optimizer;
pub mod par;
pub mod policy;
pub mod quadrature;
pub mod simulator;
mod special;

pub use analytic::{PaoiValue, ThresholdSequence};
pub use distributions::ServiceDistribution;
pub use error::{Error, Result};
pub use estimate::PaoiEstimate;
pub use extended::ExtendedReal;
pub use optimizer::{OptimizationResult, PreemptionVerdict, SearchWindow, Winner};
pub use par::Execution;
pub use policy::{Policy, ThresholdSampler};
pub use simulator::PeakRecord;
