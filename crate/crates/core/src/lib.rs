//! Training laboratory for RL-based network adaptation.
//!
//! The crate bundles three small networked-system simulators (adaptive
//! bitrate streaming, congestion control, load balancing), their classic
//! rule-based policies, a feed-forward policy network with a REINFORCE
//! trainer, and curriculum generators that steer training toward
//! environment configurations where the current policy trails a rule-based
//! baseline.

pub mod abr;
pub mod cc;
pub mod curriculum;
pub mod error;
pub mod eval;
pub mod lb;
pub mod policy;
pub mod rng;
pub mod rollout;
pub mod space;
pub mod trace;

pub use error::{Error, Result};
pub use space::{ConfigDistribution, EnvConfig, EnvSpace, ParamSpec, Scale, UseCase};
