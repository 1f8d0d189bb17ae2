//! Throughput evaluation, optimization and verification for a two-cell
//! uplink whose base stations compress-and-forward over backhaul links that
//! are randomly in a low- or a high-capacity state.
//!
//! * [`model`]: parameters, backhaul states, gains and gain matrices.
//! * [`numerics`]: log-det forms, quadratic roots, searches and rate LP.
//! * [`nonfading`]: layered scheme without fading and the genie upper bound.
//! * [`fading`]: two-layer scheme under quasi-static Rayleigh fading.
//! * [`oracle`]: independent recomputation through joint Gaussian covariances.

pub mod error;
pub mod fading;
pub mod model;
pub mod nonfading;
pub mod numerics;
pub mod oracle;
pub mod par;

pub use error::{Error, Result};
pub use par::Execution;
