//! Safety verification for unknown discrete-time linear systems from noisy
//! input-state data.
//!
//! The pipeline identifies a matrix-zonotope set of all models consistent
//! with the recorded trajectories and a known noise bound, propagates
//! reachable sets through that model set, synthesizes a polynomial barrier
//! certificate for it via sum-of-squares programming, and independently
//! validates the certificate against both the model set and the simulated
//! ground-truth system.
//!
//! Modules roughly follow the data flow:
//!
//! * [`sets`] — zonotope, matrix-zonotope, and interval arithmetic
//! * [`sysid`] — trajectory simulation, data matrices, model-set identification
//! * [`reach`] — reachable-set over-approximation through the model set
//! * [`poly`] — sparse multivariate polynomials
//! * [`sos`] — barrier templates and the sum-of-squares lowering
//! * [`sdp`] — a dense primal-dual interior-point solver and SDPA file I/O
//! * [`certify`] — a-posteriori certificate checking and falsification
//! * [`scenario`] — end-to-end configuration, orchestration, and reports

pub mod certify;
pub mod poly;
pub mod reach;
pub mod rng;
pub mod scenario;
pub mod sdp;
pub mod sets;
pub mod sos;
pub mod sysid;
