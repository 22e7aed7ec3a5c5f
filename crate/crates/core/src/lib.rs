//! Distributed leader-follower tracking with input observers.
//!
//! Followers on an undirected graph reconstruct the leader's input, position
//! and (for double integrators) velocity from neighborhood information only,
//! and feed those estimates into linear tracking controllers.
//!
//! - [`graph`]: topologies, Laplacian and coupling matrices, stability predicates.
//! - [`signals`]: leader input generators and agent plants.
//! - [`observers`]: the per-follower observer rate functions.
//! - [`control`]: control laws and gain conditions.
//! - [`sim`]: closed-loop assembly and fixed-step integration.
//! - [`verify`]: matrix-form error dynamics and independent oracles.
//! - [`scenario`], [`output`], [`plot`]: scenario files, CSV/metrics bundles, SVG charts.
//! - [`acceptance`]: the end-to-end acceptance criteria.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod control;
pub mod graph;
pub mod observers;
pub mod output;
pub mod plot;
pub mod presets;
pub mod scenario;
pub mod signals;
pub mod sim;
pub mod verify;
