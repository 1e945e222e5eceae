//! Cooperative multi-robot search for an unknown number of static targets.
//!
//! Robots carry a particle PHD belief, exchange raw measurements with peers in radio
//! range, and periodically check in with a server over fixed access points. Exploiting
//! robots form coalitions and choose joint moves that maximize the mutual information
//! between the target set and their binary detection events.

pub mod coord;
pub mod env;
pub mod info;
pub mod phd;
pub mod sensing;
pub mod sim;
pub mod stats;
