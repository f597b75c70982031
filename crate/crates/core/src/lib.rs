//! Monte Carlo simulation of millimeter-wave uplink coverage for UAVs
//! served by street-level and rooftop gNB deployments.
//!
//! Layering, bottom up: [`geometry`] places sites and UAVs, [`antenna`]
//! models elements and arrays, [`channel`] draws multipath, [`link`] turns a
//! channel into a beamformed SNR, [`network`] runs drops and aggregates, and
//! [`cli`] handles scenario files and output artifacts.

pub mod geometry;
pub mod antenna;
pub mod channel;
pub mod link;
pub mod network;
pub mod cli;
