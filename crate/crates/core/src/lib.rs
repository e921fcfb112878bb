//! Simulation toolkit for community-based access-control lists in ego-networks.
//!
//! The pipeline generates an attributed ego-network under configurable
//! workplace homophily, detects communities, predicts an ACL from a handful of
//! labelled untrusted contacts, and stresses that ACL with an attribute-weighted
//! independent cascade, optionally after removing gatekeeper contacts.

pub mod acl;
pub mod community;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod harness;
pub mod netgen;
pub mod rng;

pub use error::{Error, Result};
