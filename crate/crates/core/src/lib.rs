//! Photon-Carnot engine toolkit.
//!
//! A single cavity mode is pumped by a beam of three-level atoms carrying
//! ground-state coherence (phaseonium) and drained by cavity loss. The crate
//! covers the full chain from the exact single-atom Jaynes–Cummings map to
//! the steady photon number, the effective field temperature, and the
//! resulting Carnot cycle:
//!
//! - [`fock`]: truncated field density matrices.
//! - [`atoms`]: injected atomic states and dephasing.
//! - [`jc`]: block-diagonal atom–field evolution and the single-atom map.
//! - [`micromaser`]: master equation, time evolution, steady states.
//! - [`carnot`]: effective temperatures, photon entropy, cycle and efficiency.
//! - [`feasibility`]: order-of-magnitude comparison for hardware platforms.

pub mod atoms;
pub mod carnot;
pub mod constants;
pub mod error;
pub mod feasibility;
pub mod fock;
pub mod jc;
pub mod micromaser;

pub use error::{ErrorKind, PceError, Result};
