#![no_std]
//! Linear multibody models of a spacecraft assembling a flexible modular
//! structure with a walking three-arm robot, system-norm costs over the
//! robot's motions, and shortest-path planning of the assembly sequence.

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod linss;
pub mod modal;
pub mod pathopt;
pub mod multibody;
pub mod robot;
pub mod robust;
pub mod scenario;
pub mod tables;

pub use error::{Error, Result};
