#![cfg_attr(not(feature = "std"), no_std)]
//! Moduli spaces of flat connections on surfaces with boundary, with their
//! quasi-Hamiltonian 2-form and boundary-holonomy moment map.

extern crate alloc;

pub mod error;
pub mod dirac;
pub mod dynamics;
pub mod forms;
pub mod groupoid;
pub mod lie;
pub mod linalg;
pub mod moduli;
pub mod surface;

pub use error::{Error, Result};
