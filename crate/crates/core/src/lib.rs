//! Motivic Steenrod algebra computations over small fields: the dual Steenrod
//! algebra with its Hopf algebroid structure, the derivations `d` on its
//! Milnor-type quotients, and Witt-theoretic models of their kernels.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod eta_local;
pub mod field_data;
pub mod homology_engine;
pub mod linalg;
pub mod milnor_dual;
pub mod shadow_modules;
pub mod witt_models;

pub use error::{Error, Result};
pub use field_data::{FieldPreset, KmElement, KmMono, KwTower, PresetKind, WittRingModel};
pub use milnor_dual::{AElement, AMonomial, Bidegree, DualSteenrod, Pure, Scalar, ScalarMono, Side, SteenrodOp};
