//! The guide under `book/`, included chapter by chapter so that
//! `cargo test` runs every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/schemes.md")]
pub mod schemes {}
#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("../../../book/src/green-functions.md")]
pub mod green_functions {}
#[doc = include_str!("../../../book/src/boundary-layers.md")]
pub mod boundary_layers {}
#[doc = include_str!("../../../book/src/resolvent.md")]
pub mod resolvent {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
