//! Analysis of finite-dimensional positive operators: support expansion,
//! irreducibility, identity domination, and the peripheral spectrum.

pub mod campaign;
pub mod format;
pub mod gallery;
pub mod lattice;
pub mod operators;
pub mod spectral;
pub mod structure;
pub mod verdicts;
