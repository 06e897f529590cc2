//! Implementability and charge quantum numbers of quasi-free endomorphisms
//! of CAR and CCR algebras on truncated self-dual spaces.

pub mod app;
pub mod builders;
pub mod car;
pub mod ccr;
pub mod dirac;
pub mod error;
pub mod fock;
pub mod gauge;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod report;
pub mod selfdual;

pub use error::{Error, Result};
