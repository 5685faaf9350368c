pub mod bogoliubov;
pub mod error;
pub mod first_order;
pub mod fock;
pub mod numerics;
pub mod potentials;
pub mod report;
pub mod scattering;
pub mod thermo;

pub use error::{Error, Result};
