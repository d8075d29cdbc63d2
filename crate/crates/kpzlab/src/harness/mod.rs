//! Configuration, deterministic seeding, replica execution, persistence and
//! experiment kernels.

mod checks;
mod experiments;
mod run;
mod seed;

pub use checks::*;
pub use experiments::*;
pub use run::*;
pub use seed::*;
