//! Scaling maps, empirical statistics, the Tracy-Widom reference and the
//! diagnostics built on them.

mod diagnostics;
mod scaling;
mod stats;
mod tw;

pub use diagnostics::*;
pub use scaling::*;
pub use stats::*;
pub use tw::*;
