//! Oscillator sequence dictionaries on the finite line `F_p`.
//!
//! Signals are complex functions on `F_p` for an odd prime `p`. The crate builds
//! the Heisenberg (chirp) system from the lines of the time-frequency plane and
//! the oscillator system from the maximal tori of `SL2(F_p)` acting through the
//! Weil representation. It also checks their correlation bounds and runs the
//! discrete radar and CDMA simulations on top of them.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod field;
pub mod heisenberg;
pub mod io;
pub mod oscillator;
pub mod signal;
pub mod sims;
pub mod spectral;
pub mod tori;
pub mod weil;

pub use error::{Error, Result};
pub use field::{Characters, Fp, PrimeModulus, Tolerance};
pub use signal::{Provenance, Signal, SignalDictionary, SystemKind, UnitaryOperator};
