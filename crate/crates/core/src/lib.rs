//! Energetic cost of executing input-output strategies online, with
//! classical or quantum memory.
//!
//! A strategy is a unifilar transducer driven by i.i.d. inputs. From its exact
//! block law we get the work rate of any memory encoding, the extra cost of
//! answering immediately, and whether a quantum memory can do strictly
//! better. All energies are in units of kT ln 2.

pub mod case_studies;
pub mod corpus;
pub mod entropy;
pub mod par;
pub mod quantum_encoding;
pub mod thermo;
pub mod transducer;

pub use entropy::{Distribution, GramKernel, WeightedKernel};
pub use quantum_encoding::{GramEncoding, Provenance};
pub use thermo::ThermoReport;
pub use transducer::{BlockLaw, InputModel, Transducer};
