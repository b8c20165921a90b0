pub mod channel;
pub mod construct;
pub mod decide;
pub mod error;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod spectra;

pub use channel::{minimal_kraus_from_choi, Field, QuantumChannel, ValidationReport};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Tolerance};
