pub mod bench;
pub mod biortho;
pub mod cli;
pub mod config;
pub mod error;
pub mod gram;
pub mod io;
pub mod linalg;
pub mod models;
pub mod pt;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use verify::{full_verification, RelationId, Status, VerificationReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/biorthonormal.md")]
    mod biorthonormal {}
    #[doc = include_str!("../../../book/src/signature.md")]
    mod signature {}
    #[doc = include_str!("../../../book/src/gram.md")]
    mod gram {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
