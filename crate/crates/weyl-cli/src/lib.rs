//! Library side of the `weyl` command line tool: job descriptions, report
//! serialization, chi parsing and the verification suites. The binary in
//! `main.rs` is a thin clap wrapper over these functions, and the acceptance
//! tests drive them directly.

pub mod chispec;
pub mod report;
pub mod rng;
pub mod session;
pub mod suites;

pub use report::{CheckLine, FoldReport, JobSpec, VerifyReport, WeylReport};
pub use session::FoldSession;
