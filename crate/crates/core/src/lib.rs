//! Recent-k-record (RkR) statistics for i.i.d. discrete sequences.
//!
//! `X_n` is a `j`-RkR when exactly `j` of the `k` values before it are at
//! least as large as it. The crate provides closed-form probabilities for
//! these events ([`records`]), exact enumeration ([`oracle`]) and seeded
//! simulation ([`montecarlo`]) to check them, a Stein-Chen Poisson
//! approximation for event counts ([`poisson`]), a local-lemma feasibility
//! check ([`lll`]), and sliding-window scan statistics ([`scan`]).
//!
//! Distributions live on `{1, ..., M}` and every index and value in the
//! public API is 1-based.

pub mod distribution;
pub mod error;
pub mod lll;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod poisson;
pub mod records;
pub mod scan;

pub use distribution::{Family, Pmf, PmfSource};
pub use error::{Result, RkrError};
pub use lll::{lll_check, lll_constant, lll_threshold, DegreeForm, LllVerdict};
pub use montecarlo::{Estimate, SimConfig};
pub use oracle::EnumBudget;
pub use poisson::{BoundForm, BoundReport, CountDistribution, CountSource};
pub use records::{EventSeries, PredictionForm, RecordQuery, SuccessiveForm, Transition};
pub use scan::{ScanResult, ScanTarget, TailMethod, TailValue};
