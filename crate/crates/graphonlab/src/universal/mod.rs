//! The universal graphon `W_0` built around a step graphon `W_F`: input
//! normalization, the part table, the tiles, and numerical verification of
//! the structure the constraint suites pin down.

mod build;
mod input;
mod table;
mod tiles;
mod verify;

pub use build::{build_from_normalized, build_w0, universal, Mutation, W0};
pub use input::{epsilon_of, monotone_reorder, normalize_input, Normalized, Params, ReorderedInput};
pub use table::{build_part_table, delta, primes, Blocks};
pub use tiles::{mock_ckm, BalanceColumn, BalanceStats, MockCkm, PartColumn, RefKind, RefTile, CKM_PARTS};
pub use verify::{verify_w0, Check, SuiteOutcome, VerifyOptions, VerifyReport, VERIFY_SUITES};
