//! Subspace designs, q-GDDs and q-PBDs: construction, file format and
//! verification.

pub mod expand;
pub mod gdd;
pub mod instance;
pub mod ops;
pub mod pbd;
pub mod verify;

pub use expand::{block_count, expand, to_explicit};
pub use gdd::{build_gdd, build_gdd_from_labels, desarguesian_spread, gdd_lambda, GddSelection};
pub use instance::{Blocks, ClassLambdas, DesignInstance, ImplicitBlocks, Kind, LineOrbit, TightOrbit};
pub use ops::{break_blocks, fill_holes, supplementary, FillHolesOutcome};
pub use pbd::build_pbd;
pub use verify::{pair_counts, verify, verify_design, verify_gdd, Mode, PairClass, VerifyReport};
