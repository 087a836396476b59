//! Units and 2-class numbers of the real octic fields `Q(√2, √p, √q)` with
//! `p ≡ 1 (mod 8)` and `q ≡ 7 (mod 8)`.

pub mod arith;
pub mod classnumber;
pub mod error;
pub mod harness;
mod interval;
pub mod octic;
pub mod quadratic;
pub mod tables;
pub mod theorems;
pub mod unit_lattice;

pub use arith::PrimePair;
pub use classnumber::{ClassNumberReport, SubfieldH2};
pub use error::{Error, Result};
pub use harness::{
    scan_pairs, verify_pair, ScanReport, ScanSummary, Status, VerificationRecord, VerifyConfig,
};
pub use octic::{Automorphism, OcticElem, SqrtOutcome};
pub use quadratic::{FundamentalUnit, QuadElem};
pub use theorems::{CaseTag, SquareClass, TheoremCase};
pub use unit_lattice::{BaseUnit, PairUnits, UnitWord};
