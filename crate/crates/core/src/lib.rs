//! Simpson-rule defect bounds, the corrected Simpson rule and certified
//! composite quadrature for low-smoothness integrands.

pub mod applications;
pub mod bounds;
pub mod cli;
pub mod composite;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod extremal;
pub mod ranges;
pub mod simpson;
pub mod sum;
pub mod verify;

pub use bounds::{best_bound, BestBound, Enclosure, SmoothnessClass, Theorem};
pub use composite::{adaptive_integrate, composite_integrate, Partition};
pub use error::{Error, Result};
pub use expr::{parse, Expr};
pub use ranges::{DerivativeRange, RangeConfig, RangeProvider};
pub use simpson::{Interval, QuadratureResult, Rule};
