//! Exact inversion of formal power series maps F(X) = X + H(X) by the
//! alternating-sum delta iteration, over Q and over prime fields.
//!
//! The crate is organized around:
//! - [`field`]: exact coefficients (arbitrary-precision rationals, F_p residues);
//! - [`series`]: sparse truncated multivariate series and maps;
//! - [`lang`]: the text format for map definitions and canonical printing;
//! - [`invert`]: the delta iteration, its stopping rule, and an independent
//!   fixed-point oracle;
//! - [`symmetry`]: extraction of polynomial inverses and the residual /
//!   iterate-decomposition identities that certify them;
//! - [`report`]: plain-text and JSON reports for the CLI.
//!
//! All values are immutable after construction and operations are pure, so
//! everything here is safe to share across threads.

pub mod error;
pub mod field;
pub mod invert;
pub mod lang;
pub mod report;
pub mod series;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use series::{Monomial, Order, SeriesMap, TruncatedSeries};
