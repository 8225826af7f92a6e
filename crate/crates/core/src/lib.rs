//! Desk-scale verification lab for a secret-sharing hypothesis class and
//! the limits of local regularization in transductive learning.
//!
//! The crate certifies, by exhaustive enumeration and exact rational
//! arithmetic, that every locally injective regularizer over the enumerated
//! class incurs average error at least 1/4 on the coupled adversarial
//! instances, alongside the supporting facts: conditional uniformity of the
//! hidden test point, the consistency ladder behind the preference cycle,
//! learnability of the class via its distinct label sets, the shattering
//! bound, and the secret-sharing primitives the class is built from.

pub mod adversary;
pub mod error;
pub mod hypotheses;
pub mod regularization;
pub mod secretsharing;
pub mod shattering;
pub mod strings;
pub mod transduction;

pub use error::{Error, Result};
