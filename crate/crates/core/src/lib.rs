pub mod corpus;
pub mod diff;
pub mod feedback;
mod error_type;
pub mod report;
pub mod rng;
pub mod rules;
pub mod stats;
pub mod study;

pub use error_type::ErrorType;
