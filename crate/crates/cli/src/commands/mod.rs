pub mod corpus;
pub mod feedback;
pub mod stats;
pub mod study;
