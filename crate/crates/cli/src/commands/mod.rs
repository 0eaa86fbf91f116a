pub mod analyze;
pub mod compile;
pub mod report;
pub mod solve;
