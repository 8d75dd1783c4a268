//! Command-line harness for `loopmp`: benchmarks on triangle chains and thin
//! wrappers around inference, transforms, neighborhoods and validation.

pub mod bench;
pub mod commands;
