//! Command-line front end: configuration, the space and check registry,
//! the sweep runner, the tight span pipeline and static plots.

pub mod config;
pub mod plot;
pub mod registry;
pub mod run;
pub mod tightspan;

/// Exit codes: all checks passed, some check failed, bad usage or input.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
