//! Shared by this crate's integration tests and the workspace acceptance
//! suite.
#![allow(dead_code)]

pub mod golden;
pub mod oracle;
