//! Config-driven experiment runner for orbit-separation growth.

pub mod config;
pub mod report;
pub mod suites;
