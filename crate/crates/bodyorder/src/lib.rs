//! Experiment runner, configuration schema and file formats on top of
//! `bodyorder-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod presets;
